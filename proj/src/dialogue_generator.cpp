#include "summrag/dialogue_generator.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>

#include "json.hpp"
#include "summrag/orchestrator.hpp"
#include "summrag/prompts.hpp"
#include "summrag/token_protocol.hpp"
#include "summrag/util.hpp"

namespace summrag {
namespace {

using nlohmann::json;

std::string substitute(std::string text, const std::map<std::string, std::string>& vars) {
  for (const auto& [name, value] : vars) {
    const std::string needle = "{" + name + "}";
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
      text.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  return text;
}

// Opening-line paraphrase pools for the diversified first user message.

const std::array<const char*, 8> kTop1Openers = {
    "I need a summary about {topic}.",
    "Could you give me a summarization regarding {topic}?",
    "I'd like to have a summary of {topic}.",
    "Please summarize the latest information about {topic}.",
    "Can you pull together a summary on {topic} for me?",
    "Help me catch up on {topic} with a short summary.",
    "Write me a brief overview of {topic}.",
    "What is the story with {topic}? A summary would help.",
};

const std::array<const char*, 8> kDirectOpeners = {
    "Could you summarize the following text for me?",
    "Please condense the following text for me.",
    "I have a passage here; could you summarize it?",
    "Summarize this text for me, please.",
    "Can you boil the following text down to its key points?",
    "Here is some text I wrote; please give me a short summary.",
    "Would you mind summarizing the text below?",
    "Give me a concise summary of the following text.",
};

const std::array<const char*, 8> kCombinedOpeners = {
    "Hi, could you summarize the following text for me? Besides, could you also retrieve some "
    "related text and see if it can improve the summarization and also check the information "
    "conflict",
    "Could you summarize my text, retrieve anything related, and check for information conflicts?",
    "Please summarize the text I provide, and also look up related material to improve the "
    "summary and flag any conflicts.",
    "I want a summary of my text; also retrieve related documents and tell me if they conflict.",
    "Summarize the following text, and check retrieved material for relevance and information "
    "conflicts.",
    "Can you summarize my text and cross-check it against retrieved documents for conflicts?",
    "Help me summarize this text; retrieve supporting text and verify there is no information "
    "conflict.",
    "Please produce a summary of my text after checking retrieved text for relevance and "
    "conflicts.",
};

const std::array<const char*, 8> kMultiOpeners = {
    "Could you give a summarization regarding {topic} by summarizing the documents one-by-one? "
    "There are total {k} documents to summarize",
    "Please summarize the documents about {topic} one by one; there are {k} documents in total.",
    "I need a running summary on {topic}, document by document. {k} documents are queued.",
    "Summarize {k} documents regarding {topic} for me, one at a time.",
    "Could you work through the {k} documents on {topic} one-by-one and keep a combined summary?",
    "Give me a document-by-document summarization about {topic}; the set has {k} documents.",
    "Walk through all {k} documents about {topic} one by one and summarize as you go.",
    "I'd like {topic} summarized incrementally across the {k} documents provided.",
};

std::string opening_directive(const std::string& line) {
  return "\nThe user's first message must be exactly: ###" + line + "###";
}

std::string api_directive(const std::vector<std::string>& apis) {
  std::string csv;
  for (const auto& name : apis) {
    if (!csv.empty()) csv += ",";
    csv += name;
  }
  return "\nAfter the summarization turn, the user asks for follow-up analysis and the assistant "
         "must call exactly these APIs in order: ###" +
         csv + "###";
}

// The generator reply must be (or contain) a JSON array of {role, content}
// dicts. Models like to wrap arrays in prose, so fall back to the outermost
// bracketed slice.
json parse_reply_array(const std::string& reply) {
  const std::string trimmed = trim(reply);
  try {
    json doc = json::parse(trimmed);
    if (doc.is_array()) return doc;
  } catch (const json::exception&) {
  }
  const std::size_t first = trimmed.find('[');
  const std::size_t last = trimmed.rfind(']');
  if (first == std::string::npos || last == std::string::npos || last <= first) {
    throw GenerationError("generator reply contains no JSON array: " + trimmed);
  }
  json doc = json::parse(trimmed.substr(first, last - first + 1));
  if (!doc.is_array()) throw GenerationError("generator reply is not a JSON array: " + trimmed);
  return doc;
}

std::vector<AnnotatedTurn> turns_from_array(const json& array) {
  std::vector<AnnotatedTurn> turns;
  for (const auto& item : array) {
    const auto role = role_from_string(item.at("role").get<std::string>());
    if (!role) throw GenerationError("unknown role in generator reply: " + item.dump());
    turns.push_back(parse_turn(*role, item.at("content").get<std::string>()));
  }
  return turns;
}

const Document& random_doc(const Corpus& corpus, SplitMix& rng) {
  return corpus.at(static_cast<std::size_t>(rng.bounded(corpus.size())));
}

std::string doc_topic(const Document& doc, ChatBackend& generator) {
  if (doc.topic && !doc.topic->empty()) return *doc.topic;
  try {
    const std::string reply =
        trim(generator.complete(prompts::render("gen.topic_extract", {{"text", doc.text}})));
    if (!reply.empty()) return reply;
  } catch (const BackendError&) {
    // Offline fallback below.
  }
  return lexical_topic(doc.text);
}

std::vector<std::string> sample_apis(Scenario scenario, SplitMix& rng) {
  if (rng.unit() >= kApiTailProbability) return {};
  // Scenarios that produce no summary can only request the topic-driven API.
  if (scenario == Scenario::S2 || scenario == Scenario::S6) return {"Collect_Online"};
  std::array<std::size_t, 3> order = {0, 1, 2};
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[static_cast<std::size_t>(rng.bounded(i + 1))]);
  }
  const std::size_t n = 1 + static_cast<std::size_t>(rng.bounded(3));
  std::vector<std::string> apis;
  for (std::size_t i = 0; i < n; ++i) apis.push_back(kApiNames[order[i]]);
  return apis;
}

struct Recipe {
  std::string prompt;
  std::string opening;                 // empty when not pinned
  std::vector<std::string> apis;       // empty when no tail requested
  std::vector<std::string> corpus_ids;
  // Post-generation judge verification.
  std::function<bool(ChatBackend&)> verify = [](ChatBackend&) { return true; };
};

Recipe make_recipe(Scenario scenario, const GenerationSpec& spec, ChatBackend& generator,
                   SplitMix& rng, const std::string& salt) {
  const Corpus& corpus = *spec.corpus;
  Recipe recipe;
  recipe.apis = sample_apis(scenario, rng);

  std::map<std::string, std::string> vars;
  std::string directives;
  auto pin_opening = [&](const std::array<const char*, 8>& pool,
                         const std::map<std::string, std::string>& slot_vars) {
    if (!spec.diversify) return;
    recipe.opening = substitute(pool[static_cast<std::size_t>(rng.bounded(pool.size()))], slot_vars);
    directives += opening_directive(recipe.opening);
  };

  switch (scenario) {
    case Scenario::S1: {
      const Document& doc = random_doc(corpus, rng);
      const std::string topic = doc_topic(doc, generator);
      recipe.corpus_ids = {doc.id};
      pin_opening(kTop1Openers, {{"topic", topic}});
      if (!recipe.apis.empty()) directives += api_directive(recipe.apis);
      vars = {{"topic", topic},
              {"retrieval_text", doc.text},
              {"one_shot", prompts::text("gen.top1.one_shot")},
              {"directives", directives}};
      recipe.prompt = prompts::render("gen.top1", vars);
      recipe.verify = [topic, text = doc.text](ChatBackend& judge) {
        return judge_relevance(judge, topic, text).verdict;
      };
      break;
    }
    case Scenario::S2: {
      const Document& doc = random_doc(corpus, rng);
      const std::string topic = pick_irrelevant_topic(corpus, doc, rng.next());
      recipe.corpus_ids = {doc.id};
      pin_opening(kTop1Openers, {{"topic", topic}});
      if (!recipe.apis.empty()) directives += api_directive(recipe.apis);
      vars = {{"topic", topic},
              {"retrieval_text", doc.text},
              {"one_shot", prompts::text("gen.top1.one_shot")},
              {"directives", directives}};
      recipe.prompt = prompts::render("gen.top1", vars);
      recipe.verify = [topic, text = doc.text](ChatBackend& judge) {
        return !judge_relevance(judge, topic, text).verdict;
      };
      break;
    }
    case Scenario::S3: {
      const Document& doc = random_doc(corpus, rng);
      recipe.corpus_ids = {doc.id};
      pin_opening(kDirectOpeners, {});
      if (!recipe.apis.empty()) directives += api_directive(recipe.apis);
      vars = {{"user_text", doc.text},
              {"one_shot", prompts::text("gen.direct.one_shot")},
              {"directives", directives}};
      recipe.prompt = prompts::render("gen.direct", vars);
      break;
    }
    case Scenario::S4: {
      const Document& user_doc = random_doc(corpus, rng);
      std::vector<std::size_t> others;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Document& candidate = corpus.at(i);
        if (candidate.id != user_doc.id && candidate.topic != user_doc.topic) others.push_back(i);
      }
      if (others.empty()) {
        throw GenerationError("corpus has no cross-topic document pair for the irrelevant "
                              "retrieval scenario");
      }
      const Document& retrieval_doc =
          corpus.at(others[static_cast<std::size_t>(rng.bounded(others.size()))]);
      recipe.corpus_ids = {user_doc.id, retrieval_doc.id};
      pin_opening(kCombinedOpeners, {});
      if (!recipe.apis.empty()) directives += api_directive(recipe.apis);
      vars = {{"user_text", user_doc.text},
              {"retrieval_text", retrieval_doc.text},
              {"one_shot", prompts::text("gen.combined.ignore.one_shot")},
              {"directives", directives}};
      recipe.prompt = prompts::render("gen.combined.ignore", vars);
      recipe.verify = [user = user_doc.text, retrieval = retrieval_doc.text](ChatBackend& judge) {
        return !judge_text_relevance(judge, user, retrieval).verdict;
      };
      break;
    }
    case Scenario::S5: {
      std::string user_text, retrieval_text;
      if (spec.s5_from_corpus) {
        // Pick a topic backed by at least two corpus documents.
        std::vector<std::string> eligible;
        for (const auto& topic : corpus.topics()) {
          std::size_t hits = 0;
          for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (corpus.at(i).topic == topic) ++hits;
          }
          if (hits >= 2) eligible.push_back(topic);
        }
        if (eligible.empty()) {
          throw GenerationError("corpus has no topic with two documents for the augmenting "
                                "scenario");
        }
        const std::string topic =
            eligible[static_cast<std::size_t>(rng.bounded(eligible.size()))];
        std::vector<const Document*> docs;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
          if (corpus.at(i).topic == topic) docs.push_back(&corpus.at(i));
        }
        const std::size_t a = static_cast<std::size_t>(rng.bounded(docs.size()));
        std::size_t b = static_cast<std::size_t>(rng.bounded(docs.size() - 1));
        if (b >= a) ++b;
        user_text = docs[a]->text;
        retrieval_text = docs[b]->text;
        recipe.corpus_ids = {docs[a]->id, docs[b]->id};
      } else {
        // Model-written pair on a model-chosen subtopic.
        const std::string topic = trim(
            generator.complete(prompts::render("gen.topic_pool", {{"salt", salt}})));
        if (topic.empty()) throw GenerationError("empty subtopic from generator");
        const std::string pair_reply =
            generator.complete(prompts::render("gen.doc_pair", {{"topic", topic}}));
        const json pair = parse_reply_array(pair_reply);
        if (pair.size() != 2) {
          throw GenerationError("expected two documents from generator, got: " + pair.dump());
        }
        user_text = pair.at(0).get<std::string>();
        retrieval_text = pair.at(1).get<std::string>();
      }
      pin_opening(kCombinedOpeners, {});
      if (!recipe.apis.empty()) directives += api_directive(recipe.apis);
      vars = {{"user_text", user_text},
              {"retrieval_text", retrieval_text},
              {"one_shot", prompts::text("gen.combined.augment.one_shot")},
              {"directives", directives}};
      recipe.prompt = prompts::render("gen.combined.augment", vars);
      recipe.verify = [user = user_text, retrieval = retrieval_text](ChatBackend& judge) {
        return judge_text_relevance(judge, user, retrieval).verdict &&
               !judge_conflict(judge, user, retrieval).verdict;
      };
      break;
    }
    case Scenario::S6: {
      // Find a document a rule-mode injection applies to, trying kinds in a
      // seeded rotation.
      const Document& doc = random_doc(corpus, rng);
      static const std::array<ConflictKind, 3> kKinds = {
          ConflictKind::NumberChange, ConflictKind::FactualReversal, ConflictKind::DateAlteration};
      const std::size_t start = static_cast<std::size_t>(rng.bounded(kKinds.size()));
      std::optional<Document> altered;
      for (std::size_t j = 0; j < kKinds.size() && !altered; ++j) {
        try {
          altered = inject_conflict(doc, kKinds[(start + j) % kKinds.size()]).first;
        } catch (const GenerationError&) {
          // Kind has no target in this text; try the next one.
        }
      }
      if (!altered) {
        throw GenerationError("document '" + doc.id + "' offers no conflict-injection target");
      }
      recipe.corpus_ids = {doc.id};
      pin_opening(kCombinedOpeners, {});
      if (!recipe.apis.empty()) directives += api_directive(recipe.apis);
      vars = {{"user_text", doc.text},
              {"retrieval_text", altered->text},
              {"one_shot", prompts::text("gen.combined.conflict.one_shot")},
              {"directives", directives}};
      recipe.prompt = prompts::render("gen.combined.conflict", vars);
      recipe.verify = [user = doc.text, retrieval = altered->text](ChatBackend& judge) {
        return judge_text_relevance(judge, user, retrieval).verdict &&
               judge_conflict(judge, user, retrieval).verdict;
      };
      break;
    }
    case Scenario::S7:
      throw PreconditionError("multi-document dialogues go through gen_multidoc_dialogue");
  }
  return recipe;
}

std::string check_dialogue(const Dialogue& dialogue, Scenario scenario, const Recipe& recipe) {
  const ValidationReport report = validate_dialogue(dialogue);
  if (!report.ok()) {
    std::string reasons;
    for (const auto& violation : report.violations) {
      if (!reasons.empty()) reasons += "; ";
      reasons += violation.code + ": " + violation.message;
    }
    return reasons;
  }
  try {
    const Scenario classified = classify_scenario(dialogue);
    if (classified != scenario) {
      return std::string("classified as ") + std::string(to_string(classified));
    }
  } catch (const ClassificationError& e) {
    return e.what();
  }
  if (!recipe.opening.empty() &&
      (dialogue.turns.empty() ||
       !dialogue.turns.front().plain_text().starts_with(recipe.opening))) {
    return "first user turn does not start with the pinned opening line";
  }
  if (!recipe.apis.empty()) {
    bool has_api = false;
    for (const auto& turn : dialogue.turns) has_api |= turn.contains(SpecialToken::ApiOpen);
    if (!has_api) return "requested API tail is missing";
  }
  return "";
}

}  // namespace

std::string to_string(ConflictKind kind) {
  switch (kind) {
    case ConflictKind::NumberChange: return "NumberChange";
    case ConflictKind::FactualReversal: return "FactualReversal";
    case ConflictKind::DateAlteration: return "DateAlteration";
  }
  return "NumberChange";
}

std::string pick_irrelevant_topic(const Corpus& corpus, const Document& doc, std::uint64_t seed) {
  std::vector<std::string> eligible;
  for (const auto& topic : corpus.topics()) {
    if (!doc.topic || topic != *doc.topic) eligible.push_back(topic);
  }
  if (eligible.empty()) {
    throw GenerationError("corpus offers no topic unrelated to document '" + doc.id + "'");
  }
  SplitMix rng(seed);
  return eligible[static_cast<std::size_t>(rng.bounded(eligible.size()))];
}

std::pair<Document, std::pair<std::size_t, std::size_t>> inject_conflict(const Document& doc,
                                                                         ConflictKind kind,
                                                                         ConflictMode mode,
                                                                         ChatBackend* generator) {
  if (mode == ConflictMode::model) {
    if (generator == nullptr) {
      throw PreconditionError("model-mode conflict injection needs a generator backend");
    }
    const std::string altered = trim(generator->complete(prompts::render(
        "gen.inject_conflict", {{"kind", to_string(kind)}, {"text", doc.text}})));
    if (altered.empty() || altered == trim(doc.text)) {
      throw GenerationError("generator produced no conflicting rewrite for kind " +
                            to_string(kind));
    }
    Document out = doc;
    out.text = altered;
    return {out, {0, altered.size()}};
  }

  const std::string& text = doc.text;
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };

  switch (kind) {
    case ConflictKind::NumberChange: {
      for (std::size_t i = 0; i < text.size();) {
        if (!is_digit(text[i])) {
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_digit(text[j])) ++j;
        if (j - i <= 18) {  // fits in unsigned long long with room to double
          const unsigned long long value = std::stoull(text.substr(i, j - i));
          const std::string doubled = std::to_string(value * 2);
          Document out = doc;
          out.text = text.substr(0, i) + doubled + text.substr(j);
          return {out, {i, i + doubled.size()}};
        }
        i = j;
      }
      throw GenerationError("no numeral to change for NumberChange in document '" + doc.id + "'");
    }
    case ConflictKind::DateAlteration: {
      for (std::size_t i = 0; i < text.size();) {
        if (!is_digit(text[i])) {
          ++i;
          continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_digit(text[j])) ++j;
        if (j - i == 4) {
          const int year = std::stoi(text.substr(i, 4));
          if (year >= 1000 && year <= 2999) {
            const std::string decremented = std::to_string(year - 1);
            Document out = doc;
            out.text = text.substr(0, i) + decremented + text.substr(j);
            return {out, {i, i + decremented.size()}};
          }
        }
        i = j;
      }
      throw GenerationError("no four-digit year to alter for DateAlteration in document '" +
                            doc.id + "'");
    }
    case ConflictKind::FactualReversal: {
      static const std::array<std::string, 4> kVerbs = {"is", "are", "was", "were"};
      const std::string lower = to_lower(text);
      for (std::size_t i = 0; i < lower.size(); ++i) {
        for (const auto& verb : kVerbs) {
          if (lower.compare(i, verb.size(), verb) != 0) continue;
          const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(lower[i - 1]));
          const std::size_t end = i + verb.size();
          const bool right_ok =
              end < lower.size() && !std::isalnum(static_cast<unsigned char>(lower[end]));
          if (!left_ok || !right_ok) continue;
          // Find the next word; skip clauses that are already negated.
          std::size_t next = end;
          while (next < lower.size() &&
                 std::isspace(static_cast<unsigned char>(lower[next]))) {
            ++next;
          }
          if (next >= lower.size()) continue;
          if (lower.compare(next, 4, "not ") == 0 || lower.compare(next, 3, "no ") == 0) continue;
          Document out = doc;
          out.text = text.substr(0, next) + "not " + text.substr(next);
          return {out, {next, next + 4}};
        }
      }
      throw GenerationError("no copular clause to reverse for FactualReversal in document '" +
                            doc.id + "'");
    }
  }
  throw GenerationError("unhandled conflict kind");
}

Dialogue gen_top1_dialogue(Scenario scenario, const GenerationSpec& spec, ChatBackend& generator,
                           ChatBackend& judge, std::uint64_t task_index) {
  if (scenario == Scenario::S7) {
    throw PreconditionError("multi-document dialogues go through gen_multidoc_dialogue");
  }
  if (spec.corpus == nullptr) throw PreconditionError("generation spec has no corpus");

  SplitMix rng = SplitMix(spec.seed).fork(task_index);
  std::string last_failure = "no attempt made";
  std::string last_artifact;
  for (int attempt = 0; attempt < kGenerationRetryBudget; ++attempt) {
    const std::string salt = std::to_string(spec.seed) + "-" + std::to_string(task_index) + "-" +
                             std::to_string(attempt);
    Recipe recipe;
    try {
      recipe = make_recipe(scenario, spec, generator, rng, salt);
    } catch (const GenerationError& e) {
      last_failure = e.what();
      continue;
    }

    const std::string reply = generator.complete(recipe.prompt);
    Dialogue dialogue;
    dialogue.scenario = scenario;
    try {
      dialogue.turns = turns_from_array(parse_reply_array(reply));
    } catch (const Error& e) {
      last_failure = e.what();
      last_artifact = reply;
      continue;
    }

    const std::string problem = check_dialogue(dialogue, scenario, recipe);
    if (!problem.empty()) {
      last_failure = problem;
      last_artifact = reply;
      continue;
    }
    if (!recipe.verify(judge)) {
      last_failure = "judge rejected the sampled input pair";
      last_artifact = reply;
      continue;
    }

    std::string ids;
    for (const auto& id : recipe.corpus_ids) {
      if (!ids.empty()) ids += ",";
      ids += id;
    }
    dialogue.metadata["corpus_ids"] = ids;
    return dialogue;
  }
  throw GenerationError("gave up after " + std::to_string(kGenerationRetryBudget) +
                        " attempts (" + last_failure + "); last artifact: " + last_artifact);
}

Dialogue gen_multidoc_dialogue(const std::string& topic, const std::vector<Document>& docs,
                               ChatBackend& generator, const std::string& opening_line) {
  if (docs.size() < 2) {
    throw PreconditionError("multi-document dialogue needs at least two documents");
  }

  auto run_stage = [&](std::size_t stage, const std::string& prompt,
                       const std::string& expect_unchanged) -> json {
    std::string last_failure;
    for (int attempt = 0; attempt < kGenerationRetryBudget; ++attempt) {
      const std::string reply = generator.complete(prompt);
      try {
        json array = parse_reply_array(reply);
        if (array.size() != 2) {
          last_failure = "expected two dialogue pieces, got " + std::to_string(array.size());
          continue;
        }
        if (!expect_unchanged.empty() &&
            array.at(0).at("content").get<std::string>() != expect_unchanged) {
          last_failure = "first piece was altered";
          continue;
        }
        return array;
      } catch (const Error& e) {
        last_failure = e.what();
      } catch (const json::exception& e) {
        last_failure = e.what();
      }
    }
    throw GenerationError("stage " + std::to_string(stage) + ": " + last_failure);
  };

  std::string directives;
  if (!opening_line.empty()) directives = opening_directive(opening_line);

  const json start = run_stage(
      0,
      prompts::render("gen.multi.start",
                      {{"k", std::to_string(docs.size())},
                       {"topic", topic},
                       {"document", docs[0].text},
                       {"relevant_example", prompts::text("gen.multi.start.relevant_example")},
                       {"irrelevant_example", prompts::text("gen.multi.start.irrelevant_example")},
                       {"directives", directives}}),
      "");

  std::vector<json> pieces = {start.at(0), start.at(1)};
  for (std::size_t i = 1; i + 1 < docs.size(); ++i) {
    const json step = run_stage(
        i,
        prompts::render("gen.multi.mid",
                        {{"example", prompts::text("gen.multi.mid.example")},
                         {"first_piece", pieces.back().dump()},
                         {"retrieval_text", docs[i].text}}),
        pieces.back().at("content").get<std::string>());
    pieces.push_back(step.at(1));
  }
  const json final_step = run_stage(
      docs.size() - 1,
      prompts::render("gen.multi.end", {{"example", prompts::text("gen.multi.mid.example")},
                                        {"first_piece", pieces.back().dump()},
                                        {"retrieval_text", docs.back().text}}),
      pieces.back().at("content").get<std::string>());
  pieces.push_back(final_step.at(1));

  Dialogue dialogue;
  dialogue.scenario = Scenario::S7;
  dialogue.turns = turns_from_array(json(pieces));

  const ValidationReport report = validate_dialogue(dialogue);
  if (!report.ok()) {
    std::string reasons;
    for (const auto& violation : report.violations) {
      if (!reasons.empty()) reasons += "; ";
      reasons += violation.code + ": " + violation.message;
    }
    throw GenerationError("assembled multi-document dialogue is invalid (" + reasons + ")");
  }
  std::string ids;
  for (const auto& doc : docs) {
    if (!ids.empty()) ids += ",";
    ids += doc.id;
  }
  dialogue.metadata["corpus_ids"] = ids;
  return dialogue;
}

std::vector<Dialogue> generate(const GenerationSpec& spec, ChatBackend& generator,
                               ChatBackend& judge, int in_flight) {
  if (spec.count < 1) throw PreconditionError("generation count must be at least 1");
  if (spec.corpus == nullptr) throw PreconditionError("generation spec has no corpus");
  const Corpus& corpus = *spec.corpus;
  if (corpus.size() == 0) throw PreconditionError("generation corpus is empty");

  std::vector<Dialogue> out(static_cast<std::size_t>(spec.count));
  parallel_for(out.size(), in_flight, [&](std::size_t i) {
    Dialogue dialogue;
    if (spec.scenario == Scenario::S7) {
      SplitMix rng = SplitMix(spec.seed).fork(i);
      const Document& anchor = random_doc(corpus, rng);
      const std::string topic = doc_topic(anchor, generator);
      const std::size_t k =
          std::min<std::size_t>(2 + rng.bounded(4), corpus.size());
      if (k < 2) throw GenerationError("corpus too small for a multi-document dialogue");

      // The anchor document leads; the rest are sampled without replacement.
      std::vector<Document> docs = {anchor};
      std::vector<std::size_t> pool;
      for (std::size_t d = 0; d < corpus.size(); ++d) {
        if (corpus.at(d).id != anchor.id) pool.push_back(d);
      }
      for (std::size_t d = 0; docs.size() < k; ++d) {
        const std::size_t pick = static_cast<std::size_t>(rng.bounded(pool.size()));
        docs.push_back(corpus.at(pool[pick]));
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
      }

      std::string opening;
      if (spec.diversify) {
        opening = substitute(
            kMultiOpeners[static_cast<std::size_t>(rng.bounded(kMultiOpeners.size()))],
            {{"topic", topic}, {"k", std::to_string(docs.size())}});
      }
      dialogue = gen_multidoc_dialogue(topic, docs, generator, opening);
    } else {
      dialogue = gen_top1_dialogue(spec.scenario, spec, generator, judge, i);
    }

    dialogue.metadata["dialogue_id"] = std::string(to_string(spec.scenario)) + "-" +
                                       std::to_string(spec.seed) + "-" + std::to_string(i);
    dialogue.metadata["scenario"] = std::string(to_string(spec.scenario));
    dialogue.metadata["seed"] = std::to_string(spec.seed);
    dialogue.metadata["generator_profile"] = generator.profile().name;
    dialogue.metadata["prompt_version"] = std::string(prompts::kLibraryVersion);
    out[i] = std::move(dialogue);
  });
  return out;
}

}  // namespace summrag
