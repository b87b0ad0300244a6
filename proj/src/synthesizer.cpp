#include "synthesizer.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <set>

#include "json.hpp"
#include "summrag/token_protocol.hpp"
#include "summrag/util.hpp"

namespace summrag::detail {
namespace {

using nlohmann::json;

std::string sur(SpecialToken t) { return std::string(surface(t)); }

bool has(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

// Pulls the payload out of the first ###...### slot that follows the label,
// skipping label occurrences that are not followed by a slot (the example
// blocks restate some label phrases without one).
std::optional<std::string> capture(const std::string& prompt, const std::string& label) {
  std::size_t from = 0;
  while (true) {
    std::size_t at = prompt.find(label, from);
    if (at == std::string::npos) return std::nullopt;
    std::size_t p = at + label.size();
    while (p < prompt.size() && std::isspace(static_cast<unsigned char>(prompt[p]))) ++p;
    if (prompt.compare(p, 3, "###") == 0) {
      std::size_t start = p + 3;
      std::size_t end = prompt.find("###", start);
      if (end == std::string::npos) return std::nullopt;
      return trim(prompt.substr(start, end - start));
    }
    from = at + label.size();
  }
}

std::string capture_or(const std::string& prompt, const std::string& label,
                       const std::string& fallback) {
  auto v = capture(prompt, label);
  return v ? *v : fallback;
}

// Slice between two literal markers, exclusive. Empty when either is absent.
std::string between(const std::string& text, const std::string& open, const std::string& close) {
  std::size_t a = text.find(open);
  if (a == std::string::npos) return "";
  a += open.size();
  std::size_t b = text.find(close, a);
  if (b == std::string::npos) return "";
  return trim(text.substr(a, b - a));
}

std::string after_last(const std::string& text, const std::string& marker) {
  std::size_t at = text.rfind(marker);
  if (at == std::string::npos) return "";
  return trim(text.substr(at + marker.size()));
}

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "the", "a",  "an",  "and",  "or", "of", "in",   "on",   "at",   "to",  "for", "with",
      "by",  "is", "are", "was",  "were", "it", "its", "as",   "that", "this", "from", "be",
      "has", "had", "have", "not", "but", "his", "her", "their"};
  return words;
}

std::map<std::string, int> content_multiset(const std::string& text) {
  std::map<std::string, int> counts;
  for (const auto& token : word_tokens(text)) {
    if (stopwords().count(token) == 0) ++counts[token];
  }
  return counts;
}

// Scenario-shaped dialogue builders. Each returns a JSON array of
// {role, content} dicts, matching what the construction prompts demand.

json turn(const char* role, std::string content) {
  return json{{"role", role}, {"content", std::move(content)}};
}

std::string api_call(const std::string& name, const std::string& arg) {
  return sur(SpecialToken::ApiOpen) + name + sur(SpecialToken::ApiClose) +
         sur(SpecialToken::ArgumentOpen) + " " + arg + sur(SpecialToken::ArgumentClose);
}

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t comma = csv.find(',', start);
    if (comma == std::string::npos) comma = csv.size();
    std::string item = trim(csv.substr(start, comma - start));
    if (!item.empty()) out.push_back(item);
    start = comma + 1;
  }
  return out;
}

void append_api_tail(json& turns, const std::string& api_csv, const std::string& topic,
                     const std::string& summary) {
  std::vector<std::string> apis = split_csv(api_csv);
  if (apis.empty()) return;
  std::string calls;
  for (const auto& name : apis) {
    const std::string& arg = (name == "Collect_Online" || summary.empty()) ? topic : summary;
    calls += api_call(name, arg);
  }
  turns.push_back(turn("user", "Great, thanks. Could you also run the follow-up analysis on that for me?"));
  turns.push_back(turn("assistant", "No problem, I will initiate the API request for you. " + calls));
}

std::string paragraph(const std::string& doc) {
  return sur(SpecialToken::ParagraphOpen) + " " + doc + " " + sur(SpecialToken::ParagraphClose);
}

std::string build_top1(const std::string& prompt) {
  const std::string topic = capture_or(prompt, "Here is the topic:", "");
  const std::string doc = capture_or(prompt, "Here is the retrieval text:", "");
  const std::string opening = capture_or(prompt, "The user's first message must be exactly:",
                                         "I need a summary about " + topic + ".");
  const bool relevant = lexical_relevance(topic, doc);
  const std::string summary = trim(doc);

  json turns = json::array();
  turns.push_back(turn("user", opening));
  std::string reply = sur(SpecialToken::Retrieval) + paragraph(doc);
  if (relevant) {
    reply += sur(SpecialToken::Relevant) + " " + summary;
  } else {
    reply += sur(SpecialToken::Irrelevant) +
             " Unfortunately, the retrieved information does not pertain to the user's inquiry.";
  }
  turns.push_back(turn("assistant", reply));
  append_api_tail(turns, capture_or(prompt, "must call exactly these APIs in order:", ""), topic,
                  relevant ? summary : std::string());
  return turns.dump();
}

std::string build_direct(const std::string& prompt) {
  const std::string user_text = capture_or(prompt, "Here is the user's text:", "");
  const std::string summary = trim(user_text);
  const std::string opening =
      capture_or(prompt, "The user's first message must be exactly:",
                 "Could you summarize the following text for me?");

  json turns = json::array();
  turns.push_back(turn("user", opening + " " + user_text));
  turns.push_back(turn("assistant", sur(SpecialToken::NoRetrieval) + " " + summary));
  append_api_tail(turns, capture_or(prompt, "must call exactly these APIs in order:", ""),
                  lexical_topic(user_text), summary);
  return turns.dump();
}

enum class CombinedBranch { ignore, augment, conflict };

std::string build_combined(const std::string& prompt, CombinedBranch branch) {
  const std::string user_text = capture_or(prompt, "Here is the user's text:", "");
  const std::string retrieval = capture_or(prompt, "Here is the retrieval text:", "");
  const std::string opening = capture_or(
      prompt, "The user's first message must be exactly:",
      "Hi, could you summarize the following text for me? Besides, could you also retrieve some "
      "related text and see if it can improve the summarization and also check the information "
      "conflict");

  std::string reply = sur(SpecialToken::Retrieval) + paragraph(retrieval);
  std::string summary;
  switch (branch) {
    case CombinedBranch::ignore:
      summary = trim(user_text);
      reply += sur(SpecialToken::Irrelevant) + sur(SpecialToken::ContinueUserText) + " " + summary;
      break;
    case CombinedBranch::augment:
      summary = trim(user_text) + " " + trim(retrieval);
      reply += sur(SpecialToken::Relevant) + sur(SpecialToken::AugmentingUserText) + " " + summary;
      break;
    case CombinedBranch::conflict:
      reply += sur(SpecialToken::Relevant) + sur(SpecialToken::InformationConflict) +
               " Although the retrieval text is relevant with user's text, there is an "
               "information conflict between user's text and the retrieved text.";
      break;
  }

  json turns = json::array();
  turns.push_back(turn("user", opening));
  turns.push_back(turn("assistant", "Sure, could you provide the text? "));
  turns.push_back(turn("user", user_text));
  turns.push_back(turn("assistant", reply));
  append_api_tail(turns, capture_or(prompt, "must call exactly these APIs in order:", ""),
                  lexical_topic(user_text), summary);
  return turns.dump();
}

const std::string kNoContext = "No context till now";
const std::string kNotRelevantStep = "The retrieval text is not relevant with the user's topic";

std::string multi_step_turn(bool relevant, const std::string& doc, const std::string& context,
                            const std::string& step, int count, const std::string& topic) {
  return "In the process of summarizing documents one by one. " + sur(SpecialToken::Retrieval) +
         paragraph(doc) + sur(relevant ? SpecialToken::Relevant : SpecialToken::Irrelevant) +
         sur(SpecialToken::ContextOpen) + " " + context + " " + sur(SpecialToken::ContextClose) +
         " " + step + " " + sur(SpecialToken::CountOpen) + " " + std::to_string(count) +
         " documents left to summarize " + sur(SpecialToken::CountClose) +
         sur(SpecialToken::Topic) + " " + topic;
}

std::string build_multi_start(const std::string& prompt) {
  const std::string k = capture_or(prompt, "There are total", "2");
  const std::string topic = capture_or(prompt, "the topic is", "");
  const std::string doc = capture_or(prompt, "the first document is following:", "");
  const std::string opening = capture_or(
      prompt, "The user's first message must be exactly:",
      "Could you give a summarization regarding " + topic +
          " by summarizing the documents one-by-one? There are total " + k +
          " documents to summarize");

  const bool relevant = lexical_relevance(topic, doc);
  const std::string step = relevant ? trim(doc) : kNotRelevantStep;
  const int count = std::max(std::atoi(k.c_str()) - 1, 0);

  json turns = json::array();
  turns.push_back(turn("user", opening));
  turns.push_back(turn("assistant", multi_step_turn(relevant, trim(doc), kNoContext, step, count, topic)));
  return turns.dump();
}

struct MultiStepInfo {
  bool relevant = false;
  std::string context;
  std::string step;
  std::string topic;
  int count = 0;
};

MultiStepInfo read_multi_turn(const std::string& content) {
  MultiStepInfo info;
  info.relevant = has(content, sur(SpecialToken::Relevant));
  info.context = between(content, sur(SpecialToken::ContextOpen), sur(SpecialToken::ContextClose));
  info.step = between(content, sur(SpecialToken::ContextClose), sur(SpecialToken::CountOpen));
  info.topic = after_last(content, sur(SpecialToken::Topic));
  const std::string payload =
      between(content, sur(SpecialToken::CountOpen), sur(SpecialToken::CountClose));
  info.count = std::atoi(payload.c_str());
  return info;
}

std::string build_multi_step(const std::string& prompt, const std::string& retrieval_label) {
  const std::string piece = capture_or(prompt, "Here is the first piece of the conversation:", "");
  const std::string doc = capture_or(prompt, retrieval_label, "");
  json first = json::parse(piece);
  const MultiStepInfo prev = read_multi_turn(first.at("content").get<std::string>());

  const std::string context = prev.relevant ? prev.step : prev.context;
  const bool relevant = lexical_relevance(prev.topic, doc);
  std::string step;
  if (relevant) {
    step = (context == kNoContext) ? trim(doc) : context + " " + trim(doc);
  } else {
    step = (context == kNoContext) ? kNotRelevantStep : context;
  }
  const int count = std::max(prev.count - 1, 0);

  json turns = json::array();
  turns.push_back(first);
  turns.push_back(
      turn("assistant", multi_step_turn(relevant, trim(doc), context, step, count, prev.topic)));
  return turns.dump();
}

std::string build_doc_pair(const std::string& prompt) {
  const std::string topic = capture_or(prompt, "Write two short factual documents about the same subtopic:", "");
  json docs = json::array();
  docs.push_back("The first report about " + topic + " drew wide attention when " + topic +
                 " reached its 2019 milestone, and reviewers recorded steady progress.");
  docs.push_back("A second report about " + topic + " added complementary measurements, noting " +
                 topic + " kept improving through independent confirmations.");
  return docs.dump();
}

std::string build_topic_pool(const std::string& prompt) {
  static const char* kSubjects[] = {
      "harbor lighthouse restoration", "alpine railway expansion",   "desert observatory program",
      "urban wetland recovery",        "polar supply logistics",     "vintage radio preservation",
      "island ferry modernization",    "mountain seed vault upkeep",
  };
  const std::string salt = capture_or(prompt, "This is request number", "0");
  const std::uint64_t index = fnv1a(salt) % (sizeof(kSubjects) / sizeof(kSubjects[0]));
  return std::string(kSubjects[index]) + " " + salt;
}

// Judges.

std::string judge_relevance_reply(const std::string& prompt) {
  if (has(prompt, "Here is the user text:")) {
    const std::string user_text = capture_or(prompt, "Here is the user text:", "");
    const std::string retrieval = capture_or(prompt, "Here is the retrieval text:", "");
    return content_overlap(user_text, retrieval) >= 0.2 ? "RELEVANT" : "IRRELEVANT";
  }
  const std::string topic = capture_or(prompt, "Here is the topic:", "");
  const std::string text = capture_or(prompt, "Here is the text:", "");
  return lexical_relevance(topic, text) ? "RELEVANT" : "IRRELEVANT";
}

std::string judge_conflict_reply(const std::string& prompt) {
  const std::string user_text = capture_or(prompt, "Here is the user text:", "");
  const std::string retrieval = capture_or(prompt, "Here is the retrieval text:", "");
  return lexical_conflict(user_text, retrieval) ? "CONFLICT" : "NO_CONFLICT";
}

std::string judge_logic_reply(const std::string& prompt) {
  const std::string expectation =
      between(prompt, "Expected behavior for this dialogue:", "Here is the dialogue transcript");
  const std::string transcript = capture_or(prompt, "one turn per line:", "");

  auto expects = [&](const char* tag) {
    return expectation.find(tag) != std::string::npos;
  };
  bool ok = false;
  if (expects("S1")) {
    ok = has(transcript, sur(SpecialToken::Retrieval)) &&
         has(transcript, sur(SpecialToken::Relevant)) &&
         !has(transcript, sur(SpecialToken::Irrelevant)) &&
         !has(transcript, sur(SpecialToken::ContextOpen));
  } else if (expects("S2")) {
    ok = has(transcript, sur(SpecialToken::Retrieval)) &&
         has(transcript, sur(SpecialToken::Irrelevant)) &&
         !has(transcript, sur(SpecialToken::Relevant)) &&
         !has(transcript, sur(SpecialToken::ContinueUserText)) &&
         !has(transcript, sur(SpecialToken::CountOpen));
  } else if (expects("S3")) {
    ok = has(transcript, sur(SpecialToken::NoRetrieval)) &&
         !has(transcript, sur(SpecialToken::Retrieval));
  } else if (expects("S4")) {
    ok = has(transcript, sur(SpecialToken::Irrelevant)) &&
         has(transcript, sur(SpecialToken::ContinueUserText));
  } else if (expects("S5")) {
    ok = has(transcript, sur(SpecialToken::Relevant)) &&
         has(transcript, sur(SpecialToken::AugmentingUserText));
  } else if (expects("S6")) {
    ok = has(transcript, sur(SpecialToken::Relevant)) &&
         has(transcript, sur(SpecialToken::InformationConflict));
  } else if (expects("S7")) {
    ok = has(transcript, sur(SpecialToken::ContextOpen)) &&
         has(transcript, sur(SpecialToken::CountOpen)) &&
         has(transcript, sur(SpecialToken::CountOpen) + " 0 documents left");
  }
  return ok ? "CORRECT" : "INCORRECT";
}

// Summarizer seats: echo or concatenate, trimmed.

std::string aspect1_reply(const std::string& prompt) {
  const std::string text = capture_or(prompt, "Here is the text:", "");
  const std::string topic = capture_or(prompt, "relevant with the", "");
  if (lexical_relevance(topic, text)) {
    return "The retrieval text is relevant with user's topic. Start summarizing on it: " + text;
  }
  return "The retrieval text is not relevant with user's topic";
}

std::string aspect3_reply(const std::string& prompt) {
  const std::string user_text = capture_or(prompt, "Here is the user text:", "");
  const std::string retrieval = capture_or(prompt, "Here is the retrieval text:", "");
  const double overlap = content_overlap(user_text, retrieval);
  if (overlap < 0.2) {
    return "The user text is not relevant with the retrieval text. Start summarizing only on "
           "user text: " +
           user_text;
  }
  if (lexical_conflict(user_text, retrieval)) {
    return "There is information conflict between the user text and the retrieval text";
  }
  return "The user text is relevant with the retrieval text and there is no information "
         "conflict. Start summarizing on both retrieval text and user text: " +
         user_text + " " + retrieval;
}

std::string rest_after(const std::string& prompt, const std::string& label) {
  std::size_t at = prompt.find(label);
  if (at == std::string::npos) return "";
  return trim(prompt.substr(at + label.size()));
}

}  // namespace

bool lexical_relevance(const std::string& topic, const std::string& text) {
  if (trim(topic).empty()) return false;
  return contains_ci(text, trim(topic));
}

double content_overlap(const std::string& a, const std::string& b) {
  const auto ma = content_multiset(a);
  const auto mb = content_multiset(b);
  std::size_t size_a = 0, size_b = 0, shared = 0;
  for (const auto& [word, count] : ma) size_a += count;
  for (const auto& [word, count] : mb) size_b += count;
  for (const auto& [word, count] : ma) {
    auto it = mb.find(word);
    if (it != mb.end()) shared += std::min(count, it->second);
  }
  const std::size_t denom = std::max(size_a, size_b);
  if (denom == 0) return 0.0;
  return static_cast<double>(shared) / static_cast<double>(denom);
}

bool lexical_conflict(const std::string& user_text, const std::string& retrieval_text) {
  if (trim(user_text) == trim(retrieval_text)) return false;
  return content_overlap(user_text, retrieval_text) >= 0.6;
}

std::optional<std::string> synthesize_reply(const std::vector<ChatMessage>& messages) {
  if (messages.empty()) return std::nullopt;
  const std::string& prompt = messages.back().content;

  try {
    // Judges.
    if (has(prompt, "RELEVANT or IRRELEVANT")) return judge_relevance_reply(prompt);
    if (has(prompt, "CONFLICT or NO_CONFLICT")) return judge_conflict_reply(prompt);
    if (has(prompt, "CORRECT or INCORRECT")) return judge_logic_reply(prompt);

    // Dialogue construction.
    if (has(prompt, "create the start of the conversation")) return build_multi_start(prompt);
    if (has(prompt, "Construct the new piece of the conversation"))
      return build_multi_step(prompt, "here is the new retrieval text:");
    if (has(prompt, "generate the final step of the conversation"))
      return build_multi_step(prompt, "here is the last retrieval text:");
    if (has(prompt, "only provide you with the topic and the retrieval text"))
      return build_top1(prompt);
    if (has(prompt, "only provide you with the user's text")) return build_direct(prompt);
    if (has(prompt, "MAKE SURE to IGNORE the RETRIEVAL TEXT"))
      return build_combined(prompt, CombinedBranch::ignore);
    if (has(prompt, "[Augmenting User's Text] is used when"))
      return build_combined(prompt, CombinedBranch::augment);
    if (has(prompt, "[Information Conflict] is used when"))
      return build_combined(prompt, CombinedBranch::conflict);
    if (has(prompt, "Write two short factual documents about the same subtopic"))
      return build_doc_pair(prompt);
    if (has(prompt, "Name one specific subtopic")) return build_topic_pool(prompt);
    if (has(prompt, "Extract the topic of the following text"))
      return lexical_topic(capture_or(prompt, "Here is the text:", ""));
    if (has(prompt, "introduce an information conflict of kind")) {
      // Crude tamper: negate the first copular clause, falling back to an
      // appended contradiction. Rule-mode injection stays in the generator.
      std::string text = capture_or(prompt, "Here is the text:", "");
      for (const char* verb : {" is ", " are ", " was ", " were "}) {
        const std::size_t len = std::string(verb).size();
        std::size_t at = text.find(verb);
        if (at != std::string::npos && text.compare(at + len, 4, "not ") != 0) {
          text.insert(at + len - 1, " not");
          return text;
        }
      }
      return text + " However, none of these claims were accurate.";
    }

    // Summarizer seats.
    if (has(prompt, "Combine the context and the new retrieval text into one updated")) {
      const std::string context = capture_or(prompt, "Here is the context:", "");
      const std::string doc = capture_or(prompt, "Here is the retrieval text:", "");
      return context + " " + doc;
    }
    if (has(prompt, "There is no context yet"))
      return capture_or(prompt, "Here is the retrieval text:", "");
    if (has(prompt, "Write one summary that combines them")) {
      const std::string user_text = capture_or(prompt, "Here is the user text:", "");
      const std::string retrieval = capture_or(prompt, "Here is the retrieval text:", "");
      return user_text + " " + retrieval;
    }
    if (has(prompt, "summarize following text and return ONLY the summary"))
      return capture_or(prompt, "Here is the text", "");
    if (has(prompt, "Write a summary of the following text regarding topic ###"))
      return capture_or(prompt, "Here is the text:", "");

    // Token-free benchmark prompts.
    if (has(prompt, "The retrieval text is relevant with user's topic")) return aspect1_reply(prompt);
    if (has(prompt, "if the retrieval text is relevant with the user text")) return aspect3_reply(prompt);

    // Framework baselines.
    if (has(prompt, "and skip irrelevant text with respect to this topic"))
      return rest_after(prompt, "Here is the text:");
    if (has(prompt, "Write a summary of this chunk of text"))
      return rest_after(prompt, "Here is the text:");
    if (has(prompt, "delimited by triplet backquotes") || has(prompt, "delimited by triple backquotes"))
      return between(prompt, "```", "```");
    if (has(prompt, "Provide a summary of the following text with respect to topic"))
      return trim(between(prompt, "TEXT:", "SUMMARY:"));
  } catch (const json::exception&) {
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace summrag::detail
