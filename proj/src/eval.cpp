#include "summrag/eval.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>

#include "summrag/dialogue_generator.hpp"
#include "summrag/errors.hpp"
#include "summrag/prompts.hpp"
#include "summrag/util.hpp"

namespace summrag {
namespace {

using nlohmann::json;

const char* kReportNote =
    "Summary quality is scored for the relevant top-1 retrieval scenario and the direct "
    "user-text scenario; external result tables number these scenarios 2 and 3.";

std::string expectation_for(Scenario s) {
  switch (s) {
    case Scenario::S1:
      return "S1: retrieval happens for the topic, the retrieved text is marked relevant, and "
             "the reply summarizes the retrieved text.";
    case Scenario::S2:
      return "S2: retrieval happens, the retrieved text is marked irrelevant, and the assistant "
             "declines to summarize rather than forcing a summary.";
    case Scenario::S3:
      return "S3: no retrieval happens and the user's own text is summarized directly.";
    case Scenario::S4:
      return "S4: the retrieved text is marked irrelevant and the summary continues to use the "
             "user's text alone.";
    case Scenario::S5:
      return "S5: the retrieved text is marked relevant and the summary augments the user's "
             "text with it.";
    case Scenario::S6:
      return "S6: the retrieved text is marked relevant but conflicts with the user's text, and "
             "the conflict is reported instead of a summary.";
    case Scenario::S7:
      return "S7: documents are summarized one by one, carrying context forward and counting "
             "down to zero documents left.";
  }
  return "";
}

std::string transcript_text(const Dialogue& d) {
  std::string out;
  for (const auto& turn : d.turns) {
    if (!out.empty()) out += "\n";
    out += std::string(to_string(turn.role)) + ": " + render_turn(turn);
  }
  return out;
}

Outcome run_case(const TestCase& c, ChatBackend& subject, ChatBackend& judge) {
  switch (c.scenario) {
    case Scenario::S1:
    case Scenario::S2: {
      const Corpus corpus = Corpus::ingest(c.docs);
      return summarize_top1(c.topic, corpus, subject, judge);
    }
    case Scenario::S3:
      return summarize_user_text(c.user_text, subject);
    case Scenario::S4:
    case Scenario::S5:
    case Scenario::S6: {
      const Corpus corpus = Corpus::ingest(c.docs);
      return summarize_combined(c.user_text, corpus, subject, judge);
    }
    case Scenario::S7:
      return summarize_documents(c.topic, c.docs, subject, judge);
  }
  throw PreconditionError("unknown scenario in test case");
}

std::string case_topic(const Document& doc) {
  return doc.topic && !doc.topic->empty() ? *doc.topic : lexical_topic(doc.text);
}

Score mean_score(const std::vector<Score>& scores) {
  Score mean;
  if (scores.empty()) return mean;
  for (const Score& s : scores) {
    mean.precision += s.precision;
    mean.recall += s.recall;
    mean.f1 += s.f1;
  }
  const auto n = static_cast<double>(scores.size());
  mean.precision /= n;
  mean.recall /= n;
  mean.f1 /= n;
  return mean;
}

json score_to_json(const Score& s) {
  return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

std::string format_cell(const std::optional<double>& value, int width, int decimals) {
  char buffer[32];
  if (value) {
    std::snprintf(buffer, sizeof(buffer), "%*.*f", width, decimals, *value);
  } else {
    std::snprintf(buffer, sizeof(buffer), "%*s", width, "-");
  }
  return buffer;
}

std::string format_int(int value, int width) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%*d", width, value);
  return buffer;
}

}  // namespace

bool logic_judged(Scenario s) { return s != Scenario::S3; }

bool quality_assessed(Scenario s) { return s == Scenario::S1 || s == Scenario::S3; }

json to_json(const TestCase& c) {
  json docs = json::array();
  for (const auto& doc : c.docs) docs.push_back(to_json(doc));
  json j{{"scenario", to_string(c.scenario)},
         {"topic", c.topic},
         {"user_text", c.user_text},
         {"docs", std::move(docs)}};
  if (c.gold) j["gold"] = *c.gold;
  return j;
}

TestCase testcase_from_json(const json& j) {
  TestCase c;
  const std::string name = j.at("scenario").get<std::string>();
  const auto scenario = scenario_from_string(name);
  if (!scenario) throw PreconditionError("unknown scenario '" + name + "'");
  c.scenario = *scenario;
  c.topic = j.value("topic", "");
  c.user_text = j.value("user_text", "");
  if (j.contains("docs")) {
    for (const auto& item : j.at("docs")) c.docs.push_back(document_from_json(item));
  }
  if (j.contains("gold")) {
    if (!quality_assessed(c.scenario)) {
      throw PreconditionError("gold summary given for a scenario that is not quality-assessed");
    }
    c.gold = j.at("gold").get<std::string>();
  }
  return c;
}

void write_testcases_jsonl(const std::string& path, const std::vector<TestCase>& cases) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PreconditionError("cannot open " + path + " for writing");
  for (const auto& c : cases) out << to_json(c).dump() << "\n";
  out.flush();
  if (!out) throw PreconditionError("write to " + path + " failed");
}

std::vector<TestCase> read_testcases_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path + " for reading");
  std::vector<TestCase> cases;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    try {
      cases.push_back(testcase_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw PreconditionError(path + " line " + std::to_string(line_number) + ": " + e.what());
    } catch (const PreconditionError& e) {
      throw PreconditionError(path + " line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return cases;
}

std::vector<TestCase> build_testset(const Corpus& corpus, int n_per_scenario,
                                    std::uint64_t seed) {
  if (corpus.size() == 0) throw PreconditionError("testset generation needs a non-empty corpus");
  if (n_per_scenario < 1) throw PreconditionError("cases per scenario must be at least 1");

  auto random_doc = [&](SplitMix& rng) -> const Document& {
    return corpus.at(static_cast<std::size_t>(rng.bounded(corpus.size())));
  };

  std::vector<TestCase> cases;
  cases.reserve(static_cast<std::size_t>(n_per_scenario) * kAllScenarios.size());
  for (const Scenario scenario : kAllScenarios) {
    SplitMix scenario_rng = SplitMix(seed).fork(static_cast<std::uint64_t>(scenario));
    for (int i = 0; i < n_per_scenario; ++i) {
      SplitMix rng = scenario_rng.fork(static_cast<std::uint64_t>(i));
      TestCase c;
      c.scenario = scenario;
      switch (scenario) {
        case Scenario::S1: {
          const Document& doc = random_doc(rng);
          c.topic = case_topic(doc);
          c.docs = {doc};
          c.gold = trim(doc.text);
          break;
        }
        case Scenario::S2: {
          const Document& doc = random_doc(rng);
          c.topic = pick_irrelevant_topic(corpus, doc, rng.next());
          c.docs = {doc};
          break;
        }
        case Scenario::S3: {
          const Document& doc = random_doc(rng);
          c.user_text = doc.text;
          c.gold = trim(doc.text);
          break;
        }
        case Scenario::S4: {
          const Document& user_doc = random_doc(rng);
          std::vector<std::size_t> others;
          for (std::size_t d = 0; d < corpus.size(); ++d) {
            const Document& candidate = corpus.at(d);
            if (candidate.id != user_doc.id && candidate.topic != user_doc.topic) {
              others.push_back(d);
            }
          }
          if (others.empty()) {
            throw PreconditionError("corpus has no cross-topic pair for the ignore-retrieval "
                                    "scenario");
          }
          c.user_text = user_doc.text;
          c.docs = {corpus.at(others[static_cast<std::size_t>(rng.bounded(others.size()))])};
          break;
        }
        case Scenario::S5: {
          // Two complementary statements about the same corpus topic with
          // moderate wording overlap: related, but neither contains the
          // other, and nothing conflicts.
          const std::string topic = case_topic(random_doc(rng));
          c.user_text = "The first report about " + topic + " drew wide attention when " + topic +
                        " reached its 2019 milestone, and reviewers recorded steady progress.";
          Document doc;
          doc.id = "s5-companion-" + std::to_string(i);
          doc.topic = topic;
          doc.text = "A second report about " + topic + " added complementary measurements, "
                     "noting " + topic + " kept improving through independent confirmations.";
          c.docs = {std::move(doc)};
          break;
        }
        case Scenario::S6: {
          // Rotate through documents from a seeded start until one offers a
          // rule-mode conflict target.
          const std::size_t start = static_cast<std::size_t>(rng.bounded(corpus.size()));
          const std::size_t kind_start = static_cast<std::size_t>(rng.bounded(3));
          static const std::array<ConflictKind, 3> kKinds = {ConflictKind::NumberChange,
                                                             ConflictKind::FactualReversal,
                                                             ConflictKind::DateAlteration};
          bool found = false;
          for (std::size_t offset = 0; offset < corpus.size() && !found; ++offset) {
            const Document& doc = corpus.at((start + offset) % corpus.size());
            for (std::size_t kind = 0; kind < kKinds.size() && !found; ++kind) {
              try {
                c.docs = {inject_conflict(doc, kKinds[(kind_start + kind) % kKinds.size()]).first};
                c.user_text = doc.text;
                found = true;
              } catch (const GenerationError&) {
                // This kind has no target here; try the next one.
              }
            }
          }
          if (!found) {
            throw PreconditionError("no corpus document offers a conflict-injection target");
          }
          break;
        }
        case Scenario::S7: {
          if (corpus.size() < 2) {
            throw PreconditionError("multi-document cases need at least two corpus documents");
          }
          const Document& anchor = random_doc(rng);
          c.topic = case_topic(anchor);
          const std::size_t k = std::min<std::size_t>(2 + rng.bounded(4), corpus.size());
          c.docs = {anchor};
          std::vector<std::size_t> pool;
          for (std::size_t d = 0; d < corpus.size(); ++d) {
            if (corpus.at(d).id != anchor.id) pool.push_back(d);
          }
          while (c.docs.size() < k) {
            const std::size_t pick = static_cast<std::size_t>(rng.bounded(pool.size()));
            c.docs.push_back(corpus.at(pool[pick]));
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
          }
          break;
        }
      }
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

ScenarioReport run_logicsumm(const std::vector<TestCase>& testset, ChatBackend& subject,
                             ChatBackend& judge, const Embedder* embedder, int in_flight,
                             std::uint64_t seed) {
  const HashEmbedder fallback(256);
  const Embedder& scorer = embedder ? *embedder : static_cast<const Embedder&>(fallback);

  struct PerCase {
    bool errored = false;
    bool correct = false;
    std::optional<std::array<Score, 4>> quality;  // rouge1, rouge2, rougeL, embed
  };
  std::vector<PerCase> results(testset.size());

  parallel_for(testset.size(), in_flight, [&](std::size_t i) {
    const TestCase& c = testset[i];
    PerCase& r = results[i];
    try {
      const Outcome outcome = run_case(c, subject, judge);
      if (logic_judged(c.scenario)) {
        r.correct = judge_logical_correctness(judge, expectation_for(c.scenario),
                                              transcript_text(outcome.transcript))
                        .verdict;
      }
      if (quality_assessed(c.scenario) && c.gold && outcome.summary) {
        r.quality = {rouge_n(*outcome.summary, *c.gold, 1), rouge_n(*outcome.summary, *c.gold, 2),
                     rouge_l(*outcome.summary, *c.gold),
                     embed_score(*outcome.summary, *c.gold, scorer)};
      }
    } catch (const std::exception&) {
      r.errored = true;
    }
  });

  ScenarioReport report;
  report.judge_prompt_version = std::string(prompts::kLibraryVersion);
  report.note = kReportNote;
  report.seed = seed;

  for (const Scenario scenario : kAllScenarios) {
    ScenarioRow row;
    row.scenario = scenario;
    std::vector<CaseVerdict> verdicts;
    std::array<std::vector<Score>, 4> quality;
    for (std::size_t i = 0; i < testset.size(); ++i) {
      if (testset[i].scenario != scenario) continue;
      ++row.n;
      const PerCase& r = results[i];
      if (r.errored) {
        ++row.errored;
        verdicts.push_back(CaseVerdict::errored);
        continue;
      }
      if (r.correct) ++row.correct;
      verdicts.push_back(r.correct ? CaseVerdict::correct : CaseVerdict::incorrect);
      if (r.quality) {
        for (std::size_t q = 0; q < quality.size(); ++q) quality[q].push_back((*r.quality)[q]);
      }
    }
    if (row.n == 0) continue;
    if (logic_judged(scenario)) {
      try {
        row.accuracy = aggregate_accuracy(verdicts);
      } catch (const MetricError&) {
        // Every case errored; leave accuracy unset.
      }
    } else {
      row.correct = 0;
    }
    if (quality_assessed(scenario) && !quality[0].empty()) {
      QualityScores scores;
      scores.rouge1 = mean_score(quality[0]);
      scores.rouge2 = mean_score(quality[1]);
      scores.rougeL = mean_score(quality[2]);
      scores.embed = mean_score(quality[3]);
      scores.n = static_cast<int>(quality[0].size());
      row.quality = scores;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

json to_json(const ScenarioReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r{{"scenario", to_string(row.scenario)},
           {"n", row.n},
           {"correct", row.correct},
           {"errored", row.errored}};
    if (row.accuracy) r["accuracy"] = *row.accuracy;
    if (row.quality) {
      r["quality"] = json{{"n", row.quality->n},
                          {"rouge1", score_to_json(row.quality->rouge1)},
                          {"rouge2", score_to_json(row.quality->rouge2)},
                          {"rougeL", score_to_json(row.quality->rougeL)},
                          {"embed", score_to_json(row.quality->embed)}};
    }
    rows.push_back(std::move(r));
  }
  return json{{"schema", "summrag.report/v1"},
              {"judge_prompt_version", report.judge_prompt_version},
              {"note", report.note},
              {"seed", report.seed},
              {"scenarios", std::move(rows)}};
}

std::string to_table(const ScenarioReport& report) {
  std::string out = "scenario     n   correct  errored  accuracy  rouge1-f1  rouge2-f1  "
                    "rougeL-f1  embed-f1\n";
  for (const auto& row : report.rows) {
    out += to_string(row.scenario);
    out += format_int(row.n, 10);
    out += format_int(row.correct, 10);
    out += format_int(row.errored, 9);
    out += format_cell(row.accuracy, 10, 2);
    std::optional<double> r1, r2, rl, em;
    if (row.quality) {
      r1 = row.quality->rouge1.f1;
      r2 = row.quality->rouge2.f1;
      rl = row.quality->rougeL.f1;
      em = row.quality->embed.f1;
    }
    out += format_cell(r1, 11, 3);
    out += format_cell(r2, 11, 3);
    out += format_cell(rl, 11, 3);
    out += format_cell(em, 10, 3);
    out += "\n";
  }
  out += "judge prompts: " + report.judge_prompt_version + "\n";
  out += "note: " + report.note + "\n";
  return out;
}

json to_json(const MultiDocReport& report) {
  json j{{"schema", "summrag.multidoc/v1"},
         {"k", report.k},
         {"n_irrelevant", report.n_irrelevant},
         {"rouge1", score_to_json(report.rouge1)},
         {"rouge2", score_to_json(report.rouge2)},
         {"rougeL", score_to_json(report.rougeL)},
         {"embed", score_to_json(report.embed)},
         {"summary", report.summary}};
  if (report.error) j["error"] = *report.error;
  return j;
}

std::string to_table(const std::vector<MultiDocReport>& reports) {
  std::string out = "k    irrelevant  rouge1-f1  rouge2-f1  rougeL-f1  embed-f1  status\n";
  for (const auto& report : reports) {
    out += format_int(report.k, 2);
    out += format_int(report.n_irrelevant, 12);
    out += format_cell(report.rouge1.f1, 11, 3);
    out += format_cell(report.rouge2.f1, 11, 3);
    out += format_cell(report.rougeL.f1, 11, 3);
    out += format_cell(report.embed.f1, 10, 3);
    out += "  ";
    out += report.error ? *report.error : std::string("ok");
    out += "\n";
  }
  return out;
}

std::vector<MultiDocReport> run_multidoc(const MultiDocSetup& setup, ChatBackend& subject,
                                         ChatBackend& judge, const Embedder* embedder,
                                         const std::vector<int>& ks) {
  if (setup.relevant.empty()) {
    throw PreconditionError("multi-document sweep needs a non-empty relevant set");
  }
  const HashEmbedder fallback(256);
  const Embedder& scorer = embedder ? *embedder : static_cast<const Embedder&>(fallback);

  std::vector<MultiDocReport> reports;
  for (const int k : ks) {
    MultiDocReport report;
    report.k = k;
    const int inject = k - static_cast<int>(setup.relevant.size());
    if (inject < 0) {
      report.error = "k is smaller than the relevant set";
      reports.push_back(std::move(report));
      continue;
    }
    if (static_cast<std::size_t>(inject) > setup.irrelevant.size()) {
      report.error = "irrelevant pool too small for k";
      reports.push_back(std::move(report));
      continue;
    }
    report.n_irrelevant = inject;

    SplitMix rng = SplitMix(setup.seed).fork(static_cast<std::uint64_t>(k));
    std::vector<Document> docs = setup.relevant;
    for (int i = 0; i < inject; ++i) {
      const auto position = static_cast<std::ptrdiff_t>(rng.bounded(docs.size() + 1));
      docs.insert(docs.begin() + position, setup.irrelevant[static_cast<std::size_t>(i)]);
    }

    try {
      const Outcome outcome = summarize_documents(setup.topic, docs, subject, judge);
      report.summary = outcome.summary.value_or("");
      report.rouge1 = rouge_n(report.summary, setup.gold, 1);
      report.rouge2 = rouge_n(report.summary, setup.gold, 2);
      report.rougeL = rouge_l(report.summary, setup.gold);
      report.embed = embed_score(report.summary, setup.gold, scorer);
    } catch (const std::exception& e) {
      report.error = e.what();
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string_view to_string(BaselineStrategy s) {
  switch (s) {
    case BaselineStrategy::stuff: return "stuff";
    case BaselineStrategy::map_reduce: return "map_reduce";
    case BaselineStrategy::refine: return "refine";
  }
  return "stuff";
}

std::optional<BaselineStrategy> baseline_from_string(std::string_view s) {
  if (s == "stuff") return BaselineStrategy::stuff;
  if (s == "map_reduce") return BaselineStrategy::map_reduce;
  if (s == "refine") return BaselineStrategy::refine;
  return std::nullopt;
}

std::string baseline_summarize(BaselineStrategy strategy, const std::string& topic,
                               const std::vector<Document>& docs, ChatBackend& subject) {
  if (docs.empty()) {
    throw PreconditionError("baseline summarization needs at least one document");
  }
  auto call = [&](const std::string& stage, const std::string& prompt) {
    try {
      return trim(subject.complete(prompt));
    } catch (const BackendError& e) {
      throw BackendError(stage + ": " + e.what(), e.fingerprint());
    }
  };

  switch (strategy) {
    case BaselineStrategy::stuff: {
      std::string all;
      for (const auto& doc : docs) {
        if (!all.empty()) all += "\n\n";
        all += doc.text;
      }
      return call("stuff",
                  prompts::render("baseline.stuff", {{"topic", topic}, {"text", all}}));
    }
    case BaselineStrategy::map_reduce: {
      std::string joined;
      for (std::size_t i = 0; i < docs.size(); ++i) {
        const std::string part =
            call("map " + std::to_string(i + 1),
                 prompts::render("baseline.map", {{"topic", topic}, {"text", docs[i].text}}));
        if (!joined.empty()) joined += "\n";
        joined += part;
      }
      return call("reduce", prompts::render("baseline.reduce", {{"text", joined}}));
    }
    case BaselineStrategy::refine: {
      std::string summary =
          call("question", prompts::render("baseline.refine.question",
                                           {{"topic", topic}, {"text", docs[0].text}}));
      for (std::size_t i = 1; i < docs.size(); ++i) {
        summary = call("refine " + std::to_string(i),
                       prompts::render("baseline.refine.refine",
                                       {{"text", summary + "\n" + docs[i].text}}));
      }
      return summary;
    }
  }
  throw PreconditionError("unknown baseline strategy");
}

ScenarioReport replay_verdicts(const std::map<Scenario, VerdictCounts>& counts) {
  ScenarioReport report;
  report.judge_prompt_version = std::string(prompts::kLibraryVersion);
  report.note = kReportNote;
  for (const auto& [scenario, vc] : counts) {
    if (vc.n < 0 || vc.correct < 0 || vc.errored < 0 || vc.correct + vc.errored > vc.n) {
      throw PreconditionError("inconsistent verdict counts for " +
                              std::string(to_string(scenario)));
    }
    ScenarioRow row;
    row.scenario = scenario;
    row.n = vc.n;
    row.correct = vc.correct;
    row.errored = vc.errored;
    if (logic_judged(scenario)) {
      std::vector<CaseVerdict> verdicts;
      verdicts.insert(verdicts.end(), static_cast<std::size_t>(vc.correct),
                      CaseVerdict::correct);
      verdicts.insert(verdicts.end(), static_cast<std::size_t>(vc.errored),
                      CaseVerdict::errored);
      verdicts.insert(verdicts.end(), static_cast<std::size_t>(vc.n - vc.correct - vc.errored),
                      CaseVerdict::incorrect);
      try {
        row.accuracy = aggregate_accuracy(verdicts);
      } catch (const MetricError&) {
        // All errored; accuracy stays unset.
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

ScenarioReport replay_verdicts_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open " + path + " for reading");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw PreconditionError(path + ": " + e.what());
  }
  std::map<Scenario, VerdictCounts> counts;
  for (const auto& [key, value] : j.items()) {
    const auto scenario = scenario_from_string(key);
    if (!scenario) throw PreconditionError(path + ": unknown scenario '" + key + "'");
    VerdictCounts vc;
    vc.n = value.at("n").get<int>();
    vc.correct = value.at("correct").get<int>();
    vc.errored = value.value("errored", 0);
    counts[*scenario] = vc;
  }
  return replay_verdicts(counts);
}

}  // namespace summrag
