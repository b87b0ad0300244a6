#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "summrag/backend.hpp"
#include "summrag/core.hpp"
#include "summrag/metrics.hpp"
#include "summrag/orchestrator.hpp"
#include "summrag/retriever.hpp"

namespace summrag {

// One evaluation case. docs are the retrieval candidates local to the case
// (ingested into a per-case corpus), or the ordered document list for the
// multi-document scenario. gold is present only for the quality-assessed
// scenarios.
struct TestCase {
  Scenario scenario = Scenario::S1;
  std::string topic;
  std::string user_text;
  std::vector<Document> docs;
  std::optional<std::string> gold;

  bool operator==(const TestCase&) const = default;
};

nlohmann::json to_json(const TestCase& c);
TestCase testcase_from_json(const nlohmann::json& j);
void write_testcases_jsonl(const std::string& path, const std::vector<TestCase>& cases);
std::vector<TestCase> read_testcases_jsonl(const std::string& path);

// Whether a scenario's transcript is judged for logical correctness
// (all scenarios except the direct user-text one, which has no routing
// decision to get wrong) and whether its summaries are quality-scored.
bool logic_judged(Scenario s);
bool quality_assessed(Scenario s);

// Averaged summary-quality metrics over the cases that produced a summary.
struct QualityScores {
  Score rouge1;
  Score rouge2;
  Score rougeL;
  Score embed;
  int n = 0;

  bool operator==(const QualityScores&) const = default;
};

struct ScenarioRow {
  Scenario scenario = Scenario::S1;
  int n = 0;
  int correct = 0;
  int errored = 0;
  std::optional<double> accuracy;
  std::optional<QualityScores> quality;
};

struct ScenarioReport {
  std::vector<ScenarioRow> rows;
  std::string judge_prompt_version;
  std::string note;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const ScenarioReport& report);
std::string to_table(const ScenarioReport& report);

struct MultiDocReport {
  int k = 0;
  int n_irrelevant = 0;
  Score rouge1;
  Score rouge2;
  Score rougeL;
  Score embed;
  std::string summary;
  std::optional<std::string> error;
};

nlohmann::json to_json(const MultiDocReport& report);
std::string to_table(const std::vector<MultiDocReport>& reports);

// Deterministic testset built from corpus content: n_per_scenario cases for
// each of the seven scenarios, inputs sampled with the given seed.
std::vector<TestCase> build_testset(const Corpus& corpus, int n_per_scenario, std::uint64_t seed);

// Runs every case through the orchestrator, has the judge grade each
// transcript against its scenario's expected behavior, and aggregates
// accuracy and (for the quality-assessed scenarios) summary quality.
// Per-case failures are counted as errored, never fatal. Deterministic
// under mock backends. Falls back to a hash embedder when none is given.
ScenarioReport run_logicsumm(const std::vector<TestCase>& testset, ChatBackend& subject,
                             ChatBackend& judge, const Embedder* embedder = nullptr,
                             int in_flight = 4, std::uint64_t seed = 0);

// Inputs for the document-count sweep: a fixed relevant set, a pool of
// irrelevant documents to inject, and the reference summary to score
// against.
struct MultiDocSetup {
  std::string topic;
  std::vector<Document> relevant;
  std::vector<Document> irrelevant;
  std::string gold;
  std::uint64_t seed = 0;
};

// For each k, pads the relevant set with k - |relevant| injected irrelevant
// documents at seeded positions, runs the one-by-one summarization loop,
// and scores the final summary against the gold reference.
std::vector<MultiDocReport> run_multidoc(const MultiDocSetup& setup, ChatBackend& subject,
                                         ChatBackend& judge, const Embedder* embedder = nullptr,
                                         const std::vector<int>& ks = {5, 8, 10});

enum class BaselineStrategy : std::uint8_t { stuff, map_reduce, refine };

std::string_view to_string(BaselineStrategy s);
std::optional<BaselineStrategy> baseline_from_string(std::string_view s);

// Reference summarizers for comparison runs. Call shapes per strategy over
// n documents: stuff makes 1 call, map_reduce n+1, refine exactly n.
std::string baseline_summarize(BaselineStrategy strategy, const std::string& topic,
                               const std::vector<Document>& docs, ChatBackend& subject);

// Pre-counted verdicts for one scenario, used to rebuild a report without
// re-running the cases (fixture replay).
struct VerdictCounts {
  int n = 0;
  int correct = 0;
  int errored = 0;
};

ScenarioReport replay_verdicts(const std::map<Scenario, VerdictCounts>& counts);
// JSON file form: {"S1": {"n": 57, "correct": 57}, ...} with optional
// "errored" per entry.
ScenarioReport replay_verdicts_file(const std::string& path);

}  // namespace summrag
