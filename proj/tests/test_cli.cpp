#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include "json.hpp"
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"

// Drives the installed binary end to end through a shell, the way a user
// would. CLI_PATH and FIXTURE_DIR come from the build system.

namespace {

using nlohmann::json;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::filesystem::path scratch_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() /
             ("summrag-cli-test-" + std::to_string(::getpid()));
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << text;
}

CliResult run_cli(const std::string& args) {
  static int call = 0;
  const auto err_path = scratch_dir() / ("stderr-" + std::to_string(call++) + ".txt");
  const std::string cmd = std::string("\"") + CLI_PATH + "\" " + args + " 2>" + err_path.string();
  CliResult result;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char chunk[4096];
  std::size_t got = 0;
  while ((got = std::fread(chunk, 1, sizeof(chunk), pipe)) > 0) result.out.append(chunk, got);
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.err = slurp(err_path);
  return result;
}

std::string fixture(const std::string& name) {
  return (std::filesystem::path(FIXTURE_DIR) / name).string();
}

// Writes the named mock script once and returns its path.
std::string mock_script(const std::string& name, const std::string& body) {
  const auto path = scratch_dir() / name;
  spit(path, body);
  return path.string();
}

std::string synth_mock() { return mock_script("mock.json", "{\"synthesize\": true}\n"); }

std::vector<std::string> nonempty_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> toks;
  std::string tok;
  while (in >> tok) toks.push_back(tok);
  return toks;
}

std::size_t count_lines(const std::filesystem::path& path) {
  return nonempty_lines(slurp(path)).size();
}

}  // namespace

TEST_CASE("help lists every option and subcommand") {
  const auto res = run_cli("--help");
  CHECK(res.exit_code == 0);
  CHECK(res.out.find("RAG summarization engine") != std::string::npos);
  CHECK(res.out.find("Usage:") != std::string::npos);
  for (const char* flag : {"--config", "--seed", "--backend", "--mock", "--out", "--format"}) {
    CAPTURE(flag);
    CHECK(res.out.find(flag) != std::string::npos);
  }
  for (const char* cmd : {"ingest", "generate", "build-dataset", "evaluate", "summarize"}) {
    CAPTURE(cmd);
    CHECK(res.out.find(cmd) != std::string::npos);
  }
}

TEST_CASE("ingest reports the corpus shape in both formats") {
  const auto res = run_cli("ingest --in " + fixture("corpus.jsonl"));
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j.at("documents").get<int>() == 40);
  REQUIRE(j.at("topics").size() == 10);
  CHECK(j.at("topics").front().get<std::string>() == "alpine railway");

  const auto table = run_cli("--format table ingest --in " + fixture("corpus.jsonl"));
  REQUIRE(table.exit_code == 0);
  const auto lines = nonempty_lines(table.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "documents: 40");
  CHECK(lines[1].rfind("topics: alpine railway", 0) == 0);
  CHECK(lines[1].find("wetland recovery") != std::string::npos);
}

TEST_CASE("ingest writes a normalized corpus and honors --out") {
  const auto norm = (scratch_dir() / "normalized.jsonl").string();
  const auto report = (scratch_dir() / "ingest-report.json").string();
  const auto res = run_cli("--out " + report + " ingest --in " + fixture("corpus.jsonl") +
                           " --corpus-out " + norm);
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.empty());
  CHECK(res.err.find("wrote 40 documents to " + norm) != std::string::npos);
  CHECK(res.err.find("wrote " + report) != std::string::npos);

  CHECK(count_lines(norm) == 40);
  std::ifstream in(norm);
  std::string first_line;
  std::getline(in, first_line);
  const json doc = json::parse(first_line);
  CHECK(doc.at("id").get<std::string>() == "harbor-00");
  CHECK(doc.at("topic").get<std::string>() == "harbor lighthouse");
  CHECK(doc.contains("text"));

  const json report_json = json::parse(slurp(report));
  CHECK(report_json.at("documents").get<int>() == 40);
}

TEST_CASE("ingest of a missing file fails cleanly") {
  const auto res = run_cli("ingest --in " + (scratch_dir() / "no-such.jsonl").string());
  CHECK(res.exit_code == 2);
  CHECK(res.err.rfind("error:", 0) == 0);
}

TEST_CASE("mock pipeline: generate, build dataset, and re-import") {
  const auto dlg = (scratch_dir() / "dialogues.jsonl").string();
  const auto gen = run_cli("--mock " + synth_mock() + " --seed 42 generate --corpus " +
                           fixture("corpus.jsonl") + " --scenario S4 --count 2 --dialogues-out " +
                           dlg);
  REQUIRE(gen.exit_code == 0);
  CHECK(gen.err.find("seed: 42") != std::string::npos);
  CHECK(gen.err.find("wrote 2 dialogues to " + dlg) != std::string::npos);
  const json gj = json::parse(gen.out);
  CHECK(gj.at("dialogues").get<int>() == 2);
  CHECK(gj.at("scenario").get<std::string>() == "S4");
  CHECK(gj.at("seed").get<std::uint64_t>() == 42);
  REQUIRE(count_lines(dlg) == 2);

  const auto ds = (scratch_dir() / "dataset.jsonl").string();
  const auto build = run_cli("build-dataset --in " + dlg + " --dataset-out " + ds);
  REQUIRE(build.exit_code == 0);
  const json bj = json::parse(build.out);
  const int records = bj.at("records").get<int>();
  CHECK(records >= 2);
  CHECK(bj.at("templated").get<bool>() == false);
  CHECK(count_lines(ds) == static_cast<std::size_t>(records));

  std::ifstream in(ds);
  std::string line;
  int seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    CHECK(rec.at("schema").get<std::string>() == "summrag.training_pair/v1");
    CHECK(rec.at("aspect").get<std::string>() == "combined_user_and_retrieval");
    CHECK(rec.at("dialogue_id").get<std::string>().rfind("S4-42-", 0) == 0);
    const auto instruction = rec.at("instruction").get<std::string>();
    CHECK(instruction.find("[Retrieval]") == std::string::npos);
    CHECK(instruction.find("[Context]") == std::string::npos);
    ++seen;
  }
  CHECK(seen == records);

  const auto tpl = (scratch_dir() / "templated.jsonl").string();
  const auto templ = run_cli("build-dataset --in " + dlg + " --dataset-out " + tpl +
                             " --templated");
  REQUIRE(templ.exit_code == 0);
  const json tj = json::parse(templ.out);
  CHECK(tj.at("templated").get<bool>() == true);
  CHECK(tj.at("records").get<int>() == records);
  std::ifstream tin(tpl);
  while (std::getline(tin, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    CHECK(rec.at("schema").get<std::string>() == "summrag.templated/v1");
    CHECK(rec.at("text").get<std::string>().rfind("⟨s⟩[INST] ", 0) == 0);
    CHECK(!rec.at("loss_mask").empty());
  }
}

TEST_CASE("generate is deterministic for a fixed seed") {
  const auto a = (scratch_dir() / "det-a.jsonl").string();
  const auto b = (scratch_dir() / "det-b.jsonl").string();
  const std::string common = "--mock " + synth_mock() + " --seed 9 generate --corpus " +
                             fixture("corpus.jsonl") + " --scenario S7 --count 2 --diversify " +
                             "--dialogues-out ";
  REQUIRE(run_cli(common + a).exit_code == 0);
  REQUIRE(run_cli(common + b).exit_code == 0);
  const std::string body = slurp(a);
  CHECK(body == slurp(b));
  CHECK(!body.empty());
}

TEST_CASE("verdict replay renders the accuracy table") {
  const auto res =
      run_cli("--format table evaluate --verdicts " + fixture("table2_verdicts.json"));
  REQUIRE(res.exit_code == 0);
  const auto lines = nonempty_lines(res.out);
  REQUIRE(lines.size() == 10);
  CHECK(lines[0] ==
        "scenario     n   correct  errored  accuracy  rouge1-f1  rouge2-f1  rougeL-f1  embed-f1");
  CHECK(tokens_of(lines[1]) == std::vector<std::string>{"S1", "57", "57", "0", "1.00", "-", "-",
                                                        "-", "-"});
  CHECK(tokens_of(lines[3]) == std::vector<std::string>{"S3", "50", "0", "0", "-", "-", "-", "-",
                                                        "-"});
  CHECK(tokens_of(lines[4]) == std::vector<std::string>{"S4", "36", "35", "0", "0.97", "-", "-",
                                                        "-", "-"});
  CHECK(tokens_of(lines[6]) == std::vector<std::string>{"S6", "43", "34", "0", "0.79", "-", "-",
                                                        "-", "-"});
  CHECK(tokens_of(lines[7]) == std::vector<std::string>{"S7", "98", "84", "0", "0.86", "-", "-",
                                                        "-", "-"});
  CHECK(lines[8] == "judge prompts: prompts/v1");
  CHECK(lines[9].rfind("note:", 0) == 0);

  const auto as_json = run_cli("evaluate --verdicts " + fixture("table2_verdicts.json"));
  REQUIRE(as_json.exit_code == 0);
  const json j = json::parse(as_json.out);
  CHECK(j.at("schema").get<std::string>() == "summrag.report/v1");
  CHECK(j.at("scenarios").size() == 7);
}

TEST_CASE("mock evaluation runs every scenario") {
  const auto res = run_cli("--mock " + synth_mock() + " --seed 5 --format table evaluate " +
                           "--corpus " + fixture("corpus.jsonl") + " --cases 1");
  REQUIRE(res.exit_code == 0);
  CHECK(res.err.find("seed: 5") != std::string::npos);
  CHECK(res.err.find("cases: 7") != std::string::npos);
  const auto lines = nonempty_lines(res.out);
  REQUIRE(lines.size() == 10);
  // The synthesizing mock judges its own transcripts as logically correct.
  for (int row = 1; row <= 7; ++row) {
    const auto toks = tokens_of(lines[row]);
    REQUIRE(toks.size() == 9);
    CHECK(toks[1] == "1");
    CHECK(toks[3] == "0");
    CHECK(toks[4] == (toks[0] == "S3" ? "-" : "1.00"));
  }
}

TEST_CASE("summarize routes by the provided inputs") {
  const std::string base = "--mock " + synth_mock() + " summarize ";
  const std::string corpus = " --corpus " + fixture("corpus.jsonl");

  SUBCASE("topic alone takes the top-1 retrieval route") {
    const auto res = run_cli(base + "--topic \"harbor lighthouse\"" + corpus);
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.out);
    CHECK(j.at("verdict").get<std::string>() == "Summarized");
    CHECK(j.at("transcript").at("scenario").get<std::string>() == "S1");
    CHECK(j.at("summary").get<std::string>() ==
          "The harbor lighthouse keeper polished the lens in 1900 and had 101 lamps. It was "
          "vacant for 102 winters.");
    CHECK(j.contains("seed"));
  }

  SUBCASE("text alone takes the direct route") {
    const auto res = run_cli(base + "--text \"Rain fell over the quiet valley for three days.\"");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.out);
    CHECK(j.at("transcript").at("scenario").get<std::string>() == "S3");
    CHECK(j.at("summary").get<std::string>() ==
          "Rain fell over the quiet valley for three days.");
  }

  SUBCASE("topic plus unrelated text keeps the user text") {
    const auto res = run_cli(base + "--topic \"harbor lighthouse\" --text \"Rain fell over the "
                                    "quiet valley for three days.\"" +
                             corpus);
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.out);
    CHECK(j.at("transcript").at("scenario").get<std::string>() == "S4");
    CHECK(j.at("verdict").get<std::string>() == "UserTextOnly");
  }

  SUBCASE("k selects the one-by-one route") {
    const auto res = run_cli(base + "--k 3 --topic \"alpine railway\"" + corpus);
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.out);
    CHECK(j.at("verdict").get<std::string>() == "Summarized");
    CHECK(j.at("transcript").at("scenario").get<std::string>() == "S7");
    CHECK(j.at("transcript").at("turns").size() == 4);
    CHECK(j.at("summary").get<std::string>().rfind("The alpine railway crew", 0) == 0);
  }
}

TEST_CASE("exit codes map the error taxonomy") {
  SUBCASE("missing backend configuration") {
    const auto res = run_cli("evaluate");
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("needs --config or --mock") != std::string::npos);
  }

  SUBCASE("evaluate with backends but no inputs") {
    const auto res = run_cli("--mock " + synth_mock() + " evaluate");
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("evaluate needs --testset, --corpus, or --verdicts") != std::string::npos);
  }

  SUBCASE("summarize without any subject") {
    const auto res = run_cli("--mock " + synth_mock() + " summarize");
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("summarize needs --topic, --text, or both") != std::string::npos);
  }

  SUBCASE("retrieval route without a corpus") {
    const auto res = run_cli("--mock " + synth_mock() + " summarize --topic tides");
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("needs --corpus") != std::string::npos);
  }

  SUBCASE("unknown scenario name") {
    const auto res = run_cli("--mock " + synth_mock() + " generate --corpus " +
                             fixture("corpus.jsonl") + " --scenario S9 --dialogues-out " +
                             (scratch_dir() / "unused.jsonl").string());
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("unknown scenario 'S9'") != std::string::npos);
  }

  SUBCASE("unknown summarize aspect") {
    const auto res = run_cli("--mock " + synth_mock() + " summarize --aspect bogus --topic x" +
                             " --corpus " + fixture("corpus.jsonl"));
    CHECK(res.exit_code == 2);
    CHECK(res.err.find("unknown aspect 'bogus'") != std::string::npos);
  }

  SUBCASE("malformed config file") {
    const auto bad = mock_script("bad-config.json", "not json\n");
    const auto res = run_cli("--config " + bad + " ingest --in " + fixture("corpus.jsonl"));
    CHECK(res.exit_code == 2);
    CHECK(res.err.rfind("error:", 0) == 0);
  }

  SUBCASE("backend with no reply exits with the backend code") {
    const auto mute = mock_script("mute.json", "{\"synthesize\": false}\n");
    const auto res = run_cli("--mock " + mute + " summarize --topic \"harbor lighthouse\"" +
                             " --corpus " + fixture("corpus.jsonl"));
    CHECK(res.exit_code == 3);
    CHECK(res.err.find("relevance judgment: no script entry for request") != std::string::npos);
  }

  SUBCASE("unparseable judge verdict exits with the parse code") {
    const auto vague = mock_script(
        "vague.json",
        "{\"synthesize\": false, \"rules\": [{\"contains\": \"\", \"reply\": \"hmm unsure\"}]}\n");
    const auto res = run_cli("--mock " + vague + " summarize --topic \"harbor lighthouse\"" +
                             " --corpus " + fixture("corpus.jsonl"));
    CHECK(res.exit_code == 4);
    CHECK(res.err.find("no judge verdict found") != std::string::npos);
  }
}

TEST_CASE("scripted mock entries override synthesis through the config") {
  // A rule keyed on the subject prompt forces a specific summary while the
  // judge seat still synthesizes its verdicts.
  const auto scripted = mock_script(
      "scripted.json",
      "{\"synthesize\": true, \"rules\": [{\"contains\": \"Write a summary of the following text "
      "regarding topic ###harbor lighthouse###\", \"reply\": \"A fixed scripted summary.\"}]}\n");
  const auto res = run_cli("--mock " + scripted + " summarize --topic \"harbor lighthouse\"" +
                           " --corpus " + fixture("corpus.jsonl"));
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j.at("summary").get<std::string>() == "A fixed scripted summary.");
}
