#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "summrag/backend.hpp"
#include "summrag/core.hpp"
#include "summrag/dataset.hpp"
#include "summrag/dialogue_generator.hpp"
#include "summrag/errors.hpp"
#include "summrag/eval.hpp"
#include "summrag/orchestrator.hpp"
#include "summrag/retriever.hpp"

namespace {

using nlohmann::json;
using namespace summrag;

struct GlobalOptions {
  std::string config_path;
  std::string mock_script;
  std::string backend_profile;  // subject profile override by name
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "json";
};

struct Config {
  std::map<std::string, BackendProfile> profiles;
  std::map<BackendRole, std::string> roles;
  RetrievalMode retrieval_mode = RetrievalMode::lexical;
  std::uint64_t seed = 0;
  int in_flight = 4;
  std::size_t embed_dim = 256;
};

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }

  Config config;
  if (!j.contains("profiles")) throw ConfigError("config missing key 'profiles'");
  for (const auto& [name, body] : j.at("profiles").items()) {
    BackendProfile profile;
    profile.name = name;
    if (!body.contains("endpoint")) {
      throw ConfigError("config missing key 'endpoint' in profile '" + name + "'");
    }
    profile.endpoint = body.at("endpoint").get<std::string>();
    if (!body.contains("model")) {
      throw ConfigError("config missing key 'model' in profile '" + name + "'");
    }
    profile.model = body.at("model").get<std::string>();
    profile.credential_env = body.value("credential_env", "");
    config.profiles[name] = std::move(profile);
  }
  if (j.contains("roles")) {
    for (const auto& [role_name, profile_name] : j.at("roles").items()) {
      const BackendRole role = backend_role_from_string(role_name);
      const auto name = profile_name.get<std::string>();
      if (!config.profiles.contains(name)) {
        throw ConfigError("config missing profile '" + name + "' referenced by role '" +
                          role_name + "'");
      }
      config.roles[role] = name;
    }
  }
  if (j.contains("retrieval_mode")) {
    const auto name = j.at("retrieval_mode").get<std::string>();
    const auto mode = retrieval_mode_from_string(name);
    if (!mode) throw ConfigError("config key 'retrieval_mode' has unknown value '" + name + "'");
    config.retrieval_mode = *mode;
  }
  config.seed = j.value("seed", std::uint64_t{0});
  config.in_flight = j.value("in_flight", 4);
  config.embed_dim = j.value("embed_dim", std::size_t{256});
  return config;
}

// The resolved seats for one invocation: mock instances when --mock is on,
// HTTP clients from the config otherwise.
struct Backends {
  std::shared_ptr<ChatBackend> generator;
  std::shared_ptr<ChatBackend> subject;
  std::shared_ptr<ChatBackend> judge;
  std::shared_ptr<Embedder> embedder;  // always set
};

BackendProfile mock_profile(BackendRole role) {
  BackendProfile profile;
  profile.name = "mock-" + to_string(role);
  profile.endpoint = "mock://";
  profile.model = "mock";
  profile.role = role;
  return profile;
}

Backends make_backends(const Config& config, const GlobalOptions& options) {
  Backends backends;
  if (!options.mock_script.empty()) {
    backends.generator = MockBackend::from_script(mock_profile(BackendRole::generator),
                                                  options.mock_script);
    backends.subject =
        MockBackend::from_script(mock_profile(BackendRole::subject), options.mock_script);
    backends.judge =
        MockBackend::from_script(mock_profile(BackendRole::judge), options.mock_script);
    backends.embedder = std::make_shared<HashEmbedder>(config.embed_dim);
    return backends;
  }

  auto make_chat = [&](BackendRole role) -> std::shared_ptr<ChatBackend> {
    std::string profile_name;
    if (role == BackendRole::subject && !options.backend_profile.empty()) {
      profile_name = options.backend_profile;
    } else {
      const auto it = config.roles.find(role);
      if (it == config.roles.end()) {
        throw ConfigError("config missing key 'roles." + to_string(role) + "'");
      }
      profile_name = it->second;
    }
    const auto it = config.profiles.find(profile_name);
    if (it == config.profiles.end()) {
      throw ConfigError("config missing profile '" + profile_name + "'");
    }
    BackendProfile profile = it->second;
    profile.role = role;
    return std::make_shared<HttpChatBackend>(std::move(profile));
  };

  backends.generator = make_chat(BackendRole::generator);
  backends.subject = make_chat(BackendRole::subject);
  backends.judge = make_chat(BackendRole::judge);
  const auto it = config.roles.find(BackendRole::embedder);
  if (it != config.roles.end()) {
    BackendProfile profile = config.profiles.at(it->second);
    profile.role = BackendRole::embedder;
    backends.embedder = std::make_shared<HttpEmbedder>(std::move(profile), config.embed_dim);
  } else {
    backends.embedder = std::make_shared<HashEmbedder>(config.embed_dim);
  }
  return backends;
}

// Data goes to --out when given, stdout otherwise; logs go to stderr.
void emit(const GlobalOptions& options, const std::string& data) {
  if (options.out_path.empty()) {
    std::cout << data << "\n";
    return;
  }
  std::ofstream out(options.out_path, std::ios::trunc);
  if (!out) throw PreconditionError("cannot open " + options.out_path + " for writing");
  out << data << "\n";
  out.flush();
  if (!out) throw PreconditionError("write to " + options.out_path + " failed");
  std::cerr << "wrote " << options.out_path << "\n";
}

int cmd_ingest(const GlobalOptions& options, const std::string& in_path,
               const std::string& corpus_out) {
  const Corpus corpus = Corpus::load_jsonl(in_path);
  if (!corpus_out.empty()) {
    std::ofstream out(corpus_out, std::ios::trunc);
    if (!out) throw PreconditionError("cannot open " + corpus_out + " for writing");
    for (const auto& doc : corpus.documents()) out << to_json(doc).dump() << "\n";
    std::cerr << "wrote " << corpus.size() << " documents to " << corpus_out << "\n";
  }
  json summary{{"documents", corpus.size()}, {"topics", corpus.topics()}};
  if (options.format == "table") {
    std::string table = "documents: " + std::to_string(corpus.size()) + "\ntopics:";
    for (const auto& topic : corpus.topics()) table += " " + topic;
    emit(options, table);
  } else {
    emit(options, summary.dump(2));
  }
  return 0;
}

int cmd_generate(const GlobalOptions& options, const Config& config, const Backends& backends,
                 const std::string& corpus_path, const std::string& scenario_name, int count,
                 bool diversify, const std::string& dialogues_out) {
  const auto scenario = scenario_from_string(scenario_name);
  if (!scenario) throw PreconditionError("unknown scenario '" + scenario_name + "'");
  const Corpus corpus = Corpus::load_jsonl(corpus_path);

  GenerationSpec spec;
  spec.scenario = *scenario;
  spec.count = count;
  spec.seed = options.seed.value_or(config.seed);
  spec.corpus = &corpus;
  spec.diversify = diversify;
  std::cerr << "seed: " << spec.seed << "\n";

  const std::vector<Dialogue> dialogues =
      generate(spec, *backends.generator, *backends.judge, config.in_flight);
  write_dialogues_jsonl(dialogues_out, dialogues);
  std::cerr << "wrote " << dialogues.size() << " dialogues to " << dialogues_out << "\n";

  emit(options, json{{"dialogues", dialogues.size()},
                     {"scenario", to_string(*scenario)},
                     {"seed", spec.seed},
                     {"out", dialogues_out}}
                    .dump(2));
  return 0;
}

int cmd_build_dataset(const GlobalOptions& options, const std::string& in_path,
                      const std::string& dataset_out, bool templated,
                      const std::string& table_path) {
  const TransformationTable table = table_path.empty() ? TransformationTable::defaults()
                                                       : TransformationTable::load_file(table_path);
  const std::vector<Dialogue> dialogues = read_dialogues_jsonl(in_path);
  std::vector<TrainingPair> pairs;
  for (const auto& dialogue : dialogues) {
    std::vector<TrainingPair> batch = build_training_pairs(dialogue, table);
    pairs.insert(pairs.end(), std::make_move_iterator(batch.begin()),
                 std::make_move_iterator(batch.end()));
  }

  std::size_t written = 0;
  if (templated) {
    std::vector<TemplatedSample> samples;
    samples.reserve(pairs.size());
    for (const auto& pair : pairs) samples.push_back(to_chat_template(pair));
    written = export_jsonl(samples, dataset_out);
  } else {
    written = export_jsonl(pairs, dataset_out);
  }
  std::cerr << "wrote " << written << " records to " << dataset_out << "\n";

  emit(options, json{{"dialogues", dialogues.size()},
                     {"records", written},
                     {"templated", templated},
                     {"out", dataset_out}}
                    .dump(2));
  return 0;
}

int cmd_evaluate(const GlobalOptions& options, const Config& config, const Backends& backends,
                 const std::string& testset_path, const std::string& corpus_path, int cases,
                 const std::string& verdicts_path) {
  ScenarioReport report;
  std::uint64_t seed = options.seed.value_or(config.seed);
  if (!verdicts_path.empty()) {
    report = replay_verdicts_file(verdicts_path);
  } else {
    std::vector<TestCase> testset;
    if (!testset_path.empty()) {
      testset = read_testcases_jsonl(testset_path);
    } else if (!corpus_path.empty()) {
      const Corpus corpus = Corpus::load_jsonl(corpus_path);
      testset = build_testset(corpus, cases, seed);
    } else {
      throw PreconditionError("evaluate needs --testset, --corpus, or --verdicts");
    }
    std::cerr << "seed: " << seed << "\n";
    std::cerr << "cases: " << testset.size() << "\n";
    report = run_logicsumm(testset, *backends.subject, *backends.judge, backends.embedder.get(),
                           config.in_flight, seed);
  }
  emit(options, options.format == "table" ? to_table(report) : to_json(report).dump(2));
  return 0;
}

int cmd_summarize(const GlobalOptions& options, const Config& config, const Backends& backends,
                  const std::string& aspect_name, const std::string& topic,
                  const std::string& user_text, const std::string& corpus_path, int k) {
  std::string resolved = aspect_name;
  if (resolved.empty()) {
    // Infer the route from which inputs are present.
    if (k > 0) {
      resolved = "topk";
    } else if (!topic.empty() && !user_text.empty()) {
      resolved = "combined";
    } else if (!user_text.empty()) {
      resolved = "direct";
    } else if (!topic.empty()) {
      resolved = "top1";
    } else {
      throw PreconditionError("summarize needs --topic, --text, or both");
    }
  }

  std::optional<Corpus> corpus;
  if (!corpus_path.empty()) corpus = Corpus::load_jsonl(corpus_path);
  auto need_corpus = [&]() -> const Corpus& {
    if (!corpus) throw PreconditionError("this summarize route needs --corpus");
    return *corpus;
  };
  const Embedder* embedder =
      config.retrieval_mode == RetrievalMode::semantic ? backends.embedder.get() : nullptr;

  Outcome outcome;
  if (resolved == "top1") {
    if (topic.empty()) throw PreconditionError("top1 summarization needs --topic");
    outcome = summarize_top1(topic, need_corpus(), *backends.subject, *backends.judge,
                             config.retrieval_mode, embedder);
  } else if (resolved == "direct") {
    if (user_text.empty()) throw PreconditionError("direct summarization needs --text");
    outcome = summarize_user_text(user_text, *backends.subject);
  } else if (resolved == "combined") {
    if (user_text.empty()) throw PreconditionError("combined summarization needs --text");
    outcome = summarize_combined(user_text, need_corpus(), *backends.subject, *backends.judge,
                                 config.retrieval_mode, embedder);
  } else if (resolved == "topk") {
    if (topic.empty()) throw PreconditionError("top-k summarization needs --topic");
    if (k < 1) throw PreconditionError("top-k summarization needs --k of at least 1");
    outcome = summarize_multi(topic, need_corpus(), k, *backends.subject, *backends.judge,
                              config.retrieval_mode, embedder);
  } else {
    throw PreconditionError("unknown aspect '" + resolved + "' (use top1, direct, combined, or "
                            "topk)");
  }

  json j = to_json(outcome);
  j["seed"] = options.seed.value_or(config.seed);
  emit(options, j.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOptions options;

  CLI::App app{"RAG summarization engine: dialogue generation, dataset building, and "
               "evaluation"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--config", options.config_path, "JSON config with backend profiles");
  app.add_option("--seed", options.seed, "Root seed (overrides the config seed)");
  app.add_option("--backend", options.backend_profile, "Subject profile name override");
  app.add_option("--mock", options.mock_script, "Mock script JSON; replaces all HTTP backends");
  app.add_option("--out", options.out_path, "Write command output here instead of stdout");
  app.add_option("--format", options.format, "Output format: json or table")
      ->check(CLI::IsMember({"json", "table"}));

  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a document corpus");
  std::string ingest_in, ingest_corpus_out;
  ingest->add_option("--in", ingest_in, "Corpus JSONL to ingest")->required();
  ingest->add_option("--corpus-out", ingest_corpus_out, "Write the normalized corpus here");

  auto* generate_cmd = app.add_subcommand("generate", "Generate training dialogues");
  std::string gen_corpus, gen_scenario = "S1", gen_out;
  int gen_count = 1;
  bool gen_diversify = false;
  generate_cmd->add_option("--corpus", gen_corpus, "Source corpus JSONL")->required();
  generate_cmd->add_option("--scenario", gen_scenario, "Scenario S1..S7");
  generate_cmd->add_option("--count", gen_count, "Dialogues to generate");
  generate_cmd->add_flag("--diversify", gen_diversify, "Sample opening-line paraphrases");
  generate_cmd->add_option("--dialogues-out", gen_out, "Output dialogues JSONL")->required();

  auto* build = app.add_subcommand("build-dataset", "Convert dialogues to training data");
  std::string build_in, build_out, build_table;
  bool build_templated = false;
  build->add_option("--in", build_in, "Dialogues JSONL")->required();
  build->add_option("--dataset-out", build_out, "Output training JSONL")->required();
  build->add_flag("--templated", build_templated, "Export chat-templated samples");
  build->add_option("--table", build_table, "Transformation table JSON override");

  auto* evaluate = app.add_subcommand("evaluate", "Run the scenario evaluation");
  std::string eval_testset, eval_corpus, eval_verdicts;
  int eval_cases = 3;
  evaluate->add_option("--testset", eval_testset, "Test cases JSONL");
  evaluate->add_option("--corpus", eval_corpus, "Build a testset from this corpus");
  evaluate->add_option("--cases", eval_cases, "Cases per scenario when building a testset");
  evaluate->add_option("--verdicts", eval_verdicts, "Replay pre-counted verdicts from JSON");

  auto* summarize = app.add_subcommand("summarize", "Run one summarization");
  std::string sum_aspect, sum_topic, sum_text, sum_corpus;
  int sum_k = 0;
  summarize->add_option("--aspect", sum_aspect, "top1, direct, combined, or topk");
  summarize->add_option("--topic", sum_topic, "Retrieval topic");
  summarize->add_option("--text", sum_text, "User-provided text");
  summarize->add_option("--corpus", sum_corpus, "Corpus JSONL to retrieve from");
  summarize->add_option("--k", sum_k, "Documents to fold for the top-k route");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    Config config;
    if (!options.config_path.empty()) config = load_config(options.config_path);
    if (ingest->parsed()) return cmd_ingest(options, ingest_in, ingest_corpus_out);
    if (build->parsed()) {
      return cmd_build_dataset(options, build_in, build_out, build_templated, build_table);
    }
    // The remaining commands talk to backends. Replay mode never calls one,
    // but resolving mocks is harmless; HTTP seats require a config.
    const bool needs_backends =
        generate_cmd->parsed() || summarize->parsed() ||
        (evaluate->parsed() && eval_verdicts.empty());
    Backends backends;
    if (needs_backends) {
      if (options.mock_script.empty() && options.config_path.empty()) {
        throw ConfigError("this command needs --config or --mock");
      }
      backends = make_backends(config, options);
    }
    if (generate_cmd->parsed()) {
      return cmd_generate(options, config, backends, gen_corpus, gen_scenario, gen_count,
                          gen_diversify, gen_out);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(options, config, backends, eval_testset, eval_corpus, eval_cases,
                          eval_verdicts);
    }
    if (summarize->parsed()) {
      return cmd_summarize(options, config, backends, sum_aspect, sum_topic, sum_text, sum_corpus,
                           sum_k);
    }
    throw PreconditionError("no command given");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return summrag::exit_code_for(e);
  }
}
