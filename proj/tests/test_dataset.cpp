#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "summrag/backend.hpp"
#include "summrag/core.hpp"
#include "summrag/dataset.hpp"
#include "summrag/errors.hpp"
#include "summrag/orchestrator.hpp"
#include "summrag/token_protocol.hpp"
#include "summrag/util.hpp"

using namespace summrag;

namespace {

struct Rig {
  MockBackend subject{testutil::mock_profile(BackendRole::subject)};
  MockBackend judge{testutil::mock_profile(BackendRole::judge)};
  Corpus corpus = testutil::fixture_corpus();

  Dialogue multi_dialogue() {
    std::vector<Document> docs = {*corpus.find("alpine-00"), *corpus.find("harbor-00"),
                                  *corpus.find("alpine-01")};
    Dialogue d = summarize_documents("alpine railway", docs, subject, judge).transcript;
    d.metadata["dialogue_id"] = "S7-test-0";
    return d;
  }

  Dialogue top1_dialogue() {
    Dialogue d = summarize_top1("harbor lighthouse", corpus, subject, judge).transcript;
    d.metadata["dialogue_id"] = "S1-test-0";
    return d;
  }

  Dialogue combined_dialogue() {
    Dialogue d = summarize_combined(
                     "Migratory songbirds navigate using stellar cues during autumn nights.",
                     corpus, subject, judge)
                     .transcript;
    d.metadata["dialogue_id"] = "S4-test-0";
    return d;
  }
};

// Every canonical surface plus the accepted aliases; detokenized text must
// contain none of them.
const std::vector<std::string> kAllSurfaces = [] {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kSpecialTokenCount; ++i) {
    out.emplace_back(surface(static_cast<SpecialToken>(i)));
  }
  out.push_back("[Continuing to use User's text]");
  out.push_back("[Continue to Use User's Text]");
  out.push_back("⟨API⟩");
  out.push_back("⟨/API⟩");
  return out;
}();

void check_token_free(const std::string& text) {
  for (const auto& s : kAllSurfaces) {
    CAPTURE(s);
    CHECK(text.find(s) == std::string::npos);
  }
}

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

AnnotatedTurn text_turn(Role role, std::string text) {
  AnnotatedTurn turn;
  turn.role = role;
  turn.segments.push_back(Segment::txt(std::move(text)));
  return turn;
}

}  // namespace

TEST_CASE("detokenization removes every token surface and prefixes the first user turn") {
  Rig rig;
  for (Dialogue d : {rig.multi_dialogue(), rig.top1_dialogue(), rig.combined_dialogue()}) {
    Dialogue plain = detokenize(d);
    CHECK(plain.scenario == d.scenario);
    CHECK(plain.metadata == d.metadata);
    REQUIRE(plain.turns.size() == d.turns.size());

    const std::string& prefix = TransformationTable::defaults().prefix(aspect_of(d.scenario));
    bool first_user_seen = false;
    for (std::size_t i = 0; i < plain.turns.size(); ++i) {
      CHECK(plain.turns[i].role == d.turns[i].role);
      const std::string text = plain.turns[i].plain_text();
      check_token_free(text);
      if (!first_user_seen && plain.turns[i].role == Role::user) {
        CHECK(text.starts_with(prefix + "\n"));
        first_user_seen = true;
      } else {
        CHECK(text.find(prefix) == std::string::npos);
      }
    }
  }
}

TEST_CASE("detokenization reports the turn that lacks a table row") {
  Rig rig;
  TransformationTable table = TransformationTable::defaults();
  table.set_replacement(SpecialToken::Relevant, "");
  // Rebuild the table without the retrieval row by serializing and pruning.
  auto j = table.to_json();
  j["replacements"].erase("[Retrieval]");
  TransformationTable pruned = TransformationTable::from_json(j);

  try {
    detokenize(rig.top1_dialogue(), pruned);
    FAIL("expected TransformError");
  } catch (const TransformError& e) {
    const std::string what = e.what();
    CHECK(what.find("turn 1") != std::string::npos);
    CHECK(what.find("Retrieval") != std::string::npos);
  }
}

TEST_CASE("adjacent pairs cover each consecutive step with the retrieval masked") {
  Rig rig;
  Dialogue d = rig.multi_dialogue();
  auto pairs = extract_adjacent_pairs(d);
  REQUIRE(pairs.size() == d.turns.size() - 1);

  const std::vector<std::string> doc_texts = {
      rig.corpus.find("alpine-00")->text,
      rig.corpus.find("harbor-00")->text,
      rig.corpus.find("alpine-01")->text,
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CAPTURE(i);
    const TrainingPair& pair = pairs[i];
    CHECK(pair.instruction == render_turn(d.turns[i]));
    CHECK(pair.response == render_turn(d.turns[i + 1]));
    CHECK(pair.aspect == Aspect::TopK);
    CHECK(pair.dialogue_id == "S7-test-0");
    REQUIRE(pair.mask_spans.size() == 1);
    const auto [begin, end] = pair.mask_spans[0];
    CHECK(trim(pair.response.substr(begin, end - begin)) == doc_texts[i]);
  }

  CHECK_THROWS_AS(extract_adjacent_pairs(rig.top1_dialogue()), PreconditionError);
  Dialogue stub;
  stub.scenario = Scenario::S7;
  stub.turns.push_back(text_turn(Role::user, "only one turn"));
  CHECK_THROWS_AS(extract_adjacent_pairs(stub), PreconditionError);
}

TEST_CASE("multi-document training pairs are detokenized with remapped masks") {
  Rig rig;
  Dialogue d = rig.multi_dialogue();
  auto pairs = build_training_pairs(d);
  REQUIRE(pairs.size() == d.turns.size() - 1);

  const std::string& prefix = TransformationTable::defaults().prefix(Aspect::TopK);
  CHECK(pairs[0].instruction.starts_with(prefix + "\n"));
  const std::vector<std::string> doc_texts = {
      rig.corpus.find("alpine-00")->text,
      rig.corpus.find("harbor-00")->text,
      rig.corpus.find("alpine-01")->text,
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CAPTURE(i);
    check_token_free(pairs[i].instruction);
    check_token_free(pairs[i].response);
    REQUIRE(pairs[i].mask_spans.size() == 1);
    const auto [begin, end] = pairs[i].mask_spans[0];
    CHECK(trim(pairs[i].response.substr(begin, end - begin)) == doc_texts[i]);
    CHECK(pairs[i].aspect == Aspect::TopK);
  }
}

TEST_CASE("single-document training pairs split at each assistant turn") {
  Rig rig;
  Dialogue top1 = rig.top1_dialogue();
  auto pairs = build_training_pairs(top1);
  REQUIRE(pairs.size() == 1);
  const auto& table = TransformationTable::defaults();
  CHECK(pairs[0].instruction ==
        table.prefix(Aspect::Top1Retrieval) + "\n" + top1.turns[0].plain_text());
  check_token_free(pairs[0].response);
  CHECK(pairs[0].mask_spans.empty());
  CHECK(pairs[0].aspect == Aspect::Top1Retrieval);
  CHECK(pairs[0].dialogue_id == "S1-test-0");

  // The combined route has two exchanges, so two pairs; the second
  // instruction is just the user's text turn.
  Dialogue combined = rig.combined_dialogue();
  auto combined_pairs = build_training_pairs(combined);
  REQUIRE(combined_pairs.size() == 2);
  CHECK(combined_pairs[0].instruction.starts_with(
      table.prefix(Aspect::CombinedUserAndRetrieval) + "\n"));
  CHECK(combined_pairs[1].instruction ==
        "Migratory songbirds navigate using stellar cues during autumn nights.");
  CHECK(combined_pairs[1].aspect == Aspect::CombinedUserAndRetrieval);
}

TEST_CASE("consecutive user turns are joined into one instruction") {
  Dialogue d;
  d.scenario = Scenario::S3;
  d.metadata["dialogue_id"] = "S3-test-0";
  d.turns.push_back(parse_turn(Role::user, "First part of the request."));
  d.turns.push_back(parse_turn(Role::user, "Second part of the request."));
  d.turns.push_back(parse_turn(Role::assistant, "[No Retrieval] The summary."));

  auto pairs = build_training_pairs(d);
  REQUIRE(pairs.size() == 1);
  const std::string& prefix = TransformationTable::defaults().prefix(Aspect::DirectUserText);
  CHECK(pairs[0].instruction ==
        prefix + "\nFirst part of the request.\nSecond part of the request.");
  CHECK(pairs[0].response ==
        "There is no need to retrieve since user provides its own text The summary.");
}

TEST_CASE("chat templating wraps each exchange in instruction blocks") {
  std::vector<AnnotatedTurn> turns = {
      text_turn(Role::user, "ask one"),
      text_turn(Role::assistant, "answer one"),
      text_turn(Role::user, "ask two"),
      text_turn(Role::assistant, "answer two"),
  };
  auto sample = to_chat_template(turns);
  CHECK(sample.text ==
        "⟨s⟩[INST] ask one [/INST] answer one⟨/s⟩"
        "⟨s⟩[INST] ask two [/INST] answer two⟨/s⟩");
  REQUIRE(sample.loss_mask.size() == 2);
  // Each mask runs from the block start to the start of the answer.
  CHECK(sample.loss_mask[0].first == 0);
  CHECK(sample.text.substr(sample.loss_mask[0].second).starts_with("answer one"));
  CHECK(sample.text.substr(sample.loss_mask[1].first).starts_with("⟨s⟩[INST] ask two"));
  CHECK(sample.text.substr(sample.loss_mask[1].second).starts_with("answer two"));

  CHECK_THROWS_AS(to_chat_template({text_turn(Role::user, "dangling")}), TemplatingError);
  CHECK_THROWS_AS(to_chat_template(std::vector<AnnotatedTurn>{
                      text_turn(Role::user, "a"), text_turn(Role::user, "b")}),
                  TemplatingError);
  CHECK_THROWS_AS(to_chat_template(std::vector<AnnotatedTurn>{
                      text_turn(Role::assistant, "a"), text_turn(Role::user, "b")}),
                  TemplatingError);
}

TEST_CASE("templating a training pair remaps its mask spans") {
  TrainingPair pair;
  pair.instruction = "ask";
  pair.response = "12345";
  pair.mask_spans = {{1, 3}};
  auto sample = to_chat_template(pair);

  const std::size_t response_begin = sample.text.find("12345");
  REQUIRE(response_begin != std::string::npos);
  CHECK(sample.text == "⟨s⟩[INST] ask [/INST] 12345⟨/s⟩");
  REQUIRE(sample.loss_mask.size() == 2);
  CHECK(sample.loss_mask[0] == ByteSpan{0, response_begin});
  CHECK(sample.loss_mask[1] == ByteSpan{response_begin + 1, response_begin + 3});
  CHECK(sample.text.substr(sample.loss_mask[1].first, 2) == "23");

  TrainingPair bad = pair;
  bad.mask_spans = {{4, 9}};  // runs past the response
  CHECK_THROWS_AS(to_chat_template(bad), PreconditionError);
  bad.mask_spans = {{2, 4}, {1, 3}};  // unsorted
  CHECK_THROWS_AS(to_chat_template(bad), PreconditionError);
}

TEST_CASE("training pairs survive a jsonl round trip") {
  Rig rig;
  auto pairs = build_training_pairs(rig.multi_dialogue());
  auto top1_pairs = build_training_pairs(rig.top1_dialogue());
  pairs.insert(pairs.end(), top1_pairs.begin(), top1_pairs.end());

  const std::string path = temp_file("summrag_pairs_test.jsonl");
  CHECK(export_jsonl(pairs, path) == pairs.size());
  auto back = import_training_pairs(path);
  CHECK(back == pairs);
  std::remove(path.c_str());
}

TEST_CASE("templated samples survive a jsonl round trip") {
  Rig rig;
  std::vector<TemplatedSample> samples;
  for (const auto& pair : build_training_pairs(rig.multi_dialogue())) {
    samples.push_back(to_chat_template(pair));
  }
  const std::string path = temp_file("summrag_templated_test.jsonl");
  CHECK(export_jsonl(samples, path) == samples.size());
  auto back = import_templated_samples(path);
  CHECK(back == samples);
  std::remove(path.c_str());
}

TEST_CASE("imports reject wrong schemas and broken spans with the line cited") {
  const std::string path = temp_file("summrag_bad_import.jsonl");

  auto write_lines = [&](const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::trunc);
    for (const auto& line : lines) out << line << "\n";
  };

  write_lines({R"({"schema": "something.else/v9", "instruction": "a", "response": "b",)"
               R"( "mask_spans": [], "aspect": "top1_retrieval", "dialogue_id": ""})"});
  try {
    import_training_pairs(path);
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    const std::string what = e.what();
    CHECK(what.find("line 1") != std::string::npos);
    CHECK(what.find("something.else/v9") != std::string::npos);
  }

  // Valid first line, malformed JSON on the second.
  Rig rig;
  auto pairs = build_training_pairs(rig.top1_dialogue());
  std::string good = to_json(pairs[0]).dump();
  write_lines({good, "{not json"});
  try {
    import_training_pairs(path);
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  // Mask span past the end of the response.
  nlohmann::json j = to_json(pairs[0]);
  j["mask_spans"] = nlohmann::json::array({nlohmann::json::array({0, 100000})});
  write_lines({j.dump()});
  try {
    import_training_pairs(path);
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    const std::string what = e.what();
    CHECK(what.find("line 1") != std::string::npos);
    CHECK(what.find("out of bounds") != std::string::npos);
  }

  // Blank lines are tolerated.
  write_lines({"", good, ""});
  CHECK(import_training_pairs(path).size() == 1);

  CHECK_THROWS_AS(import_training_pairs(temp_file("summrag_missing_file.jsonl")),
                  PreconditionError);
  std::remove(path.c_str());
}
