#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "summrag/core.hpp"
#include "summrag/errors.hpp"

using namespace summrag;

namespace {

Dialogue make_dialogue(Scenario scenario,
                       const std::vector<std::pair<Role, std::string>>& turns) {
  Dialogue d;
  d.scenario = scenario;
  for (const auto& [role, text] : turns) {
    d.turns.push_back(parse_turn(role, text));
  }
  return d;
}

// Smallest well-formed dialogue for each scenario signature.
Dialogue minimal_dialogue(Scenario s) {
  switch (s) {
    case Scenario::S1:
      return make_dialogue(
          s, {{Role::user, "Summarize the harbor lighthouse for me."},
              {Role::assistant,
               "[Retrieval]⟨paragraph⟩doc text⟨/paragraph⟩[Relevant] the summary "
               "[Topic] harbor lighthouse"}});
    case Scenario::S2:
      return make_dialogue(
          s, {{Role::user, "Summarize the seed vault for me."},
              {Role::assistant,
               "[Retrieval]⟨paragraph⟩off-topic doc⟨/paragraph⟩[Irrelevant] nothing "
               "relevant was retrieved [Topic] seed vault"}});
    case Scenario::S3:
      return make_dialogue(s, {{Role::user, "Summarize this text: the canal reopened."},
                               {Role::assistant, "[No Retrieval] the canal reopened"}});
    case Scenario::S4:
      return make_dialogue(
          s, {{Role::user, "Summarize my text and check the retrieval."},
              {Role::assistant,
               "[Retrieval]⟨paragraph⟩unrelated doc⟨/paragraph⟩[Irrelevant]"
               "[Continue to use User's Text] summary of the user text"}});
    case Scenario::S5:
      return make_dialogue(
          s, {{Role::user, "Summarize my text and fold in anything related."},
              {Role::assistant,
               "[Retrieval]⟨paragraph⟩related doc⟨/paragraph⟩[Relevant]"
               "[Augmenting User's Text] combined summary"}});
    case Scenario::S6:
      return make_dialogue(
          s, {{Role::user, "Summarize my text against the retrieval."},
              {Role::assistant,
               "[Retrieval]⟨paragraph⟩tampered doc⟨/paragraph⟩[Relevant]"
               "[Information Conflict]"}});
    case Scenario::S7: {
      Dialogue d;
      d.scenario = s;
      d.turns.push_back(parse_turn(
          Role::user, "Summarize the alpine railway documents one by one, 3 in total."));
      const char* bodies[] = {"first step", "second step", "final step"};
      for (int i = 0; i < 3; ++i) {
        std::string text = std::string("In the process of summarizing documents one by one. "
                                       "[Retrieval]⟨paragraph⟩doc ") +
                           std::to_string(i) + "⟨/paragraph⟩[Relevant][Context] context " +
                           std::to_string(i) + " [/Context] " + bodies[i] + " ⟨Count⟩" +
                           std::to_string(2 - i) +
                           " documents left to summarize⟨/Count⟩[Topic] alpine railway";
        d.turns.push_back(parse_turn(Role::assistant, text));
      }
      return d;
    }
  }
  return {};
}

}  // namespace

TEST_CASE("verdict names round-trip") {
  for (Verdict v : {Verdict::Summarized, Verdict::IrrelevantRetrieval, Verdict::UserTextOnly,
                    Verdict::InformationConflict, Verdict::Combined}) {
    auto s = to_string(v);
    auto back = verdict_from_string(s);
    REQUIRE(back.has_value());
    CHECK(*back == v);
  }
  CHECK(!verdict_from_string("NotAVerdict").has_value());
}

TEST_CASE("minimal dialogues validate cleanly for every scenario") {
  for (Scenario s : kAllScenarios) {
    CAPTURE(to_string(s));
    auto report = validate_dialogue(minimal_dialogue(s));
    for (const auto& v : report.violations) {
      CAPTURE(v.code);
      CAPTURE(v.message);
    }
    CHECK(report.ok());
  }
}

TEST_CASE("classification reads the token signature, not the declared field") {
  for (Scenario s : kAllScenarios) {
    CAPTURE(to_string(s));
    auto d = minimal_dialogue(s);
    d.scenario = s == Scenario::S1 ? Scenario::S7 : Scenario::S1;  // deliberately wrong
    CHECK(classify_scenario(d) == s);
  }
}

TEST_CASE("classification failures name the candidates") {
  SUBCASE("empty dialogue") {
    CHECK_THROWS_AS(classify_scenario(Dialogue{}), ClassificationError);
  }
  SUBCASE("no signature at all") {
    auto d = make_dialogue(Scenario::S1, {{Role::user, "just text"}});
    CHECK_THROWS_AS(classify_scenario(d), ClassificationError);
  }
  SUBCASE("two combined-branch markers") {
    auto d = make_dialogue(
        Scenario::S4,
        {{Role::user, "hi"},
         {Role::assistant, "[Retrieval]⟨paragraph⟩x⟨/paragraph⟩[Irrelevant]"
                           "[Continue to use User's Text][Information Conflict] y"}});
    try {
      classify_scenario(d);
      FAIL("expected ClassificationError");
    } catch (const ClassificationError& e) {
      std::string msg = e.what();
      CHECK(msg.find("S4") != std::string::npos);
      CHECK(msg.find("S6") != std::string::npos);
    }
  }
  SUBCASE("both relevance verdicts without a branch marker") {
    auto d = make_dialogue(Scenario::S1,
                           {{Role::user, "hi"},
                            {Role::assistant, "[Retrieval]x[Relevant][Irrelevant] y"}});
    CHECK_THROWS_AS(classify_scenario(d), ClassificationError);
  }
  SUBCASE("the countdown wins even when step turns carry both verdicts") {
    auto d = minimal_dialogue(Scenario::S7);
    // A mixed run where one document was irrelevant still classifies as S7.
    d.turns[2] = parse_turn(
        Role::assistant,
        "In the process of summarizing documents one by one. "
        "[Retrieval]⟨paragraph⟩doc 1⟨/paragraph⟩[Irrelevant][Context] context 0 "
        "[/Context] kept ⟨Count⟩1 documents left to summarize⟨/Count⟩[Topic] alpine railway");
    CHECK(classify_scenario(d) == Scenario::S7);
  }
}

TEST_CASE("validation reports signature violations") {
  auto d = minimal_dialogue(Scenario::S1);
  d.turns[1] = parse_turn(Role::assistant,
                          "[Retrieval]⟨paragraph⟩doc⟨/paragraph⟩ summary without verdict");
  auto report = validate_dialogue(d);
  REQUIRE(!report.ok());
  CHECK(report.violations[0].code == "scenario-signature");

  auto s3 = minimal_dialogue(Scenario::S3);
  s3.turns[1] = parse_turn(Role::assistant, "[No Retrieval][Retrieval] both markers");
  bool saw_forbidden = false;
  for (const auto& v : validate_dialogue(s3).violations) {
    if (v.code == "scenario-signature" &&
        v.message.find("must not appear") != std::string::npos) {
      saw_forbidden = true;
    }
  }
  CHECK(saw_forbidden);
}

TEST_CASE("validation reports role-order violations") {
  auto d = minimal_dialogue(Scenario::S1);
  d.turns[0].role = Role::assistant;
  auto report = validate_dialogue(d);
  bool saw = false;
  for (const auto& v : report.violations) {
    if (v.code == "role-order" && v.turn == std::size_t{0}) saw = true;
  }
  CHECK(saw);

  auto s7 = minimal_dialogue(Scenario::S7);
  s7.turns[2].role = Role::user;
  report = validate_dialogue(s7);
  saw = false;
  for (const auto& v : report.violations) {
    if (v.code == "role-order" && v.turn == std::size_t{2}) saw = true;
  }
  CHECK(saw);
}

TEST_CASE("validation checks the countdown sequence") {
  auto d = minimal_dialogue(Scenario::S7);

  SUBCASE("a skipped value is flagged") {
    // Rewrite the middle step to repeat count 2 instead of decrementing.
    d.turns[2] = parse_turn(
        Role::assistant,
        "In the process of summarizing documents one by one. "
        "[Retrieval]⟨paragraph⟩doc 1⟨/paragraph⟩[Relevant][Context] c [/Context] s "
        "⟨Count⟩2 documents left to summarize⟨/Count⟩[Topic] alpine railway");
    bool saw = false;
    for (const auto& v : validate_dialogue(d).violations) {
      if (v.code == "count-sequence") saw = true;
    }
    CHECK(saw);
  }

  SUBCASE("a countdown that does not reach zero is flagged") {
    d.turns.pop_back();
    bool saw = false;
    for (const auto& v : validate_dialogue(d).violations) {
      if (v.code == "count-sequence") saw = true;
    }
    CHECK(saw);
  }
}

TEST_CASE("validation re-checks hand-built segments") {
  Dialogue d;
  d.scenario = Scenario::S3;
  AnnotatedTurn user;
  user.role = Role::user;
  user.segments.push_back(Segment::txt("summarize [Relevant] this"));  // surface inside text
  d.turns.push_back(user);
  AnnotatedTurn assistant;
  assistant.role = Role::assistant;
  assistant.segments.push_back(Segment::tok(SpecialToken::NoRetrieval));
  assistant.segments.push_back(Segment::txt(""));  // empty text segment
  d.turns.push_back(assistant);

  auto report = validate_dialogue(d);
  bool purity = false, empty_seg = false;
  for (const auto& v : report.violations) {
    if (v.code == "text-purity" && v.turn == std::size_t{0}) purity = true;
    if (v.code == "empty-text-segment" && v.turn == std::size_t{1}) empty_seg = true;
  }
  CHECK(purity);
  CHECK(empty_seg);

  CHECK(!validate_dialogue(Dialogue{}).ok());
}

TEST_CASE("dialogue json codec round-trips") {
  auto d = minimal_dialogue(Scenario::S7);
  d.metadata["dialogue_id"] = "S7-0-0";
  d.metadata["seed"] = "42";
  auto j = to_json(d);
  auto back = dialogue_from_json(j);
  CHECK(back.scenario == d.scenario);
  CHECK(back.metadata == d.metadata);
  REQUIRE(back.turns.size() == d.turns.size());
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    CHECK(back.turns[i] == d.turns[i]);
  }

  CHECK_THROWS_AS(dialogue_from_json({{"scenario", "S9"}, {"turns", nlohmann::json::array()}}),
                  ConfigError);
  CHECK_THROWS_AS(
      dialogue_from_json(
          {{"scenario", "S1"},
           {"turns", nlohmann::json::array({{{"role", "narrator"}, {"text", "x"}}})}}),
      ConfigError);
}

TEST_CASE("outcome json codec round-trips") {
  Outcome o;
  o.verdict = Verdict::Combined;
  o.summary = "a combined summary";
  o.transcript = minimal_dialogue(Scenario::S5);
  auto back = outcome_from_json(to_json(o));
  CHECK(back.verdict == o.verdict);
  CHECK(back.summary == o.summary);
  CHECK(back.transcript.turns == o.transcript.turns);

  Outcome refusal;
  refusal.verdict = Verdict::InformationConflict;
  refusal.transcript = minimal_dialogue(Scenario::S6);
  auto refusal_back = outcome_from_json(to_json(refusal));
  CHECK(refusal_back.verdict == Verdict::InformationConflict);
  CHECK(!refusal_back.summary.has_value());
}

TEST_CASE("document json codec") {
  Document d{"doc-1", "some text", "a topic", "unit-test"};
  auto back = document_from_json(to_json(d));
  CHECK(back == d);

  Document bare{"doc-2", "text only", std::nullopt, std::nullopt};
  auto bare_back = document_from_json(to_json(bare));
  CHECK(bare_back == bare);

  CHECK_THROWS(document_from_json(nlohmann::json{{"id", "x"}}));    // text required
  CHECK_THROWS(document_from_json(nlohmann::json{{"text", "x"}}));  // id required
}

TEST_CASE("dialogue jsonl round-trip cites bad lines") {
  std::string path = "/tmp/summrag_test_dialogues.jsonl";
  std::vector<Dialogue> dialogues = {minimal_dialogue(Scenario::S1),
                                     minimal_dialogue(Scenario::S7)};
  write_dialogues_jsonl(path, dialogues);
  auto back = read_dialogues_jsonl(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].turns == dialogues[0].turns);
  CHECK(back[1].turns == dialogues[1].turns);

  {
    std::FILE* f = std::fopen(path.c_str(), "a");
    REQUIRE(f != nullptr);
    std::fputs("{not valid json\n", f);
    std::fclose(f);
  }
  try {
    read_dialogues_jsonl(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  CHECK_THROWS_AS(read_dialogues_jsonl("/nonexistent/dialogues.jsonl"), ConfigError);
  std::remove(path.c_str());
}
