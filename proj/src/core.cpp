#include "summrag/core.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "summrag/errors.hpp"
#include "summrag/util.hpp"

namespace summrag {
namespace {

bool dialogue_contains(const Dialogue& d, SpecialToken t) {
  return std::any_of(d.turns.begin(), d.turns.end(),
                     [t](const AnnotatedTurn& turn) { return turn.contains(t); });
}

void add(ValidationReport& report, std::string code, std::string message,
         std::optional<std::size_t> turn = std::nullopt) {
  report.violations.push_back({std::move(code), std::move(message), turn});
}

// Re-runs the structural part of parse_turn on a possibly hand-built turn.
void check_turn_grammar(const AnnotatedTurn& turn, std::size_t index, ValidationReport& report) {
  for (const auto& seg : turn.segments) {
    if (seg.is_token()) continue;
    if (seg.text.empty()) {
      add(report, "empty-text-segment", "text segment with no content", index);
      continue;
    }
    auto relexed = tokenize(seg.text);
    if (relexed.size() != 1 || relexed[0].is_token()) {
      add(report, "text-purity", "text segment contains a special token surface", index);
    }
  }
  try {
    parse_turn(turn.role, render_turn(turn));
  } catch (const ParseError& e) {
    add(report, "turn-grammar", e.what(), index);
  }
}

void check_signature(const Dialogue& d, ValidationReport& report) {
  auto require = [&](SpecialToken t) {
    if (!dialogue_contains(d, t)) {
      add(report, "scenario-signature",
          std::string("missing ") + std::string(surface(t)) + " for " +
              std::string(to_string(d.scenario)));
    }
  };
  auto forbid = [&](SpecialToken t) {
    if (dialogue_contains(d, t)) {
      add(report, "scenario-signature",
          std::string(surface(t)) + " must not appear in " +
              std::string(to_string(d.scenario)));
    }
  };

  switch (d.scenario) {
    case Scenario::S1:
      require(SpecialToken::Retrieval);
      require(SpecialToken::Relevant);
      forbid(SpecialToken::Irrelevant);
      forbid(SpecialToken::NoRetrieval);
      forbid(SpecialToken::ContinueUserText);
      forbid(SpecialToken::AugmentingUserText);
      forbid(SpecialToken::InformationConflict);
      forbid(SpecialToken::CountOpen);
      break;
    case Scenario::S2:
      require(SpecialToken::Retrieval);
      require(SpecialToken::Irrelevant);
      forbid(SpecialToken::Relevant);
      forbid(SpecialToken::NoRetrieval);
      forbid(SpecialToken::ContinueUserText);
      forbid(SpecialToken::AugmentingUserText);
      forbid(SpecialToken::InformationConflict);
      forbid(SpecialToken::CountOpen);
      break;
    case Scenario::S3:
      require(SpecialToken::NoRetrieval);
      forbid(SpecialToken::Retrieval);
      forbid(SpecialToken::ParagraphOpen);
      forbid(SpecialToken::CountOpen);
      break;
    case Scenario::S4:
      require(SpecialToken::Retrieval);
      require(SpecialToken::Irrelevant);
      require(SpecialToken::ContinueUserText);
      forbid(SpecialToken::AugmentingUserText);
      forbid(SpecialToken::InformationConflict);
      forbid(SpecialToken::CountOpen);
      break;
    case Scenario::S5:
      require(SpecialToken::Retrieval);
      require(SpecialToken::Relevant);
      require(SpecialToken::AugmentingUserText);
      forbid(SpecialToken::ContinueUserText);
      forbid(SpecialToken::InformationConflict);
      forbid(SpecialToken::CountOpen);
      break;
    case Scenario::S6:
      require(SpecialToken::Retrieval);
      require(SpecialToken::Relevant);
      require(SpecialToken::InformationConflict);
      forbid(SpecialToken::ContinueUserText);
      forbid(SpecialToken::AugmentingUserText);
      forbid(SpecialToken::CountOpen);
      break;
    case Scenario::S7:
      require(SpecialToken::Retrieval);
      require(SpecialToken::CountOpen);
      require(SpecialToken::ContextOpen);
      require(SpecialToken::Topic);
      break;
  }
}

void check_roles(const Dialogue& d, ValidationReport& report) {
  if (d.scenario == Scenario::S7) {
    // Multi-document chains open with the user request and continue with
    // assistant step turns only.
    if (!d.turns.empty() && d.turns.front().role != Role::user) {
      add(report, "role-order", "S7 dialogue must open with a user turn", 0);
    }
    for (std::size_t i = 1; i < d.turns.size(); ++i) {
      if (d.turns[i].role != Role::assistant) {
        add(report, "role-order", "S7 step turns must be assistant turns", i);
      }
    }
    return;
  }
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    Role expected = (i % 2 == 0) ? Role::user : Role::assistant;
    if (d.turns[i].role != expected) {
      add(report, "role-order",
          std::string("expected ") + std::string(to_string(expected)) + " turn", i);
    }
  }
}

void check_count_sequence(const Dialogue& d, ValidationReport& report) {
  std::vector<long long> counts;
  for (const auto& turn : d.turns) {
    if (auto v = turn.count_value()) counts.push_back(*v);
  }
  if (counts.empty()) return;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] != counts[i - 1] - 1) {
      add(report, "count-sequence",
          "countdown must decrease by exactly 1 (saw " + std::to_string(counts[i - 1]) +
              " then " + std::to_string(counts[i]) + ")");
      return;
    }
  }
  if (counts.back() != 0) {
    add(report, "count-sequence",
        "countdown must end at 0 (ends at " + std::to_string(counts.back()) + ")");
  }
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Summarized:
      return "Summarized";
    case Verdict::IrrelevantRetrieval:
      return "IrrelevantRetrieval";
    case Verdict::UserTextOnly:
      return "UserTextOnly";
    case Verdict::InformationConflict:
      return "InformationConflict";
    case Verdict::Combined:
      return "Combined";
  }
  return "Summarized";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  for (Verdict v : {Verdict::Summarized, Verdict::IrrelevantRetrieval, Verdict::UserTextOnly,
                    Verdict::InformationConflict, Verdict::Combined}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

ValidationReport validate_dialogue(const Dialogue& d) {
  ValidationReport report;
  if (d.turns.empty()) {
    add(report, "empty-dialogue", "dialogue has no turns");
    return report;
  }
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    check_turn_grammar(d.turns[i], i, report);
  }
  check_roles(d, report);
  check_signature(d, report);
  if (d.scenario == Scenario::S7) check_count_sequence(d, report);
  return report;
}

Scenario classify_scenario(const Dialogue& d) {
  if (d.turns.empty()) {
    throw ClassificationError("cannot classify an empty dialogue");
  }
  const bool count = dialogue_contains(d, SpecialToken::CountOpen);
  const bool conflict = dialogue_contains(d, SpecialToken::InformationConflict);
  const bool augment = dialogue_contains(d, SpecialToken::AugmentingUserText);
  const bool cont = dialogue_contains(d, SpecialToken::ContinueUserText);
  const bool no_retrieval = dialogue_contains(d, SpecialToken::NoRetrieval);
  const bool retrieval = dialogue_contains(d, SpecialToken::Retrieval);
  const bool relevant = dialogue_contains(d, SpecialToken::Relevant);
  const bool irrelevant = dialogue_contains(d, SpecialToken::Irrelevant);

  if (count) return Scenario::S7;

  int branch_markers = (conflict ? 1 : 0) + (augment ? 1 : 0) + (cont ? 1 : 0);
  if (branch_markers > 1) {
    std::string candidates;
    if (cont) candidates += " S4";
    if (augment) candidates += " S5";
    if (conflict) candidates += " S6";
    throw ClassificationError("ambiguous token signature; candidates:" + candidates);
  }
  if (conflict) return Scenario::S6;
  if (augment) return Scenario::S5;
  if (cont) return Scenario::S4;
  if (no_retrieval) return Scenario::S3;
  if (retrieval && relevant && irrelevant) {
    throw ClassificationError(
        "ambiguous token signature (both relevance verdicts); candidates: S1 S2");
  }
  if (retrieval && irrelevant) return Scenario::S2;
  if (retrieval && relevant) return Scenario::S1;
  throw ClassificationError(
      "no scenario signature matched; candidates: S1 S2 S3 S4 S5 S6 S7");
}

nlohmann::json to_json(const Dialogue& d) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& turn : d.turns) {
    turns.push_back({{"role", std::string(to_string(turn.role))},
                     {"text", render_turn(turn)}});
  }
  return nlohmann::json{{"scenario", std::string(to_string(d.scenario))},
                        {"turns", turns},
                        {"metadata", d.metadata}};
}

Dialogue dialogue_from_json(const nlohmann::json& j) {
  Dialogue d;
  auto scenario = scenario_from_string(j.at("scenario").get<std::string>());
  if (!scenario) {
    throw ConfigError("unknown scenario: " + j.at("scenario").get<std::string>());
  }
  d.scenario = *scenario;
  for (const auto& turn : j.at("turns")) {
    auto role = role_from_string(turn.at("role").get<std::string>());
    if (!role) throw ConfigError("unknown role: " + turn.at("role").get<std::string>());
    d.turns.push_back(parse_turn(*role, turn.at("text").get<std::string>()));
  }
  if (j.contains("metadata")) {
    d.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  }
  return d;
}

nlohmann::json to_json(const Outcome& o) {
  nlohmann::json j{{"verdict", std::string(to_string(o.verdict))},
                   {"transcript", to_json(o.transcript)}};
  if (o.summary) j["summary"] = *o.summary;
  return j;
}

Outcome outcome_from_json(const nlohmann::json& j) {
  Outcome o;
  auto verdict = verdict_from_string(j.at("verdict").get<std::string>());
  if (!verdict) throw ConfigError("unknown verdict: " + j.at("verdict").get<std::string>());
  o.verdict = *verdict;
  if (j.contains("summary")) o.summary = j.at("summary").get<std::string>();
  o.transcript = dialogue_from_json(j.at("transcript"));
  return o;
}

nlohmann::json to_json(const Document& d) {
  nlohmann::json j{{"id", d.id}, {"text", d.text}};
  if (d.topic) j["topic"] = *d.topic;
  if (d.source) j["source"] = *d.source;
  return j;
}

Document document_from_json(const nlohmann::json& j) {
  Document d;
  d.id = j.at("id").get<std::string>();
  d.text = j.at("text").get<std::string>();
  if (j.contains("topic")) d.topic = j.at("topic").get<std::string>();
  if (j.contains("source")) d.source = j.at("source").get<std::string>();
  return d;
}

void write_dialogues_jsonl(const std::string& path, const std::vector<Dialogue>& dialogues) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  for (const auto& d : dialogues) {
    out << to_json(d).dump() << '\n';
  }
}

std::vector<Dialogue> read_dialogues_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path);
  std::vector<Dialogue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(dialogue_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("malformed dialogue JSONL at line " + std::to_string(line_no) + ": " +
                           e.what(),
                       0);
    }
  }
  return out;
}

}  // namespace summrag
