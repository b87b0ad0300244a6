#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "summrag/token_protocol.hpp"
#include "summrag/types.hpp"

namespace summrag {

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> topic;
  std::optional<std::string> source;

  bool operator==(const Document&) const = default;
};

// What the user asked for: a topic to retrieve on, text they supplied
// themselves, or both. At least one must be present.
struct Query {
  std::string topic;
  std::optional<std::string> user_text;

  bool valid() const { return !topic.empty() || (user_text && !user_text->empty()); }
};

struct Dialogue {
  Scenario scenario = Scenario::S1;
  std::vector<AnnotatedTurn> turns;
  std::map<std::string, std::string> metadata;
};

// How a run ended. A summary is present exactly for Summarized, UserTextOnly
// and Combined outcomes; the two refusal verdicts carry none.
enum class Verdict : std::uint8_t {
  Summarized,
  IrrelevantRetrieval,
  UserTextOnly,
  InformationConflict,
  Combined,
};

std::string_view to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view s);

struct Outcome {
  Verdict verdict = Verdict::Summarized;
  std::optional<std::string> summary;
  Dialogue transcript;
};

struct Violation {
  std::string code;     // stable machine-readable id, e.g. "count-sequence"
  std::string message;  // human-readable detail
  std::optional<std::size_t> turn;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

// Structural checks for a dialogue against its declared scenario: per-turn
// grammar, role order, the scenario's token signature, and for S7 the
// countdown sequence. Returns every violation rather than stopping at the
// first.
ValidationReport validate_dialogue(const Dialogue& d);

// Determines the scenario from the token signature alone (the declared
// scenario field is ignored). Throws ClassificationError when no signature
// or more than one could match, naming the candidates.
Scenario classify_scenario(const Dialogue& d);

// JSON codecs. A dialogue serializes turn text in token form; parse_turn
// re-validates on the way back in.
nlohmann::json to_json(const Dialogue& d);
Dialogue dialogue_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Outcome& o);
Outcome outcome_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Document& d);
Document document_from_json(const nlohmann::json& j);

// JSONL round-trip, one dialogue/document per line. Errors cite the
// offending line number.
void write_dialogues_jsonl(const std::string& path, const std::vector<Dialogue>& dialogues);
std::vector<Dialogue> read_dialogues_jsonl(const std::string& path);

}  // namespace summrag
