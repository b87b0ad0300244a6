#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "summrag/core.hpp"
#include "summrag/token_protocol.hpp"

namespace summrag {

// Schema ids stamped on every exported JSONL line; imports refuse lines
// carrying anything else.
inline constexpr std::string_view kTrainingPairSchema = "summrag.training_pair/v1";
inline constexpr std::string_view kTemplatedSchema = "summrag.templated/v1";

// Half-open byte range [first, second).
using ByteSpan = std::pair<std::size_t, std::size_t>;

// One instruction/response example. mask_spans are byte ranges into
// `response` a trainer should exclude from the loss (the retrieval text);
// the bytes themselves stay in place so the sample remains auditable.
struct TrainingPair {
  std::string instruction;
  std::string response;
  std::vector<ByteSpan> mask_spans;
  Aspect aspect = Aspect::Top1Retrieval;
  std::string dialogue_id;

  bool operator==(const TrainingPair&) const = default;
};

// A fully templated training sequence. loss_mask lists the byte ranges
// excluded from the loss (template scaffolding, instruction text, and any
// masked retrieval spans).
struct TemplatedSample {
  std::string text;
  std::vector<ByteSpan> loss_mask;

  bool operator==(const TemplatedSample&) const = default;
};

// Replaces every special token with its natural-text form via the table and
// prepends the dialogue aspect's system prefix to the first user turn.
// Throws TransformError naming the token and turn index when the table has
// no row for a token the dialogue uses.
Dialogue detokenize(const Dialogue& d,
                    const TransformationTable& table = TransformationTable::defaults());

// Renders alternating user/assistant turns into concatenated
// "⟨s⟩[INST] U [/INST] A⟨/s⟩" blocks. loss_mask covers each block from its
// start through the end of " [/INST] ", leaving only the response and the
// closing marker in the loss. Throws TemplatingError on a dangling user
// turn or broken alternation.
TemplatedSample to_chat_template(const std::vector<AnnotatedTurn>& turns);

// Single-block form for one training pair; the pair's response mask spans
// are remapped into the templated text and appended to the loss mask.
TemplatedSample to_chat_template(const TrainingPair& pair);

// Adjacent-step pairs of a multi-document dialogue, in token form: turn i
// is the instruction and turn i+1 the response, rendered canonically, with
// the paragraph-delimited retrieval text of each response recorded as a
// mask span. A dialogue with n turns yields n-1 pairs. Throws
// PreconditionError when the dialogue does not classify as the
// multi-document scenario or has fewer than two turns.
std::vector<TrainingPair> extract_adjacent_pairs(const Dialogue& d);

// The full dialogue-to-training-data pipeline. Single-document aspects are
// detokenized and split at each assistant turn (the turns since the
// previous assistant turn, joined by newlines, form the instruction).
// Multi-document dialogues become detokenized adjacent pairs with the
// retrieval mask spans remapped through the transformation.
std::vector<TrainingPair> build_training_pairs(
    const Dialogue& d, const TransformationTable& table = TransformationTable::defaults());

nlohmann::json to_json(const TrainingPair& pair);
TrainingPair training_pair_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TemplatedSample& sample);
TemplatedSample templated_from_json(const nlohmann::json& j);

// One JSON object per line, schema id stamped on each. Returns the number
// of lines written. Imports validate the schema id and span invariants and
// cite the offending line number on failure.
std::size_t export_jsonl(const std::vector<TrainingPair>& pairs, const std::string& path);
std::size_t export_jsonl(const std::vector<TemplatedSample>& samples, const std::string& path);
std::vector<TrainingPair> import_training_pairs(const std::string& path);
std::vector<TemplatedSample> import_templated_samples(const std::string& path);

}  // namespace summrag
