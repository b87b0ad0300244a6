#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "summrag/backend.hpp"
#include "summrag/core.hpp"
#include "summrag/retriever.hpp"

namespace summrag {

// What a generation batch should produce. The corpus supplies source
// documents and topics; diversify swaps the pinned opening line for a seeded
// paraphrase from a template pool.
struct GenerationSpec {
  Scenario scenario = Scenario::S1;
  int count = 1;
  std::uint64_t seed = 0;
  const Corpus* corpus = nullptr;
  bool diversify = false;
  // When true the two same-subtopic documents for the augmenting scenario
  // are drawn from the corpus instead of being model-written.
  bool s5_from_corpus = false;
};

enum class ConflictKind { NumberChange, FactualReversal, DateAlteration };
enum class ConflictMode { rule, model };

std::string to_string(ConflictKind kind);

// Retries per generation stage before giving up (invalid model output is
// regenerated with fresh sampled inputs up to this budget).
inline constexpr int kGenerationRetryBudget = 3;
// Probability that a single-document dialogue carries an API-call tail.
inline constexpr double kApiTailProbability = 0.5;

// A topic from the corpus that provably does not belong to `doc`: its source
// document differs and carries a different topic label. Seeded pick; throws
// GenerationError when the corpus has no second topic.
std::string pick_irrelevant_topic(const Corpus& corpus, const Document& doc, std::uint64_t seed);

// Deterministic fact tampering for the conflict scenario. Rule mode edits
// the text directly (numbers double, years decrement, the first copular
// clause gets negated); model mode delegates to the generator backend.
// Returns the altered document and the byte span of the altered region in
// the new text. Throws GenerationError when rule mode finds no target.
std::pair<Document, std::pair<std::size_t, std::size_t>> inject_conflict(
    const Document& doc, ConflictKind kind, ConflictMode mode = ConflictMode::rule,
    ChatBackend* generator = nullptr);

// One single-document dialogue (any scenario up to the conflict one),
// produced by the generator backend from the scenario's recipe and verified
// by the judge. Throws GenerationError when the retry budget runs out, with
// the last invalid artifact attached to the message.
Dialogue gen_top1_dialogue(Scenario scenario, const GenerationSpec& spec, ChatBackend& generator,
                           ChatBackend& judge, std::uint64_t task_index = 0);

// One multi-document dialogue: chains the start prompt over docs[0],
// |docs|-2 mid prompts, and the end prompt over docs.back(). The resulting
// dialogue counts down |docs|-1 .. 0. Requires at least two documents.
Dialogue gen_multidoc_dialogue(const std::string& topic, const std::vector<Document>& docs,
                               ChatBackend& generator, const std::string& opening_line = "");

// Batch driver: spec.count dialogues, each from its own RNG stream forked
// off spec.seed, fanned out up to in_flight tasks at a time. Output order
// is by task index regardless of scheduling.
std::vector<Dialogue> generate(const GenerationSpec& spec, ChatBackend& generator,
                               ChatBackend& judge, int in_flight = 4);

}  // namespace summrag
