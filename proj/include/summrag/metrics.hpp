#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "summrag/retriever.hpp"

namespace summrag {

struct Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const Score&) const = default;
};

// All text metrics tokenize via metric_tokens in util.hpp: split on
// whitespace, lowercase, strip surrounding (non-interior) punctuation.

// Clipped n-gram overlap. P = overlap / |candidate n-grams|,
// R = overlap / |reference n-grams|, F1 harmonic. Empty n-gram sets score 0.
Score rouge_n(std::string_view candidate, std::string_view reference, int n);

// Whole-text token-level longest common subsequence.
// P = LCS / |candidate|, R = LCS / |reference|, F1 harmonic.
Score rouge_l(std::string_view candidate, std::string_view reference);

// Greedy maximum-cosine token matching over the embedder's vectors:
// precision matches each candidate token to its best reference token,
// recall the other way around, F1 harmonic. Both sides empty score 0.
Score embed_score(std::string_view candidate, std::string_view reference,
                  const Embedder& embedder);

// How one evaluation case ended. Errored cases drop out of the accuracy
// denominator and are reported separately.
enum class CaseVerdict : std::uint8_t { correct, incorrect, errored };

// correct / (total - errored). Throws MetricError when every verdict
// errored (the ratio would be 0/0).
double aggregate_accuracy(const std::vector<CaseVerdict>& verdicts);

}  // namespace summrag
