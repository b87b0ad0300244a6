#include "summrag/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "summrag/errors.hpp"
#include "summrag/util.hpp"

namespace summrag {
namespace {

double harmonic_f1(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

Score score_from(double overlap, double candidate_total, double reference_total) {
  Score score;
  score.precision = candidate_total > 0.0 ? overlap / candidate_total : 0.0;
  score.recall = reference_total > 0.0 ? overlap / reference_total : 0.0;
  score.f1 = harmonic_f1(score.precision, score.recall);
  return score;
}

// N-gram multiset as joined keys; '\x1f' cannot appear in tokens because
// metric_tokens splits on whitespace and control bytes survive only inside
// tokens, which real text does not produce.
std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
  std::unordered_map<std::string, int> counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int j = 1; j < n; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> previous(b.size() + 1, 0);
  std::vector<std::size_t> current(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      current[j] = a[i - 1] == b[j - 1] ? previous[j - 1] + 1
                                        : std::max(previous[j], current[j - 1]);
    }
    std::swap(previous, current);
  }
  return previous[b.size()];
}

double greedy_direction(const std::vector<std::vector<double>>& from,
                        const std::vector<std::vector<double>>& to) {
  if (from.empty() || to.empty()) return 0.0;
  double total = 0.0;
  for (const auto& u : from) {
    double best = -1.0;
    for (const auto& v : to) best = std::max(best, cosine_similarity(u, v));
    total += best;
  }
  return total / static_cast<double>(from.size());
}

std::vector<std::vector<double>> embed_tokens(const std::vector<std::string>& tokens,
                                              const Embedder& embedder) {
  std::unordered_map<std::string, std::vector<double>> cache;
  std::vector<std::vector<double>> vectors;
  vectors.reserve(tokens.size());
  for (const auto& token : tokens) {
    auto it = cache.find(token);
    if (it == cache.end()) it = cache.emplace(token, embedder.embed(token)).first;
    vectors.push_back(it->second);
  }
  return vectors;
}

}  // namespace

Score rouge_n(std::string_view candidate, std::string_view reference, int n) {
  if (n < 1) throw MetricError("n-gram order must be at least 1");
  const auto candidate_counts = ngram_counts(metric_tokens(candidate), n);
  const auto reference_counts = ngram_counts(metric_tokens(reference), n);

  std::size_t candidate_total = 0;
  for (const auto& [key, count] : candidate_counts) candidate_total += count;
  std::size_t reference_total = 0;
  for (const auto& [key, count] : reference_counts) reference_total += count;

  std::size_t overlap = 0;
  for (const auto& [key, count] : candidate_counts) {
    const auto it = reference_counts.find(key);
    if (it != reference_counts.end()) overlap += std::min(count, it->second);
  }
  return score_from(static_cast<double>(overlap), static_cast<double>(candidate_total),
                    static_cast<double>(reference_total));
}

Score rouge_l(std::string_view candidate, std::string_view reference) {
  const std::vector<std::string> candidate_tokens = metric_tokens(candidate);
  const std::vector<std::string> reference_tokens = metric_tokens(reference);
  const std::size_t lcs = lcs_length(candidate_tokens, reference_tokens);
  return score_from(static_cast<double>(lcs), static_cast<double>(candidate_tokens.size()),
                    static_cast<double>(reference_tokens.size()));
}

Score embed_score(std::string_view candidate, std::string_view reference,
                  const Embedder& embedder) {
  const auto candidate_vectors = embed_tokens(metric_tokens(candidate), embedder);
  const auto reference_vectors = embed_tokens(metric_tokens(reference), embedder);
  Score score;
  score.precision = greedy_direction(candidate_vectors, reference_vectors);
  score.recall = greedy_direction(reference_vectors, candidate_vectors);
  score.f1 = harmonic_f1(score.precision, score.recall);
  return score;
}

double aggregate_accuracy(const std::vector<CaseVerdict>& verdicts) {
  std::size_t correct = 0;
  std::size_t errored = 0;
  for (const CaseVerdict verdict : verdicts) {
    if (verdict == CaseVerdict::correct) ++correct;
    if (verdict == CaseVerdict::errored) ++errored;
  }
  const std::size_t assessed = verdicts.size() - errored;
  if (assessed == 0) {
    throw MetricError("no assessable verdicts: all " + std::to_string(verdicts.size()) +
                      " cases errored");
  }
  return static_cast<double>(correct) / static_cast<double>(assessed);
}

}  // namespace summrag
