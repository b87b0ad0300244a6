#pragma once

#include <cctype>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace summrag {

// ASCII lowercase copy; multibyte sequences pass through untouched.
std::string to_lower(std::string_view s);

// Splits on runs of non-alphanumeric bytes. Used by the lexical retriever
// and the quality metrics, both of which work on lowercased tokens.
std::vector<std::string> word_tokens(std::string_view text, bool lowercase = true);

// word_tokens plus stripping of leading/trailing ASCII punctuation per token.
std::vector<std::string> metric_tokens(std::string_view text);

bool contains_ci(std::string_view haystack, std::string_view needle);

std::string trim(std::string_view s);

// Cheap retrieval-query fallback when no topic label is available: the first
// few whitespace-separated words of the text, so the phrase stays a literal
// substring of single-spaced source text.
std::string lexical_topic(std::string_view text, std::size_t max_words = 4);

// FNV-1a, the stable 64-bit hash used for request fingerprints and the
// feature-hash embedder. Values must not change across platforms or builds.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);

// Runs fn(0..count-1) with at most in_flight tasks running at once. Tasks
// must be independent; the first exception is rethrown after all workers
// finish. in_flight <= 1 degrades to a plain sequential loop.
void parallel_for(std::size_t count, int in_flight, const std::function<void(std::size_t)>& fn);

// Deterministic RNG helpers. std::mt19937_64 output is portable but the
// standard distributions are not, so bounded draws go through these.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  // Uniform draw in [0, n). n must be positive.
  std::uint64_t bounded(std::uint64_t n);

  // Uniform double in [0, 1).
  double unit();

  // Child generator for task `index`, independent of draws made so far.
  SplitMix fork(std::uint64_t index) const;

 private:
  std::uint64_t state_;
};

}  // namespace summrag
