#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "summrag/errors.hpp"
#include "summrag/metrics.hpp"
#include "summrag/retriever.hpp"
#include "summrag/util.hpp"

using namespace summrag;

namespace {

// Brute-force oracles, written independently from the formulas. N-grams are
// kept as token vectors (no key joining), the LCS uses the full quadratic
// table, and the embedding match enumerates every candidate/reference pair.

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

Score oracle_rouge_n(const std::vector<std::string>& cand,
                     const std::vector<std::string>& ref, int n) {
  auto grams = [n](const std::vector<std::string>& tokens) {
    std::vector<std::vector<std::string>> out;
    if (n > 0 && tokens.size() >= static_cast<std::size_t>(n)) {
      for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        out.emplace_back(tokens.begin() + i, tokens.begin() + i + n);
      }
    }
    return out;
  };
  auto cand_grams = grams(cand);
  auto ref_grams = grams(ref);
  if (cand_grams.empty() || ref_grams.empty()) return {};

  std::map<std::vector<std::string>, int> cand_counts, ref_counts;
  for (const auto& g : cand_grams) ++cand_counts[g];
  for (const auto& g : ref_grams) ++ref_counts[g];
  double overlap = 0.0;
  for (const auto& [g, c] : cand_counts) {
    auto it = ref_counts.find(g);
    if (it != ref_counts.end()) overlap += std::min(c, it->second);
  }
  Score s;
  s.precision = overlap / static_cast<double>(cand_grams.size());
  s.recall = overlap / static_cast<double>(ref_grams.size());
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

Score oracle_rouge_l(const std::vector<std::string>& cand,
                     const std::vector<std::string>& ref) {
  if (cand.empty() || ref.empty()) return {};
  std::vector<std::vector<std::size_t>> dp(cand.size() + 1,
                                           std::vector<std::size_t>(ref.size() + 1, 0));
  for (std::size_t i = 1; i <= cand.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      dp[i][j] = cand[i - 1] == ref[j - 1] ? dp[i - 1][j - 1] + 1
                                           : std::max(dp[i - 1][j], dp[i][j - 1]);
    }
  }
  double lcs = static_cast<double>(dp[cand.size()][ref.size()]);
  Score s;
  s.precision = lcs / static_cast<double>(cand.size());
  s.recall = lcs / static_cast<double>(ref.size());
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

double oracle_cosine(const std::vector<double>& u, const std::vector<double>& v) {
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

Score oracle_embed(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                   const Embedder& embedder) {
  if (cand.empty() && ref.empty()) return {};
  auto direction = [&](const std::vector<std::string>& from,
                       const std::vector<std::string>& to) {
    if (from.empty() || to.empty()) return 0.0;
    double total = 0.0;
    for (const auto& f : from) {
      auto fv = embedder.embed(f);
      double best = -1.0;
      for (const auto& t : to) {
        best = std::max(best, oracle_cosine(fv, embedder.embed(t)));
      }
      total += best;
    }
    return total / static_cast<double>(from.size());
  };
  Score s;
  s.precision = direction(cand, ref);
  s.recall = direction(ref, cand);
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

// Small vocabulary so random pairs collide often; empty texts show up too.
std::vector<std::string> random_tokens(SplitMix& rng, std::size_t max_len) {
  static const std::vector<std::string> kVocab = {
      "the", "cat", "sat", "on", "mat", "dog", "ran", "fast", "slow", "roof",
  };
  std::vector<std::string> out;
  std::size_t len = rng.bounded(max_len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(kVocab[rng.bounded(kVocab.size())]);
  }
  return out;
}

void check_close(const Score& got, const Score& want) {
  CHECK(std::fabs(got.precision - want.precision) <= 1e-12);
  CHECK(std::fabs(got.recall - want.recall) <= 1e-12);
  CHECK(std::fabs(got.f1 - want.f1) <= 1e-12);
}

}  // namespace

TEST_CASE("rouge matches the brute-force oracle on 200 random pairs") {
  SplitMix rng(991);
  for (int i = 0; i < 200; ++i) {
    auto cand = random_tokens(rng, 12);
    auto ref = random_tokens(rng, 12);
    CAPTURE(join(cand));
    CAPTURE(join(ref));
    check_close(rouge_n(join(cand), join(ref), 1), oracle_rouge_n(cand, ref, 1));
    check_close(rouge_n(join(cand), join(ref), 2), oracle_rouge_n(cand, ref, 2));
    check_close(rouge_n(join(cand), join(ref), 3), oracle_rouge_n(cand, ref, 3));
    check_close(rouge_l(join(cand), join(ref)), oracle_rouge_l(cand, ref));
  }
}

TEST_CASE("the classic bigram example scores 0.6") {
  auto r2 = rouge_n("the cat sat on the mat", "the cat lay on the mat", 2);
  CHECK(r2.precision == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(r2.recall == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(r2.f1 == doctest::Approx(0.6).epsilon(1e-9));

  auto r1 = rouge_n("the cat sat on the mat", "the cat lay on the mat", 1);
  CHECK(r1.f1 == doctest::Approx(5.0 / 6.0).epsilon(1e-9));

  auto rl = rouge_l("the cat sat on the mat", "the cat lay on the mat");
  CHECK(rl.f1 == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
}

TEST_CASE("rouge edge cases") {
  CHECK(rouge_n("", "reference text", 1) == Score{});
  CHECK(rouge_n("candidate text", "", 1) == Score{});
  CHECK(rouge_n("a b", "a b", 3) == Score{});  // n exceeds both lengths
  CHECK(rouge_l("", "") == Score{});

  auto identical = rouge_n("alpha beta gamma", "alpha beta gamma", 2);
  CHECK(identical.f1 == doctest::Approx(1.0));
  auto disjoint = rouge_n("alpha beta", "gamma delta", 1);
  CHECK(disjoint.f1 == 0.0);

  // Tokenization is shared with the other metrics: case and surrounding
  // punctuation do not matter.
  CHECK(rouge_n("The cat!", "the cat", 1).f1 == doctest::Approx(1.0));

  CHECK_THROWS_AS(rouge_n("a", "a", 0), MetricError);
  CHECK_THROWS_AS(rouge_n("a", "a", -2), MetricError);
}

TEST_CASE("clipping counts repeated n-grams correctly") {
  // "a a a" vs "a": candidate has three unigrams but only one can match.
  auto s = rouge_n("a a a", "a", 1);
  CHECK(s.precision == doctest::Approx(1.0 / 3.0));
  CHECK(s.recall == doctest::Approx(1.0));
}

TEST_CASE("swapping candidate and reference swaps precision and recall") {
  SplitMix rng(1234);
  for (int i = 0; i < 50; ++i) {
    auto a = join(random_tokens(rng, 10));
    auto b = join(random_tokens(rng, 10));
    auto fwd = rouge_n(a, b, 2);
    auto rev = rouge_n(b, a, 2);
    CHECK(std::fabs(fwd.precision - rev.recall) <= 1e-12);
    CHECK(std::fabs(fwd.recall - rev.precision) <= 1e-12);
    auto lf = rouge_l(a, b);
    auto lr = rouge_l(b, a);
    CHECK(std::fabs(lf.precision - lr.recall) <= 1e-12);
  }
}

TEST_CASE("embedding score matches the exhaustive oracle on 50 fixtures") {
  HashEmbedder embedder(64);
  SplitMix rng(555);
  for (int i = 0; i < 50; ++i) {
    auto cand = random_tokens(rng, 8);
    auto ref = random_tokens(rng, 8);
    CAPTURE(join(cand));
    CAPTURE(join(ref));
    check_close(embed_score(join(cand), join(ref), embedder),
                oracle_embed(cand, ref, embedder));
  }
}

TEST_CASE("embedding score basics") {
  HashEmbedder embedder(64);
  auto same = embed_score("alpha beta gamma", "alpha beta gamma", embedder);
  CHECK(same.precision == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(same.recall == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(same.f1 == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(embed_score("", "", embedder) == Score{});
  auto half = embed_score("alpha", "", embedder);
  CHECK(half.precision == 0.0);
  CHECK(half.recall == 0.0);
  CHECK(half.f1 == 0.0);
}

TEST_CASE("aggregate accuracy drops errored cases from the denominator") {
  using V = CaseVerdict;
  CHECK(aggregate_accuracy({V::correct, V::correct, V::incorrect}) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(aggregate_accuracy({V::correct, V::errored, V::incorrect, V::correct}) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(aggregate_accuracy({V::correct}) == doctest::Approx(1.0));
  CHECK(aggregate_accuracy({V::incorrect}) == doctest::Approx(0.0));

  CHECK_THROWS_AS(aggregate_accuracy({V::errored, V::errored}), MetricError);
  CHECK_THROWS_AS(aggregate_accuracy({}), MetricError);
}
