#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "summrag/core.hpp"

namespace summrag {

// Text -> vector interface. Implementations: the offline feature-hash
// embedder below and the HTTP embedding backend in backend.hpp.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> embed(std::string_view text) const = 0;

  // Batch hook; the default just loops. The HTTP embedder overrides it to
  // send one request.
  virtual std::vector<std::vector<double>> embed_batch(
      const std::vector<std::string>& texts) const;
};

// Deterministic feature hashing over word tokens: every token adds +-1 to a
// hashed bucket, the result is L2-normalized. No model behind it, which is
// exactly what offline tests want: identical strings map to identical
// vectors on every platform.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 256);

  std::size_t dimension() const override { return dimension_; }
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::size_t dimension_;
};

double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct ScoredDocument {
  Document document;
  double score = 0.0;
};

enum class RetrievalMode : std::uint8_t { semantic, lexical };

std::optional<RetrievalMode> retrieval_mode_from_string(std::string_view s);

// An ingested document collection. The lexical index (BM25, k1=1.2, b=0.75)
// is built at ingest; semantic vectors are filled lazily on the first
// semantic query and cached per embedder. Immutable after ingest, safe for
// concurrent top_k calls.
class Corpus {
 public:
  static Corpus ingest(std::vector<Document> records);
  static Corpus load_jsonl(const std::string& path);

  std::size_t size() const { return docs_.size(); }
  const Document& at(std::size_t i) const { return docs_.at(i); }
  const std::vector<Document>& documents() const { return docs_; }
  std::optional<Document> find(std::string_view id) const;

  // Distinct topic labels, sorted.
  std::vector<std::string> topics() const;

  std::vector<ScoredDocument> top_k_lexical(std::string_view query, std::size_t k) const;
  std::vector<ScoredDocument> top_k_semantic(std::string_view query, std::size_t k,
                                             const Embedder& embedder) const;

  double bm25_score(std::string_view query, std::size_t doc_index) const;

 private:
  Corpus() = default;

  void build_lexical_index();
  const std::vector<std::vector<double>>& vectors_for(const Embedder& embedder) const;

  std::vector<Document> docs_;
  std::unordered_map<std::string, std::vector<std::pair<std::size_t, std::size_t>>>
      postings_;  // term -> (doc index, term frequency)
  std::vector<std::size_t> doc_lengths_;
  double avg_doc_length_ = 0.0;

  // Heap-allocated so the corpus stays movable despite the mutex.
  struct VectorCache {
    std::mutex mutex;
    const Embedder* source = nullptr;
    std::vector<std::vector<double>> vectors;
  };
  std::unique_ptr<VectorCache> cache_ = std::make_unique<VectorCache>();
};

// Unified entry point. Semantic mode needs an embedder; lexical ignores it.
// k must be >= 1 and the corpus non-empty. Results come back score-descending
// with ties broken by ascending document id, and fewer than k results are
// returned only when the corpus is smaller than k.
std::vector<ScoredDocument> top_k(const Corpus& corpus, std::string_view query, std::size_t k,
                                  RetrievalMode mode, const Embedder* embedder = nullptr);

// Optional pre-chunking for long documents. Splits on word boundaries into
// chunks of roughly `chunk_words` words with `overlap_words` of overlap.
// Not applied anywhere by default.
std::vector<Document> chunk_document(const Document& doc, std::size_t chunk_words,
                                     std::size_t overlap_words);

}  // namespace summrag
