#include "summrag/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "summrag/errors.hpp"
#include "summrag/util.hpp"

namespace summrag {
namespace {

constexpr double kBm25K1 = 1.2;
constexpr double kBm25B = 0.75;

std::vector<ScoredDocument> rank_top_k(const Corpus& corpus, std::vector<double> scores,
                                       std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return corpus.at(a).id < corpus.at(b).id;
  });
  std::vector<ScoredDocument> out;
  out.reserve(std::min(k, order.size()));
  for (std::size_t i = 0; i < order.size() && i < k; ++i) {
    out.push_back({corpus.at(order[i]), scores[order[i]]});
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> Embedder::embed_batch(
    const std::vector<std::string>& texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

HashEmbedder::HashEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw PreconditionError("embedder dimension must be positive");
}

std::vector<double> HashEmbedder::embed(std::string_view text) const {
  std::vector<double> v(dimension_, 0.0);
  for (const auto& token : word_tokens(text)) {
    std::uint64_t h = fnv1a(token);
    std::size_t bucket = static_cast<std::size_t>(h % dimension_);
    double sign = ((h >> 63) & 1u) != 0 ? -1.0 : 1.0;
    v[bucket] += sign;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  } else {
    // No tokens at all: fall back to a fixed unit vector so downstream
    // cosine calls stay well-defined.
    v[0] = 1.0;
  }
  return v;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw PreconditionError("cosine_similarity: dimension mismatch (" +
                            std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
  }
  if (u.empty()) throw PreconditionError("cosine_similarity: empty vectors");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) {
    throw PreconditionError("cosine_similarity: zero-norm vector");
  }
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::optional<RetrievalMode> retrieval_mode_from_string(std::string_view s) {
  if (s == "semantic") return RetrievalMode::semantic;
  if (s == "lexical") return RetrievalMode::lexical;
  return std::nullopt;
}

Corpus Corpus::ingest(std::vector<Document> records) {
  Corpus corpus;
  std::set<std::string> seen;
  for (auto& doc : records) {
    if (doc.id.empty()) throw IngestError("document with empty id");
    if (doc.text.empty()) throw IngestError("document '" + doc.id + "' has empty text");
    if (!seen.insert(doc.id).second) {
      throw IngestError("duplicate document id '" + doc.id + "'");
    }
  }
  corpus.docs_ = std::move(records);
  corpus.build_lexical_index();
  return corpus;
}

Corpus Corpus::load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open corpus: " + path);
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      docs.push_back(document_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IngestError("malformed corpus JSONL at line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return ingest(std::move(docs));
}

std::optional<Document> Corpus::find(std::string_view id) const {
  for (const auto& doc : docs_) {
    if (doc.id == id) return doc;
  }
  return std::nullopt;
}

std::vector<std::string> Corpus::topics() const {
  std::set<std::string> labels;
  for (const auto& doc : docs_) {
    if (doc.topic && !doc.topic->empty()) labels.insert(*doc.topic);
  }
  return {labels.begin(), labels.end()};
}

void Corpus::build_lexical_index() {
  doc_lengths_.resize(docs_.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    auto tokens = word_tokens(docs_[i].text);
    doc_lengths_[i] = tokens.size();
    total += tokens.size();
    std::unordered_map<std::string, std::size_t> tf;
    for (auto& t : tokens) ++tf[t];
    for (auto& [term, count] : tf) {
      postings_[term].emplace_back(i, count);
    }
  }
  avg_doc_length_ = docs_.empty() ? 0.0 : static_cast<double>(total) / docs_.size();
}

double Corpus::bm25_score(std::string_view query, std::size_t doc_index) const {
  double score = 0.0;
  const double n = static_cast<double>(docs_.size());
  for (const auto& term : word_tokens(query)) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double df = static_cast<double>(it->second.size());
    double tf = 0.0;
    for (const auto& [idx, count] : it->second) {
      if (idx == doc_index) {
        tf = static_cast<double>(count);
        break;
      }
    }
    if (tf == 0.0) continue;
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const double len_norm =
        kBm25K1 * (1.0 - kBm25B + kBm25B * doc_lengths_[doc_index] / avg_doc_length_);
    score += idf * (tf * (kBm25K1 + 1.0)) / (tf + len_norm);
  }
  return score;
}

std::vector<ScoredDocument> Corpus::top_k_lexical(std::string_view query, std::size_t k) const {
  std::vector<double> scores(docs_.size(), 0.0);
  for (std::size_t i = 0; i < docs_.size(); ++i) scores[i] = bm25_score(query, i);
  return rank_top_k(*this, std::move(scores), k);
}

const std::vector<std::vector<double>>& Corpus::vectors_for(const Embedder& embedder) const {
  std::lock_guard lock(cache_->mutex);
  if (cache_->source != &embedder) {
    std::vector<std::string> texts;
    texts.reserve(docs_.size());
    for (const auto& doc : docs_) texts.push_back(doc.text);
    cache_->vectors = embedder.embed_batch(texts);
    cache_->source = &embedder;
  }
  return cache_->vectors;
}

std::vector<ScoredDocument> Corpus::top_k_semantic(std::string_view query, std::size_t k,
                                                   const Embedder& embedder) const {
  const auto& vectors = vectors_for(embedder);
  const auto query_vec = embedder.embed(query);
  std::vector<double> scores(docs_.size(), 0.0);
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    scores[i] = cosine_similarity(query_vec, vectors[i]);
  }
  return rank_top_k(*this, std::move(scores), k);
}

std::vector<ScoredDocument> top_k(const Corpus& corpus, std::string_view query, std::size_t k,
                                  RetrievalMode mode, const Embedder* embedder) {
  if (k == 0) throw PreconditionError("top_k: k must be >= 1");
  if (corpus.size() == 0) throw RetrievalError("top_k: empty corpus");
  if (mode == RetrievalMode::semantic) {
    if (embedder == nullptr) {
      throw PreconditionError("top_k: semantic mode needs an embedder");
    }
    return corpus.top_k_semantic(query, k, *embedder);
  }
  return corpus.top_k_lexical(query, k);
}

std::vector<Document> chunk_document(const Document& doc, std::size_t chunk_words,
                                     std::size_t overlap_words) {
  if (chunk_words == 0) throw PreconditionError("chunk_document: chunk_words must be positive");
  if (overlap_words >= chunk_words) {
    throw PreconditionError("chunk_document: overlap must be smaller than the chunk");
  }
  auto tokens = word_tokens(doc.text, /*lowercase=*/false);
  if (tokens.size() <= chunk_words) return {doc};
  std::vector<Document> out;
  std::size_t start = 0;
  std::size_t index = 0;
  while (start < tokens.size()) {
    std::size_t end = std::min(start + chunk_words, tokens.size());
    std::string text;
    for (std::size_t i = start; i < end; ++i) {
      if (!text.empty()) text += ' ';
      text += tokens[i];
    }
    Document chunk = doc;
    chunk.id = doc.id + "#" + std::to_string(index++);
    chunk.text = std::move(text);
    out.push_back(std::move(chunk));
    if (end == tokens.size()) break;
    start = end - overlap_words;
  }
  return out;
}

}  // namespace summrag
