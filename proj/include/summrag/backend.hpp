#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "summrag/errors.hpp"
#include "summrag/retriever.hpp"

namespace summrag {

// Which seat a model occupies in the pipeline. The generator authors training
// dialogues, the subject is the model under test or in production, judges
// grade behavior, and embedders serve semantic retrieval.
enum class BackendRole { generator, subject, judge, embedder };

std::string to_string(BackendRole role);
BackendRole backend_role_from_string(std::string_view s);

struct BackendProfile {
  std::string name;
  std::string endpoint;
  std::string model;
  BackendRole role = BackendRole::subject;
  // Name of the environment variable holding the API credential. Empty means
  // unauthenticated.
  std::string credential_env;
};

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
};

struct GenerationParams {
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<std::uint64_t> seed;
};

// Stable identity of a request: same messages and params give the same
// fingerprint on every platform. Mock scripts key replies by it and logs cite
// it, so recorded sessions can be replayed exactly.
std::string fingerprint(const std::vector<ChatMessage>& messages, const GenerationParams& params);

struct RetryPolicy {
  int max_retries = 2;
  int base_delay_ms = 100;  // doubled on each retry
};

class ChatBackend {
 public:
  explicit ChatBackend(BackendProfile profile) : profile_(std::move(profile)) {}
  virtual ~ChatBackend() = default;

  const BackendProfile& profile() const { return profile_; }

  // Raw chat call. Throws BackendError (carrying the request fingerprint) on
  // failure.
  virtual std::string chat(const std::vector<ChatMessage>& messages,
                           const GenerationParams& params) = 0;

  // Single-prompt convenience that enforces the seat: only generator and
  // subject backends may be driven through complete().
  std::string complete(const std::string& prompt, const GenerationParams& params = {});

 private:
  BackendProfile profile_;
};

// Offline stand-in for a chat model. Resolution order per request:
//   1. exact fingerprint match in entries
//   2. first substring rule matching the last message, in insertion order
//   3. the deterministic synthesizer, when enabled
// Anything else throws BackendError naming the unmatched fingerprint.
class MockBackend : public ChatBackend {
 public:
  struct Rule {
    std::string contains;
    std::string reply;
  };

  explicit MockBackend(BackendProfile profile, bool synthesize = true)
      : ChatBackend(std::move(profile)), synthesize_(synthesize) {}

  // Script format:
  //   {"entries": {"<fingerprint>": "reply"},
  //    "rules": [{"contains": "needle", "reply": "text"}],
  //    "synthesize": true}
  static std::shared_ptr<MockBackend> from_script(BackendProfile profile,
                                                  const std::string& script_path);

  std::string chat(const std::vector<ChatMessage>& messages,
                   const GenerationParams& params) override;

  void add_entry(const std::string& fp, const std::string& reply);
  void add_rule(const std::string& contains, const std::string& reply);
  void set_synthesize(bool on) { synthesize_ = on; }

  struct LogRecord {
    std::string fingerprint;
    std::string last_message;
    std::string reply;
  };

  int call_count() const;
  std::vector<LogRecord> call_log() const;

 private:
  std::map<std::string, std::string> entries_;
  std::vector<Rule> rules_;
  bool synthesize_ = true;
  mutable std::mutex mutex_;
  std::vector<LogRecord> log_;
};

// OpenAI-compatible chat endpoint: POST {endpoint}/v1/chat/completions.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(BackendProfile profile, RetryPolicy retry = {})
      : ChatBackend(std::move(profile)), retry_(retry) {}

  std::string chat(const std::vector<ChatMessage>& messages,
                   const GenerationParams& params) override;

 private:
  RetryPolicy retry_;
};

// Embedding endpoint: POST {endpoint}/v1/embeddings with {model, input}.
class HttpEmbedder : public Embedder {
 public:
  explicit HttpEmbedder(BackendProfile profile, std::size_t dimension, RetryPolicy retry = {})
      : profile_(std::move(profile)), dimension_(dimension), retry_(retry) {}

  std::size_t dimension() const override { return dimension_; }
  std::vector<double> embed(std::string_view text) const override;
  std::vector<std::vector<double>> embed_batch(
      const std::vector<std::string>& texts) const override;

 private:
  BackendProfile profile_;
  std::size_t dimension_;
  RetryPolicy retry_;
};

// A judge verdict plus the raw reply it was parsed from, kept for reports.
template <typename VerdictT>
struct JudgeResult {
  VerdictT verdict;
  std::string raw;
};

// Binary judgments used across generation and evaluation. All three require
// the backend to hold the judge seat and parse single-word verdicts from the
// reply; an unrecognizable reply throws JudgeParseError carrying the raw text.
JudgeResult<bool> judge_relevance(ChatBackend& judge, const std::string& topic,
                                  const std::string& text);
// Relevance between two free texts (the combined-summarization branch, where
// there is no standalone topic to compare against).
JudgeResult<bool> judge_text_relevance(ChatBackend& judge, const std::string& user_text,
                                       const std::string& retrieval_text);
JudgeResult<bool> judge_conflict(ChatBackend& judge, const std::string& user_text,
                                 const std::string& retrieval_text);
JudgeResult<bool> judge_logical_correctness(ChatBackend& judge, const std::string& expectation,
                                            const std::string& transcript);

}  // namespace summrag
