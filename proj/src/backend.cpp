#include "summrag/backend.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "summrag/prompts.hpp"
#include "summrag/util.hpp"
#include "synthesizer.hpp"

namespace summrag {
namespace {

using nlohmann::json;

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Whole-word search so IRRELEVANT never reads as RELEVANT, NO_CONFLICT never
// as CONFLICT, and INCORRECT never as CORRECT.
bool find_word(const std::string& haystack, std::string_view word) {
  std::size_t pos = 0;
  while ((pos = haystack.find(word, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !word_char(haystack[pos - 1]);
    const std::size_t end = pos + word.size();
    const bool right_ok = end == haystack.size() || !word_char(haystack[end]);
    if (left_ok && right_ok) return true;
    pos += 1;
  }
  return false;
}

bool parse_binary_verdict(const std::string& raw, std::string_view positive,
                          std::string_view negative) {
  const bool yes = find_word(raw, positive);
  const bool no = find_word(raw, negative);
  if (yes == no) {
    throw JudgeParseError(yes ? "ambiguous judge verdict" : "no judge verdict found", raw);
  }
  return yes;
}

}  // namespace

std::string to_string(BackendRole role) {
  switch (role) {
    case BackendRole::generator: return "generator";
    case BackendRole::subject: return "subject";
    case BackendRole::judge: return "judge";
    case BackendRole::embedder: return "embedder";
  }
  return "subject";
}

BackendRole backend_role_from_string(std::string_view s) {
  if (s == "generator") return BackendRole::generator;
  if (s == "subject") return BackendRole::subject;
  if (s == "judge") return BackendRole::judge;
  if (s == "embedder") return BackendRole::embedder;
  throw ConfigError("unknown backend role: " + std::string(s));
}

std::string fingerprint(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
  std::string payload;
  for (const auto& message : messages) {
    payload += message.role;
    payload += '\x1f';
    payload += message.content;
    payload += '\x1e';
  }
  char tail[64];
  std::snprintf(tail, sizeof(tail), "t=%.6g;m=%d;s=", params.temperature, params.max_tokens);
  payload += tail;
  payload += params.seed ? std::to_string(*params.seed) : "-";

  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a(payload)));
  return std::string(hex);
}

std::string ChatBackend::complete(const std::string& prompt, const GenerationParams& params) {
  if (profile_.role != BackendRole::generator && profile_.role != BackendRole::subject) {
    throw PreconditionError("backend '" + profile_.name + "' holds the " + to_string(profile_.role) +
                            " seat and cannot serve complete()");
  }
  return chat({{"user", prompt}}, params);
}

std::shared_ptr<MockBackend> MockBackend::from_script(BackendProfile profile,
                                                      const std::string& script_path) {
  std::ifstream in(script_path);
  if (!in) throw ConfigError("cannot open mock script: " + script_path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("malformed mock script " + script_path + ": " + e.what());
  }
  auto backend = std::make_shared<MockBackend>(std::move(profile),
                                               doc.value("synthesize", true));
  if (doc.contains("entries")) {
    for (const auto& [fp, reply] : doc.at("entries").items()) {
      backend->add_entry(fp, reply.get<std::string>());
    }
  }
  if (doc.contains("rules")) {
    for (const auto& rule : doc.at("rules")) {
      backend->add_rule(rule.at("contains").get<std::string>(),
                        rule.at("reply").get<std::string>());
    }
  }
  return backend;
}

std::string MockBackend::chat(const std::vector<ChatMessage>& messages,
                              const GenerationParams& params) {
  const std::string fp = fingerprint(messages, params);
  const std::string last = messages.empty() ? std::string() : messages.back().content;

  std::optional<std::string> reply;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(fp);
    if (it != entries_.end()) {
      reply = it->second;
    } else {
      for (const auto& rule : rules_) {
        if (last.find(rule.contains) != std::string::npos) {
          reply = rule.reply;
          break;
        }
      }
    }
  }
  if (!reply && synthesize_) reply = detail::synthesize_reply(messages);
  if (!reply) throw BackendError("no script entry for request", fp);

  std::lock_guard<std::mutex> lock(mutex_);
  log_.push_back({fp, last, *reply});
  return *reply;
}

void MockBackend::add_entry(const std::string& fp, const std::string& reply) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_[fp] = reply;
}

void MockBackend::add_rule(const std::string& contains, const std::string& reply) {
  std::lock_guard<std::mutex> lock(mutex_);
  rules_.push_back({contains, reply});
}

int MockBackend::call_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return static_cast<int>(log_.size());
}

std::vector<MockBackend::LogRecord> MockBackend::call_log() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return log_;
}

namespace {

json http_post_json(const BackendProfile& profile, const RetryPolicy& retry,
                    const std::string& path, const json& body, const std::string& fp) {
  httplib::Headers headers;
  if (!profile.credential_env.empty()) {
    if (const char* cred = std::getenv(profile.credential_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + cred);
    }
  }
  const std::string payload = body.dump();

  std::string last_error = "unknown error";
  for (int attempt = 0; attempt <= retry.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(retry.base_delay_ms * (1 << (attempt - 1))));
    }
    httplib::Client client(profile.endpoint);
    client.set_connection_timeout(60, 0);
    client.set_read_timeout(60, 0);
    client.set_write_timeout(60, 0);
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error contacting " + profile.endpoint + path;
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status) + " from " + path;
      continue;
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      last_error = std::string("malformed JSON reply: ") + e.what();
    }
  }
  throw BackendError(last_error, fp);
}

}  // namespace

std::string HttpChatBackend::chat(const std::vector<ChatMessage>& messages,
                                  const GenerationParams& params) {
  const std::string fp = fingerprint(messages, params);
  json body = {
      {"model", profile().model},
      {"temperature", params.temperature},
      {"max_tokens", params.max_tokens},
  };
  if (params.seed) body["seed"] = *params.seed;
  json jmessages = json::array();
  for (const auto& message : messages) {
    jmessages.push_back({{"role", message.role}, {"content", message.content}});
  }
  body["messages"] = std::move(jmessages);

  const json reply = http_post_json(profile(), retry_, "/v1/chat/completions", body, fp);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected completion shape: ") + e.what(), fp);
  }
}

std::vector<std::vector<double>> HttpEmbedder::embed_batch(
    const std::vector<std::string>& texts) const {
  if (texts.empty()) return {};
  std::vector<ChatMessage> pseudo;
  pseudo.reserve(texts.size());
  for (const auto& text : texts) pseudo.push_back({"embed", text});
  const std::string fp = fingerprint(pseudo, {});

  const json body = {{"model", profile_.model}, {"input", texts}};
  const json reply = http_post_json(profile_, retry_, "/v1/embeddings", body, fp);
  try {
    const auto& data = reply.at("data");
    if (data.size() != texts.size()) {
      throw BackendError("embedding count mismatch: got " + std::to_string(data.size()) +
                             " for " + std::to_string(texts.size()) + " inputs",
                         fp);
    }
    std::vector<std::vector<double>> out;
    out.reserve(data.size());
    for (const auto& row : data) {
      auto vec = row.at("embedding").get<std::vector<double>>();
      if (vec.size() != dimension_) {
        throw BackendError("embedding dimension mismatch: got " + std::to_string(vec.size()) +
                               ", expected " + std::to_string(dimension_),
                           fp);
      }
      out.push_back(std::move(vec));
    }
    return out;
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected embedding shape: ") + e.what(), fp);
  }
}

std::vector<double> HttpEmbedder::embed(std::string_view text) const {
  return embed_batch({std::string(text)}).front();
}

namespace {

std::string run_judge(ChatBackend& judge, const std::string& prompt) {
  if (judge.profile().role != BackendRole::judge) {
    throw PreconditionError("backend '" + judge.profile().name +
                            "' holds the " + to_string(judge.profile().role) +
                            " seat and cannot judge");
  }
  GenerationParams params;
  params.max_tokens = 16;
  return judge.chat({{"user", prompt}}, params);
}

}  // namespace

JudgeResult<bool> judge_relevance(ChatBackend& judge, const std::string& topic,
                                  const std::string& text) {
  const std::string raw =
      run_judge(judge, prompts::render("judge.relevance", {{"topic", topic}, {"text", text}}));
  return {parse_binary_verdict(raw, "RELEVANT", "IRRELEVANT"), raw};
}

JudgeResult<bool> judge_text_relevance(ChatBackend& judge, const std::string& user_text,
                                       const std::string& retrieval_text) {
  const std::string raw = run_judge(
      judge, prompts::render("judge.text_relevance",
                             {{"user_text", user_text}, {"retrieval_text", retrieval_text}}));
  return {parse_binary_verdict(raw, "RELEVANT", "IRRELEVANT"), raw};
}

JudgeResult<bool> judge_conflict(ChatBackend& judge, const std::string& user_text,
                                 const std::string& retrieval_text) {
  const std::string raw = run_judge(
      judge, prompts::render("judge.conflict",
                             {{"user_text", user_text}, {"retrieval_text", retrieval_text}}));
  return {parse_binary_verdict(raw, "CONFLICT", "NO_CONFLICT"), raw};
}

JudgeResult<bool> judge_logical_correctness(ChatBackend& judge, const std::string& expectation,
                                            const std::string& transcript) {
  const std::string raw = run_judge(
      judge, prompts::render("judge.logic",
                             {{"expectation", expectation}, {"transcript", transcript}}));
  return {parse_binary_verdict(raw, "CORRECT", "INCORRECT"), raw};
}

}  // namespace summrag
