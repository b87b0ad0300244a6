#pragma once

#include <optional>
#include <string>
#include <vector>

#include "summrag/backend.hpp"

namespace summrag::detail {

// Deterministic stand-in model behind MockBackend's synthesize mode. It
// recognizes the engine's own prompt shapes by their anchor sentences, pulls
// the payloads out of their ###...### slots, and answers with rule-based
// text: judges use lexical heuristics, summarizers echo or concatenate, and
// dialogue-construction prompts emit complete scenario-shaped JSON arrays.
// Returns nullopt for prompts it does not recognize.
std::optional<std::string> synthesize_reply(const std::vector<ChatMessage>& messages);

// Lexical heuristics shared with tests. Relevance is a case-insensitive
// substring check; conflict wants near-identical token multisets that still
// differ somewhere (the signature of a tampered copy). Overlap ignores a
// small stopword list so shared grammar words do not fake relatedness.
bool lexical_relevance(const std::string& topic, const std::string& text);
double content_overlap(const std::string& a, const std::string& b);
bool lexical_conflict(const std::string& user_text, const std::string& retrieval_text);

}  // namespace summrag::detail
