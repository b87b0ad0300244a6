#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "summrag/types.hpp"

namespace summrag {

// The dialogue control vocabulary. Square-bracket tokens mark decisions
// (retrieve or not, relevant or not, which combination branch fired); the
// angle-bracket pairs delimit payloads (retrieved paragraphs, the countdown
// in multi-document runs).
enum class SpecialToken : std::uint8_t {
  Retrieval,
  NoRetrieval,
  Relevant,
  Irrelevant,
  ContinueUserText,
  InformationConflict,
  AugmentingUserText,
  ContextOpen,
  ContextClose,
  CountOpen,
  CountClose,
  Topic,
  ParagraphOpen,
  ParagraphClose,
  ApiOpen,
  ApiClose,
  ArgumentOpen,
  ArgumentClose,
};

inline constexpr std::size_t kSpecialTokenCount = 18;

// Canonical surface form, the one render_turn emits.
std::string_view surface(SpecialToken token);

// Reverse lookup over canonical surfaces and the accepted aliases
// (historic spelling variants of the continue-user-text marker, angle-bracket
// API markers). Exact, case-sensitive match only.
std::optional<SpecialToken> token_from_surface(std::string_view s);

// One piece of a turn: either a special token or a run of free text.
// For token segments `text` holds the surface as actually written (an alias
// keeps its original bytes so tokenization stays lossless); for text segments
// it holds the raw content.
struct Segment {
  std::optional<SpecialToken> token;
  std::string text;

  static Segment tok(SpecialToken t) { return {t, std::string(surface(t))}; }
  static Segment txt(std::string s) { return {std::nullopt, std::move(s)}; }

  bool is_token() const { return token.has_value(); }
  bool operator==(const Segment&) const = default;
};

// A dialogue turn split into token and text segments. Bracketing tokens are
// properly nested and paired once the turn has been through parse_turn;
// hand-built instances are re-checked by validate_dialogue.
struct AnnotatedTurn {
  Role role = Role::assistant;
  std::vector<Segment> segments;

  bool operator==(const AnnotatedTurn&) const = default;

  bool contains(SpecialToken t) const;

  // The integer carried by the first Count group, if the turn has one.
  std::optional<long long> count_value() const;

  // Concatenation of the free-text segments only (token surfaces dropped).
  std::string plain_text() const;
};

// Splits text into token and text segments. Longest match wins, unknown
// bracket-like substrings stay text, and concatenating the segment surfaces
// reproduces the input byte for byte.
std::vector<Segment> tokenize(std::string_view text);

// tokenize + structural validation. Checks bracket nesting/pairing, rewrites
// the bare countdown form ("<N documents left to summarize>" in angle
// brackets) into an explicit Count group, and validates Count payloads.
// Throws ParseError with the byte offset of the offending token.
// The Argument marker may appear without its closer; everything else must
// pair up.
AnnotatedTurn parse_turn(Role role, std::string_view text);

// Exact inverse of parse_turn on canonical input; alias surfaces and bare
// countdowns come back normalized to their canonical forms.
std::string render_turn(const AnnotatedTurn& turn);

// Which row of the context-close transformation applies: the close of a
// [Context] group reads differently depending on whether the step's
// retrieval text was judged relevant. Auto derives the branch from the
// turn's own Relevant/Irrelevant marker.
enum class RelevanceBranch : std::uint8_t { Auto, Relevant, Irrelevant };

// Token -> natural-text replacements plus the per-aspect system prefixes,
// used to turn token dialogues into plain fine-tuning text. Ships with
// embedded defaults; alternative tables load from JSON keyed by token
// surface.
class TransformationTable {
 public:
  static const TransformationTable& defaults();
  static TransformationTable from_json(const nlohmann::json& j);
  static TransformationTable load_file(const std::string& path);
  nlohmann::json to_json() const;

  // Replacement text for a token. ContextClose needs a resolved branch;
  // asking for it with RelevanceBranch::Auto is a TransformError.
  const std::string& replacement(SpecialToken token, RelevanceBranch branch) const;
  const std::string& prefix(Aspect aspect) const;

  void set_replacement(SpecialToken token, std::string text);
  void set_context_close(std::string relevant, std::string irrelevant);
  void set_prefix(Aspect aspect, std::string text);

 private:
  std::map<SpecialToken, std::string> replacements_;
  std::string context_close_relevant_;
  std::string context_close_irrelevant_;
  std::map<Aspect, std::string> prefixes_;
};

// De-tokenized text plus, for each input segment, the byte range it occupies
// in that text. Ranges let callers keep tracking a payload (for example the
// retrieval paragraph that loss masking needs) across the transformation.
struct TransformedText {
  std::string text;
  std::vector<std::pair<std::size_t, std::size_t>> segment_ranges;
};

TransformedText transform_segments(const AnnotatedTurn& turn,
                                   const TransformationTable& table,
                                   RelevanceBranch branch = RelevanceBranch::Auto);

// Natural-text rendering of a turn: every token surface replaced via the
// table, free text kept verbatim. The Aspect overload prefixes the result
// with that aspect's system sentence.
std::string to_natural_text(const AnnotatedTurn& turn, const TransformationTable& table,
                            RelevanceBranch branch = RelevanceBranch::Auto);
std::string to_natural_text(const AnnotatedTurn& turn, Aspect aspect,
                            const TransformationTable& table,
                            RelevanceBranch branch = RelevanceBranch::Auto);

// The per-aspect system sentence from the default table.
const std::string& system_prefix(Aspect aspect);

}  // namespace summrag
