#include "summrag/token_protocol.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "summrag/errors.hpp"

namespace summrag {
namespace {

struct LexEntry {
  std::string_view surface;
  SpecialToken token;
};

// Canonical surfaces. Index must line up with the SpecialToken enum.
constexpr std::string_view kCanonical[kSpecialTokenCount] = {
    "[Retrieval]",
    "[No Retrieval]",
    "[Relevant]",
    "[Irrelevant]",
    "[Continue to use User's Text]",
    "[Information Conflict]",
    "[Augmenting User's Text]",
    "[Context]",
    "[/Context]",
    "⟨Count⟩",
    "⟨/Count⟩",
    "[Topic]",
    "⟨paragraph⟩",
    "⟨/paragraph⟩",
    "[API]",
    "[/API]",
    "[Argument]",
    "[/Argument]",
};

// Spelling variants that occur in the wild and are accepted on parse. Render
// always emits the canonical form.
constexpr LexEntry kAliases[] = {
    {"[Continuing to use User's text]", SpecialToken::ContinueUserText},
    {"[Continue to Use User's Text]", SpecialToken::ContinueUserText},
    {"⟨API⟩", SpecialToken::ApiOpen},
    {"⟨/API⟩", SpecialToken::ApiClose},
};

const std::vector<LexEntry>& lex_entries() {
  static const std::vector<LexEntry> entries = [] {
    std::vector<LexEntry> v;
    for (std::size_t i = 0; i < kSpecialTokenCount; ++i) {
      v.push_back({kCanonical[i], static_cast<SpecialToken>(i)});
    }
    for (const auto& alias : kAliases) v.push_back(alias);
    // Longest first so prefix-sharing surfaces resolve to the longest match.
    std::stable_sort(v.begin(), v.end(), [](const LexEntry& a, const LexEntry& b) {
      return a.surface.size() > b.surface.size();
    });
    return v;
  }();
  return entries;
}

constexpr std::string_view kAngleOpen = "⟨";
constexpr std::string_view kAngleClose = "⟩";
constexpr std::string_view kBareCountSuffixPlural = "documents left to summarize";
constexpr std::string_view kBareCountSuffixSingular = "document left to summarize";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// True when `inner` reads as: optional spaces, an integer, spaces, the
// countdown phrase, optional spaces. Matches the bare angle-bracket
// countdown that older dialogues carry instead of an explicit Count group.
bool is_bare_count_payload(std::string_view inner) {
  std::size_t i = 0;
  while (i < inner.size() && is_space(inner[i])) ++i;
  std::size_t digits_begin = i;
  while (i < inner.size() && is_digit(inner[i])) ++i;
  if (i == digits_begin) return false;
  std::size_t spaces_begin = i;
  while (i < inner.size() && is_space(inner[i])) ++i;
  if (i == spaces_begin) return false;
  std::string_view rest = inner.substr(i);
  for (std::string_view suffix : {kBareCountSuffixPlural, kBareCountSuffixSingular}) {
    if (rest.size() >= suffix.size() && rest.substr(0, suffix.size()) == suffix) {
      std::string_view tail = rest.substr(suffix.size());
      if (std::all_of(tail.begin(), tail.end(), is_space)) return true;
    }
  }
  return false;
}

struct LexedSegment {
  Segment segment;
  std::size_t offset = 0;  // byte offset in the original turn text
};

std::vector<LexedSegment> tokenize_with_offsets(std::string_view text) {
  std::vector<LexedSegment> out;
  std::string pending;
  std::size_t pending_offset = 0;
  std::size_t i = 0;

  auto flush = [&] {
    if (!pending.empty()) {
      out.push_back({Segment::txt(std::move(pending)), pending_offset});
      pending.clear();
    }
  };

  while (i < text.size()) {
    const char c = text[i];
    // Token surfaces start with '[' or the U+27E8 angle bracket (0xE2).
    if (c == '[' || static_cast<unsigned char>(c) == 0xe2) {
      bool matched = false;
      for (const auto& entry : lex_entries()) {
        if (text.size() - i >= entry.surface.size() &&
            text.compare(i, entry.surface.size(), entry.surface) == 0) {
          flush();
          out.push_back({Segment{entry.token, std::string(entry.surface)}, i});
          i += entry.surface.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (pending.empty()) pending_offset = i;
    pending.push_back(c);
    ++i;
  }
  flush();
  return out;
}

bool is_opener(SpecialToken t) {
  switch (t) {
    case SpecialToken::ContextOpen:
    case SpecialToken::CountOpen:
    case SpecialToken::ParagraphOpen:
    case SpecialToken::ApiOpen:
    case SpecialToken::ArgumentOpen:
      return true;
    default:
      return false;
  }
}

std::optional<SpecialToken> opener_for(SpecialToken closer) {
  switch (closer) {
    case SpecialToken::ContextClose:
      return SpecialToken::ContextOpen;
    case SpecialToken::CountClose:
      return SpecialToken::CountOpen;
    case SpecialToken::ParagraphClose:
      return SpecialToken::ParagraphOpen;
    case SpecialToken::ApiClose:
      return SpecialToken::ApiOpen;
    case SpecialToken::ArgumentClose:
      return SpecialToken::ArgumentOpen;
    default:
      return std::nullopt;
  }
}

// Bracket pairing over the segment stream. The Argument marker may close
// implicitly (end of turn or an enclosing group's closer); everything else
// must pair up exactly.
void check_nesting(const std::vector<LexedSegment>& segments) {
  struct Open {
    SpecialToken token;
    std::size_t offset;
  };
  std::vector<Open> stack;
  for (const auto& ls : segments) {
    if (!ls.segment.is_token()) continue;
    SpecialToken t = *ls.segment.token;
    if (is_opener(t)) {
      stack.push_back({t, ls.offset});
      continue;
    }
    auto open = opener_for(t);
    if (!open) continue;  // plain marker, no pairing
    while (!stack.empty() && stack.back().token == SpecialToken::ArgumentOpen &&
           *open != SpecialToken::ArgumentOpen) {
      stack.pop_back();  // implicit close of an optional-closer Argument
    }
    if (stack.empty() || stack.back().token != *open) {
      throw ParseError(std::string("unmatched ") + std::string(surface(t)), ls.offset);
    }
    stack.pop_back();
  }
  while (!stack.empty()) {
    if (stack.back().token == SpecialToken::ArgumentOpen) {
      stack.pop_back();
      continue;
    }
    throw ParseError(std::string("unclosed ") + std::string(surface(stack.back().token)),
                     stack.back().offset);
  }
}

// Rewrites bare angle-bracket countdowns inside text segments into explicit
// Count groups so downstream consumers only ever see the canonical form.
std::vector<LexedSegment> normalize_bare_counts(std::vector<LexedSegment> segments) {
  std::vector<LexedSegment> out;
  for (auto& ls : segments) {
    if (ls.segment.is_token()) {
      out.push_back(std::move(ls));
      continue;
    }
    std::string_view text = ls.segment.text;
    std::size_t searched = 0;
    std::size_t emitted = 0;
    while (true) {
      std::size_t open = text.find(kAngleOpen, searched);
      if (open == std::string_view::npos) break;
      std::size_t close = text.find(kAngleClose, open + kAngleOpen.size());
      if (close == std::string_view::npos) break;
      std::string_view inner =
          text.substr(open + kAngleOpen.size(), close - open - kAngleOpen.size());
      if (!is_bare_count_payload(inner)) {
        searched = open + kAngleOpen.size();
        continue;
      }
      if (open > emitted) {
        out.push_back({Segment::txt(std::string(text.substr(emitted, open - emitted))),
                       ls.offset + emitted});
      }
      out.push_back({Segment::tok(SpecialToken::CountOpen), ls.offset + open});
      out.push_back({Segment::txt(std::string(inner)), ls.offset + open + kAngleOpen.size()});
      out.push_back({Segment::tok(SpecialToken::CountClose), ls.offset + close});
      emitted = close + kAngleClose.size();
      searched = emitted;
    }
    if (emitted == 0) {
      out.push_back(std::move(ls));
    } else if (emitted < text.size()) {
      out.push_back({Segment::txt(std::string(text.substr(emitted))), ls.offset + emitted});
    }
  }
  return out;
}

// Count groups must hold exactly one text segment whose content starts with
// a non-negative integer; the rest of the payload is free description.
void check_count_payloads(const std::vector<LexedSegment>& segments) {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (!segments[i].segment.is_token() ||
        *segments[i].segment.token != SpecialToken::CountOpen) {
      continue;
    }
    if (i + 2 >= segments.size() || segments[i + 1].segment.is_token() ||
        !segments[i + 2].segment.is_token() ||
        *segments[i + 2].segment.token != SpecialToken::CountClose) {
      throw ParseError("Count group must hold a single text payload", segments[i].offset);
    }
    std::string_view payload = segments[i + 1].segment.text;
    std::size_t p = 0;
    while (p < payload.size() && is_space(payload[p])) ++p;
    std::size_t digits = p;
    while (p < payload.size() && is_digit(payload[p])) ++p;
    if (p == digits) {
      throw ParseError("Count payload must start with a non-negative integer",
                       segments[i + 1].offset);
    }
  }
}

const char* kReplacementsKey = "replacements";
const char* kContextCloseKey = "context_close";
const char* kPrefixesKey = "prefixes";

}  // namespace

std::string_view surface(SpecialToken token) {
  return kCanonical[static_cast<std::size_t>(token)];
}

std::optional<SpecialToken> token_from_surface(std::string_view s) {
  for (const auto& entry : lex_entries()) {
    if (entry.surface == s) return entry.token;
  }
  return std::nullopt;
}

bool AnnotatedTurn::contains(SpecialToken t) const {
  return std::any_of(segments.begin(), segments.end(),
                     [t](const Segment& s) { return s.token == t; });
}

std::optional<long long> AnnotatedTurn::count_value() const {
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    if (segments[i].token != SpecialToken::CountOpen) continue;
    if (segments[i + 1].is_token()) return std::nullopt;
    std::string_view payload = segments[i + 1].text;
    std::size_t p = 0;
    while (p < payload.size() && is_space(payload[p])) ++p;
    std::size_t begin = p;
    while (p < payload.size() && is_digit(payload[p])) ++p;
    if (p == begin) return std::nullopt;
    return std::stoll(std::string(payload.substr(begin, p - begin)));
  }
  return std::nullopt;
}

std::string AnnotatedTurn::plain_text() const {
  std::string out;
  for (const auto& seg : segments) {
    if (!seg.is_token()) out += seg.text;
  }
  return out;
}

std::vector<Segment> tokenize(std::string_view text) {
  std::vector<Segment> out;
  for (auto& ls : tokenize_with_offsets(text)) out.push_back(std::move(ls.segment));
  return out;
}

AnnotatedTurn parse_turn(Role role, std::string_view text) {
  auto lexed = tokenize_with_offsets(text);
  check_nesting(lexed);
  lexed = normalize_bare_counts(std::move(lexed));
  check_count_payloads(lexed);
  AnnotatedTurn turn;
  turn.role = role;
  turn.segments.reserve(lexed.size());
  for (auto& ls : lexed) turn.segments.push_back(std::move(ls.segment));
  return turn;
}

std::string render_turn(const AnnotatedTurn& turn) {
  std::string out;
  for (const auto& seg : turn.segments) {
    if (seg.is_token()) {
      out += surface(*seg.token);
    } else {
      out += seg.text;
    }
  }
  return out;
}

const TransformationTable& TransformationTable::defaults() {
  static const TransformationTable table = [] {
    TransformationTable t;
    t.set_replacement(SpecialToken::Retrieval,
                      "Here is the retrieval text to be used for summarization");
    t.set_replacement(SpecialToken::NoRetrieval,
                      "There is no need to retrieve since user provides its own text");
    t.set_replacement(SpecialToken::Relevant,
                      "The retrieval text is relevant with the user's text");
    t.set_replacement(SpecialToken::Irrelevant,
                      "The retrieval text is irrelevant with the user's text");
    t.set_replacement(SpecialToken::ContinueUserText,
                      "The retrieval text is not relevant with the user's text. Ignore it and "
                      "use the user's text to form the summarization as follows: ");
    t.set_replacement(SpecialToken::InformationConflict,
                      "Although the retrieval text is relevant with user's text, there is an "
                      "information conflict between user's text and the retrieved text.");
    t.set_replacement(SpecialToken::AugmentingUserText,
                      "The retrieval text is relevant with user's text. MUST COMBINE user's "
                      "text and retrieved text to write the final summarization.");
    t.set_replacement(SpecialToken::ContextOpen, "Context to be used for the summarization");
    t.set_context_close(
        "If the retrieval text is relevant with the user's topic, combine retrieval text "
        "with context information. Here is the summarization at this step: ",
        "If the retrieval text is not relevant with the user's topic, keep the "
        "summarization at this step same as the context;");
    t.set_replacement(SpecialToken::CountOpen,
                      "Start counting how many documents left to summarize. Current "
                      "summarization step you are at: ");
    t.set_replacement(SpecialToken::CountClose, "");
    t.set_replacement(SpecialToken::Topic,
                      "Here is the topic to be kept to check if retrieval text is relevant "
                      "with the user's query: ");
    // The paragraph delimiters have no documented sentence of their own; a
    // newline keeps the payload visually separated without inventing prose.
    t.set_replacement(SpecialToken::ParagraphOpen, "\n");
    t.set_replacement(SpecialToken::ParagraphClose, "\n");
    t.set_replacement(SpecialToken::ApiOpen, "Here is the API: ");
    t.set_replacement(SpecialToken::ApiClose, "");
    t.set_replacement(SpecialToken::ArgumentOpen, "The argument of the API: ");
    t.set_replacement(SpecialToken::ArgumentClose, "");
    t.set_prefix(Aspect::Top1Retrieval,
                 "You are a summarization assistant to retrieve the text based on user's "
                 "topic and then do the summarization.");
    t.set_prefix(Aspect::DirectUserText,
                 "You are a summarization assistant to do the summarization based on "
                 "user's text.");
    t.set_prefix(Aspect::CombinedUserAndRetrieval,
                 "You are a summarization assistant to decide if combining the retrieval "
                 "text with user's text to do the summarization based on its relevancy:");
    t.set_prefix(Aspect::TopK,
                 "You are a summarization assistant to summarize the documents one by one.");
    return t;
  }();
  return table;
}

TransformationTable TransformationTable::from_json(const nlohmann::json& j) {
  TransformationTable t;
  if (!j.contains(kReplacementsKey) || !j[kReplacementsKey].is_object()) {
    throw ConfigError("transformation table JSON needs a 'replacements' object");
  }
  for (const auto& [key, value] : j[kReplacementsKey].items()) {
    auto token = token_from_surface(key);
    if (!token) throw ConfigError("unknown token surface in table: " + key);
    t.set_replacement(*token, value.get<std::string>());
  }
  if (j.contains(kContextCloseKey)) {
    const auto& cc = j[kContextCloseKey];
    t.set_context_close(cc.at("relevant").get<std::string>(),
                        cc.at("irrelevant").get<std::string>());
  }
  if (j.contains(kPrefixesKey)) {
    for (const auto& [key, value] : j[kPrefixesKey].items()) {
      auto aspect = aspect_from_string(key);
      if (!aspect) throw ConfigError("unknown aspect in table: " + key);
      t.set_prefix(*aspect, value.get<std::string>());
    }
  }
  return t;
}

TransformationTable TransformationTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transformation table: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

nlohmann::json TransformationTable::to_json() const {
  nlohmann::json replacements = nlohmann::json::object();
  for (const auto& [token, text] : replacements_) {
    replacements[std::string(surface(token))] = text;
  }
  nlohmann::json prefixes = nlohmann::json::object();
  for (const auto& [aspect, text] : prefixes_) {
    prefixes[std::string(to_string(aspect))] = text;
  }
  return nlohmann::json{{kReplacementsKey, replacements},
                        {kContextCloseKey,
                         {{"relevant", context_close_relevant_},
                          {"irrelevant", context_close_irrelevant_}}},
                        {kPrefixesKey, prefixes}};
}

const std::string& TransformationTable::replacement(SpecialToken token,
                                                    RelevanceBranch branch) const {
  if (token == SpecialToken::ContextClose) {
    switch (branch) {
      case RelevanceBranch::Relevant:
        if (!context_close_relevant_.empty()) return context_close_relevant_;
        break;
      case RelevanceBranch::Irrelevant:
        if (!context_close_irrelevant_.empty()) return context_close_irrelevant_;
        break;
      case RelevanceBranch::Auto:
        throw TransformError(
            "[/Context] replacement needs a resolved relevance branch and the turn "
            "carries no Relevant/Irrelevant marker");
    }
    throw TransformError("transformation table has no [/Context] row for this branch");
  }
  auto it = replacements_.find(token);
  if (it == replacements_.end()) {
    throw TransformError("transformation table has no row for " + std::string(surface(token)));
  }
  return it->second;
}

const std::string& TransformationTable::prefix(Aspect aspect) const {
  auto it = prefixes_.find(aspect);
  if (it == prefixes_.end()) {
    throw TransformError("transformation table has no prefix for aspect " +
                         std::string(to_string(aspect)));
  }
  return it->second;
}

void TransformationTable::set_replacement(SpecialToken token, std::string text) {
  replacements_[token] = std::move(text);
}

void TransformationTable::set_context_close(std::string relevant, std::string irrelevant) {
  context_close_relevant_ = std::move(relevant);
  context_close_irrelevant_ = std::move(irrelevant);
}

void TransformationTable::set_prefix(Aspect aspect, std::string text) {
  prefixes_[aspect] = std::move(text);
}

TransformedText transform_segments(const AnnotatedTurn& turn, const TransformationTable& table,
                                   RelevanceBranch branch) {
  RelevanceBranch effective = branch;
  if (effective == RelevanceBranch::Auto) {
    if (turn.contains(SpecialToken::Relevant)) {
      effective = RelevanceBranch::Relevant;
    } else if (turn.contains(SpecialToken::Irrelevant) ||
               turn.contains(SpecialToken::ContinueUserText)) {
      effective = RelevanceBranch::Irrelevant;
    }
  }
  TransformedText out;
  out.segment_ranges.reserve(turn.segments.size());
  for (const auto& seg : turn.segments) {
    std::size_t begin = out.text.size();
    if (seg.is_token()) {
      out.text += table.replacement(*seg.token, effective);
    } else {
      out.text += seg.text;
    }
    out.segment_ranges.emplace_back(begin, out.text.size());
  }
  return out;
}

std::string to_natural_text(const AnnotatedTurn& turn, const TransformationTable& table,
                            RelevanceBranch branch) {
  return transform_segments(turn, table, branch).text;
}

std::string to_natural_text(const AnnotatedTurn& turn, Aspect aspect,
                            const TransformationTable& table, RelevanceBranch branch) {
  return table.prefix(aspect) + "\n" + to_natural_text(turn, table, branch);
}

const std::string& system_prefix(Aspect aspect) {
  return TransformationTable::defaults().prefix(aspect);
}

}  // namespace summrag
