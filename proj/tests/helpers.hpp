#pragma once

#include <string>
#include <vector>

#include "summrag/backend.hpp"
#include "summrag/retriever.hpp"
#include "summrag/token_protocol.hpp"
#include "summrag/util.hpp"

// Shared between the unit tests and the acceptance driver.
namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(FIXTURE_DIR) + "/" + name;
}

inline summrag::BackendProfile mock_profile(summrag::BackendRole role) {
  summrag::BackendProfile profile;
  profile.name = "mock-" + summrag::to_string(role);
  profile.endpoint = "mock://";
  profile.model = "mock";
  profile.role = role;
  return profile;
}

inline summrag::Corpus fixture_corpus() {
  return summrag::Corpus::load_jsonl(fixture_path("corpus.jsonl"));
}

// Free-text vocabulary for generated turns. Nothing here contains '[' or the
// angle payload brackets, so generated text can never collide with a token
// surface or a bare countdown.
inline std::string random_words(summrag::SplitMix& rng, int min_words, int max_words) {
  static const std::vector<std::string> kWords = {
      "report",  "summary", "topic",  "detail",  "figure", "draft",   "review",
      "archive", "channel", "record", "station", "survey", "update",  "margin",
      "signal",  "ledger",  "note",   "outline", "quota",  "transit", "yield",
  };
  static const std::vector<std::string> kTails = {"", "", ".", ",", ":", ")", "]", "!"};
  int n = min_words + static_cast<int>(rng.bounded(
                          static_cast<std::uint64_t>(max_words - min_words + 1)));
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    if (rng.bounded(8) == 0) {
      out += std::to_string(rng.bounded(1000));
    } else {
      out += kWords[rng.bounded(kWords.size())];
    }
    out += kTails[rng.bounded(kTails.size())];
  }
  return out;
}

// One random well-formed turn from the dialogue grammar: plain markers,
// payload groups, free text, nested groups, and the optional-closer Argument
// form. Text segments are never adjacent (they would merge on reparse) and
// Count payloads always start with an integer.
inline summrag::AnnotatedTurn random_turn(summrag::SplitMix& rng) {
  using summrag::Segment;
  using summrag::SpecialToken;
  static const std::vector<SpecialToken> kMarkers = {
      SpecialToken::Retrieval,          SpecialToken::NoRetrieval,
      SpecialToken::Relevant,           SpecialToken::Irrelevant,
      SpecialToken::ContinueUserText,   SpecialToken::InformationConflict,
      SpecialToken::AugmentingUserText, SpecialToken::Topic,
  };

  summrag::AnnotatedTurn turn;
  turn.role = rng.bounded(2) == 0 ? summrag::Role::user : summrag::Role::assistant;
  bool last_was_text = false;
  auto push_text = [&](int min_w, int max_w) {
    turn.segments.push_back(Segment::txt(random_words(rng, min_w, max_w)));
    last_was_text = true;
  };
  auto push_tok = [&](SpecialToken t) {
    turn.segments.push_back(Segment::tok(t));
    last_was_text = false;
  };

  int elements = 1 + static_cast<int>(rng.bounded(6));
  for (int e = 0; e < elements; ++e) {
    switch (rng.bounded(6)) {
      case 0:
        if (!last_was_text) push_text(1, 8);
        break;
      case 1:
        push_tok(kMarkers[rng.bounded(kMarkers.size())]);
        break;
      case 2: {  // context group, optionally with a nested paragraph
        push_tok(SpecialToken::ContextOpen);
        push_text(1, 6);
        if (rng.bounded(3) == 0) {
          push_tok(SpecialToken::ParagraphOpen);
          push_text(1, 4);
          push_tok(SpecialToken::ParagraphClose);
        }
        push_tok(SpecialToken::ContextClose);
        break;
      }
      case 3: {  // count group; payload must lead with an integer
        push_tok(SpecialToken::CountOpen);
        std::string payload = std::to_string(rng.bounded(40));
        payload += rng.bounded(2) == 0 ? " documents left to summarize"
                                       : " steps remaining in this pass";
        turn.segments.push_back(Segment::txt(payload));
        push_tok(SpecialToken::CountClose);
        break;
      }
      case 4: {  // paragraph payload
        push_tok(SpecialToken::ParagraphOpen);
        push_text(2, 10);
        push_tok(SpecialToken::ParagraphClose);
        break;
      }
      case 5: {  // api call, argument closer optional
        push_tok(SpecialToken::ApiOpen);
        push_text(1, 2);
        push_tok(SpecialToken::ApiClose);
        if (rng.bounded(2) == 0) {
          push_tok(SpecialToken::ArgumentOpen);
          push_text(1, 3);
          if (rng.bounded(2) == 0) push_tok(SpecialToken::ArgumentClose);
        }
        break;
      }
    }
  }
  if (turn.segments.empty()) push_text(1, 4);
  return turn;
}

}  // namespace testutil
