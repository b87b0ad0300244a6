#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace summrag {

enum class Role : std::uint8_t { user, assistant };

// The four dialogue aspects the engine distinguishes: summarize the top-1
// retrieval result, summarize text the user supplied directly, reconcile user
// text with a retrieval result, or fold a top-k result list one document at a
// time.
enum class Aspect : std::uint8_t {
  Top1Retrieval,
  DirectUserText,
  CombinedUserAndRetrieval,
  TopK,
};

// Routing scenarios. S1/S2 are the relevant/irrelevant top-1 cases, S3 is
// user-supplied text, S4-S6 are the combined branches (ignore retrieval,
// augment, conflict), S7 is the multi-document loop.
enum class Scenario : std::uint8_t { S1 = 1, S2, S3, S4, S5, S6, S7 };

inline constexpr std::array<Scenario, 7> kAllScenarios = {
    Scenario::S1, Scenario::S2, Scenario::S3, Scenario::S4,
    Scenario::S5, Scenario::S6, Scenario::S7};

constexpr Aspect aspect_of(Scenario s) {
  switch (s) {
    case Scenario::S1:
    case Scenario::S2:
      return Aspect::Top1Retrieval;
    case Scenario::S3:
      return Aspect::DirectUserText;
    case Scenario::S4:
    case Scenario::S5:
    case Scenario::S6:
      return Aspect::CombinedUserAndRetrieval;
    case Scenario::S7:
      return Aspect::TopK;
  }
  return Aspect::Top1Retrieval;  // unreachable for valid enum values
}

std::string_view to_string(Role r);
std::string_view to_string(Aspect a);
std::string_view to_string(Scenario s);

std::optional<Role> role_from_string(std::string_view s);
std::optional<Aspect> aspect_from_string(std::string_view s);
std::optional<Scenario> scenario_from_string(std::string_view s);

}  // namespace summrag
