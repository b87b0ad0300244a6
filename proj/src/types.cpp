#include "summrag/types.hpp"

#include "summrag/errors.hpp"

namespace summrag {

std::string_view to_string(Role r) {
  return r == Role::user ? "user" : "assistant";
}

std::string_view to_string(Aspect a) {
  switch (a) {
    case Aspect::Top1Retrieval:
      return "top1_retrieval";
    case Aspect::DirectUserText:
      return "direct_user_text";
    case Aspect::CombinedUserAndRetrieval:
      return "combined_user_and_retrieval";
    case Aspect::TopK:
      return "top_k";
  }
  return "top1_retrieval";
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::S1:
      return "S1";
    case Scenario::S2:
      return "S2";
    case Scenario::S3:
      return "S3";
    case Scenario::S4:
      return "S4";
    case Scenario::S5:
      return "S5";
    case Scenario::S6:
      return "S6";
    case Scenario::S7:
      return "S7";
  }
  return "S1";
}

std::optional<Role> role_from_string(std::string_view s) {
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  return std::nullopt;
}

std::optional<Aspect> aspect_from_string(std::string_view s) {
  if (s == "top1_retrieval") return Aspect::Top1Retrieval;
  if (s == "direct_user_text") return Aspect::DirectUserText;
  if (s == "combined_user_and_retrieval") return Aspect::CombinedUserAndRetrieval;
  if (s == "top_k") return Aspect::TopK;
  return std::nullopt;
}

std::optional<Scenario> scenario_from_string(std::string_view s) {
  for (Scenario sc : kAllScenarios) {
    if (to_string(sc) == s) return sc;
  }
  return std::nullopt;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e) != nullptr) return 4;
  if (dynamic_cast<const ClassificationError*>(&e) != nullptr) return 4;
  if (dynamic_cast<const BackendError*>(&e) != nullptr) return 3;
  if (dynamic_cast<const PreconditionError*>(&e) != nullptr) return 2;
  return 1;
}

}  // namespace summrag
