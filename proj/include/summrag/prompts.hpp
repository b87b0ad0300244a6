#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace summrag::prompts {

// Version stamp recorded in dialogue metadata and evaluation reports so runs
// can be tied to the prompt text they used.
inline constexpr std::string_view kLibraryVersion = "prompts/v1";

// Raw prompt text by id. Throws PreconditionError for unknown ids.
// Placeholders use {name} syntax; payload slots are wrapped in ### so both
// models and the offline synthesizer can locate them unambiguously.
const std::string& text(std::string_view id);

// text(id) with {name} -> value substitution. Unknown placeholders are left
// in place (prompts legitimately contain literal braces in JSON examples).
std::string render(std::string_view id, const std::map<std::string, std::string>& vars);

// Every id the library knows, sorted. Mostly for tests and docs.
std::vector<std::string_view> ids();

}  // namespace summrag::prompts
