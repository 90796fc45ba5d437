// JSON view of selector configurations, shared by the benchmark and the
// service so that both report exactly the parameters a run used.
#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "flatsel/selectors.hpp"

namespace flatsel {

// Only the block of the chosen selector is emitted.
nlohmann::json selector_config_json(SelectorKind kind, const SelectorConfig& cfg);

// Overwrites fields named in `overrides` (same layout as selector_config_json).
// Unknown keys or wrongly typed values throw std::invalid_argument.
void apply_overrides(SelectorConfig& cfg, SelectorKind kind, const nlohmann::json& overrides);

// FNV-1a over the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace flatsel
