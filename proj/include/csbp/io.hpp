#pragma once

#include "csbp/mechanism.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace csbp {

inline constexpr const char* tool_version = "1.0.0";

// Mechanism specs: {"sigma2", "gamma", "kappa", "compensation", "levy": {"kind", ...}}.
// Missing numbers default to 0, compensation to "unit", levy to {"kind": "zero"}.
// Throws SchemaError on unknown fields, wrong types or invalid mechanisms.
BranchingMechanism mechanism_from_json(const nlohmann::json& doc);
BranchingMechanism parse_mechanism(std::string_view text);
BranchingMechanism load_mechanism(const std::string& path);

// Throws SchemaError for densities built from an opaque function.
nlohmann::ordered_json mechanism_to_json(const BranchingMechanism& m);

// Finite values as numbers, infinities as "inf"/"-inf", NaN as null.
nlohmann::ordered_json json_number(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

} // namespace csbp
