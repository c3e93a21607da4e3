#pragma once

// JSON encodings of groups, elements, algebra elements and states.
//
// Group:    {"family":"free_abelian","rank":2}
//           {"family":"product_z_finite","finite":{"order":k,"table":[[...],...]}}
//           {"family":"product_z_finite","finite":{"builtin":"Z2"|"Z3"|"S3"|"Z<k>"}}
//           {"family":"infinite_dihedral"}
//           optional "generators": [element, ...]
// Element:  free_abelian -> [m_1, ..., m_n] (a bare integer when n = 1)
//           product_z_finite -> [m, f]; infinite_dihedral -> [m, s]
// Algebra:  [{"element": e, "re": x, "im": y}, ...]
// State:    {"kind":"trace"} | {"kind":"one"} | {"kind":"character","z":[{"re":..,"im":..}]}
//           | {"kind":"vector","support":[...]} | {"kind":"density","b":[...]}
//           | {"kind":"table","entries":[...],"extension":"zero"|"none"}

#include <string>

#include <json.hpp>

#include "qmetric/states.hpp"

namespace qmetric::io {

using nlohmann::json;

/// All parse functions throw ConfigError naming the JSON path of the bad field.
GroupSpec parse_group_spec(const json& j, const std::string& path = "group");
Group parse_group(const json& j, const std::string& path = "group");
GroupElement parse_element(const json& j, const Group& group, const std::string& path);
json element_to_json(const GroupElement& g, const Group& group);
AlgebraElement parse_algebra(const json& j, const Group& group, const std::string& path);
json algebra_to_json(const AlgebraElement& a, const Group& group);
StateRep parse_state(const json& j, const Group& group, const std::string& path = "state");

/// Reads and parses a JSON file; ConfigError when missing or malformed.
json load_json_file(const std::string& file, const std::string& path);

}  // namespace qmetric::io
