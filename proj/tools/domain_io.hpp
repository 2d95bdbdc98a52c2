#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ustlab/lattice.hpp"

namespace ustlab::cli {

// Malformed input documents or flags; reported with the offending JSON path.
class SchemaError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// "0.0625", "1/16" or "1e-3".
double parse_real(const std::string& text);
// JSON number, or a string accepted by parse_real.
double json_real(const nlohmann::json& v, const std::string& path);
// JSON integer, or a string "p/q"; finite decimals are read exactly.
Rational json_rational(const nlohmann::json& v, const std::string& path);

// Domain document:
//   {"polygon": [[x, y], ...]} or {"rectangle": {"width": W, "height": H}},
//   "delta": number or "p/q",
//   "corner_margin": number (optional, in units of delta),
//   "marks": [{"x": .., "y": .., "role": "in" | "out" | "plain" | "visit"}],
//   "conductance": {"horizontal": c, "vertical": c,
//                   "overrides": [{"from": [i, j], "to": [i, j], "value": c}]}
// Unknown keys are rejected. delta may be left out when delta_override is set.
DomainSpec domain_from_json(const nlohmann::json& doc, std::optional<double> delta_override = std::nullopt);
nlohmann::json domain_to_json(const DomainSpec& spec);

// A JSON file path, or the shorthand "rect:W,H" for an unmarked rectangle.
DomainSpec load_domain(const std::string& source, std::optional<double> delta_override = std::nullopt);

// "x,y,role"
MarkedPoint parse_mark(const std::string& text);

}  // namespace ustlab::cli
