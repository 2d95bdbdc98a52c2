#include "domain_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ustlab::cli {

using nlohmann::json;

double parse_real(const std::string& text) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      return v;
    }
    const std::string num = text.substr(0, slash), den = text.substr(slash + 1);
    std::size_t u1 = 0, u2 = 0;
    const double a = std::stod(num, &u1), b = std::stod(den, &u2);
    if (u1 != num.size() || u2 != den.size()) throw std::invalid_argument("trailing characters");
    if (b == 0) throw std::invalid_argument("zero denominator");
    return a / b;
  } catch (const std::exception&) {
    throw SchemaError("not a number: \"" + text + "\"");
  }
}

double json_real(const json& v, const std::string& path) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return parse_real(v.get<std::string>());
    } catch (const SchemaError& e) {
      throw SchemaError(path + ": " + e.what());
    }
  }
  throw SchemaError(path + ": expected a number");
}

Rational json_rational(const json& v, const std::string& path) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (v.is_number_float()) return Rational(v.get<double>());
  if (v.is_string()) {
    try {
      Rational r(v.get<std::string>());
      r.canonicalize();
      if (r.get_den() == 0) throw std::invalid_argument("zero denominator");
      return r;
    } catch (const std::invalid_argument&) {
      throw SchemaError(path + ": not a rational: \"" + v.get<std::string>() + "\"");
    }
  }
  throw SchemaError(path + ": expected a number or a \"p/q\" string");
}

namespace {

void allow_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw SchemaError(path + ": expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, _] : obj.items())
    if (!ok.count(k)) throw SchemaError(path + ": unknown key \"" + k + "\"");
}

Point json_point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw SchemaError(path + ": expected [x, y]");
  return {json_real(v[0], path + "[0]"), json_real(v[1], path + "[1]")};
}

std::pair<long, long> json_lattice(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
    throw SchemaError(path + ": expected integer lattice coordinates [i, j]");
  return {v[0].get<long>(), v[1].get<long>()};
}

}  // namespace

DomainSpec domain_from_json(const json& doc, std::optional<double> delta_override) {
  allow_keys(doc, "$", {"polygon", "rectangle", "delta", "corner_margin", "marks", "conductance"});
  DomainSpec spec;
  if (doc.contains("polygon") == doc.contains("rectangle"))
    throw SchemaError("$: exactly one of \"polygon\" and \"rectangle\" is required");
  if (doc.contains("polygon")) {
    const auto& poly = doc["polygon"];
    if (!poly.is_array() || poly.size() < 4) throw SchemaError("$.polygon: expected at least 4 vertices");
    for (std::size_t i = 0; i < poly.size(); ++i)
      spec.polygon.push_back(json_point(poly[i], "$.polygon[" + std::to_string(i) + "]"));
  } else {
    const auto& r = doc["rectangle"];
    allow_keys(r, "$.rectangle", {"width", "height"});
    if (!r.contains("width") || !r.contains("height")) throw SchemaError("$.rectangle: width and height are required");
    const double w = json_real(r["width"], "$.rectangle.width"), h = json_real(r["height"], "$.rectangle.height");
    if (!(w > 0 && h > 0)) throw SchemaError("$.rectangle: sides must be positive");
    spec.polygon = {{0, 0}, {w, 0}, {w, h}, {0, h}};
  }
  if (delta_override) {
    spec.delta = *delta_override;
  } else {
    if (!doc.contains("delta")) throw SchemaError("$: \"delta\" is required (or pass --delta)");
    spec.delta = json_real(doc["delta"], "$.delta");
  }
  if (!(spec.delta > 0)) throw SchemaError("$.delta: must be positive");
  if (doc.contains("corner_margin")) spec.corner_margin = json_real(doc["corner_margin"], "$.corner_margin");
  if (doc.contains("marks")) {
    const auto& marks = doc["marks"];
    if (!marks.is_array()) throw SchemaError("$.marks: expected an array");
    for (std::size_t i = 0; i < marks.size(); ++i) {
      const std::string path = "$.marks[" + std::to_string(i) + "]";
      allow_keys(marks[i], path, {"x", "y", "role"});
      if (!marks[i].contains("x") || !marks[i].contains("y")) throw SchemaError(path + ": x and y are required");
      MarkedPoint m{{json_real(marks[i]["x"], path + ".x"), json_real(marks[i]["y"], path + ".y")}, MarkRole::plain};
      if (marks[i].contains("role")) {
        if (!marks[i]["role"].is_string()) throw SchemaError(path + ".role: expected a string");
        try {
          m.role = parse_mark_role(marks[i]["role"].get<std::string>());
        } catch (const std::invalid_argument& e) {
          throw SchemaError(path + ".role: " + e.what());
        }
      }
      spec.marks.push_back(m);
    }
  }
  if (doc.contains("conductance")) {
    const auto& c = doc["conductance"];
    allow_keys(c, "$.conductance", {"horizontal", "vertical", "overrides"});
    if (c.contains("horizontal")) spec.conductance.horizontal = json_rational(c["horizontal"], "$.conductance.horizontal");
    if (c.contains("vertical")) spec.conductance.vertical = json_rational(c["vertical"], "$.conductance.vertical");
    if (c.contains("overrides")) {
      if (!c["overrides"].is_array()) throw SchemaError("$.conductance.overrides: expected an array");
      for (std::size_t i = 0; i < c["overrides"].size(); ++i) {
        const auto& o = c["overrides"][i];
        const std::string path = "$.conductance.overrides[" + std::to_string(i) + "]";
        allow_keys(o, path, {"from", "to", "value"});
        if (!o.contains("from") || !o.contains("to") || !o.contains("value"))
          throw SchemaError(path + ": from, to and value are required");
        auto a = json_lattice(o["from"], path + ".from"), b = json_lattice(o["to"], path + ".to");
        if (std::abs(a.first - b.first) + std::abs(a.second - b.second) != 1)
          throw SchemaError(path + ": endpoints must be lattice neighbours");
        if (b < a) std::swap(a, b);
        spec.conductance.overrides[{a, b}] = json_rational(o["value"], path + ".value");
      }
    }
    auto positive = [](const Rational& r) { return r > 0; };
    bool ok = positive(spec.conductance.horizontal) && positive(spec.conductance.vertical);
    for (const auto& [_, v] : spec.conductance.overrides) ok = ok && positive(v);
    if (!ok) throw SchemaError("$.conductance: conductances must be positive");
  }
  return spec;
}

json domain_to_json(const DomainSpec& spec) {
  json poly = json::array();
  for (Point p : spec.polygon) poly.push_back({p.x, p.y});
  json marks = json::array();
  for (const auto& m : spec.marks) marks.push_back({{"x", m.p.x}, {"y", m.p.y}, {"role", to_string(m.role)}});
  json doc{{"polygon", poly}, {"delta", spec.delta}, {"corner_margin", spec.corner_margin}, {"marks", marks}};
  if (!spec.conductance.is_unit()) {
    json overrides = json::array();
    for (const auto& [k, v] : spec.conductance.overrides)
      overrides.push_back({{"from", {k.first.first, k.first.second}},
                           {"to", {k.second.first, k.second.second}},
                           {"value", v.get_str()}});
    doc["conductance"] = {{"horizontal", spec.conductance.horizontal.get_str()},
                          {"vertical", spec.conductance.vertical.get_str()},
                          {"overrides", overrides}};
  }
  return doc;
}

DomainSpec load_domain(const std::string& source, std::optional<double> delta_override) {
  if (source.rfind("rect:", 0) == 0) {
    std::stringstream ss(source.substr(5));
    std::string w, h;
    if (!std::getline(ss, w, ',') || !std::getline(ss, h) || w.empty() || h.empty())
      throw SchemaError("--domain: expected rect:W,H");
    json doc{{"rectangle", {{"width", parse_real(w)}, {"height", parse_real(h)}}}};
    if (!delta_override) throw SchemaError("--domain rect:W,H needs --delta");
    return domain_from_json(doc, delta_override);
  }
  std::ifstream in(source);
  if (!in) throw SchemaError("--domain: cannot open " + source);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(source + ": " + e.what());
  }
  return domain_from_json(doc, delta_override);
}

MarkedPoint parse_mark(const std::string& text) {
  std::stringstream ss(text);
  std::string x, y, role;
  if (!std::getline(ss, x, ',') || !std::getline(ss, y, ',')) throw SchemaError("--mark: expected x,y[,role]");
  std::getline(ss, role);
  MarkedPoint m{{parse_real(x), parse_real(y)}, MarkRole::plain};
  if (!role.empty()) {
    try {
      m.role = parse_mark_role(role);
    } catch (const std::invalid_argument& e) {
      throw SchemaError(std::string("--mark: ") + e.what());
    }
  }
  return m;
}

}  // namespace ustlab::cli
