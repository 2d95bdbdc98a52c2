#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "domain_io.hpp"
#include "svg.hpp"
#include "ustlab/checks.hpp"
#include "ustlab/combinatorics.hpp"
#include "ustlab/conformal.hpp"
#include "ustlab/continuum.hpp"
#include "ustlab/exact.hpp"
#include "ustlab/lattice.hpp"
#include "ustlab/montecarlo.hpp"

namespace ustlab::cli {

using nlohmann::json;

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Names the module a guard violation comes from.
struct Context {
  std::string module = "cli";
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json rational_json(const Rational& r) {
  if (r.get_den() == 1 && r.get_num().fits_slong_p()) return r.get_num().get_si();
  return r.get_str();
}

json matrix_json(const Matrix<Rational>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(rational_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

// double values go in as numbers; rationals additionally keep their exact form
void put(json& j, const std::string& key, double v) { j[key] = v; }
void put(json& j, const std::string& key, const Rational& v) {
  j[key] = v.get_d();
  j[key + "_exact"] = v.get_str();
}
double as_double(double v) { return v; }
double as_double(const Rational& v) { return v.get_d(); }

json backend_metadata(Backend b) {
  if (b == Backend::rational) return {{"backend", "rational"}, {"tolerance", 0.0}, {"tolerance_kind", "exact"}};
  return {{"backend", "floating"},
          {"tolerance", kSolverTolerance},
          {"tolerance_kind", "relative residual of the harmonic solves"}};
}

json continuum_metadata(Backend b) {
  return {{"backend", to_string(b)},
          {"tolerance", std::numeric_limits<double>::epsilon()},
          {"tolerance_kind", b == Backend::rational ? "final rounding to double only"
                                                    : "unit roundoff per operation, no error bound"}};
}

json envelope(const RunConfig& cfg, json config, json metadata, json results) {
  return {{"schema", kSchemaName}, {"schema_version", kSchemaVersion}, {"command", cfg.command},
          {"config", std::move(config)}, {"metadata", std::move(metadata)}, {"results", std::move(results)}};
}

class Csv {
 public:
  Csv(const RunConfig& cfg, const std::string& metadata, const std::vector<std::string>& header) {
    s_ << "# " << kSchemaName << ' ' << kSchemaVersion << " command=" << cfg.command << ' ' << metadata << '\n';
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s_ << ',';
      if (cells[i].find_first_of(",\"") != std::string::npos) {
        s_ << '"';
        for (char c : cells[i]) s_ << (c == '"' ? "\"\"" : std::string(1, c));
        s_ << '"';
      } else {
        s_ << cells[i];
      }
    }
    s_ << '\n';
  }
  std::string str() const { return s_.str(); }

 private:
  std::ostringstream s_;
};

std::string meta_line(const json& m) {
  std::string s;
  for (const auto& [k, v] : m.items()) {
    if (!s.empty()) s += ' ';
    s += k + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
  }
  return s;
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out, std::ostream& err) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw UsageError("cannot write " + cfg.out);
  f << text;
  err << "wrote " << cfg.out << '\n';
}

void emit_json(const RunConfig& cfg, const json& doc, std::ostream& out, std::ostream& err) {
  emit(cfg, doc.dump(2) + "\n", out, err);
}

DyckPath parse_pattern(const std::string& text) {
  try {
    return text.front() == '{' ? DyckPath::from_links_string(text) : DyckPath::from_string(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError("--pattern: " + std::string(e.what()));
  }
}

VisitOrder parse_omega(const std::string& text) {
  try {
    return parse_visit_order(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError("--omega: " + std::string(e.what()));
  }
}

std::optional<double> delta_override(const RunConfig& cfg) {
  if (!cfg.delta) return std::nullopt;
  const double d = parse_real(*cfg.delta);
  if (!(d > 0)) throw UsageError("--delta must be positive");
  return d;
}

DomainSpec load_spec(const RunConfig& cfg) {
  if (cfg.domain.empty()) throw UsageError("--domain is required");
  auto spec = load_domain(cfg.domain, delta_override(cfg));
  for (const auto& m : cfg.marks) spec.marks.push_back(parse_mark(m));
  return spec;
}

GridModel make_grid(const DomainSpec& spec, Context& ctx) {
  ctx.module = "lattice";
  auto g = build_grid(spec);
  ctx.module = "cli";
  return g;
}

Backend pick_backend(const std::string& name, const GridModel& g) {
  if (name == "rational") return Backend::rational;
  if (name == "floating") return Backend::floating;
  return g.interior_count() <= kExactSolveLimit ? Backend::rational : Backend::floating;
}

bool has_role(const GridModel& g, MarkRole r) {
  return std::any_of(g.marks().begin(), g.marks().end(), [r](const Mark& m) { return m.role == r; });
}

// Marked edges in the order listed, which must run counterclockwise.
std::vector<int> connectivity_edges(const GridModel& g) {
  std::vector<int> e;
  for (const auto& m : g.marks()) {
    if (m.role == MarkRole::visit) throw UsageError("visit marks need the visit command");
    e.push_back(m.first);
  }
  if (e.empty() || e.size() % 2) throw UsageError("connectivity needs a positive even number of marks");
  int wraps = 0;
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e[i] == e[i - 1]) throw UsageError("two marks snap to the same boundary edge");
    wraps += e[i] < e[i - 1];
  }
  if (wraps > 1 || (wraps == 1 && e.back() >= e.front()))
    throw UsageError("marks must be listed counterclockwise along the boundary");
  return e;
}

std::vector<DyckPath> patterns_for(const RunConfig& cfg, int n) {
  if (cfg.pattern.empty()) {
    if (n > kMaxMatrixSize) throw UsageError("at most " + std::to_string(2 * kMaxMatrixSize) + " marks");
    return enumerate_dyck_paths(n);
  }
  auto a = parse_pattern(cfg.pattern);
  if (a.size() != n)
    throw UsageError("--pattern has " + std::to_string(a.length()) + " endpoints but there are " +
                     std::to_string(2 * n) + " marks");
  return {a};
}

json marks_json(const GridModel& g, const std::vector<int>& edges) {
  json arr = json::array();
  for (std::size_t l = 0; l < edges.size(); ++l) {
    const Point p = g.boundary_point(edges[l]);
    arr.push_back({{"label", l + 1}, {"boundary_edge", edges[l]}, {"point", {p.x, p.y}}});
  }
  return arr;
}

json domain_config(const RunConfig& cfg, const DomainSpec& spec) {
  return {{"domain", cfg.domain}, {"delta", spec.delta}, {"resolved_domain", domain_to_json(spec)}};
}

template <class T>
json kernel_json(const KernelMatrix<T>& k) {
  json rows = json::array();
  for (std::size_t i = 0; i < k.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < k.size(); ++j) row.push_back(as_double(k.values(i, j)));
    rows.push_back(row);
  }
  return rows;
}

template <class T>
json fomin_json(const InverseFominSum<T>& s) {
  json r{{"pattern", s.alpha.to_string()}, {"links", s.alpha.links_string()}};
  put(r, "value", s.value);
  json contribs = json::array();
  for (const auto& c : s.contributions) {
    json j{{"beta", c.beta.to_string()}, {"coefficient", rational_json(c.coefficient)}};
    put(j, "determinant", c.determinant);
    contribs.push_back(j);
  }
  r["contributions"] = contribs;
  return r;
}

void require_format(const RunConfig& cfg, std::initializer_list<const char*> ok) {
  for (const char* f : ok)
    if (cfg.format == f) return;
  throw UsageError("--format " + cfg.format + " is not available for " + cfg.command);
}

// ---------------------------------------------------------------------------

int cmd_combinat(const RunConfig& cfg, Context& ctx, std::ostream& out, std::ostream& err) {
  require_format(cfg, {"json", "csv"});
  if (cfg.n < 1 || cfg.n > kMaxMatrixSize)
    throw UsageError("--n must lie in 1.." + std::to_string(kMaxMatrixSize));
  ctx.module = "combinatorics";
  const auto mats = unit_incidence(cfg.n);
  const auto& order = mats->m.order;
  if (cfg.format == "csv") {
    Csv csv(cfg, "backend=rational tolerance=0", {"matrix", "row", "col", "value"});
    for (const auto* m : {&mats->m, &mats->minv})
      for (std::size_t i = 0; i < order.size(); ++i)
        for (std::size_t j = 0; j < order.size(); ++j)
          csv.row({m == &mats->m ? "M" : "Minv", order[i].to_string(), order[j].to_string(),
                   m->entries(i, j).get_str()});
    emit(cfg, csv.str(), out, err);
    return kExitOk;
  }
  json names = json::array();
  for (const auto& d : order) names.push_back(d.to_string());
  json results{{"n", cfg.n}, {"order", names}, {"M", matrix_json(mats->m.entries)},
               {"Minv", matrix_json(mats->minv.entries)}};
  if (cfg.n <= 4) {
    json tilings = json::array();
    for (std::size_t i = 0; i < order.size(); ++i)
      for (std::size_t j = 0; j < order.size(); ++j) {
        if (mats->minv.entries(i, j) == 0) continue;
        json list = json::array();
        for (const auto& t : cover_inclusive_tilings(order[i], order[j])) list.push_back(t.to_string());
        tilings.push_back({{"lower", order[i].to_string()}, {"upper", order[j].to_string()},
                           {"count", list.size()}, {"tilings", list}});
      }
    results["tilings"] = tilings;
  }
  emit_json(cfg, envelope(cfg, {{"n", cfg.n}}, {{"backend", "rational"}, {"tolerance", 0.0}}, results), out, err);
  return kExitOk;
}

int cmd_exact(const RunConfig& cfg, Context& ctx, std::ostream& out, std::ostream& err) {
  require_format(cfg, {"json", "csv"});
  const auto spec = load_spec(cfg);
  const auto g = make_grid(spec, ctx);
  const auto edges = connectivity_edges(g);
  const int n = static_cast<int>(edges.size() / 2);
  const auto pats = patterns_for(cfg, n);
  const Backend b = pick_backend(cfg.backend, g);
  ctx.module = "exact";
  if (cfg.format == "csv" && cfg.kernel) {
    ctx.module = "lattice";
    const auto k = excursion_kernel(g, edges);
    emit(cfg, "# " + std::string(kSchemaName) + ' ' + kSchemaVersion + " command=exact " +
                  meta_line(backend_metadata(Backend::floating)) + "\n" + kernel_csv(k),
         out, err);
    return kExitOk;
  }
  json records = json::array(), kernel;
  auto run_all = [&](const auto& k) {
    kernel = kernel_json(k);
    for (const auto& a : pats) records.push_back(fomin_json(connectivity_probability(a, k)));
  };
  if (b == Backend::rational)
    run_all(excursion_kernel_rational(g, edges));
  else
    run_all(excursion_kernel(g, edges));
  if (cfg.format == "csv") {
    Csv csv(cfg, meta_line(backend_metadata(b)), {"pattern", "value", "exact"});
    for (const auto& r : records) csv.row({r["pattern"], num(r["value"]), r.value("value_exact", "")});
    emit(cfg, csv.str(), out, err);
    return kExitOk;
  }
  json results{{"interior_vertices", g.interior_count()}, {"marks", marks_json(g, edges)}, {"kernel", kernel},
               {"patterns", records}};
  emit_json(cfg, envelope(cfg, domain_config(cfg, spec), backend_metadata(b), results), out, err);
  return kExitOk;
}

template <class T>
json visit_json(const VisitProbability<T>& p) {
  json r;
  put(r, "direct", p.direct);
  put(r, "replacing", p.replacing);
  put(r, "conditioning", p.conditioning);
  put(r, "replaced_amplitude", p.replaced_amplitude);
  return r;
}

int cmd_visit(const RunConfig& cfg, Context& ctx, std::ostream& out, std::ostream& err) {
  require_format(cfg, {"json", "csv"});
  const auto spec = load_spec(cfg);
  const auto g = make_grid(spec, ctx);
  std::optional<VisitOrder> w;
  if (!cfg.omega.empty()) w = parse_omega(cfg.omega);
  ctx.module = "exact";
  const auto st = visit_setup(g, w);
  const Backend b = pick_backend(cfg.backend, g);
  json r;
  bool agree = false;
  if (b == Backend::rational) {
    const auto p = boundary_visit_probability_rational(g, st);
    r = visit_json(p);
    agree = p.direct == p.replacing;
  } else {
    const auto p = boundary_visit_probability(g, st);
    r = visit_json(p);
    agree = std::abs(p.direct - p.replacing) <= 1e-9 * std::abs(p.direct);
  }
  r["direct_equals_replacing"] = agree;
  if (cfg.format == "csv") {
    Csv csv(cfg, meta_line(backend_metadata(b)), {"omega", "direct", "replacing", "conditioning"});
    csv.row({visit_order_string(st.omega), num(r["direct"]), num(r["replacing"]), num(r["conditioning"])});
    emit(cfg, csv.str(), out, err);
    return kExitOk;
  }
  json pairs = json::array();
  for (auto [k1, k2] : st.visit_pairs) pairs.push_back({k1, k2});
  r["omega"] = visit_order_string(st.omega);
  r["alpha"] = st.encoding.alpha.to_string();
  r["in_edge"] = st.in_edge;
  r["out_edge"] = st.out_edge;
  r["visit_pairs"] = pairs;
  r["labels"] = marks_json(g, st.edges);
  emit_json(cfg, envelope(cfg, domain_config(cfg, spec), backend_metadata(b), r), out, err);
  return kExitOk;
}

json estimate_json(const Estimate& e, double exact) {
  const double z = e.std_error > 0 ? (e.p_hat - exact) / e.std_error : (e.p_hat == exact ? 0 : INFINITY);
  return {{"event", e.event},   {"samples", e.n},          {"hits", e.hits},
          {"p_hat", e.p_hat},   {"std_error", e.std_error}, {"exact", exact},
          {"z_score", z},       {"within_4se", std::abs(z) <= 4}, {"seed", e.seed}};
}

int cmd_sample(const RunConfig& cfg, Context& ctx, std::ostream& out, std::ostream& err) {
  require_format(cfg, {"json", "csv"});
  if (cfg.samples == 0) throw UsageError("--samples must be positive");
  const auto spec = load_spec(cfg);
  const auto g = make_grid(spec, ctx);
  const int workers = cfg.workers > 0 ? cfg.workers : default_workers();
  const Backend b = pick_backend(cfg.backend, g);
  json records = json::array();
  if (has_role(g, MarkRole::visit)) {
    std::optional<VisitOrder> w;
    if (!cfg.omega.empty()) w = parse_omega(cfg.omega);
    ctx.module = "exact";
    const auto st = visit_setup(g, w);
    const double exact = b == Backend::rational ? boundary_visit_probability_rational(g, st).direct.get_d()
                                                : boundary_visit_probability(g, st).direct;
    ctx.module = "montecarlo";
    const auto e = estimate(g, VisitEvent{st.in_edge, st.out_edge, st.visit_pairs}, cfg.samples, cfg.seed, workers);
    records.push_back(estimate_json(e, exact));
    records.back()["omega"] = visit_order_string(st.omega);
  } else {
    const auto edges = connectivity_edges(g);
    const auto pats = patterns_for(cfg, static_cast<int>(edges.size() / 2));
    ctx.module = "exact";
    std::vector<double> exact;
    if (b == Backend::rational) {
      const auto k = excursion_kernel_rational(g, edges);
      for (const auto& a : pats) exact.push_back(connectivity_probability(a, k).value.get_d());
    } else {
      const auto k = excursion_kernel(g, edges);
      for (const auto& a : pats) exact.push_back(connectivity_probability(a, k).value);
    }
    ctx.module = "montecarlo";
    for (std::size_t i = 0; i < pats.size(); ++i) {
      const auto e = estimate(g, ConnectivityEvent{OrientedLinkPattern::left_to_right_of(pats[i]), edges},
                              cfg.samples, cfg.seed, workers);
      records.push_back(estimate_json(e, exact[i]));
      records.back()["pattern"] = pats[i].to_string();
    }
  }
  json meta{{"backend", "monte-carlo"},
            {"exact_backend", to_string(b)},
            {"tolerance", 4.0},
            {"tolerance_kind", "|p_hat - exact| in standard errors"},
            {"workers", workers}};
  if (cfg.format == "csv") {
    Csv csv(cfg, meta_line(meta), {"event", "samples", "hits", "p_hat", "std_error", "exact", "z_score"});
    for (const auto& r : records)
      csv.row({r["event"], std::to_string(r["samples"].get<std::uint64_t>()),
               std::to_string(r["hits"].get<std::uint64_t>()), num(r["p_hat"]), num(r["std_error"]),
               num(r["exact"]), num(r["z_score"])});
    emit(cfg, csv.str(), out, err);
    return kExitOk;
  }
  json config = domain_config(cfg, spec);
  config["samples"] = cfg.samples;
  config["seed"] = cfg.seed;
  emit_json(cfg, envelope(cfg, config, meta, {{"estimates", records}}), out, err);
  return kExitOk;
}

int cmd_continuum(const RunConfig& cfg, Context& ctx, std::ostream& out, std::ostream& err) {
  require_format(cfg, {"json", "csv"});
  if (cfg.pattern.empty() == cfg.omega.empty()) throw UsageError("give exactly one of --pattern and --omega");
  if (cfg.backend == "rational" && cfg.pattern.empty())
    throw UsageError("the rational backend applies to --pattern only");
  const Backend b = cfg.backend == "rational" ? Backend::rational : Backend::floating;
  ctx.module = "continuum";
  json r{{"points", cfg.points}};
  if (!cfg.pattern.empty()) {
    const auto a = parse_pattern(cfg.pattern);
    if (static_cast<int>(cfg.points.size()) != a.length())
      throw UsageError("--points needs " + std::to_string(a.length()) + " values for " + a.to_string());
    r["pattern"] = a.to_string();
    r["value"] = pure_partition_function(a, cfg.points, b);
  } else {
    const auto w = parse_omega(cfg.omega);
    if (cfg.points.size() != w.size() + 2)
      throw UsageError("--points needs x_in, the " + std::to_string(w.size()) + " visit points, x_out");
    const VisitConfig c{cfg.points.front(), {cfg.points.begin() + 1, cfg.points.end() - 1}, cfg.points.back()};
    r["omega"] = visit_order_string(w);
    r["value"] = zeta_omega(w, c, {}, b);
  }
  if (cfg.format == "csv") {
    Csv csv(cfg, meta_line(continuum_metadata(b)), {"function", "value"});
    csv.row({r.value("pattern", "zeta" + r.value("omega", "")), num(r["value"])});
    emit(cfg, csv.str(), out, err);
    return kExitOk;
  }
  emit_json(cfg, envelope(cfg, {{"points", cfg.points}}, continuum_metadata(b), r), out, err);
  return kExitOk;
}

json sample_json(const CheckSample& s) {
  return {{"label", s.label}, {"x", s.x},     {"xhat", s.xhat},     {"index", s.index},
          {"h", s.h},         {"value", s.value}, {"expected", s.expected}, {"error", s.error}, {"pass", s.pass}};
}

int cmd_check(const RunConfig& cfg, Context& ctx, std::ostream& out, std::ostream& err) {
  require_format(cfg, {"json", "csv"});
  const bool all = !(cfg.pde2 || cfg.pde3 || cfg.covariance || cfg.asy2 || cfg.asymptotics);
  auto configs = [&](int fallback) { return cfg.configs > 0 ? cfg.configs : fallback; };
  ctx.module = "continuum";
  std::vector<CheckReport> reports;
  if (all || cfg.pde2) {
    reports.push_back(check_pde2(cfg.n, configs(100), cfg.seed));
    reports.push_back(check_pde2_decay(cfg.n, configs(20), cfg.seed));
  }
  if (all || cfg.pde3) reports.push_back(check_zeta_pde(cfg.nprime, configs(20), cfg.seed));
  if (all || cfg.covariance) reports.push_back(check_covariance(cfg.n, configs(100), cfg.seed));
  if (all || cfg.asy2) reports.push_back(check_asy2(cfg.n, configs(20), cfg.seed));
  if (all || cfg.asymptotics) reports.push_back(check_visit_asymptotics(cfg.nprime, configs(3), cfg.seed));
  const bool pass = std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.pass; });
  const json meta{{"backend", "floating"}, {"tolerance_kind", "per check threshold"}};
  if (cfg.format == "csv") {
    Csv csv(cfg, meta_line(meta),
            {"check", "label", "index", "h", "value", "expected", "error", "threshold", "pass", "x", "xhat"});
    auto join = [](const std::vector<double>& v) {
      std::string s;
      for (double x : v) s += (s.empty() ? "" : ";") + num(x);
      return s;
    };
    for (const auto& r : reports)
      for (const auto& s : r.samples)
        csv.row({r.name, s.label, std::to_string(s.index), num(s.h), num(s.value), num(s.expected), num(s.error),
                 num(r.threshold), s.pass ? "1" : "0", join(s.x), join(s.xhat)});
    emit(cfg, csv.str(), out, err);
  } else {
    json arr = json::array();
    for (const auto& r : reports) {
      json failures = json::array();
      const CheckSample* worst = nullptr;
      for (const auto& s : r.samples) {
        if (!s.pass && failures.size() < 50) failures.push_back(sample_json(s));
        if (!worst || s.error > worst->error) worst = &s;
      }
      arr.push_back({{"check", r.name},
                     {"criterion", r.criterion},
                     {"threshold", r.threshold},
                     {"worst", r.worst},
                     {"count", r.samples.size()},
                     {"pass", r.pass},
                     {"worst_sample", worst ? sample_json(*worst) : json()},
                     {"failures", failures}});
    }
    json config{{"n", cfg.n}, {"nprime", cfg.nprime}, {"seed", cfg.seed}, {"configs", cfg.configs}};
    emit_json(cfg, envelope(cfg, config, meta, {{"checks", arr}, {"pass", pass}}), out, err);
  }
  for (const auto& r : reports)
    err << (r.pass ? "PASS " : "FAIL ") << r.name << " worst=" << num(r.worst) << " threshold=" << num(r.threshold)
        << " (" << r.samples.size() << " samples)\n";
  return pass ? kExitOk : kExitCheckFailed;
}

// [0, W] x [0, H] polygons only.
ConformalMap rectangle_map(const DomainSpec& spec) {
  if (spec.polygon.size() != 4) throw UsageError("converge needs a rectangle domain");
  double w = 0, h = 0;
  for (Point p : spec.polygon) w = std::max(w, p.x), h = std::max(h, p.y);
  for (Point p : spec.polygon)
    if ((p.x != 0 && p.x != w) || (p.y != 0 && p.y != h))
      throw UsageError("converge needs the rectangle [0, W] x [0, H]");
  return ConformalMap(w, h, 1e-9);
}

int cmd_converge(const RunConfig& cfg, Context& ctx, std::ostream& out, std::ostream& err) {
  require_format(cfg, {"json", "csv"});
  if (cfg.deltas.empty()) throw UsageError("--deltas is empty");
  if (cfg.delta) throw UsageError("converge takes --deltas, not --delta");
  auto base = load_domain(cfg.domain.empty() ? throw UsageError("--domain is required") : cfg.domain,
                          parse_real(cfg.deltas.front()));
  for (const auto& m : cfg.marks) base.marks.push_back(parse_mark(m));
  ctx.module = "conformal";
  const auto map = rectangle_map(base);
  const bool visits = std::any_of(base.marks.begin(), base.marks.end(),
                                  [](const MarkedPoint& m) { return m.role == MarkRole::visit; });
  struct Row {
    std::string label;
    double delta, discrete, prediction, deviation;
  };
  std::vector<Row> rows;
  std::vector<std::string> labels;
  for (const auto& dtext : cfg.deltas) {
    auto spec = base;
    spec.delta = parse_real(dtext);
    const auto g = make_grid(spec, ctx);
    const double d = spec.delta;
    auto add = [&](const std::string& label, double disc, double pred) {
      if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
      rows.push_back({label, d, disc, pred, std::abs(disc / pred - 1)});
    };
    if (visits) {
      std::optional<VisitOrder> w;
      if (!cfg.omega.empty()) w = parse_omega(cfg.omega);
      ctx.module = "exact";
      const auto st = visit_setup(g, w);
      const double p = boundary_visit_probability(g, st).direct;
      const int np = static_cast<int>(st.omega.size());
      std::vector<Point> pts;
      for (auto [k1, k2] : st.visit_pairs) {
        const Point a = g.boundary_point(k1), b = g.boundary_point(k2);
        pts.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
      }
      ctx.module = "conformal";
      const double pred =
          visit_scaling_limit(map, st.omega, g.boundary_point(st.in_edge), pts, g.boundary_point(st.out_edge));
      add("zeta" + visit_order_string(st.omega), p * std::pow(d, -3.0 * np), pred);
    } else {
      const auto edges = connectivity_edges(g);
      const int n = static_cast<int>(edges.size() / 2);
      const auto pats = patterns_for(cfg, n);
      ctx.module = "exact";
      const auto k = excursion_kernel(g, edges);
      std::vector<Point> pts;
      for (int e : edges) pts.push_back(g.boundary_point(e));
      std::vector<double> disc, pred;
      for (const auto& a : pats) {
        disc.push_back(connectivity_probability(a, k).value * std::pow(d, -2.0 * n));
        ctx.module = "conformal";
        pred.push_back(partition_scaling_limit(map, a, pts));
        ctx.module = "exact";
        add(a.to_string(), disc.back(), pred.back());
      }
      for (std::size_t i = 1; i < pats.size(); ++i)
        add("ratio:" + pats[i].to_string() + "/" + pats[0].to_string(), disc[i] / disc[0], pred[i] / pred[0]);
    }
  }
  json summary = json::array();
  for (const auto& label : labels) {
    std::vector<double> dev;
    for (const auto& r : rows)
      if (r.label == label) dev.push_back(r.deviation);
    bool monotone = true;
    for (std::size_t i = 1; i < dev.size(); ++i) monotone = monotone && dev[i] < dev[i - 1];
    summary.push_back({{"label", label}, {"deviations", dev}, {"monotone_decrease", monotone},
                       {"final_deviation", dev.back()}});
  }
  const json meta{{"backend", "floating"},
                  {"tolerance", kSolverTolerance},
                  {"tolerance_kind", "relative residual of the harmonic solves"}};
  if (cfg.format == "csv") {
    Csv csv(cfg, meta_line(meta), {"label", "delta", "discrete", "prediction", "deviation"});
    for (const auto& r : rows) csv.row({r.label, num(r.delta), num(r.discrete), num(r.prediction), num(r.deviation)});
    emit(cfg, csv.str(), out, err);
    return kExitOk;
  }
  json rarr = json::array();
  for (const auto& r : rows)
    rarr.push_back({{"label", r.label}, {"delta", r.delta}, {"discrete", r.discrete}, {"prediction", r.prediction},
                    {"deviation", r.deviation}});
  json config{{"domain", cfg.domain}, {"deltas", cfg.deltas}, {"resolved_domain", domain_to_json(base)}};
  emit_json(cfg, envelope(cfg, config, meta, {{"rows", rarr}, {"summary", summary}}), out, err);
  return kExitOk;
}

int cmd_figure(const RunConfig& cfg, Context& ctx, std::ostream& out, std::ostream& err) {
  require_format(cfg, {"svg"});
  if (cfg.kind == "tiling") {
    if (cfg.pattern.empty()) throw UsageError("--kind tiling needs --pattern (the lower path)");
    const auto a = parse_pattern(cfg.pattern);
    DyckPath b;
    if (cfg.upper.empty()) {
      std::string rainbow(static_cast<std::size_t>(a.size()), '(');
      rainbow += std::string(static_cast<std::size_t>(a.size()), ')');
      b = DyckPath::from_string(rainbow);
    } else {
      b = parse_pattern(cfg.upper);
    }
    ctx.module = "combinatorics";
    emit(cfg, tilings_svg(cover_inclusive_tilings(a, b)), out, err);
    return kExitOk;
  }
  if (cfg.kind != "tree" && cfg.kind != "branches") throw UsageError("--kind must be tree, branches or tiling");
  const auto spec = load_spec(cfg);
  const auto g = make_grid(spec, ctx);
  std::vector<int> starts;
  for (const auto& m : g.marks())
    if (m.role != MarkRole::visit) starts.push_back(g.boundary_edges()[static_cast<std::size_t>(m.first)].inner);
  ctx.module = "montecarlo";
  RngStream rng(cfg.seed, 0);
  const auto t = wilson_sample(g, rng, starts, cfg.kind == "branches");
  std::vector<std::vector<int>> branches;
  for (int v : starts) branches.push_back(tree_branch(g, t, v));
  emit(cfg, tree_svg(spec, g, cfg.kind == "tree" ? &t : nullptr, branches), out, err);
  return kExitOk;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  RunConfig cfg = config;
  if (cfg.format.empty()) cfg.format = cfg.command == "figure" ? "svg" : "json";
  Context ctx;
  try {
    if (cfg.backend != "auto" && cfg.backend != "rational" && cfg.backend != "floating")
      throw UsageError("--backend must be auto, rational or floating");
    if (cfg.workers < 0) throw UsageError("--workers must be positive");
    if (cfg.command == "combinat") return cmd_combinat(cfg, ctx, out, err);
    if (cfg.command == "exact") return cmd_exact(cfg, ctx, out, err);
    if (cfg.command == "visit") return cmd_visit(cfg, ctx, out, err);
    if (cfg.command == "sample") return cmd_sample(cfg, ctx, out, err);
    if (cfg.command == "continuum") return cmd_continuum(cfg, ctx, out, err);
    if (cfg.command == "check") return cmd_check(cfg, ctx, out, err);
    if (cfg.command == "converge") return cmd_converge(cfg, ctx, out, err);
    if (cfg.command == "figure") return cmd_figure(cfg, ctx, out, err);
    throw UsageError("unknown command \"" + cfg.command + "\"");
  } catch (const UsageError& e) {
    err << "ustlab " << cfg.command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const SchemaError& e) {
    err << "ustlab " << cfg.command << ": invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "ustlab " << cfg.command << ": " << ctx.module << ": " << e.what() << '\n';
    return kExitGuard;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  cfg.format.clear();
  CLI::App app{"Uniform spanning tree and loop-erased walk connectivity: exact, sampled and continuum values"};
  app.name("ustlab");
  app.require_subcommand(1, 1);

  const std::vector<std::string> formats{"json", "csv", "svg"};
  auto output = [&](CLI::App* s) {
    s->add_option("--out", cfg.out, "Write the result to this file instead of stdout");
    s->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember(formats));
  };
  auto domain = [&](CLI::App* s) {
    s->add_option("--domain", cfg.domain, "Domain JSON file, or rect:W,H");
    s->add_option("--delta", cfg.delta, "Lattice spacing such as 1/32; overrides the domain file");
    s->add_option("--mark", cfg.marks, "Extra marked point x,y[,role]; repeatable");
    s->add_option("--backend", cfg.backend, "auto, rational or floating")
        ->check(CLI::IsMember({"auto", "rational", "floating"}));
  };

  auto* combinat = app.add_subcommand("combinat", "Incidence matrices M, M^-1 and cover-inclusive tilings");
  combinat->add_option("--n", cfg.n, "Number of links N");
  output(combinat);

  auto* exact = app.add_subcommand("exact", "Connectivity probabilities Z_alpha on a grid");
  domain(exact);
  exact->add_option("--pattern", cfg.pattern, "Link pattern such as (()) or {1-4,2-3}; default all");
  exact->add_flag("--kernel", cfg.kernel, "With --format csv, write the excursion kernel instead");
  output(exact);

  auto* visit = app.add_subcommand("visit", "Loop-erased walk boundary-visit probability");
  domain(visit);
  visit->add_option("--omega", cfg.omega, "Visit order such as +- (checked against the geometry)");
  output(visit);

  auto* sample = app.add_subcommand("sample", "Wilson-algorithm Monte Carlo estimate compared to the exact value");
  domain(sample);
  sample->add_option("--pattern", cfg.pattern, "Link pattern; default all");
  sample->add_option("--omega", cfg.omega, "Visit order for domains with visit marks");
  sample->add_option("--samples", cfg.samples, "Number of samples");
  sample->add_option("--seed", cfg.seed, "Master seed");
  sample->add_option("--workers", cfg.workers, "Worker threads (default: USTLAB_WORKERS or all cores)");
  output(sample);

  auto* continuum = app.add_subcommand("continuum", "Pure partition function or boundary-visit amplitude");
  continuum->add_option("--pattern", cfg.pattern, "Link pattern for the partition function");
  continuum->add_option("--omega", cfg.omega, "Visit order for the amplitude");
  continuum->add_option("--points", cfg.points, "Increasing real points, comma separated")
      ->delimiter(',')
      ->required();
  continuum->add_option("--backend", cfg.backend, "auto, rational or floating")
      ->check(CLI::IsMember({"auto", "rational", "floating"}));
  output(continuum);

  auto* check = app.add_subcommand("check", "PDE residuals, covariance and asymptotics at random configurations");
  check->add_flag("--pde2", cfg.pde2, "Second-order equations of the partition functions");
  check->add_flag("--pde3", cfg.pde3, "Second- and third-order equations of the visit amplitudes");
  check->add_flag("--covariance", cfg.covariance, "Möbius covariance");
  check->add_flag("--asy2", cfg.asy2, "Collapse asymptotics of the partition functions");
  check->add_flag("--asymptotics", cfg.asymptotics, "First-visit and consecutive-visit constants");
  check->add_option("--n", cfg.n, "N for the partition function checks");
  check->add_option("--nprime", cfg.nprime, "N' for the visit amplitude checks");
  check->add_option("--configs", cfg.configs, "Random configurations per check (default per check)");
  check->add_option("--seed", cfg.seed, "Seed");
  output(check);

  auto* converge = app.add_subcommand("converge", "Delta sweep against the conformal-map prediction");
  converge->add_option("--domain", cfg.domain, "Rectangle domain JSON file")->required();
  converge->add_option("--deltas", cfg.deltas, "Lattice spacings, comma separated")->delimiter(',');
  converge->add_option("--delta", cfg.delta, "Not accepted; use --deltas");
  converge->add_option("--mark", cfg.marks, "Extra marked point x,y[,role]; repeatable");
  converge->add_option("--pattern", cfg.pattern, "Link pattern; default all");
  converge->add_option("--omega", cfg.omega, "Visit order for domains with visit marks");
  output(converge);

  auto* figure = app.add_subcommand("figure", "SVG of a sampled tree with branches, or of Dyck tilings");
  domain(figure);
  figure->add_option("--kind", cfg.kind, "tree, branches or tiling");
  figure->add_option("--pattern", cfg.pattern, "Lower path for --kind tiling");
  figure->add_option("--upper", cfg.upper, "Upper path for --kind tiling (default: the rainbow)");
  figure->add_option("--seed", cfg.seed, "Seed");
  output(figure);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  cfg.command = app.get_subcommands().front()->get_name();
  return run(cfg, out, err);
}

}  // namespace ustlab::cli
