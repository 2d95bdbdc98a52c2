#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <sstream>

namespace ustlab::cli {

namespace {

constexpr std::array<const char*, 6> kPalette{"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* role_colour(MarkRole r) {
  switch (r) {
    case MarkRole::in: return "#2ca02c";
    case MarkRole::out: return "#d62728";
    case MarkRole::visit: return "#ff7f0e";
    case MarkRole::plain: break;
  }
  return "#1f77b4";
}

}  // namespace

std::string tree_svg(const DomainSpec& spec, const GridModel& g, const TreeSample* tree,
                     const std::vector<std::vector<int>>& branches) {
  double x0 = spec.polygon.front().x, x1 = x0, y0 = spec.polygon.front().y, y1 = y0;
  for (Point p : spec.polygon) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  const double margin = 24, size = 480;
  const double s = size / std::max(x1 - x0, y1 - y0);
  auto px = [&](double x) { return margin + s * (x - x0); };
  auto py = [&](double y) { return margin + s * (y1 - y); };
  // extra room on the right for mark labels
  const double width = 2 * margin + 60 + s * (x1 - x0), height = 2 * margin + s * (y1 - y0);

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
    << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<polygon points=\"";
  for (Point p : spec.polygon) o << fmt(px(p.x)) << ',' << fmt(py(p.y)) << ' ';
  o << "\" fill=\"#f4f4f4\" stroke=\"black\" stroke-width=\"1.5\"/>\n";

  auto line = [&](int edge, const char* colour, double w) {
    const auto& e = g.edges()[static_cast<std::size_t>(edge)];
    const Point a = g.position(e.u), b = g.position(e.v);
    o << "<line x1=\"" << fmt(px(a.x)) << "\" y1=\"" << fmt(py(a.y)) << "\" x2=\"" << fmt(px(b.x)) << "\" y2=\""
      << fmt(py(b.y)) << "\" stroke=\"" << colour << "\" stroke-width=\"" << fmt(w) << "\" stroke-linecap=\"round\"/>\n";
  };
  const double thin = std::max(0.6, 0.12 * s * g.delta()), thick = std::max(2.0, 0.35 * s * g.delta());
  if (tree) {
    o << "<g id=\"tree\">\n";
    for (int e : tree->edges()) line(e, "#999999", thin);
    o << "</g>\n";
  }
  for (std::size_t b = 0; b < branches.size(); ++b) {
    o << "<g id=\"branch" << b + 1 << "\">\n";
    for (int e : branches[b]) line(e, kPalette[b % kPalette.size()], thick);
    o << "</g>\n";
  }
  o << "<g id=\"marks\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < g.marks().size(); ++i) {
    const auto& m = g.marks()[i];
    Point p = g.boundary_point(m.first);
    if (m.second >= 0) {
      const Point q = g.boundary_point(m.second);
      p = {0.5 * (p.x + q.x), 0.5 * (p.y + q.y)};
    }
    o << "<circle cx=\"" << fmt(px(p.x)) << "\" cy=\"" << fmt(py(p.y)) << "\" r=\"5\" fill=\"" << role_colour(m.role)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fmt(px(p.x) + 7) << "\" y=\"" << fmt(py(p.y) - 7) << "\">" << to_string(m.role) << ' '
      << i + 1 << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

std::string tilings_svg(const std::vector<DyckTiling>& tilings, std::size_t max_panels) {
  const std::size_t count = std::min(tilings.size(), max_panels);
  const int n = tilings.empty() ? 1 : tilings.front().lower.size();
  const double u = 22, margin = 16;
  const double panel_w = 2 * n * u + 2 * margin, panel_h = (n + 1) * u + 2 * margin + 14;
  const std::size_t per_row = std::max<std::size_t>(1, std::min<std::size_t>(count, 4));
  const std::size_t rows = std::max<std::size_t>(1, (count + per_row - 1) / per_row);
  const double width = panel_w * static_cast<double>(per_row), height = panel_h * static_cast<double>(rows);

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
    << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (count == 0) o << "<text x=\"10\" y=\"20\" font-family=\"sans-serif\">no tilings</text>\n";
  for (std::size_t k = 0; k < count; ++k) {
    const auto& t = tilings[k];
    const double ox = margin + panel_w * static_cast<double>(k % per_row);
    const double oy = margin + panel_h * static_cast<double>(k / per_row);
    auto X = [&](double c) { return ox + u * c; };
    auto Y = [&](double h) { return oy + u * (n + 0.5 - h); };
    o << "<g id=\"tiling" << k + 1 << "\">\n";
    for (std::size_t ti = 0; ti < t.tiles.size(); ++ti) {
      const auto& tile = t.tiles[ti];
      const char* colour = kPalette[ti % kPalette.size()];
      // diamond vertices keyed by lattice coordinates; shared edges inside a tile are not stroked
      using V = std::pair<int, int>;
      std::map<std::pair<V, V>, int> edges;
      for (int c = tile.x; c <= tile.x_end(); ++c) {
        const int m = tile.midpoint(c);
        const std::array<V, 4> d{V{c - 1, m}, V{c, m - 1}, V{c + 1, m}, V{c, m + 1}};
        o << "<polygon points=\"";
        for (auto [vx, vy] : d) o << fmt(X(vx)) << ',' << fmt(Y(vy)) << ' ';
        o << "\" fill=\"" << colour << "\" fill-opacity=\"0.35\" stroke=\"none\"/>\n";
        for (int e = 0; e < 4; ++e) {
          V a = d[static_cast<std::size_t>(e)], b = d[static_cast<std::size_t>((e + 1) % 4)];
          if (b < a) std::swap(a, b);
          ++edges[{a, b}];
        }
      }
      for (const auto& [e, hits] : edges)
        if (hits == 1)
          o << "<line x1=\"" << fmt(X(e.first.first)) << "\" y1=\"" << fmt(Y(e.first.second)) << "\" x2=\""
            << fmt(X(e.second.first)) << "\" y2=\"" << fmt(Y(e.second.second)) << "\" stroke=\"" << colour
            << "\" stroke-width=\"1.5\"/>\n";
    }
    for (const DyckPath* path : {&t.lower, &t.upper}) {
      o << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"" << (path == &t.lower ? "2" : "1.2")
        << "\" points=\"";
      for (int j = 0; j <= path->length(); ++j) o << fmt(X(j)) << ',' << fmt(Y(path->height(j))) << ' ';
      o << "\"/>\n";
    }
    o << "<text x=\"" << fmt(X(0)) << "\" y=\"" << fmt(Y(-0.5) + 10)
      << "\" font-family=\"monospace\" font-size=\"10\">" << t.lower.to_string() << " / " << t.upper.to_string()
      << "</text>\n</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace ustlab::cli
