#include "ustlab/combinatorics.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace ustlab {

// ---------------------------------------------------------------- DyckPath

DyckPath::DyckPath(std::vector<int> steps) : steps_(std::move(steps)) {
  if (steps_.size() % 2 != 0) throw std::invalid_argument("Dyck path must have an even number of steps");
  heights_.assign(steps_.size() + 1, 0);
  partner_.assign(steps_.size() + kIndexBase, 0);
  std::vector<int> stack;
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    const int s = steps_[i];
    if (s != 1 && s != -1) throw std::invalid_argument("Dyck path steps must be +1 or -1");
    heights_[i + 1] = heights_[i] + s;
    if (heights_[i + 1] < 0) throw std::invalid_argument("Dyck path goes below zero");
    const int pos = static_cast<int>(i) + kIndexBase;
    if (s > 0) {
      stack.push_back(pos);
    } else {
      const int open = stack.back();
      stack.pop_back();
      links_.emplace_back(open, pos);
      partner_[open] = pos;
      partner_[pos] = open;
    }
  }
  if (heights_.back() != 0) throw std::invalid_argument("Dyck path does not return to zero");
  std::sort(links_.begin(), links_.end());
}

DyckPath DyckPath::from_string(std::string_view parens) {
  std::vector<int> steps;
  steps.reserve(parens.size());
  for (char c : parens) {
    if (c == '(') steps.push_back(+1);
    else if (c == ')') steps.push_back(-1);
    else throw std::invalid_argument("unexpected character in parenthesis expression");
  }
  return DyckPath(std::move(steps));
}

DyckPath DyckPath::from_links(const std::vector<Link>& links) {
  const std::size_t len = 2 * links.size();
  std::vector<int> steps(len, 0);
  for (auto [x, y] : links) {
    const int a = std::min(x, y) - kIndexBase, b = std::max(x, y) - kIndexBase;
    if (a < 0 || static_cast<std::size_t>(b) >= len || a == b || steps[a] != 0 || steps[b] != 0)
      throw std::invalid_argument("link endpoints out of range or repeated");
    steps[a] = +1;
    steps[b] = -1;
  }
  DyckPath d(std::move(steps));
  std::vector<Link> sorted;
  for (auto [x, y] : links) sorted.emplace_back(std::min(x, y), std::max(x, y));
  std::sort(sorted.begin(), sorted.end());
  if (sorted != d.links()) throw std::invalid_argument("links cross");
  return d;
}

DyckPath DyckPath::from_links_string(std::string_view text) {
  std::vector<Link> links;
  std::string s(text);
  for (char& c : s)
    if (c == '{' || c == '}' || c == ',') c = ' ';
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    const auto dash = tok.find('-');
    if (dash == std::string::npos) throw std::invalid_argument("link must look like a-b");
    links.emplace_back(std::stoi(tok.substr(0, dash)), std::stoi(tok.substr(dash + 1)));
  }
  return from_links(links);
}

int DyckPath::partner(int position) const {
  if (position < kIndexBase || position >= length() + kIndexBase) throw std::out_of_range("position out of range");
  return partner_[static_cast<std::size_t>(position)];
}

std::string DyckPath::to_string() const {
  std::string s;
  for (int x : steps_) s += x > 0 ? '(' : ')';
  return s;
}

std::string DyckPath::links_string() const {
  std::string s = "{";
  for (std::size_t i = 0; i < links_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(links_[i].first) + "-" + std::to_string(links_[i].second);
  }
  return s + "}";
}

std::strong_ordering operator<=>(const DyckPath& a, const DyckPath& b) {
  if (auto c = a.steps_.size() <=> b.steps_.size(); c != 0) return c;
  return a.steps_ <=> b.steps_;
}

OrientedLinkPattern OrientedLinkPattern::left_to_right_of(const DyckPath& d) {
  return OrientedLinkPattern{d.links(), true};
}

DyckPath OrientedLinkPattern::unoriented() const { return DyckPath::from_links(pairs); }

// ------------------------------------------------------------- enumeration

namespace {

void enumerate_rec(int n, std::vector<int>& steps, int height, int opened, std::vector<DyckPath>& out) {
  if (static_cast<int>(steps.size()) == 2 * n) {
    out.emplace_back(steps);
    return;
  }
  if (height > 0) {
    steps.push_back(-1);
    enumerate_rec(n, steps, height - 1, opened, out);
    steps.pop_back();
  }
  if (opened < n) {
    steps.push_back(+1);
    enumerate_rec(n, steps, height + 1, opened + 1, out);
    steps.pop_back();
  }
}

void require_same_size(const DyckPath& a, const DyckPath& b) {
  if (a.size() != b.size()) throw std::invalid_argument("Dyck paths of different sizes");
}

}  // namespace

std::vector<DyckPath> enumerate_dyck_paths(int n) {
  if (n < 1 || n > kMaxEnumerationSize)
    throw std::invalid_argument("enumeration size must be in 1.." + std::to_string(kMaxEnumerationSize));
  std::vector<DyckPath> out;
  std::vector<int> steps;
  enumerate_rec(n, steps, 0, 0, out);
  return out;
}

bool dominance_leq(const DyckPath& a, const DyckPath& b) {
  require_same_size(a, b);
  for (int j = 0; j <= a.length(); ++j)
    if (a.height(j) > b.height(j)) return false;
  return true;
}

std::optional<Reversal> reversal_leq(const DyckPath& a, const DyckPath& b) {
  require_same_size(a, b);
  const auto& al = a.links();
  std::vector<int> exit_index(static_cast<std::size_t>(a.length() + kIndexBase), -1);
  std::vector<int> entrance_index(static_cast<std::size_t>(a.length() + kIndexBase), -1);
  for (std::size_t l = 0; l < al.size(); ++l) {
    entrance_index[al[l].first] = static_cast<int>(l);
    exit_index[al[l].second] = static_cast<int>(l);
  }
  Reversal r;
  r.sigma.assign(al.size(), -1);
  for (auto [x, y] : b.links()) {
    const bool xo = a.opens_at(x), yo = a.opens_at(y);
    if (xo == yo) return std::nullopt;
    const int entrance = xo ? x : y;
    const int exit = xo ? y : x;
    r.sigma[entrance_index[entrance]] = exit_index[exit];
    if (!xo) ++r.m;
  }
  std::vector<bool> seen(r.sigma.size(), false);
  for (std::size_t i = 0; i < r.sigma.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(r.sigma[j])) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) r.sign = -r.sign;
  }
  return r;
}

// ------------------------------------------------------------------- tiles

bool tile_covers(const DyckTile& t1, const DyckTile& t2) {
  const int lo = std::max(t1.x, t2.x), hi = std::min(t1.x_end(), t2.x_end());
  for (int c = lo; c <= hi; ++c)
    if (t1.midpoint(c) > t2.midpoint(c)) return true;
  return false;
}

bool tiles_nested(const DyckTile& t1, const DyckTile& t2) {
  // shadows (x-1, x'+1) as open intervals
  const int a1 = t1.x - 1, b1 = t1.x_end() + 1, a2 = t2.x - 1, b2 = t2.x_end() + 1;
  if (b1 <= a2 || b2 <= a1) return true;
  const bool one_in_two = a2 <= a1 && b1 <= b2;
  const bool two_in_one = a1 <= a2 && b2 <= b1;
  if (one_in_two && two_in_one) return tile_covers(t1, t2) || tile_covers(t2, t1);
  if (two_in_one) return tile_covers(t1, t2);
  if (one_in_two) return tile_covers(t2, t1);
  return false;
}

bool tiles_cover_inclusive(const DyckTile& t1, const DyckTile& t2) {
  if (t1.x_end() < t2.x || t2.x_end() < t1.x) return true;
  auto contained = [](const DyckTile& inner, const DyckTile& outer) {
    return outer.x <= inner.x && inner.x_end() <= outer.x_end();
  };
  if (tile_covers(t1, t2) && !contained(t1, t2)) return false;
  if (tile_covers(t2, t1) && !contained(t2, t1)) return false;
  return true;
}

namespace {

// Columns 0..2N; column c holds (b(c) - a(c)) / 2 squares, the k-th with
// midpoint a(c) + 2k + 1.
std::vector<std::vector<int>> square_owner_grid(const DyckPath& a, const DyckPath& b) {
  std::vector<std::vector<int>> grid(static_cast<std::size_t>(a.length() + 1));
  for (int c = 0; c <= a.length(); ++c)
    grid[c].assign(static_cast<std::size_t>(std::max(0, (b.height(c) - a.height(c)) / 2)), -1);
  return grid;
}

int layer_of(const DyckPath& a, const std::vector<std::vector<int>>& grid, int c, int mid) {
  if (c < 0 || c >= static_cast<int>(grid.size())) return -1;
  const int d = mid - a.height(c) - 1;
  if (d < 0 || d % 2 != 0) return -1;
  const int k = d / 2;
  return k < static_cast<int>(grid[c].size()) ? k : -1;
}

}  // namespace

bool DyckTiling::is_tiling() const {
  if (lower.size() != upper.size() || !dominance_leq(lower, upper)) return false;
  auto grid = square_owner_grid(lower, upper);
  for (std::size_t t = 0; t < tiles.size(); ++t) {
    const auto& tile = tiles[t];
    if (tile.h < 1) return false;
    for (int c = tile.x; c <= tile.x_end(); ++c) {
      const int k = layer_of(lower, grid, c, tile.midpoint(c));
      if (k < 0 || grid[c][k] != -1) return false;
      grid[c][k] = static_cast<int>(t);
    }
  }
  for (const auto& col : grid)
    for (int owner : col)
      if (owner < 0) return false;
  return true;
}

bool DyckTiling::is_nested() const {
  for (std::size_t i = 0; i < tiles.size(); ++i)
    for (std::size_t j = i + 1; j < tiles.size(); ++j)
      if (!tiles_nested(tiles[i], tiles[j])) return false;
  return true;
}

bool DyckTiling::is_cover_inclusive() const {
  for (std::size_t i = 0; i < tiles.size(); ++i)
    for (std::size_t j = i + 1; j < tiles.size(); ++j)
      if (!tiles_cover_inclusive(tiles[i], tiles[j])) return false;
  return true;
}

std::string DyckTiling::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    if (i) s += ',';
    s += "(" + tiles[i].shape.to_string() + "," + std::to_string(tiles[i].x) + "," + std::to_string(tiles[i].h) + ")";
  }
  return s + "]";
}

std::optional<DyckTiling> nested_tiling(const DyckPath& a, const DyckPath& b) {
  if (!dominance_leq(a, b)) throw std::invalid_argument("nested tiling needs a ≼ b");
  DyckTiling out{a, b, {}};
  std::vector<int> g = b.heights();
  const int len = a.length();
  for (;;) {
    bool any = false;
    int c = 1;
    while (c < len) {
      if (g[c] == a.height(c)) {
        ++c;
        continue;
      }
      any = true;
      const int p = c;
      while (c < len && g[c] > a.height(c)) ++c;
      const int q = c - 1;
      // top layer midpoints g(j) - 1 on [p, q]
      const int base = g[p] - 1;
      if (g[q] - 1 != base) return std::nullopt;
      std::vector<int> steps;
      for (int j = p; j < q; ++j) {
        if (g[j + 1] - 1 < base) return std::nullopt;
        steps.push_back(g[j + 1] - g[j]);
      }
      out.tiles.push_back(DyckTile{DyckPath(std::move(steps)), p, base});
      for (int j = p; j <= q; ++j) g[j] -= 2;
    }
    if (!any) break;
  }
  if (!out.is_nested()) return std::nullopt;
  return out;
}

// -------------------------------------------------- cover-inclusive search

namespace {

// Depth-first search over tile decompositions. The free square with the
// smallest column (then lowest) must be the leftmost square of its tile,
// because every square to its left is already used.
class CoverInclusiveSearch {
 public:
  CoverInclusiveSearch(const DyckPath& a, const DyckPath& b) : a_(a), grid_(square_owner_grid(a, b)) {}

  template <class Visit>
  void run(Visit&& visit) {
    step(visit);
  }

 private:
  template <class Visit>
  void step(Visit& visit) {
    int c0 = -1, k0 = -1;
    for (int c = 0; c < static_cast<int>(grid_.size()) && c0 < 0; ++c)
      for (int k = 0; k < static_cast<int>(grid_[c].size()); ++k)
        if (grid_[c][k] < 0) {
          c0 = c;
          k0 = k;
          break;
        }
    if (c0 < 0) {
      visit(tiles_);
      return;
    }
    const int h0 = a_.height(c0) + 2 * k0 + 1;
    std::vector<int> steps;
    grid_[c0][k0] = 0;
    grow(visit, c0, h0, c0, h0, steps);
    grid_[c0][k0] = -1;
  }

  template <class Visit>
  void grow(Visit& visit, int c0, int h0, int c, int mid, std::vector<int>& steps) {
    if (mid == h0) {
      DyckTile tile{DyckPath(steps), c0, h0};
      bool ok = true;
      for (const auto& t : tiles_)
        if (!tiles_cover_inclusive(t, tile)) {
          ok = false;
          break;
        }
      if (ok) {
        tiles_.push_back(std::move(tile));
        step(visit);
        tiles_.pop_back();
      }
    }
    for (int s : {+1, -1}) {
      const int nm = mid + s;
      if (nm < h0) continue;
      const int k = layer_of(a_, grid_, c + 1, nm);
      if (k < 0 || grid_[c + 1][k] >= 0) continue;
      grid_[c + 1][k] = 0;
      steps.push_back(s);
      grow(visit, c0, h0, c + 1, nm, steps);
      steps.pop_back();
      grid_[c + 1][k] = -1;
    }
  }

  const DyckPath& a_;
  std::vector<std::vector<int>> grid_;
  std::vector<DyckTile> tiles_;
};

}  // namespace

std::vector<DyckTiling> cover_inclusive_tilings(const DyckPath& a, const DyckPath& b) {
  if (!dominance_leq(a, b)) throw std::invalid_argument("cover-inclusive tilings need a ≼ b");
  std::vector<DyckTiling> out;
  CoverInclusiveSearch(a, b).run([&](const std::vector<DyckTile>& tiles) { out.push_back(DyckTiling{a, b, tiles}); });
  return out;
}

Rational unit_weight(int) { return Rational(1); }

Rational cover_inclusive_weight(const DyckPath& a, const DyckPath& b, const WeightFn& f) {
  if (!dominance_leq(a, b)) return Rational(0);
  Rational total = 0;
  CoverInclusiveSearch(a, b).run([&](const std::vector<DyckTile>& tiles) {
    Rational w = 1;
    for (const auto& t : tiles) w *= f(t.h);
    total += w;
  });
  return total;
}

// -------------------------------------------------------- incidence matrix

std::size_t IncidenceMatrix::index_of(const DyckPath& d) const {
  auto it = std::lower_bound(order.begin(), order.end(), d);
  if (it == order.end() || !(*it == d)) throw std::invalid_argument("pattern not in this matrix: " + d.to_string());
  return static_cast<std::size_t>(it - order.begin());
}

IncidencePair incidence_matrices(int n, const WeightFn& f) {
  if (n < 1 || n > kMaxMatrixSize)
    throw std::invalid_argument("incidence matrix size must be in 1.." + std::to_string(kMaxMatrixSize));
  auto order = enumerate_dyck_paths(n);
  const std::size_t c = order.size();
  IncidencePair out{{n, order, Matrix<Rational>(c, c)}, {n, order, Matrix<Rational>(c, c)}};
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = i; j < c; ++j) {
      if (!dominance_leq(order[i], order[j])) continue;
      if (auto t = nested_tiling(order[i], order[j])) {
        Rational w = 1;
        for (const auto& tile : t->tiles) w *= -f(tile.h);
        out.m.entries(i, j) = w;
      }
      out.minv.entries(i, j) = cover_inclusive_weight(order[i], order[j], f);
    }
  return out;
}

std::shared_ptr<const IncidencePair> unit_incidence(int n) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const IncidencePair>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const IncidencePair>(incidence_matrices(n));
  return slot;
}

// ------------------------------------------------------------------ wedges

WedgeInfo wedge_ops(const DyckPath& a, int j) {
  if (j < 1 || j > a.length() - 1) throw std::out_of_range("wedge position must be in 1..2N-1");
  const auto& s = a.steps();
  const int before = s[j - 1], after = s[j];
  WedgeInfo w;
  if (before == after) return w;
  std::vector<int> removed;
  for (int i = 0; i < a.length(); ++i)
    if (i != j - 1 && i != j) removed.push_back(s[i]);
  w.removed = DyckPath(removed);
  if (before > 0) {
    w.kind = WedgeKind::up;
  } else {
    w.kind = WedgeKind::down;
    std::vector<int> lifted = s;
    lifted[j - 1] = +1;
    lifted[j] = -1;
    w.lifted = DyckPath(lifted);
  }
  return w;
}

// ------------------------------------------------------------ visit orders

VisitOrder parse_visit_order(std::string_view text) {
  VisitOrder w;
  for (char c : text) {
    if (c == '+') w.push_back(+1);
    else if (c == '-') w.push_back(-1);
    else if (c == '(' || c == ')' || c == ',' || c == ' ') continue;
    else throw std::invalid_argument("visit order may contain only + and -");
  }
  return w;
}

std::string visit_order_string(const VisitOrder& w) {
  std::string s;
  for (int x : w) s += x > 0 ? '+' : '-';
  return s;
}

VisitEncoding encode_visit_order(const VisitOrder& w) {
  VisitEncoding enc;
  const int nv = static_cast<int>(w.size());
  enc.visit_labels.assign(w.size(), {0, 0});
  enc.pair_start.assign(w.size(), 0);
  int label = enc.in_label + 1;
  for (int s = 0; s < nv; ++s) {
    if (w[s] < 0) continue;
    enc.visit_labels[s] = {label, label + 1};
    label += 2;
  }
  enc.out_label = label++;
  for (int s = nv - 1; s >= 0; --s) {
    if (w[s] > 0) continue;
    enc.visit_labels[s] = {label + 1, label};
    label += 2;
  }
  std::vector<Link> links;
  int prev = enc.in_label;
  for (int s = 0; s < nv; ++s) {
    links.emplace_back(prev, enc.visit_labels[s].first);
    prev = enc.visit_labels[s].second;
    enc.pair_start[s] = std::min(enc.visit_labels[s].first, enc.visit_labels[s].second);
  }
  links.emplace_back(prev, enc.out_label);
  enc.alpha = DyckPath::from_links(links);
  return enc;
}

}  // namespace ustlab
