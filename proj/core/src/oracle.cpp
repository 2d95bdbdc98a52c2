#include "ustlab/oracle.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace ustlab {

namespace {

// Interior vertices are nodes 0..n-1; the merged boundary is node n.
struct Contracted {
  int nodes = 0;
  std::vector<std::pair<int, int>> ends;  // per grid edge
};

Contracted contract(const GridModel& g) {
  Contracted c;
  const int n = g.interior_count();
  c.nodes = n + 1;
  auto node = [&](int v) {
    const int a = g.interior_index(v);
    return a >= 0 ? a : n;
  };
  for (const auto& e : g.edges()) c.ends.emplace_back(node(e.u), node(e.v));
  return c;
}

class RollbackUnionFind {
 public:
  explicit RollbackUnionFind(int n) : parent_(static_cast<std::size_t>(n)), size_(static_cast<std::size_t>(n), 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) const {
    while (parent_[x] != x) x = parent_[x];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    history_.push_back(b);
    return true;
  }
  void rollback() {
    const int b = history_.back();
    history_.pop_back();
    const int a = parent_[b];
    size_[a] -= size_[b];
    parent_[b] = b;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
  std::vector<int> history_;
};

class TreeSearch {
 public:
  TreeSearch(const Contracted& c, const std::function<void(const std::vector<int>&)>& visit, std::size_t limit)
      : c_(c), visit_(visit), limit_(limit), uf_(c.nodes) {}

  void run() { recurse(0); }

 private:
  // Can the chosen edges plus edges k.. still connect every node?
  bool connectable(std::size_t k) const {
    std::vector<int> comp(static_cast<std::size_t>(c_.nodes));
    for (int v = 0; v < c_.nodes; ++v) comp[v] = uf_.find(v);
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(c_.nodes));
    for (std::size_t e = k; e < c_.ends.size(); ++e) {
      const int a = comp[c_.ends[e].first], b = comp[c_.ends[e].second];
      if (a == b) continue;
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::vector<bool> seen(static_cast<std::size_t>(c_.nodes), false);
    std::vector<int> stack{comp[0]};
    seen[comp[0]] = true;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      for (int y : adj[x])
        if (!seen[y]) {
          seen[y] = true;
          stack.push_back(y);
        }
    }
    for (int v = 0; v < c_.nodes; ++v)
      if (!seen[comp[v]]) return false;
    return true;
  }

  void recurse(std::size_t k) {
    if (static_cast<int>(chosen_.size()) == c_.nodes - 1) {
      if (++found_ > limit_) throw std::length_error("spanning tree count exceeds the enumeration limit");
      visit_(chosen_);
      return;
    }
    if (k == c_.ends.size()) return;
    // contract
    if (uf_.unite(c_.ends[k].first, c_.ends[k].second)) {
      chosen_.push_back(static_cast<int>(k));
      recurse(k + 1);
      chosen_.pop_back();
      uf_.rollback();
    }
    // delete
    if (connectable(k + 1)) recurse(k + 1);
  }

  const Contracted& c_;
  const std::function<void(const std::vector<int>&)>& visit_;
  std::size_t limit_;
  std::size_t found_ = 0;
  RollbackUnionFind uf_;
  std::vector<int> chosen_;
};

Rational tree_weight(const GridModel& g, const std::vector<int>& tree) {
  Rational w = 1;
  for (int e : tree) w *= g.edges()[e].c;
  return w;
}

Matrix<Rational> interior_laplacian(const GridModel& g) {
  const std::size_t n = static_cast<std::size_t>(g.interior_count());
  Matrix<Rational> l(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    const int v = g.interior_vertex(static_cast<int>(a));
    for (auto [w, e] : g.incident(v)) {
      l(a, a) += g.edges()[e].c;
      if (const int b = g.interior_index(w); b >= 0) l(a, static_cast<std::size_t>(b)) -= g.edges()[e].c;
    }
  }
  return l;
}

// Sum of tree weights where pred holds, divided by the total.
Rational weighted_fraction(const GridModel& g, const std::function<bool(const std::vector<int>&)>& pred) {
  Rational hit = 0, total = 0;
  for_each_spanning_tree(g, [&](const std::vector<int>& tree) {
    const Rational w = tree_weight(g, tree);
    total += w;
    if (pred(tree)) hit += w;
  });
  return hit / total;
}

int edge_between(const GridModel& g, int u, int v) {
  for (auto [w, e] : g.incident(u))
    if (w == v) return e;
  return -1;
}

}  // namespace

void for_each_spanning_tree(const GridModel& g, const std::function<void(const std::vector<int>&)>& visit,
                            std::size_t limit) {
  if (g.interior_count() > kOracleInteriorLimit)
    throw std::length_error("tree enumeration limited to " + std::to_string(kOracleInteriorLimit) + " interior vertices");
  const Contracted c = contract(g);
  TreeSearch(c, visit, limit).run();
}

TreeEnumeration enumerate_spanning_trees(const GridModel& g, std::size_t limit) {
  TreeEnumeration out;
  for_each_spanning_tree(
      g,
      [&](const std::vector<int>& tree) {
        out.trees.push_back(tree);
        out.weights.push_back(tree_weight(g, tree));
        out.total_weight += out.weights.back();
      },
      limit);
  return out;
}

Rational matrix_tree_weight(const GridModel& g) { return determinant(interior_laplacian(g)); }

std::vector<int> boundary_branch(const GridModel& g, const std::vector<int>& tree, int start_vertex) {
  const Contracted c = contract(g);
  const int root = c.nodes - 1;
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(c.nodes));
  for (int e : tree) {
    auto [a, b] = c.ends[e];
    adj[a].emplace_back(b, e);
    adj[b].emplace_back(a, e);
  }
  std::vector<int> up_edge(static_cast<std::size_t>(c.nodes), -1), up_node(static_cast<std::size_t>(c.nodes), -1);
  std::vector<bool> seen(static_cast<std::size_t>(c.nodes), false);
  std::vector<int> stack{root};
  seen[root] = true;
  while (!stack.empty()) {
    const int x = stack.back();
    stack.pop_back();
    for (auto [y, e] : adj[x])
      if (!seen[y]) {
        seen[y] = true;
        up_node[y] = x;
        up_edge[y] = e;
        stack.push_back(y);
      }
  }
  int x = g.interior_index(start_vertex);
  if (x < 0) throw std::invalid_argument("branch must start at an interior vertex");
  std::vector<int> path;
  while (x != root) {
    if (!seen[x]) throw std::invalid_argument("edge set is not a spanning tree");
    path.push_back(up_edge[x]);
    x = up_node[x];
  }
  return path;
}

Rational exact_connectivity_bruteforce(const GridModel& g, const OrientedLinkPattern& a, const std::vector<int>& edges) {
  const int m = static_cast<int>(edges.size());
  for (auto [x, y] : a.pairs)
    if (x < 1 || y < 1 || x > m || y > m || x == y) throw std::invalid_argument("link label outside the marked edges");
  std::vector<std::pair<int, int>> routes;  // (start vertex, required exit edge id)
  for (auto [x, y] : a.pairs) {
    const auto& in = g.boundary_edges().at(static_cast<std::size_t>(edges[x - 1]));
    routes.emplace_back(in.inner, g.boundary_edges().at(static_cast<std::size_t>(edges[y - 1])).edge);
  }
  return weighted_fraction(g, [&](const std::vector<int>& tree) {
    for (auto [v, exit] : routes)
      if (boundary_branch(g, tree, v).back() != exit) return false;
    return true;
  });
}

Rational visit_probability_bruteforce(const GridModel& g, int in_edge, int out_edge,
                                      const std::vector<std::pair<int, int>>& visit_pairs) {
  const auto& be = g.boundary_edges();
  const int start = be.at(static_cast<std::size_t>(in_edge)).inner;
  const int exit = be.at(static_cast<std::size_t>(out_edge)).edge;
  std::vector<int> visits;
  for (auto [k1, k2] : visit_pairs) {
    const int e = edge_between(g, be.at(static_cast<std::size_t>(k1)).inner, be.at(static_cast<std::size_t>(k2)).inner);
    if (e < 0) throw std::invalid_argument("visit pair does not flank an edge");
    visits.push_back(e);
  }
  Rational hit = 0, cond = 0;
  for_each_spanning_tree(g, [&](const std::vector<int>& tree) {
    const auto path = boundary_branch(g, tree, start);
    if (path.back() != exit) return;
    const Rational w = tree_weight(g, tree);
    cond += w;
    auto it = path.begin();
    for (int e : visits) {
      it = std::find(it, path.end(), e);
      if (it == path.end()) return;
    }
    hit += w;
  });
  return hit / cond;
}

Rational free_subtree_bruteforce(const GridModel& g, const std::vector<int>& face_first_edges) {
  std::map<std::pair<long, long>, int> square_id;
  for (const auto& s : g.squares()) square_id.emplace(s, static_cast<int>(square_id.size()));
  const int nsq = static_cast<int>(square_id.size());
  auto corner_boundary = [&](long i, long j) {
    const int v = g.vertex_at(i, j);
    return v >= 0 && !g.vertices()[v].interior;
  };
  std::vector<bool> boundary_face(static_cast<std::size_t>(nsq), false);
  for (const auto& [s, id] : square_id)
    boundary_face[id] = corner_boundary(s.first, s.second) || corner_boundary(s.first + 1, s.second) ||
                        corner_boundary(s.first, s.second + 1) || corner_boundary(s.first + 1, s.second + 1);

  const int nb = static_cast<int>(g.boundary_edges().size());
  std::set<int> target;
  for (int k : face_first_edges) {
    if (!g.is_flanking_pair(k, g.ccw_next(k))) throw std::invalid_argument("face is not flanked by a straight edge pair");
    for (int other : face_first_edges)
      if (other != k) {
        const int d = ((other - k) % nb + nb) % nb;
        if (d < 2 || d > nb - 2) throw std::invalid_argument("faces must be distinct and non-neighboring");
      }
    long i = std::numeric_limits<long>::max(), j = std::numeric_limits<long>::max();
    for (int kk : {k, g.ccw_next(k)})
      for (int v : {g.boundary_edges()[kk].inner, g.boundary_edges()[kk].outer}) {
        i = std::min(i, g.vertices()[v].i);
        j = std::min(j, g.vertices()[v].j);
      }
    target.insert(square_id.at({i, j}));
  }

  // the two squares on either side of each grid edge
  std::vector<std::pair<int, int>> dual;
  for (const auto& e : g.edges()) {
    const auto& a = g.vertices()[e.u];
    const auto& b = g.vertices()[e.v];
    const long i = std::min(a.i, b.i), j = std::min(a.j, b.j);
    const std::pair<long, long> s1{i, j}, s2 = a.j == b.j ? std::pair<long, long>{i, j - 1} : std::pair<long, long>{i - 1, j};
    dual.emplace_back(square_id.at(s1), square_id.at(s2));
  }

  return weighted_fraction(g, [&](const std::vector<int>& tree) {
    std::vector<bool> in_tree(g.edges().size(), false);
    for (int e : tree) in_tree[e] = true;
    std::vector<int> parent(static_cast<std::size_t>(nsq));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      if (in_tree[e] || g.boundary_index(static_cast<int>(e)) >= 0) continue;
      parent[find(dual[e].first)] = find(dual[e].second);
    }
    std::map<int, std::set<int>> touched;
    for (int s = 0; s < nsq; ++s)
      if (boundary_face[s]) touched[find(s)].insert(s);
    for (const auto& [root, faces] : touched)
      if (faces == target) return true;
    return false;
  });
}

std::vector<Rational> rational_harmonic_measure(const GridModel& g, int target) {
  const int n = g.interior_count();
  if (n > kExactSolveLimit) throw std::length_error("rational harmonic measure limited to small grids");
  const auto& be = g.boundary_edges().at(static_cast<std::size_t>(target));
  const Matrix<Rational> l = interior_laplacian(g);
  const Rational det = determinant(l);
  const std::size_t row = static_cast<std::size_t>(g.interior_index(be.inner));
  std::vector<Rational> h;
  for (std::size_t col = 0; col < static_cast<std::size_t>(n); ++col) {
    Matrix<Rational> m = l;
    for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r) m(r, col) = r == row ? g.edges()[be.edge].c : Rational(0);
    h.push_back(determinant(m) / det);
  }
  return h;
}

}  // namespace ustlab
