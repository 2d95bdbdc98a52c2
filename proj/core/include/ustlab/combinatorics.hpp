#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ustlab/rational.hpp"

namespace ustlab {

// External positions (link endpoints, wedge positions, boundary labels) are
// 1-based; step vectors are stored 0-based. Step i (0-based) goes from
// vertex i to vertex i+1, so the link endpoint p (1-based) is steps[p - kIndexBase].
inline constexpr int kIndexBase = 1;

using Link = std::pair<int, int>;

// A Dyck path of 2N steps, equivalently a link pattern or a balanced
// parenthesis expression. N = 0 (the empty path) is allowed; it is the shape
// of an atomic tile.
class DyckPath {
 public:
  DyckPath() = default;
  explicit DyckPath(std::vector<int> steps);

  static DyckPath from_string(std::string_view parens);
  static DyckPath from_links(const std::vector<Link>& links);
  static DyckPath from_links_string(std::string_view text);  // "{1-4,2-3}"

  int size() const { return static_cast<int>(steps_.size() / 2); }
  int length() const { return static_cast<int>(steps_.size()); }
  const std::vector<int>& steps() const { return steps_; }
  // heights()[j] = α(j) for j = 0..2N
  const std::vector<int>& heights() const { return heights_; }
  int height(int j) const { return heights_[static_cast<std::size_t>(j)]; }
  bool opens_at(int position) const { return steps_[static_cast<std::size_t>(position - kIndexBase)] > 0; }

  // Matching pairs (a, b), a < b, sorted by a. This is also the left-to-right
  // orientation: a are the entrances, b the exits.
  const std::vector<Link>& links() const { return links_; }
  int partner(int position) const;

  std::string to_string() const;
  std::string links_string() const;

  friend bool operator==(const DyckPath& a, const DyckPath& b) { return a.steps_ == b.steps_; }
  friend std::strong_ordering operator<=>(const DyckPath& a, const DyckPath& b);

 private:
  std::vector<int> steps_;
  std::vector<int> heights_{0};
  std::vector<Link> links_;
  std::vector<int> partner_;
};

struct OrientedLinkPattern {
  std::vector<Link> pairs;  // (entrance, exit)
  bool left_to_right = false;

  static OrientedLinkPattern left_to_right_of(const DyckPath& d);
  DyckPath unoriented() const;
};

// All Dyck paths of size N in canonical order: lexicographic on steps with
// -1 < +1, i.e. ')' < '('. The completely unnested pattern comes first and the
// rainbow last, and the order is a linear extension of dominance.
std::vector<DyckPath> enumerate_dyck_paths(int n);
inline constexpr int kMaxEnumerationSize = 8;

bool dominance_leq(const DyckPath& a, const DyckPath& b);

struct Reversal {
  std::vector<int> sigma;  // 0-based: b links a_l with the exit b_{sigma[l]} of a
  int sign = 1;            // sgn(sigma)
  int m = 0;               // number of reversed matching pairs
};

std::optional<Reversal> reversal_leq(const DyckPath& a, const DyckPath& b);

// A tile is a ribbon of atomic squares. The square in column c has midpoint
// height h + (shape height at c - x); (x, h) is the midpoint of its leftmost
// square, so an atomic tile at a local minimum j of the lower path sits at
// (j, α(j) + 1).
struct DyckTile {
  DyckPath shape;
  int x = 0;
  int h = 1;

  int x_end() const { return x + shape.length(); }
  int midpoint(int column) const { return h + shape.height(column - x); }
  bool in_extent(int column) const { return column >= x && column <= x_end(); }

  friend bool operator==(const DyckTile&, const DyckTile&) = default;
};

// t1 covers t2: some square of t1 lies directly above a square of t2.
bool tile_covers(const DyckTile& t1, const DyckTile& t2);
bool tiles_nested(const DyckTile& t1, const DyckTile& t2);
bool tiles_cover_inclusive(const DyckTile& t1, const DyckTile& t2);

struct DyckTiling {
  DyckPath lower;
  DyckPath upper;
  std::vector<DyckTile> tiles;

  // Tiles are disjoint and cover exactly the squares between lower and upper.
  bool is_tiling() const;
  bool is_nested() const;
  bool is_cover_inclusive() const;
  std::string to_string() const;  // [(shape,x,h),...]
};

// The unique nested tiling T0(a/b) by top-layer peeling, if it exists.
// Throws std::invalid_argument unless a ≼ b.
std::optional<DyckTiling> nested_tiling(const DyckPath& a, const DyckPath& b);

std::vector<DyckTiling> cover_inclusive_tilings(const DyckPath& a, const DyckPath& b);

using WeightFn = std::function<Rational(int)>;
Rational unit_weight(int height);

// Σ over cover-inclusive tilings of Π f(h_t); with f ≡ 1 this is #C(a/b).
// Returns 0 unless a ≼ b.
Rational cover_inclusive_weight(const DyckPath& a, const DyckPath& b, const WeightFn& f);

struct IncidenceMatrix {
  int n = 0;
  std::vector<DyckPath> order;
  Matrix<Rational> entries;

  std::size_t index_of(const DyckPath& d) const;
  const Rational& at(const DyckPath& a, const DyckPath& b) const {
    return entries(index_of(a), index_of(b));
  }
};

inline constexpr int kMaxMatrixSize = 6;

struct IncidencePair {
  IncidenceMatrix m;
  IncidenceMatrix minv;
};

IncidencePair incidence_matrices(int n, const WeightFn& f = unit_weight);

// Unit-weight matrices, computed once per N and shared. Thread-safe.
std::shared_ptr<const IncidencePair> unit_incidence(int n);

enum class WedgeKind { up, down, slope };

struct WedgeInfo {
  WedgeKind kind = WedgeKind::slope;
  std::optional<DyckPath> removed;  // the two steps around the extremum deleted
  std::optional<DyckPath> lifted;   // down-wedge turned into an up-wedge
};

WedgeInfo wedge_ops(const DyckPath& a, int j);

using VisitOrder = std::vector<int>;  // entries +1 / -1
VisitOrder parse_visit_order(std::string_view text);  // "+-+" or "(+,-,+)"
std::string visit_order_string(const VisitOrder& w);

struct VisitEncoding {
  DyckPath alpha;
  // 1-based labels, counterclockwise from e_in = 1.
  int in_label = 1;
  int out_label = 2;
  // For visit s (in ω order): the labels of ê_{s;1} and ê_{s;2}.
  std::vector<std::pair<int, int>> visit_labels;
  // Collapsed pairs (j_s, j_s + 1) for visit s, j_s the smaller label.
  std::vector<int> pair_start;
};

VisitEncoding encode_visit_order(const VisitOrder& w);
inline DyckPath visit_order_to_link_pattern(const VisitOrder& w) { return encode_visit_order(w).alpha; }

}  // namespace ustlab
