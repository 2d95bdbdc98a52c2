#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ustlab/rational.hpp"

namespace ustlab {

struct Point {
  double x = 0;
  double y = 0;
};

enum class MarkRole { in, out, plain, visit };
MarkRole parse_mark_role(const std::string& s);
std::string to_string(MarkRole r);

struct MarkedPoint {
  Point p;
  MarkRole role = MarkRole::plain;
};

// Edge conductances: one value for horizontal and one for vertical edges,
// plus per-edge overrides keyed by the lattice coordinates of both endpoints.
struct ConductanceField {
  Rational horizontal = 1;
  Rational vertical = 1;
  std::map<std::pair<std::pair<long, long>, std::pair<long, long>>, Rational> overrides;

  bool is_unit() const { return horizontal == 1 && vertical == 1 && overrides.empty(); }
  Rational at(long i1, long j1, long i2, long j2) const;
};

struct DomainSpec {
  std::vector<Point> polygon;  // axis-aligned simple polygon
  double delta = 0;
  std::vector<MarkedPoint> marks;
  ConductanceField conductance;
  double corner_margin = 2.0;  // in units of delta

  static DomainSpec rectangle(double width, double height, double delta);
};

struct GridVertex {
  long i = 0;  // position (i * delta, j * delta)
  long j = 0;
  bool interior = false;
};

struct GridEdge {
  int u = 0;  // vertex ids
  int v = 0;
  Rational c = 1;
};

struct BoundaryEdge {
  int edge = 0;      // id in GridModel::edges()
  int inner = 0;     // interior endpoint e°
  int outer = 0;     // boundary endpoint
  int di = 0, dj = 0;  // inward direction, outer -> inner
};

struct Mark {
  MarkRole role = MarkRole::plain;
  Point requested;
  int first = 0;   // ccw index into boundary_edges()
  int second = -1; // visit marks: the ccw-next edge of the flanking pair
};

class GridModel {
 public:
  double delta() const { return delta_; }
  const std::vector<GridVertex>& vertices() const { return vertices_; }
  const std::vector<GridEdge>& edges() const { return edges_; }
  // Boundary edges in counterclockwise order along the boundary.
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }
  const std::vector<Mark>& marks() const { return marks_; }
  // Lower-left lattice corners of the δ-squares making up the domain A.
  const std::vector<std::pair<long, long>>& squares() const { return squares_; }

  int interior_count() const { return static_cast<int>(interior_.size()); }
  // Interior index (0..interior_count-1) of a vertex, or -1.
  int interior_index(int vertex) const { return interior_index_[static_cast<std::size_t>(vertex)]; }
  int interior_vertex(int idx) const { return interior_[static_cast<std::size_t>(idx)]; }
  // Edges incident to a vertex: (neighbor vertex, edge id).
  const std::vector<std::pair<int, int>>& incident(int vertex) const { return incident_[static_cast<std::size_t>(vertex)]; }
  // Boundary edge index (ccw) for an edge id, or -1.
  int boundary_index(int edge) const { return boundary_index_[static_cast<std::size_t>(edge)]; }

  Point position(int vertex) const;
  // Point on the domain boundary where the boundary edge ends.
  Point boundary_point(int boundary_edge) const { return position(boundary_[static_cast<std::size_t>(boundary_edge)].outer); }
  bool unit_conductance() const { return unit_conductance_; }
  int vertex_at(long i, long j) const;

  // Nearest boundary edge to p (smaller ccw index on ties).
  int nearest_boundary_edge(Point p) const;
  // Flanking pair (k, k+1) closest to p, both on one straight side.
  std::pair<int, int> nearest_flanking_pair(Point p) const;
  bool is_flanking_pair(int k, int k_next) const;
  // Boundary edge one lattice unit counterclockwise from k.
  int ccw_next(int k) const { return (k + 1) % static_cast<int>(boundary_.size()); }

  friend GridModel build_grid(const DomainSpec& spec);

 private:
  double delta_ = 0;
  std::vector<GridVertex> vertices_;
  std::vector<GridEdge> edges_;
  std::vector<BoundaryEdge> boundary_;
  std::vector<Mark> marks_;
  std::vector<std::pair<long, long>> squares_;
  std::vector<int> interior_;
  std::vector<int> interior_index_;
  std::vector<int> boundary_index_;
  std::vector<std::vector<std::pair<int, int>>> incident_;
  std::map<std::pair<long, long>, int> lookup_;
  std::vector<Point> corners_;
  bool unit_conductance_ = true;
};

// Throws std::invalid_argument for bad polygons, empty interior, marks too far
// from the lattice boundary or too close to a corner.
GridModel build_grid(const DomainSpec& spec);

enum class Backend { rational, floating };
std::string to_string(Backend b);

template <class T>
struct HarmonicField {
  int target = 0;                // ccw boundary edge index
  std::vector<T> interior;       // H_v(target) for interior index v
  T at_vertex(const GridModel& g, int vertex) const;
};

// Discrete Dirichlet problem for the (conductance-weighted) walk.
HarmonicField<Rational> harmonic_field_rational(const GridModel& g, int target);
HarmonicField<double> harmonic_field(const GridModel& g, int target);

// Interior size up to which the rational backend uses exact elimination.
inline constexpr int kExactSolveLimit = 40;
inline constexpr double kSolverTolerance = 1e-12;

template <class T>
struct KernelMatrix {
  std::vector<int> edges;           // ccw boundary edge indices, label l <-> edges[l-1]
  Matrix<T> values;                 // K(e_i, e_j); diagonal unused (zero)
  std::vector<bool> derivative;     // slot replaced by a tangential difference
  Backend backend = Backend::floating;

  std::size_t size() const { return edges.size(); }
  const T& operator()(int label_i, int label_j) const { return values(label_i - 1, label_j - 1); }
};

// K(e_i, e_j) = c(e_i) c(e_j) G(e_i°, e_j°) with G the inverse weighted
// Laplacian on interior vertices; with unit conductances K(e_i,e_j) = H_{e_i°}(e_j).
KernelMatrix<Rational> excursion_kernel_rational(const GridModel& g, const std::vector<int>& edges);
KernelMatrix<double> excursion_kernel(const GridModel& g, const std::vector<int>& edges);

// Discrete replacing step: for each label j in pair_starts (processed from the
// last to the first) zero K(j, j+1) and replace row and column j+1 by
// (K(j+1, .) - K(j, .)) / delta on the current matrix.
template <class T>
KernelMatrix<T> replace_derivative_slots(KernelMatrix<T> k, const std::vector<int>& pair_starts, const T& delta);

KernelMatrix<Rational> excursion_kernel_rational(const GridModel& g, const std::vector<int>& edges,
                                                 const std::vector<int>& pair_starts);
KernelMatrix<double> excursion_kernel(const GridModel& g, const std::vector<int>& edges,
                                      const std::vector<int>& pair_starts);

std::string kernel_csv(const KernelMatrix<double>& k);

}  // namespace ustlab
