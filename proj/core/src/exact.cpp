#include "ustlab/exact.hpp"

#include <algorithm>
#include <stdexcept>

namespace ustlab {

namespace {

template <class T>
T from_rational(const Rational& q) {
  if constexpr (std::is_same_v<T, Rational>) return q;
  else return q.get_d();
}

}  // namespace

template <class T>
T lp_determinant(const DyckPath& b, const KernelMatrix<T>& k) {
  const std::size_t n = static_cast<std::size_t>(b.size());
  if (k.size() != 2 * n) throw std::invalid_argument("kernel size does not match the link pattern");
  Matrix<T> m(n, n);
  const auto& links = b.links();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = k(links[r].first, links[c].second);
  return determinant(std::move(m));
}

template <class T>
InverseFominSum<T> connectivity_probability(const DyckPath& alpha, const KernelMatrix<T>& k) {
  const int n = alpha.size();
  if (n < 1 || n > kMaxMatrixSize) throw std::invalid_argument("connectivity sums support 1 <= N <= 6");
  if (k.size() != static_cast<std::size_t>(2 * n)) throw std::invalid_argument("kernel size does not match the link pattern");
  const auto inc = unit_incidence(n);
  const auto& minv = inc->minv;
  const std::size_t row = minv.index_of(alpha);
  InverseFominSum<T> out{alpha, T(0), {}};
  for (std::size_t c = 0; c < minv.order.size(); ++c) {
    const Rational& coeff = minv.entries(row, c);
    if (coeff == 0) continue;
    const T det = lp_determinant(minv.order[c], k);
    out.value += from_rational<T>(coeff) * det;
    out.contributions.push_back({minv.order[c], coeff, det});
  }
  return out;
}

template double lp_determinant(const DyckPath&, const KernelMatrix<double>&);
template Rational lp_determinant(const DyckPath&, const KernelMatrix<Rational>&);
template InverseFominSum<double> connectivity_probability(const DyckPath&, const KernelMatrix<double>&);
template InverseFominSum<Rational> connectivity_probability(const DyckPath&, const KernelMatrix<Rational>&);

void CollapsedSpec::validate() const {
  const int len = alpha.length();
  std::vector<int> sorted = pair_starts;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t s = 0; s < sorted.size(); ++s) {
    const int j = sorted[s];
    if (j < 1 || j + 1 > len) throw std::out_of_range("collapsed pair outside the pattern");
    if (s > 0 && sorted[s - 1] + 1 >= j) throw std::invalid_argument("collapsed pairs must be disjoint");
    if (alpha.partner(j) == j + 1) throw std::invalid_argument("collapsed pair is linked in the pattern");
  }
}

template <class T>
T collapsed_value(const CollapsedSpec& spec, const KernelMatrix<T>& replaced) {
  spec.validate();
  return connectivity_probability(spec.alpha, replaced).value;
}

template double collapsed_value(const CollapsedSpec&, const KernelMatrix<double>&);
template Rational collapsed_value(const CollapsedSpec&, const KernelMatrix<Rational>&);

VisitSetup visit_setup(const GridModel& g, int in_edge, int out_edge, const std::vector<int>& visit_first_edges,
                       const std::optional<VisitOrder>& omega) {
  const int nb = static_cast<int>(g.boundary_edges().size());
  auto offset = [&](int e) {
    if (e < 0 || e >= nb) throw std::out_of_range("boundary edge index out of range");
    return ((e - in_edge) % nb + nb) % nb;
  };
  const int out_off = offset(out_edge);
  if (out_off == 0) throw std::invalid_argument("e_in and e_out must differ");
  VisitSetup st;
  st.in_edge = in_edge;
  st.out_edge = out_edge;
  for (int f : visit_first_edges) {
    const int f2 = g.ccw_next(f);
    if (!g.is_flanking_pair(f, f2)) throw std::invalid_argument("visit edge is not flanked by a straight boundary edge pair");
    const int o1 = offset(f), o2 = offset(f2);
    if (o1 == 0 || o2 == 0 || o1 == out_off || o2 == out_off)
      throw std::invalid_argument("visit pair overlaps e_in or e_out");
    if (o2 < out_off) st.omega.push_back(+1);
    else if (o1 > out_off) st.omega.push_back(-1);
    else throw std::invalid_argument("visit pair straddles e_out");
    st.visit_pairs.emplace_back(f, f2);
  }
  if (omega && *omega != st.omega)
    throw std::invalid_argument("visit order " + visit_order_string(*omega) + " does not match the marked geometry " +
                                visit_order_string(st.omega));
  st.encoding = encode_visit_order(st.omega);
  st.edges.assign(static_cast<std::size_t>(st.encoding.alpha.length()), -1);
  st.edges[st.encoding.in_label - 1] = in_edge;
  st.edges[st.encoding.out_label - 1] = out_edge;
  for (std::size_t s = 0; s < st.visit_pairs.size(); ++s) {
    const int p = st.encoding.pair_start[s];
    st.edges[p - 1] = st.visit_pairs[s].first;
    st.edges[p] = st.visit_pairs[s].second;
  }
  for (std::size_t l = 1; l < st.edges.size(); ++l)
    if (offset(st.edges[l]) <= offset(st.edges[l - 1]))
      throw std::invalid_argument("visit pairs are not in counterclockwise position for their visiting order");
  return st;
}

VisitSetup visit_setup(const GridModel& g, const std::optional<VisitOrder>& omega) {
  int in = -1, out = -1;
  std::vector<int> visits;
  for (const auto& m : g.marks()) {
    switch (m.role) {
      case MarkRole::in:
        if (in >= 0) throw std::invalid_argument("more than one e_in mark");
        in = m.first;
        break;
      case MarkRole::out:
        if (out >= 0) throw std::invalid_argument("more than one e_out mark");
        out = m.first;
        break;
      case MarkRole::visit: visits.push_back(m.first); break;
      case MarkRole::plain: break;
    }
  }
  if (in < 0 || out < 0) throw std::invalid_argument("visit probabilities need one in and one out mark");
  return visit_setup(g, in, out, visits, omega);
}

namespace {

template <class T, class KernelFn>
VisitProbability<T> visit_probability(const VisitSetup& st, const T& delta, KernelFn kernel) {
  const auto base = kernel(st.edges);
  VisitProbability<T> p;
  p.conditioning = base(st.encoding.in_label, st.encoding.out_label);
  if (p.conditioning == T(0)) throw std::logic_error("conditioning event has zero probability");
  p.direct = connectivity_probability(st.encoding.alpha, base).value / p.conditioning;
  const CollapsedSpec spec{st.encoding.alpha, st.encoding.pair_start};
  const auto replaced = replace_derivative_slots(base, st.encoding.pair_start, delta);
  p.replaced_amplitude = collapsed_value(spec, replaced);
  T scale = T(1);
  for (std::size_t s = 0; s < st.visit_pairs.size(); ++s) scale *= delta;
  p.replacing = scale * p.replaced_amplitude / p.conditioning;
  return p;
}

}  // namespace

VisitProbability<Rational> boundary_visit_probability_rational(const GridModel& g, const VisitSetup& st) {
  return visit_probability<Rational>(st, Rational(g.delta()), [&](const std::vector<int>& e) {
    return excursion_kernel_rational(g, e);
  });
}

VisitProbability<double> boundary_visit_probability(const GridModel& g, const VisitSetup& st) {
  return visit_probability<double>(st, g.delta(), [&](const std::vector<int>& e) {
    return excursion_kernel(g, e);
  });
}

DyckPath unnested_pattern(int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += "()";
  return DyckPath::from_string(s);
}

std::vector<int> free_subtree_edges(const GridModel& g, const std::vector<int>& face_first_edges) {
  const int nb = static_cast<int>(g.boundary_edges().size());
  const int n = static_cast<int>(face_first_edges.size());
  if (n < 1) throw std::invalid_argument("need at least one face");
  if (n > kMaxMatrixSize) throw std::invalid_argument("at most 6 faces");
  const int f0 = face_first_edges.front();
  int prev = -1;
  for (int f : face_first_edges) {
    if (!g.is_flanking_pair(f, g.ccw_next(f))) throw std::invalid_argument("face is not flanked by a straight edge pair");
    const int off = ((f - f0) % nb + nb) % nb;
    if (prev >= 0 && off < prev + 2) throw std::invalid_argument("faces must be distinct, non-neighboring and in ccw order");
    prev = off;
  }
  if (n > 1 && prev > nb - 2) throw std::invalid_argument("faces must be distinct, non-neighboring and in ccw order");
  std::vector<int> edges;
  for (int s = 1; s < n; ++s) {
    edges.push_back(g.ccw_next(face_first_edges[s - 1]));
    edges.push_back(face_first_edges[s]);
  }
  edges.push_back(g.ccw_next(face_first_edges[n - 1]));
  edges.push_back(f0);
  return edges;
}

Rational free_subtree_probability_rational(const GridModel& g, const std::vector<int>& faces) {
  const auto edges = free_subtree_edges(g, faces);
  const int n = static_cast<int>(faces.size());
  return Rational(1 << n) * connectivity_probability(unnested_pattern(n), excursion_kernel_rational(g, edges)).value;
}

double free_subtree_probability(const GridModel& g, const std::vector<int>& faces) {
  const auto edges = free_subtree_edges(g, faces);
  const int n = static_cast<int>(faces.size());
  return static_cast<double>(1 << n) * connectivity_probability(unnested_pattern(n), excursion_kernel(g, edges)).value;
}

}  // namespace ustlab
