#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ustlab/combinatorics.hpp"
#include "ustlab/lattice.hpp"

namespace ustlab {

// SplitMix64 stream: the state is a counter, so stream k of a master seed is
// independent of how many draws other streams made.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next();
  double uniform();                          // [0, 1)
  std::uint32_t below(std::uint32_t bound);  // uniform on 0..bound-1, bound > 0

 private:
  std::uint64_t state_;
};

// Chronological loop-erasure: whenever the walk returns to a vertex already on
// the erased path, the loop is cut.
std::vector<int> loop_erase(const std::vector<int>& walk);

struct TreeSample {
  // For every vertex the edge toward the wired boundary; -1 on boundary
  // vertices and on interior vertices not reached by a partial sample.
  std::vector<int> parent_edge;
  std::uint64_t stream = 0;

  std::vector<int> edges() const;
};

// Wilson's algorithm rooted at the wired boundary. Starts are processed first
// (in the given order), then the remaining interior vertices row by row.
// With partial = true only the starts are processed, which already fixes their
// branches.
TreeSample wilson_sample(const GridModel& g, RngStream& rng, const std::vector<int>& starts = {}, bool partial = false);

// Edges of the branch from an interior vertex, ending with the boundary edge.
std::vector<int> tree_branch(const GridModel& g, const TreeSample& t, int vertex);

struct ConnectivityEvent {
  OrientedLinkPattern pattern;
  std::vector<int> edges;  // boundary edge index per label
};

struct VisitEvent {
  int in_edge = 0;
  int out_edge = 0;
  std::vector<std::pair<int, int>> visit_pairs;  // flanking pairs in visiting order
};

bool event_indicator(const GridModel& g, const TreeSample& t, const ConnectivityEvent& ev);
// True iff the branch from e_in° exits through e_out and uses the visit edges in order.
bool event_indicator(const GridModel& g, const TreeSample& t, const VisitEvent& ev);

struct Estimate {
  std::string event;
  std::uint64_t n = 0;
  std::uint64_t hits = 0;
  double p_hat = 0;
  double std_error = 0;
  std::uint64_t seed = 0;
  int workers = 1;
};

Estimate make_estimate(std::string event, std::uint64_t n, std::uint64_t hits, std::uint64_t seed, int workers);

// Unconditioned connectivity probability from Wilson samples.
Estimate estimate(const GridModel& g, const ConnectivityEvent& ev, std::uint64_t n, std::uint64_t seed, int workers = 1);
// Conditional visit probability given e_in ⇝ e_out. The branch is sampled
// directly as the loop-erasure of the walk from e_in° conditioned to exit
// through e_out (Doob transform with h(v) = H_v(e_out)).
Estimate estimate(const GridModel& g, const VisitEvent& ev, std::uint64_t n, std::uint64_t seed, int workers = 1);

// One conditioned walk from e_in° (vertex sequence, ending at the outer vertex
// of e_out) and the edges of its loop-erasure.
struct ConditionedBranch {
  std::vector<int> walk;
  std::vector<int> erased_edges;
  int exit_edge = -1;
};
ConditionedBranch sample_conditioned_branch(const GridModel& g, const std::vector<double>& h, int in_edge, int out_edge,
                                            RngStream& rng);

// Worker count from USTLAB_WORKERS, else the hardware concurrency.
int default_workers();

}  // namespace ustlab
