#pragma once

#include <string>
#include <vector>

#include "ustlab/combinatorics.hpp"
#include "ustlab/lattice.hpp"
#include "ustlab/montecarlo.hpp"

namespace ustlab::cli {

// The domain, the primal tree edges (thin, grey) when tree is non-null, the
// given branches (thick, one colour each) and the marked boundary points.
std::string tree_svg(const DomainSpec& spec, const GridModel& g, const TreeSample* tree,
                     const std::vector<std::vector<int>>& branches);

// Tilings drawn as diamonds between the lower and upper Dyck paths, at most
// max_panels of them side by side.
std::string tilings_svg(const std::vector<DyckTiling>& tilings, std::size_t max_panels = 24);

}  // namespace ustlab::cli
