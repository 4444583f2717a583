#pragma once

#include <span>
#include <vector>

namespace moco::train {

// Preference pair over indices into one subproblem's K trajectories. Pairs
// are oriented so the winner has the lower scalarized value; exact ties
// produce no pair, so y is always 1 for constructed pairs.
struct PreferencePair {
    int winner = 0;
    int loser = 0;
    double y = 1.0;
};

// All K(K-1)/2 unordered pairs of distinct scalarized values.
std::vector<PreferencePair> build_pairs(std::span<const double> scalarized);

}  // namespace moco::train
