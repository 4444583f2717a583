#pragma once

#include <vector>

#include "moco/problems/instance.hpp"

namespace moco::pareto {

// Bounding box for hypervolume. For minimization ideal < ref componentwise;
// for maximization the roles mirror (ref < ideal) and points are negated
// internally so one sweep serves both orientations.
struct HvFrame {
    std::vector<double> ref;
    std::vector<double> ideal;
    bool maximize = false;
};

// Frame from the standard benchmark table, picking the nearest listed size.
HvFrame default_frame(problems::Problem p, int n, int kappa);

// Exact Lebesgue measure of the region dominated by `points` inside the
// frame box. Points outside the box are clipped to it. 2D: staircase sweep.
// 3D: slab sweep over the third coordinate, O(n^2 log n).
double hypervolume(const std::vector<std::vector<double>>& points, const HvFrame& frame);

// hypervolume / volume of the frame box; in [0,1].
double normalized_hypervolume(const std::vector<std::vector<double>>& points,
                              const HvFrame& frame);

// (hv_ref - hv) / hv_ref; requires hv_ref > 0.
double hv_gap(double hv, double hv_ref);

}  // namespace moco::pareto
