#pragma once

#include <vector>

#include "moco/problems/instance.hpp"

namespace moco::infer {

// One unit-square isometry index per objective coordinate set:
// 0:(x,y) 1:(y,x) 2:(x,1-y) 3:(y,1-x) 4:(1-x,y) 5:(1-y,x) 6:(1-x,1-y) 7:(1-y,1-x)
using AugmentTransform = std::vector<int>;

// Number of coordinate sets carrying a transform (motsp: kappa, mocvrp: 1).
int transform_arity(problems::Problem p, int kappa);

// All 8^arity transforms in lexicographic order; identity first.
std::vector<AugmentTransform> enumerate_transforms(problems::Problem p, int kappa);

// Applies each objective's map to its coordinate pair; demands, weights, and
// capacities are untouched. mokp has no coordinates and is rejected.
problems::Instance apply_transform(const problems::Instance& inst,
                                   const AugmentTransform& t);

}  // namespace moco::infer
