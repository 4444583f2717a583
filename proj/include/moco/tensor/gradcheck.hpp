#pragma once

#include <functional>
#include <string>
#include <vector>

#include "moco/tensor/graph.hpp"

namespace moco::tensor {

struct FiniteDiffResult {
    double max_rel_err = 0.0;
    std::string worst_param;
    int64_t worst_index = -1;
    double analytic = 0.0;
    double numeric = 0.0;
};

// Central-difference check of reverse-mode gradients. `f` rebuilds a scalar
// graph from the current parameter data; every parameter coordinate is
// perturbed by +-h. Relative error per coordinate is
// |analytic - numeric| / max(1, |analytic|). `inject` adds a constant to the
// first analytic gradient entry, emulating a broken backward rule so callers
// can prove the check actually fails on wrong gradients.
FiniteDiffResult finite_diff_check(const std::function<Value(Graph&)>& f, ParamStore& params,
                                   double h = 1e-6, double inject = 0.0);

struct GradCheckCase {
    std::string name;
    double rel_err = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// One finite-difference case per tensor primitive (axis variants included).
// `inject_fault` corrupts one analytic gradient to prove the check can fail.
std::vector<GradCheckCase> run_primitive_gradchecks(uint64_t seed, bool inject_fault = false,
                                                    double tol = 1e-5);

}  // namespace moco::tensor
