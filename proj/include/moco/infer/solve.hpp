#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "moco/decomp/scalarize.hpp"
#include "moco/model/policy.hpp"
#include "moco/pareto/archive.hpp"
#include "moco/pareto/hypervolume.hpp"

namespace moco::infer {

struct FrontResult {
    pareto::ParetoArchive archive;
    // Per weight vector: the kept rollout's objective vector (raw
    // orientation, evaluated on the original instance) and scalarized value.
    std::vector<std::vector<double>> per_weight_objectives;
    std::vector<double> per_weight_scalarized;
};

// One greedy rollout per weight vector (plus one per augmentation variant
// when augment is set); keeps the best-scalarized solution per weight and
// archives all kept objective vectors. mokp never augments. `pool_augmented`
// additionally inserts every augmented rollout into the archive instead of
// only the per-weight winners.
FrontResult solve_front(model::Policy& policy, const problems::Instance& inst,
                        const std::vector<std::vector<double>>& weights,
                        const decomp::ScalarizationConfig& scal, bool augment,
                        bool pool_augmented = false);

struct EvalReport {
    double mean_hv = 0.0;
    double gap = std::numeric_limits<double>::quiet_NaN();  // NaN when no reference
    int n_instances = 0;
    int n_weights = 0;
    bool augment = false;
    int64_t wall_ms = -1;  // -1 -> unreported
    std::vector<double> per_instance_hv;
};

// Mean normalized hypervolume over a dataset; gap against hv_ref when given
// (pass NaN to skip).
EvalReport evaluate_model(model::Policy& policy,
                          const std::vector<problems::Instance>& dataset,
                          const std::vector<std::vector<double>>& weights,
                          const decomp::ScalarizationConfig& scal,
                          const pareto::HvFrame& frame, double hv_ref, bool augment,
                          int threads, bool pool_augmented = false);

}  // namespace moco::infer
