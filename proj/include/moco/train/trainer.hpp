#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "moco/decomp/scalarize.hpp"
#include "moco/model/policy.hpp"
#include "moco/tensor/adam.hpp"

namespace moco::train {

struct TrainConfig {
    problems::Problem problem = problems::Problem::motsp;
    int kappa = 2;
    int n_nodes = 10;
    std::string algorithm = "pl";  // pl | reinforce
    int batch = 16;                // subproblems per step
    int k_samples = 2;             // rollouts per subproblem
    double beta = 0.0;             // 0 -> 3.5 for kappa 2, 4.5 for kappa 3
    int steps = 2000;
    int validate_every = 200;
    int val_instances = 64;
    int weight_h = 10;             // validation weight lattice resolution
    decomp::Scalarization scheme = decomp::Scalarization::weighted_sum;
    double pbi_alpha = 5.0;
    tensor::AdamConfig adam;
    uint64_t seed = 1;
    int threads = 1;
    bool timings = false;
    model::ModelConfig model;

    double resolved_beta() const {
        if (beta > 0.0) return beta;
        return kappa == 3 ? 4.5 : 3.5;
    }
    void validate() const;
};

// One metrics CSV row; NaN / -1 mean "field left empty".
struct MetricsRow {
    int step = 0;
    std::string algorithm;
    double loss = std::numeric_limits<double>::quiet_NaN();
    double val_hv = std::numeric_limits<double>::quiet_NaN();
    double grad_variance = std::numeric_limits<double>::quiet_NaN();
    int64_t wall_ms = -1;
};

struct TrainResult {
    std::vector<MetricsRow> rows;
    std::vector<std::pair<int, double>> val_curve;  // (step, mean normalized HV)
    double initial_hv = 0.0;
    double final_hv = 0.0;
};

// Runs the full optimization loop; the policy is updated in place.
TrainResult train(model::Policy& policy, const TrainConfig& cfg);

// Mean normalized hypervolume over the held-out validation set (greedy
// decoding, full structured weight set).
double validate_policy(model::Policy& policy, const TrainConfig& cfg);

// Gradient-variance probe: `batches` batches, both algorithms from identical
// initialization and rollouts, no parameter updates. Rows ordered
// (batch 0: pl, reinforce), (batch 1: ...).
struct VarianceRow {
    int batch = 0;
    std::string algorithm;
    double variance = 0.0;
};
std::vector<VarianceRow> gradient_variance_probe(model::Policy& policy,
                                                 const TrainConfig& cfg, int batches);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

}  // namespace moco::train
