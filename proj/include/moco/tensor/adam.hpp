#pragma once

#include <cstdint>

#include "moco/tensor/param.hpp"

namespace moco::tensor {

struct AdamConfig {
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-6;  // decoupled
};

// Adam with decoupled weight decay and bias correction.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(ParamStore& params);
    int64_t steps_taken() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    int64_t step_ = 0;
};

}  // namespace moco::tensor
