#include <cmath>

#include "moco/kern/kernels.hpp"
#include "moco/tensor/adam.hpp"

namespace moco::tensor {

void Adam::step(ParamStore& params) {
    ++step_;
    double bc1 = 1.0 / (1.0 - std::pow(cfg_.beta1, static_cast<double>(step_)));
    double bc2 = 1.0 / (1.0 - std::pow(cfg_.beta2, static_cast<double>(step_)));
    const auto& k = kern::active();
    for (size_t i = 0; i < params.size(); ++i) {
        Parameter& p = params[i];
        k.adam(p.data.data(), p.grad.data(), p.adam_m.data(), p.adam_v.data(),
               static_cast<size_t>(p.data.numel()), cfg_.lr, cfg_.beta1, cfg_.beta2, cfg_.eps,
               cfg_.weight_decay, bc1, bc2);
    }
}

}  // namespace moco::tensor
