#pragma once

#include <memory>
#include <string>
#include <vector>

#include "moco/tensor/array.hpp"

namespace moco::tensor {

// Persistent named parameter with gradient accumulator and Adam state.
// Parameter data is read-shared across graphs; gradients accumulate when
// graphs run backward (serialized by the caller).
struct Parameter {
    std::string name;
    ArrayF64 data;
    ArrayF64 grad;
    ArrayF64 adam_m;
    ArrayF64 adam_v;

    Parameter(std::string n, Shape s)
        : name(std::move(n)), data(s), grad(s), adam_m(s), adam_v(s) {}

    void zero_grad() { grad.fill(0.0); }
};

// Parameters in registration order; the order fixes init draws, checkpoint
// layout, and gradient statistics.
class ParamStore {
public:
    Parameter& add(std::string name, Shape shape) {
        for (const auto& p : params_)
            if (p->name == name) throw DataError("duplicate parameter name: " + name);
        params_.push_back(std::make_unique<Parameter>(std::move(name), shape));
        return *params_.back();
    }

    Parameter* find(const std::string& name) {
        for (const auto& p : params_)
            if (p->name == name) return p.get();
        return nullptr;
    }

    size_t size() const { return params_.size(); }
    Parameter& operator[](size_t i) { return *params_[i]; }
    const Parameter& operator[](size_t i) const { return *params_[i]; }

    int64_t total_numel() const {
        int64_t n = 0;
        for (const auto& p : params_) n += p->data.numel();
        return n;
    }

    void zero_grad() {
        for (const auto& p : params_) p->zero_grad();
    }

private:
    std::vector<std::unique_ptr<Parameter>> params_;
};

}  // namespace moco::tensor
