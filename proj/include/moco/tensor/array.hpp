#pragma once

#include <vector>

#include "moco/tensor/shape.hpp"

namespace moco::tensor {

// Dense row-major f64 buffer.
struct ArrayF64 {
    Shape shape;
    std::vector<double> v;

    ArrayF64() = default;
    explicit ArrayF64(Shape s) : shape(s), v(static_cast<size_t>(s.numel()), 0.0) {}
    ArrayF64(Shape s, std::vector<double> data) : shape(s), v(std::move(data)) {
        if (static_cast<int64_t>(v.size()) != shape.numel())
            throw DataError("array data size " + std::to_string(v.size()) +
                            " does not match shape " + shape.str());
    }

    bool empty() const { return v.empty(); }
    int64_t numel() const { return shape.numel(); }
    double* data() { return v.data(); }
    const double* data() const { return v.data(); }
    double& at(int64_t i) { return v[static_cast<size_t>(i)]; }
    double at(int64_t i) const { return v[static_cast<size_t>(i)]; }

    void fill(double x) { std::fill(v.begin(), v.end(), x); }
};

inline ArrayF64 scalar_array(double x) {
    ArrayF64 a(Shape{});
    a.v.assign(1, x);
    return a;
}

bool all_finite(const ArrayF64& a);

}  // namespace moco::tensor
