#include <cmath>

#include "moco/tensor/array.hpp"

namespace moco::tensor {

bool all_finite(const ArrayF64& a) {
    for (double x : a.v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace moco::tensor
