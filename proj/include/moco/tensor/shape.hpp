#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>

#include "moco/util/error.hpp"

namespace moco::tensor {

// Dense row-major shape, rank 0 (scalar) through 4.
struct Shape {
    std::array<int64_t, 4> d{1, 1, 1, 1};
    int rank = 0;

    Shape() = default;
    Shape(std::initializer_list<int64_t> dims) {
        if (dims.size() > 4) throw DataError("shape rank > 4");
        rank = static_cast<int>(dims.size());
        int i = 0;
        for (int64_t v : dims) {
            if (v <= 0) throw DataError("shape dim must be positive, got " + std::to_string(v));
            d[i++] = v;
        }
    }

    int64_t operator[](int i) const { return d[i]; }

    int64_t numel() const {
        int64_t n = 1;
        for (int i = 0; i < rank; ++i) n *= d[i];
        return n;
    }

    bool operator==(const Shape& o) const {
        if (rank != o.rank) return false;
        for (int i = 0; i < rank; ++i)
            if (d[i] != o.d[i]) return false;
        return true;
    }
    bool operator!=(const Shape& o) const { return !(*this == o); }

    // Sizes before, at, and after `axis`, for axis-wise loops.
    void split(int axis, int64_t* outer, int64_t* len, int64_t* inner) const {
        *outer = 1;
        *inner = 1;
        for (int i = 0; i < axis; ++i) *outer *= d[i];
        *len = d[axis];
        for (int i = axis + 1; i < rank; ++i) *inner *= d[i];
    }

    std::string str() const {
        std::string s = "[";
        for (int i = 0; i < rank; ++i) {
            if (i) s += ",";
            s += std::to_string(d[i]);
        }
        return s + "]";
    }
};

}  // namespace moco::tensor
