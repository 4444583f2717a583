#include "moco/infer/augment.hpp"
#include "moco/util/error.hpp"

namespace moco::infer {

using problems::Problem;

namespace {
void map_xy(int which, double x, double y, double* ox, double* oy) {
    switch (which) {
        case 0: *ox = x;       *oy = y;       return;
        case 1: *ox = y;       *oy = x;       return;
        case 2: *ox = x;       *oy = 1.0 - y; return;
        case 3: *ox = y;       *oy = 1.0 - x; return;
        case 4: *ox = 1.0 - x; *oy = y;       return;
        case 5: *ox = 1.0 - y; *oy = x;       return;
        case 6: *ox = 1.0 - x; *oy = 1.0 - y; return;
        case 7: *ox = 1.0 - y; *oy = 1.0 - x; return;
    }
    throw DataError("transform index must lie in [0, 8)");
}
}  // namespace

int transform_arity(Problem p, int kappa) {
    switch (p) {
        case Problem::motsp: return kappa;
        case Problem::mocvrp: return 1;
        case Problem::mokp:
            throw DataError("mokp has no coordinates to transform");
    }
    return 0;
}

std::vector<AugmentTransform> enumerate_transforms(Problem p, int kappa) {
    int arity = transform_arity(p, kappa);
    size_t count = 1;
    for (int i = 0; i < arity; ++i) count *= 8;
    std::vector<AugmentTransform> out;
    out.reserve(count);
    AugmentTransform t(static_cast<size_t>(arity), 0);
    for (size_t i = 0; i < count; ++i) {
        size_t rest = i;
        for (int j = arity - 1; j >= 0; --j) {
            t[static_cast<size_t>(j)] = static_cast<int>(rest % 8);
            rest /= 8;
        }
        out.push_back(t);
    }
    return out;
}

problems::Instance apply_transform(const problems::Instance& inst,
                                   const AugmentTransform& t) {
    int arity = transform_arity(inst.problem, inst.kappa);
    if (static_cast<int>(t.size()) != arity)
        throw DataError("transform has " + std::to_string(t.size()) +
                        " maps, expected " + std::to_string(arity));
    problems::Instance out = inst;
    int fd = inst.feat_dim();
    for (int i = 0; i < inst.n; ++i) {
        for (int j = 0; j < arity; ++j) {
            int off = i * fd + 2 * j;
            map_xy(t[static_cast<size_t>(j)], inst.features[static_cast<size_t>(off)],
                   inst.features[static_cast<size_t>(off + 1)],
                   &out.features[static_cast<size_t>(off)],
                   &out.features[static_cast<size_t>(off + 1)]);
        }
    }
    return out;
}

}  // namespace moco::infer
