#include <cstdlib>
#include <string>

#include "moco/kern/kernels.hpp"
#include "moco/util/error.hpp"

namespace moco::kern {
namespace {

struct Choice {
    const Kernels* table;
    std::string name;
};

Choice resolve() {
    const char* force = std::getenv("MOCO_KERNEL");
    if (force) {
        std::string f = force;
        if (f == "scalar") return {&scalar_kernels(), "scalar"};
        if (f == "avx2") {
            if (!avx2_available())
                throw UsageError("MOCO_KERNEL=avx2 requested but AVX2 lane is unavailable");
            return {&avx2_kernels(), "avx2"};
        }
        throw UsageError("unknown MOCO_KERNEL value '" + f + "' (expected scalar|avx2)");
    }
    if (avx2_available()) return {&avx2_kernels(), "avx2"};
    return {&scalar_kernels(), "scalar"};
}

const Choice& choice() {
    static const Choice c = resolve();
    return c;
}

}  // namespace

bool avx2_available() {
#if defined(MOCO_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

#if !defined(MOCO_HAVE_AVX2)
const Kernels& avx2_kernels() {
    throw UsageError("AVX2 kernel lane not compiled in");
}
#endif

const Kernels& active() { return *choice().table; }

std::string active_lane_name() { return choice().name; }

}  // namespace moco::kern
