#pragma once

#include <cstddef>
#include <string>

namespace moco::kern {

// Flat f64 kernels behind one dispatch table. A scalar reference lane always
// exists; an AVX2+FMA lane is selected at runtime when the CPU supports it
// (override with MOCO_KERNEL=scalar|avx2). Transcendental maps use libm in
// both lanes, so lanes differ only by reassociation in reductions.
struct Kernels {
    void (*add)(const double* a, const double* b, double* out, size_t n);
    void (*sub)(const double* a, const double* b, double* out, size_t n);
    void (*mul)(const double* a, const double* b, double* out, size_t n);
    void (*scale)(const double* a, double s, double* out, size_t n);
    void (*add_scalar)(const double* a, double s, double* out, size_t n);
    void (*axpy)(double a, const double* x, double* y, size_t n);  // y += a*x
    double (*dot)(const double* a, const double* b, size_t n);
    double (*sum)(const double* a, size_t n);
    double (*max)(const double* a, size_t n);  // n >= 1
    void (*moments)(const double* a, size_t n, double* mean, double* var);  // population var, two-pass
    void (*relu)(const double* a, double* out, size_t n);
    // C[MxN] = alpha*op(A)op(B) + beta*C, row-major, beta in {0,1}.
    void (*gemm)(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
                 double alpha, const double* a, const double* b, double beta, double* c);
    // AdamW step; bc1 = 1/(1-beta1^t), bc2 = 1/(1-beta2^t).
    void (*adam)(double* p, const double* g, double* m, double* v, size_t n,
                 double lr, double beta1, double beta2, double eps, double wd,
                 double bc1, double bc2);
    void (*vexp)(const double* a, double* out, size_t n);
    void (*vlog)(const double* a, double* out, size_t n);
    void (*vtanh)(const double* a, double* out, size_t n);
    void (*vsigmoid)(const double* a, double* out, size_t n);
};

const Kernels& scalar_kernels();
bool avx2_available();             // compiled in and supported by this CPU
const Kernels& avx2_kernels();     // valid only if avx2_available()
const Kernels& active();           // resolved once per process
std::string active_lane_name();

}  // namespace moco::kern
