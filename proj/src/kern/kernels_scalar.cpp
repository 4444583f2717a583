#include <cmath>
#include <cstddef>

#include "moco/kern/kernels.hpp"

namespace moco::kern {
namespace {

void s_add(const double* a, const double* b, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void s_sub(const double* a, const double* b, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void s_mul(const double* a, const double* b, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void s_scale(const double* a, double s, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] * s;
}

void s_add_scalar(const double* a, double s, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] + s;
}

void s_axpy(double a, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double s_dot(const double* a, const double* b, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double s_sum(const double* a, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += a[i];
    return acc;
}

double s_max(const double* a, size_t n) {
    double m = a[0];
    for (size_t i = 1; i < n; ++i)
        if (a[i] > m) m = a[i];
    return m;
}

void s_moments(const double* a, size_t n, double* mean, double* var) {
    double mu = s_sum(a, n) / static_cast<double>(n);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = a[i] - mu;
        acc += d * d;
    }
    *mean = mu;
    *var = acc / static_cast<double>(n);
}

void s_relu(const double* a, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void s_gemm(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
            double alpha, const double* a, const double* b, double beta, double* c) {
    for (size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        if (beta == 0.0)
            for (size_t j = 0; j < n; ++j) crow[j] = 0.0;
        for (size_t p = 0; p < k; ++p) {
            double av = trans_a ? a[p * m + i] : a[i * k + p];
            double s = alpha * av;
            if (trans_b) {
                for (size_t j = 0; j < n; ++j) crow[j] += s * b[j * k + p];
            } else {
                const double* brow = b + p * n;
                for (size_t j = 0; j < n; ++j) crow[j] += s * brow[j];
            }
        }
    }
}

void s_adam(double* p, const double* g, double* m, double* v, size_t n,
            double lr, double beta1, double beta2, double eps, double wd,
            double bc1, double bc2) {
    for (size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        double mhat = m[i] * bc1;
        double vhat = v[i] * bc2;
        p[i] *= 1.0 - lr * wd;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void s_vexp(const double* a, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = std::exp(a[i]);
}

void s_vlog(const double* a, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = std::log(a[i]);
}

void s_vtanh(const double* a, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = std::tanh(a[i]);
}

void s_vsigmoid(const double* a, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-a[i]));
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k = {
        s_add,  s_sub,     s_mul,  s_scale, s_add_scalar, s_axpy, s_dot,
        s_sum,  s_max,     s_moments, s_relu, s_gemm,     s_adam, s_vexp,
        s_vlog, s_vtanh,   s_vsigmoid,
    };
    return k;
}

}  // namespace moco::kern
