#include <cmath>
#include <cstddef>
#include <immintrin.h>

#include "moco/kern/kernels.hpp"

namespace moco::kern {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, shuf));
}

void v_add(const double* a, const double* b, double* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void v_sub(const double* a, const double* b, double* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void v_mul(const double* a, const double* b, double* out, size_t n) {
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void v_scale(const double* a, double s, double* out, size_t n) {
    __m256d vs = _mm256_set1_pd(s);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
    for (; i < n; ++i) out[i] = a[i] * s;
}

void v_add_scalar(const double* a, double s, double* out, size_t n) {
    __m256d vs = _mm256_set1_pd(s);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), vs));
    for (; i < n; ++i) out[i] = a[i] + s;
}

void v_axpy(double a, const double* x, double* y, size_t n) {
    __m256d va = _mm256_set1_pd(a);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += a * x[i];
}

double v_dot(const double* a, const double* b, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i] * b[i];
    return r;
}

double v_sum(const double* a, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i];
    return r;
}

double v_max(const double* a, size_t n) {
    size_t i = 0;
    double r;
    if (n >= 4) {
        __m256d acc = _mm256_loadu_pd(a);
        i = 4;
        for (; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(a + i));
        r = hmax(acc);
    } else {
        r = a[0];
        i = 1;
    }
    for (; i < n; ++i)
        if (a[i] > r) r = a[i];
    return r;
}

void v_moments(const double* a, size_t n, double* mean, double* var) {
    double mu = v_sum(a, n) / static_cast<double>(n);
    __m256d vmu = _mm256_set1_pd(mu);
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), vmu);
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        double d = a[i] - mu;
        s += d * d;
    }
    *mean = mu;
    *var = s / static_cast<double>(n);
}

void v_relu(const double* a, double* out, size_t n) {
    __m256d zero = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_loadu_pd(a + i), zero));
    for (; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void v_gemm(bool trans_a, bool trans_b, size_t m, size_t n, size_t k,
            double alpha, const double* a, const double* b, double beta, double* c) {
    for (size_t i = 0; i < m; ++i) {
        double* crow = c + i * n;
        if (beta == 0.0)
            for (size_t j = 0; j < n; ++j) crow[j] = 0.0;
        if (trans_b) {
            for (size_t j = 0; j < n; ++j) {
                double acc = 0.0;
                if (trans_a) {
                    const double* brow = b + j * k;
                    for (size_t p = 0; p < k; ++p) acc += a[p * m + i] * brow[p];
                } else {
                    acc = v_dot(a + i * k, b + j * k, k);
                }
                crow[j] += alpha * acc;
            }
        } else {
            for (size_t p = 0; p < k; ++p) {
                double av = trans_a ? a[p * m + i] : a[i * k + p];
                v_axpy(alpha * av, b + p * n, crow, n);
            }
        }
    }
}

void v_adam(double* p, const double* g, double* m, double* v, size_t n,
            double lr, double beta1, double beta2, double eps, double wd,
            double bc1, double bc2) {
    __m256d vb1 = _mm256_set1_pd(beta1), vb1c = _mm256_set1_pd(1.0 - beta1);
    __m256d vb2 = _mm256_set1_pd(beta2), vb2c = _mm256_set1_pd(1.0 - beta2);
    __m256d vbc1 = _mm256_set1_pd(bc1), vbc2 = _mm256_set1_pd(bc2);
    __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
    __m256d vdecay = _mm256_set1_pd(1.0 - lr * wd);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d gi = _mm256_loadu_pd(g + i);
        __m256d mi = _mm256_fmadd_pd(vb1c, gi, _mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)));
        __m256d vi = _mm256_fmadd_pd(vb2c, _mm256_mul_pd(gi, gi),
                                     _mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        __m256d mhat = _mm256_mul_pd(mi, vbc1);
        __m256d vhat = _mm256_mul_pd(vi, vbc2);
        __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
        __m256d pi = _mm256_mul_pd(_mm256_loadu_pd(p + i), vdecay);
        pi = _mm256_sub_pd(pi, _mm256_mul_pd(vlr, _mm256_div_pd(mhat, denom)));
        _mm256_storeu_pd(p + i, pi);
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        double mhat = m[i] * bc1;
        double vhat = v[i] * bc2;
        p[i] *= 1.0 - lr * wd;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void v_vexp(const double* a, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = std::exp(a[i]);
}

void v_vlog(const double* a, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = std::log(a[i]);
}

void v_vtanh(const double* a, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = std::tanh(a[i]);
}

void v_vsigmoid(const double* a, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-a[i]));
}

}  // namespace

const Kernels& avx2_kernels() {
    static const Kernels k = {
        v_add,  v_sub,   v_mul,  v_scale, v_add_scalar, v_axpy, v_dot,
        v_sum,  v_max,   v_moments, v_relu, v_gemm,     v_adam, v_vexp,
        v_vlog, v_vtanh, v_vsigmoid,
    };
    return k;
}

}  // namespace moco::kern
