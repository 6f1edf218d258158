#include <immintrin.h>

#include "item/kernels.hpp"

namespace item::kernels {
namespace {

inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double s = hsum256(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_avx2(const double* w, const double* x, const double* b, double* y,
                 std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        y[r] = (b ? b[r] : 0.0) + dot_avx2(w + r * cols, x, cols);
    }
}

void matvec_t_avx2(const double* w, const double* x, double* y,
                   std::size_t rows, std::size_t cols) {
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) _mm256_storeu_pd(y + c, _mm256_setzero_pd());
    for (; c < cols; ++c) y[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) axpy_avx2(x[r], w + r * cols, y, cols);
}

void outer_acc_avx2(double* g, const double* d, const double* x,
                    std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) axpy_avx2(d[r], x, g + r * cols, cols);
}

void relu_avx2(double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_max_pd(zero, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i)
        if (x[i] < 0.0) x[i] = 0.0;
}

void relu_backward_avx2(const double* pre, double* grad, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(pre + i), zero, _CMP_GT_OQ);
        _mm256_storeu_pd(grad + i, _mm256_and_pd(mask, _mm256_loadu_pd(grad + i)));
    }
    for (; i < n; ++i)
        if (pre[i] <= 0.0) grad[i] = 0.0;
}

}  // namespace

const Backend& avx2_backend() {
    static const Backend b{"avx2",         dot_avx2,  axpy_avx2,
                           matvec_avx2,    matvec_t_avx2,
                           outer_acc_avx2, relu_avx2, relu_backward_avx2};
    return b;
}

}  // namespace item::kernels
