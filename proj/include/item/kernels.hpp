#pragma once

#include <cstddef>
#include <string>

// Dense double-precision kernels used by the MLP forward/backward paths.
// A scalar reference implementation is always available; an AVX2 variant is
// selected at startup when the CPU supports it. Backends are equivalence
// tested against each other.
namespace item::kernels {

struct Backend {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y = W x + b, W row-major (rows x cols)
    void (*matvec)(const double* w, const double* x, const double* b, double* y,
                   std::size_t rows, std::size_t cols);
    // y = W^T x, W row-major (rows x cols), x length rows, y length cols
    void (*matvec_t)(const double* w, const double* x, double* y,
                     std::size_t rows, std::size_t cols);
    // G += d * x^T (rank-1 update, G row-major rows x cols)
    void (*outer_acc)(double* g, const double* d, const double* x,
                      std::size_t rows, std::size_t cols);
    void (*relu)(double* x, std::size_t n);
    // grad[i] = pre[i] > 0 ? grad[i] : 0
    void (*relu_backward)(const double* pre, double* grad, std::size_t n);
};

const Backend& scalar_backend();
#if defined(ITEM_BUILD_AVX2)
const Backend& avx2_backend();
#endif

// Active backend, chosen at first use from CPU capabilities.
const Backend& active();
const char* active_name();

// Force a backend by name ("scalar", "avx2"); throws on unknown/unavailable.
void force(const std::string& name);

inline double dot(const double* a, const double* b, std::size_t n) {
    return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active().axpy(alpha, x, y, n);
}
inline void matvec(const double* w, const double* x, const double* b, double* y,
                   std::size_t rows, std::size_t cols) {
    active().matvec(w, x, b, y, rows, cols);
}
inline void matvec_t(const double* w, const double* x, double* y,
                     std::size_t rows, std::size_t cols) {
    active().matvec_t(w, x, y, rows, cols);
}
inline void outer_acc(double* g, const double* d, const double* x,
                      std::size_t rows, std::size_t cols) {
    active().outer_acc(g, d, x, rows, cols);
}
inline void relu(double* x, std::size_t n) { active().relu(x, n); }
inline void relu_backward(const double* pre, double* grad, std::size_t n) {
    active().relu_backward(pre, grad, n);
}

}  // namespace item::kernels
