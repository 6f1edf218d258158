#include "item/kernels.hpp"

namespace item::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_scalar(const double* w, const double* x, const double* b, double* y,
                   std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double s = b ? b[r] : 0.0;
        const double* wr = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) s += wr[c] * x[c];
        y[r] = s;
    }
}

void matvec_t_scalar(const double* w, const double* x, double* y,
                     std::size_t rows, std::size_t cols) {
    for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double* wr = w + r * cols;
        const double xr = x[r];
        for (std::size_t c = 0; c < cols; ++c) y[c] += wr[c] * xr;
    }
}

void outer_acc_scalar(double* g, const double* d, const double* x,
                      std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        double* gr = g + r * cols;
        const double dr = d[r];
        for (std::size_t c = 0; c < cols; ++c) gr[c] += dr * x[c];
    }
}

void relu_scalar(double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] < 0.0) x[i] = 0.0;
}

void relu_backward_scalar(const double* pre, double* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (pre[i] <= 0.0) grad[i] = 0.0;
}

}  // namespace

const Backend& scalar_backend() {
    static const Backend b{"scalar",         dot_scalar,  axpy_scalar,
                           matvec_scalar,    matvec_t_scalar,
                           outer_acc_scalar, relu_scalar, relu_backward_scalar};
    return b;
}

}  // namespace item::kernels
