#pragma once

#include <stdexcept>
#include <vector>

namespace item {

// Piecewise-linear lookup with clamped extrapolation. Breakpoints must be
// strictly increasing.
class Table1D {
public:
    Table1D() = default;
    Table1D(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        if (x_.size() != y_.size() || x_.empty())
            throw std::invalid_argument("Table1D: mismatched or empty data");
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (x_[i] <= x_[i - 1])
                throw std::invalid_argument("Table1D: breakpoints not increasing");
    }

    static Table1D constant(double value) { return Table1D({0.0}, {value}); }

    double operator()(double x) const {
        if (x_.size() == 1) return y_[0];
        if (x <= x_.front()) return y_.front();
        if (x >= x_.back()) return y_.back();
        std::size_t hi = 1;
        while (x_[hi] < x) ++hi;
        const double t = (x - x_[hi - 1]) / (x_[hi] - x_[hi - 1]);
        return y_[hi - 1] + t * (y_[hi] - y_[hi - 1]);
    }

    const std::vector<double>& breakpoints() const { return x_; }
    const std::vector<double>& values() const { return y_; }
    bool empty() const { return x_.empty(); }

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

}  // namespace item
