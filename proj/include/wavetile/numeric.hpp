#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavetile {

using cdouble = std::complex<double>;

// Pairwise tree reduction. All large accumulations go through this so that
// reports are bit-stable regardless of how the terms were produced.
template <typename T>
T pairwise_sum(std::span<const T> terms) {
    const std::size_t n = terms.size();
    if (n == 0) return T{};
    if (n <= 8) {
        T acc{};
        for (const T& t : terms) acc += t;
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(terms.subspan(0, half)) + pairwise_sum(terms.subspan(half));
}

template <typename T>
T pairwise_sum(const std::vector<T>& terms) {
    return pairwise_sum(std::span<const T>(terms));
}

inline bool close_rel(double a, double b, double tol) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= tol * scale;
}

inline bool close_abs(double a, double b, double tol) { return std::abs(a - b) <= tol; }

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a packet quadrature cannot meet the requested tolerance;
// carries the bound that was actually achieved.
struct AccuracyError : std::runtime_error {
    double achieved;
    explicit AccuracyError(const std::string& what, double achieved_bound)
        : std::runtime_error(what), achieved(achieved_bound) {}
};

} // namespace wavetile
