#pragma once

#include <cmath>
#include <cstddef>

#include "wavetile/numeric.hpp"

namespace wavetile {

// Smooth profiles shared by the multipliers, the kernel pieces and the tests.
//
// Everything is built from the C-infinity step
//     step(t) = g(t) / (g(t) + g(1-t)),  g(t) = exp(-1/t) for t > 0,
// which is 0 for t <= 0 and 1 for t >= 1 and has square-root-smooth powers.
namespace bumps {

// The 3/4 power tempers the step so the packet tails drop fast enough for
// the measured shell decay while the kernel truncation stays within
// tolerance.
inline double g_exp(double t) {
    return t > 0.0 ? std::exp(-1.0 / std::pow(t, 0.75)) : 0.0;
}

inline double step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = g_exp(t);
    const double b = g_exp(1.0 - t);
    return a / (a + b);
}

// Plateau on [-1,1], support [-2,2], even. Squared so the square root used
// for the packet symbols is itself the smooth step.
inline double beta(double x) {
    const double r = step(2.0 - std::abs(x));
    return r * r;
}

inline double beta_sqrt(double x) { return step(2.0 - std::abs(x)); }

// Band profile: plateau on [1,2], support [1/2, 5/2].
inline double beta_band(double x) {
    const double r = step(2.0 * x - 1.0) * step(5.0 - 2.0 * x);
    return r * r;
}

inline double beta_band_sqrt(double x) {
    return step(2.0 * x - 1.0) * step(5.0 - 2.0 * x);
}

// Kernel profile: plateau on [0.99, 1.01], support [0.98, 1.02].
inline double kernel_profile(double z) {
    return step((z - 0.98) / 0.01) * step((1.02 - z) / 0.01);
}

// Shifted partition window S with sum_{k in Z} S(y - k) = 1, support [-1,1],
// S(0) = 1. Used by the multiplier-side reconstruction to tile the kernel
// scales exactly.
inline double partition_window(double y) { return step(y + 1.0) - step(y); }

// Composite Simpson integral of a profile on [lo, hi].
template <typename F>
double integrate(F&& f, double lo, double hi, int panels = 4096) {
    const double h = (hi - lo) / panels;
    double acc = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * h);
    return acc * h / 3.0;
}

inline double beta_l1() {
    static const double value = integrate(beta, -2.0, 2.0, 1 << 16);
    return value;
}

// Machine-accurate cumulative integral of beta on [-2, 2], via a prefix table
// of per-interval 5-point Gauss quadratures. B(t) = integral from -2 to t.
class BetaCumulative {
public:
    static const BetaCumulative& instance() {
        static const BetaCumulative self;
        return self;
    }

    double operator()(double t) const {
        if (t <= -2.0) return 0.0;
        if (t >= 2.0) return prefix_.back();
        const double pos = (t + 2.0) / h_;
        const std::size_t idx = std::min(static_cast<std::size_t>(pos), prefix_.size() - 2);
        const double left = -2.0 + idx * h_;
        return prefix_[idx] + gauss5(left, t);
    }

    double total() const { return prefix_.back(); }

private:
    BetaCumulative() {
        const int n = 1 << 14;
        h_ = 4.0 / n;
        prefix_.resize(static_cast<std::size_t>(n) + 1);
        prefix_[0] = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = -2.0 + i * h_;
            prefix_[static_cast<std::size_t>(i) + 1] = prefix_[static_cast<std::size_t>(i)] + gauss5(a, a + h_);
        }
    }

    static double gauss5(double a, double b) {
        static const double xs[5] = {-0.906179845938663992797627, -0.538469310105683091036314, 0.0,
                                     0.538469310105683091036314, 0.906179845938663992797627};
        static const double ws[5] = {0.236926885056189087514264, 0.478628670499366468041292,
                                     0.568888888888888888888889, 0.478628670499366468041292,
                                     0.236926885056189087514264};
        const double mid = 0.5 * (a + b);
        const double hw = 0.5 * (b - a);
        double acc = 0.0;
        for (int i = 0; i < 5; ++i) acc += ws[i] * beta(mid + hw * xs[i]);
        return acc * hw;
    }

    double h_ = 0.0;
    std::vector<double> prefix_;
};

} // namespace bumps

// The tunable profile constants. `sharpening` is the extra dyadic refinement
// of the slope window inside each multiplier; `kappa` scales the kernel
// frequency window relative to 1/length(s). kappa's sign selects which side
// of the frequency axis the kernel lives on; the calibration suite fixes both
// values so the vanishing window of the curved packets lands inside omega_s.
struct BumpProfile {
    int sharpening = 3;
    double kappa = -0.15;

    double beta(double x) const { return bumps::beta(x); }
    double beta_sqrt(double x) const { return bumps::beta_sqrt(x); }
    double band(double x) const { return bumps::beta_band(x); }
    double band_sqrt(double x) const { return bumps::beta_band_sqrt(x); }

    // One-dimensional kernel symbol for tiles of the given length: a bump
    // supported on sign(kappa) * [0.98, 1.02] * |kappa| / length.
    double kernel_symbol(double zeta, double length) const {
        const double scale = std::abs(kappa) / length;
        const double arg = (kappa >= 0.0 ? zeta : -zeta) / scale;
        return bumps::kernel_profile(arg);
    }

    // Closed interval of zeta for which kernel_symbol may be nonzero.
    void kernel_support(double length, double& lo, double& hi) const {
        const double scale = std::abs(kappa) / length;
        if (kappa >= 0.0) {
            lo = 0.98 * scale;
            hi = 1.02 * scale;
        } else {
            lo = -1.02 * scale;
            hi = -0.98 * scale;
        }
    }

    // Average over translates of the beta train is constant on the plateau:
    // a length-2 window holds 2^(l+1) train periods each integrating to
    // 2^-(l+sharpening) * ||beta||_1, independent of l.
    double plateau_const() const {
        return std::ldexp(bumps::BetaCumulative::instance().total(), -sharpening);
    }
};

} // namespace wavetile
