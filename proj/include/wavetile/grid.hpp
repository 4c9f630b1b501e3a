#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "wavetile/numeric.hpp"

namespace wavetile {

// Periodic n x n sampling of the square [0,L)^2. Column index i carries x1,
// row index j carries x2. n must be a power of two so the transforms stay
// radix-2 and dyadic geometry is exact.
struct GridSpec {
    int n = 0;
    double side_length = 1.0;

    GridSpec() = default;
    GridSpec(int n_, double side) : n(n_), side_length(side) {
        if (n < 32 || (n & (n - 1)) != 0) throw ConfigError("grid.n must be a power of two >= 32");
        if (!(side_length > 0.0)) throw ConfigError("grid.side_length must be positive");
    }

    double spacing() const { return side_length / n; }
    double cell_area() const { return spacing() * spacing(); }
    int size() const { return n * n; }
    bool operator==(const GridSpec& o) const { return n == o.n && side_length == o.side_length; }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }

    // Centered frequency bin for a storage index in [0, n).
    int bin_of(int idx) const { return idx < n / 2 ? idx : idx - n; }
    int idx_of(int bin) const { return bin >= 0 ? bin : bin + n; }
    int min_bin() const { return -n / 2; }
    int max_bin() const { return n / 2 - 1; }
};

namespace detail {

// Iterative radix-2 complex FFT, unnormalized, forward sign e^{-2 pi i k x / n}.
inline void fft_pow2(std::vector<cdouble>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * 3.141592653589793238462643383279 / static_cast<double>(len);
        const cdouble wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cdouble w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cdouble u = a[i + k];
                const cdouble v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

} // namespace detail

// Complex samples on a grid. The same container holds space-side samples
// (indexed by grid point) and frequency-side samples (indexed by storage
// index whose centered bin is GridSpec::bin_of).
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(const GridSpec& spec) : spec_(spec), data_(spec.size(), cdouble{}) {}

    const GridSpec& spec() const { return spec_; }

    cdouble& at(int i, int j) { return data_[static_cast<std::size_t>(j) * spec_.n + i]; }
    const cdouble& at(int i, int j) const { return data_[static_cast<std::size_t>(j) * spec_.n + i]; }

    // Frequency-side access by centered bins.
    cdouble& at_bin(int p, int q) { return at(spec_.idx_of(p), spec_.idx_of(q)); }
    const cdouble& at_bin(int p, int q) const { return at(spec_.idx_of(p), spec_.idx_of(q)); }

    std::vector<cdouble>& data() { return data_; }
    const std::vector<cdouble>& data() const { return data_; }

    double norm2_space() const {
        std::vector<double> terms(data_.size());
        for (std::size_t k = 0; k < data_.size(); ++k) terms[k] = std::norm(data_[k]);
        return std::sqrt(pairwise_sum(terms) * spec_.cell_area());
    }

    // With the normalization below, the frequency-side L2 norm is the plain
    // bin sum; Parseval makes it equal to norm2_space of the original.
    double norm2_freq() const {
        std::vector<double> terms(data_.size());
        for (std::size_t k = 0; k < data_.size(); ++k) terms[k] = std::norm(data_[k]);
        return std::sqrt(pairwise_sum(terms));
    }

private:
    GridSpec spec_;
    std::vector<cdouble> data_;
};

// Unitary transform with physical factors:
//   fhat(b) = (spacing^2 / L) * sum_x f(x) e^{-2 pi i <b,x>/L},
// so a constant 1 maps to a lone DC value of L, and sum_b |fhat|^2 equals
// the spatial L2 norm squared.
inline GridFunction forward_transform(const GridFunction& f) {
    const GridSpec& spec = f.spec();
    const int n = spec.n;
    GridFunction out = f;
    std::vector<cdouble> line(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) line[i] = out.at(i, j);
        detail::fft_pow2(line, false);
        for (int i = 0; i < n; ++i) out.at(i, j) = line[i];
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) line[j] = out.at(i, j);
        detail::fft_pow2(line, false);
        for (int j = 0; j < n; ++j) out.at(i, j) = line[j];
    }
    const double scale = spec.cell_area() / spec.side_length;
    for (auto& v : out.data()) v *= scale;
    return out;
}

inline GridFunction inverse_transform(const GridFunction& fhat) {
    const GridSpec& spec = fhat.spec();
    const int n = spec.n;
    GridFunction out = fhat;
    std::vector<cdouble> line(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) line[i] = out.at(i, j);
        detail::fft_pow2(line, true);
        for (int i = 0; i < n; ++i) out.at(i, j) = line[i];
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) line[j] = out.at(i, j);
        detail::fft_pow2(line, true);
        for (int j = 0; j < n; ++j) out.at(i, j) = line[j];
    }
    // f(x) = (1/L) sum_b fhat(b) e^{+2 pi i <b,x>/L}; the raw inverse butterfly
    // already produced the bare sum, so only the 1/L factor remains.
    const double s = 1.0 / spec.side_length;
    for (auto& v : out.data()) v *= s;
    return out;
}

// sum f conj(g) * spacing^2.
inline cdouble inner_product(const GridFunction& f, const GridFunction& g) {
    if (f.spec() != g.spec()) throw DimensionError("inner_product: grid spec mismatch");
    std::vector<cdouble> terms(f.data().size());
    for (std::size_t k = 0; k < terms.size(); ++k) terms[k] = f.data()[k] * std::conj(g.data()[k]);
    return pairwise_sum(terms) * f.spec().cell_area();
}

struct IndicatorSet {
    GridSpec spec;
    std::vector<std::uint8_t> mask;

    IndicatorSet() = default;
    explicit IndicatorSet(const GridSpec& s) : spec(s), mask(s.size(), 0) {}

    bool test(int i, int j) const { return mask[static_cast<std::size_t>(j) * spec.n + i] != 0; }
    void set(int i, int j, bool v = true) { mask[static_cast<std::size_t>(j) * spec.n + i] = v ? 1 : 0; }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto b : mask) c += b;
        return c;
    }

    double measure() const { return static_cast<double>(count()) * spec.cell_area(); }

    GridFunction to_function() const {
        GridFunction f(spec);
        for (std::size_t k = 0; k < mask.size(); ++k) f.data()[k] = mask[k] ? 1.0 : 0.0;
        return f;
    }
};

// sum over set cells of w * spacing^2; w must be real-valued.
inline double weighted_measure(const IndicatorSet& s, const GridFunction& w) {
    if (s.spec != w.spec()) throw DimensionError("weighted_measure: grid spec mismatch");
    std::vector<double> terms;
    terms.reserve(s.count());
    for (std::size_t k = 0; k < s.mask.size(); ++k)
        if (s.mask[k]) terms.push_back(w.data()[k].real());
    return pairwise_sum(terms) * s.spec.cell_area();
}

} // namespace wavetile
