#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "wavetile/bumps.hpp"
#include "wavetile/grid.hpp"
#include "wavetile/numeric.hpp"

namespace wavetile {

// Tile geometry is carried out in units of the grid spacing. Every quantity
// that appears (centers, slopes, shear offsets, their products) is a dyadic
// rational with a small numerator, so IEEE doubles represent it exactly and
// +, -, * and comparisons are exact. No epsilons below.

// Half-open dyadic slope interval at level l: [-2 + k 2^-l, -2 + (k+1) 2^-l).
struct FrequencyInterval {
    int l = 0;
    int k = 0;

    double lo() const { return std::ldexp(static_cast<double>(k), -l) - 2.0; }
    double hi() const { return std::ldexp(static_cast<double>(k) + 1.0, -l) - 2.0; }
    double width() const { return std::ldexp(1.0, -l); }
    double center() const { return std::ldexp(2.0 * k + 1.0, -l - 1) - 2.0; }
    // Centers of the right / left halves.
    double center_right() const { return std::ldexp(4.0 * k + 3.0, -l - 2) - 2.0; }
    double center_left() const { return std::ldexp(4.0 * k + 1.0, -l - 2) - 2.0; }

    friend bool operator==(const FrequencyInterval&, const FrequencyInterval&) = default;
};

inline bool omega_contains(const FrequencyInterval& outer, const FrequencyInterval& inner) {
    return inner.l >= outer.l && (inner.k >> (inner.l - outer.l)) == outer.k;
}

inline bool omega_overlap(const FrequencyInterval& a, const FrequencyInterval& b) {
    return a.l <= b.l ? omega_contains(a, b) : omega_contains(b, a);
}

enum class Half { right = 1, left = 2 };

// Half-open bounds of one half of omega.
inline std::pair<double, double> omega_half_bounds(const FrequencyInterval& w, Half h) {
    const double mid = std::ldexp(2.0 * w.k + 1.0, -w.l - 1) - 2.0;
    return h == Half::left ? std::pair{w.lo(), mid} : std::pair{mid, w.hi()};
}

inline bool half_meets(const FrequencyInterval& s, Half h, const FrequencyInterval& t) {
    auto [lo, hi] = omega_half_bounds(s, h);
    return lo < t.hi() && t.lo() < hi;
}

// Lattice atom: slope interval (l,k), x-cell i, shear cell j. The spatial
// cell is { x1 in [i len, (i+1) len), x2 - c(omega) x1 in [j w, (j+1) w) }.
struct Tile {
    std::int8_t l = 0;
    std::int16_t k = 0;
    std::int16_t i = 0;
    std::int16_t j = 0;

    FrequencyInterval omega() const { return FrequencyInterval{l, k}; }

    friend std::strong_ordering operator<=>(const Tile&, const Tile&) = default;

    std::uint64_t key() const {
        return (static_cast<std::uint64_t>(static_cast<std::uint8_t>(l)) << 48) |
               (static_cast<std::uint64_t>(static_cast<std::uint16_t>(k)) << 32) |
               (static_cast<std::uint64_t>(static_cast<std::uint16_t>(i)) << 16) |
               static_cast<std::uint64_t>(static_cast<std::uint16_t>(j));
    }
};

enum class TreeKind { general = 0, one = 1, two = 2 };

struct Tree {
    Tile top;
    std::vector<Tile> members;
    TreeKind kind = TreeKind::general;
};

// The enumerable tile universe over a grid: band width w = w_cells * spacing,
// levels 0..l_max, comparability constant C.
class Lattice {
public:
    Lattice() = default;
    Lattice(const GridSpec& spec, int w_cells, int l_max, double comparability = 10.0,
            BumpProfile profile = {})
        : spec_(spec), m_(w_cells), l_max_(l_max), c_dilate_(comparability), profile_(profile) {
        if (m_ < 2 || spec_.n % m_ != 0)
            throw ConfigError("band.w must be a positive multiple of the grid spacing dividing n");
        if (m_ % 2 != 0) throw ConfigError("band.w must be an even number of cells");
        if (l_max_ < 0 || (m_ << l_max_) > spec_.n)
            throw ConfigError("band.l_max exceeds the torus (w * 2^l_max > L)");
        const double nyquist = spec_.n / (2.0 * spec_.side_length);
        if (!(1.0 / w() < nyquist && 2.0 / w() < nyquist))
            throw ConfigError("band.w outside Nyquist band");
        // The packet factory performs the stricter full-support validation.
    }

    const GridSpec& spec() const { return spec_; }
    const BumpProfile& profile() const { return profile_; }
    BumpProfile& profile() { return profile_; }
    double comparability() const { return c_dilate_; }
    int w_cells() const { return m_; }
    int l_max() const { return l_max_; }

    double w() const { return m_ * spec_.spacing(); }
    double length(int l) const { return w() * std::ldexp(1.0, l); }
    int length_cells(int l) const { return m_ << l; }
    int num_x_cells(int l) const { return spec_.n / length_cells(l); }
    int num_shear_cells() const { return spec_.n / m_; }
    int num_omega(int l) const { return 4 << l; }
    double tile_area(int l) const { return w() * length(l); }
    double tile_area(const Tile& s) const { return tile_area(s.l); }

    long long tile_count(int l) const {
        return static_cast<long long>(num_omega(l)) * num_x_cells(l) * num_shear_cells();
    }
    long long total_count() const {
        long long c = 0;
        for (int l = 0; l <= l_max_; ++l) c += tile_count(l);
        return c;
    }

    // --- exact cell geometry, in spacing units ------------------------------

    double slope(const Tile& s) const { return s.omega().center(); }
    double center_x1(const Tile& s) const { return (s.i + 0.5) * length_cells(s.l); }
    double center_shear(const Tile& s) const { return (s.j + 0.5) * m_; }
    double center_x2(const Tile& s) const { return slope(s) * center_x1(s) + center_shear(s); }

    // Physical center (for frequency-side modulation), in [0,L) x R.
    void center_physical(const Tile& s, double& x1, double& x2) const {
        x1 = center_x1(s) * spec_.spacing();
        x2 = center_x2(s) * spec_.spacing();
    }

    // Unique tile at level l, slope interval (l,k), containing grid point (a,b).
    Tile tile_at(int l, int k, int a, int b) const {
        // slope = p / 2^(l+1), p odd
        const long long q = 1LL << (l + 1);
        const long long p = 2LL * k + 1 - (q << 1);
        const long long num = q * b - p * a;
        const long long den = q * m_;
        long long j = num >= 0 ? num / den : -((-num + den - 1) / den);
        const int nj = num_shear_cells();
        j %= nj;
        if (j < 0) j += nj;
        const int i = (a / length_cells(l)) % num_x_cells(l);
        return Tile{static_cast<std::int8_t>(l), static_cast<std::int16_t>(k),
                    static_cast<std::int16_t>(i), static_cast<std::int16_t>(j)};
    }

    // Visit every grid point of the cell (wrapped onto the torus): exactly
    // length_cells(l) * w_cells points.
    template <typename Fn>
    void for_each_cell_point(const Tile& s, Fn&& fn) const {
        const int n = spec_.n;
        const int lc = length_cells(s.l);
        const long long q = 1LL << (s.l + 1);
        const long long p = 2LL * s.k + 1 - (q << 1);
        for (int da = 0; da < lc; ++da) {
            const long long a = static_cast<long long>(s.i) * lc + da;
            // rows with q*b in [q(c a + j m), q(c a + (j+1) m)): exactly m of them
            const long long t = p * a + static_cast<long long>(s.j) * m_ * q;
            const long long b0 = t >= 0 ? (t + q - 1) / q : -((-t) / q);
            const int aw = static_cast<int>(a % n);
            for (int db = 0; db < m_; ++db) {
                const long long b = b0 + db;
                fn(aw, static_cast<int>(((b % n) + n) % n));
            }
        }
    }

    // Whether the dilated cell still embeds in the torus without overlapping
    // its own periodic images.
    bool dilate_fits(const Tile& s, double factor) const {
        return factor * length_cells(s.l) <= spec_.n && factor * m_ <= spec_.n;
    }

    // Grid points of the dilated cell factor*s (same center, both axes). If
    // the dilate wraps in an axis, that axis is saturated.
    template <typename Fn>
    void for_each_dilated_point(const Tile& s, double factor, Fn&& fn) const {
        const int n = spec_.n;
        const double c = slope(s);
        const double x1c = center_x1(s);
        const double shc = center_shear(s);
        const double half_len = 0.5 * factor * length_cells(s.l);
        const double half_wid = 0.5 * factor * m_;
        const bool x_full = 2.0 * half_len >= n;
        const bool y_full = 2.0 * half_wid >= n;
        const long long a_lo = x_full ? 0 : static_cast<long long>(std::ceil(x1c - half_len));
        const long long a_hi = x_full ? n - 1 : static_cast<long long>(std::ceil(x1c + half_len)) - 1;
        for (long long a = a_lo; a <= a_hi; ++a) {
            const int aw = static_cast<int>(((a % n) + n) % n);
            if (y_full) {
                for (int b = 0; b < n; ++b) fn(aw, b);
                continue;
            }
            const double y = c * static_cast<double>(a) + shc;
            const long long b_lo = static_cast<long long>(std::ceil(y - half_wid));
            const long long b_hi = static_cast<long long>(std::ceil(y + half_wid)) - 1;
            for (long long b = b_lo; b <= b_hi; ++b)
                fn(aw, static_cast<int>(((b % n) + n) % n));
        }
    }

    IndicatorSet rasterize(const Tile& s, double factor = 1.0) const {
        IndicatorSet out(spec_);
        if (factor == 1.0)
            for_each_cell_point(s, [&](int a, int b) { out.set(a, b); });
        else
            for_each_dilated_point(s, factor, [&](int a, int b) { out.set(a, b); });
        return out;
    }

    // --- the order relation -------------------------------------------------

    // a <= b iff omega_b inside omega_a and cell(a) lies in C * cell(b),
    // through the nearest periodic image.
    bool tile_leq(const Tile& a, const Tile& b) const {
        if (!omega_contains(a.omega(), b.omega())) return false;
        return cell_in_dilate(a, b, c_dilate_);
    }

    // cell(a) subset of factor * cell(b) on the torus.
    bool cell_in_dilate(const Tile& a, const Tile& b, double factor) const {
        const double n = spec_.n;
        const double half_tx = 0.5 * factor * length_cells(b.l);
        const double half_ty = 0.5 * factor * m_;
        const double half_la = 0.5 * length_cells(a.l);
        const double ca = slope(a), cb = slope(b);
        const double dx_raw = center_x1(a) - center_x1(b);
        const double drift = std::abs(ca - cb) * half_la;
        // Try the x1-lifts nearest to b; for dilates wider than the torus
        // several may satisfy the x-condition.
        const double d1_base = exact_wrap_half(dx_raw, n);
        for (double d1 : {d1_base, d1_base - n, d1_base + n}) {
            if (d1 - half_la < -half_tx || d1 + half_la > half_tx) continue;
            const double alpha = d1 - dx_raw; // multiple of n
            const double phi = center_shear(a) - center_shear(b) - ca * alpha +
                               (ca - cb) * (center_x1(a) + alpha);
            const double d2 = exact_wrap_half(phi, n);
            if (2.0 * half_ty >= n) return true;
            if (d2 - drift - 0.5 * m_ >= -half_ty && d2 + drift + 0.5 * m_ <= half_ty) return true;
        }
        return false;
    }

    // Whether the (optionally dilated) cells intersect on the torus.
    bool cells_intersect(const Tile& a, const Tile& b, double factor_a = 1.0,
                         double factor_b = 1.0) const {
        const double n = spec_.n;
        const double half_la = 0.5 * factor_a * length_cells(a.l);
        const double half_lb = 0.5 * factor_b * length_cells(b.l);
        const double gap_w = 0.5 * (factor_a + factor_b) * m_;
        if (2.0 * half_la >= n || 2.0 * half_lb >= n || 2.0 * gap_w >= n + m_) return true;
        const double ca = slope(a), cb = slope(b);
        const double dx_raw = center_x1(a) - center_x1(b);
        const double d1_base = exact_wrap_half(dx_raw, n);
        for (double d1 : {d1_base, d1_base - n, d1_base + n}) {
            // Overlap of half-open x1 projections in b-centered coordinates.
            const double lo = std::max(-half_lb, d1 - half_la);
            const double hi = std::min(half_lb, d1 + half_la);
            if (!(lo < hi)) continue;
            const double alpha = d1 - dx_raw;
            // Offset of the two strips along the x1-overlap arc:
            // g(t) = (ca - cb) t + g0 with t relative to b's center.
            const double g0 = center_shear(a) - center_shear(b) - ca * alpha +
                              (ca - cb) * center_x1(b);
            const double g_at_lo = g0 + (ca - cb) * lo;
            const double g_at_hi = g0 + (ca - cb) * hi;
            const double gmin = std::min(g_at_lo, g_at_hi);
            const double gmax = std::max(g_at_lo, g_at_hi);
            if (gmax - gmin >= n) return true;
            // Strips overlap where g mod n lies in (-gap_w, gap_w), open.
            const long long q_lo = static_cast<long long>(std::floor((gmin - gap_w) / n));
            const long long q_hi = static_cast<long long>(std::ceil((gmax + gap_w) / n));
            for (long long q = q_lo; q <= q_hi; ++q) {
                const double c0 = static_cast<double>(q) * n;
                if (gmax > c0 - gap_w && gmin < c0 + gap_w) return true;
            }
        }
        return false;
    }

    // The checked form of "incident with nested omega implies comparable":
    // true iff the cells meet and omega_a lies inside omega_b.
    bool comparable_incident(const Tile& a, const Tile& b) const {
        return omega_contains(b.omega(), a.omega()) && cells_intersect(a, b);
    }

    // Deterministic (l, k, i, j)-lexicographic enumeration.
    std::vector<Tile> enumerate(const std::function<bool(const Tile&)>& filter = nullptr) const {
        std::vector<Tile> out;
        for (int l = 0; l <= l_max_; ++l)
            for (int k = 0; k < num_omega(l); ++k)
                for (int i = 0; i < num_x_cells(l); ++i)
                    for (int j = 0; j < num_shear_cells(); ++j) {
                        Tile s{static_cast<std::int8_t>(l), static_cast<std::int16_t>(k),
                               static_cast<std::int16_t>(i), static_cast<std::int16_t>(j)};
                        if (!filter || filter(s)) out.push_back(s);
                    }
        return out;
    }

    // Members of the maximal tree with top t drawn from pool. For j-kinds the
    // half-overlap exclusion applies to every member, the top included.
    Tree maximal_tree_with_top(const Tile& t, const std::vector<Tile>& pool, TreeKind kind) const {
        Tree tree;
        tree.top = t;
        tree.kind = kind;
        for (const Tile& s : pool) {
            if (!tile_leq(s, t)) continue;
            if (kind == TreeKind::one && half_meets(s.omega(), Half::right, t.omega())) continue;
            if (kind == TreeKind::two && half_meets(s.omega(), Half::left, t.omega())) continue;
            tree.members.push_back(s);
        }
        return tree;
    }

    // Split a tree into its 1-tree and 2-tree parts. Members with omega
    // strictly coarser than the top's land on the side whose half avoids
    // omega_top (exactly one does); members at the top's own omega are
    // assigned to the 2-tree side by convention.
    std::pair<Tree, Tree> tree_split(const Tree& t) const {
        Tree one{t.top, {}, TreeKind::one};
        Tree two{t.top, {}, TreeKind::two};
        for (const Tile& s : t.members) {
            if (s.omega() == t.top.omega()) {
                two.members.push_back(s);
            } else if (!half_meets(s.omega(), Half::right, t.top.omega())) {
                one.members.push_back(s);
            } else {
                two.members.push_back(s);
            }
        }
        return {one, two};
    }

    // Lattice tiles t with s <= t (including s itself): omega_t nested inside
    // omega_s, so t ranges over the longer tiles at descendant slope
    // intervals whose dilate reaches s.
    std::vector<Tile> dominating_tiles(const Tile& s) const {
        std::vector<Tile> out;
        for (int lt = s.l; lt <= l_max_; ++lt) {
            const int k_lo = s.k << (lt - s.l);
            const int k_hi = (s.k + 1) << (lt - s.l);
            for (int kt = k_lo; kt < k_hi; ++kt)
                for (int i = 0; i < num_x_cells(lt); ++i)
                    for (int j = 0; j < num_shear_cells(); ++j) {
                        Tile t{static_cast<std::int8_t>(lt), static_cast<std::int16_t>(kt),
                               static_cast<std::int16_t>(i), static_cast<std::int16_t>(j)};
                        if (tile_leq(s, t)) out.push_back(t);
                    }
        }
        return out;
    }

private:
    // remainder() would round ties to even; we want the representative in
    // [-period/2, period/2). Inputs are exact dyadics, so this is exact.
    static double exact_wrap_half(double x, double period) {
        double r = std::fmod(x, period);
        if (r < -period / 2) r += period;
        if (r >= period / 2) r -= period;
        return r;
    }

    GridSpec spec_;
    int m_ = 0;
    int l_max_ = 0;
    double c_dilate_ = 10.0;
    BumpProfile profile_;
};

} // namespace wavetile
