#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "wavetile/decompose.hpp"

namespace wavetile {

enum class SquareKind { cells, columns };

// pi_2 half-extent of the C-dilated top cell, in spacing units.
inline double top_band_half_extent(const Tile& top, const Lattice& lat, double C) {
    return 0.5 * C * (std::abs(lat.slope(top)) * lat.length_cells(top.l) + lat.w_cells());
}

// Tree square function: sqrt of sum over members of |coef|^2 1_s / |s|.
// The columns variant replaces the cell by pi_1(s) x C pi_2(top).
inline GridFunction tree_square_function(const Tree& tree, const CoefficientTable& coeffs,
                                         SquareKind kind, const Lattice& lat) {
    const GridSpec& spec = lat.spec();
    const int n = spec.n;
    GridFunction acc(spec);
    for (const Tile& s : tree.members) {
        const double weight = std::norm(coeffs.at(s)) / lat.tile_area(s.l);
        if (weight == 0.0) continue;
        if (kind == SquareKind::cells) {
            lat.for_each_cell_point(s, [&](int a, int b) { acc.at(a, b) += weight; });
        } else {
            const double x2c = lat.center_x2(tree.top);
            const double half = top_band_half_extent(tree.top, lat, lat.comparability());
            const int lc = lat.length_cells(s.l);
            for (int da = 0; da < lc; ++da) {
                const int a = (s.i * lc + da) % n;
                if (2.0 * half >= n) {
                    for (int b = 0; b < n; ++b) acc.at(a, b) += weight;
                    continue;
                }
                const long long b_lo = static_cast<long long>(std::ceil(x2c - half));
                const long long b_hi = static_cast<long long>(std::ceil(x2c + half)) - 1;
                for (long long b = b_lo; b <= b_hi; ++b)
                    acc.at(a, static_cast<int>(((b % n) + n) % n)) += weight;
            }
        }
    }
    for (auto& v : acc.data()) v = std::sqrt(v.real());
    return acc;
}

// Shell Omega_k around the tree top: the 2^k dilate minus the 2^{k-1} dilate
// (the top itself at k = 0).
inline IndicatorSet shell_mask(const Tile& top, int k, const Lattice& lat) {
    if (k == 0) return lat.rasterize(top);
    IndicatorSet outer = lat.rasterize(top, std::ldexp(1.0, k));
    IndicatorSet inner = lat.rasterize(top, std::ldexp(1.0, k - 1));
    for (std::size_t z = 0; z < outer.mask.size(); ++z)
        if (inner.mask[z]) outer.mask[z] = 0;
    return outer;
}

inline GridFunction masked(const GridFunction& f, const IndicatorSet& mask) {
    GridFunction out = f;
    for (std::size_t z = 0; z < out.data().size(); ++z)
        if (!mask.mask[z]) out.data()[z] = 0.0;
    return out;
}

// L^p norm with the physical measure.
inline double norm_p(const GridFunction& f, double p) {
    std::vector<double> terms(f.data().size());
    for (std::size_t z = 0; z < terms.size(); ++z)
        terms[z] = std::pow(std::abs(f.data()[z]), p);
    return std::pow(pairwise_sum(std::span<const double>(terms)) * f.spec().cell_area(), 1.0 / p);
}

// Ratio of the largest sub-1-tree root-mean mass to the whole tree's: the
// uniform size estimate checked before BMO-type measurements.
inline double uniform_size_ratio(const Tree& tree, const CoefficientTable& coeffs,
                                 const Lattice& lat) {
    double full_mass = 0.0;
    for (const Tile& s : tree.members) full_mass += std::norm(coeffs.at(s));
    if (full_mass <= 0.0) return 0.0;
    const double full = std::sqrt(full_mass / lat.tile_area(tree.top.l));
    const double sup = size_of(tree.members, coeffs, lat).value;
    return full > 0.0 ? sup / full : 0.0;
}

// --- John-Nirenberg interval generations -------------------------------------

struct DyadicInterval {
    int level = 0; // length = w * 2^level, in the tile x-grid
    int index = 0;

    friend std::strong_ordering operator<=>(const DyadicInterval&, const DyadicInterval&) = default;
};

struct JNResult {
    std::vector<std::vector<DyadicInterval>> generations;
    std::vector<double> union_measures; // physical length of each generation's union
};

// Interval generations of the column-band square function: weights nu_J over
// the dyadic x-intervals carrying tiles, a_I = sum of nu over ancestors
// within the current root, maximal intervals above 100 sigma^2 selected,
// recursed. The per-generation measures must at least halve.
inline JNResult john_nirenberg_levels(const Tree& tree, const CoefficientTable& coeffs,
                                      double sigma, const Lattice& lat) {
    JNResult out;
    const int lmax = lat.l_max();
    // nu[level][index]: coefficient mass density over the interval's tiles.
    std::vector<std::vector<double>> nu(static_cast<std::size_t>(lmax) + 1);
    for (int l = 0; l <= lmax; ++l) nu[static_cast<std::size_t>(l)].assign(lat.num_x_cells(l), 0.0);
    for (const Tile& s : tree.members)
        nu[s.l][s.i] += std::norm(coeffs.at(s)) / lat.tile_area(s.l);

    const double threshold = 100.0 * sigma * sigma;
    // cumulative ancestor mass within a root interval
    struct Node {
        int level;
        int index;
    };
    // a_{I, root} for I = (level, index): sum of nu over J with I <= J <= root.
    auto select_generation = [&](const DyadicInterval& root, std::vector<DyadicInterval>& pick) {
        // depth-first from the root's children... include the root's own nu?
        // a_{I,K} sums J between I and K inclusive; I = K never fires because
        // per-interval mass stays near sigma^2, far below the threshold.
        struct Frame {
            int level;
            int index;
            double acc;
        };
        std::vector<Frame> stack;
        stack.push_back({root.level, root.index, 0.0});
        while (!stack.empty()) {
            Frame f = stack.back();
            stack.pop_back();
            const double here = f.acc + nu[static_cast<std::size_t>(f.level)][static_cast<std::size_t>(f.index)];
            const bool is_root = f.level == root.level && f.index == root.index;
            if (here > threshold && !is_root) {
                pick.push_back({f.level, f.index});
                continue; // maximal: do not descend
            }
            if (f.level == 0) continue;
            stack.push_back({f.level - 1, 2 * f.index, here});
            stack.push_back({f.level - 1, 2 * f.index + 1, here});
        }
        std::sort(pick.begin(), pick.end());
    };

    // Root: the whole circle as the union of the top-level intervals.
    std::vector<DyadicInterval> current;
    for (int i = 0; i < lat.num_x_cells(lmax); ++i) {
        std::vector<DyadicInterval> pick;
        select_generation({lmax, i}, pick);
        // the root interval itself may qualify at generation zero
        double root_mass = nu[static_cast<std::size_t>(lmax)][static_cast<std::size_t>(i)];
        if (root_mass > threshold) pick.assign(1, DyadicInterval{lmax, i});
        current.insert(current.end(), pick.begin(), pick.end());
    }
    while (!current.empty()) {
        double measure = 0.0;
        for (const DyadicInterval& I : current) measure += lat.length(I.level);
        out.union_measures.push_back(measure);
        out.generations.push_back(current);
        std::vector<DyadicInterval> next;
        for (const DyadicInterval& K : current) {
            std::vector<DyadicInterval> pick;
            select_generation(K, pick);
            next.insert(next.end(), pick.begin(), pick.end());
        }
        current.swap(next);
        if (out.generations.size() > 64) throw std::logic_error("interval iteration failed to halve");
    }
    return out;
}

} // namespace wavetile
