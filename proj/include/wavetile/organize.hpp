#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "wavetile/decompose.hpp"

namespace wavetile {

// Measure of u^{-1}(omega_R) intersect factor*R intersect E, as a grid count
// times cell area.
inline double slope_set_measure(const Tile& R, double factor, const IndicatorSet& E,
                                const VectorField& field, const Lattice& lat) {
    const FrequencyInterval om = R.omega();
    const double lo = om.lo(), hi = om.hi();
    long long count = 0;
    lat.for_each_dilated_point(R, factor, [&](int a, int b) {
        const double u = field.u[static_cast<std::size_t>(a)];
        if (u >= lo && u < hi && E.test(a, b)) ++count;
    });
    return static_cast<double>(count) * lat.spec().cell_area();
}

// --- the shell-classified greedy cover ---------------------------------------

struct CoverClass {
    int k = 0;
    std::vector<Tile> members;   // all inputs classified at this k
    std::vector<Tile> selected;  // greedy subfamily with disjoint dilates
};

struct CoverResult {
    std::vector<CoverClass> classes;     // ascending k
    std::vector<Tile> tail_violations;   // inputs matching no shell class
    double input_area = 0.0;
    double bound_ratio = 0.0;            // sum |R| / (|E| / delta)
};

// Classify by the least k with |u^{-1}(omega_R) ^ 2^k R ^ E| >= delta/100 *
// 2^{20k} |2^k R|, then greedily select maximal-length representatives whose
// 2^k-dilates are pairwise separated.
inline CoverResult density_cover(const std::vector<Tile>& inputs, const IndicatorSet& E,
                                 const VectorField& field, double delta, const Lattice& lat) {
    CoverResult out;
    std::map<int, std::vector<Tile>> classes;
    for (const Tile& R : inputs) {
        out.input_area += lat.tile_area(R.l);
        std::optional<int> chosen;
        for (int k = 0;; ++k) {
            const double factor = std::ldexp(1.0, k);
            if (!lat.dilate_fits(R, factor)) break;
            const double dilated_area = factor * factor * lat.tile_area(R.l);
            const double need = 0.01 * delta * std::ldexp(1.0, 20 * k) * dilated_area;
            if (slope_set_measure(R, factor, E, field, lat) >= need) {
                chosen = k;
                break;
            }
        }
        if (chosen)
            classes[*chosen].push_back(R);
        else
            out.tail_violations.push_back(R);
    }
    for (auto& [k, members] : classes) {
        CoverClass cls;
        cls.k = k;
        std::sort(members.begin(), members.end());
        cls.members = members;
        const double factor = std::ldexp(1.0, k);
        std::vector<Tile> stock = members;
        while (!stock.empty()) {
            // maximal length first, lexicographic ties
            std::size_t pick = 0;
            for (std::size_t idx = 1; idx < stock.size(); ++idx)
                if (stock[idx].l > stock[pick].l) pick = idx;
            const Tile R = stock[pick];
            cls.selected.push_back(R);
            std::vector<Tile> rest;
            for (const Tile& other : stock) {
                if (lat.cells_intersect(other, R, factor, factor) &&
                    omega_overlap(other.omega(), R.omega()))
                    continue;
                rest.push_back(other);
            }
            stock.swap(rest);
        }
        out.classes.push_back(std::move(cls));
    }
    const double e_measure = E.measure();
    out.bound_ratio = e_measure > 0.0 ? out.input_area / (e_measure / delta) : 0.0;
    return out;
}

// --- the maximal organization -------------------------------------------------

struct MaximalOrganization {
    double delta = 0.0;
    double sigma = 0.0;
    std::vector<Tile> incomparable;               // the selected density family
    std::vector<Tree> trees;                      // input trees, in order
    std::vector<int> assignment;                  // tree index -> incomparable index
    std::vector<Tile> witness_chain;              // per tree: the intermediate tile
    std::map<int, std::vector<int>> fibers;       // incomparable index -> tree indices
    std::map<int, std::vector<int>> disjoint_tops;// incomparable index -> subfamily
    std::map<int, int> coverage_class;            // incomparable index -> j
    std::map<int, int> shell_class;               // incomparable index -> k (or -1)
    std::vector<int> assignment_errors;           // tree indices with no dominating tile
    std::vector<int> shell_violations;            // incomparable indices with no k
    double disjoint_top_fraction = 1.0;           // min over R of selected/total top area
};

// The full stratum organization: a maximal incomparable family of
// density-delta tiles, tree assignments through dominating chains, fibers,
// disjoint-top subfamilies, coverage and shell strata.
inline MaximalOrganization maximal_organize(const std::vector<SelectedTree>& stratum_trees,
                                            double delta, double sigma,
                                            const DensityCalculator& dens,
                                            const IndicatorSet& E, const VectorField& field,
                                            const Lattice& lat) {
    MaximalOrganization out;
    out.delta = delta;
    out.sigma = sigma;
    for (const SelectedTree& st : stratum_trees) out.trees.push_back(st.tree);

    // Density family: all lattice tiles with dense ~ delta.
    std::vector<Tile> family = lat.enumerate([&](const Tile& R) {
        const double d = dens.dense(R);
        return d > 0.5 * delta && d <= delta;
    });

    // Greedy maximal incomparable subfamily, maximal length first.
    {
        std::vector<Tile> stock = family;
        while (!stock.empty()) {
            std::size_t pick = 0;
            for (std::size_t idx = 1; idx < stock.size(); ++idx)
                if (stock[idx].l > stock[pick].l) pick = idx;
            const Tile R = stock[pick];
            out.incomparable.push_back(R);
            std::vector<Tile> rest;
            for (const Tile& other : stock)
                if (!lat.tile_leq(other, R)) rest.push_back(other);
            stock.swap(rest);
        }
        std::sort(out.incomparable.begin(), out.incomparable.end());
    }

    // Assignment: top(T) <= witness <= R with dense(witness) ~ delta.
    out.assignment.assign(out.trees.size(), -1);
    out.witness_chain.assign(out.trees.size(), Tile{});
    for (std::size_t ti = 0; ti < out.trees.size(); ++ti) {
        const Tile top = out.trees[ti].top;
        // the dominating tile realizing udense has dense in the stratum band
        Tile witness{};
        bool found = false;
        double best = -1.0;
        for (const Tile& t : lat.dominating_tiles(top)) {
            const double d = dens.dense(t);
            if (d > best) {
                best = d;
                witness = t;
            }
        }
        found = best > 0.5 * delta && best <= delta;
        if (!found) {
            out.assignment_errors.push_back(static_cast<int>(ti));
            continue;
        }
        out.witness_chain[ti] = witness;
        // first (lattice order) incomparable tile above the witness
        int assigned = -1;
        for (std::size_t ri = 0; ri < out.incomparable.size(); ++ri) {
            if (lat.tile_leq(witness, out.incomparable[ri])) {
                assigned = static_cast<int>(ri);
                break;
            }
        }
        if (assigned < 0) {
            out.assignment_errors.push_back(static_cast<int>(ti));
            continue;
        }
        out.assignment[ti] = assigned;
        out.fibers[assigned].push_back(static_cast<int>(ti));
    }

    // Disjoint-top subfamilies per fiber, and the retained area fraction.
    out.disjoint_top_fraction = 1.0;
    for (auto& [ri, fiber] : out.fibers) {
        std::vector<int> stock = fiber;
        std::vector<int>& chosen = out.disjoint_tops[ri];
        double total = 0.0;
        for (int ti : fiber) total += lat.tile_area(out.trees[static_cast<std::size_t>(ti)].top.l);
        while (!stock.empty()) {
            std::size_t pick = 0;
            for (std::size_t idx = 1; idx < stock.size(); ++idx) {
                const Tile& a = out.trees[static_cast<std::size_t>(stock[idx])].top;
                const Tile& b = out.trees[static_cast<std::size_t>(stock[pick])].top;
                if (a.l > b.l || (a.l == b.l && a < b)) pick = idx;
            }
            const int ti = stock[pick];
            chosen.push_back(ti);
            const Tile top = out.trees[static_cast<std::size_t>(ti)].top;
            std::vector<int> rest;
            for (int other : stock)
                if (!lat.cells_intersect(out.trees[static_cast<std::size_t>(other)].top, top))
                    rest.push_back(other);
            stock.swap(rest);
        }
        double kept = 0.0;
        for (int ti : chosen) kept += lat.tile_area(out.trees[static_cast<std::size_t>(ti)].top.l);
        if (total > 0.0) out.disjoint_top_fraction = std::min(out.disjoint_top_fraction, kept / total);
    }

    // Coverage strata: sum of top areas over the fiber versus |R|.
    for (auto& [ri, fiber] : out.fibers) {
        double covered = 0.0;
        for (int ti : fiber) covered += lat.tile_area(out.trees[static_cast<std::size_t>(ti)].top.l);
        const double ratio = covered / lat.tile_area(out.incomparable[static_cast<std::size_t>(ri)].l);
        int e = 0;
        std::frexp(ratio, &e); // ratio in [2^{e-1}, 2^e)
        out.coverage_class[ri] = -e;
    }

    // Shell strata against E: least k with measure >= delta/100 * 2^{20k} |R|.
    for (const auto& fiber_entry : out.fibers) {
        const int ri = fiber_entry.first;
        const Tile R = out.incomparable[static_cast<std::size_t>(ri)];
        int found = -1;
        for (int k = 0;; ++k) {
            const double factor = std::ldexp(1.0, k);
            if (!lat.dilate_fits(R, factor)) break;
            const double need = 0.01 * delta * std::ldexp(1.0, 20 * k) * lat.tile_area(R.l);
            if (slope_set_measure(R, factor, E, field, lat) >= need) {
                found = k;
                break;
            }
        }
        out.shell_class[ri] = found;
        if (found < 0) out.shell_violations.push_back(ri);
    }
    return out;
}

} // namespace wavetile
