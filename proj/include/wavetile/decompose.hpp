#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "wavetile/modelop.hpp"

namespace wavetile {

// chi-weighted density of E near tiles, with the slope filter u(x1) in
// omega_s. Lazily cached over the lattice; build once per (E, field).
class DensityCalculator {
public:
    DensityCalculator(const Lattice& lat, const IndicatorSet& E, const VectorField& field,
                      int p_chi = 8)
        : lat_(&lat), e_(&E), field_(&field), p_chi_(p_chi) {
        if (p_chi < 4 || p_chi % 2 != 0) throw ConfigError("constants.p_chi must be an even integer >= 4");
        field.validate(lat.spec());
        if (E.spec != lat.spec()) throw DimensionError("density: set/grid mismatch");
    }

    const Lattice& lattice() const { return *lat_; }
    int p_chi() const { return p_chi_; }

    // dense(s) = integral over E_s of the L1-normalized tile profile.
    double dense(const Tile& s) const {
        auto it = dense_cache_.find(s.key());
        if (it != dense_cache_.end()) return it->second;
        const double value = dense_uncached(s);
        dense_cache_.emplace(s.key(), value);
        return value;
    }

    // udense(s) = max of dense over lattice tiles above s. The maximum is
    // realized on the finite lattice; `truncated` reports whether it sits at
    // the top level, where the enumeration cut it off.
    double udense(const Tile& s, bool* truncated = nullptr) const {
        auto it = udense_cache_.find(s.key());
        if (it == udense_cache_.end()) {
            double best = 0.0;
            Tile arg = s;
            for (const Tile& t : lat_->dominating_tiles(s)) {
                const double d = dense(t);
                if (d > best) {
                    best = d;
                    arg = t;
                }
            }
            it = udense_cache_.emplace(s.key(), std::pair<double, Tile>{best, arg}).first;
        }
        if (truncated) *truncated = it->second.second.l == lat_->l_max() && lat_->l_max() > 0;
        return it->second.first;
    }

    // Columns whose field slope lies in omega (half-open).
    const std::vector<int>& columns_in(const FrequencyInterval& om) const {
        auto it = cols_cache_.find({om.l, om.k});
        if (it != cols_cache_.end()) return it->second;
        std::vector<int> cols;
        const double lo = om.lo(), hi = om.hi();
        for (int a = 0; a < lat_->spec().n; ++a) {
            const double u = field_->u[static_cast<std::size_t>(a)];
            if (u >= lo && u < hi) cols.push_back(a);
        }
        return cols_cache_.emplace(std::pair<int, int>{om.l, om.k}, std::move(cols)).first->second;
    }

    // Torus integral of the un-normalized profile; shared by all tiles with
    // the same omega since the profile translates by grid vectors.
    double normalizer(const FrequencyInterval& om) const {
        auto it = norm_cache_.find({om.l, om.k});
        if (it != norm_cache_.end()) return it->second;
        const Tile rep{static_cast<std::int8_t>(om.l), static_cast<std::int16_t>(om.k), 0, 0};
        const int n = lat_->spec().n;
        std::vector<double> terms;
        terms.reserve(static_cast<std::size_t>(n) * n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) terms.push_back(profile(rep, a, b));
        const double total = pairwise_sum(std::span<const double>(terms)) * lat_->spec().cell_area();
        return norm_cache_.emplace(std::pair<int, int>{om.l, om.k}, total).first->second;
    }

    // Un-normalized decaying profile adapted to the tile's sheared box.
    double profile(const Tile& s, int a, int b) const {
        const int n = lat_->spec().n;
        const double c = lat_->slope(s);
        double dx = a - lat_->center_x1(s);
        dx -= n * std::floor(dx / n + 0.5);
        double dy = b - c * a - lat_->center_shear(s);
        dy -= n * std::floor(dy / n + 0.5);
        const double rx = dx / lat_->length_cells(s.l);
        const double ry = dy / lat_->w_cells();
        const double r2 = rx * rx + ry * ry;
        double rp = 1.0;
        for (int half = 0; half < p_chi_ / 2; ++half) rp *= r2;
        return 1.0 / (1.0 + rp);
    }

private:
    double dense_uncached(const Tile& s) const {
        const auto& cols = columns_in(s.omega());
        if (cols.empty()) return 0.0;
        const int n = lat_->spec().n;
        std::vector<double> terms;
        for (int a : cols)
            for (int b = 0; b < n; ++b)
                if (e_->test(a, b)) terms.push_back(profile(s, a, b));
        const double raw = pairwise_sum(std::span<const double>(terms)) * lat_->spec().cell_area();
        return raw / normalizer(s.omega());
    }

    const Lattice* lat_;
    const IndicatorSet* e_;
    const VectorField* field_;
    int p_chi_;
    mutable std::map<std::uint64_t, double> dense_cache_;
    mutable std::map<std::uint64_t, std::pair<double, Tile>> udense_cache_;
    mutable std::map<std::pair<int, int>, std::vector<int>> cols_cache_;
    mutable std::map<std::pair<int, int>, double> norm_cache_;
};

struct TileStats {
    Tile tile;
    double dense = 0.0;
    double udense = 0.0;
    cdouble coeff_f;
    bool udense_truncated = false;
};

struct StatsTable {
    std::vector<TileStats> rows; // sorted by tile
    int p_chi = 8;

    const TileStats* find(const Tile& s) const {
        auto it = std::lower_bound(rows.begin(), rows.end(), s,
                                   [](const TileStats& r, const Tile& t) { return r.tile < t; });
        if (it == rows.end() || !(it->tile == s)) return nullptr;
        return &*it;
    }
};

inline StatsTable density_stats(const DensityCalculator& calc, const std::vector<Tile>& tiles,
                                const CoefficientTable& coeffs_f) {
    StatsTable out;
    out.p_chi = calc.p_chi();
    out.rows.reserve(tiles.size());
    for (const Tile& s : tiles) {
        TileStats row;
        row.tile = s;
        row.dense = calc.dense(s);
        row.udense = calc.udense(s, &row.udense_truncated);
        row.coeff_f = coeffs_f.at(s);
        out.rows.push_back(row);
    }
    std::sort(out.rows.begin(), out.rows.end(),
              [](const TileStats& a, const TileStats& b) { return a.tile < b.tile; });
    return out;
}

// Dyadic value with x in (delta/2, delta].
inline double dyadic_ceil(double x) {
    int e = 0;
    const double f = std::frexp(x, &e); // x = f 2^e, f in [0.5, 1)
    return f == 0.5 ? std::ldexp(1.0, e - 1) : std::ldexp(1.0, e);
}

struct DensityStrata {
    std::map<double, std::vector<Tile>, std::greater<double>> by_delta;
    std::vector<Tile> zero_udense;
};

inline DensityStrata density_stratify(const StatsTable& stats) {
    DensityStrata out;
    for (const TileStats& row : stats.rows) {
        if (row.udense <= 0.0) {
            out.zero_udense.push_back(row.tile);
            continue;
        }
        out.by_delta[dyadic_ceil(row.udense)].push_back(row.tile);
    }
    return out;
}

// --- size ---------------------------------------------------------------

struct SizeResult {
    double value = 0.0;
    Tree witness; // the realizing 1-tree (members from the pool)
};

// Candidate tops for the size supremum: lattice tiles dominating some pool
// tile, deduplicated, in lattice order.
inline std::vector<Tile> default_top_candidates(const std::vector<Tile>& pool, const Lattice& lat) {
    std::vector<Tile> out;
    for (const Tile& s : pool) {
        std::vector<Tile> dom = lat.dominating_tiles(s);
        out.insert(out.end(), dom.begin(), dom.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// size(pool) = sup over candidate tops t of the root-mean coefficient mass of
// the maximal 1-tree with top t drawn from the pool.
inline SizeResult size_of(const std::vector<Tile>& pool, const CoefficientTable& coeffs,
                          const std::vector<Tile>& top_candidates, const Lattice& lat) {
    SizeResult best;
    for (const Tile& t : top_candidates) {
        Tree tree = lat.maximal_tree_with_top(t, pool, TreeKind::one);
        if (tree.members.empty()) continue;
        double mass = 0.0;
        for (const Tile& s : tree.members) mass += std::norm(coeffs.at(s));
        const double value = std::sqrt(mass / lat.tile_area(t.l));
        if (value > best.value) {
            best.value = value;
            best.witness = std::move(tree);
        }
    }
    return best;
}

// Default-candidate version, organized top-first: invert the per-tile
// dominating lists so each pool tile is tested once per top above it.
inline SizeResult size_of(const std::vector<Tile>& pool, const CoefficientTable& coeffs,
                          const Lattice& lat) {
    std::map<Tile, std::vector<const Tile*>> members_of;
    for (const Tile& s : pool)
        for (const Tile& t : lat.dominating_tiles(s)) members_of[t].push_back(&s);
    SizeResult best;
    for (auto& [t, below] : members_of) {
        double mass = 0.0;
        std::vector<Tile> members;
        for (const Tile* s : below) {
            if (half_meets(s->omega(), Half::right, t.omega())) continue;
            members.push_back(*s);
            mass += std::norm(coeffs.at(*s));
        }
        if (members.empty()) continue;
        const double value = std::sqrt(mass / lat.tile_area(t.l));
        if (value > best.value) {
            best.value = value;
            best.witness = Tree{t, std::move(members), TreeKind::one};
        }
    }
    return best;
}

// --- tree selection -------------------------------------------------------

struct SizeLevelDiagnostics {
    double sigma = 0.0;
    int trees_selected = 0;
    double residual_size = 0.0; // recomputed after the level; must be < sigma/2
};

struct SelectedTree {
    Tree tree;                 // maximal general tree extracted
    double selection_metric;   // top-inclusive 1-tree RMS at selection time
};

struct SizeIterationResult {
    // trees per dyadic sigma level, in selection order
    std::map<double, std::vector<SelectedTree>, std::greater<double>> levels;
    std::vector<SizeLevelDiagnostics> diagnostics;
    std::vector<Tile> residual; // tiles never selected (size below sigma_min)
};

namespace detail {

// "Most clockwise" total order on candidate tops: larger omega-center first,
// longer top next, lexicographic (l,k,i,j) last.
inline bool more_clockwise(const Tile& a, const Tile& b) {
    const double ca = a.omega().center();
    const double cb = b.omega().center();
    if (ca != cb) return ca > cb;
    if (a.l != b.l) return a.l > b.l;
    return a < b;
}

struct BitRows {
    std::size_t words = 0;
    std::vector<std::uint64_t> bits;

    void init(std::size_t rows, std::size_t cols) {
        words = (cols + 63) / 64;
        bits.assign(rows * words, 0);
    }
    void set(std::size_t r, std::size_t c) { bits[r * words + c / 64] |= 1ULL << (c % 64); }
    bool test(std::size_t r, std::size_t c) const {
        return (bits[r * words + c / 64] >> (c % 64)) & 1ULL;
    }
    const std::uint64_t* row(std::size_t r) const { return &bits[r * words]; }
};

} // namespace detail

// One stratum's selection loop: per dyadic level, extract maximal general
// trees whose qualifying 1-tree (top included) reaches sigma/C, most
// clockwise top first; the residual provably halves in size per level.
// Membership masks are precomputed once and coefficient masses maintained
// incrementally, so a whole stratum costs O(M^2) comparability checks.
inline SizeIterationResult size_iteration(const std::vector<Tile>& stratum,
                                          const CoefficientTable& coeffs, double sigma_start,
                                          const Lattice& lat, double sigma_min = std::ldexp(1.0, -20)) {
    SizeIterationResult out;
    std::vector<Tile> stock = stratum;
    std::sort(stock.begin(), stock.end());
    const std::size_t M = stock.size();
    const double C = lat.comparability();

    std::vector<double> mass2(M);   // |<1_F, phi_s>|^2
    std::vector<double> area(M);
    for (std::size_t idx = 0; idx < M; ++idx) {
        mass2[idx] = std::norm(coeffs.at(stock[idx]));
        area[idx] = lat.tile_area(stock[idx].l);
    }
    // one_members[t]: top-inclusive 1-tree of t; gen_members[t]: full tree.
    detail::BitRows one_members, gen_members, one_tops_of;
    one_members.init(M, M);
    gen_members.init(M, M);
    one_tops_of.init(M, M); // transpose of one_members, for mass updates
    std::vector<double> one_mass(M, 0.0);
    for (std::size_t t = 0; t < M; ++t) {
        for (std::size_t s = 0; s < M; ++s) {
            if (!lat.tile_leq(stock[s], stock[t])) continue;
            gen_members.set(t, s);
            if (s != t && half_meets(stock[s].omega(), Half::right, stock[t].omega())) continue;
            one_members.set(t, s);
            one_tops_of.set(s, t);
            one_mass[t] += mass2[s];
        }
    }
    std::vector<bool> alive(M, true);
    std::size_t alive_count = M;

    auto remove_tile = [&](std::size_t s) {
        alive[s] = false;
        --alive_count;
        const std::uint64_t* tops = one_tops_of.row(s);
        for (std::size_t wrd = 0; wrd < one_tops_of.words; ++wrd) {
            std::uint64_t bitsw = tops[wrd];
            while (bitsw) {
                const int bit = std::countr_zero(bitsw);
                bitsw &= bitsw - 1;
                one_mass[wrd * 64 + static_cast<std::size_t>(bit)] -= mass2[s];
            }
        }
    };

    double sigma = sigma_start;
    long long selections = 0;
    while (alive_count > 0 && sigma >= sigma_min) {
        std::vector<SelectedTree>& selected = out.levels[sigma];
        const double threshold2 = (sigma / C) * (sigma / C);
        while (true) {
            std::optional<std::size_t> pick;
            for (std::size_t t = 0; t < M; ++t) {
                if (!alive[t]) continue;
                if (one_mass[t] < threshold2 * area[t]) continue;
                if (!pick || detail::more_clockwise(stock[t], stock[*pick])) pick = t;
            }
            if (!pick) break;
            // every selection removes at least its own top, so this cannot fire
            if (++selections > static_cast<long long>(M))
                throw std::logic_error("size_iteration: selection failed to shrink the stock");
            const double metric = std::sqrt(std::max(0.0, one_mass[*pick]) / area[*pick]);
            Tree tree;
            tree.top = stock[*pick];
            tree.kind = TreeKind::general;
            const std::uint64_t* row = gen_members.row(*pick);
            for (std::size_t wrd = 0; wrd < gen_members.words; ++wrd) {
                std::uint64_t bitsw = row[wrd];
                while (bitsw) {
                    const int bit = std::countr_zero(bitsw);
                    bitsw &= bitsw - 1;
                    const std::size_t s = wrd * 64 + static_cast<std::size_t>(bit);
                    if (!alive[s]) continue;
                    tree.members.push_back(stock[s]);
                    remove_tile(s);
                }
            }
            selected.push_back({std::move(tree), metric});
        }
        SizeLevelDiagnostics diag;
        diag.sigma = sigma;
        diag.trees_selected = static_cast<int>(selected.size());
        std::vector<Tile> current;
        for (std::size_t s = 0; s < M; ++s)
            if (alive[s]) current.push_back(stock[s]);
        diag.residual_size = size_of(current, coeffs, lat).value;
        out.diagnostics.push_back(diag);
        if (selected.empty()) out.levels.erase(sigma);
        sigma *= 0.5;
    }
    for (std::size_t s = 0; s < M; ++s)
        if (alive[s]) out.residual.push_back(stock[s]);
    return out;
}

// --- the pantry partition ---------------------------------------------------

struct PantryResult {
    std::vector<Tree> subtrees; // each contains its top
    double top_area_sum = 0.0;
    double parent_top_area = 0.0;
    bool tops_disjoint = true;
    bool tops_inside_dilate = true;
};

// Partition a tree into top-containing subtrees by repeatedly skimming a
// maximal-length tile and everything below it.
inline PantryResult pantry_partition(const Tree& input, const Lattice& lat) {
    PantryResult out;
    out.parent_top_area = lat.tile_area(input.top.l);
    std::vector<Tile> pantry = input.members;
    std::sort(pantry.begin(), pantry.end());
    while (!pantry.empty()) {
        // maximal length = highest level; ties lexicographic
        Tile t = pantry.front();
        for (const Tile& s : pantry)
            if (s.l > t.l) t = s;
        Tree sub = lat.maximal_tree_with_top(t, pantry, TreeKind::general);
        std::vector<Tile> rest;
        std::size_t cursor = 0;
        for (const Tile& s : pantry) {
            if (cursor < sub.members.size() && sub.members[cursor] == s) {
                ++cursor;
                continue;
            }
            rest.push_back(s);
        }
        pantry.swap(rest);
        out.top_area_sum += lat.tile_area(t.l);
        out.subtrees.push_back(std::move(sub));
    }
    for (std::size_t a = 0; a < out.subtrees.size(); ++a) {
        if (!lat.cell_in_dilate(out.subtrees[a].top, input.top, lat.comparability()))
            out.tops_inside_dilate = false;
        for (std::size_t b = a + 1; b < out.subtrees.size(); ++b)
            if (lat.cells_intersect(out.subtrees[a].top, out.subtrees[b].top))
                out.tops_disjoint = false;
    }
    return out;
}

// --- forest -----------------------------------------------------------------

struct ForestKey {
    double delta;
    double sigma;
    friend bool operator<(const ForestKey& a, const ForestKey& b) {
        if (a.delta != b.delta) return a.delta > b.delta;
        return a.sigma > b.sigma;
    }
};

struct Forest {
    std::map<ForestKey, std::vector<SelectedTree>> strata;
    std::vector<Tile> zero_udense;
    std::vector<Tile> residual_small_sigma;
    std::vector<SizeLevelDiagnostics> size_diagnostics;
};

struct ForestParams {
    double sigma_min = std::ldexp(1.0, -20);
};

// The full stratified decomposition: density strata, then per-stratum size
// iteration.
inline Forest build_forest(const std::vector<Tile>& tiles, const StatsTable& stats,
                           const CoefficientTable& coeffs, const Lattice& lat,
                           ForestParams params = {}) {
    Forest out;
    if (stats.rows.size() != tiles.size())
        throw DimensionError("build_forest: stats and tile set disagree");
    DensityStrata strata = density_stratify(stats);
    out.zero_udense = strata.zero_udense;
    for (auto& [delta, members] : strata.by_delta) {
        std::sort(members.begin(), members.end());
        const double start = size_of(members, coeffs, lat).value;
        if (start <= 0.0) {
            out.residual_small_sigma.insert(out.residual_small_sigma.end(), members.begin(),
                                            members.end());
            continue;
        }
        double sigma_start = dyadic_ceil(start);
        if (sigma_start <= start) sigma_start *= 2.0; // strict: size < sigma_start
        SizeIterationResult result =
            size_iteration(members, coeffs, sigma_start, lat, params.sigma_min);
        for (auto& [sigma, trees] : result.levels)
            out.strata.emplace(ForestKey{delta, sigma}, std::move(trees));
        out.size_diagnostics.insert(out.size_diagnostics.end(), result.diagnostics.begin(),
                                    result.diagnostics.end());
        out.residual_small_sigma.insert(out.residual_small_sigma.end(), result.residual.begin(),
                                        result.residual.end());
    }
    return out;
}

} // namespace wavetile
