#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wavetile/forest_io.hpp"
#include "wavetile/instances.hpp"

namespace wavetile {

// One measured inequality on one instance. ratio = lhs / rhs when the right
// side is positive; degenerate records keep the raw sides.
struct ConstantReport {
    std::string inequality_id;
    std::string instance_id;
    double delta = std::numeric_limits<double>::quiet_NaN();
    double sigma = std::numeric_limits<double>::quiet_NaN();
    double k = std::numeric_limits<double>::quiet_NaN();
    double j = std::numeric_limits<double>::quiet_NaN();
    double p = std::numeric_limits<double>::quiet_NaN();
    double eps = std::numeric_limits<double>::quiet_NaN();
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool degenerate = false;

    static ConstantReport make(std::string id, std::string instance, double lhs, double rhs) {
        ConstantReport r;
        r.inequality_id = std::move(id);
        r.instance_id = std::move(instance);
        r.lhs = lhs;
        r.rhs = rhs;
        if (rhs > 0.0 && std::isfinite(lhs / rhs)) {
            r.ratio = lhs / rhs;
        } else {
            r.degenerate = true;
            r.ratio = 0.0;
        }
        return r;
    }
};

inline void write_csv_header(std::ostream& os) {
    os << "inequality_id,instance_id,delta,sigma,k,j,p,eps,lhs,rhs,ratio\n";
}

inline void write_csv_row(std::ostream& os, const ConstantReport& r) {
    auto cell = [&](double v) {
        if (std::isnan(v)) return std::string();
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << r.inequality_id << ',' << r.instance_id << ',' << cell(r.delta) << ',' << cell(r.sigma)
       << ',' << cell(r.k) << ',' << cell(r.j) << ',' << cell(r.p) << ',' << cell(r.eps) << ','
       << cell(r.lhs) << ',' << cell(r.rhs) << ',' << cell(r.ratio) << '\n';
}

// Realized size of a tree: the larger of its strict size and the
// top-inclusive metric at its own top.
inline double realized_size(const Tree& tree, const CoefficientTable& coeffs, const Lattice& lat) {
    double top_mass = 0.0;
    for (const Tile& s : tree.members) {
        if (!(s == tree.top) && half_meets(s.omega(), Half::right, tree.top.omega())) continue;
        top_mass += std::norm(coeffs.at(s));
    }
    const double top_metric = std::sqrt(top_mass / lat.tile_area(tree.top.l));
    return std::max(top_metric, size_of(tree.members, coeffs, lat).value);
}

// --- per-inequality checks ----------------------------------------------------

// Orthogonality / density / maximal bounds per stratum.
inline std::vector<ConstantReport> check_estimates(const Forest& forest, const IndicatorSet& E,
                                                   const IndicatorSet& F, double eps,
                                                   const Lattice& lat, const std::string& instance) {
    std::vector<ConstantReport> out;
    const double em = E.measure();
    const double fm = F.measure();
    for (const auto& [key, trees] : forest.strata) {
        double lhs = 0.0;
        for (const SelectedTree& st : trees) lhs += lat.tile_area(st.tree.top.l);
        auto add = [&](const char* id, double rhs) {
            ConstantReport r = ConstantReport::make(id, instance, lhs, rhs);
            r.delta = key.delta;
            r.sigma = key.sigma;
            r.eps = eps;
            out.push_back(r);
        };
        add("orthogonality", fm / (key.sigma * key.sigma));
        add("density", em / key.delta);
        add("maximal",
            std::pow(fm, 1.0 - eps) * std::pow(em, eps) / (key.delta * std::pow(key.sigma, 1.0 + eps)));
    }
    return out;
}

// Tree bound: the model sum of one tree against delta sigma |top|.
inline ConstantReport check_tree_bound(const Tree& tree, const IndicatorSet& E,
                                       const IndicatorSet& F, const VectorField& field,
                                       const PacketFactory& fac, const DensityCalculator& calc,
                                       const CoefficientTable& coeffs,
                                       const std::string& instance) {
    const Lattice& lat = fac.lattice();
    double delta = 0.0;
    for (const Tile& s : tree.members) delta = std::max(delta, calc.udense(s));
    const double sigma = realized_size(tree, coeffs, lat);
    const double lhs = bilinear_form(E, F, tree.members, field, fac);
    ConstantReport r = ConstantReport::make("tree_bound", instance,
                                            lhs, delta * sigma * lat.tile_area(tree.top.l));
    r.delta = delta;
    r.sigma = sigma;
    return r;
}

// Localized Bessel over the shells of a 1-tree.
inline std::vector<ConstantReport> check_bessel_shells(const Tree& tree, const GridFunction& f,
                                                       const std::vector<int>& k_range,
                                                       const PacketFactory& fac,
                                                       const std::string& instance) {
    const Lattice& lat = fac.lattice();
    std::vector<ConstantReport> out;
    for (int k : k_range) {
        if (!lat.dilate_fits(tree.top, std::ldexp(1.0, k))) continue;
        IndicatorSet mask = shell_mask(tree.top, k, lat);
        GridFunction fk = masked(f, mask);
        const double norm2 = fk.norm2_space() * fk.norm2_space();
        if (norm2 <= 0.0) continue; // empty shell: skipped
        CoefficientTable ck = coefficients(fk, tree.members, fac);
        double lhs = 0.0;
        for (const auto& v : ck.values) lhs += std::norm(v);
        ConstantReport r = ConstantReport::make("bessel_shell", instance, lhs, norm2);
        r.k = k;
        out.push_back(r);
    }
    return out;
}

// Least-squares decay exponent from log2(ratio) against k; requires two or
// more points.
inline std::optional<double> fitted_decay_exponent(const std::vector<ConstantReport>& reports) {
    std::vector<std::pair<double, double>> pts;
    for (const ConstantReport& r : reports)
        if (!r.degenerate && r.ratio > 0.0) pts.push_back({r.k, std::log2(r.ratio)});
    if (pts.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    return -(n * sxy - sx * sy) / denom;
}

// The L infinity-normalized two-power envelope adapted to the tree top.
inline GridFunction top_envelope(const Tree& tree, int N, const Lattice& lat) {
    const GridSpec& spec = lat.spec();
    GridFunction out(spec);
    const int n = spec.n;
    const double c = lat.slope(tree.top);
    const double x1c = lat.center_x1(tree.top);
    const double shc = lat.center_shear(tree.top);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double dx = a - x1c;
            dx -= n * std::floor(dx / n + 0.5);
            double dy = b - c * a - shc;
            dy -= n * std::floor(dy / n + 0.5);
            const double rx = std::abs(dx) / lat.length_cells(tree.top.l);
            const double ry = std::abs(dy) / lat.w_cells();
            out.at(a, b) = 1.0 / (1.0 + std::pow(rx, N) + std::pow(ry, N));
        }
    return out;
}

struct SquareFunctionReports {
    std::vector<ConstantReport> lp;          // sq_lp per p
    std::vector<ConstantReport> shell_decay; // sq_shell per (p = 2, k)
    std::optional<ConstantReport> bmo;       // sq_bmo, absent if precondition failed
    ConstantReport jn;                       // jn_halving
    bool bmo_precondition_failed = false;
};

inline SquareFunctionReports check_square_function(const Tree& tree, const GridFunction& f,
                                                   const std::vector<double>& p_list, int N,
                                                   const std::vector<int>& k_range,
                                                   const CoefficientTable& coeffs,
                                                   const PacketFactory& fac, double uniform_cap,
                                                   const std::string& instance) {
    const Lattice& lat = fac.lattice();
    SquareFunctionReports out;
    CoefficientTable local = coefficients(f, tree.members, fac);

    GridFunction delta_f = tree_square_function(tree, local, SquareKind::cells, lat);
    GridFunction envelope = top_envelope(tree, N, lat);
    GridFunction f_env = f;
    for (std::size_t z = 0; z < f_env.data().size(); ++z) f_env.data()[z] *= envelope.data()[z];
    for (double p : p_list) {
        ConstantReport r =
            ConstantReport::make("sq_lp", instance, norm_p(delta_f, p), norm_p(f_env, p));
        r.p = p;
        out.lp.push_back(r);
    }

    for (int k : k_range) {
        if (!lat.dilate_fits(tree.top, std::ldexp(1.0, k))) continue;
        IndicatorSet mask = shell_mask(tree.top, k, lat);
        GridFunction fk = masked(f, mask);
        if (fk.norm2_space() <= 0.0) continue;
        CoefficientTable ck = coefficients(fk, tree.members, fac);
        GridFunction dk = tree_square_function(tree, ck, SquareKind::cells, lat);
        for (double p : p_list) {
            const double rhs = norm_p(fk, p);
            if (rhs <= 0.0) continue;
            ConstantReport r = ConstantReport::make("sq_shell", instance, norm_p(dk, p), rhs);
            r.k = k;
            r.p = p;
            out.shell_decay.push_back(r);
        }
    }

    // BMO-type control requires the uniform size estimate first.
    const double uniform_ratio = uniform_size_ratio(tree, local, lat);
    if (uniform_ratio <= uniform_cap) {
        IndicatorSet dil(lat.spec());
        lat.for_each_dilated_point(tree.top, lat.comparability(),
                                   [&](int a, int b) { dil.set(a, b); });
        double avg = 0.0;
        for (int a = 0; a < lat.spec().n; ++a)
            for (int b = 0; b < lat.spec().n; ++b)
                if (dil.test(a, b)) avg += delta_f.at(a, b).real();
        avg *= lat.spec().cell_area();
        const double rhs = avg / std::sqrt(lat.tile_area(tree.top.l));
        ConstantReport r = ConstantReport::make("sq_bmo", instance, delta_f.norm2_space(), rhs);
        out.bmo = r;
    } else {
        out.bmo_precondition_failed = true;
    }

    // Interval-generation halving, in the weakened per-generation form.
    const double sigma = realized_size(tree, local, lat);
    JNResult jn = john_nirenberg_levels(tree, local, sigma > 0 ? sigma : 1.0, lat);
    double worst = 0.0;
    for (std::size_t g = 1; g < jn.union_measures.size(); ++g)
        worst = std::max(worst, jn.union_measures[g] / jn.union_measures[g - 1]);
    out.jn = ConstantReport::make("jn_halving", instance, worst, 0.5);
    return out;
}

// Aggregate weak-type sum over the whole forest against the endpoint bound.
inline ConstantReport balance_aggregate(const Forest& forest, const IndicatorSet& E,
                                        const IndicatorSet& F, double p, const Lattice& lat,
                                        const std::string& instance) {
    const double em = E.measure();
    const double fm = F.measure();
    double lhs = 0.0;
    for (const auto& [key, trees] : forest.strata)
        for (const SelectedTree& st : trees)
            lhs += key.delta * key.sigma * lat.tile_area(st.tree.top.l);
    const double rhs = p >= 2.0 ? std::pow(fm, 1.0 / p) * std::pow(em, 1.0 - 1.0 / p)
                                : std::pow(em, 1.0 - 1.0 / p) * std::pow(fm, 1.0 / p);
    ConstantReport r = ConstantReport::make("weak_type", instance, lhs, rhs);
    r.p = p;
    return r;
}

// Closed-form two-term minimum summation: pure arithmetic self-test.
inline ConstantReport min_split_ratio(double delta, double em, double fm,
                                      const std::string& instance) {
    double sum = 0.0;
    for (int e = 0; e >= -20; --e) {
        const double sigma = std::ldexp(1.0, e);
        sum += delta * sigma * std::min(em / delta, fm / (sigma * sigma));
    }
    ConstantReport r =
        ConstantReport::make("min_split", instance, sum, std::sqrt(delta * em * fm));
    r.delta = delta;
    return r;
}

// Large size forces large intersection with F on a dilated top.
inline std::optional<ConstantReport> check_size_intersection(const Tree& tree,
                                                              const IndicatorSet& F, double eps,
                                                              const CoefficientTable& coeffs,
                                                              const Lattice& lat,
                                                              const std::string& instance) {
    const double sigma = realized_size(tree, coeffs, lat);
    if (sigma <= 0.0) {
        ConstantReport r = ConstantReport::make("intersection", instance, 0.0, 0.0);
        r.degenerate = true;
        r.sigma = 0.0;
        r.eps = eps;
        return r;
    }
    const double factor = std::pow(sigma, -eps);
    if (!lat.dilate_fits(tree.top, factor)) return std::nullopt; // skipped with diagnostic
    long long inside = 0, total = 0;
    lat.for_each_dilated_point(tree.top, factor, [&](int a, int b) {
        ++total;
        if (F.test(a, b)) ++inside;
    });
    const double density = total > 0 ? static_cast<double>(inside) / total : 0.0;
    ConstantReport r = ConstantReport::make("intersection", instance, density,
                                            std::pow(sigma, 1.0 + eps));
    r.sigma = sigma;
    r.eps = eps;
    return r;
}

// Fiber intersection claim: organized tiles meet F heavily on their shells.
inline std::vector<ConstantReport> check_fiber_intersection(const MaximalOrganization& org,
                                                            const IndicatorSet& F, double eps,
                                                            const Lattice& lat,
                                                            const std::string& instance) {
    std::vector<ConstantReport> out;
    if (org.sigma <= 0.0) return out;
    for (const auto& [ri, k] : org.shell_class) {
        if (k < 0) continue;
        const Tile R = org.incomparable[static_cast<std::size_t>(ri)];
        const double factor = std::ldexp(1.0, k);
        if (!lat.dilate_fits(R, factor)) continue;
        long long inside = 0, total = 0;
        lat.for_each_dilated_point(R, factor, [&](int a, int b) {
            ++total;
            if (F.test(a, b)) ++inside;
        });
        const double density = total > 0 ? static_cast<double>(inside) / total : 0.0;
        const int j = org.coverage_class.at(ri);
        const double s_eps = std::pow(org.sigma, -eps);
        const double rhs = std::ldexp(1.0, -j) * std::pow(org.sigma, 1.0 + 3.0 * eps) *
                           (s_eps / factor) * (s_eps / factor);
        ConstantReport r = ConstantReport::make("fiber_intersection", instance, density, rhs);
        r.k = k;
        r.j = j;
        r.sigma = org.sigma;
        r.delta = org.delta;
        r.eps = eps;
        out.push_back(r);
    }
    return out;
}

// Oracle comparison wrapper (constant fields).
inline std::vector<ConstantReport> check_oracle(const PacketFactory& fac,
                                                const std::string& instance, std::uint64_t seed) {
    const Lattice& lat = fac.lattice();
    const GridSpec& spec = lat.spec();
    Rng rng(mix_seed(seed, 9));
    std::vector<GridFunction> inputs;
    for (int t = 0; t < 20; ++t) {
        GridFunction fh(spec);
        for (int q = 1; q <= spec.max_bin(); ++q)
            for (int p = spec.min_bin(); p <= spec.max_bin(); ++p)
                if (in_band_trapezoid(lat, p, q))
                    fh.at_bin(p, q) = cdouble(rng.uniform(-1, 1), rng.uniform(-1, 1));
        inputs.push_back(inverse_transform(fh));
    }
    const double u0 = rng.uniform(-0.95, 0.95);
    OracleComparison cmp = compare_with_oracle(inputs, u0, fac);
    std::vector<ConstantReport> out;
    for (std::size_t idx = 0; idx < cmp.rel_errors.size(); ++idx) {
        ConstantReport r =
            ConstantReport::make("oracle_recon", instance + "#" + std::to_string(idx),
                                 cmp.rel_errors[idx], 0.02);
        out.push_back(r);
    }
    return out;
}

// --- the per-instance pipeline -------------------------------------------------

struct InstanceRun {
    Instance instance;
    Forest forest;
    std::vector<ConstantReport> reports;
    std::vector<std::string> diagnostics;
    std::string organization_text; // serialized organization of the main stratum
    double max_realized_sigma = 0.0;
};

inline InstanceRun run_instance(const RunConfig& cfg, const Lattice& lat, const PacketFactory& fac,
                                std::uint64_t seed, bool with_packet_checks = true) {
    InstanceRun run;
    run.instance = generate_instance(cfg, lat, seed);
    Instance& inst = run.instance;

    DensityCalculator calc(lat, inst.set_e, inst.field, cfg.p_chi);
    const std::vector<Tile> universe = lat.enumerate();
    const GridFunction f_ind = inst.set_f.to_function();
    CoefficientTable all_coeffs = coefficients(f_ind, universe, fac);
    inst.tiles = select_tiles(inst, all_coeffs, calc, cfg.max_tiles);

    CoefficientTable coeffs;
    coeffs.side = CoeffSide::f_side;
    coeffs.tiles = inst.tiles;
    coeffs.values.resize(inst.tiles.size());
    for (std::size_t idx = 0; idx < inst.tiles.size(); ++idx)
        coeffs.values[idx] = all_coeffs.at(inst.tiles[idx]);

    StatsTable stats = density_stats(calc, inst.tiles, coeffs);
    {
        int truncated = 0;
        for (const TileStats& row : stats.rows)
            if (row.udense_truncated) ++truncated;
        if (truncated > 0)
            run.diagnostics.push_back("udense supremum realized at l_max for " +
                                      std::to_string(truncated) + " tiles (lattice truncation)");
    }
    run.forest = build_forest(inst.tiles, stats, coeffs, lat, ForestParams{cfg.sigma_min});

    const std::string& id = inst.id;
    auto est = check_estimates(run.forest, inst.set_e, inst.set_f, cfg.eps, lat, id);
    run.reports.insert(run.reports.end(), est.begin(), est.end());

    for (const auto& [key, trees] : run.forest.strata)
        for (const SelectedTree& st : trees)
            run.max_realized_sigma =
                std::max(run.max_realized_sigma, realized_size(st.tree, coeffs, lat));
    {
        ConstantReport r = ConstantReport::make("size_cap", id, run.max_realized_sigma,
                                                cfg.checks.size_cap);
        run.reports.push_back(r);
    }

    // Closed-form minimum arithmetic on instance data.
    {
        const double em = inst.set_e.measure();
        const double fm = inst.set_f.measure();
        if (em > 0 && fm > 0) {
            for (const auto& [key, trees] : run.forest.strata) {
                run.reports.push_back(min_split_ratio(key.delta, em, fm, id));
                break; // one representative delta per instance
            }
        }
    }

    for (double p : cfg.checks.p_values)
        run.reports.push_back(balance_aggregate(run.forest, inst.set_e, inst.set_f, p, lat, id));

    if (with_packet_checks) {
        auto oracle = check_oracle(fac, id, seed);
        run.reports.insert(run.reports.end(), oracle.begin(), oracle.end());
    }

    // Tree-level checks on the most populated trees across strata.
    std::vector<std::pair<ForestKey, const SelectedTree*>> sample;
    for (const auto& [key, trees] : run.forest.strata)
        for (const SelectedTree& st : trees) sample.push_back({key, &st});
    std::stable_sort(sample.begin(), sample.end(), [](const auto& a, const auto& b) {
        return a.second->tree.members.size() > b.second->tree.members.size();
    });
    if (static_cast<int>(sample.size()) > cfg.checks.tree_sample)
        sample.resize(static_cast<std::size_t>(cfg.checks.tree_sample));
    for (auto& [key, st] : sample) {
        if (with_packet_checks) {
            run.reports.push_back(check_tree_bound(st->tree, inst.set_e, inst.set_f, inst.field,
                                                   fac, calc, coeffs, id));
        }
        auto [one_part, two_part] = lat.tree_split(st->tree);
        one_part.members.push_back(st->tree.top); // the top anchors its own 1-tree
        std::sort(one_part.members.begin(), one_part.members.end());
        one_part.members.erase(std::unique(one_part.members.begin(), one_part.members.end()),
                               one_part.members.end());

        SquareFunctionReports sq =
            check_square_function(one_part, f_ind, cfg.checks.p_values, cfg.smooth_n,
                                  cfg.checks.bessel_k, coeffs, fac, cfg.checks.uniform_size_cap, id);
        run.reports.insert(run.reports.end(), sq.lp.begin(), sq.lp.end());
        if (sq.bmo) run.reports.push_back(*sq.bmo);
        if (sq.bmo_precondition_failed)
            run.diagnostics.push_back("bmo skipped: uniform size estimate failed");
        run.reports.push_back(sq.jn);

        if (auto inter = check_size_intersection(st->tree, inst.set_f, cfg.eps, coeffs, lat, id))
            run.reports.push_back(*inter);
        else
            run.diagnostics.push_back("intersection skipped: dilated top exceeds torus");
    }

    // Shell-decay fits on dedicated trees: maximal 1-trees from the instance
    // set under the heaviest active tops whose largest shell embeds.
    {
        int max_k = 0;
        for (int k : cfg.checks.bessel_k) max_k = std::max(max_k, k);
        struct Candidate {
            double weight;
            Tile top;
        };
        std::vector<Candidate> cands;
        for (std::size_t idx = 0; idx < coeffs.tiles.size(); ++idx) {
            const Tile& t = coeffs.tiles[idx];
            if (!lat.dilate_fits(t, std::ldexp(1.0, max_k))) continue;
            if (calc.columns_in(t.omega()).empty()) continue;
            cands.push_back({std::norm(coeffs.values[idx]), t});
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.weight != b.weight) return a.weight > b.weight;
            return a.top < b.top;
        });
        const int decay_trees = std::max(1, cfg.checks.tree_sample / 2);
        for (int z = 0; z < decay_trees && z < static_cast<int>(cands.size()); ++z) {
            Tree tree = lat.maximal_tree_with_top(cands[static_cast<std::size_t>(z)].top,
                                                  inst.tiles, TreeKind::one);
            tree.members.push_back(tree.top);
            std::sort(tree.members.begin(), tree.members.end());
            tree.members.erase(std::unique(tree.members.begin(), tree.members.end()),
                               tree.members.end());
            auto bessel = check_bessel_shells(tree, f_ind, cfg.checks.bessel_k, fac, id);
            run.reports.insert(run.reports.end(), bessel.begin(), bessel.end());
            if (auto n_hat = fitted_decay_exponent(bessel))
                run.reports.push_back(ConstantReport::make("bessel_decay_fit", id, *n_hat, 0.0));

            SquareFunctionReports sq =
                check_square_function(tree, f_ind, cfg.checks.p_values, cfg.smooth_n,
                                      cfg.checks.bessel_k, coeffs, fac,
                                      cfg.checks.uniform_size_cap, id);
            run.reports.insert(run.reports.end(), sq.shell_decay.begin(), sq.shell_decay.end());
            std::vector<ConstantReport> low_p;
            double p_min = 1e300;
            for (double p : cfg.checks.p_values) p_min = std::min(p_min, p);
            for (const ConstantReport& r : sq.shell_decay)
                if (r.p == p_min) low_p.push_back(r);
            if (auto n_hat = fitted_decay_exponent(low_p))
                run.reports.push_back(ConstantReport::make("sq_decay_fit", id, *n_hat, 0.0));
        }
    }

    // Organization-level checks on the most populated stratum.
    const std::pair<const ForestKey, std::vector<SelectedTree>>* best = nullptr;
    for (const auto& entry : run.forest.strata)
        if (!best || entry.second.size() > best->second.size()) best = &entry;
    if (best) {
        MaximalOrganization org = maximal_organize(best->second, best->first.delta,
                                                   best->first.sigma, calc, inst.set_e, inst.field,
                                                   lat);
        run.organization_text = organization_to_string(org);
        for (int ti : org.assignment_errors)
            run.diagnostics.push_back("assignment error for tree " + std::to_string(ti));
        auto fiber = check_fiber_intersection(org, inst.set_f, cfg.eps, lat, inst.id);
        run.reports.insert(run.reports.end(), fiber.begin(), fiber.end());
        {
            ConstantReport r = ConstantReport::make("disjoint_top_fraction", inst.id,
                                                    org.disjoint_top_fraction, 1.0);
            run.reports.push_back(r);
        }

        // Density cover over the incomparable family.
        CoverResult cover =
            density_cover(org.incomparable, inst.set_e, inst.field, best->first.delta, lat);
        ConstantReport r = ConstantReport::make("density_cover", inst.id, cover.input_area,
                                                inst.set_e.measure() / best->first.delta);
        r.delta = best->first.delta;
        run.reports.push_back(r);
        if (!cover.tail_violations.empty())
            run.diagnostics.push_back("density cover tail violations: " +
                                      std::to_string(cover.tail_violations.size()));
    }
    return run;
}

} // namespace wavetile
