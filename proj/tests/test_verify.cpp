#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "wavetile/prng.hpp"
#include "wavetile/svg.hpp"
#include "wavetile/verify.hpp"

using namespace wavetile;

namespace {

RunConfig small_config() {
    json j = json::parse(R"({
      "grid": {"n": 64, "side_length": 1.0},
      "band": {"w": 0.25, "l_max": 2},
      "field": {"kind": "random_walk"},
      "set_e": {"kind": "blobs", "count": 5, "min_radius": 0.06, "max_radius": 0.2},
      "set_f": {"kind": "blobs", "count": 4, "min_radius": 0.05, "max_radius": 0.18},
      "tiles": {"max_tiles": 120},
      "checks": {"bessel_k": [1, 2], "tree_sample": 3}
    })");
    return parse_config(j);
}

} // namespace

TEST_CASE("constant reports: ratio, degeneracy, csv round trip") {
    ConstantReport good = ConstantReport::make("density", "s1", 2.0, 8.0);
    CHECK(good.ratio == 0.25);
    CHECK_FALSE(good.degenerate);

    ConstantReport bad = ConstantReport::make("density", "s1", 1.0, 0.0);
    CHECK(bad.degenerate);
    CHECK(bad.ratio == 0.0);

    std::ostringstream os;
    write_csv_header(os);
    good.delta = 0.5;
    good.p = 1.25;
    write_csv_row(os, good);
    const std::string text = os.str();
    CHECK(text.find("inequality_id,instance_id,delta,sigma,k,j,p,eps,lhs,rhs,ratio") == 0);
    CHECK(text.find("density,s1,0.5,,,,1.25,,2,8,0.25") != std::string::npos);
}

TEST_CASE("closed-form minimum split stays below four on random triples") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const double delta = std::exp(rng.uniform(std::log(1e-5), 0.0));
        const double em = std::exp(rng.uniform(std::log(1e-4), std::log(4.0)));
        const double fm = std::exp(rng.uniform(std::log(1e-4), std::log(4.0)));
        ConstantReport r = min_split_ratio(delta, em, fm, "triple");
        REQUIRE_FALSE(r.degenerate);
        CHECK(r.ratio <= 4.0);
    }
    // The worked dyadic example: delta = |E| = |F| = 1 sums to about two.
    ConstantReport unit = min_split_ratio(1.0, 1.0, 1.0, "unit");
    CHECK(unit.ratio > 1.9);
    CHECK(unit.ratio < 2.1);
}

TEST_CASE("decay-fit regression recovers a planted slope") {
    std::vector<ConstantReport> reports;
    for (int k = 1; k <= 3; ++k) {
        ConstantReport r = ConstantReport::make("bessel_shell", "x", std::ldexp(1.0, -5 * k), 1.0);
        r.k = k;
        reports.push_back(r);
    }
    auto fit = fitted_decay_exponent(reports);
    REQUIRE(fit.has_value());
    CHECK(close_abs(*fit, 5.0, 1e-12));
    CHECK_FALSE(fitted_decay_exponent({reports[0]}).has_value());
}

TEST_CASE("config validation names the offending field") {
    json j = json::parse(R"({"grid": {"n": 48}})");
    CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("grid.n"));
    j = json::parse(R"({"grid": {"n": 64}, "band": {"w": 2.5}})");
    CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("band.w"));
    j = json::parse(R"({"constants": {"p_chi": 7}})");
    CHECK_THROWS_WITH(parse_config(j), Catch::Matchers::ContainsSubstring("p_chi"));
    // A band too wide for the Nyquist gap surfaces at lattice build.
    j = json::parse(R"({"grid": {"n": 64}, "band": {"w": 0.03125, "l_max": 1}})");
    RunConfig cfg = parse_config(j);
    CHECK_THROWS_WITH(cfg.make_lattice(), Catch::Matchers::ContainsSubstring("band.w"));
}

TEST_CASE("instance generation is deterministic and resolution coherent") {
    RunConfig cfg = small_config();
    Lattice lat = cfg.make_lattice();
    Instance a = generate_instance(cfg, lat, 7);
    Instance b = generate_instance(cfg, lat, 7);
    CHECK(a.field.u == b.field.u);
    CHECK(a.set_e.mask == b.set_e.mask);
    CHECK(a.set_f.mask == b.set_f.mask);
    Instance c = generate_instance(cfg, lat, 8);
    CHECK(a.set_e.mask != c.set_e.mask);

    // Same seed at doubled resolution: measures converge (within a few cells
    // of boundary), and the field is a column-refinement.
    json j2;
    RunConfig cfg2 = cfg;
    cfg2.n = 128;
    Lattice lat2 = cfg2.make_lattice();
    Instance fine = generate_instance(cfg2, lat2, 7);
    CHECK(close_rel(fine.set_e.measure(), a.set_e.measure(), 0.12));
    for (int col = 0; col < lat.spec().n; ++col)
        CHECK(fine.field.u[static_cast<std::size_t>(2 * col)] == a.field.u[static_cast<std::size_t>(col)]);
    (void)j2;
}

TEST_CASE("full instance run: reports present, deterministic, forest faithful") {
    RunConfig cfg = small_config();
    Lattice lat = cfg.make_lattice();
    PacketFactory fac(lat, cfg.quad_tol, cfg.t_max_factor);
    InstanceRun run1 = run_instance(cfg, lat, fac, 3);
    InstanceRun run2 = run_instance(cfg, lat, fac, 3);
    REQUIRE(run1.reports.size() == run2.reports.size());
    for (std::size_t idx = 0; idx < run1.reports.size(); ++idx) {
        CHECK(run1.reports[idx].inequality_id == run2.reports[idx].inequality_id);
        CHECK(run1.reports[idx].lhs == run2.reports[idx].lhs);
        CHECK(run1.reports[idx].rhs == run2.reports[idx].rhs);
    }
    CHECK(forest_to_string(run1.forest) == forest_to_string(run2.forest));

    // Required families all appear.
    std::set<std::string> ids;
    for (const ConstantReport& r : run1.reports) ids.insert(r.inequality_id);
    for (const char* need : {"orthogonality", "density", "maximal", "weak_type", "size_cap",
                             "min_split", "tree_bound", "jn_halving"})
        CHECK(ids.count(need) == 1);

    // Forest tiles are exactly the instance tiles.
    std::multiset<Tile> seen;
    for (auto& [key, trees] : run1.forest.strata)
        for (const SelectedTree& st : trees)
            for (const Tile& s : st.tree.members) seen.insert(s);
    for (const Tile& s : run1.forest.zero_udense) seen.insert(s);
    for (const Tile& s : run1.forest.residual_small_sigma) seen.insert(s);
    CHECK(seen == std::multiset<Tile>(run1.instance.tiles.begin(), run1.instance.tiles.end()));
}

TEST_CASE("estimates checks produce one report triple per stratum with the stated sides") {
    RunConfig cfg = small_config();
    Lattice lat = cfg.make_lattice();
    PacketFactory fac(lat, cfg.quad_tol, cfg.t_max_factor);
    InstanceRun run = run_instance(cfg, lat, fac, 5);
    const double em = run.instance.set_e.measure();
    const double fm = run.instance.set_f.measure();
    auto reports = check_estimates(run.forest, run.instance.set_e, run.instance.set_f, cfg.eps,
                                   lat, "x");
    REQUIRE(reports.size() == 3 * run.forest.strata.size());
    for (std::size_t idx = 0; idx < reports.size(); idx += 3) {
        const double delta = reports[idx].delta;
        const double sigma = reports[idx].sigma;
        const double lhs = reports[idx].lhs;
        CHECK(reports[idx + 1].lhs == lhs);
        CHECK(reports[idx + 2].lhs == lhs);
        CHECK(close_rel(reports[idx].rhs, fm / (sigma * sigma), 1e-12));
        CHECK(close_rel(reports[idx + 1].rhs, em / delta, 1e-12));
        // A single-tree stratum's left side recomputes geometrically.
        double area = 0.0;
        for (const SelectedTree& st : run.forest.strata.at(ForestKey{delta, sigma}))
            area += lat.tile_area(st.tree.top.l);
        CHECK(close_rel(lhs, area, 1e-12));
    }
}

TEST_CASE("degenerate sides: empty F forces zero tree bound and degenerate estimates") {
    RunConfig cfg = small_config();
    Lattice lat = cfg.make_lattice();
    PacketFactory fac(lat, cfg.quad_tol, cfg.t_max_factor);
    Instance inst = generate_instance(cfg, lat, 11);
    IndicatorSet empty(lat.spec());
    DensityCalculator calc(lat, inst.set_e, inst.field, cfg.p_chi);
    Tile top{1, 5, 1, 2};
    Tree tree{top, {top}, TreeKind::general};
    CoefficientTable zero;
    zero.tiles = {top};
    zero.values = {cdouble{}};
    ConstantReport r =
        check_tree_bound(tree, inst.set_e, empty, inst.field, fac, calc, zero, "x");
    CHECK(r.lhs == 0.0);

    // |F| = 0 degenerates the orthogonality side.
    Forest forest;
    forest.strata[ForestKey{0.5, 0.25}].push_back(SelectedTree{tree, 0.1});
    auto reports = check_estimates(forest, inst.set_e, empty, cfg.eps, lat, "x");
    CHECK(reports[0].degenerate);
}

TEST_CASE("svg scatter emits a well-formed document") {
    std::vector<ConstantReport> reports;
    for (int k = 1; k <= 3; ++k) {
        ConstantReport r = ConstantReport::make("bessel_shell", "x", std::ldexp(1.0, -k), 1.0);
        r.k = k;
        reports.push_back(r);
    }
    const std::string svg = svg_scatter(reports, &ConstantReport::k, "test");
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("circle") != std::string::npos);
}
