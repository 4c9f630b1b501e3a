#include <catch2/catch_amalgamated.hpp>

#include "wavetile/modelop.hpp"
#include "wavetile/prng.hpp"

using namespace wavetile;

namespace {

Lattice test_lattice() { return Lattice(GridSpec(64, 1.0), 16, 2); }

GridFunction random_function(const GridSpec& spec, Rng& rng) {
    GridFunction f(spec);
    for (auto& v : f.data()) v = cdouble(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return f;
}

GridFunction random_band_limited(const Lattice& lat, Rng& rng) {
    const GridSpec& spec = lat.spec();
    GridFunction fh(spec);
    for (int q = 1; q <= spec.max_bin(); ++q)
        for (int p = spec.min_bin(); p <= spec.max_bin(); ++p)
            if (in_band_trapezoid(lat, p, q))
                fh.at_bin(p, q) = cdouble(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return inverse_transform(fh);
}

std::vector<Tile> sample_tiles(const Lattice& lat, Rng& rng, int count) {
    std::vector<Tile> out;
    while (static_cast<int>(out.size()) < count) {
        const int l = static_cast<int>(rng.below(lat.l_max() + 1));
        out.push_back(Tile{static_cast<std::int8_t>(l),
                           static_cast<std::int16_t>(rng.below(lat.num_omega(l))),
                           static_cast<std::int16_t>(rng.below(lat.num_x_cells(l))),
                           static_cast<std::int16_t>(rng.below(lat.num_shear_cells()))});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

TEST_CASE("coefficients: normalization, band support, equality with direct products") {
    Lattice lat = test_lattice();
    PacketFactory fac(lat);
    Rng rng(51);
    Tile s{1, 5, 1, 2};

    // f = phi_s picks up coefficient one at s.
    GridFunction phi = fac.to_grid(fac.make_phi(s));
    CoefficientTable t1 = coefficients(phi, {s}, fac);
    CHECK(std::abs(t1.at(s) - cdouble(1.0, 0.0)) < 1e-8);

    // f supported outside the packet band: all coefficients vanish.
    GridFunction low(lat.spec());
    GridFunction low_hat(lat.spec());
    low_hat.at_bin(2, 1) = 1.0;
    low = inverse_transform(low_hat);
    std::vector<Tile> tiles = sample_tiles(lat, rng, 12);
    CoefficientTable t2 = coefficients(low, tiles, fac);
    for (const auto& v : t2.values) CHECK(std::abs(v) < 1e-12);

    // Random f: batched frequency-side sums match the naive space-side loop.
    GridFunction f = random_function(lat.spec(), rng);
    CoefficientTable t3 = coefficients(f, tiles, fac);
    for (const Tile& tile : t3.tiles)
        CHECK(std::abs(t3.at(tile) - coefficient_direct(f, tile, fac)) < 1e-10);
}

TEST_CASE("fixed-omega Bessel bound with constant at most four") {
    Lattice lat = test_lattice();
    PacketFactory fac(lat);
    Rng rng(52);
    GridFunction f = random_function(lat.spec(), rng);
    const double f2 = f.norm2_space() * f.norm2_space();
    for (int l = 0; l <= lat.l_max(); ++l) {
        FrequencyInterval om{l, static_cast<int>(rng.below(lat.num_omega(l)))};
        std::vector<Tile> tiles =
            lat.enumerate([&](const Tile& s) { return s.l == om.l && s.k == om.k; });
        CoefficientTable table = coefficients(f, tiles, fac);
        double sum = 0.0;
        for (const auto& v : table.values) sum += std::norm(v);
        CHECK(sum <= 4.0 * f2);
    }
}

TEST_CASE("model_apply: empty sum, single tile, linearity") {
    Lattice lat = test_lattice();
    PacketFactory fac(lat);
    Rng rng(53);
    VectorField field(lat.spec().n);
    for (int a = 0; a < lat.spec().n; ++a) field.u[a] = 0.9 * std::sin(0.2 * a);

    GridFunction f = random_function(lat.spec(), rng);
    CHECK(model_apply(f, {}, field, fac).norm2_space() == 0.0);

    // Single tile with f = phi_s: output is the curved packet itself.
    Tile s{0, 2, 1, 1};
    GridFunction phi = fac.to_grid(fac.make_phi(s));
    GridFunction got = model_apply(phi, {s}, field, fac);
    GridFunction h = fac.curved_samples(s, field);
    double worst = 0.0;
    for (std::size_t z = 0; z < got.data().size(); ++z)
        worst = std::max(worst, std::abs(got.data()[z] - h.data()[z]));
    CHECK(worst < 1e-8);

    // Linearity over a random pair.
    std::vector<Tile> tiles = sample_tiles(lat, rng, 10);
    GridFunction g = random_function(lat.spec(), rng);
    const cdouble a(0.6, -0.8);
    GridFunction combo(lat.spec());
    for (std::size_t z = 0; z < combo.data().size(); ++z)
        combo.data()[z] = a * f.data()[z] + g.data()[z];
    GridFunction lhs = model_apply(combo, tiles, field, fac);
    GridFunction rf = model_apply(f, tiles, field, fac);
    GridFunction rg = model_apply(g, tiles, field, fac);
    worst = 0.0;
    for (std::size_t z = 0; z < lhs.data().size(); ++z)
        worst = std::max(worst, std::abs(lhs.data()[z] - (a * rf.data()[z] + rg.data()[z])));
    CHECK(worst < 1e-10);
}

TEST_CASE("horizontal field: column route equals frequency-side assembly") {
    Lattice lat = test_lattice();
    PacketFactory fac(lat);
    Rng rng(54);
    GridFunction f = random_band_limited(lat, rng);
    std::vector<Tile> tiles = sample_tiles(lat, rng, 24);
    VectorField zero(lat.spec().n, 0.0);
    GridFunction by_columns = model_apply(f, tiles, zero, fac);
    GridFunction by_spectrum = model_apply_flat_spectral(f, tiles, fac);
    double worst = 0.0;
    for (std::size_t z = 0; z < by_columns.data().size(); ++z)
        worst = std::max(worst, std::abs(by_columns.data()[z] - by_spectrum.data()[z]));
    CHECK(worst < 1e-10);
}

TEST_CASE("bilinear form: degenerate, monotone, matches the naive loop, order-free") {
    Lattice lat = test_lattice();
    PacketFactory fac(lat);
    Rng rng(55);
    const GridSpec& spec = lat.spec();
    VectorField field(spec.n);
    for (int a = 0; a < spec.n; ++a) field.u[a] = 0.8 * std::cos(0.13 * a);

    IndicatorSet E(spec), F(spec);
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.n; ++j) {
            if (rng.uniform() < 0.2) E.set(i, j);
            if (rng.uniform() < 0.15) F.set(i, j);
        }
    std::vector<Tile> tiles = sample_tiles(lat, rng, 16);

    IndicatorSet empty(spec);
    CHECK(bilinear_form(empty, F, tiles, field, fac) == 0.0);

    const double base = bilinear_form(E, F, tiles, field, fac);
    CHECK(base >= 0.0);

    // Naive per-tile recomputation.
    GridFunction fF = F.to_function(), fE = E.to_function();
    double naive = 0.0;
    for (const Tile& s : tiles) {
        const cdouble cf = coefficient_direct(fF, s, fac);
        const cdouble ce = inner_product(fE, fac.curved_samples(s, field));
        naive += std::abs(cf) * std::abs(ce);
    }
    CHECK(close_rel(base, naive, 1e-9));

    // Monotone under adding tiles.
    std::vector<Tile> more = tiles;
    for (const Tile& extra : sample_tiles(lat, rng, 6)) more.push_back(extra);
    std::sort(more.begin(), more.end());
    more.erase(std::unique(more.begin(), more.end()), more.end());
    CHECK(bilinear_form(E, F, more, field, fac) >= base - 1e-12);

    // Invariance under relabeling the tile order.
    std::vector<Tile> shuffled = tiles;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(bilinear_form(E, F, shuffled, field, fac) == base);
}

TEST_CASE("periodization identity holds to near rounding on the torus") {
    Lattice lat = test_lattice();
    PacketFactory fac(lat);
    Rng rng(56);
    GridFunction f = random_band_limited(lat, rng);

    FrequencyInterval om{1, 3};
    // Guard against vacuity: this omega's support meets the band content.
    {
        const GridFunction fh = forward_transform(f);
        double mass = 0.0;
        for (const SpectrumCell& c : fac.omega_table(om).root)
            mass += std::norm(fh.at_bin(c.b1, c.b2));
        REQUIRE(mass > 1e-6);
    }
    const double dev = periodization_check(f, om, fac);
    CHECK(dev < 1e-8);

    GridFunction zero(lat.spec());
    CHECK(periodization_check(zero, om, fac) == 0.0);

    // Deviation is invariant under translating f by one tile period.
    const Tile cell{1, 3, 0, 0};
    const int dx = lat.length_cells(1);
    GridFunction shifted(lat.spec());
    for (int a = 0; a < lat.spec().n; ++a)
        for (int b = 0; b < lat.spec().n; ++b)
            shifted.at(a, b) = f.at((a + dx) % lat.spec().n, b);
    const double dev2 = periodization_check(shifted, om, fac);
    CHECK(close_abs(dev, dev2, 1e-10));
    (void)cell;
}

TEST_CASE("constant-field oracle: sign action, contraction, model comparison") {
    Lattice lat = test_lattice();
    PacketFactory fac(lat);
    Rng rng(57);
    const GridSpec& spec = lat.spec();

    // A single tau-interior wave with positive xi picks up -i pi.
    GridFunction wave_hat(spec);
    const int q0 = static_cast<int>(std::lround(1.5 / lat.w()));
    wave_hat.at_bin(3, q0) = 1.0;
    GridFunction wave = inverse_transform(wave_hat);
    GridFunction acted = constant_field_oracle(wave, 0.0, lat);
    double worst = 0.0;
    for (std::size_t z = 0; z < wave.data().size(); ++z)
        worst = std::max(worst, std::abs(acted.data()[z] - cdouble(0.0, -M_PI) * wave.data()[z]));
    CHECK(worst < 1e-12);

    // Contraction by pi of the band projection.
    for (int trial = 0; trial < 100; ++trial) {
        GridFunction f = random_function(spec, rng);
        const double u0 = rng.uniform(-1.0, 1.0);
        CHECK(constant_field_oracle(f, u0, lat).norm2_space() <=
              M_PI * band_projection(f, lat).norm2_space() + 1e-12);
    }

    // Averaged reconstruction vs oracle: fitted scalar frozen after the
    // first input, relative error within two percent on twenty inputs.
    std::vector<GridFunction> inputs;
    for (int t = 0; t < 20; ++t) inputs.push_back(random_band_limited(lat, rng));
    const double u0 = 0.377214;
    OracleComparison cmp = compare_with_oracle(inputs, u0, fac);
    REQUIRE(cmp.rel_errors.size() == 20);
    for (double e : cmp.rel_errors) CHECK(e <= 0.02);
}

TEST_CASE("kernel family cover telescopes to one on the covered half-line") {
    for (double mag : {1e-6, 3.7e-3, 0.25, 1.0, 17.3, 4096.0}) {
        CHECK(close_rel(kernel_family_cover(-mag, -1.0), 1.0, 1e-12));
        CHECK(kernel_family_cover(mag, -1.0) == 0.0);
        CHECK(close_rel(kernel_family_cover(mag, +1.0), 1.0, 1e-12));
    }
    CHECK(kernel_family_cover(0.0, -1.0) == 0.0);
}
