#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavetile/organize.hpp"
#include "wavetile/prng.hpp"
#include "wavetile/squarefn.hpp"

namespace wavetile {

using nlohmann::json;

struct FieldSpec {
    std::string kind = "random_walk"; // constant | piecewise | random_walk
    double value = 0.0;               // constant
    std::vector<double> segments;     // piecewise
    int segment_count = 64;           // random_walk resolution (grid-independent)
    double step = 0.15;               // random_walk step
};

struct SetSpec {
    std::string kind = "blobs"; // rects | random | blobs
    std::vector<std::array<double, 4>> rects;
    double density = 0.2; // random: fill fraction over a 64x64 macro grid
    int blob_count = 5;
    double min_radius = 0.04;
    double max_radius = 0.18;
};

struct CheckSpec {
    std::vector<double> p_values = {1.25, 1.5, 2.0, 3.0};
    std::vector<int> bessel_k = {1, 2, 3};
    int tree_sample = 6;
    double uniform_size_cap = 4.0;
    double size_cap = 2.0; // recorded cap for the realized-size claim
};

struct RunConfig {
    int n = 256;
    double side_length = 1.0;
    double w = 0.0625;
    int l_max = 4;
    double comparability = 10.0;
    int p_chi = 8;
    double eps = 0.25;
    int smooth_n = 8;
    int sharpening = 3;
    double kappa = -0.15;
    double sigma_min = std::ldexp(1.0, -20);
    double quad_tol = 1e-6;
    double t_max_factor = 0.0; // 0 = auto
    FieldSpec field;
    SetSpec set_e;
    SetSpec set_f;
    int max_tiles = 400;
    int sweep_count = 8;
    std::uint64_t base_seed = 1;
    CheckSpec checks;
    std::string output = "out";

    int w_cells() const {
        const double cells = w * n / side_length;
        const double rounded = std::round(cells);
        if (std::abs(cells - rounded) > 1e-9)
            throw ConfigError("band.w is not a whole number of grid cells");
        return static_cast<int>(rounded);
    }

    Lattice make_lattice() const {
        BumpProfile prof;
        prof.sharpening = sharpening;
        prof.kappa = kappa;
        return Lattice(GridSpec(n, side_length), w_cells(), l_max, comparability, prof);
    }
};

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

} // namespace detail

inline RunConfig parse_config(const json& j) {
    RunConfig c;
    try {
        if (j.contains("grid")) {
            c.n = detail::get_or(j["grid"], "n", c.n);
            c.side_length = detail::get_or(j["grid"], "side_length", c.side_length);
        }
        if (j.contains("band")) {
            c.w = detail::get_or(j["band"], "w", c.w);
            c.l_max = detail::get_or(j["band"], "l_max", c.l_max);
        }
        if (j.contains("constants")) {
            const json& k = j["constants"];
            c.comparability = detail::get_or(k, "comparability", c.comparability);
            c.p_chi = detail::get_or(k, "p_chi", c.p_chi);
            c.eps = detail::get_or(k, "eps", c.eps);
            c.smooth_n = detail::get_or(k, "smooth_n", c.smooth_n);
            c.sharpening = detail::get_or(k, "sharpening", c.sharpening);
            c.kappa = detail::get_or(k, "kappa", c.kappa);
            c.sigma_min = detail::get_or(k, "sigma_min", c.sigma_min);
            c.quad_tol = detail::get_or(k, "quad_tol", c.quad_tol);
            c.t_max_factor = detail::get_or(k, "t_max_factor", c.t_max_factor);
        }
        auto parse_field = [&](const json& f) {
            FieldSpec spec;
            spec.kind = detail::get_or<std::string>(f, "kind", spec.kind);
            spec.value = detail::get_or(f, "value", spec.value);
            if (f.contains("segments") && f["segments"].is_array())
                spec.segments = f["segments"].get<std::vector<double>>();
            spec.segment_count = detail::get_or(f, "segment_count", spec.segment_count);
            spec.step = detail::get_or(f, "step", spec.step);
            return spec;
        };
        auto parse_set = [&](const json& s) {
            SetSpec spec;
            spec.kind = detail::get_or<std::string>(s, "kind", spec.kind);
            if (s.contains("rects"))
                for (const auto& r : s["rects"])
                    spec.rects.push_back({r.at(0).get<double>(), r.at(1).get<double>(),
                                          r.at(2).get<double>(), r.at(3).get<double>()});
            spec.density = detail::get_or(s, "density", spec.density);
            spec.blob_count = detail::get_or(s, "count", spec.blob_count);
            spec.min_radius = detail::get_or(s, "min_radius", spec.min_radius);
            spec.max_radius = detail::get_or(s, "max_radius", spec.max_radius);
            return spec;
        };
        if (j.contains("field")) c.field = parse_field(j["field"]);
        if (j.contains("set_e")) c.set_e = parse_set(j["set_e"]);
        if (j.contains("set_f")) c.set_f = parse_set(j["set_f"]);
        if (j.contains("tiles")) c.max_tiles = detail::get_or(j["tiles"], "max_tiles", c.max_tiles);
        if (j.contains("sweep")) {
            c.sweep_count = detail::get_or(j["sweep"], "count", c.sweep_count);
            c.base_seed = detail::get_or<std::uint64_t>(j["sweep"], "base_seed", c.base_seed);
        }
        if (j.contains("checks")) {
            const json& k = j["checks"];
            if (k.contains("p_values")) c.checks.p_values = k["p_values"].get<std::vector<double>>();
            if (k.contains("bessel_k")) c.checks.bessel_k = k["bessel_k"].get<std::vector<int>>();
            c.checks.tree_sample = detail::get_or(k, "tree_sample", c.checks.tree_sample);
            c.checks.uniform_size_cap = detail::get_or(k, "uniform_size_cap", c.checks.uniform_size_cap);
            c.checks.size_cap = detail::get_or(k, "size_cap", c.checks.size_cap);
        }
        c.output = detail::get_or<std::string>(j, "output", c.output);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    // Range validation with field names.
    if (c.n < 32 || (c.n & (c.n - 1)) != 0) throw ConfigError("grid.n must be a power of two >= 32");
    if (!(c.side_length > 0)) throw ConfigError("grid.side_length must be positive");
    if (!(c.w > 0) || c.w > c.side_length) throw ConfigError("band.w out of range");
    if (c.l_max < 0 || c.l_max > 16) throw ConfigError("band.l_max out of range");
    if (c.p_chi < 4 || c.p_chi % 2 != 0) throw ConfigError("constants.p_chi must be even and >= 4");
    if (!(c.eps > 0 && c.eps < 1)) throw ConfigError("constants.eps must lie in (0,1)");
    if (c.smooth_n < 2) throw ConfigError("constants.smooth_n too small");
    if (c.sharpening < 2 || c.sharpening > 8) throw ConfigError("constants.sharpening out of range");
    if (c.kappa == 0.0 || std::abs(c.kappa) > 1.0) throw ConfigError("constants.kappa out of range");
    if (!(c.sigma_min > 0)) throw ConfigError("constants.sigma_min must be positive");
    if (!(c.quad_tol > 0)) throw ConfigError("constants.quad_tol must be positive");
    if (c.max_tiles < 1) throw ConfigError("tiles.max_tiles must be positive");
    if (c.sweep_count < 1) throw ConfigError("sweep.count must be positive");
    for (double p : c.checks.p_values)
        if (!(p > 1.0)) throw ConfigError("checks.p_values must exceed 1");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not readable: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config json: ") + e.what());
    }
    return parse_config(j);
}

// --- deterministic instance generation ---------------------------------------

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    SplitMix64 sm(base ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
    return sm.next();
}

inline VectorField make_field(const FieldSpec& spec, const GridSpec& grid, std::uint64_t seed) {
    VectorField field(grid.n);
    if (spec.kind == "constant") {
        for (auto& u : field.u) u = spec.value;
    } else if (spec.kind == "piecewise") {
        if (spec.segments.empty()) throw ConfigError("field.segments empty");
        const int count = static_cast<int>(spec.segments.size());
        for (int a = 0; a < grid.n; ++a)
            field.u[a] = spec.segments[static_cast<std::size_t>(a) * count / grid.n];
    } else if (spec.kind == "random_walk") {
        Rng rng(seed);
        const int count = spec.segment_count;
        std::vector<double> values(static_cast<std::size_t>(count));
        double u = rng.uniform(-0.6, 0.6);
        for (int seg = 0; seg < count; ++seg) {
            u = std::clamp(u + spec.step * rng.uniform(-1.0, 1.0), -1.0, 1.0);
            values[static_cast<std::size_t>(seg)] = u;
        }
        for (int a = 0; a < grid.n; ++a)
            field.u[a] = values[static_cast<std::size_t>(a) * count / grid.n];
    } else {
        throw ConfigError("field.kind unknown: " + spec.kind);
    }
    field.validate(grid);
    return field;
}

inline IndicatorSet make_set(const SetSpec& spec, const GridSpec& grid, std::uint64_t seed) {
    IndicatorSet out(grid);
    const double L = grid.side_length;
    if (spec.kind == "rects") {
        if (spec.rects.empty()) throw ConfigError("set.rects empty");
        for (const auto& r : spec.rects)
            for (int a = 0; a < grid.n; ++a)
                for (int b = 0; b < grid.n; ++b) {
                    const double x = (a + 0.5) * grid.spacing();
                    const double y = (b + 0.5) * grid.spacing();
                    const double dx = std::fmod(x - r[0] + 2 * L, L);
                    const double dy = std::fmod(y - r[1] + 2 * L, L);
                    if (dx < r[2] && dy < r[3]) out.set(a, b);
                }
    } else if (spec.kind == "random") {
        // i.i.d. over a fixed 64x64 macro grid, resolution-coherent.
        Rng rng(seed);
        std::vector<std::uint8_t> macro(64 * 64);
        for (auto& v : macro) v = rng.uniform() < spec.density ? 1 : 0;
        for (int a = 0; a < grid.n; ++a)
            for (int b = 0; b < grid.n; ++b) {
                const int ma = a * 64 / grid.n;
                const int mb = b * 64 / grid.n;
                if (macro[static_cast<std::size_t>(mb) * 64 + ma]) out.set(a, b);
            }
    } else if (spec.kind == "blobs") {
        Rng rng(seed);
        for (int blob = 0; blob < spec.blob_count; ++blob) {
            const double cx = rng.uniform(0.0, L);
            const double cy = rng.uniform(0.0, L);
            const double rx = rng.uniform(spec.min_radius, spec.max_radius) * L;
            const double ry = rng.uniform(spec.min_radius, spec.max_radius) * L;
            for (int a = 0; a < grid.n; ++a)
                for (int b = 0; b < grid.n; ++b) {
                    const double x = (a + 0.5) * grid.spacing();
                    const double y = (b + 0.5) * grid.spacing();
                    double dx = std::fmod(x - cx + 1.5 * L, L) - 0.5 * L;
                    double dy = std::fmod(y - cy + 1.5 * L, L) - 0.5 * L;
                    if ((dx * dx) / (rx * rx) + (dy * dy) / (ry * ry) <= 1.0) out.set(a, b);
                }
        }
    } else {
        throw ConfigError("set.kind unknown: " + spec.kind);
    }
    return out;
}

// One generated instance plus the machinery built on it.
struct Instance {
    std::string id;
    std::uint64_t seed = 0;
    VectorField field;
    IndicatorSet set_e;
    IndicatorSet set_f;
    std::vector<Tile> tiles;
};

inline Instance generate_instance(const RunConfig& cfg, const Lattice& lat, std::uint64_t seed) {
    Instance inst;
    inst.seed = seed;
    {
        std::ostringstream name;
        name << "s" << seed;
        inst.id = name.str();
    }
    inst.field = make_field(cfg.field, lat.spec(), mix_seed(seed, 1));
    inst.set_e = make_set(cfg.set_e, lat.spec(), mix_seed(seed, 2));
    inst.set_f = make_set(cfg.set_f, lat.spec(), mix_seed(seed, 3));
    return inst;
}

// The instance's working tile set: tiles whose slope interval is hit by the
// field and whose F-coefficient carries mass, capped deterministically by
// descending coefficient weight.
inline std::vector<Tile> select_tiles(const Instance& inst, const CoefficientTable& coeffs,
                                      const DensityCalculator& calc, int max_tiles) {
    struct Entry {
        double weight;
        Tile tile;
    };
    std::vector<Entry> entries;
    for (std::size_t idx = 0; idx < coeffs.tiles.size(); ++idx) {
        const Tile& s = coeffs.tiles[idx];
        if (calc.columns_in(s.omega()).empty()) continue;
        const double weight = std::norm(coeffs.values[idx]);
        if (weight <= 0.0) continue;
        entries.push_back({weight, s});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return a.tile < b.tile;
    });
    std::vector<Tile> out;
    for (const Entry& e : entries) {
        if (static_cast<int>(out.size()) >= max_tiles) break;
        out.push_back(e.tile);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace wavetile
