#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "wavetile/geometry.hpp"
#include "wavetile/grid.hpp"

namespace wavetile {

// One-variable vector field v = (1, u(x1)): one slope per column, |u| <= 1.
struct VectorField {
    std::vector<double> u;

    VectorField() = default;
    explicit VectorField(int n, double value = 0.0) : u(static_cast<std::size_t>(n), value) {}

    void validate(const GridSpec& spec) const {
        if (static_cast<int>(u.size()) != spec.n) throw DimensionError("vector field column count mismatch");
        for (double v : u)
            if (!(std::abs(v) <= 1.0)) throw ConfigError("field slope exceeds 1");
    }
};

// One nonzero frequency sample of a packet.
struct SpectrumCell {
    int b1;
    int b2;
    cdouble value;
};

enum class PacketKind { phi, alpha, curved };

// A tile packet held as its sparse spectrum. Space samples are materialized
// on demand. `tail_bound` reports the relative mass of the kernel quadrature
// beyond the configured truncation (curved/alpha kinds only).
struct Packet {
    Tile tile;
    PacketKind kind = PacketKind::phi;
    std::vector<SpectrumCell> cells; // phi spectrum (curved packets are column-dependent)
    double t_max = 0.0;
    double tail_bound = 0.0;
};

// Factory for every analytic object attached to the lattice: multiplier
// samples, normalized packet spectra, kernel symbols, curved packets.
// Construction of the per-omega tables is not thread-safe; build the factory
// (or call warm_up) before sharing it read-only across threads.
class PacketFactory {
public:
    explicit PacketFactory(const Lattice& lat, double quad_tol = 1e-6, double t_max_factor = 0.0)
        : lat_(&lat), quad_tol_(quad_tol) {
        const BumpProfile& prof = lat.profile();
        // Truncation radius for the kernel quadrature, in units of length(s).
        // The default is chosen so the reported tail clears quad_tol; 8 is
        // the floor inherited from the packet envelope itself.
        t_max_factor_ = t_max_factor > 0.0 ? t_max_factor
                                           : std::max(8.0, 4000.0 / std::abs(prof.kappa));
    }

    const Lattice& lattice() const { return *lat_; }
    double t_max_factor() const { return t_max_factor_; }
    double quad_tol() const { return quad_tol_; }

    // --- multipliers ---------------------------------------------------------

    // Calibrated ratio-window center for omega: the reflection of the
    // right-half center. beta is even, so this equals the literal window
    // formula evaluated with the slope axis reversed; the orientation is the
    // one for which packets localize on their tiles and the curved packets
    // vanish off a sub-interval of omega_s (see the calibration tests).
    static double ratio_center(const FrequencyInterval& om) { return -om.center_right(); }

    // Frequency-side samples of the tile multiplier for omega.
    GridFunction multiplier(const FrequencyInterval& om) const {
        const GridSpec& spec = lat_->spec();
        GridFunction out(spec);
        const double w = lat_->w();
        const double L = spec.side_length;
        const BumpProfile& prof = lat_->profile();
        const double sharp = std::ldexp(1.0, om.l + prof.sharpening);
        const double r0 = ratio_center(om);
        for (int q = 1; q <= spec.max_bin(); ++q) {
            const double eta = q / L;
            const double band = prof.band(w * eta);
            if (band == 0.0) continue;
            for (int p = spec.min_bin(); p <= spec.max_bin(); ++p) {
                const double ratio = static_cast<double>(p) / q;
                const double val = band * prof.beta(sharp * (ratio - r0));
                if (val != 0.0) out.at_bin(p, q) = val;
            }
        }
        return out;
    }

    // Averaged multiplier for level l: band profile times the translation
    // average gamma_l of the beta train, which is constant on [-1,1].
    GridFunction periodizing_multiplier(int l) const {
        const GridSpec& spec = lat_->spec();
        GridFunction out(spec);
        const double w = lat_->w();
        const double L = spec.side_length;
        const BumpProfile& prof = lat_->profile();
        for (int q = 1; q <= spec.max_bin(); ++q) {
            const double eta = q / L;
            const double band = prof.band(w * eta);
            if (band == 0.0) continue;
            for (int p = spec.min_bin(); p <= spec.max_bin(); ++p) {
                const double ratio = static_cast<double>(p) / q;
                const double val = band * gamma_train(l, ratio);
                if (val != 0.0) out.at_bin(p, q) = val;
            }
        }
        return out;
    }

    // gamma_l(x) = (1/2) integral over t in [-1,1] of the beta train at x+t,
    // accumulated bump by bump through the cumulative integral of beta:
    // exact up to rounding, so the plateau identity holds to machine terms.
    double gamma_train(int l, double x) const {
        const BumpProfile& prof = lat_->profile();
        const auto& cum = bumps::BetaCumulative::instance();
        const double sharp = std::ldexp(1.0, l + prof.sharpening);
        const double spacing = std::ldexp(1.0, -l);
        const double first = -(std::ldexp(3.0, -l - 2) - 2.0); // center for k = 0
        const double reach = 2.0 / sharp;
        // centers r_k = first - k * spacing for k = 0 .. 4*2^l - 1
        const long long kmin =
            std::max(0LL, static_cast<long long>(std::floor((first - (x + 1.0) - reach) / spacing)));
        const long long kmax = std::min((4LL << l) - 1,
                                        static_cast<long long>(std::ceil((first - (x - 1.0) + reach) / spacing)));
        double acc = 0.0;
        for (long long k = kmin; k <= kmax; ++k) {
            const double center = first - static_cast<double>(k) * spacing;
            acc += cum(sharp * (x + 1.0 - center)) - cum(sharp * (x - 1.0 - center));
        }
        return 0.5 * acc / sharp;
    }

    double plateau_const() const { return lat_->profile().plateau_const(); }

    // --- packet spectra ------------------------------------------------------

    struct OmegaTable {
        std::vector<SpectrumCell> root; // sqrt of the multiplier, L2-normalized to 1
    };

    const OmegaTable& omega_table(const FrequencyInterval& om) const {
        auto it = tables_.find({om.l, om.k});
        if (it != tables_.end()) return it->second;
        OmegaTable table;
        const GridSpec& spec = lat_->spec();
        const double w = lat_->w();
        const double L = spec.side_length;
        const BumpProfile& prof = lat_->profile();
        const double sharp = std::ldexp(1.0, om.l + prof.sharpening);
        const double width = 2.0 / sharp;
        const double r0 = ratio_center(om);
        const int q_lo = static_cast<int>(std::floor(L / (2.0 * w))) ;
        const int q_hi = static_cast<int>(std::ceil(5.0 * L / (2.0 * w)));
        double norm2 = 0.0;
        for (int q = std::max(1, q_lo); q <= q_hi && q <= spec.max_bin(); ++q) {
            const double band = prof.band_sqrt(w * q / L);
            if (band == 0.0) continue;
            const long long p_lo = static_cast<long long>(std::floor(q * (r0 - width)));
            const long long p_hi = static_cast<long long>(std::ceil(q * (r0 + width)));
            if (p_lo < spec.min_bin() || p_hi > spec.max_bin())
                throw ConfigError("band.w: multiplier support for omega exceeds Nyquist");
            for (long long p = p_lo; p <= p_hi; ++p) {
                const double val = band * prof.beta_sqrt(sharp * (static_cast<double>(p) / q - r0));
                if (val == 0.0) continue;
                table.root.push_back({static_cast<int>(p), q, cdouble(val, 0.0)});
                norm2 += val * val;
            }
        }
        if (table.root.empty())
            throw ConfigError("band.l_max: multiplier support empty on this grid (level too fine)");
        const double scale = 1.0 / std::sqrt(norm2);
        for (auto& c : table.root) c.value *= scale;
        return tables_.emplace(std::pair<int, int>{om.l, om.k}, std::move(table)).first->second;
    }

    void warm_up() const {
        for (int l = 0; l <= lat_->l_max(); ++l)
            for (int k = 0; k < lat_->num_omega(l); ++k) omega_table(FrequencyInterval{l, k});
    }

    // Normalized, translated spectrum of the flat packet phi_s.
    Packet make_phi(const Tile& s) const {
        const OmegaTable& table = omega_table(s.omega());
        const GridSpec& spec = lat_->spec();
        Packet out;
        out.tile = s;
        out.kind = PacketKind::phi;
        out.cells.reserve(table.root.size());
        const double x1c = lat_->center_x1(s);
        const double x2c = lat_->center_x2(s);
        for (const SpectrumCell& c : table.root) {
            const double frac = std::fmod(c.b1 * x1c + c.b2 * x2c, static_cast<double>(spec.n));
            const double ang = -2.0 * M_PI * frac / spec.n;
            out.cells.push_back({c.b1, c.b2, c.value * cdouble(std::cos(ang), std::sin(ang))});
        }
        return out;
    }

    // Kernel symbol for the tile: frequency profile of the kernel piece at
    // the tile's length, evaluated at physical zeta.
    double kernel_symbol(const Tile& s, double zeta) const {
        return lat_->profile().kernel_symbol(zeta, lat_->length(s.l));
    }

    void kernel_support(const Tile& s, double& lo, double& hi) const {
        double slo, shi;
        lat_->profile().kernel_support(lat_->length(s.l), slo, shi);
        const double nyq = lat_->spec().n / (2.0 * lat_->spec().side_length);
        if (std::abs(slo) > nyq || std::abs(shi) > nyq)
            throw ConfigError("kernel support exceeds Nyquist");
        lo = slo;
        hi = shi;
    }

    // Active slope window of the curved packet: u values for which some
    // spectrum cell meets the kernel support. Outside the hull the curved
    // packet vanishes identically.
    std::pair<double, double> active_window(const Tile& s) const {
        const OmegaTable& table = omega_table(s.omega());
        double klo, khi;
        kernel_support(s, klo, khi);
        const double L = lat_->spec().side_length;
        double lo = 1e300, hi = -1e300;
        for (const SpectrumCell& c : table.root) {
            // zeta = (b1 + b2 u)/L in [klo, khi]
            const double a = (L * klo - c.b1) / c.b2;
            const double b = (L * khi - c.b1) / c.b2;
            lo = std::min(lo, std::min(a, b));
            hi = std::max(hi, std::max(a, b));
        }
        return {lo, hi};
    }

    // Reported quadrature truncation residual for the tile's kernel piece:
    // the mass of the kernel beyond t_max relative to its total mass, from a
    // spectrally sampled kernel. Cached per level.
    double kernel_tail_bound(int l) const {
        auto it = tails_.find(l);
        if (it != tails_.end()) return it->second;
        const double len = lat_->length(l);
        const double kappa = std::abs(lat_->profile().kappa);
        const double t_max = t_max_factor_ * len;
        // Sample the symbol finely and transform: support width 0.04 kappa/len.
        const int N = 1 << 16;
        const double zmax = 2.0 * 1.02 * kappa / len;
        const double dz = 2.0 * zmax / N;
        std::vector<cdouble> buf(static_cast<std::size_t>(N));
        for (int idx = 0; idx < N; ++idx) {
            const double z = -zmax + idx * dz;
            const double v = lat_->profile().kernel_symbol(z, len);
            buf[idx] = v;
        }
        detail::fft_pow2(buf, true);
        // t-grid spacing 1/(N dz); |t_k| = k/(N dz) for k <= N/2.
        const double dt = 1.0 / (N * dz);
        double total = 0.0, tail = 0.0;
        for (int k2 = 0; k2 < N; ++k2) {
            const int tk = k2 <= N / 2 ? k2 : k2 - N;
            const double mag = std::abs(buf[static_cast<std::size_t>(k2)]);
            total += mag;
            if (std::abs(tk) * dt > t_max) tail += mag;
        }
        const double bound = total > 0 ? tail / total : 0.0;
        tails_[l] = bound;
        return bound;
    }

    // Curved packet: the kernel piece applied to phi_s along the field's
    // lines. Realized per column as the exact spectral form of the
    // trapezoid-rule shift quadrature; the truncation residual is the
    // reported tail bound. With u = 0 this is exactly the alpha packet.
    GridFunction curved_samples(const Tile& s, const VectorField& field, Packet* meta = nullptr) const {
        const GridSpec& spec = lat_->spec();
        field.validate(spec);
        const Packet phi = make_phi(s);
        const double tail = kernel_tail_bound(s.l);
        if (meta) {
            meta->tile = s;
            meta->kind = PacketKind::curved;
            meta->t_max = t_max_factor_ * lat_->length(s.l);
            meta->tail_bound = tail;
        }
        if (tail > quad_tol_)
            throw AccuracyError("curved packet quadrature tail above tolerance", tail);
        const int n = spec.n;
        const double L = spec.side_length;
        auto [wlo, whi] = active_window(s);
        GridFunction out(spec);
        std::vector<cdouble> rows(static_cast<std::size_t>(n));
        std::vector<cdouble> line(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) {
            const double u = field.u[static_cast<std::size_t>(a)];
            if (u < wlo || u > whi) continue;
            std::fill(rows.begin(), rows.end(), cdouble{});
            bool any = false;
            for (const SpectrumCell& c : phi.cells) {
                const double zeta = (c.b1 + c.b2 * u) / L;
                const double sym = kernel_symbol(s, zeta);
                if (sym == 0.0) continue;
                const double ang = 2.0 * M_PI * static_cast<double>((static_cast<long long>(c.b1) * a) % n) / n;
                rows[static_cast<std::size_t>(spec.idx_of(c.b2))] +=
                    c.value * sym * cdouble(std::cos(ang), std::sin(ang));
                any = true;
            }
            if (!any) continue;
            line = rows;
            detail::fft_pow2(line, true);
            for (int b = 0; b < n; ++b) out.at(a, b) = line[static_cast<std::size_t>(b)] / L;
        }
        return out;
    }

    GridFunction alpha_samples(const Tile& s) const {
        VectorField zero(lat_->spec().n, 0.0);
        return curved_samples(s, zero);
    }

    // Alpha packet as a sparse spectrum (kernel filter in b1 only).
    Packet make_alpha(const Tile& s) const {
        Packet phi = make_phi(s);
        Packet out;
        out.tile = s;
        out.kind = PacketKind::alpha;
        out.t_max = t_max_factor_ * lat_->length(s.l);
        out.tail_bound = kernel_tail_bound(s.l);
        const double L = lat_->spec().side_length;
        for (const SpectrumCell& c : phi.cells) {
            const double sym = kernel_symbol(s, c.b1 / L);
            if (sym != 0.0) out.cells.push_back({c.b1, c.b2, c.value * sym});
        }
        return out;
    }

    // Materialize any sparse spectrum on the grid.
    GridFunction to_grid(const Packet& p) const {
        GridFunction fh(lat_->spec());
        for (const SpectrumCell& c : p.cells) fh.at_bin(c.b1, c.b2) += c.value;
        return inverse_transform(fh);
    }

private:
    const Lattice* lat_;
    double quad_tol_;
    double t_max_factor_;
    mutable std::map<std::pair<int, int>, OmegaTable> tables_;
    mutable std::map<int, double> tails_;
};

// Sharp cutoff to the trapezoid tau: eta in [1/w, 2/w], |xi| <= eta.
inline GridFunction band_projection(const GridFunction& f, const Lattice& lat) {
    const GridSpec& spec = f.spec();
    GridFunction fh = forward_transform(f);
    const double L = spec.side_length;
    const double w = lat.w();
    for (int q = spec.min_bin(); q <= spec.max_bin(); ++q)
        for (int p = spec.min_bin(); p <= spec.max_bin(); ++p) {
            const double eta = q / L;
            const double xi = p / L;
            const bool in_tau = eta >= 1.0 / w && eta <= 2.0 / w && std::abs(xi) <= eta;
            if (!in_tau) fh.at_bin(p, q) = 0.0;
        }
    return inverse_transform(fh);
}

inline bool in_band_trapezoid(const Lattice& lat, int p, int q) {
    const double L = lat.spec().side_length;
    const double eta = q / L;
    const double xi = p / L;
    return eta >= 1.0 / lat.w() && eta <= 2.0 / lat.w() && std::abs(xi) <= eta;
}

} // namespace wavetile
