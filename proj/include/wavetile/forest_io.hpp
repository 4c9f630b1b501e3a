#pragma once

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "wavetile/instances.hpp"
#include "wavetile/organize.hpp"

namespace wavetile {

// Line-oriented text formats for the decompositions, used by the golden-file
// regression tests. Floating values print as hex doubles so round trips are
// bit-exact.

namespace io_detail {

inline std::string hexd(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

inline void write_tile(std::ostream& os, const char* tag, const Tile& s) {
    os << tag << ' ' << int(s.l) << ' ' << s.k << ' ' << s.i << ' ' << s.j << '\n';
}

} // namespace io_detail

inline void write_forest(std::ostream& os, const Forest& forest) {
    os << "forest v1\n";
    for (const auto& [key, trees] : forest.strata) {
        os << "stratum delta " << io_detail::hexd(key.delta) << " sigma "
           << io_detail::hexd(key.sigma) << '\n';
        for (const SelectedTree& st : trees) {
            io_detail::write_tile(os, "tree", st.tree.top);
            os << "metric " << io_detail::hexd(st.selection_metric) << '\n';
            for (const Tile& s : st.tree.members) io_detail::write_tile(os, "tile", s);
        }
    }
    os << "leftover zero_udense " << forest.zero_udense.size() << '\n';
    for (const Tile& s : forest.zero_udense) io_detail::write_tile(os, "tile", s);
    os << "leftover residual " << forest.residual_small_sigma.size() << '\n';
    for (const Tile& s : forest.residual_small_sigma) io_detail::write_tile(os, "tile", s);
    os << "end\n";
}

inline std::string forest_to_string(const Forest& forest) {
    std::ostringstream os;
    write_forest(os, forest);
    return os.str();
}

inline void write_organization(std::ostream& os, const MaximalOrganization& org) {
    os << "organization v1 delta " << io_detail::hexd(org.delta) << " sigma "
       << io_detail::hexd(org.sigma) << '\n';
    os << "incomparable " << org.incomparable.size() << '\n';
    for (const Tile& s : org.incomparable) io_detail::write_tile(os, "tile", s);
    for (std::size_t ti = 0; ti < org.trees.size(); ++ti) {
        os << "assign " << ti << ' ' << org.assignment[ti] << '\n';
        if (org.assignment[ti] >= 0) io_detail::write_tile(os, "witness", org.witness_chain[ti]);
    }
    for (const auto& [ri, fiber] : org.fibers) {
        os << "fiber " << ri << " coverage_j " << org.coverage_class.at(ri) << " shell_k "
           << org.shell_class.at(ri) << " trees";
        for (int ti : fiber) os << ' ' << ti;
        os << "\nkept";
        for (int ti : org.disjoint_tops.at(ri)) os << ' ' << ti;
        os << '\n';
    }
    os << "end\n";
}

inline std::string organization_to_string(const MaximalOrganization& org) {
    std::ostringstream os;
    write_organization(os, org);
    return os.str();
}

// Instance snapshot: field columns, set bitmaps (run-length), tile list.
inline void write_instance(std::ostream& os, const Instance& inst, const GridSpec& spec) {
    os << "instance v1 id " << inst.id << " seed " << inst.seed << " n " << spec.n << '\n';
    os << "field";
    for (double u : inst.field.u) os << ' ' << io_detail::hexd(u);
    os << '\n';
    auto write_mask = [&](const char* tag, const IndicatorSet& set) {
        os << tag;
        int run = 0;
        std::uint8_t current = 0;
        for (std::uint8_t b : set.mask) {
            if (b == current) {
                ++run;
            } else {
                os << ' ' << run;
                current = b;
                run = 1;
            }
        }
        os << ' ' << run << '\n';
    };
    write_mask("set_e", inst.set_e);
    write_mask("set_f", inst.set_f);
    os << "tiles " << inst.tiles.size() << '\n';
    for (const Tile& s : inst.tiles) io_detail::write_tile(os, "tile", s);
    os << "end\n";
}

} // namespace wavetile
