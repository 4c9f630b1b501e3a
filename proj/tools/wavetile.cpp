// Command-line surface: instance generation, decomposition, measurement
// sweeps and report aggregation over the wavetile library.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "wavetile/svg.hpp"
#include "wavetile/verify.hpp"

using namespace wavetile;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCapViolation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAccuracy = 3;

void emit_error(const char* code, const std::string& message) {
    json j;
    j["code"] = code;
    j["message"] = message;
    std::cerr << "error: " << j.dump() << std::endl;
}

std::map<std::string, double> load_caps(const std::string& path) {
    std::map<std::string, double> caps;
    if (path.empty()) return caps;
    std::ifstream in(path);
    if (!in) throw ConfigError("cap file not readable: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cap file json: ") + e.what());
    }
    if (j.contains("caps"))
        for (auto& [key, value] : j["caps"].items()) caps[key] = value.get<double>();
    return caps;
}

std::vector<std::uint64_t> sweep_seeds(const RunConfig& cfg, std::int64_t seed_flag) {
    if (seed_flag >= 0) return {static_cast<std::uint64_t>(seed_flag)};
    std::vector<std::uint64_t> seeds;
    for (int idx = 0; idx < cfg.sweep_count; ++idx)
        seeds.push_back(cfg.base_seed + static_cast<std::uint64_t>(idx));
    return seeds;
}

struct SweepOutcome {
    std::vector<ConstantReport> reports;
    std::vector<std::string> diagnostics;
    std::map<std::uint64_t, std::string> forests;       // per-seed serialized forest
    std::map<std::uint64_t, std::string> instances;     // per-seed serialized instance
    std::map<std::uint64_t, std::string> organizations; // per-seed main-stratum organization
};

SweepOutcome run_sweep(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds, int jobs) {
    SweepOutcome out;
    std::mutex sink;
    std::map<std::uint64_t, InstanceRun> runs;
    std::vector<std::thread> workers;
    std::size_t cursor = 0;
    std::mutex cursor_mutex;
    const int worker_count = std::max(1, jobs);
    auto work = [&]() {
        // Each worker owns its lattice and factory; caches are not shared.
        Lattice lat = cfg.make_lattice();
        PacketFactory fac(lat, cfg.quad_tol, cfg.t_max_factor);
        while (true) {
            std::size_t mine;
            {
                std::lock_guard<std::mutex> lock(cursor_mutex);
                if (cursor >= seeds.size()) return;
                mine = cursor++;
            }
            InstanceRun run = run_instance(cfg, lat, fac, seeds[mine]);
            std::lock_guard<std::mutex> lock(sink);
            runs.emplace(seeds[mine], std::move(run));
        }
    };
    if (worker_count == 1) {
        work();
    } else {
        for (int t = 0; t < worker_count; ++t) workers.emplace_back(work);
        for (auto& t : workers) t.join();
    }
    // Deterministic merge in seed order.
    Lattice lat = cfg.make_lattice();
    for (auto& [seed, run] : runs) {
        out.reports.insert(out.reports.end(), run.reports.begin(), run.reports.end());
        for (const std::string& d : run.diagnostics)
            out.diagnostics.push_back(run.instance.id + ": " + d);
        std::ostringstream forest_text;
        write_forest(forest_text, run.forest);
        out.forests[seed] = forest_text.str();
        std::ostringstream inst_text;
        write_instance(inst_text, run.instance, lat.spec());
        out.instances[seed] = inst_text.str();
        out.organizations[seed] = run.organization_text;
    }
    return out;
}

void write_reports_csv(const std::string& path, const std::vector<ConstantReport>& reports) {
    std::ofstream out(path);
    write_csv_header(out);
    for (const ConstantReport& r : reports) write_csv_row(out, r);
}

int check_caps(const std::vector<ConstantReport>& reports,
               const std::map<std::string, double>& caps, std::vector<std::string>& violations) {
    for (const ConstantReport& r : reports) {
        if (r.degenerate) continue;
        auto it = caps.find(r.inequality_id);
        if (it == caps.end()) continue;
        if (r.ratio > it->second) {
            std::ostringstream os;
            os << r.inequality_id << " on " << r.instance_id << ": ratio " << r.ratio
               << " exceeds cap " << it->second;
            violations.push_back(os.str());
        }
    }
    return violations.empty() ? kExitOk : kExitCapViolation;
}

struct CsvRow {
    ConstantReport report;
};

std::vector<ConstantReport> read_reports_csv(const std::string& path) {
    std::vector<ConstantReport> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        while (cells.size() < 11) cells.push_back("");
        ConstantReport r;
        r.inequality_id = cells[0];
        r.instance_id = cells[1];
        auto num = [&](const std::string& s) {
            return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
        };
        r.delta = num(cells[2]);
        r.sigma = num(cells[3]);
        r.k = num(cells[4]);
        r.j = num(cells[5]);
        r.p = num(cells[6]);
        r.eps = num(cells[7]);
        r.lhs = cells[8].empty() ? 0.0 : std::stod(cells[8]);
        r.rhs = cells[9].empty() ? 0.0 : std::stod(cells[9]);
        r.ratio = cells[10].empty() ? 0.0 : std::stod(cells[10]);
        r.degenerate = !(r.rhs > 0.0);
        out.push_back(r);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-band directional wave-packet decomposition harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string cap_file;
    std::int64_t seed_flag = -1;
    int jobs = 1;

    auto add_common = [&](CLI::App* cmd, bool with_caps) {
        cmd->add_option("--config", config_path, "configuration file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed_flag, "single instance seed (default: config sweep)");
        if (with_caps) cmd->add_option("--cap-file", cap_file, "regression caps file");
        cmd->add_option("--jobs", jobs, "worker count for sweeps");
    };

    CLI::App* cmd_gen = app.add_subcommand("gen", "generate instance snapshots");
    add_common(cmd_gen, false);
    CLI::App* cmd_decompose = app.add_subcommand("decompose", "write forest decompositions");
    add_common(cmd_decompose, false);
    CLI::App* cmd_verify = app.add_subcommand("verify", "run every measured inequality");
    add_common(cmd_verify, true);
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "full seeded sweep with caps");
    add_common(cmd_sweep, true);

    CLI::App* cmd_report = app.add_subcommand("report", "aggregate report CSVs");
    std::vector<std::string> report_inputs;
    cmd_report->add_option("--in", report_inputs, "input CSV files");
    cmd_report->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        emit_error("config", e.what());
        return kExitConfig;
    }

    try {
        fs::create_directories(out_dir);

        if (cmd_report->parsed()) {
            std::vector<ConstantReport> all;
            for (const std::string& path : report_inputs) {
                auto part = read_reports_csv(path);
                all.insert(all.end(), part.begin(), part.end());
            }
            struct Agg {
                int count = 0;
                double max_ratio = 0.0;
                double min_ratio = std::numeric_limits<double>::infinity();
                double sum_ratio = 0.0;
                int degenerate = 0;
            };
            std::map<std::string, Agg> by_id;
            for (const ConstantReport& r : all) {
                Agg& a = by_id[r.inequality_id];
                ++a.count;
                if (r.degenerate) {
                    ++a.degenerate;
                } else {
                    a.max_ratio = std::max(a.max_ratio, r.ratio);
                    a.min_ratio = std::min(a.min_ratio, r.ratio);
                    a.sum_ratio += r.ratio;
                }
            }
            std::ofstream summary(out_dir + "/summary.csv");
            summary << "inequality_id,count,degenerate,max_ratio,min_ratio,mean_ratio\n";
            for (auto& [id, a] : by_id) {
                const int live = a.count - a.degenerate;
                summary << id << ',' << a.count << ',' << a.degenerate << ',' << a.max_ratio << ','
                        << (live > 0 ? a.min_ratio : 0.0) << ','
                        << (live > 0 ? a.sum_ratio / live : 0.0) << '\n';
            }
            write_report_plots(all, out_dir);
            return kExitOk;
        }

        RunConfig cfg = load_config(config_path);
        const std::vector<std::uint64_t> seeds = sweep_seeds(cfg, seed_flag);

        if (cmd_gen->parsed()) {
            Lattice lat = cfg.make_lattice();
            PacketFactory fac(lat, cfg.quad_tol, cfg.t_max_factor);
            for (std::uint64_t seed : seeds) {
                Instance inst = generate_instance(cfg, lat, seed);
                DensityCalculator calc(lat, inst.set_e, inst.field, cfg.p_chi);
                CoefficientTable coeffs =
                    coefficients(inst.set_f.to_function(), lat.enumerate(), fac);
                inst.tiles = select_tiles(inst, coeffs, calc, cfg.max_tiles);
                std::ofstream out(out_dir + "/instance_" + inst.id + ".txt");
                write_instance(out, inst, lat.spec());
            }
            return kExitOk;
        }

        if (cmd_decompose->parsed() || cmd_verify->parsed() || cmd_sweep->parsed()) {
            SweepOutcome outcome = run_sweep(cfg, seeds, jobs);
            for (auto& [seed, text] : outcome.instances) {
                std::ofstream out(out_dir + "/instance_s" + std::to_string(seed) + ".txt");
                out << text;
            }
            for (auto& [seed, text] : outcome.forests) {
                std::ofstream out(out_dir + "/forest_s" + std::to_string(seed) + ".txt");
                out << text;
            }
            for (auto& [seed, text] : outcome.organizations) {
                if (text.empty()) continue;
                std::ofstream out(out_dir + "/organization_s" + std::to_string(seed) + ".txt");
                out << text;
            }
            if (cmd_decompose->parsed()) return kExitOk;

            write_reports_csv(out_dir + "/reports.csv", outcome.reports);
            write_report_plots(outcome.reports, out_dir);
            {
                std::ofstream diag(out_dir + "/diagnostics.txt");
                for (const std::string& d : outcome.diagnostics) diag << d << '\n';
            }
            const std::map<std::string, double> caps = load_caps(cap_file);
            std::vector<std::string> violations;
            const int rc = check_caps(outcome.reports, caps, violations);
            if (rc != kExitOk) {
                for (const std::string& v : violations) emit_error("cap", v);
            }
            return rc;
        }
    } catch (const ConfigError& e) {
        emit_error("config", e.what());
        return kExitConfig;
    } catch (const AccuracyError& e) {
        emit_error("accuracy", e.what());
        return kExitAccuracy;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return kExitConfig;
    }
    return kExitOk;
}
