// qtraj: scenario-driven front end for the trajectory-phase library.
//
// Subcommands load one scenario file, validate it completely, run the
// requested computation and emit deterministic records: JSON lines by
// default, CSV tables with --csv. Exit codes: 0 success, 2 validation
// failure, 3 combinatorial overflow, 4 numerical failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <qtraj/parallel.hpp>
#include <qtraj/qtraj.hpp>

namespace {

using nlohmann::json;
using namespace qtraj;

constexpr int kExitValidation = 2;
constexpr int kExitOverflow = 3;
constexpr int kExitNumerical = 4;

struct CommonArgs {
    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    std::optional<double> min_weight;
    std::optional<double> epsilon;
    std::optional<bool> close_loop;
    bool csv = false;
};

Scenario load(const CommonArgs& args) {
    Scenario sc = load_scenario(args.scenario_path);
    if (args.seed) sc.options.seed = *args.seed;
    if (args.grid) {
        if (*args.grid < 8) throw ValidationError("--grid must be >= 8");
        sc.options.grid_size = *args.grid;
    }
    if (args.min_weight) {
        if (*args.min_weight < 0.0) throw ValidationError("--min-weight must be >= 0");
        sc.options.min_weight = *args.min_weight;
    }
    if (args.epsilon) {
        if (*args.epsilon < 0.0 || *args.epsilon >= 1.0)
            throw ValidationError("--epsilon must lie in [0, 1)");
        sc.options.epsilon = *args.epsilon;
    }
    if (args.close_loop) sc.options.close_loop = *args.close_loop;
    return sc;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string index_string(const TrajectoryIndex& idx) {
    std::string s;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k) s += '-';
        s += std::to_string(idx[k]);
    }
    return s;
}

TrajectoryIndex parse_index_flag(const std::string& text) {
    TrajectoryIndex idx;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            idx.push_back(std::stoi(item));
        } catch (...) {
            throw ValidationError("--trajectory: cannot parse '" + item + "' as an index");
        }
    }
    if (idx.empty()) throw ValidationError("--trajectory: empty index list");
    return idx;
}

// Buffered writer: records accumulate and are flushed only after the whole
// computation succeeded, so failed runs never leave partial primary output.
class Output {
public:
    Output(const Scenario& sc, bool csv, std::string csv_header)
        : csv_(csv), csv_header_(std::move(csv_header)), hash_(sc.hash) {}

    void record(json j, const std::string& csv_row) {
        if (csv_) {
            lines_.push_back(csv_row);
        } else {
            j["scenario"] = hash_;
            j["tool"] = kToolName;
            lines_.push_back(j.dump());
        }
    }

    void flush(std::ostream& os) const {
        if (csv_) os << "# scenario=" << hash_ << " tool=" << kToolName << "\n"
                     << csv_header_ << "\n";
        for (const std::string& line : lines_) os << line << "\n";
    }

private:
    bool csv_;
    std::string csv_header_;
    std::string hash_;
    std::vector<std::string> lines_;
};

std::string fmt(double v) {
    return json(v).dump(); // shortest round-trip formatting, deterministic
}

// ---------------------------------------------------------------------
// enumerate: one record per trajectory plus a totals row
// ---------------------------------------------------------------------
int cmd_enumerate(const CommonArgs& args) {
    Scenario sc = load(args);
    ChannelSequence seq = sc.sequence();
    const Tolerances& tol = sc.options.tolerances;
    Output out(sc, args.csv, "record,index,weight,phase_re,phase_im,phase_defined,states_elided");

    if (sc.pure()) {
        PureEnumeration en = enumerate(seq, *sc.initial_state, sc.options.min_weight, tol);
        struct Row {
            json j;
            std::string csv;
        };
        std::vector<Row> rows(en.trajectories.size());
        parallel_for(en.trajectories.size(), [&](std::size_t i) {
            const PureTrajectory& t = en.trajectories[i];
            json j{{"record", "trajectory"},
                   {"index", t.index},
                   {"weight", t.weight},
                   {"states_elided", t.states_elided}};
            std::string phase_csv = ",,false";
            if (!t.states_elided) {
                json norms = json::array();
                for (const StateVector& s : t.states) norms.push_back(s.norm());
                j["step_norms"] = std::move(norms);
                try {
                    Complex gamma = pancharatnam_phase(t.states, tol).value();
                    j["phase"] = complex_json(gamma);
                    phase_csv = fmt(gamma.real()) + "," + fmt(gamma.imag()) + ",true";
                } catch (const ZeroPhaseUndefined&) {
                    j["phase"] = nullptr;
                    j["phase_undefined"] = true;
                }
            }
            rows[i] = Row{std::move(j),
                          "trajectory," + index_string(t.index) + "," + fmt(t.weight) + "," +
                              phase_csv + "," + (t.states_elided ? "true" : "false")};
        });
        for (Row& r : rows) out.record(std::move(r.j), r.csv);
        out.record(json{{"record", "totals"},
                        {"total_weight", en.total_weight},
                        {"retained_weight", en.retained_weight},
                        {"trajectories", en.trajectories.size()},
                        {"elided", en.elided_count}},
                   "totals,," + fmt(en.total_weight) + ",,,,");
    } else {
        MixedEnumeration en = enumerate(seq, *sc.initial_density, sc.options.min_weight, tol);
        struct Row {
            json j;
            std::string csv;
        };
        std::vector<Row> rows(en.trajectories.size());
        parallel_for(en.trajectories.size(), [&](std::size_t i) {
            const MixedTrajectory& t = en.trajectories[i];
            json j{{"record", "trajectory"},
                   {"index", t.index},
                   {"weight", t.weight},
                   {"states_elided", t.states_elided}};
            if (!t.states_elided) {
                json norms = json::array();
                for (const DensityOperator& s : t.states) norms.push_back(s.trace());
                j["step_norms"] = std::move(norms);
                std::vector<DensityOperator> states;
                states.reserve(t.states.size());
                for (const DensityOperator& s : t.states)
                    states.push_back(sc.options.epsilon > 0.0
                                         ? regularize(s, sc.options.epsilon, tol)
                                         : s);
                Holonomy h = uhlmann_holonomy(states, sc.options.close_loop, tol);
                j["holonomy"] = matrix_json(h.op.matrix());
                j["holonomy_trace_phase"] =
                    complex_json(phase_of(h.op.matrix().trace(), tol).value());
            }
            rows[i] = Row{std::move(j), "trajectory," + index_string(t.index) + "," +
                                            fmt(t.weight) + ",,,," +
                                            (t.states_elided ? "true" : "false")};
        });
        for (Row& r : rows) out.record(std::move(r.j), r.csv);
        out.record(json{{"record", "totals"},
                        {"total_weight", en.total_weight},
                        {"retained_weight", en.retained_weight},
                        {"trajectories", en.trajectories.size()},
                        {"elided", en.elided_count}},
                   "totals,," + fmt(en.total_weight) + ",,,,");
    }
    out.flush(std::cout);
    return 0;
}

// ---------------------------------------------------------------------
// sample: n seeded trajectory records plus a frequency table
// ---------------------------------------------------------------------
int cmd_sample(const CommonArgs& args, std::uint64_t n) {
    Scenario sc = load(args);
    if (!sc.pure()) throw ValidationError("sample requires a pure initial state");
    if (n < 1) throw ValidationError("--n must be >= 1");
    ChannelSequence seq = sc.sequence();
    const Tolerances& tol = sc.options.tolerances;
    Output out(sc, args.csv, "record,i,seed,index,weight,dead_end_step,count,empirical,exact");

    struct Row {
        TrajectoryIndex index;
        std::vector<double> step_norms;
        std::uint64_t seed = 0;
        double weight = 0.0;
        int dead_end_step = 0; // 0: none
    };
    std::vector<Row> rows(n);
    parallel_for(n, [&](std::size_t i) {
        Row& r = rows[i];
        r.seed = derived_seed(sc.options.seed, i);
        try {
            PureTrajectory t = sample(seq, *sc.initial_state, r.seed, tol);
            r.index = std::move(t.index);
            r.weight = t.weight;
            r.step_norms.reserve(t.states.size());
            for (const StateVector& s : t.states) r.step_norms.push_back(s.norm());
        } catch (const DeadEnd& e) {
            std::string msg = e.what();
            auto pos = msg.rfind("step ");
            r.dead_end_step = pos == std::string::npos ? -1 : std::stoi(msg.substr(pos + 5));
        }
    });

    std::uint64_t dead_ends = 0;
    std::map<TrajectoryIndex, std::uint64_t> counts;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        if (r.dead_end_step != 0) {
            ++dead_ends;
            out.record(json{{"record", "sample"},
                            {"i", i},
                            {"seed", r.seed},
                            {"dead_end_step", r.dead_end_step}},
                       "sample," + std::to_string(i) + "," + std::to_string(r.seed) + ",,," +
                           std::to_string(r.dead_end_step) + ",,,");
            continue;
        }
        counts[r.index] += 1;
        out.record(json{{"record", "sample"},
                        {"i", i},
                        {"seed", r.seed},
                        {"index", r.index},
                        {"step_norms", r.step_norms},
                        {"weight", r.weight}},
                   "sample," + std::to_string(i) + "," + std::to_string(r.seed) + "," +
                       index_string(r.index) + "," + fmt(r.weight) + ",,,,");
    }

    // frequency table against exact weights when enumeration is feasible
    bool enumerable = true;
    try {
        trajectory_count(seq);
    } catch (const CombinatorialOverflow&) {
        enumerable = false;
    }
    if (enumerable) {
        PureEnumeration en = enumerate(seq, *sc.initial_state, 0.0, tol);
        for (const PureTrajectory& t : en.trajectories) {
            std::uint64_t c = counts.count(t.index) ? counts.at(t.index) : 0;
            double empirical = static_cast<double>(c) / static_cast<double>(n);
            out.record(json{{"record", "frequency"},
                            {"index", t.index},
                            {"count", c},
                            {"empirical", empirical},
                            {"exact", t.weight}},
                       "frequency,,," + index_string(t.index) + ",,," + std::to_string(c) + "," +
                           fmt(empirical) + "," + fmt(t.weight));
        }
    }
    out.record(json{{"record", "totals"}, {"samples", n}, {"dead_ends", dead_ends}},
               "totals,,,,," + std::to_string(dead_ends) + "," + std::to_string(n) + ",,");
    out.flush(std::cout);
    return 0;
}

// ---------------------------------------------------------------------
// interfere: the iterative protocol for one trajectory
// ---------------------------------------------------------------------
int cmd_interfere(const CommonArgs& args, const std::string& trajectory_flag,
                  const std::string& fringe_dir) {
    Scenario sc = load(args);
    if (!sc.pure()) throw ValidationError("interfere requires a pure initial state");
    ChannelSequence seq = sc.sequence();
    const Tolerances& tol = sc.options.tolerances;

    TrajectoryIndex idx;
    if (trajectory_flag.empty()) {
        idx.assign(static_cast<std::size_t>(seq.length()), 0);
    } else {
        idx = parse_index_flag(trajectory_flag);
    }
    validate_index(seq, idx);

    bool keep_scans = !fringe_dir.empty();
    ProtocolResult result =
        run_protocol(seq, *sc.initial_state, idx, sc.options.grid_size, tol, keep_scans);
    PhaseFactor exact = pancharatnam_phase(evolve_pure(seq, *sc.initial_state, idx, tol).states,
                                           tol);

    Output out(sc, args.csv,
               "record,step,estimated_re,estimated_im,exact_re,exact_im,abs_error");
    for (const StepRecord& rec : result.records) {
        out.record(json{{"record", "step"},
                        {"step", rec.step},
                        {"closing", rec.step == seq.length() + 1},
                        {"estimated", complex_json(rec.estimated_phase.value())},
                        {"exact", complex_json(rec.exact_phase.value())},
                        {"abs_error", rec.abs_error}},
                   "step," + std::to_string(rec.step) + "," +
                       fmt(rec.estimated_phase.value().real()) + "," +
                       fmt(rec.estimated_phase.value().imag()) + "," +
                       fmt(rec.exact_phase.value().real()) + "," +
                       fmt(rec.exact_phase.value().imag()) + "," + fmt(rec.abs_error));
    }
    double product_error =
        std::abs(result.product.value() - exact.value());
    out.record(json{{"record", "protocol"},
                    {"index", idx},
                    {"grid_size", sc.options.grid_size},
                    {"product", complex_json(result.product.value())},
                    {"pancharatnam", complex_json(exact.value())},
                    {"product_abs_error", product_error},
                    {"weight", result.weight}},
               "protocol,," + fmt(result.product.value().real()) + "," +
                   fmt(result.product.value().imag()) + "," + fmt(exact.value().real()) + "," +
                   fmt(exact.value().imag()) + "," + fmt(product_error));

    if (keep_scans) {
        std::filesystem::create_directories(fringe_dir);
        for (std::size_t s = 0; s < result.scans.size(); ++s) {
            std::ofstream f(fringe_dir + "/fringe_step_" + std::to_string(s + 1) + ".dat");
            for (std::size_t g = 0; g < result.scans[s].grid.size(); ++g)
                f << fmt(result.scans[s].grid[g]) << " " << fmt(result.scans[s].intensities[g])
                  << "\n";
        }
    }
    out.flush(std::cout);
    return 0;
}

// ---------------------------------------------------------------------
// average: Γ per decomposition with pairwise gaps
// ---------------------------------------------------------------------
int cmd_average(const CommonArgs& args, const std::string& mixers_path) {
    Scenario sc = load(args);
    if (!sc.pure()) throw ValidationError("average requires a pure initial state");
    ChannelSequence seq = sc.sequence();
    const Tolerances& tol = sc.options.tolerances;

    std::vector<MixerSet> sets;
    if (!mixers_path.empty()) sets = load_mixer_sets(mixers_path, sc);

    DecompositionComparison cmp = representation_dependence_demo(
        seq, *sc.initial_state, sets, sc.options.min_weight, tol);

    Output out(sc, args.csv,
               "record,label,gamma_re,gamma_im,visibility,excluded_weight,undefined_weight,value");
    for (const AveragedPhase& g : cmp.phases)
        out.record(json{{"record", "gamma"},
                        {"label", g.decomposition_label},
                        {"value", complex_json(g.value)},
                        {"visibility", g.visibility},
                        {"excluded_weight", g.excluded_weight},
                        {"undefined_weight", g.undefined_weight},
                        {"trajectories", g.trajectory_count}},
                   "gamma," + g.decomposition_label + "," + fmt(g.value.real()) + "," +
                       fmt(g.value.imag()) + "," + fmt(g.visibility) + "," +
                       fmt(g.excluded_weight) + "," + fmt(g.undefined_weight) + ",");
    for (std::size_t a = 0; a < cmp.phases.size(); ++a)
        for (std::size_t b = a + 1; b < cmp.phases.size(); ++b)
            out.record(json{{"record", "gap"},
                            {"a", cmp.phases[a].decomposition_label},
                            {"b", cmp.phases[b].decomposition_label},
                            {"value", cmp.gaps[a][b]}},
                       "gap," + cmp.phases[a].decomposition_label + "|" +
                           cmp.phases[b].decomposition_label + ",,,,,," + fmt(cmp.gaps[a][b]));
    out.record(json{{"record", "action_check"},
                    {"max_deviation", cmp.max_action_deviation},
                    {"states", 100}},
               "action_check,,,,,,," + fmt(cmp.max_action_deviation));
    out.flush(std::cout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometric phases of discrete quantum trajectories"};
    app.set_version_flag("--version", qtraj::kToolName);
    app.require_subcommand(1);

    CommonArgs common;
    std::uint64_t n = 1;
    std::string trajectory_flag;
    std::string fringe_dir;
    std::string mixers_path;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", common.scenario_path, "scenario file (JSON)")->required();
        cmd->add_option("--seed", [&common](const CLI::results_t& r) {
            common.seed = std::stoull(r[0]);
            return true;
        }, "override the scenario seed (u64)");
        cmd->add_option("--grid", [&common](const CLI::results_t& r) {
            common.grid = std::stoi(r[0]);
            return true;
        }, "phase-shift grid size");
        cmd->add_option("--min-weight", [&common](const CLI::results_t& r) {
            common.min_weight = std::stod(r[0]);
            return true;
        }, "weight cutoff for retained trajectories");
        cmd->add_option("--epsilon", [&common](const CLI::results_t& r) {
            common.epsilon = std::stod(r[0]);
            return true;
        }, "regularization mix toward the maximally mixed state");
        cmd->add_option("--close-loop", [&common](const CLI::results_t& r) {
            if (r[0] == "true" || r[0] == "1") common.close_loop = true;
            else if (r[0] == "false" || r[0] == "0") common.close_loop = false;
            else throw CLI::ValidationError("--close-loop", "expected true/false");
            return true;
        }, "close the transport loop back to the initial state");
        cmd->add_flag("--csv", common.csv, "emit CSV tables instead of JSON lines");
    };

    CLI::App* enumerate_cmd = app.add_subcommand("enumerate", "list all trajectories");
    add_common(enumerate_cmd);

    CLI::App* sample_cmd = app.add_subcommand("sample", "draw seeded trajectory records");
    add_common(sample_cmd);
    sample_cmd->add_option("--n", n, "number of records");

    CLI::App* interfere_cmd =
        app.add_subcommand("interfere", "run the iterative interferometric protocol");
    add_common(interfere_cmd);
    interfere_cmd->add_option("--trajectory", trajectory_flag,
                              "comma-separated outcome indices (default: all zeros)");
    interfere_cmd->add_option("--fringe-dir", fringe_dir,
                              "write per-step (chi, intensity) files into this directory");

    CLI::App* average_cmd = app.add_subcommand("average", "trajectory-averaged phase factors");
    add_common(average_cmd);
    average_cmd->add_option("--mixers", mixers_path,
                            "mixers file defining alternative decompositions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (enumerate_cmd->parsed()) return cmd_enumerate(common);
        if (sample_cmd->parsed()) return cmd_sample(common, n);
        if (interfere_cmd->parsed()) return cmd_interfere(common, trajectory_flag, fringe_dir);
        if (average_cmd->parsed()) return cmd_average(common, mixers_path);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const CombinatorialOverflow& e) {
        std::cerr << "overflow: " << e.what() << "\n";
        return kExitOverflow;
    } catch (const Error& e) {
        std::cerr << "numerical failure (" << e.name() << "): " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
