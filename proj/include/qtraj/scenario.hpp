#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtraj/channels.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/trajectories.hpp"

namespace qtraj {

// -------------------------------------------------------------------------
// Scenario files
// -------------------------------------------------------------------------
//
// A scenario is a single JSON document describing one experiment:
//
// {
//   "dim": 2,
//   "initial": {"state": "plus"}                       // or explicit entries
//            | {"state": [[re,im], [re,im], ...]}
//            | {"density": "maximally_mixed"}
//            | {"density": [[[re,im],...], ...]},
//   "steps":  [ {"preset": "dephasing", "params": [0.25]},
//               {"kraus": [ [[[re,im],...], ...], ... ], "label": "..."} ],
//   "options": { "grid_size": 4096, "seed": 42, "min_weight": 1e-9,
//                "epsilon": 0.0, "close_loop": true,
//                "tolerances": {"herm": 1e-10, ...} }
// }
//
// Complex numbers are always [re, im] pairs. Scenarios validate completely
// before any computation runs.

struct ScenarioOptions {
    Tolerances tolerances;
    int grid_size = 4096;
    std::uint64_t seed = 0;
    double min_weight = 1e-9;
    double epsilon = 0.0;
    bool close_loop = true;
};

struct Scenario {
    int dim = 0;
    std::optional<StateVector> initial_state;
    std::optional<DensityOperator> initial_density;
    std::vector<KrausChannel> steps;
    ScenarioOptions options;
    std::string hash; // FNV-1a of the source bytes, hex

    bool pure() const { return initial_state.has_value(); }
    ChannelSequence sequence() const { return ChannelSequence(steps); }
};

inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

namespace detail {

using nlohmann::json;

inline Complex parse_complex(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ValidationError(where + ": complex numbers are [re, im] pairs");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

inline StateVector parse_vector(const json& j, int dim, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
        throw ValidationError(where + ": expected " + std::to_string(dim) + " entries");
    StateVector v(dim);
    for (int i = 0; i < dim; ++i)
        v[i] = parse_complex(j[static_cast<std::size_t>(i)], where);
    if (!all_finite(v)) throw ValidationError(where + ": non-finite entries");
    return v;
}

inline ComplexMatrix parse_matrix(const json& j, int rows, int cols, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ValidationError(where + ": expected " + std::to_string(rows) + " rows");
    ComplexMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ValidationError(where + ": expected " + std::to_string(cols) + " columns");
        for (int c = 0; c < cols; ++c)
            m(r, c) = parse_complex(row[static_cast<std::size_t>(c)], where);
    }
    if (!all_finite(m)) throw ValidationError(where + ": non-finite entries");
    return m;
}

inline StateVector named_state(const std::string& name, int dim) {
    auto basis = [&](int k) {
        StateVector v = StateVector::Zero(dim);
        v[k] = Complex(1.0, 0.0);
        return v;
    };
    if (name == "zero") return basis(0);
    if (dim >= 2) {
        const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
        if (name == "one") return basis(1);
        if (name == "plus") return StateVector(inv_sqrt2 * (basis(0) + basis(1)));
        if (name == "minus") return StateVector(inv_sqrt2 * (basis(0) - basis(1)));
        if (name == "plus_i")
            return StateVector(inv_sqrt2 * (basis(0) + Complex(0.0, 1.0) * basis(1)));
        if (name == "minus_i")
            return StateVector(inv_sqrt2 * (basis(0) - Complex(0.0, 1.0) * basis(1)));
    }
    throw ValidationError("initial.state: unknown named state '" + name + "' for dim " +
                          std::to_string(dim));
}

} // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j, std::string hash = "") {
    using detail::json;
    if (!j.is_object()) throw ValidationError("scenario: top level must be an object");

    Scenario sc;
    sc.hash = std::move(hash);

    if (!j.contains("dim") || !j["dim"].is_number_integer())
        throw ValidationError("scenario: integer field 'dim' is required");
    sc.dim = j["dim"].get<int>();
    if (sc.dim < 1 || sc.dim > 64)
        throw ValidationError("scenario: dim must lie in [1, 64]");

    // options first; tolerances govern the remaining validation
    if (j.contains("options")) {
        const json& o = j["options"];
        if (!o.is_object()) throw ValidationError("options: must be an object");
        if (o.contains("tolerances")) {
            const json& t = o["tolerances"];
            auto load = [&](const char* key, double& slot) {
                if (t.contains(key)) {
                    if (!t[key].is_number() || t[key].get<double>() <= 0.0)
                        throw ValidationError(std::string("options.tolerances.") + key +
                                              ": must be a positive number");
                    slot = t[key].get<double>();
                }
            };
            load("herm", sc.options.tolerances.herm);
            load("unit", sc.options.tolerances.unit);
            load("psd", sc.options.tolerances.psd);
            load("recon", sc.options.tolerances.recon);
            load("rank", sc.options.tolerances.rank);
            load("zero_overlap", sc.options.tolerances.zero_overlap);
            load("complete", sc.options.tolerances.complete);
        }
        if (o.contains("grid_size")) {
            if (!o["grid_size"].is_number_integer() || o["grid_size"].get<int>() < 8)
                throw ValidationError("options.grid_size: must be an integer >= 8");
            sc.options.grid_size = o["grid_size"].get<int>();
        }
        if (o.contains("seed")) {
            if (!o["seed"].is_number_unsigned() && !o["seed"].is_number_integer())
                throw ValidationError("options.seed: must be an integer");
            sc.options.seed = o["seed"].get<std::uint64_t>();
        }
        if (o.contains("min_weight")) {
            if (!o["min_weight"].is_number() || o["min_weight"].get<double>() < 0.0)
                throw ValidationError("options.min_weight: must be a number >= 0");
            sc.options.min_weight = o["min_weight"].get<double>();
        }
        if (o.contains("epsilon")) {
            if (!o["epsilon"].is_number() || o["epsilon"].get<double>() < 0.0 ||
                o["epsilon"].get<double>() >= 1.0)
                throw ValidationError("options.epsilon: must lie in [0, 1)");
            sc.options.epsilon = o["epsilon"].get<double>();
        }
        if (o.contains("close_loop")) {
            if (!o["close_loop"].is_boolean())
                throw ValidationError("options.close_loop: must be a boolean");
            sc.options.close_loop = o["close_loop"].get<bool>();
        }
    }
    const Tolerances& tol = sc.options.tolerances;

    if (!j.contains("initial") || !j["initial"].is_object())
        throw ValidationError("scenario: object field 'initial' is required");
    const json& init = j["initial"];
    if (init.contains("state") == init.contains("density"))
        throw ValidationError("initial: exactly one of 'state' or 'density' is required");
    try {
        if (init.contains("state")) {
            StateVector psi = init["state"].is_string()
                                  ? detail::named_state(init["state"].get<std::string>(), sc.dim)
                                  : detail::parse_vector(init["state"], sc.dim, "initial.state");
            if (std::abs(psi.squaredNorm() - 1.0) > tol.recon)
                throw ValidationError("initial.state: not normalized (||ψ||² = " +
                                      std::to_string(psi.squaredNorm()) + ")");
            sc.initial_state = std::move(psi);
        } else {
            if (init["density"].is_string()) {
                if (init["density"].get<std::string>() != "maximally_mixed")
                    throw ValidationError("initial.density: unknown named density '" +
                                          init["density"].get<std::string>() + "'");
                sc.initial_density = DensityOperator::maximally_mixed(sc.dim);
            } else {
                ComplexMatrix m =
                    detail::parse_matrix(init["density"], sc.dim, sc.dim, "initial.density");
                DensityOperator rho(m, tol);
                if (std::abs(rho.trace() - 1.0) > tol.recon)
                    throw ValidationError("initial.density: not normalized (tr = " +
                                          std::to_string(rho.trace()) + ")");
                sc.initial_density = std::move(rho);
            }
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError("initial: " + std::string(e.what()));
    }

    if (!j.contains("steps") || !j["steps"].is_array() || j["steps"].empty())
        throw ValidationError("scenario: non-empty array field 'steps' is required");
    for (std::size_t k = 0; k < j["steps"].size(); ++k) {
        const json& s = j["steps"][k];
        const std::string where = "steps[" + std::to_string(k) + "]";
        if (!s.is_object()) throw ValidationError(where + ": must be an object");
        try {
            if (s.contains("preset")) {
                if (!s["preset"].is_string())
                    throw ValidationError(where + ".preset: must be a string");
                std::vector<double> params;
                if (s.contains("params")) {
                    if (!s["params"].is_array())
                        throw ValidationError(where + ".params: must be an array of numbers");
                    for (const json& p : s["params"]) {
                        if (!p.is_number())
                            throw ValidationError(where + ".params: must be an array of numbers");
                        params.push_back(p.get<double>());
                    }
                }
                sc.steps.push_back(preset(s["preset"].get<std::string>(), params, sc.dim, tol));
            } else if (s.contains("kraus")) {
                if (!s["kraus"].is_array() || s["kraus"].empty())
                    throw ValidationError(where + ".kraus: must be a non-empty array of matrices");
                std::vector<ComplexMatrix> ops;
                for (std::size_t p = 0; p < s["kraus"].size(); ++p)
                    ops.push_back(detail::parse_matrix(s["kraus"][p], sc.dim, sc.dim,
                                                       where + ".kraus[" + std::to_string(p) + "]"));
                std::string label = s.contains("label") && s["label"].is_string()
                                        ? s["label"].get<std::string>()
                                        : "";
                sc.steps.emplace_back(std::move(ops), std::move(label), tol);
            } else {
                throw ValidationError(where + ": needs either 'preset' or 'kraus'");
            }
        } catch (const ValidationError&) {
            throw;
        } catch (const Error& e) {
            throw ValidationError(where + ": " + std::string(e.what()));
        }
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string bytes = buf.str();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("scenario file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_scenario(j, fnv1a_hex(bytes));
}

// Mixers file for the representation-dependence comparison: an array of
// decompositions, each {"label": ..., "mixers": [MxM matrix, ...]}. A single
// matrix is broadcast over all steps.
inline std::vector<MixerSet> load_mixer_sets(const std::string& path, const Scenario& sc) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open mixers file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("mixers file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_array() || j.empty())
        throw ValidationError("mixers file: top level must be a non-empty array");

    std::vector<MixerSet> sets;
    for (std::size_t s = 0; s < j.size(); ++s) {
        const nlohmann::json& entry = j[s];
        const std::string where = "mixers[" + std::to_string(s) + "]";
        if (!entry.is_object() || !entry.contains("mixers") || !entry["mixers"].is_array() ||
            entry["mixers"].empty())
            throw ValidationError(where + ": expected an object with a non-empty 'mixers' array");
        MixerSet set;
        set.label = entry.contains("label") && entry["label"].is_string()
                        ? entry["label"].get<std::string>()
                        : "mixed[" + std::to_string(s) + "]";
        const nlohmann::json& list = entry["mixers"];
        std::size_t count = list.size() == 1 ? static_cast<std::size_t>(sc.steps.size())
                                             : list.size();
        if (count != sc.steps.size())
            throw ValidationError(where + ": " + std::to_string(list.size()) + " mixers for " +
                                  std::to_string(sc.steps.size()) + " steps");
        for (std::size_t k = 0; k < count; ++k) {
            const nlohmann::json& mj = list[list.size() == 1 ? 0 : k];
            int m = sc.steps[k].size();
            try {
                set.mixers.emplace_back(
                    detail::parse_matrix(mj, m, m, where + "[" + std::to_string(k) + "]"),
                    sc.options.tolerances);
            } catch (const ValidationError&) {
                throw;
            } catch (const Error& e) {
                throw ValidationError(where + ": " + std::string(e.what()));
            }
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

} // namespace qtraj
