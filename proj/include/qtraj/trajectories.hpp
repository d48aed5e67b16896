#pragma once

#include <cstdint>
#include <vector>

#include "qtraj/channels.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

// α(1..N): one Kraus-outcome label per step.
using TrajectoryIndex = std::vector<int>;

inline void validate_index(const ChannelSequence& seq, const TrajectoryIndex& idx) {
    if (static_cast<int>(idx.size()) != seq.length())
        throw InvalidIndex("trajectory index has length " + std::to_string(idx.size()) +
                           " but the sequence has " + std::to_string(seq.length()) + " steps");
    for (int k = 0; k < seq.length(); ++k)
        if (idx[static_cast<std::size_t>(k)] < 0 ||
            idx[static_cast<std::size_t>(k)] >= seq.step(k).size())
            throw InvalidIndex("index " + std::to_string(idx[static_cast<std::size_t>(k)]) +
                               " at step " + std::to_string(k + 1) + " outside [0, " +
                               std::to_string(seq.step(k).size() - 1) + "]");
}

// States are stored unnormalized, exactly as the conditional evolution
// produces them; `weight` is the trajectory probability. `states_elided`
// marks records whose state list was dropped by a weight cutoff (the index
// and weight are always kept for accounting).
struct PureTrajectory {
    TrajectoryIndex index;
    std::vector<StateVector> states; // N+1 entries: ψ, ψ_1, ..., ψ_N
    double weight = 0.0;             // ||ψ_N||²
    bool states_elided = false;
};

struct MixedTrajectory {
    TrajectoryIndex index;
    std::vector<DensityOperator> states; // N+1 entries: ρ, ρ_1, ..., ρ_N
    double weight = 0.0;                 // tr ρ_N
    bool states_elided = false;
};

inline void require_normalized(const StateVector& psi, const Tolerances& tol) {
    if (psi.size() < 1 || !all_finite(psi))
        throw InvalidParameter("state vector is empty or non-finite");
    if (std::abs(psi.squaredNorm() - 1.0) > tol.recon)
        throw InvalidParameter("state vector is not normalized (||ψ||² = " +
                               std::to_string(psi.squaredNorm()) + ")");
}

inline void require_normalized(const DensityOperator& rho, const Tolerances& tol) {
    if (std::abs(rho.trace() - 1.0) > tol.recon)
        throw InvalidParameter("density operator is not normalized (tr = " +
                               std::to_string(rho.trace()) + ")");
}

// ψ_k = E_{α(k)} ψ_{k-1}
inline PureTrajectory evolve_pure(const ChannelSequence& seq, const StateVector& psi,
                                  const TrajectoryIndex& idx, const Tolerances& tol = {}) {
    if (psi.size() != seq.dim())
        throw DimensionMismatch("evolve_pure: state dim " + std::to_string(psi.size()) +
                                " vs sequence dim " + std::to_string(seq.dim()));
    require_normalized(psi, tol);
    validate_index(seq, idx);
    PureTrajectory out;
    out.index = idx;
    out.states.reserve(static_cast<std::size_t>(seq.length()) + 1);
    out.states.push_back(psi);
    for (int k = 0; k < seq.length(); ++k)
        out.states.push_back(seq.step(k).op(idx[static_cast<std::size_t>(k)]) * out.states.back());
    out.weight = out.states.back().squaredNorm();
    return out;
}

// ρ_k = E_{α(k)} ρ_{k-1} E_{α(k)}†
inline MixedTrajectory evolve_mixed(const ChannelSequence& seq, const DensityOperator& rho,
                                    const TrajectoryIndex& idx, const Tolerances& tol = {}) {
    if (rho.dim() != seq.dim())
        throw DimensionMismatch("evolve_mixed: state dim " + std::to_string(rho.dim()) +
                                " vs sequence dim " + std::to_string(seq.dim()));
    require_normalized(rho, tol);
    validate_index(seq, idx);
    MixedTrajectory out;
    out.index = idx;
    out.states.reserve(static_cast<std::size_t>(seq.length()) + 1);
    out.states.push_back(rho);
    for (int k = 0; k < seq.length(); ++k) {
        const ComplexMatrix& e = seq.step(k).op(idx[static_cast<std::size_t>(k)]);
        out.states.emplace_back(e * out.states.back().matrix() * e.adjoint(), tol);
    }
    out.weight = out.states.back().trace();
    return out;
}

constexpr std::uint64_t kEnumerationCap = 1ull << 20;

inline std::uint64_t trajectory_count(const ChannelSequence& seq,
                                      std::uint64_t cap = kEnumerationCap) {
    std::uint64_t total = 1;
    for (const KrausChannel& ch : seq.steps()) {
        total *= static_cast<std::uint64_t>(ch.size());
        if (total > cap)
            throw CombinatorialOverflow("enumeration would produce more than " +
                                        std::to_string(cap) + " trajectories");
    }
    return total;
}

namespace detail {

// lexicographic odometer over per-step outcome counts; returns false once
// the index space is exhausted
inline bool advance_index(TrajectoryIndex& idx, const ChannelSequence& seq) {
    for (int k = seq.length() - 1; k >= 0; --k) {
        auto uk = static_cast<std::size_t>(k);
        if (++idx[uk] < seq.step(k).size()) return true;
        idx[uk] = 0;
    }
    return false;
}

} // namespace detail

template <typename Trajectory>
struct Enumeration {
    std::vector<Trajectory> trajectories; // lexicographic index order
    double total_weight = 0.0;            // Σ p_α over all trajectories
    double retained_weight = 0.0;         // Σ p_α over trajectories with states kept
    std::uint64_t elided_count = 0;
};

using PureEnumeration = Enumeration<PureTrajectory>;
using MixedEnumeration = Enumeration<MixedTrajectory>;

// All index tuples in lexicographic order. Trajectories below min_weight
// keep their index and weight (the accounting is exact) but drop the state
// list.
inline PureEnumeration enumerate(const ChannelSequence& seq, const StateVector& psi,
                                 double min_weight = 0.0, const Tolerances& tol = {},
                                 std::uint64_t cap = kEnumerationCap) {
    if (min_weight < 0.0) throw InvalidParameter("enumerate: min_weight must be >= 0");
    std::uint64_t total = trajectory_count(seq, cap);
    PureEnumeration out;
    out.trajectories.reserve(total);
    TrajectoryIndex idx(static_cast<std::size_t>(seq.length()), 0);
    do {
        PureTrajectory t = evolve_pure(seq, psi, idx, tol);
        out.total_weight += t.weight;
        if (t.weight < min_weight) {
            t.states.clear();
            t.states_elided = true;
            ++out.elided_count;
        } else {
            out.retained_weight += t.weight;
        }
        out.trajectories.push_back(std::move(t));
    } while (detail::advance_index(idx, seq));
    return out;
}

inline MixedEnumeration enumerate(const ChannelSequence& seq, const DensityOperator& rho,
                                  double min_weight = 0.0, const Tolerances& tol = {},
                                  std::uint64_t cap = kEnumerationCap) {
    if (min_weight < 0.0) throw InvalidParameter("enumerate: min_weight must be >= 0");
    std::uint64_t total = trajectory_count(seq, cap);
    MixedEnumeration out;
    out.trajectories.reserve(total);
    TrajectoryIndex idx(static_cast<std::size_t>(seq.length()), 0);
    do {
        MixedTrajectory t = evolve_mixed(seq, rho, idx, tol);
        out.total_weight += t.weight;
        if (t.weight < min_weight) {
            t.states.clear();
            t.states_elided = true;
            ++out.elided_count;
        } else {
            out.retained_weight += t.weight;
        }
        out.trajectories.push_back(std::move(t));
    } while (detail::advance_index(idx, seq));
    return out;
}

// Sequential environment measurement: at step k, outcome p is drawn with
// the conditional probability ||E_p ψ||²/||ψ||². One uniform draw per step,
// inverse CDF walked in Kraus-index order.
inline PureTrajectory sample(const ChannelSequence& seq, const StateVector& psi,
                             std::uint64_t seed, const Tolerances& tol = {}) {
    if (psi.size() != seq.dim())
        throw DimensionMismatch("sample: state dim vs sequence dim");
    require_normalized(psi, tol);
    SplitMix64 rng(seed);
    PureTrajectory out;
    out.states.reserve(static_cast<std::size_t>(seq.length()) + 1);
    out.states.push_back(psi);
    for (int k = 0; k < seq.length(); ++k) {
        const KrausChannel& ch = seq.step(k);
        const StateVector& cur = out.states.back();
        double cur_norm2 = cur.squaredNorm();
        if (cur_norm2 <= tol.zero_overlap)
            throw DeadEnd("sample: trajectory weight vanished before step " +
                          std::to_string(k + 1));
        std::vector<StateVector> branches;
        branches.reserve(static_cast<std::size_t>(ch.size()));
        for (int p = 0; p < ch.size(); ++p) branches.push_back(ch.op(p) * cur);

        double u = rng.uniform();
        double acc = 0.0;
        int chosen = -1;
        for (int p = 0; p < ch.size(); ++p) {
            acc += branches[static_cast<std::size_t>(p)].squaredNorm() / cur_norm2;
            if (u < acc) {
                chosen = p;
                break;
            }
        }
        if (chosen < 0) { // u landed past the accumulated total (rounding)
            for (int p = ch.size() - 1; p >= 0; --p)
                if (branches[static_cast<std::size_t>(p)].squaredNorm() > 0.0) {
                    chosen = p;
                    break;
                }
        }
        if (chosen < 0)
            throw DeadEnd("sample: no outcome has nonzero probability at step " +
                          std::to_string(k + 1));
        out.index.push_back(chosen);
        out.states.push_back(std::move(branches[static_cast<std::size_t>(chosen)]));
    }
    out.weight = out.states.back().squaredNorm();
    return out;
}

// Σ_α ρ_N^α over a complete enumeration; recovers the composite map output.
inline DensityOperator reconstruct_channel(const ChannelSequence& seq,
                                           const std::vector<MixedTrajectory>& trajs,
                                           const Tolerances& tol = {}) {
    std::uint64_t expected = trajectory_count(seq);
    if (trajs.size() != expected)
        throw IncompleteSet("reconstruct_channel: got " + std::to_string(trajs.size()) +
                            " trajectories, complete set has " + std::to_string(expected));
    std::vector<char> seen(expected, 0);
    ComplexMatrix sum = ComplexMatrix::Zero(seq.dim(), seq.dim());
    for (const MixedTrajectory& t : trajs) {
        validate_index(seq, t.index);
        std::uint64_t linear = 0;
        for (int k = 0; k < seq.length(); ++k)
            linear = linear * static_cast<std::uint64_t>(seq.step(k).size()) +
                     static_cast<std::uint64_t>(t.index[static_cast<std::size_t>(k)]);
        if (seen[linear]++)
            throw IncompleteSet("reconstruct_channel: duplicate trajectory index");
        if (t.states_elided || t.states.empty())
            throw IncompleteSet("reconstruct_channel: trajectory states were elided");
        sum += t.states.back().matrix();
    }
    return DensityOperator(sum, tol);
}

} // namespace qtraj
