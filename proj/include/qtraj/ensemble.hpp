#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qtraj/phases.hpp"
#include "qtraj/trajectories.hpp"

namespace qtraj {

// Trajectory-averaged phase factor Γ = Σ_α p_α γ^α for one fixed Kraus
// decomposition. |value| <= 1; the shortfall from 1 measures how much the
// trajectory phases disagree.
struct AveragedPhase {
    Complex value{0.0, 0.0};
    double visibility = 0.0; // |value|
    std::string decomposition_label;
    double excluded_weight = 0.0;  // weight of trajectories below min_weight
    double undefined_weight = 0.0; // weight of retained trajectories with no phase
    std::uint64_t trajectory_count = 0;
};

// Σ_α p_α γ^α over all enumerated trajectories with weight > min_weight,
// summed in lexicographic index order. Trajectories whose phase is undefined
// (a vanishing overlap) are never assigned a value: their weight is
// reported, and if it is material (> min_weight) the average itself is
// ill-posed and the operation fails.
inline AveragedPhase average_phase(const ChannelSequence& seq, const StateVector& psi,
                                   double min_weight = 1e-9, const Tolerances& tol = {},
                                   std::string label = "original") {
    PureEnumeration en = enumerate(seq, psi, 0.0, tol);
    AveragedPhase out;
    out.decomposition_label = std::move(label);
    out.trajectory_count = en.trajectories.size();
    for (const PureTrajectory& t : en.trajectories) {
        if (!(t.weight > min_weight)) {
            out.excluded_weight += t.weight;
            continue;
        }
        try {
            out.value += t.weight * pancharatnam_phase(t.states, tol).value();
        } catch (const ZeroPhaseUndefined&) {
            out.undefined_weight += t.weight;
        }
    }
    if (out.undefined_weight > min_weight)
        throw UndefinedPhaseMass("average_phase: trajectories with undefined phase carry weight " +
                                 std::to_string(out.undefined_weight) + " > min_weight " +
                                 std::to_string(min_weight));
    out.visibility = std::abs(out.value);
    return out;
}

// One alternative decomposition of a sequence: a mixing unitary per step.
struct MixerSet {
    std::string label;
    std::vector<UnitaryOperator> mixers; // one per step
};

inline ChannelSequence apply_mixers(const ChannelSequence& seq, const MixerSet& set,
                                    const Tolerances& tol = {}) {
    if (static_cast<int>(set.mixers.size()) != seq.length())
        throw DimensionMismatch("apply_mixers: " + std::to_string(set.mixers.size()) +
                                " mixers for " + std::to_string(seq.length()) + " steps");
    std::vector<KrausChannel> steps;
    steps.reserve(set.mixers.size());
    for (int k = 0; k < seq.length(); ++k)
        steps.push_back(transform_representation(seq.step(k), set.mixers[static_cast<std::size_t>(k)], tol));
    return ChannelSequence(std::move(steps));
}

struct DecompositionComparison {
    std::vector<AveragedPhase> phases;        // entry 0 is the untransformed sequence
    std::vector<std::vector<double>> gaps;    // pairwise |Γ_i - Γ_j|
    double max_action_deviation = 0.0;        // channel action agreement check
};

// The negative result made concrete: every decomposition implements the same
// composite map (verified on a deterministic batch of random states), yet
// the averaged phases may differ. Gaps are reported pairwise.
inline DecompositionComparison representation_dependence_demo(
    const ChannelSequence& seq, const StateVector& psi, const std::vector<MixerSet>& mixer_sets,
    double min_weight = 1e-9, const Tolerances& tol = {}, int action_check_states = 100) {
    DecompositionComparison out;
    std::vector<ChannelSequence> sequences;
    sequences.push_back(seq);
    out.phases.push_back(average_phase(seq, psi, min_weight, tol, "original"));
    for (std::size_t s = 0; s < mixer_sets.size(); ++s) {
        ChannelSequence mixed = apply_mixers(seq, mixer_sets[s], tol);
        std::string label =
            mixer_sets[s].label.empty() ? "mixed[" + std::to_string(s) + "]" : mixer_sets[s].label;
        out.phases.push_back(average_phase(mixed, psi, min_weight, tol, label));
        sequences.push_back(std::move(mixed));
    }

    // channel action must agree across decompositions
    SplitMix64 rng(0x9D2C5680u);
    for (int t = 0; t < action_check_states; ++t) {
        ComplexMatrix g(seq.dim(), seq.dim());
        for (Eigen::Index r = 0; r < g.rows(); ++r)
            for (Eigen::Index c = 0; c < g.cols(); ++c)
                g(r, c) = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
        ComplexMatrix m = g * g.adjoint();
        DensityOperator rho(m / m.trace().real(), tol);
        DensityOperator ref = compose_sequence(sequences[0], rho, tol);
        for (std::size_t s = 1; s < sequences.size(); ++s) {
            DensityOperator other = compose_sequence(sequences[s], rho, tol);
            double dev = (other.matrix() - ref.matrix()).cwiseAbs().maxCoeff();
            if (dev > out.max_action_deviation) out.max_action_deviation = dev;
        }
    }

    out.gaps.assign(out.phases.size(), std::vector<double>(out.phases.size(), 0.0));
    for (std::size_t a = 0; a < out.phases.size(); ++a)
        for (std::size_t b = 0; b < out.phases.size(); ++b)
            out.gaps[a][b] = std::abs(out.phases[a].value - out.phases[b].value);
    return out;
}

// Exploratory mixed-state analogue: Σ_α p_α U^α with p_α = tr ρ_N^α. The sum
// is generally not unitary; its singular values are reported alongside. No
// claim beyond the arithmetic is attached to this quantity.
struct HolonomyAverage {
    ComplexMatrix mean_operator;
    RealVector singular_values; // descending
    double excluded_weight = 0.0;
    std::uint64_t trajectory_count = 0;
};

inline HolonomyAverage average_holonomy_report(const ChannelSequence& seq,
                                               const DensityOperator& rho,
                                               double min_weight = 1e-9, double epsilon = 0.0,
                                               bool close_loop = true,
                                               const Tolerances& tol = {}) {
    MixedEnumeration en = enumerate(seq, rho, 0.0, tol);
    HolonomyAverage out;
    out.trajectory_count = en.trajectories.size();
    out.mean_operator = ComplexMatrix::Zero(seq.dim(), seq.dim());
    for (const MixedTrajectory& t : en.trajectories) {
        if (!(t.weight > min_weight)) {
            out.excluded_weight += t.weight;
            continue;
        }
        std::vector<DensityOperator> states;
        states.reserve(t.states.size());
        for (const DensityOperator& s : t.states)
            states.push_back(epsilon > 0.0 ? regularize(s, epsilon, tol) : s);
        Holonomy h = uhlmann_holonomy(states, close_loop, tol);
        out.mean_operator += t.weight * h.op.matrix();
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(out.mean_operator);
    out.singular_values = svd.singularValues();
    return out;
}

} // namespace qtraj
