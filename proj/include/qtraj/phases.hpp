#pragma once

#include <span>
#include <vector>

#include "qtraj/operators.hpp"

namespace qtraj {

// -------------------------------------------------------------------------
// Pancharatnam phase of a pure trajectory
// -------------------------------------------------------------------------

// Φ of the cyclic overlap chain <ψ|ψ_N><ψ_N|ψ_{N-1}>...<ψ_1|ψ>. Invariant
// under per-state phase changes and positive rescalings (every state enters
// once as bra and once as ket). Overlaps are checked chronologically;
// segment k in [1, N] is <ψ_k|ψ_{k-1}>, segment N+1 is the closing <ψ|ψ_N>.
inline PhaseFactor pancharatnam_phase(std::span<const StateVector> states,
                                      const Tolerances& tol = {}) {
    if (states.size() < 2)
        throw InvalidParameter("pancharatnam_phase: need at least two states");
    const std::size_t n = states.size() - 1;
    for (const StateVector& s : states)
        if (s.size() != states[0].size())
            throw DimensionMismatch("pancharatnam_phase: states have mixed dimensions");

    Complex product(1.0, 0.0);
    auto take = [&](const StateVector& bra, const StateVector& ket, std::size_t segment) {
        Complex ov = bra.dot(ket); // Eigen's dot conjugates the first argument
        if (std::abs(ov) <= tol.zero_overlap)
            throw ZeroPhaseUndefined("pancharatnam_phase: vanishing overlap at segment " +
                                     std::to_string(segment));
        product *= ov;
    };
    for (std::size_t k = 1; k <= n; ++k) take(states[k], states[k - 1], k);
    take(states[0], states[n], n + 1);
    return phase_of(product, tol);
}

inline PhaseFactor pancharatnam_phase(const std::vector<StateVector>& states,
                                      const Tolerances& tol = {}) {
    return pancharatnam_phase(std::span<const StateVector>(states), tol);
}

// -------------------------------------------------------------------------
// Uhlmann transport of a mixed trajectory
// -------------------------------------------------------------------------

// Explicit ε-regularization toward the maximally mixed state:
// rho -> (1-ε)·rho/tr(rho) + ε·1/d. The library never regularizes silently;
// rank-deficient transport is a hard SingularOperator error unless the
// caller opts in through this map.
inline DensityOperator regularize(const DensityOperator& rho, double epsilon,
                                  const Tolerances& tol = {}) {
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw InvalidParameter("regularize: epsilon must lie in [0, 1)");
    DensityOperator unit = rho.normalized(tol);
    if (epsilon == 0.0) return unit;
    ComplexMatrix m = (1.0 - epsilon) * unit.matrix() +
                      epsilon / static_cast<double>(rho.dim()) *
                          ComplexMatrix::Identity(rho.dim(), rho.dim());
    return DensityOperator(m, tol);
}

namespace detail {

inline DensityOperator transport_normalized(const DensityOperator& rho, const char* who,
                                            const Tolerances& tol) {
    DensityOperator unit = rho.normalized(tol);
    HermitianEig eig = hermitian_eig(unit.hermitian_part(), tol);
    if (eig.eigenvalues.minCoeff() < tol.rank)
        throw SingularOperator(std::string(who) + ": state is rank deficient (min eigenvalue " +
                               std::to_string(eig.eigenvalues.minCoeff()) + ")");
    return unit;
}

} // namespace detail

// One parallel-transport factor
//     X = (√ρ_to ρ_from √ρ_to)^{-1/2} √ρ_to √ρ_from ,
// the unitary polar factor of √ρ_to √ρ_from. Inputs are trace-normalized
// internally; transport is scale covariant, so weights never enter here.
inline UnitaryOperator uhlmann_step(const DensityOperator& rho_from,
                                    const DensityOperator& rho_to,
                                    const Tolerances& tol = {}) {
    if (rho_from.dim() != rho_to.dim())
        throw DimensionMismatch("uhlmann_step: state dimensions differ");
    DensityOperator from = detail::transport_normalized(rho_from, "uhlmann_step (rho_from)", tol);
    DensityOperator to = detail::transport_normalized(rho_to, "uhlmann_step (rho_to)", tol);

    ComplexMatrix root_from = psd_sqrt(from, tol).matrix();
    ComplexMatrix root_to = psd_sqrt(to, tol).matrix();
    DensityOperator middle(root_to * from.matrix() * root_to, tol);
    ComplexMatrix x = psd_inv_sqrt(middle, tol) * root_to * root_from;

    // The middle factor squares the condition number of √ρ_to √ρ_from, so
    // near-singular inputs leave x slightly off the unitary manifold.
    // Newton-Schulz steps restore unitarity without leaving the formula's
    // value: each step contracts ||x'x - 1|| quadratically.
    const ComplexMatrix eye = ComplexMatrix::Identity(x.rows(), x.cols());
    for (int pass = 0; pass < 4; ++pass) {
        ComplexMatrix gram = x.adjoint() * x;
        if ((gram - eye).cwiseAbs().maxCoeff() <= 1e-14) break;
        x = 0.5 * x * (3.0 * eye - gram);
    }
    return UnitaryOperator(std::move(x), tol);
}

// Holonomy of a trajectory: the V-independent unitary accumulated by the
// parallelity condition along the (normalized) state sequence.
struct Holonomy {
    UnitaryOperator op;
};

// The transport factors X_1 ... X_N for consecutive pairs, in chronological
// order. With close_loop the sequence is extended by states[0] at the end,
// adding a final factor transporting ρ_N back to ρ; this matches the closing
// overlap of the Pancharatnam product and is the convention under which the
// pure-state reduction is exact.
inline std::vector<UnitaryOperator> uhlmann_chain(std::span<const DensityOperator> states,
                                                  bool close_loop,
                                                  const Tolerances& tol = {}) {
    if (states.size() < 2)
        throw InvalidParameter("uhlmann_chain: need at least two states");
    std::vector<UnitaryOperator> chain;
    chain.reserve(states.size() - 1 + (close_loop ? 1u : 0u));
    for (std::size_t k = 0; k + 1 < states.size(); ++k) {
        try {
            chain.push_back(uhlmann_step(states[k], states[k + 1], tol));
        } catch (const SingularOperator& e) {
            throw SingularOperator("transport step " + std::to_string(k + 1) + ": " +
                                   std::string(e.what()));
        }
    }
    if (close_loop) {
        try {
            chain.push_back(uhlmann_step(states[states.size() - 1], states[0], tol));
        } catch (const SingularOperator& e) {
            throw SingularOperator("closing transport step: " + std::string(e.what()));
        }
    }
    return chain;
}

// U^α = X_N ··· X_2 X_1 (latest factor leftmost).
inline Holonomy uhlmann_holonomy(std::span<const DensityOperator> states, bool close_loop,
                                 const Tolerances& tol = {}) {
    std::vector<UnitaryOperator> chain = uhlmann_chain(states, close_loop, tol);
    ComplexMatrix u = ComplexMatrix::Identity(states[0].dim(), states[0].dim());
    for (const UnitaryOperator& x : chain) u = x.matrix() * u;
    return Holonomy{UnitaryOperator(std::move(u), tol)};
}

inline Holonomy uhlmann_holonomy(const std::vector<DensityOperator>& states, bool close_loop,
                                 const Tolerances& tol = {}) {
    return uhlmann_holonomy(std::span<const DensityOperator>(states), close_loop, tol);
}

// The amplitude-route evaluation: carry an explicit initial phase V through
// the chain, V_{k+1} = X_k V_k, and return V_N V†. Algebraically identical
// to the chain product for every V; exercised by tests to pin down the
// V-independence of the holonomy numerically.
inline Holonomy holonomy_via_amplitudes(std::span<const DensityOperator> states, bool close_loop,
                                        const UnitaryOperator& initial_phase,
                                        const Tolerances& tol = {}) {
    if (initial_phase.dim() != states[0].dim())
        throw DimensionMismatch("holonomy_via_amplitudes: initial phase has wrong dimension");
    std::vector<UnitaryOperator> chain = uhlmann_chain(states, close_loop, tol);
    ComplexMatrix v = initial_phase.matrix();
    for (const UnitaryOperator& x : chain) v = x.matrix() * v;
    return Holonomy{UnitaryOperator(v * initial_phase.matrix().adjoint(), tol)};
}

// Per-step diagnostics of the parallelity condition W_{k+1}†W_k > 0.
struct ParallelityReport {
    std::vector<double> hermiticity_errors; // of each W_{k+1}†W_k
    std::vector<double> margins;            // min eigenvalue of each product
};

// Rebuilds the amplitude phases V_k from the transport chain (V_0 = the
// given initial phase) and checks every product W_{k+1}†W_k for Hermiticity
// and strict positivity. The chain may be one entry longer than the pair
// count of `states`, in which case it is treated as closed and states[0] is
// revisited at the end.
inline ParallelityReport verify_parallelity(std::span<const DensityOperator> states,
                                            const std::vector<UnitaryOperator>& chain,
                                            const UnitaryOperator& initial_phase,
                                            const Tolerances& tol = {}) {
    if (states.size() < 2)
        throw InvalidParameter("verify_parallelity: need at least two states");
    const std::size_t open_steps = states.size() - 1;
    bool closed = false;
    if (chain.size() == open_steps + 1)
        closed = true;
    else if (chain.size() != open_steps)
        throw InvalidParameter("verify_parallelity: chain length does not match the states");

    auto state_at = [&](std::size_t k) -> const DensityOperator& {
        return states[k < states.size() ? k : 0];
    };

    ParallelityReport report;
    ComplexMatrix v = initial_phase.matrix();
    ComplexMatrix root_prev =
        psd_sqrt(detail::transport_normalized(state_at(0), "verify_parallelity", tol), tol)
            .matrix();
    for (std::size_t k = 0; k < chain.size(); ++k) {
        ComplexMatrix w_prev = root_prev * v;
        v = chain[k].matrix() * v;
        ComplexMatrix root_next =
            psd_sqrt(detail::transport_normalized(state_at(k + 1), "verify_parallelity", tol), tol)
                .matrix();
        ComplexMatrix w_next = root_next * v;

        ComplexMatrix product = w_next.adjoint() * w_prev;
        double herr = hermiticity_error(product);
        double margin =
            hermitian_eig(0.5 * (product + product.adjoint()), tol).eigenvalues.minCoeff();
        if (herr > tol.herm)
            throw ParallelityViolation("step " + std::to_string(k + 1) +
                                       ": W'W is not Hermitian (error " + std::to_string(herr) +
                                       ")");
        if (!(margin > 0.0))
            throw ParallelityViolation("step " + std::to_string(k + 1) +
                                       ": W'W has non-positive eigenvalue " +
                                       std::to_string(margin));
        report.hermiticity_errors.push_back(herr);
        report.margins.push_back(margin);
        root_prev = std::move(root_next);
    }
    (void)closed;
    return report;
}

inline ParallelityReport verify_parallelity(std::span<const DensityOperator> states,
                                            const std::vector<UnitaryOperator>& chain,
                                            const Tolerances& tol = {}) {
    return verify_parallelity(states, chain, UnitaryOperator::identity(states[0].dim()), tol);
}

// Scalar phase the holonomy assigns to a pure direction: Φ[<ψ|U^α|ψ>].
// Reduces to the Pancharatnam phase of the trajectory as the states approach
// purity (closed-loop convention).
inline PhaseFactor pure_limit_phase(const Holonomy& holonomy, const StateVector& psi,
                                    const Tolerances& tol = {}) {
    if (psi.size() != holonomy.op.dim())
        throw DimensionMismatch("pure_limit_phase: state dimension mismatch");
    double n = psi.norm();
    if (n <= tol.zero_overlap)
        throw InvalidParameter("pure_limit_phase: zero state vector");
    StateVector unit = psi / n;
    Complex overlap = unit.dot(holonomy.op.matrix() * unit);
    if (std::abs(overlap) <= tol.zero_overlap)
        throw ZeroPhaseUndefined("pure_limit_phase: <ψ|U|ψ> vanishes");
    return phase_of(overlap, tol);
}

} // namespace qtraj
