#pragma once

#include <numbers>
#include <vector>

#include "qtraj/phases.hpp"
#include "qtraj/trajectories.hpp"

namespace qtraj {

// Two-arm interference pattern over a phase-shift grid. The U(1) shifter
// sits on the reference arm:
//     I(χ) = || path + e^{iχ}·reference ||² ,
// so the fringe maximum χ* satisfies e^{-iχ*} = Φ[<path|reference>]. Arms
// receive the raw (unnormalized) trajectory states; visibility then reflects
// both the overlap and the norm loss of the post-selected branch.
struct FringeScan {
    std::vector<double> grid;        // χ values in [0, 2π)
    std::vector<double> intensities; // I(χ) per grid point
    double chi_star = 0.0;           // interpolated maximizer
};

inline FringeScan fringe_scan(const StateVector& reference, const StateVector& path,
                              int grid_size, const Tolerances& tol = {}) {
    if (reference.size() != path.size())
        throw DimensionMismatch("fringe_scan: arm dimensions differ");
    if (grid_size < 8)
        throw InvalidParameter("fringe_scan: grid_size must be >= 8");
    if (!all_finite(reference) || !all_finite(path))
        throw InvalidParameter("fringe_scan: non-finite arm state");
    if (reference.norm() == 0.0 && path.norm() == 0.0)
        throw InvalidParameter("fringe_scan: both arms are zero");

    const Complex cross = path.dot(reference); // <path|reference>
    if (std::abs(cross) <= tol.zero_overlap)
        throw DegenerateFringe("fringe_scan: flat fringe, |<path|reference>| = " +
                               std::to_string(std::abs(cross)));

    const double base = path.squaredNorm() + reference.squaredNorm();
    const double two_pi = 2.0 * std::numbers::pi;
    FringeScan scan;
    scan.grid.resize(static_cast<std::size_t>(grid_size));
    scan.intensities.resize(static_cast<std::size_t>(grid_size));
    int argmax = 0;
    for (int j = 0; j < grid_size; ++j) {
        double chi = two_pi * j / grid_size;
        double intensity = base + 2.0 * (std::cos(chi) * cross.real() - std::sin(chi) * cross.imag());
        scan.grid[static_cast<std::size_t>(j)] = chi;
        scan.intensities[static_cast<std::size_t>(j)] = intensity;
        if (intensity > scan.intensities[static_cast<std::size_t>(argmax)]) argmax = j;
    }

    // three-point quadratic refinement around the grid maximum (wrapping)
    double step = two_pi / grid_size;
    double left = scan.intensities[static_cast<std::size_t>((argmax + grid_size - 1) % grid_size)];
    double mid = scan.intensities[static_cast<std::size_t>(argmax)];
    double right = scan.intensities[static_cast<std::size_t>((argmax + 1) % grid_size)];
    double denom = left - 2.0 * mid + right;
    double delta = 0.0;
    if (std::abs(denom) > 1e-300) {
        delta = 0.5 * (left - right) / denom;
        if (delta > 0.5) delta = 0.5;
        if (delta < -0.5) delta = -0.5;
    }
    scan.chi_star = std::fmod(scan.grid[static_cast<std::size_t>(argmax)] + delta * step + two_pi,
                              two_pi);
    return scan;
}

// One iteration of the interferometric protocol: estimated vs exact phase of
// the forward segment <ψ_k|ψ_{k-1}>.
struct StepRecord {
    int step = 0; // 1..N forward, N+1 for the closing segment
    PhaseFactor estimated_phase;
    PhaseFactor exact_phase;
    double abs_error = 0.0; // radians
};

namespace detail {

inline double angle_distance(double a, double b) {
    double d = std::remainder(a - b, 2.0 * std::numbers::pi);
    return std::abs(d);
}

inline StepRecord record_from_arms(int step, const StateVector& reference,
                                   const StateVector& path, int grid_size,
                                   const Tolerances& tol) {
    FringeScan scan;
    try {
        scan = fringe_scan(reference, path, grid_size, tol);
    } catch (const DegenerateFringe& e) {
        throw DegenerateFringe("step " + std::to_string(step) + ": " + std::string(e.what()));
    }
    PhaseFactor estimated(std::polar(1.0, -scan.chi_star), tol);
    PhaseFactor exact = phase_of(path.dot(reference), tol);
    double err = angle_distance(estimated.arg(), exact.arg());
    return StepRecord{step, estimated, exact, err};
}

} // namespace detail

// Runs the fringe scan for step k of a trajectory: reference arm carries
// ψ_{k-1}, the post-selected arm carries ψ_k = E_{α(k)} ψ_{k-1}.
inline StepRecord estimate_step_phase(const ChannelSequence& seq, const StateVector& psi,
                                      const TrajectoryIndex& idx, int k, int grid_size,
                                      const Tolerances& tol = {}) {
    if (k < 1 || k > seq.length())
        throw InvalidIndex("estimate_step_phase: step " + std::to_string(k) + " outside [1, " +
                           std::to_string(seq.length()) + "]");
    PureTrajectory traj = evolve_pure(seq, psi, idx, tol);
    const StateVector& reference = traj.states[static_cast<std::size_t>(k - 1)];
    const StateVector& path = traj.states[static_cast<std::size_t>(k)];
    return detail::record_from_arms(k, reference, path, grid_size, tol);
}

struct ProtocolResult {
    std::vector<StepRecord> records; // N forward records plus the closing one
    PhaseFactor product;             // Π of the estimated phase factors
    double weight = 0.0;             // p_α of the post-selected trajectory
    std::vector<FringeScan> scans;   // filled only when requested
};

// The full iterative procedure: N forward interferometer passes followed by
// the closing comparison of ψ against ψ_N. The product of the estimated
// phase factors reproduces the Pancharatnam phase of the trajectory up to
// grid error.
inline ProtocolResult run_protocol(const ChannelSequence& seq, const StateVector& psi,
                                   const TrajectoryIndex& idx, int grid_size,
                                   const Tolerances& tol = {}, bool keep_scans = false) {
    PureTrajectory traj = evolve_pure(seq, psi, idx, tol);
    const int n = seq.length();

    std::vector<StepRecord> records;
    std::vector<FringeScan> scans;
    Complex product(1.0, 0.0);
    auto run_segment = [&](int step, const StateVector& reference, const StateVector& path) {
        StepRecord rec = detail::record_from_arms(step, reference, path, grid_size, tol);
        product *= rec.estimated_phase.value();
        if (keep_scans) scans.push_back(fringe_scan(reference, path, grid_size, tol));
        records.push_back(std::move(rec));
    };
    for (int k = 1; k <= n; ++k)
        run_segment(k, traj.states[static_cast<std::size_t>(k - 1)],
                    traj.states[static_cast<std::size_t>(k)]);
    // back to ψ: the closing segment compares ψ against ψ_N
    run_segment(n + 1, traj.states[static_cast<std::size_t>(n)], traj.states[0]);

    return ProtocolResult{std::move(records), PhaseFactor(product, tol), traj.weight,
                          std::move(scans)};
}

} // namespace qtraj
