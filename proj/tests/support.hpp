#pragma once

// Shared fixtures for the unit and acceptance suites: seeded random states,
// densities, unitaries and channels, plus the octant path used as the
// analytically solvable reference trajectory.

#include <cmath>
#include <numbers>
#include <vector>

#include <qtraj/qtraj.hpp>

namespace support {

using qtraj::Complex;
using qtraj::ComplexMatrix;
using qtraj::DensityOperator;
using qtraj::KrausChannel;
using qtraj::SplitMix64;
using qtraj::StateVector;
using qtraj::UnitaryOperator;

inline double gaussian(SplitMix64& rng) {
    double u1 = rng.uniform();
    double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline Complex cgaussian(SplitMix64& rng) {
    return Complex(gaussian(rng), gaussian(rng));
}

inline ComplexMatrix gaussian_matrix(int rows, int cols, SplitMix64& rng) {
    ComplexMatrix g(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) g(r, c) = cgaussian(rng);
    return g;
}

inline StateVector random_state(int dim, SplitMix64& rng) {
    StateVector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = cgaussian(rng);
    return v / v.norm();
}

inline ComplexMatrix random_hermitian(int dim, SplitMix64& rng) {
    ComplexMatrix g = gaussian_matrix(dim, dim, rng);
    return 0.5 * (g + g.adjoint());
}

// full rank with probability one
inline DensityOperator random_density(int dim, SplitMix64& rng) {
    ComplexMatrix g = gaussian_matrix(dim, dim, rng);
    ComplexMatrix m = g * g.adjoint();
    return DensityOperator(m / m.trace().real());
}

inline UnitaryOperator random_unitary(int dim, SplitMix64& rng) {
    ComplexMatrix g = gaussian_matrix(dim, dim, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(dim, dim);
    return UnitaryOperator(q);
}

// A random Kraus channel with m operators: blocks of a random isometry, so
// completeness holds by construction.
inline KrausChannel random_channel(int dim, int m, SplitMix64& rng) {
    ComplexMatrix g = gaussian_matrix(m * dim, dim, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(m * dim, dim);
    std::vector<ComplexMatrix> ops;
    ops.reserve(static_cast<std::size_t>(m));
    for (int p = 0; p < m; ++p) ops.push_back(q.block(p * dim, 0, dim, dim));
    return KrausChannel(std::move(ops), "random");
}

// |0>, (|0>+|1>)/√2, (|0>+i|1>)/√2: a geodesic triangle covering one octant
// of the Bloch sphere (solid angle π/2), so its cyclic phase is e^{-iπ/4}.
inline std::vector<StateVector> octant_states() {
    StateVector s0(2), s1(2), s2(2);
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    s0 << 1.0, 0.0;
    s1 << inv_sqrt2, inv_sqrt2;
    s2 << inv_sqrt2, Complex(0.0, inv_sqrt2);
    return {s0, s1, s2};
}

inline Complex octant_reference_phase() {
    return std::polar(1.0, -std::numbers::pi / 4.0);
}

} // namespace support
