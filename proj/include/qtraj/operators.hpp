#pragma once

#include <cmath>
#include <complex>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "qtraj/errors.hpp"
#include "qtraj/tolerances.hpp"

namespace qtraj {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// State vectors are plain Eigen vectors; they may be unnormalized (trajectory
// states deliberately are).
using StateVector = ComplexVector;

inline bool all_finite(const ComplexMatrix& a) {
    return a.allFinite();
}

inline bool all_finite(const ComplexVector& v) {
    return v.allFinite();
}

// max-norm distance from A to its own adjoint
inline double hermiticity_error(const ComplexMatrix& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

// max-norm of U†U - 1
inline double unitarity_error(const ComplexMatrix& u) {
    ComplexMatrix gram = u.adjoint() * u;
    gram -= ComplexMatrix::Identity(u.rows(), u.cols());
    return gram.cwiseAbs().maxCoeff();
}

inline void require_square(const ComplexMatrix& a, const char* who) {
    if (a.rows() != a.cols() || a.rows() < 1)
        throw DimensionMismatch(std::string(who) + ": expected a square matrix, got " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    if (!all_finite(a))
        throw InvalidParameter(std::string(who) + ": matrix has non-finite entries");
}

// -------------------------------------------------------------------------
// Semantic wrappers
// -------------------------------------------------------------------------

// A unit-modulus complex number; the value Φ[z] = z/|z| of phase comparisons.
class PhaseFactor {
public:
    explicit PhaseFactor(Complex value, const Tolerances& tol = {}) : value_(value) {
        if (std::abs(std::abs(value) - 1.0) > tol.unit)
            throw InvalidParameter("PhaseFactor: |value| deviates from 1 by more than tol");
    }

    Complex value() const { return value_; }
    double arg() const { return std::arg(value_); }

private:
    Complex value_;
};

// Φ[z] = z/|z|. Undefined (by convention: orthogonal states) when |z| is at
// or below the zero-overlap tolerance.
inline PhaseFactor phase_of(Complex z, const Tolerances& tol = {}) {
    double m = std::abs(z);
    if (m <= tol.zero_overlap)
        throw ZeroPhaseUndefined("phase_of: |z| = " + std::to_string(m) +
                                 " is at or below the zero-overlap tolerance");
    return PhaseFactor(z / m, tol);
}

class UnitaryOperator {
public:
    explicit UnitaryOperator(ComplexMatrix m, const Tolerances& tol = {}) : m_(std::move(m)) {
        require_square(m_, "UnitaryOperator");
        double err = unitarity_error(m_);
        if (err > tol.unit) {
            std::ostringstream os;
            os << "UnitaryOperator: ||U'U - 1||_max = " << err << " exceeds tol " << tol.unit;
            throw NotUnitary(os.str());
        }
    }

    static UnitaryOperator identity(Eigen::Index dim) {
        return UnitaryOperator(ComplexMatrix::Identity(dim, dim));
    }

    const ComplexMatrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

private:
    ComplexMatrix m_;
};

// Hermitian PSD matrix with a (possibly non-unit) trace weight. Trajectory
// states are stored in exactly this unnormalized form.
class DensityOperator {
public:
    explicit DensityOperator(ComplexMatrix m, const Tolerances& tol = {}) : m_(std::move(m)) {
        require_square(m_, "DensityOperator");
        double herr = hermiticity_error(m_);
        if (herr > tol.herm) {
            std::ostringstream os;
            os << "DensityOperator: ||A - A'||_max = " << herr << " exceeds tol " << tol.herm;
            throw NotHermitian(os.str());
        }
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(), Eigen::EigenvaluesOnly);
        double lo = es.eigenvalues().minCoeff();
        if (lo < -tol.psd) {
            std::ostringstream os;
            os << "DensityOperator: minimum eigenvalue " << lo << " below -tol " << -tol.psd;
            throw NotPSD(os.str());
        }
        double tr = m_.trace().real();
        if (tr < -tol.psd)
            throw NotPSD("DensityOperator: negative trace");
    }

    static DensityOperator pure(const StateVector& psi, const Tolerances& tol = {}) {
        if (psi.size() < 1 || !all_finite(psi))
            throw InvalidParameter("DensityOperator::pure: invalid state vector");
        return DensityOperator(psi * psi.adjoint(), tol);
    }

    static DensityOperator maximally_mixed(Eigen::Index dim) {
        return DensityOperator(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim));
    }

    const ComplexMatrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }
    double trace() const { return m_.trace().real(); }

    ComplexMatrix hermitian_part() const { return 0.5 * (m_ + m_.adjoint()); }

    // rho / tr(rho); the trace must be resolvable from zero.
    DensityOperator normalized(const Tolerances& tol = {}) const {
        double tr = trace();
        if (tr <= tol.rank)
            throw SingularOperator("DensityOperator::normalized: trace is numerically zero");
        return DensityOperator(m_ / tr, tol);
    }

private:
    ComplexMatrix m_;
};

// -------------------------------------------------------------------------
// Hermitian eigendecomposition and PSD matrix functions
// -------------------------------------------------------------------------

struct HermitianEig {
    RealVector eigenvalues;    // ascending
    ComplexMatrix eigenvectors; // columns; unitary
};

// Eigendecomposition of a Hermitian matrix: A = V diag(λ) V†, λ ascending.
inline HermitianEig hermitian_eig(const ComplexMatrix& a, const Tolerances& tol = {}) {
    require_square(a, "hermitian_eig");
    double herr = hermiticity_error(a);
    if (herr > tol.herm) {
        std::ostringstream os;
        os << "hermitian_eig: ||A - A'||_max = " << herr << " exceeds tol " << tol.herm;
        throw NotHermitian(os.str());
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (a + a.adjoint()));
    if (es.info() != Eigen::Success)
        throw Error("EigensolverFailure", "hermitian_eig: iteration did not converge");
    return HermitianEig{es.eigenvalues(), es.eigenvectors()};
}

namespace detail {

// Spectral function of a density operator with an eigenvalue filter applied
// before f. Shared backend of psd_sqrt / psd_inv_sqrt.
template <typename Filter, typename Fn>
ComplexMatrix spectral_map(const DensityOperator& rho, Filter&& filter, Fn&& f,
                           const Tolerances& tol) {
    HermitianEig eig = hermitian_eig(rho.matrix(), tol);
    RealVector vals = eig.eigenvalues;
    for (Eigen::Index i = 0; i < vals.size(); ++i) vals[i] = filter(vals[i]);
    ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
    for (Eigen::Index i = 0; i < vals.size(); ++i)
        out += f(vals[i]) * (eig.eigenvectors.col(i) * eig.eigenvectors.col(i).adjoint());
    return 0.5 * (out + out.adjoint());
}

} // namespace detail

// Hermitian PSD square root: result² = rho. Eigenvalues in [-tol.psd, 0) are
// clamped to zero; anything lower rejects the input.
inline DensityOperator psd_sqrt(const DensityOperator& rho, const Tolerances& tol = {}) {
    auto filter = [&](double v) {
        if (v < -tol.psd) {
            std::ostringstream os;
            os << "psd_sqrt: eigenvalue " << v << " below -tol " << -tol.psd;
            throw NotPSD(os.str());
        }
        return v < 0.0 ? 0.0 : v;
    };
    ComplexMatrix b = detail::spectral_map(rho, filter, [](double v) { return std::sqrt(v); }, tol);
    return DensityOperator(b, tol);
}

// Inverse square root of a full-rank PSD operator: result·rho·result = 1.
// Rank deficiency is a hard error here; regularization is the caller's
// explicit choice (see phases.hpp).
inline ComplexMatrix psd_inv_sqrt(const DensityOperator& rho, const Tolerances& tol = {}) {
    auto filter = [&](double v) {
        if (v < tol.rank) {
            std::ostringstream os;
            os << "psd_inv_sqrt: eigenvalue " << v << " below rank tolerance " << tol.rank;
            throw SingularOperator(os.str());
        }
        return v;
    };
    return detail::spectral_map(rho, filter, [](double v) { return 1.0 / std::sqrt(v); }, tol);
}

} // namespace qtraj
