#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qtraj/operators.hpp"

namespace qtraj {

// One discrete evolution step: a finite Kraus representation {E_p} of a
// trace-preserving completely positive map, rho -> Σ_p E_p rho E_p†.
// The operator order is significant: index p is the measurement-outcome
// label that trajectory index sequences refer to.
class KrausChannel {
public:
    KrausChannel(std::vector<ComplexMatrix> ops, std::string label = "",
                 const Tolerances& tol = {})
        : ops_(std::move(ops)), label_(std::move(label)) {
        if (ops_.empty())
            throw InvalidParameter("KrausChannel: empty operator list");
        const Eigen::Index d = ops_.front().rows();
        for (const ComplexMatrix& e : ops_) {
            require_square(e, "KrausChannel");
            if (e.rows() != d)
                throw DimensionMismatch("KrausChannel: operators have mixed dimensions");
        }
        double err = completeness_error();
        if (err > tol.complete) {
            std::ostringstream os;
            os << "KrausChannel" << (label_.empty() ? "" : " '" + label_ + "'")
               << ": ||Σ E'E - 1||_max = " << err << " exceeds tol " << tol.complete;
            throw CompletenessViolation(os.str());
        }
    }

    Eigen::Index dim() const { return ops_.front().rows(); }
    int size() const { return static_cast<int>(ops_.size()); } // M = μ+1
    const ComplexMatrix& op(int p) const { return ops_.at(static_cast<std::size_t>(p)); }
    const std::vector<ComplexMatrix>& ops() const { return ops_; }
    const std::string& label() const { return label_; }

    double completeness_error() const {
        ComplexMatrix sum = ComplexMatrix::Zero(dim(), dim());
        for (const ComplexMatrix& e : ops_) sum += e.adjoint() * e;
        sum -= ComplexMatrix::Identity(dim(), dim());
        return sum.cwiseAbs().maxCoeff();
    }

private:
    std::vector<ComplexMatrix> ops_;
    std::string label_;
};

// An ordered list of steps t_0 < t_1 < ... < t_N. Steps need not be
// identical channels; only their dimension must agree.
class ChannelSequence {
public:
    explicit ChannelSequence(std::vector<KrausChannel> steps) : steps_(std::move(steps)) {
        if (steps_.empty())
            throw InvalidParameter("ChannelSequence: at least one step required");
        for (const KrausChannel& ch : steps_)
            if (ch.dim() != steps_.front().dim())
                throw DimensionMismatch("ChannelSequence: steps have mixed dimensions");
    }

    Eigen::Index dim() const { return steps_.front().dim(); }
    int length() const { return static_cast<int>(steps_.size()); } // N
    const KrausChannel& step(int k) const { return steps_.at(static_cast<std::size_t>(k)); }
    const std::vector<KrausChannel>& steps() const { return steps_; }

private:
    std::vector<KrausChannel> steps_;
};

inline DensityOperator apply_channel(const KrausChannel& ch, const DensityOperator& rho,
                                     const Tolerances& tol = {}) {
    if (ch.dim() != rho.dim())
        throw DimensionMismatch("apply_channel: channel dim " + std::to_string(ch.dim()) +
                                " vs state dim " + std::to_string(rho.dim()));
    ComplexMatrix out = ComplexMatrix::Zero(rho.dim(), rho.dim());
    for (const ComplexMatrix& e : ch.ops()) out += e * rho.matrix() * e.adjoint();
    return DensityOperator(out, tol);
}

// Left-to-right composition: the last step in the sequence acts last.
inline DensityOperator compose_sequence(const ChannelSequence& seq, const DensityOperator& rho,
                                        const Tolerances& tol = {}) {
    DensityOperator state = rho;
    for (const KrausChannel& ch : seq.steps()) state = apply_channel(ch, state, tol);
    return state;
}

// Kraus representation freedom: F_q = Σ_p u_{qp} E_p for an M x M unitary u.
// The channel action is unchanged; the trajectory decomposition is not.
inline KrausChannel transform_representation(const KrausChannel& ch, const UnitaryOperator& u,
                                             const Tolerances& tol = {}) {
    if (u.dim() != ch.size())
        throw DimensionMismatch("transform_representation: mixer is " + std::to_string(u.dim()) +
                                "x" + std::to_string(u.dim()) + " but the channel has " +
                                std::to_string(ch.size()) + " operators");
    std::vector<ComplexMatrix> mixed;
    mixed.reserve(static_cast<std::size_t>(ch.size()));
    for (int q = 0; q < ch.size(); ++q) {
        ComplexMatrix f = ComplexMatrix::Zero(ch.dim(), ch.dim());
        for (int p = 0; p < ch.size(); ++p) f += u.matrix()(q, p) * ch.op(p);
        mixed.push_back(std::move(f));
    }
    std::string label = ch.label().empty() ? "mixed" : ch.label() + "+mixed";
    return KrausChannel(std::move(mixed), std::move(label), tol);
}

// A unitary on environment ⊗ system realizing the channel one level up:
// E_p = <e_p| U |e_0>. Joint indices are env-major: (p, i) -> p*d + i.
struct DilatedStep {
    int env_dim;                // M
    int sys_dim;                // d
    int prepared_env_index;     // always 0 here
    UnitaryOperator joint;

    // <e_p| U |e_prepared> as a d x d block
    ComplexMatrix kraus_block(int p) const {
        return joint.matrix().block(p * sys_dim, prepared_env_index * sys_dim, sys_dim, sys_dim);
    }
};

// Stinespring-style dilation. The d columns over the prepared environment
// state stack the Kraus operators (an isometry by completeness); the
// remaining columns are filled by Gram-Schmidt over standard basis vectors.
// Only the <e_p|U|e_0> blocks are contractual; the completion is a
// documented convention.
inline DilatedStep dilate(const KrausChannel& ch, const Tolerances& tol = {}) {
    const int d = static_cast<int>(ch.dim());
    const int m = ch.size();
    const int total = m * d;

    double cerr = ch.completeness_error();
    if (cerr > tol.complete) {
        std::ostringstream os;
        os << "dilate: completeness error " << cerr << " exceeds tol " << tol.complete;
        throw CompletenessViolation(os.str());
    }

    ComplexMatrix u = ComplexMatrix::Zero(total, total);
    for (int p = 0; p < m; ++p)
        u.block(p * d, 0, d, d) = ch.op(p);

    // complete the isometry to a unitary
    int filled = d;
    for (int cand = 0; cand < total && filled < total; ++cand) {
        ComplexVector v = ComplexVector::Zero(total);
        v[cand] = Complex(1.0, 0.0);
        for (int pass = 0; pass < 2; ++pass) // re-orthogonalize once for stability
            for (int c = 0; c < filled; ++c) v -= u.col(c).dot(v) * u.col(c);
        double n = v.norm();
        if (n > 1e-6) {
            u.col(filled++) = v / n;
        }
    }
    if (filled != total)
        throw Error("DilationFailure", "dilate: could not complete the isometry to a unitary");

    return DilatedStep{m, d, 0, UnitaryOperator(std::move(u), tol)};
}

// -------------------------------------------------------------------------
// Channel presets
// -------------------------------------------------------------------------
//
// Canonical operator orders (index p = trajectory outcome label):
//   identity            []                 {1}
//   unitary_rotation    [θ] or [θ,nx,ny,nz] {exp(-i θ/2 n·σ)}   (d=2; default axis z)
//   dephasing           [p]                {√(1-p)·1, √p·σ_z}   (d=2)
//   complete_dephasing  []                 {|0><0|, ..., |d-1><d-1|}
//   depolarizing        [p]                {√(1-3p/4)·1, √(p/4)X, √(p/4)Y, √(p/4)Z} (d=2)
//   amplitude_damping   [p]                {[[1,0],[0,√(1-p)]], [[0,√p],[0,0]]}     (d=2)
inline KrausChannel preset(const std::string& name, const std::vector<double>& params,
                           int dim, const Tolerances& tol = {}) {
    auto want_params = [&](std::size_t n) {
        if (params.size() != n)
            throw InvalidParameter("preset '" + name + "': expected " + std::to_string(n) +
                                   " parameter(s), got " + std::to_string(params.size()));
    };
    auto want_dim2 = [&] {
        if (dim != 2)
            throw InvalidParameter("preset '" + name + "' is defined for dim 2, got dim " +
                                   std::to_string(dim));
    };
    auto probability = [&](double p) {
        if (!(p >= 0.0 && p <= 1.0))
            throw InvalidParameter("preset '" + name + "': probability " + std::to_string(p) +
                                   " outside [0, 1]");
        return p;
    };
    if (dim < 1)
        throw InvalidParameter("preset: dim must be >= 1");

    const Complex i1(0.0, 1.0);
    ComplexMatrix sx(2, 2), sy(2, 2), sz(2, 2);
    if (dim == 2) {
        sx << 0, 1, 1, 0;
        sy << 0, -i1, i1, 0;
        sz << 1, 0, 0, -1;
    }

    if (name == "identity") {
        want_params(0);
        return KrausChannel({ComplexMatrix::Identity(dim, dim)}, "identity", tol);
    }
    if (name == "unitary_rotation") {
        want_dim2();
        if (params.size() != 1 && params.size() != 4)
            throw InvalidParameter("preset 'unitary_rotation': expected [theta] or "
                                   "[theta, nx, ny, nz]");
        double theta = params[0];
        double nx = 0.0, ny = 0.0, nz = 1.0;
        if (params.size() == 4) {
            nx = params[1];
            ny = params[2];
            nz = params[3];
        }
        double nn = std::sqrt(nx * nx + ny * ny + nz * nz);
        if (nn <= 0.0)
            throw InvalidParameter("preset 'unitary_rotation': zero rotation axis");
        ComplexMatrix axis = (nx * sx + ny * sy + nz * sz) / nn;
        ComplexMatrix u = std::cos(theta / 2) * ComplexMatrix::Identity(2, 2) -
                          i1 * std::sin(theta / 2) * axis;
        return KrausChannel({u}, "unitary_rotation", tol);
    }
    if (name == "dephasing") {
        want_dim2();
        want_params(1);
        double p = probability(params[0]);
        return KrausChannel({std::sqrt(1.0 - p) * ComplexMatrix::Identity(2, 2),
                             std::sqrt(p) * sz},
                            "dephasing", tol);
    }
    if (name == "complete_dephasing") {
        want_params(0);
        std::vector<ComplexMatrix> projectors;
        for (int k = 0; k < dim; ++k) {
            ComplexMatrix pk = ComplexMatrix::Zero(dim, dim);
            pk(k, k) = Complex(1.0, 0.0);
            projectors.push_back(std::move(pk));
        }
        return KrausChannel(std::move(projectors), "complete_dephasing", tol);
    }
    if (name == "depolarizing") {
        want_dim2();
        want_params(1);
        double p = probability(params[0]);
        return KrausChannel({std::sqrt(1.0 - 0.75 * p) * ComplexMatrix::Identity(2, 2),
                             std::sqrt(0.25 * p) * sx, std::sqrt(0.25 * p) * sy,
                             std::sqrt(0.25 * p) * sz},
                            "depolarizing", tol);
    }
    if (name == "amplitude_damping") {
        want_dim2();
        want_params(1);
        double p = probability(params[0]);
        ComplexMatrix e0(2, 2), e1(2, 2);
        e0 << 1, 0, 0, std::sqrt(1.0 - p);
        e1 << 0, std::sqrt(p), 0, 0;
        return KrausChannel({e0, e1}, "amplitude_damping", tol);
    }
    throw UnknownPreset("preset: unknown channel preset '" + name + "'");
}

} // namespace qtraj
