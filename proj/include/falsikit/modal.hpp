#pragma once
// Natural frequencies, mode shapes, MAC and modal residual vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "falsikit/errors.hpp"

namespace falsikit {

struct ModalResult {
    std::vector<double> frequencies; // Hz, ascending
    Eigen::MatrixXd mode_shapes;     // DOF x modes, unit columns, largest entry positive
    std::vector<double> eigenvalues; // omega^2 [rad^2/s^2]

    std::size_t mode_count() const { return frequencies.size(); }
};

/// Generalized symmetric eigenproblem K phi = lambda M phi, lowest `n_modes`.
inline ModalResult solve_modes(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K, std::size_t n_modes) {
    const auto n = static_cast<std::size_t>(M.rows());
    if (M.cols() != M.rows() || K.rows() != M.rows() || K.cols() != M.cols())
        throw DomainError("solve_modes: M and K must be square and of equal size");
    if (n_modes == 0 || n_modes > n) throw DomainError("solve_modes: n_modes must lie in [1, DOF]");
    if (!M.isApprox(M.transpose()) || !K.isApprox(K.transpose(), 1e-12))
        throw DomainError("solve_modes: M and K must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw DomainError("solve_modes: mass matrix is not positive definite");

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
    if (es.info() != Eigen::Success) throw DomainError("solve_modes: eigen decomposition failed");

    ModalResult r;
    r.mode_shapes.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_modes));
    for (std::size_t j = 0; j < n_modes; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double lambda = std::max(es.eigenvalues()(jj), 0.0);
        r.eigenvalues.push_back(lambda);
        r.frequencies.push_back(std::sqrt(lambda) / (2.0 * std::numbers::pi));
        Eigen::VectorXd phi = es.eigenvectors().col(jj);
        phi.normalize();
        Eigen::Index imax = 0;
        phi.cwiseAbs().maxCoeff(&imax);
        if (phi(imax) < 0.0) phi = -phi;
        r.mode_shapes.col(jj) = phi;
    }
    return r;
}

/// Modal assurance criterion |a.b|^2 / (|a|^2 |b|^2).
inline double mac(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw DomainError("mac: vectors differ in length");
    const double aa = a.squaredNorm();
    const double bb = b.squaredNorm();
    if (aa == 0.0 || bb == 0.0) throw DomainError("mac: zero vector");
    const double ab = a.dot(b);
    return std::clamp(ab * ab / (aa * bb), 0.0, 1.0);
}

/// [f_model - f_ref (Hz) ..., 1 - MAC(model_i, ref_i) ...], modes paired by index.
inline std::vector<double> modal_residual(const ModalResult& model, const ModalResult& reference) {
    const std::size_t n = model.mode_count();
    if (n != reference.mode_count()) throw DomainError("modal_residual: mode counts differ");
    if (model.mode_shapes.rows() != reference.mode_shapes.rows())
        throw DomainError("modal_residual: mode shapes differ in DOF count");
    std::vector<double> r(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        r[i] = model.frequencies[i] - reference.frequencies[i];
        r[n + i] = 1.0 - mac(model.mode_shapes.col(ii), reference.mode_shapes.col(ii));
    }
    return r;
}

/// Tridiagonal stiffness of a fixed-base shear chain; k[0] ties floor 1 to the base.
inline Eigen::MatrixXd shear_chain_stiffness(const std::vector<double>& k) {
    const auto n = static_cast<Eigen::Index>(k.size());
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) += k[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            const double kn = k[static_cast<std::size_t>(i + 1)];
            K(i, i) += kn;
            K(i, i + 1) -= kn;
            K(i + 1, i) -= kn;
        }
    }
    return K;
}

/// Mass- and stiffness-proportional coefficients (a0, a1) giving damping
/// ratio zeta at circular frequencies w_i and w_j.
struct RayleighCoefficients {
    double a0 = 0.0;
    double a1 = 0.0;
};

inline RayleighCoefficients rayleigh_coefficients(double w_i, double w_j, double zeta) {
    if (!(w_i > 0.0) || !(w_j > 0.0) || w_i == w_j)
        throw DomainError("rayleigh: need two distinct positive frequencies");
    // zeta = a0/(2w) + a1 w/2 at both frequencies
    const double a1 = 2.0 * zeta / (w_i + w_j);
    const double a0 = a1 * w_i * w_j;
    return {a0, a1};
}

/// C = a0 M + a1 K calibrated to zeta in fixed-base modes (1-based) mode_i, mode_j.
inline Eigen::MatrixXd rayleigh_damping(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K, double zeta,
                                        std::size_t mode_i = 1, std::size_t mode_j = 2) {
    if (zeta == 0.0) return Eigen::MatrixXd::Zero(M.rows(), M.cols());
    const auto n = static_cast<std::size_t>(M.rows());
    if (n == 1) {
        // single DOF: stiffness-proportional only
        const double w = std::sqrt(K(0, 0) / M(0, 0));
        return Eigen::MatrixXd::Constant(1, 1, 2.0 * zeta / w * K(0, 0));
    }
    const ModalResult modes = solve_modes(M, K, std::max(mode_i, mode_j));
    const double wi = std::sqrt(modes.eigenvalues[mode_i - 1]);
    const double wj = std::sqrt(modes.eigenvalues[mode_j - 1]);
    const auto c = rayleigh_coefficients(wi, wj, zeta);
    return c.a0 * M + c.a1 * K;
}

} // namespace falsikit
