// circuit.hpp — Lumped n-terminal component: validation, ohmic state matrices,
// Hurwitz test, and normal-mode construction.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qtl/common.hpp"
#include "qtl/spectral_density.hpp"

namespace qtl::circuit {

using spectral::SpectralDensity;

// The n-terminal component: inductance matrix L (SPD), capacitor matrix K (PSD),
// one bath spectral density per terminal line. Units are dimensionless; hbar is
// configurable and defaults to 1.
struct CircuitSpec {
    int n = 0;
    Matrix L;
    Matrix K;
    std::vector<SpectralDensity> lines;
    double hbar = 1.0;
};

// First-order state matrices of the ohmic circuit in (q, i) coordinates.
//   A-: forward-time generator, assumed Hurwitz for r > 0.
//   A+: backward-time analogue; spectrum(A+) = -spectrum(A-).
struct StateMatrices {
    Matrix a_minus;
    Matrix a_plus;
    int n = 0;
};

struct HurwitzVerdict {
    bool hurwitz = false;
    double margin = 0.0;  // -max Re eigenvalue
};

// Normal modes of the lossless component: frequencies ascending, coupling
// matrix Y with q_k = sqrt(hbar/2) sum_j Y_kj (a_j + a_j^*).
struct NormalModes {
    std::vector<double> omegas;
    Matrix y;
};

namespace detail {

inline void require_square(const Matrix& m, int n, const char* name) {
    if (m.rows() != n || m.cols() != n)
        raise(errc::dimension_mismatch, std::string(name) + " must be " + std::to_string(n) +
                                            "x" + std::to_string(n));
}

inline Matrix symmetrized_checked(const Matrix& m, const char* name, double rel_tol) {
    double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > rel_tol * scale)
        raise(errc::not_symmetric, std::string(name) + " asymmetry " + std::to_string(asym) +
                                       " exceeds tolerance");
    return 0.5 * (m + m.transpose());
}

// Symmetric square root / inverse square root via eigendecomposition.
inline std::pair<Matrix, Matrix> sqrt_and_inv_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) raise(errc::eigen_failure, "sqrt eigendecomposition failed");
    Vector d = es.eigenvalues();
    Vector sq = d.cwiseMax(0.0).cwiseSqrt();
    Vector isq(sq.size());
    for (int i = 0; i < sq.size(); ++i) isq(i) = sq(i) > 0.0 ? 1.0 / sq(i) : 0.0;
    const Matrix& v = es.eigenvectors();
    return {v * sq.asDiagonal() * v.transpose(), v * isq.asDiagonal() * v.transpose()};
}

}  // namespace detail

// Validates dimensions, symmetry (then symmetrizes), L > 0, K >= 0 and the line
// densities. Idempotent: validating a validated spec is a no-op.
inline CircuitSpec validate_spec(const CircuitSpec& raw) {
    if (raw.n <= 0) raise(errc::dimension_mismatch, "terminal count must be positive");
    detail::require_square(raw.L, raw.n, "L");
    detail::require_square(raw.K, raw.n, "K");
    if (static_cast<int>(raw.lines.size()) != raw.n)
        raise(errc::dimension_mismatch, "need exactly one spectral density per line");
    if (!(raw.hbar > 0.0)) raise(errc::validation_error, "hbar must be positive");

    CircuitSpec spec = raw;
    spec.L = detail::symmetrized_checked(raw.L, "L", 1e-12);
    spec.K = detail::symmetrized_checked(raw.K, "K", 1e-12);

    Eigen::SelfAdjointEigenSolver<Matrix> esL(spec.L);
    if (esL.info() != Eigen::Success) raise(errc::eigen_failure, "L eigendecomposition failed");
    double l_norm = std::max(esL.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    if (esL.eigenvalues().minCoeff() <= 1e-12 * l_norm)
        raise(errc::not_positive_definite, "L must be positive definite");

    Eigen::SelfAdjointEigenSolver<Matrix> esK(spec.K);
    if (esK.info() != Eigen::Success) raise(errc::eigen_failure, "K eigendecomposition failed");
    double k_norm = std::max(esK.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    if (esK.eigenvalues().minCoeff() < -1e-12 * k_norm)
        raise(errc::not_positive_semidefinite, "K must be positive semidefinite");

    for (const auto& sd : spec.lines) spectral::validate_density(sd);
    return spec;
}

// A- = [[0, I], [-L^{-1}K, -r L^{-1}]], A+ flips the sign of the damping block.
// r is the common ohmic line resistance 1/(kappa c).
inline StateMatrices build_state_matrices(const CircuitSpec& spec, double r) {
    const int n = spec.n;
    Eigen::LLT<Matrix> llt(spec.L);
    Matrix linv_k = llt.solve(spec.K);
    Matrix linv = llt.solve(Matrix::Identity(n, n));

    StateMatrices sm;
    sm.n = n;
    sm.a_minus = Matrix::Zero(2 * n, 2 * n);
    sm.a_minus.topRightCorner(n, n) = Matrix::Identity(n, n);
    sm.a_minus.bottomLeftCorner(n, n) = -linv_k;
    sm.a_minus.bottomRightCorner(n, n) = -r * linv;
    sm.a_plus = sm.a_minus;
    sm.a_plus.bottomRightCorner(n, n) = r * linv;
    return sm;
}

inline HurwitzVerdict is_hurwitz(const Matrix& m, double tol = 0.0) {
    if (m.rows() != m.cols()) raise(errc::dimension_mismatch, "matrix must be square");
    Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) raise(errc::eigen_failure, "eigenvalue iteration failed");
    double max_re = es.eigenvalues().real().maxCoeff();
    return {max_re < -tol, -max_re};
}

// Generalized symmetric eigenproblem M = L^{-1/2} K L^{-1/2} = O diag(Omega^2) O^T,
// Y = L^{-1/2} O diag(1/sqrt(Omega)). Eigenvector columns inside a degenerate
// cluster (relative gap < 1e-9) are re-orthonormalized by ordered Gram-Schmidt
// and sign-fixed on their largest component, so output is reproducible.
inline NormalModes normal_modes(const CircuitSpec& spec) {
    const int n = spec.n;
    auto [l_sqrt, l_isqrt] = detail::sqrt_and_inv_sqrt(spec.L);
    Matrix m = l_isqrt * spec.K * l_isqrt;
    m = 0.5 * (m + m.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) raise(errc::eigen_failure, "mode eigendecomposition failed");
    Vector w2 = es.eigenvalues();
    Matrix o = es.eigenvectors();

    double scale = std::max(w2.cwiseAbs().maxCoeff(), 1e-300);
    if (w2.minCoeff() <= 1e-12 * scale)
        raise(errc::zero_mode, "K is singular: zero-frequency mode present");

    // Cluster nearly-equal eigenvalues, then Gram-Schmidt within each cluster.
    int start = 0;
    while (start < n) {
        int end = start + 1;
        while (end < n && (w2(end) - w2(end - 1)) < 1e-9 * std::max(w2(end), w2(end - 1))) ++end;
        for (int c = start; c < end; ++c) {
            Vector v = o.col(c);
            for (int p = start; p < c; ++p) v -= o.col(p).dot(v) * o.col(p);
            double nrm = v.norm();
            if (nrm < 1e-12) raise(errc::eigen_failure, "degenerate cluster collapse");
            o.col(c) = v / nrm;
        }
        start = end;
    }
    for (int c = 0; c < n; ++c) {
        int imax = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(o(i, c)) > std::abs(o(imax, c))) imax = i;
        if (o(imax, c) < 0.0) o.col(c) = -o.col(c);
    }

    NormalModes modes;
    modes.omegas.resize(n);
    Matrix y = l_isqrt * o;
    for (int j = 0; j < n; ++j) {
        double omega = std::sqrt(w2(j));
        modes.omegas[j] = omega;
        y.col(j) /= std::sqrt(omega);
    }
    modes.y = std::move(y);

    // [q_j, p_k] = i hbar delta_jk  <=>  Y diag(Omega) Y^T L = I.
    Vector omega_vec = Eigen::Map<const Vector>(modes.omegas.data(), n);
    Matrix ccr = modes.y * omega_vec.asDiagonal() * modes.y.transpose() * spec.L;
    double residual = (ccr - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (residual > 1e-10)
        raise(errc::eigen_failure, "mode commutator reconstruction residual " +
                                       std::to_string(residual));
    return modes;
}

// Residual of the canonical-commutator reconstruction, || Y diag(Omega) Y^T L - I ||.
inline double ccr_residual(const CircuitSpec& spec, const NormalModes& modes) {
    Vector omega = Eigen::Map<const Vector>(modes.omegas.data(),
                                            static_cast<Eigen::Index>(modes.omegas.size()));
    Matrix prod = modes.y * omega.asDiagonal() * modes.y.transpose() * spec.L;
    return (prod - Matrix::Identity(spec.n, spec.n)).cwiseAbs().maxCoeff();
}

}  // namespace qtl::circuit
