// commutators.hpp — Input/output field commutator kernel g_jk(tau).
//
// The raw in/out commutator of the charge fields contains a conserved
// zero-mode constant sigma_j(inf) = -1/(4 J_j'(0+)) that survives at infinite
// separation; causality is the statement that the kernel is *flat* at that
// offset on one side. This op returns the offset-subtracted kernel
//
//   g_jk(tau) = I_jk(-tau) - delta_jk / (4 J_j'(0+)),
//   I_jk(x)   = -(1/2pi) \int_0^inf Im{ e^{-i w x} G_kj(w) } / sqrt(J_j J_k) dw,
//
// which vanishes for tau > 0 (ohmic and Drude lines), equals the sigma boundary
// value -1/(4 J'(0)) delta_jk at tau = 0, and decays like the circuit impulse
// response for tau < 0.

#pragma once

#include <cmath>

#include "qtl/freq_response.hpp"

namespace qtl::spectral {

inline Matrix inout_commutator_g(const circuit::CircuitSpec& spec, double tau,
                                 const quad::AbelOptions& opts = {}) {
    const int n = spec.n;

    // Common support and IR slopes; interior zeros of J make 1/sqrt(J) blow up.
    double upper = std::numeric_limits<double>::infinity();
    std::vector<double> slope(n);
    for (int k = 0; k < n; ++k) {
        if (is_identically_zero(spec.lines[k]))
            raise(errc::divergent_integral, "line " + std::to_string(k) + " has vanishing J");
        upper = std::min(upper, support_max(spec.lines[k]));
        slope[k] = zero_frequency_slope(spec.lines[k]);
        if (const auto* tab = std::get_if<Tabulated>(&spec.lines[k])) {
            for (std::size_t i = 1; i + 1 < tab->value.size(); ++i)
                if (tab->value[i] == 0.0)
                    raise(errc::divergent_integral, "1/sqrt(J) pole inside the support");
        }
    }

    const double x = -tau;
    // Cache G(w) per quadrature node; all matrix entries share evaluations.
    auto integrand_matrix = [&](double w) -> Matrix {
        ComplexMatrix g = freq::scattering_G(spec, w);
        Matrix out(n, n);
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                double jj = eval_J(spec.lines[j], w);
                double jk = eval_J(spec.lines[k], w);
                if (jj <= 0.0 || jk <= 0.0)
                    raise(errc::divergent_integral, "1/sqrt(J) pole inside the support");
                Complex phase = std::polar(1.0, -w * x);
                out(j, k) = -(phase * g(k, j)).imag() / std::sqrt(jj * jk) / (2.0 * kPi);
            }
        }
        return out;
    };

    Matrix result = Matrix::Zero(n, n);
    if (std::isfinite(upper)) {
        auto entry = [&](int j, int k) {
            return quad::integrate<double>(
                       [&](double w) { return integrand_matrix(w)(j, k); },
                       std::numeric_limits<double>::min(), upper * (1.0 - 1e-12), 1e-12, 1e-9)
                .value;
        };
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) result(j, k) = entry(j, k);
    } else {
        // Split after the resonances; Abel-regularize the oscillatory tail.
        double omega_scale = 1.0;
        {
            Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(spec.K, spec.L);
            if (es.info() == Eigen::Success)
                omega_scale = std::sqrt(std::max(1e-12, es.eigenvalues().maxCoeff()));
        }
        double split = std::max({20.0, 8.0 * omega_scale, 4.0 * kPi / std::max(std::abs(x), 0.2)});
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                auto head = quad::integrate<double>(
                    [&](double w) { return integrand_matrix(w)(j, k); },
                    std::numeric_limits<double>::min(), split, 1e-12, 1e-9);
                double tail;
                if (std::abs(x) < 1e-6) {
                    // Non-oscillatory tail, decays absolutely like 1/w^2.
                    tail = quad::integrate_to_inf<double>(
                               [&](double w) { return integrand_matrix(w)(j, k); }, split,
                               1e-12, 1e-9)
                               .value;
                } else {
                    tail = quad::abel_tail([&](double w) { return integrand_matrix(w)(j, k); },
                                           split, std::abs(x), opts)
                               .value;
                }
                result(j, k) = head.value + tail;
            }
        }
    }

    // Remove the conserved zero-mode offset carried by the 1/J pole at w -> 0.
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(slope[j]) && slope[j] > 0.0) result(j, j) -= 1.0 / (4.0 * slope[j]);
    }
    return result;
}

}  // namespace qtl::spectral
