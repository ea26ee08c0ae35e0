// spectral.hpp — Memory kernel Gamma(t), renormalization constant, frequency
// dependent resistance R(omega) from the dispersion relation, input-field
// commutator kernel sigma, and thermal force correlations.
//
// Conventions (documented in the README):
//   Gamma(t)   = (2/pi) \int_0^inf (J(w)/w) cos(wt) dw * theta(t), theta(0) = 1.
//   Pure ohmic J = r w is memoryless: Gamma = 2 r delta(t) theta(t), so the
//   smooth kernel part is 0, LGamma[s] = r, and convolutions see r * qdot(t).
//   K_line     = (2/pi) \int_0^inf J(w)/w dw = Gamma(0+).

#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include "qtl/quadrature.hpp"
#include "qtl/spectral_density.hpp"

namespace qtl::spectral {

// Renormalization constant K = (2/pi) \int J/w dw; diverges for pure ohmic.
inline double renormalization_K(const SpectralDensity& sd) {
    if (std::holds_alternative<Ohmic>(sd))
        raise(errc::divergent_integral, "ohmic J/omega is not integrable at infinity");
    if (const auto* d = std::get_if<Drude>(&sd)) return d->r * d->omega_c;
    if (const auto* d = std::get_if<CutoffOhmic>(&sd)) return (2.0 / kPi) * d->r * d->omega_c;

    const auto& tab = std::get<Tabulated>(sd);
    if (tab.omega.front() == 0.0 && tab.value.front() > 0.0)
        raise(errc::divergent_integral, "tabulated J(0) > 0 makes J/omega non-integrable");
    double lo = tab.omega.front();
    if (lo == 0.0) lo = std::numeric_limits<double>::min();
    auto r = quad::integrate<double>(
        [&](double w) { return eval_J(sd, w) / w; }, lo, tab.omega.back(), 1e-14, 1e-10);
    return (2.0 / kPi) * r.value;
}

// Smooth part of the memory kernel at t >= 0. The ohmic delta atom is carried
// separately (see ohmic_delta_weight); this function returns 0 for ohmic lines.
inline double memory_kernel(const SpectralDensity& sd, double t,
                            double* error_estimate = nullptr) {
    if (t < 0.0) raise(errc::out_of_domain, "memory kernel defined for t >= 0");
    if (error_estimate) *error_estimate = 0.0;
    if (std::holds_alternative<Ohmic>(sd)) return 0.0;
    if (const auto* d = std::get_if<Drude>(&sd)) return d->r * d->omega_c * std::exp(-d->omega_c * t);
    if (const auto* d = std::get_if<CutoffOhmic>(&sd)) {
        if (t == 0.0) return (2.0 / kPi) * d->r * d->omega_c;
        return (2.0 / kPi) * d->r * std::sin(d->omega_c * t) / t;
    }

    const auto& tab = std::get<Tabulated>(sd);
    if (tab.omega.front() == 0.0 && tab.value.front() > 0.0)
        raise(errc::divergent_integral, "tabulated J(0) > 0 makes J/omega non-integrable");
    double lo = tab.omega.front();
    if (lo == 0.0) lo = std::numeric_limits<double>::min();
    auto r = quad::integrate<double>(
        [&](double w) { return eval_J(sd, w) / w * std::cos(w * t); }, lo, tab.omega.back(),
        1e-14, 1e-10);
    if (error_estimate) *error_estimate = r.error * (2.0 / kPi);
    return (2.0 / kPi) * r.value;
}

// Weight of the 2 r delta(t) atom present only for pure ohmic lines.
inline double ohmic_delta_weight(const SpectralDensity& sd) {
    if (const auto* d = std::get_if<Ohmic>(&sd)) return d->r;
    return 0.0;
}

// Kernel samples on a uniform t-grid, with per-sample quadrature error estimates.
struct KernelSamples {
    std::vector<double> t;
    std::vector<std::vector<double>> values;  // [line][sample]
    std::vector<std::vector<double>> errors;
};

inline KernelSamples kernel_samples(const std::vector<SpectralDensity>& lines, double dt,
                                    double t_max) {
    if (!(dt > 0.0) || !(t_max >= 0.0)) raise(errc::out_of_domain, "need dt > 0, t_max >= 0");
    KernelSamples ks;
    for (double t = 0.0; t <= t_max + 0.5 * dt; t += dt) ks.t.push_back(t);
    ks.values.resize(lines.size());
    ks.errors.resize(lines.size());
    for (std::size_t k = 0; k < lines.size(); ++k) {
        ks.values[k].resize(ks.t.size());
        ks.errors[k].resize(ks.t.size());
        for (std::size_t i = 0; i < ks.t.size(); ++i)
            ks.values[k][i] = memory_kernel(lines[k], ks.t[i], &ks.errors[k][i]);
    }
    return ks;
}

// Laplace transform of the memory kernel, Re s > 0.
inline Complex laplace_gamma(const SpectralDensity& sd, Complex s) {
    if (!(s.real() > 0.0)) raise(errc::out_of_domain, "LGamma needs Re s > 0");
    return std::visit(
        [&](const auto& d) -> Complex {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Ohmic>) {
                return Complex(d.r, 0.0);
            } else if constexpr (std::is_same_v<T, Drude>) {
                return d.r * d.omega_c / (s + d.omega_c);
            } else if constexpr (std::is_same_v<T, CutoffOhmic>) {
                return (2.0 * d.r / kPi) * std::atan(d.omega_c / s);
            } else {
                // LGamma[s] = (2/pi) \int (J/w) s/(s^2 + w^2) dw over the support.
                double lo = d.omega.front();
                if (lo == 0.0) {
                    if (d.value.front() > 0.0)
                        raise(errc::divergent_integral, "tabulated J(0) > 0");
                    lo = std::numeric_limits<double>::min();
                }
                auto r = quad::integrate<Complex>(
                    [&](double w) -> Complex {
                        return eval_J(sd, w) / w * (s / (s * s + w * w));
                    },
                    lo, d.omega.back(), 1e-14, 1e-10);
                return (2.0 / kPi) * r.value;
            }
        },
        sd);
}

namespace detail {

// PV \int_R J_odd(w')/(omega - w') dw' with J odd-extended; the reflected branch
// \int_0^inf J(w')/(omega + w') dw' carries no singularity for omega > 0.
inline double pv_hilbert_odd(const SpectralDensity& sd, double omega) {
    const double upper = support_max(sd);
    auto j = [&](double w) { return eval_J(sd, w); };

    // pv_integral computes PV \int J/(w' - omega); the dispersion kernel is
    // 1/(omega - w'), hence the sign flips.
    double direct;
    if (std::isfinite(upper)) {
        double b = std::max(upper, omega * (1.0 + 1e-6)) * (1.0 + 1e-9) + 1e-12;
        direct = -quad::pv_integral(j, 0.0, b, omega, 1e-13, 1e-10).value;
    } else {
        double b = std::max(8.0 * omega, 50.0);
        direct = -quad::pv_integral(j, 0.0, b, omega, 1e-13, 1e-10).value;
        auto tail = quad::integrate_to_inf<double>(
            [&](double w) { return j(w) / (omega - w); }, b, 1e-13, 1e-10);
        direct += tail.value;
    }

    double reflected;
    if (std::isfinite(upper)) {
        reflected = quad::integrate<double>([&](double w) { return j(w) / (omega + w); }, 0.0,
                                            upper, 1e-13, 1e-10)
                        .value;
    } else {
        double b = std::max(8.0 * omega, 50.0);
        reflected = quad::integrate<double>([&](double w) { return j(w) / (omega + w); }, 0.0, b,
                                            1e-13, 1e-10)
                        .value;
        reflected += quad::integrate_to_inf<double>(
                         [&](double w) { return j(w) / (omega + w); }, b, 1e-13, 1e-10)
                         .value;
    }
    return direct - reflected;
}

}  // namespace detail

// Frequency-dependent resistance R(omega) = LGamma[0+ - i omega].
//   Re R = J(omega)/omega;  omega Im R = K_line + (1/pi) PV \int J_odd/(omega - w') dw'.
// The subtraction constant K_line = Gamma(0+) makes the dispersion relation match
// the closed forms (Drude: R = r wc/(wc - i w)); R(-omega) = conj R(omega).
inline Complex resistance_R(const SpectralDensity& sd, double omega) {
    if (omega < 0.0) return std::conj(resistance_R(sd, -omega));

    if (const auto* d = std::get_if<Ohmic>(&sd)) return Complex(d->r, 0.0);
    if (const auto* d = std::get_if<Drude>(&sd))
        return d->r * d->omega_c / Complex(d->omega_c, -omega);
    if (const auto* d = std::get_if<CutoffOhmic>(&sd)) {
        if (omega == 0.0) return Complex(d->r, 0.0);
        if (std::abs(omega - d->omega_c) < 1e-12 * d->omega_c)
            raise(errc::divergent_integral, "Im R log-diverges at the cutoff edge");
        double re = omega <= d->omega_c ? d->r : 0.0;
        double im = (d->r / kPi) * std::log((omega + d->omega_c) / std::abs(omega - d->omega_c));
        return Complex(re, im);
    }

    const auto& tab = std::get<Tabulated>(sd);
    if (is_identically_zero(sd)) return Complex(0.0, 0.0);
    double k_line = renormalization_K(sd);
    if (omega == 0.0)
        raise(errc::singular_at_zero, "tabulated R(omega) has no limit at omega = 0");
    if (omega >= tab.omega.back() * (1.0 - 1e-12) && omega <= tab.omega.back() * (1.0 + 1e-12))
        raise(errc::divergent_integral, "R(omega) evaluated at the tabulated support edge");
    double re = eval_J(sd, omega) / omega;
    double im = (k_line + detail::pv_hilbert_odd(sd, omega) / kPi) / omega;
    return Complex(re, im);
}

// sigma(tau) = -(1/2pi) \int sin(w tau)/J(w) dw over the support of J; odd in tau.
// The oscillatory tail is Abel-regularized and Richardson-extrapolated.
inline double commutator_sigma(const SpectralDensity& sd, double tau,
                               const quad::AbelOptions& opts = {}) {
    if (tau == 0.0) return 0.0;
    if (is_identically_zero(sd))
        raise(errc::divergent_integral, "sigma undefined for vanishing J");

    const double upper = support_max(sd);
    auto inv_j_sin = [&](double w) {
        double j = eval_J(sd, w);
        if (j <= 0.0) raise(errc::divergent_integral, "1/J pole inside the support");
        return std::sin(w * tau) / j;
    };

    double value;
    if (std::isfinite(upper)) {
        const auto* tab = std::get_if<Tabulated>(&sd);
        double lo = tab ? tab->omega.front() : 0.0;
        if (lo == 0.0) lo = std::numeric_limits<double>::min();
        value = quad::integrate<double>(inv_j_sin, lo, upper * (1.0 - 1e-14), 1e-13, 1e-10).value;
    } else {
        double split = std::max(20.0, 6.0 * kPi / std::abs(tau));
        auto head = quad::integrate<double>(inv_j_sin, std::numeric_limits<double>::min(), split,
                                            1e-13, 1e-10);
        auto tail = quad::abel_tail(inv_j_sin, split, std::abs(tau), opts);
        value = head.value + tail.value;
    }
    return -value / (2.0 * kPi);
}

struct ForceCorrelation {
    Complex ordered;      // <F(t) F(t')>, tau = t - t'
    double symmetrized;   // (1/2) <F F' + F' F>
};

// Thermal force correlation for one line at inverse temperature beta (may be
// +inf for vacuum):
//   <F(t)F(t')> = (hbar/pi) \int J(w) [ e^{-i w tau}(n(w)+1) + e^{i w tau} n(w) ] dw,
//   symmetrized = (hbar/pi) \int J(w) coth(beta hbar w / 2) cos(w tau) dw.
inline ForceCorrelation force_correlation(const SpectralDensity& sd, double beta, double tau,
                                          double hbar = 1.0,
                                          const quad::AbelOptions& opts = {}) {
    if (!(beta > 0.0)) raise(errc::out_of_domain, "beta must be positive (or +inf)");
    if (is_identically_zero(sd)) return {Complex(0.0, 0.0), 0.0};

    auto bose_n = [&](double w) -> double {
        if (std::isinf(beta)) return 0.0;
        double x = beta * hbar * w;
        if (x > 700.0) return 0.0;
        return 1.0 / std::expm1(x);
    };
    auto ordered_f = [&](double w) -> Complex {
        double j = eval_J(sd, w);
        double n = bose_n(w);
        Complex e = std::polar(1.0, -w * tau);
        return j * (e * (n + 1.0) + std::conj(e) * n);
    };

    const double upper = support_max(sd);
    Complex ordered;
    if (std::isfinite(upper)) {
        ordered = quad::integrate<Complex>(ordered_f, std::numeric_limits<double>::min(), upper,
                                           1e-13, 1e-10)
                      .value;
    } else {
        if (tau == 0.0)
            raise(errc::divergent_integral,
                  "force correlation at tau = 0 needs a UV cutoff for this density");
        double split = std::max(20.0, 6.0 * kPi / std::abs(tau));
        // Thermal occupation decays exponentially; only the vacuum part needs the
        // oscillatory tail treatment.
        ordered = quad::integrate<Complex>(ordered_f, std::numeric_limits<double>::min(), split,
                                           1e-13, 1e-10)
                      .value;
        auto tail_re = quad::abel_tail(
            [&](double w) { return eval_J(sd, w) * std::cos(w * tau); }, split, std::abs(tau),
            opts);
        auto tail_im = quad::abel_tail(
            [&](double w) { return -eval_J(sd, w) * std::sin(w * tau); }, split, std::abs(tau),
            opts);
        if (!std::isinf(beta)) {
            auto tail_thermal = quad::integrate_to_inf<double>(
                [&](double w) {
                    return 2.0 * eval_J(sd, w) * bose_n(w) * std::cos(w * tau);
                },
                split, 1e-13, 1e-10);
            tail_re.value += tail_thermal.value;
        }
        ordered += Complex(tail_re.value, tail_im.value);
    }
    ordered *= hbar / kPi;

    // Symmetrized part = Re of the ordered correlation by construction.
    return {ordered, ordered.real()};
}

}  // namespace qtl::spectral
