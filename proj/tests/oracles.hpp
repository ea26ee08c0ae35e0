// oracles.hpp — Test-side reference implementations, kept independent of the
// library's quadrature and transfer-function code paths. Romberg integration,
// a two-eta Abel extrapolation, damped-oscillator closed forms, and a seeded
// random-spec generator.

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qtl/circuit.hpp"
#include "qtl/spectral_density.hpp"

namespace oracle {

// Romberg on [a, b]; structurally unlike the library's Gauss-Kronrod rule.
inline double romberg(const std::function<double(double)>& f, double a, double b,
                      int max_level = 20, double tol = 1e-12) {
    std::vector<std::vector<double>> r(1);
    double h = b - a;
    r[0].push_back(0.5 * h * (f(a) + f(b)));
    for (int k = 1; k < max_level; ++k) {
        h *= 0.5;
        double sum = 0.0;
        long pts = 1L << (k - 1);
        for (long i = 0; i < pts; ++i) sum += f(a + (2 * i + 1) * h);
        r.emplace_back();
        r[k].push_back(0.5 * r[k - 1][0] + h * sum);
        for (int j = 1; j <= k; ++j) {
            double factor = std::pow(4.0, j);
            r[k].push_back((factor * r[k][j - 1] - r[k - 1][j - 1]) / (factor - 1.0));
        }
        if (k > 3 && std::abs(r[k][k] - r[k - 1][k - 1]) < tol * (1.0 + std::abs(r[k][k])))
            return r[k][k];
    }
    return r.back().back();
}

// Abel-regularized improper integral with a fixed two-eta Richardson step:
// I ~ 2 I(eta/2) - I(eta). Dense Romberg panels up to the damping horizon.
inline double abel_two_eta(const std::function<double(double)>& f, double a, double eta) {
    auto damped = [&](double e) {
        double horizon = a + 40.0 / e;
        double total = 0.0;
        double lo = a;
        double step = std::min(5.0, (horizon - a) / 64.0);
        while (lo < horizon) {
            double hi = std::min(horizon, lo + step);
            total += romberg([&](double x) { return f(x) * std::exp(-e * (x - a)); }, lo, hi,
                             18, 1e-12);
            lo = hi;
        }
        return total;
    };
    double i1 = damped(eta);
    double i2 = damped(0.5 * eta);
    return 2.0 * i2 - i1;
}

// Impulse response of L qddot + R qdot + K q = delta(t) for the scalar
// underdamped circuit: h(t) = theta(t) e^{-gamma t/2} sin(nu t)/(L nu),
// gamma = R/L, nu = sqrt(K/L - gamma^2/4).
inline double scalar_impulse_response(double l, double k, double r, double t) {
    if (t < 0.0) return 0.0;
    double gamma = r / l;
    double nu2 = k / l - 0.25 * gamma * gamma;
    double nu = std::sqrt(nu2);
    return std::exp(-0.5 * gamma * t) * std::sin(nu * t) / (l * nu);
}

// Free decay of the scalar unit circuit (L = K = R = 1) from q(0)=1, qdot(0)=0.
inline double unit_circuit_free_decay(double t) {
    double nu = std::sqrt(3.0) / 2.0;
    return std::exp(-0.5 * t) * (std::cos(nu * t) + std::sin(nu * t) / std::sqrt(3.0));
}

// Random SPD matrix with eigenvalues in [lo, hi].
inline qtl::Matrix random_spd(std::mt19937_64& rng, int n, double lo, double hi) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    qtl::Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
    Eigen::HouseholderQR<qtl::Matrix> qr(a);
    qtl::Matrix q = qr.householderQ();
    std::uniform_real_distribution<double> ev(lo, hi);
    qtl::Vector d(n);
    for (int i = 0; i < n; ++i) d(i) = ev(rng);
    return q * d.asDiagonal() * q.transpose();
}

// Random valid spec; all lines share one density so the charge-basis scattering
// stays unitary (heterogeneous lines only conserve the J-weighted flux).
inline qtl::circuit::CircuitSpec random_spec(std::mt19937_64& rng, int n, bool drude_lines) {
    using namespace qtl;
    circuit::CircuitSpec spec;
    spec.n = n;
    spec.L = random_spd(rng, n, 0.5, 2.0);
    spec.K = random_spd(rng, n, 0.4, 3.0);
    std::uniform_real_distribution<double> rr(0.3, 2.5), wc(0.5, 4.0);
    spectral::SpectralDensity sd;
    if (drude_lines)
        sd = spectral::Drude{rr(rng), wc(rng)};
    else
        sd = spectral::Ohmic{rr(rng)};
    spec.lines.assign(n, sd);
    return circuit::validate_spec(spec);
}

}  // namespace oracle
