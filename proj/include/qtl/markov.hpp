// markov.hpp — Weak-coupling (van Hove) reduction: damping/Lamb-shift
// coefficients, the QSDE generator, the Ito table, and the A-B-C matrices of
// the limit input-state-output system.
//
// kappa follows the Sokhotski-Plemelj split of 1/(w - Omega - i0+):
//   kappa = J(Omega)/2 - (i/2pi) PV \int_0^inf J(w)/(w - Omega) dw.
// The scalar-summary Lamb shift uses the opposite imaginary sign convention
// (see single_mode_summary); real parts agree between the two.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qtl/circuit.hpp"
#include "qtl/spectral.hpp"

namespace qtl::markov {

using circuit::CircuitSpec;
using circuit::NormalModes;
using spectral::SpectralDensity;

namespace detail {

// PV \int_0^inf J(w)/(w - Omega) dw; needs a decaying tail.
inline double pv_spectral(const SpectralDensity& sd, double omega0) {
    using namespace spectral;
    if (std::holds_alternative<Ohmic>(sd))
        raise(errc::divergent_integral, "ohmic PV tail does not decay");

    double upper = support_max(sd);
    auto j = [&](double w) { return eval_J(sd, w); };

    if (std::isfinite(upper)) {
        double lo = 0.0;
        if (const auto* tab = std::get_if<Tabulated>(&sd)) lo = tab->omega.front();
        if (omega0 > lo && omega0 < upper) {
            if (std::min(omega0 - lo, upper - omega0) < 1e-9 * std::max(1.0, upper))
                raise(errc::divergent_integral, "PV point at the support edge");
            return quad::pv_integral(j, lo, upper, omega0, 1e-13, 1e-10).value;
        }
        return quad::integrate<double>([&](double w) { return j(w) / (w - omega0); }, lo, upper,
                                       1e-13, 1e-10)
            .value;
    }

    double split = std::max({4.0 * omega0, 50.0});
    if (const auto* d = std::get_if<Drude>(&sd)) split = std::max(split, 8.0 * d->omega_c);
    double head = quad::pv_integral(j, 0.0, split, omega0, 1e-13, 1e-10).value;
    double tail = quad::integrate_to_inf<double>(
                      [&](double w) { return j(w) / (w - omega0); }, split, 1e-13, 1e-10)
                      .value;
    return head + tail;
}

}  // namespace detail

// kappa_kj for one line at mode frequency Omega_j.
inline Complex kappa_coeff(const SpectralDensity& sd, double omega_j) {
    if (!(omega_j > 0.0)) raise(errc::out_of_domain, "mode frequency must be positive");
    if (spectral::is_identically_zero(sd)) return Complex(0.0, 0.0);
    double re = 0.5 * spectral::eval_J(sd, omega_j);
    double pv = detail::pv_spectral(sd, omega_j);
    return Complex(re, -pv / (2.0 * kPi));
}

// Frequency clusters under the relative comparator
// |Omega_j - Omega_j'| <= freq_tol * max(Omega_j, Omega_j').
inline std::vector<std::vector<int>> frequency_clusters(const std::vector<double>& omegas,
                                                        double freq_tol) {
    std::vector<std::vector<int>> clusters;
    for (int j = 0; j < static_cast<int>(omegas.size()); ++j) {
        bool placed = false;
        for (auto& c : clusters) {
            double rep = omegas[c.front()];
            if (std::abs(omegas[j] - rep) <= freq_tol * std::max(omegas[j], rep)) {
                c.push_back(j);
                placed = true;
                break;
            }
        }
        if (!placed) clusters.push_back({j});
    }
    return clusters;
}

inline bool same_frequency(double a, double b, double freq_tol) {
    return std::abs(a - b) <= freq_tol * std::max(a, b);
}

// Generator matrix over modes:
//   K_{jj'} = -sum_k delta_{Omega_j, Omega_j'} Y_kj Y^*_kj' kappa_k(Omega_j),
// whose Hermitian part is the negative Ito-weighted mode Gram matrix.
inline ComplexMatrix build_generator(const NormalModes& modes, const CircuitSpec& spec,
                                     double freq_tol = 1e-9) {
    const int m = static_cast<int>(modes.omegas.size());
    ComplexMatrix gen = ComplexMatrix::Zero(m, m);
    std::vector<std::vector<Complex>> kappa(spec.n, std::vector<Complex>(m));
    for (int k = 0; k < spec.n; ++k)
        for (int j = 0; j < m; ++j) kappa[k][j] = kappa_coeff(spec.lines[k], modes.omegas[j]);

    for (int j = 0; j < m; ++j) {
        for (int jp = 0; jp < m; ++jp) {
            if (!same_frequency(modes.omegas[j], modes.omegas[jp], freq_tol)) continue;
            Complex acc(0.0, 0.0);
            for (int k = 0; k < spec.n; ++k)
                acc += modes.y(k, j) * modes.y(k, jp) * kappa[k][j];
            gen(j, jp) -= acc;
        }
    }
    return gen;
}

// One Markov channel per (line, distinct mode frequency), with Ito weight
// dB dB* = J_k(Omega) dt.
struct Channel {
    int line = 0;
    double omega = 0.0;
    double ito_weight = 0.0;
};

struct AbcSystem {
    ComplexMatrix a_mat;  // modes x modes
    ComplexMatrix b_mat;  // modes x channels
    ComplexMatrix c_mat;  // channels x modes
    std::vector<Channel> channels;
};

// da = A a dt + B dB, dB_out = C a dt + dB:
//   A_{jj'} = -sum_k delta kappa_kj Y^*_kj Y_kj',  B_{j,(k,W)} = -Y^*_kj delta_{Omega_j,W},
//   C_{(k,W),j} = delta_{Omega_j,W} Y_kj.
inline AbcSystem build_abc(const NormalModes& modes, const CircuitSpec& spec,
                           double freq_tol = 1e-9) {
    const int m = static_cast<int>(modes.omegas.size());
    AbcSystem sys;

    auto clusters = frequency_clusters(modes.omegas, freq_tol);
    for (int k = 0; k < spec.n; ++k) {
        for (const auto& c : clusters) {
            double rep = modes.omegas[c.front()];
            sys.channels.push_back({k, rep, spectral::eval_J(spec.lines[k], rep)});
        }
    }
    const int nch = static_cast<int>(sys.channels.size());

    std::vector<std::vector<Complex>> kappa(spec.n, std::vector<Complex>(m));
    for (int k = 0; k < spec.n; ++k)
        for (int j = 0; j < m; ++j) kappa[k][j] = kappa_coeff(spec.lines[k], modes.omegas[j]);

    sys.a_mat = ComplexMatrix::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        for (int jp = 0; jp < m; ++jp) {
            if (!same_frequency(modes.omegas[j], modes.omegas[jp], freq_tol)) continue;
            Complex acc(0.0, 0.0);
            for (int k = 0; k < spec.n; ++k)
                acc += kappa[k][j] * modes.y(k, j) * modes.y(k, jp);
            sys.a_mat(j, jp) -= acc;
        }
    }

    sys.b_mat = ComplexMatrix::Zero(m, nch);
    sys.c_mat = ComplexMatrix::Zero(nch, m);
    for (int ch = 0; ch < nch; ++ch) {
        const auto& channel = sys.channels[ch];
        for (int j = 0; j < m; ++j) {
            if (!same_frequency(modes.omegas[j], channel.omega, freq_tol)) continue;
            sys.b_mat(j, ch) = -modes.y(channel.line, j);
            sys.c_mat(ch, j) = modes.y(channel.line, j);
        }
    }
    return sys;
}

// Quadratic-variation weights: diagonal J_k(Omega), all cross terms zero.
struct ItoTable {
    std::vector<Channel> channels;

    double weight(int i, int j) const {
        if (i == j) return channels[static_cast<std::size_t>(i)].ito_weight;
        return 0.0;
    }
};

inline ItoTable ito_table(std::vector<Channel> channels) { return {std::move(channels)}; }

struct SingleModeSummary {
    double omega = 0.0;
    double gamma = 0.0;
    double epsilon = 0.0;
};

// Scalar LC terminal with one line: Omega = 1/sqrt(lc), coupling weight
// |Y|^2 = 1/Z0 = sqrt(c/l) from the mode normalization, so
//   gamma = J(Omega) |Y|^2  (= R/l with R = J(Omega)/Omega),
//   epsilon = |Y|^2 (1/2pi) PV \int J(w)/(w - Omega) dw.
inline SingleModeSummary single_mode_summary(double l, double c, const SpectralDensity& sd) {
    if (!(l > 0.0) || !(c > 0.0)) raise(errc::out_of_domain, "need l, c > 0");
    SingleModeSummary s;
    s.omega = 1.0 / std::sqrt(l * c);
    if (spectral::is_identically_zero(sd)) return s;
    double y2 = std::sqrt(c / l);
    s.gamma = spectral::eval_J(sd, s.omega) * y2;
    s.epsilon = y2 * detail::pv_spectral(sd, s.omega) / (2.0 * kPi);
    return s;
}

// Full reduction bundle emitted by the CLI.
struct MarkovModel {
    std::vector<double> omegas;
    Matrix y;
    std::vector<Channel> channels;
    ComplexMatrix kappa;      // lines x modes
    ComplexMatrix generator;  // modes x modes
    ComplexMatrix a_mat, b_mat, c_mat;
    std::vector<double> gammas;    // per mode: -(A + A^*)_jj
    std::vector<double> epsilons;  // per mode: Im A_jj (scalar-summary sign)
};

inline MarkovModel build_markov(const CircuitSpec& spec, double freq_tol = 1e-9) {
    MarkovModel model;
    auto modes = circuit::normal_modes(spec);
    model.omegas = modes.omegas;
    model.y = modes.y;

    const int m = static_cast<int>(modes.omegas.size());
    model.kappa.resize(spec.n, m);
    for (int k = 0; k < spec.n; ++k)
        for (int j = 0; j < m; ++j)
            model.kappa(k, j) = kappa_coeff(spec.lines[k], modes.omegas[j]);

    model.generator = build_generator(modes, spec, freq_tol);
    auto sys = build_abc(modes, spec, freq_tol);
    model.a_mat = std::move(sys.a_mat);
    model.b_mat = std::move(sys.b_mat);
    model.c_mat = std::move(sys.c_mat);
    model.channels = std::move(sys.channels);

    model.gammas.resize(m);
    model.epsilons.resize(m);
    for (int j = 0; j < m; ++j) {
        model.gammas[j] = -2.0 * model.a_mat(j, j).real();
        model.epsilons[j] = model.a_mat(j, j).imag();
    }
    return model;
}

}  // namespace qtl::markov
