#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qtl/freq_response.hpp"
#include "oracles.hpp"

using namespace qtl;
using namespace qtl::freq;
using Catch::Approx;

namespace {

circuit::CircuitSpec scalar_spec(double l, double k, spectral::SpectralDensity sd) {
    circuit::CircuitSpec s;
    s.n = 1;
    s.L = Matrix::Constant(1, 1, l);
    s.K = Matrix::Constant(1, 1, k);
    s.lines = {std::move(sd)};
    return circuit::validate_spec(s);
}

const auto unit_ohmic = scalar_spec(1.0, 1.0, spectral::Ohmic{1.0});

}  // namespace

TEST_CASE("chi_laplace scalar values") {
    double cond = 0.0;
    auto chi = chi_laplace(unit_ohmic, Complex(1.0, 0.0), &cond);
    CHECK(chi(0, 0).real() == Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(std::abs(chi(0, 0).imag()) < 1e-15);
    CHECK(cond >= 1.0);

    CHECK_THROWS_MATCHES(chi_laplace(unit_ohmic, Complex(-0.1, 1.0)), error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("OutOfDomain")));

    // Gamma == 0: chi = (s^2 + 1)^{-1} at s = 1 -> 1/2.
    auto lossless = scalar_spec(1.0, 1.0, spectral::Tabulated{{0.0, 1.0}, {0.0, 0.0}});
    CHECK(chi_laplace(lossless, Complex(1.0, 0.0))(0, 0).real() == Approx(0.5).epsilon(1e-14));
}

TEST_CASE("susceptibility boundary values") {
    // Scalar unit circuit at omega = 1: alpha = 1/(0 - i) = i.
    auto a = susceptibility(unit_ohmic, 1.0);
    CHECK(a(0, 0).real() == Approx(0.0).margin(1e-14));
    CHECK(a(0, 0).imag() == Approx(1.0).epsilon(1e-14));

    // Static limit: K^{-1}.
    std::mt19937_64 rng(5);
    auto spec = oracle::random_spec(rng, 3, true);
    Matrix kinv = spec.K.llt().solve(Matrix::Identity(3, 3));
    CHECK((susceptibility(spec, 0.0).real() - kinv).cwiseAbs().maxCoeff() < 1e-12);

    // Drude line: alpha(1) = 1/(-i R(1)) with R(1) = (1+i)/2, and it agrees with
    // chi_laplace at s = eps - i.
    auto drude = scalar_spec(1.0, 1.0, spectral::Drude{1.0, 1.0});
    auto ad = susceptibility(drude, 1.0);
    Complex expected = 1.0 / (Complex(0.0, -1.0) * Complex(0.5, 0.5));
    CHECK(std::abs(ad(0, 0) - expected) < 1e-12);
    auto chi_near = chi_laplace(drude, Complex(1e-9, -1.0));
    CHECK(std::abs(ad(0, 0) - chi_near(0, 0)) < 1e-7);

    // Lossless resonance: J = 0 at the mode frequency makes the matrix singular.
    auto lossless = scalar_spec(1.0, 1.0, spectral::Tabulated{{0.0, 1.0}, {0.0, 0.0}});
    CHECK_THROWS_MATCHES(susceptibility(lossless, 1.0), error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("SingularMatrix")));
}

TEST_CASE("scattering_S closed forms") {
    // Gamma == 0 -> S = I.
    auto lossless = scalar_spec(1.0, 1.0, spectral::Tabulated{{0.0, 1.0}, {0.0, 0.0}});
    for (Complex s : {Complex(1.0, 0.0), Complex(0.5, 2.0), Complex(3.0, -1.0)}) {
        CHECK(std::abs(scattering_S(lossless, s)(0, 0) - 1.0) < 1e-14);
    }

    // Scalar unit ohmic: S[s] = (s^2 - s + 1)/(s^2 + s + 1); S[1] = 1/3.
    CHECK(scattering_S(unit_ohmic, Complex(1.0, 0.0))(0, 0).real() ==
          Approx(1.0 / 3.0).epsilon(1e-14));
    Complex s(0.7, 1.3);
    Complex expected = (s * s - s + 1.0) / (s * s + s + 1.0);
    CHECK(std::abs(scattering_S(unit_ohmic, s)(0, 0) - expected) < 1e-14);

    CHECK_THROWS_AS(scattering_S(unit_ohmic, Complex(0.0, 1.0)), error);
}

TEST_CASE("scattering_G values and unitarity") {
    // R == 0 -> G = -I away from resonances.
    auto lossless = scalar_spec(1.0, 1.0, spectral::Tabulated{{0.0, 1.0}, {0.0, 0.0}});
    CHECK(std::abs(scattering_G(lossless, 0.5)(0, 0) + 1.0) < 1e-12);

    // Scalar unit ohmic at omega = 1 -> G = 1.
    CHECK(std::abs(scattering_G(unit_ohmic, 1.0)(0, 0) - 1.0) < 1e-12);

    // Boundary unitarity across random common-line specs.
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 6; ++trial) {
        auto spec = oracle::random_spec(rng, 1 + static_cast<int>(rng() % 4), trial % 2 == 1);
        for (int i = 0; i < 25; ++i) {
            double w = 0.05 + 0.4 * i;
            ComplexMatrix g = scattering_G(spec, w);
            ComplexMatrix defect =
                g.adjoint() * g - ComplexMatrix::Identity(spec.n, spec.n);
            CHECK(defect.cwiseAbs().maxCoeff() < 1e-10);
        }
    }
}

TEST_CASE("heterogeneous lines conserve the Re R(w)-weighted flux") {
    // With distinct line densities the charge-basis G is not unitary, but
    // G^* X G = X holds exactly for X = (Re R(w))^{-1} in the adopted
    // numerator-times-inverse-denominator orientation.
    circuit::CircuitSpec s;
    s.n = 2;
    s.L.resize(2, 2);
    s.L << 1.0, 0.2, 0.2, 1.5;
    s.K.resize(2, 2);
    s.K << 2.0, 0.7, 0.7, 1.2;
    s.lines = {spectral::SpectralDensity(spectral::Ohmic{0.5}),
               spectral::SpectralDensity(spectral::Drude{1.5, 2.0})};
    auto spec = circuit::validate_spec(s);

    for (double w : {0.3, 0.9, 1.7, 4.2}) {
        ComplexMatrix g = scattering_G(spec, w);
        ComplexMatrix x = ComplexMatrix::Zero(2, 2);
        for (int k = 0; k < 2; ++k)
            x(k, k) = 1.0 / spectral::resistance_R(spec.lines[k], w).real();
        ComplexMatrix defect = g.adjoint() * x * g - x;
        CHECK(defect.cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("G matches -S on the boundary for ohmic specs, and G(-w) = conj G(w)") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 4; ++trial) {
        auto spec = oracle::random_spec(rng, 2, false);
        auto transfer = make_scattering_transfer(spec);
        for (double w : {0.2, 0.8, 1.9, 3.5}) {
            ComplexMatrix g = scattering_G(spec, w);
            ComplexMatrix s_boundary = transfer.evaluator(Complex(0.0, -w));
            CHECK((g + s_boundary).cwiseAbs().maxCoeff() < 1e-11);
            ComplexMatrix g_neg = scattering_G(spec, -w);
            CHECK((g_neg - g.conjugate()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("cayley_sigma agrees with the Cayley transform of S") {
    // Scalar unit ohmic: Sigma[s] = s/(s^2+1).
    Complex sig = cayley_sigma(unit_ohmic, Complex(1.0, 0.0))(0, 0);
    CHECK(sig.real() == Approx(0.5).epsilon(1e-14));

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> re(0.1, 3.0), im(-3.0, 3.0);
    for (int trial = 0; trial < 4; ++trial) {
        auto spec = oracle::random_spec(rng, 2, trial % 2 == 0);
        for (int i = 0; i < 10; ++i) {
            Complex s(re(rng), im(rng));
            ComplexMatrix sigma = cayley_sigma(spec, s);
            ComplexMatrix via_cayley = cayley_map(scattering_S(spec, s));
            CHECK((sigma - via_cayley).cwiseAbs().maxCoeff() < 1e-10);
        }
    }

    // Gamma == 0 -> Sigma == 0.
    auto lossless = scalar_spec(1.0, 1.0, spectral::Tabulated{{0.0, 1.0}, {0.0, 0.0}});
    CHECK(std::abs(cayley_sigma(lossless, Complex(0.5, 0.7))(0, 0)) < 1e-14);

    // Boundary value for ohmic is purely imaginary (lossless immittance).
    auto transfer = make_cayley_transfer(unit_ohmic);
    Complex boundary = transfer.evaluator(Complex(0.0, -2.0))(0, 0);
    CHECK(std::abs(boundary.real()) < 1e-13);
}

TEST_CASE("cayley involution: applying the map twice returns S") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> re(0.05, 4.0), im(-4.0, 4.0);
    auto spec = oracle::random_spec(rng, 3, true);
    for (int i = 0; i < 50; ++i) {
        Complex s(re(rng), im(rng));
        ComplexMatrix sm = scattering_S(spec, s);
        ComplexMatrix twice = cayley_map(cayley_map(sm));
        CHECK((twice - sm).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("check_lbr on hand-built transfers") {
    // S = (s^2 - s + 1)/(s^2 + s + 1): LBR, poles at -1/2 +/- i sqrt(3)/2.
    AnalyticTransfer good;
    good.n = 1;
    good.kind = TransferKind::S;
    good.rational = true;
    good.poles = {Complex(-0.5, std::sqrt(3.0) / 2.0), Complex(-0.5, -std::sqrt(3.0) / 2.0)};
    good.evaluator = [](Complex s) {
        ComplexMatrix m(1, 1);
        m(0, 0) = (s * s - s + 1.0) / (s * s + s + 1.0);
        return m;
    };
    auto v = check_lbr(good, {}, 1e-8);
    CHECK(v.ok());
    CHECK(v.certificate_kind == CertificateKind::rational_exact);

    // S == I is trivially LBR.
    AnalyticTransfer ident;
    ident.n = 2;
    ident.kind = TransferKind::S;
    ident.rational = true;
    ident.evaluator = [](Complex) { return ComplexMatrix::Identity(2, 2); };
    CHECK(check_lbr(ident).ok());

    // Unstable pole kills analyticity.
    AnalyticTransfer bad;
    bad.n = 1;
    bad.kind = TransferKind::S;
    bad.rational = true;
    bad.poles = {Complex(1.0, 0.0)};
    bad.evaluator = [](Complex s) {
        ComplexMatrix m(1, 1);
        m(0, 0) = (s + 2.0) / (s - 1.0);
        return m;
    };
    auto vb = check_lbr(bad);
    CHECK_FALSE(vb.analytic_ok);
    CHECK_FALSE(vb.ok());
}

TEST_CASE("check_lpr on hand-built transfers") {
    AnalyticTransfer zero;
    zero.n = 1;
    zero.kind = TransferKind::Sigma;
    zero.rational = true;
    zero.evaluator = [](Complex) { return ComplexMatrix::Zero(1, 1); };
    CHECK(check_lpr(zero).ok());

    // Sigma = 2s/(s^2+1): lossless positive real (reactance function).
    AnalyticTransfer reactance;
    reactance.n = 1;
    reactance.kind = TransferKind::Sigma;
    reactance.rational = true;
    reactance.poles = {Complex(0.0, 1.0), Complex(0.0, -1.0)};
    reactance.evaluator = [](Complex s) {
        ComplexMatrix m(1, 1);
        m(0, 0) = 2.0 * s / (s * s + 1.0);
        return m;
    };
    CHECK(check_lpr(reactance).ok());

    AnalyticTransfer unstable;
    unstable.n = 1;
    unstable.kind = TransferKind::Sigma;
    unstable.rational = true;
    unstable.poles = {Complex(1.0, 0.0)};
    unstable.evaluator = [](Complex s) {
        ComplexMatrix m(1, 1);
        m(0, 0) = 1.0 / (s - 1.0);
        return m;
    };
    CHECK_FALSE(check_lpr(unstable).analytic_ok);
}

TEST_CASE("theorem pairing: LBR of S tracks LPR of the Cayley immittance") {
    std::mt19937_64 rng(57);
    std::uniform_real_distribution<double> lv(0.4, 2.5), kv(0.4, 3.0), rv(0.2, 2.0),
        wv(0.5, 4.0);
    for (int trial = 0; trial < 10; ++trial) {
        bool drude = trial % 2 == 1;
        spectral::SpectralDensity sd =
            drude ? spectral::SpectralDensity(spectral::Drude{rv(rng), wv(rng)})
                  : spectral::SpectralDensity(spectral::Ohmic{rv(rng)});
        auto spec = scalar_spec(lv(rng), kv(rng), sd);
        auto lbr = check_lbr(make_scattering_transfer(spec), {}, 1e-7);
        auto lpr = check_lpr(make_cayley_transfer(spec), {}, 1e-7);
        CHECK(lbr.ok() == lpr.ok());
        // Ohmic kernels are lossless bounded real; frequency-dependent ones are not.
        CHECK(lbr.ok() == !drude);
    }
}

TEST_CASE("chi pole candidates satisfy the characteristic equation") {
    auto spec = scalar_spec(1.0, 2.0, spectral::Drude{0.8, 1.5});
    auto poles = chi_pole_candidates(spec);
    CHECK(poles.size() == 3);
    for (const auto& p : poles) {
        Complex s = p;
        Complex den = s * s + s * (0.8 * 1.5 / (s + 1.5)) + 2.0;
        CHECK(std::abs(den) < 1e-8);
        CHECK(p.real() < 0.0);
    }
}
