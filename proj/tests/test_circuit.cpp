#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "qtl/circuit.hpp"
#include "oracles.hpp"

using namespace qtl;
using namespace qtl::circuit;
using Catch::Approx;

namespace {

CircuitSpec scalar_spec(double l, double k, spectral::SpectralDensity sd) {
    CircuitSpec s;
    s.n = 1;
    s.L = Matrix::Constant(1, 1, l);
    s.K = Matrix::Constant(1, 1, k);
    s.lines = {std::move(sd)};
    return s;
}

}  // namespace

TEST_CASE("validate_spec accepts the scalar LCR and rejects bad input") {
    auto ok = validate_spec(scalar_spec(1.0, 1.0, spectral::Ohmic{1.0}));
    CHECK(ok.n == 1);

    CHECK_THROWS_MATCHES(validate_spec(scalar_spec(0.0, 1.0, spectral::Ohmic{1.0})), error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("NotPositiveDefinite")));

    CircuitSpec bad_dim = scalar_spec(1.0, 1.0, spectral::Ohmic{1.0});
    bad_dim.K = Matrix::Identity(2, 2);
    CHECK_THROWS_MATCHES(validate_spec(bad_dim), error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("DimensionMismatch")));

    CircuitSpec asym = scalar_spec(1.0, 1.0, spectral::Ohmic{1.0});
    asym.n = 2;
    asym.L = Matrix::Identity(2, 2);
    asym.K = Matrix::Identity(2, 2);
    asym.K(0, 1) = 1e-3;
    asym.lines.assign(2, spectral::Ohmic{1.0});
    CHECK_THROWS_MATCHES(validate_spec(asym), error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("NotSymmetric")));

    CHECK_THROWS_MATCHES(validate_spec(scalar_spec(1.0, 1.0, spectral::Ohmic{-2.0})), error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("BadSpectralDensity")));
}

TEST_CASE("validate_spec result: n=2 coupled capacitor block") {
    // K = [[2,1],[1,2]] has eigenvalues {1,3}: positive definite by hand.
    CircuitSpec s;
    s.n = 2;
    s.L = Vector::LinSpaced(2, 1.0, 2.0).asDiagonal();
    s.K.resize(2, 2);
    s.K << 2.0, 1.0, 1.0, 2.0;
    s.lines.assign(2, spectral::Ohmic{1.0});
    CHECK_NOTHROW(validate_spec(s));
}

TEST_CASE("validate_spec is idempotent") {
    auto s1 = validate_spec(scalar_spec(2.0, 3.0, spectral::Drude{1.0, 2.0}));
    auto s2 = validate_spec(s1);
    CHECK((s1.L - s2.L).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s1.K - s2.K).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("state matrices: lossless scalar case") {
    auto spec = validate_spec(scalar_spec(1.0, 1.0, spectral::Ohmic{1.0}));
    auto sm = build_state_matrices(spec, 0.0);
    Matrix expected(2, 2);
    expected << 0.0, 1.0, -1.0, 0.0;
    CHECK((sm.a_minus - expected).cwiseAbs().maxCoeff() < 1e-15);

    Eigen::EigenSolver<Matrix> es(sm.a_minus);
    auto ev = es.eigenvalues();
    CHECK(std::abs(ev(0).real()) < 1e-12);
    CHECK(std::abs(std::abs(ev(0).imag()) - 1.0) < 1e-12);
}

TEST_CASE("state matrices: damped scalar poles match the susceptibility poles") {
    double w0 = 2.0, gamma = 0.5;
    auto spec = validate_spec(scalar_spec(1.0, w0 * w0, spectral::Ohmic{gamma}));
    auto sm = build_state_matrices(spec, gamma);
    Eigen::EigenSolver<Matrix> es(sm.a_minus);
    auto ev = es.eigenvalues();
    double re = ev(0).real();
    double im = std::abs(ev(0).imag());
    CHECK(re == Approx(-0.5 * gamma).epsilon(1e-12));
    CHECK(im == Approx(std::sqrt(w0 * w0 - 0.25 * gamma * gamma)).epsilon(1e-12));
}

TEST_CASE("spectrum(A+) = -spectrum(A-) for random specs") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 12; ++trial) {
        int n = 1 + static_cast<int>(rng() % 4);
        auto spec = oracle::random_spec(rng, n, trial % 2 == 0);
        auto sm = build_state_matrices(spec, 0.7);
        Eigen::EigenSolver<Matrix> em(sm.a_minus), ep(sm.a_plus);
        std::vector<Complex> neg_minus, plus;
        for (int i = 0; i < 2 * n; ++i) {
            neg_minus.push_back(-em.eigenvalues()(i));
            plus.push_back(ep.eigenvalues()(i));
        }
        auto key = [](const Complex& a, const Complex& b) {
            if (a.real() != b.real()) return a.real() < b.real();
            return a.imag() < b.imag();
        };
        std::sort(neg_minus.begin(), neg_minus.end(), key);
        std::sort(plus.begin(), plus.end(), key);
        for (int i = 0; i < 2 * n; ++i)
            CHECK(std::abs(neg_minus[i] - plus[i]) < 1e-8 * (1.0 + std::abs(plus[i])));
    }
}

TEST_CASE("A- is Hurwitz for r > 0 and K > 0") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 10; ++trial) {
        auto spec = oracle::random_spec(rng, 2 + static_cast<int>(rng() % 3), false);
        auto sm = build_state_matrices(spec, 0.25 + 2.0 * (trial / 10.0));
        CHECK(is_hurwitz(sm.a_minus, 1e-12).hurwitz);
    }
}

TEST_CASE("is_hurwitz verdicts and margins") {
    Matrix rot(2, 2);
    rot << 0.0, 1.0, -1.0, 0.0;
    auto v1 = is_hurwitz(rot, 1e-12);
    CHECK_FALSE(v1.hurwitz);
    CHECK(std::abs(v1.margin) < 1e-12);

    Matrix damped(2, 2);
    damped << 0.0, 1.0, -1.0, -1.0;
    auto v2 = is_hurwitz(damped);
    CHECK(v2.hurwitz);
    CHECK(v2.margin == Approx(0.5).epsilon(1e-12));

    auto v3 = is_hurwitz(Vector::LinSpaced(2, -2.0, -1.0).reverse().asDiagonal().toDenseMatrix());
    CHECK(v3.hurwitz);
    CHECK(v3.margin == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normal modes: diagonal case") {
    CircuitSpec s;
    s.n = 2;
    s.L = Matrix::Identity(2, 2);
    s.K = Vector::LinSpaced(2, 1.0, 4.0).asDiagonal();
    s.lines.assign(2, spectral::Ohmic{1.0});
    auto modes = normal_modes(validate_spec(s));
    CHECK(modes.omegas[0] == Approx(1.0));
    CHECK(modes.omegas[1] == Approx(2.0));
    CHECK(modes.y(0, 0) == Approx(1.0));
    CHECK(modes.y(1, 1) == Approx(1.0 / std::sqrt(2.0)));
    CHECK(std::abs(modes.y(0, 1)) < 1e-14);
}

TEST_CASE("normal modes: scalar LC gives q = sqrt(hbar/(2 Z0)) (a + a*)") {
    double l = 2.5, c = 0.4;
    auto spec = validate_spec(scalar_spec(l, 1.0 / c, spectral::Ohmic{1.0}));
    auto modes = normal_modes(spec);
    double z0 = std::sqrt(l / c);
    CHECK(modes.omegas[0] == Approx(1.0 / std::sqrt(l * c)).epsilon(1e-13));
    CHECK(modes.y(0, 0) == Approx(1.0 / std::sqrt(z0)).epsilon(1e-13));
}

TEST_CASE("normal modes diagonalize the component Hamiltonian") {
    // Substituting q = sqrt(hbar/2) Y u and p = -i sqrt(hbar/2) L Y diag(Omega) v
    // into H must leave no cross-mode terms: Y^T K Y and (LYW)^T L^{-1} (LYW)
    // both equal diag(Omega).
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 8; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        auto spec = oracle::random_spec(rng, n, false);
        auto modes = normal_modes(spec);
        Vector w = Eigen::Map<const Vector>(modes.omegas.data(), n);

        Matrix pos = modes.y.transpose() * spec.K * modes.y;
        Matrix ytil = spec.L * modes.y * w.asDiagonal();
        Matrix mom = ytil.transpose() * spec.L.llt().solve(ytil);
        for (int i = 0; i < n; ++i) {
            CHECK(pos(i, i) == Approx(w(i)).epsilon(1e-10));
            CHECK(mom(i, i) == Approx(w(i)).epsilon(1e-10));
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                CHECK(std::abs(pos(i, j)) < 1e-10);
                CHECK(std::abs(mom(i, j)) < 1e-10);
            }
        }
        CHECK(ccr_residual(spec, modes) < 1e-10);
        CHECK(std::is_sorted(modes.omegas.begin(), modes.omegas.end()));
    }
}

TEST_CASE("normal modes reject singular K") {
    CircuitSpec s;
    s.n = 2;
    s.L = Matrix::Identity(2, 2);
    s.K = Matrix::Zero(2, 2);
    s.K(0, 0) = 1.0;
    s.lines.assign(2, spectral::Ohmic{1.0});
    CHECK_THROWS_MATCHES(normal_modes(validate_spec(s)), error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("ZeroMode")));
}

TEST_CASE("degenerate frequencies get a deterministic orthonormal basis") {
    CircuitSpec s;
    s.n = 3;
    s.L = Matrix::Identity(3, 3);
    s.K = Matrix::Identity(3, 3) * 4.0;  // triple degeneracy
    s.lines.assign(3, spectral::Ohmic{1.0});
    auto m1 = normal_modes(validate_spec(s));
    auto m2 = normal_modes(validate_spec(s));
    CHECK((m1.y - m2.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ccr_residual(validate_spec(s), m1) < 1e-12);
}
