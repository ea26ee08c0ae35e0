// freq_response.hpp — Laplace/frequency-domain transfer objects: chi_-[s],
// susceptibility alpha_-(omega), scattering S[s] and G(omega), the Cayley
// immittance Sigma[s], and sampled/rational lossless bounded-real and lossless
// positive-real certification.
//
// Conventions (see README): matrix quotients are evaluated in the displayed
// left-to-right order, numerator times inverse denominator. G(omega) uses the
// ratio form with a leading minus, G = -(K - L w^2 + i w R(w)^*)(K - L w^2 - i w R(w))^{-1},
// which coincides with -S(0+ - i w) whenever R(w) is real (ohmic lines).

#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qtl/circuit.hpp"
#include "qtl/spectral.hpp"

namespace qtl::freq {

using circuit::CircuitSpec;

// Diagonal matrix of per-line kernel transforms LGamma_k[s].
inline ComplexMatrix lgamma_matrix(const CircuitSpec& spec, Complex s) {
    ComplexMatrix g = ComplexMatrix::Zero(spec.n, spec.n);
    for (int k = 0; k < spec.n; ++k) g(k, k) = spectral::laplace_gamma(spec.lines[k], s);
    return g;
}

// Diagonal matrix of boundary resistances R_k(omega).
inline ComplexMatrix resistance_matrix(const CircuitSpec& spec, double omega) {
    ComplexMatrix r = ComplexMatrix::Zero(spec.n, spec.n);
    for (int k = 0; k < spec.n; ++k) r(k, k) = spectral::resistance_R(spec.lines[k], omega);
    return r;
}

namespace detail {

inline ComplexMatrix inverse_checked(const ComplexMatrix& m, const char* what,
                                     double* cond = nullptr) {
    Eigen::FullPivLU<ComplexMatrix> lu(m);
    double rcond = lu.rcond();
    if (cond) *cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!lu.isInvertible() || rcond < 1e-14)
        raise(errc::singular_matrix, std::string(what) + " is singular at this point");
    return lu.inverse();
}

}  // namespace detail

// chi_-[s] = (L s^2 + s LGamma[s] + K)^{-1}, Re s > 0. Reports the condition
// number of the inverted matrix through `cond` when supplied.
inline ComplexMatrix chi_laplace(const CircuitSpec& spec, Complex s, double* cond = nullptr) {
    if (!(s.real() > 0.0)) raise(errc::out_of_domain, "chi_- defined for Re s > 0");
    ComplexMatrix den = spec.L * (s * s) + s * lgamma_matrix(spec, s) +
                        spec.K.cast<Complex>();
    return detail::inverse_checked(den, "L s^2 + s LGamma + K", cond);
}

// alpha_-(omega) = [K - L w^2 - i w R(w)]^{-1}, the boundary value of chi_-.
inline ComplexMatrix susceptibility(const CircuitSpec& spec, double omega) {
    if (omega == 0.0)
        return detail::inverse_checked(spec.K.cast<Complex>(), "K (static limit)");
    ComplexMatrix den = spec.K.cast<Complex>() - spec.L.cast<Complex>() * (omega * omega) -
                        Complex(0.0, omega) * resistance_matrix(spec, omega);
    return detail::inverse_checked(den, "K - L w^2 - i w R(w)");
}

// S[s] = (L s^2 - s LGamma + K)(L s^2 + s LGamma + K)^{-1}, Re s > 0.
inline ComplexMatrix scattering_S(const CircuitSpec& spec, Complex s) {
    if (!(s.real() > 0.0)) raise(errc::out_of_domain, "S[s] defined for Re s > 0");
    ComplexMatrix q = s * lgamma_matrix(spec, s);
    ComplexMatrix p = spec.L * (s * s) + spec.K.cast<Complex>();
    return (p - q) * detail::inverse_checked(p + q, "S denominator");
}

// G(omega) = -(K - L w^2 + i w R(w)^*)(K - L w^2 - i w R(w))^{-1}.
inline ComplexMatrix scattering_G(const CircuitSpec& spec, double omega) {
    ComplexMatrix w = spec.K.cast<Complex>() - spec.L.cast<Complex>() * (omega * omega);
    ComplexMatrix r = resistance_matrix(spec, omega);
    ComplexMatrix num = w + Complex(0.0, omega) * r.conjugate();
    ComplexMatrix den = w - Complex(0.0, omega) * r;
    return -num * detail::inverse_checked(den, "G denominator");
}

// Cayley immittance Sigma[s] = s LGamma[s] (L s^2 + K)^{-1}; the exact Cayley
// partner of S: Sigma = (I - S)(I + S)^{-1} and S = (I - Sigma)(I + Sigma)^{-1}.
inline ComplexMatrix cayley_sigma(const CircuitSpec& spec, Complex s) {
    if (!(s.real() > 0.0)) raise(errc::out_of_domain, "Sigma[s] defined for Re s > 0");
    ComplexMatrix q = s * lgamma_matrix(spec, s);
    ComplexMatrix p = spec.L * (s * s) + spec.K.cast<Complex>();
    return q * detail::inverse_checked(p, "L s^2 + K");
}

// Cayley map X -> (I - X)(I + X)^{-1}; an involution.
inline ComplexMatrix cayley_map(const ComplexMatrix& x) {
    ComplexMatrix eye = ComplexMatrix::Identity(x.rows(), x.cols());
    Eigen::FullPivLU<ComplexMatrix> lu(eye + x);
    if (!lu.isInvertible() || lu.rcond() < 1e-14)
        raise(errc::cayley_singular, "I + X is singular");
    return (eye - x) * lu.inverse();
}

enum class TransferKind { S, Sigma, Chi };
enum class CertificateKind { rational_exact, sampled };

// A matrix-valued function of complex s with pole metadata. For the rational
// families (ohmic/Drude lines) the pole list is complete; for cutoff or
// tabulated kernels it is empty and verdicts are downgraded to "sampled".
struct AnalyticTransfer {
    std::function<ComplexMatrix(Complex)> evaluator;
    std::vector<Complex> poles;
    int n = 0;
    TransferKind kind = TransferKind::S;
    bool rational = false;
};

struct LbrVerdict {
    bool analytic_ok = false;
    bool contractive_ok = false;       // LPR reading: Re Sigma >= -tol on the grid
    bool boundary_lossless_ok = false;
    Complex worst_point{0.0, 0.0};
    double worst_value = 0.0;
    CertificateKind certificate_kind = CertificateKind::sampled;

    bool ok() const { return analytic_ok && contractive_ok && boundary_lossless_ok; }
};

// Log-spaced sampling plan over the open right half plane and the boundary.
struct GridPlan {
    double re_min = 1e-3, re_max = 1e3;
    int re_points = 21;
    double im_max = 1e3;
    int im_points = 17;       // per sign, log-spaced down to re_min, plus 0
    double omega_max = 1e3;
    int omega_points = 200;   // per sign on the boundary, plus 0
};

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g;
    g.reserve(points);
    if (points == 1) {
        g.push_back(lo);
        return g;
    }
    double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < points; ++i) g.push_back(std::exp(l0 + (l1 - l0) * i / (points - 1)));
    return g;
}

inline bool near_pole(const AnalyticTransfer& t, Complex s) {
    for (const auto& p : t.poles)
        if (std::abs(s - p) < 1e-6 * (1.0 + std::abs(p))) return true;
    return false;
}

inline double max_singular_value(const ComplexMatrix& m) {
    return m.jacobiSvd().singularValues()(0);
}

inline double min_hermitian_part_eig(const ComplexMatrix& m) {
    ComplexMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    return es.eigenvalues().minCoeff();
}

struct GridSample {
    Complex s;
    double value = 0.0;
    bool failed = false;
};

template <typename Metric>
inline std::vector<GridSample> sweep(const AnalyticTransfer& t,
                                     const std::vector<Complex>& points, Metric&& metric) {
    std::vector<GridSample> out(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
        out[i].s = points[i];
        if (near_pole(t, points[i])) {
            out[i].failed = true;
            return;
        }
        try {
            out[i].value = metric(t.evaluator(points[i]));
        } catch (const std::exception&) {
            out[i].failed = true;
        }
    });
    return out;
}

}  // namespace detail

// Lossless bounded real check: analytic in the open RHP (no pole with Re > tol
// for rational transfers, sampled finiteness otherwise), contractive on the RHP
// grid, and boundary defect || S^* S - I ||_max within tol on the i-omega grid.
inline LbrVerdict check_lbr(const AnalyticTransfer& t, const GridPlan& grid = {},
                            double tol = 1e-8) {
    if (t.kind != TransferKind::S)
        raise(errc::out_of_domain, "check_lbr expects a scattering-kind transfer");
    LbrVerdict v;
    v.certificate_kind =
        t.rational ? CertificateKind::rational_exact : CertificateKind::sampled;

    // Analyticity.
    v.analytic_ok = true;
    if (t.rational) {
        for (const auto& p : t.poles) {
            if (p.real() > tol) {
                v.analytic_ok = false;
                v.worst_point = p;
                v.worst_value = p.real();
            }
        }
    }

    // Contraction over the RHP grid.
    std::vector<Complex> rhp;
    auto res = detail::log_grid(grid.re_min, grid.re_max, grid.re_points);
    auto ims = detail::log_grid(grid.re_min, grid.im_max, grid.im_points);
    for (double re : res) {
        rhp.emplace_back(re, 0.0);
        for (double im : ims) {
            rhp.emplace_back(re, im);
            rhp.emplace_back(re, -im);
        }
    }
    double worst_gain = 0.0;
    Complex worst_gain_at;
    int failures = 0;
    for (const auto& s : detail::sweep(t, rhp, detail::max_singular_value)) {
        if (s.failed) {
            ++failures;
            continue;
        }
        if (s.value > worst_gain) {
            worst_gain = s.value;
            worst_gain_at = s.s;
        }
    }
    v.contractive_ok = worst_gain <= 1.0 + tol && failures == 0;
    if (!t.rational && failures > 0) v.analytic_ok = false;  // sampled blow-up

    // Boundary unimodularity.
    std::vector<Complex> boundary;
    boundary.emplace_back(0.0, 0.0);
    for (double w : detail::log_grid(grid.re_min, grid.omega_max, grid.omega_points)) {
        boundary.emplace_back(0.0, -w);
        boundary.emplace_back(0.0, w);
    }
    double worst_defect = 0.0;
    Complex worst_defect_at;
    auto defect = [](const ComplexMatrix& m) {
        ComplexMatrix d = m.adjoint() * m - ComplexMatrix::Identity(m.rows(), m.cols());
        return d.cwiseAbs().maxCoeff();
    };
    for (const auto& s : detail::sweep(t, boundary, defect)) {
        if (s.failed) continue;  // poles on the axis are excluded by definition
        if (s.value > worst_defect) {
            worst_defect = s.value;
            worst_defect_at = s.s;
        }
    }
    v.boundary_lossless_ok = worst_defect <= tol;

    if (v.analytic_ok) {
        if (!v.contractive_ok) {
            v.worst_point = worst_gain_at;
            v.worst_value = worst_gain;
        } else if (!v.boundary_lossless_ok || worst_defect > v.worst_value) {
            v.worst_point = worst_defect_at;
            v.worst_value = worst_defect;
        }
    }
    return v;
}

// Lossless positive real check with the verdict flags reinterpreted:
// contractive_ok <- min eig Re Sigma >= -tol on the RHP grid; boundary flag <-
// |Re Sigma(0+ - i w)| <= tol and Sigma(0+ - i w)^* = Sigma(0+ + i w).
inline LbrVerdict check_lpr(const AnalyticTransfer& t, const GridPlan& grid = {},
                            double tol = 1e-8) {
    if (t.kind == TransferKind::S)
        raise(errc::out_of_domain, "check_lpr expects an immittance-kind transfer");
    LbrVerdict v;
    v.certificate_kind =
        t.rational ? CertificateKind::rational_exact : CertificateKind::sampled;

    v.analytic_ok = true;
    if (t.rational) {
        for (const auto& p : t.poles) {
            if (p.real() > tol) {
                v.analytic_ok = false;
                v.worst_point = p;
                v.worst_value = p.real();
            }
        }
    }

    std::vector<Complex> rhp;
    for (double re : detail::log_grid(grid.re_min, grid.re_max, grid.re_points)) {
        rhp.emplace_back(re, 0.0);
        for (double im : detail::log_grid(grid.re_min, grid.im_max, grid.im_points)) {
            rhp.emplace_back(re, im);
            rhp.emplace_back(re, -im);
        }
    }
    double worst_re = 0.0;  // most negative Hermitian-part eigenvalue
    Complex worst_re_at;
    int failures = 0;
    for (const auto& s : detail::sweep(t, rhp, detail::min_hermitian_part_eig)) {
        if (s.failed) {
            ++failures;
            continue;
        }
        if (s.value < worst_re) {
            worst_re = s.value;
            worst_re_at = s.s;
        }
    }
    v.contractive_ok = worst_re >= -tol && failures == 0;
    if (!t.rational && failures > 0) v.analytic_ok = false;

    // Boundary: vanishing real part plus Hermitian symmetry between +/- omega.
    double worst_boundary = 0.0;
    Complex worst_boundary_at;
    auto omegas = detail::log_grid(grid.re_min, grid.omega_max, grid.omega_points);
    std::vector<double> residuals(omegas.size(), -1.0);
    parallel_for(omegas.size(), [&](std::size_t i) {
        double w = omegas[i];
        Complex sm(0.0, -w), sp(0.0, w);
        if (detail::near_pole(t, sm) || detail::near_pole(t, sp)) return;
        try {
            ComplexMatrix m = t.evaluator(sm);
            ComplexMatrix p = t.evaluator(sp);
            double re_part = (0.5 * (m + m.adjoint())).cwiseAbs().maxCoeff();
            double herm_sym = (m.adjoint() - p).cwiseAbs().maxCoeff();
            residuals[i] = std::max(re_part, herm_sym);
        } catch (const error&) {
            residuals[i] = -1.0;
        }
    });
    for (std::size_t i = 0; i < omegas.size(); ++i) {
        if (residuals[i] > worst_boundary) {
            worst_boundary = residuals[i];
            worst_boundary_at = Complex(0.0, -omegas[i]);
        }
    }
    v.boundary_lossless_ok = worst_boundary <= tol;

    if (v.analytic_ok) {
        if (!v.contractive_ok) {
            v.worst_point = worst_re_at;
            v.worst_value = worst_re;
        } else if (!v.boundary_lossless_ok) {
            v.worst_point = worst_boundary_at;
            v.worst_value = worst_boundary;
        }
    }
    return v;
}

namespace detail {

inline bool all_lines_rational(const CircuitSpec& spec) {
    for (const auto& sd : spec.lines) {
        if (!std::holds_alternative<spectral::Ohmic>(sd) &&
            !std::holds_alternative<spectral::Drude>(sd))
            return false;
    }
    return true;
}

}  // namespace detail

// Poles of chi_-[s] for ohmic/Drude line mixes, from the first-order
// linearization with one auxiliary variable per Drude line.
inline std::vector<Complex> chi_pole_candidates(const CircuitSpec& spec) {
    const int n = spec.n;
    std::vector<int> drude_lines;
    Matrix r_ohmic = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        if (const auto* d = std::get_if<spectral::Ohmic>(&spec.lines[k]))
            r_ohmic(k, k) = d->r;
        else if (std::holds_alternative<spectral::Drude>(spec.lines[k]))
            drude_lines.push_back(k);
        else
            raise(errc::out_of_domain, "pole accounting needs rational line kernels");
    }
    const int d = static_cast<int>(drude_lines.size());
    const int dim = 2 * n + d;
    Eigen::LLT<Matrix> llt(spec.L);

    Matrix a = Matrix::Zero(dim, dim);
    a.block(0, n, n, n) = Matrix::Identity(n, n);
    a.block(n, 0, n, n) = -llt.solve(spec.K);
    a.block(n, n, n, n) = -llt.solve(r_ohmic);
    for (int j = 0; j < d; ++j) {
        int line = drude_lines[j];
        const auto& dr = std::get<spectral::Drude>(spec.lines[line]);
        Vector e = Vector::Unit(n, line);
        a.block(n, 2 * n + j, n, 1) = -llt.solve(e);
        a(2 * n + j, n + line) = dr.r * dr.omega_c;
        a(2 * n + j, 2 * n + j) = -dr.omega_c;
    }

    Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) raise(errc::eigen_failure, "pole eigensolve failed");
    std::vector<Complex> poles(es.eigenvalues().data(),
                               es.eigenvalues().data() + es.eigenvalues().size());
    return poles;
}

// Boundary-capable rational evaluation: for Re s ~ 0 use the exact kernel
// closed forms at s = -i omega (resistance_R), away from listed poles.
inline AnalyticTransfer make_scattering_transfer(const CircuitSpec& spec) {
    AnalyticTransfer t;
    t.n = spec.n;
    t.kind = TransferKind::S;
    t.rational = detail::all_lines_rational(spec);
    if (t.rational) t.poles = chi_pole_candidates(spec);
    t.evaluator = [spec](Complex s) -> ComplexMatrix {
        if (s.real() > 1e-12) return scattering_S(spec, s);
        double omega = -s.imag();
        ComplexMatrix w = spec.K.cast<Complex>() - spec.L.cast<Complex>() * (omega * omega);
        ComplexMatrix r = resistance_matrix(spec, omega);
        ComplexMatrix num = w + Complex(0.0, omega) * r;
        ComplexMatrix den = w - Complex(0.0, omega) * r;
        return num * detail::inverse_checked(den, "S boundary denominator");
    };
    return t;
}

inline AnalyticTransfer make_lgamma_transfer(const CircuitSpec& spec) {
    AnalyticTransfer t;
    t.n = spec.n;
    t.kind = TransferKind::Sigma;
    t.rational = detail::all_lines_rational(spec);
    if (t.rational) {
        for (const auto& sd : spec.lines)
            if (const auto* d = std::get_if<spectral::Drude>(&sd))
                t.poles.emplace_back(-d->omega_c, 0.0);
    }
    t.evaluator = [spec](Complex s) -> ComplexMatrix {
        if (s.real() > 1e-12) return lgamma_matrix(spec, s);
        return resistance_matrix(spec, -s.imag());
    };
    return t;
}

// The theorem-side immittance: Sigma[s] = s LGamma[s] (L s^2 + K)^{-1}.
inline AnalyticTransfer make_cayley_transfer(const CircuitSpec& spec) {
    AnalyticTransfer t;
    t.n = spec.n;
    t.kind = TransferKind::Sigma;
    t.rational = detail::all_lines_rational(spec);
    if (t.rational) {
        // Poles of (L s^2 + K)^{-1} sit at s = +/- i Omega_j.
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(spec.K, spec.L);
        if (es.info() != Eigen::Success) raise(errc::eigen_failure, "mode pole solve failed");
        for (int j = 0; j < spec.n; ++j) {
            double w = std::sqrt(std::max(0.0, es.eigenvalues()(j)));
            t.poles.emplace_back(0.0, w);
            t.poles.emplace_back(0.0, -w);
        }
        for (const auto& sd : spec.lines)
            if (const auto* d = std::get_if<spectral::Drude>(&sd))
                t.poles.emplace_back(-d->omega_c, 0.0);
    }
    t.evaluator = [spec](Complex s) -> ComplexMatrix {
        ComplexMatrix q;
        if (s.real() > 1e-12)
            q = s * lgamma_matrix(spec, s);
        else
            q = Complex(0.0, s.imag()) * resistance_matrix(spec, -s.imag());
        ComplexMatrix p = spec.L * (s * s) + spec.K.cast<Complex>();
        return q * detail::inverse_checked(p, "L s^2 + K");
    };
    return t;
}

}  // namespace qtl::freq
