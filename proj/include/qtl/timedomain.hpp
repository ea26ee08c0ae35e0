// timedomain.hpp — Time-domain propagation of the ohmic and memory Langevin
// equations, the time-zero field-data maps, and energy functionals.
//
// propagate_ohmic advances (q, i) with the exact matrix-exponential step and a
// trapezoid rule on the inhomogeneity (global O(dt^2)). simulate_memory uses
// Crank-Nicolson with a trapezoid convolution over the sampled kernel; the
// history below t = 0 is zero ("switch-on at t = 0").

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qtl/circuit.hpp"
#include "qtl/spectral.hpp"

namespace qtl::timedomain {

using circuit::CircuitSpec;

// Uniformly sampled n-vector signal starting at t0.
struct SampledSignal {
    double t0 = 0.0;
    double dt = 0.0;
    Matrix values;  // n x m

    int samples() const { return static_cast<int>(values.cols()); }
    double t_end() const { return t0 + dt * (samples() - 1); }
};

struct Trajectory {
    std::vector<double> t;
    Matrix q;  // n x steps
    Matrix i;
    std::vector<double> component_energy;
    SampledSignal input;
    std::vector<std::string> warnings;
};

namespace detail {

inline double component_energy(const CircuitSpec& spec, const Vector& q, const Vector& v) {
    return 0.5 * v.dot(spec.L * v) + 0.5 * q.dot(spec.K * q);
}

inline void check_input_grid(const SampledSignal& in, double dt, int steps, int n) {
    if (in.values.size() == 0) return;
    if (in.values.rows() != n) raise(errc::nonuniform_input, "input channel count mismatch");
    if (std::abs(in.dt - dt) > 1e-12 * std::max(dt, in.dt))
        raise(errc::nonuniform_input, "input must be sampled at the integration step");
    if (in.samples() < steps + 1)
        raise(errc::nonuniform_input, "input shorter than the integration window");
}

}  // namespace detail

// d/dt [q; i] = A- [q; i] + 2r [0; L^{-1} qdot_in(t)] stepped by e^{A- dt}.
inline Trajectory propagate_ohmic(const CircuitSpec& spec, double r, const Vector& q0,
                                  const Vector& i0, const SampledSignal& qdot_in, double dt,
                                  double t_max) {
    const int n = spec.n;
    if (!(dt > 0.0) || !(t_max >= 0.0)) raise(errc::out_of_domain, "need dt > 0, t_max >= 0");
    if (q0.size() != n || i0.size() != n) raise(errc::dimension_mismatch, "bad initial state");
    const int steps = static_cast<int>(std::llround(t_max / dt));
    detail::check_input_grid(qdot_in, dt, steps, n);

    auto sm = circuit::build_state_matrices(spec, r);
    Trajectory traj;
    if (sm.a_minus.cwiseAbs().rowwise().sum().maxCoeff() * dt > 1.0)
        traj.warnings.push_back("StepTooLarge: dt * ||A-|| > 1, trapezoid accuracy degrades");

    Matrix e_step = (sm.a_minus * dt).exp();
    Eigen::LLT<Matrix> llt(spec.L);
    const bool has_input = qdot_in.values.size() != 0;

    auto forcing = [&](int k) -> Vector {
        Vector b = Vector::Zero(2 * n);
        if (has_input) b.tail(n) = 2.0 * r * llt.solve(qdot_in.values.col(k));
        return b;
    };

    Vector z(2 * n);
    z.head(n) = q0;
    z.tail(n) = i0;

    traj.t.resize(steps + 1);
    traj.q.resize(n, steps + 1);
    traj.i.resize(n, steps + 1);
    traj.component_energy.resize(steps + 1);
    traj.input = qdot_in;

    auto record = [&](int k, const Vector& state) {
        traj.t[k] = k * dt;
        traj.q.col(k) = state.head(n);
        traj.i.col(k) = state.tail(n);
        traj.component_energy[k] = detail::component_energy(spec, state.head(n), state.tail(n));
    };
    record(0, z);

    Vector b_prev = forcing(0);
    for (int k = 0; k < steps; ++k) {
        Vector b_next = forcing(k + 1);
        z = e_step * z + 0.5 * dt * (e_step * b_prev + b_next);
        b_prev = b_next;
        record(k + 1, z);
    }
    return traj;
}

// L qddot + [instantaneous ohmic drag] + \int_0^t Gamma(t-u) qdot(u) du + K q = F(t),
// Crank-Nicolson in (q, v) with trapezoid convolution quadrature.
inline Trajectory simulate_memory(const CircuitSpec& spec, const Vector& q0, const Vector& i0,
                                  const SampledSignal& f_ext, double dt, double t_max) {
    const int n = spec.n;
    if (!(dt > 0.0) || !(t_max >= 0.0)) raise(errc::out_of_domain, "need dt > 0, t_max >= 0");
    if (q0.size() != n || i0.size() != n) raise(errc::dimension_mismatch, "bad initial state");
    const int steps = static_cast<int>(std::llround(t_max / dt));
    detail::check_input_grid(f_ext, dt, steps, n);
    const bool has_force = f_ext.values.size() != 0;

    // Per-line kernel samples on the step grid and instantaneous drag weights.
    std::vector<std::vector<double>> gamma(n, std::vector<double>(steps + 1));
    Vector w_inst(n), gamma0(n);
    for (int k = 0; k < n; ++k) {
        w_inst(k) = spectral::ohmic_delta_weight(spec.lines[k]);
        for (int m = 0; m <= steps; ++m) {
            gamma[k][m] = spectral::memory_kernel(spec.lines[k], m * dt);
            if (!std::isfinite(gamma[k][m]))
                raise(errc::divergent_integral, "kernel samples are not finite");
        }
        gamma0(k) = gamma[k][0];
    }
    Vector w_total = w_inst + 0.5 * dt * gamma0;

    Matrix m_lhs = spec.L + (0.5 * dt) * Matrix(w_total.asDiagonal()) +
                   (0.25 * dt * dt) * spec.K;
    Eigen::PartialPivLU<Matrix> lhs(m_lhs);

    auto force_at = [&](int k) -> Vector {
        if (!has_force) return Vector::Zero(n);
        return f_ext.values.col(k);
    };

    Trajectory traj;
    traj.input = f_ext;
    traj.t.resize(steps + 1);
    traj.q.resize(n, steps + 1);
    traj.i.resize(n, steps + 1);
    traj.component_energy.resize(steps + 1);

    std::vector<std::vector<double>> v_hist(n, std::vector<double>(steps + 1));
    Vector q = q0, v = i0;
    for (int line = 0; line < n; ++line) v_hist[line][0] = v(line);
    traj.t[0] = 0.0;
    traj.q.col(0) = q;
    traj.i.col(0) = v;
    traj.component_energy[0] = detail::component_energy(spec, q, v);

    Vector drag = w_inst.cwiseProduct(v);  // trapezoid convolution at t=0 vanishes
    for (int k = 0; k < steps; ++k) {
        // History part of the convolution at t_{k+1} (everything except v_{k+1}).
        Vector hist = Vector::Zero(n);
        for (int line = 0; line < n; ++line) {
            const double* gp = gamma[line].data();
            const double* vp = v_hist[line].data();
            double acc = 0.5 * gp[k + 1] * vp[0];
            for (int m = 1; m <= k; ++m) acc += gp[m] * vp[k + 1 - m];
            hist(line) = dt * acc;
        }

        Vector rhs_known = force_at(k) - spec.K * q - drag;
        Vector rhs = spec.L * v + 0.5 * dt * (rhs_known + force_at(k + 1) - spec.K * q - hist) -
                     0.25 * dt * dt * (spec.K * v);
        Vector v_next = lhs.solve(rhs);
        Vector q_next = q + 0.5 * dt * (v + v_next);

        drag = w_total.cwiseProduct(v_next) + hist;
        q = q_next;
        v = v_next;
        for (int line = 0; line < n; ++line) v_hist[line][k + 1] = v(line);
        traj.t[k + 1] = (k + 1) * dt;
        traj.q.col(k + 1) = q;
        traj.i.col(k + 1) = v;
        traj.component_energy[k + 1] = detail::component_energy(spec, q, v);
    }
    return traj;
}

// Time-zero field data (f, g) per channel on a uniform tau grid over [0, T],
// with fdot precomputed (4th-order central interior, 2nd-order one-sided ends).
struct FieldData {
    double dtau = 0.0;
    Matrix f;     // n x m
    Matrix g;
    Matrix fdot;

    int samples() const { return static_cast<int>(f.cols()); }
    double t_end() const { return dtau * (samples() - 1); }
};

inline FieldData make_field_data(const Matrix& f, const Matrix& g, double dtau) {
    if (!(dtau > 0.0)) raise(errc::out_of_domain, "dtau must be positive");
    if (f.rows() != g.rows() || f.cols() != g.cols())
        raise(errc::dimension_mismatch, "f and g grids must match");
    if (f.cols() < 5) raise(errc::out_of_domain, "need at least 5 samples");

    FieldData data;
    data.dtau = dtau;
    data.f = f;
    data.g = g;
    const int m = static_cast<int>(f.cols());
    data.fdot.resize(f.rows(), m);
    const double h = dtau;
    for (int c = 0; c < m; ++c) {
        if (c >= 2 && c <= m - 3) {
            data.fdot.col(c) =
                (f.col(c - 2) - 8.0 * f.col(c - 1) + 8.0 * f.col(c + 1) - f.col(c + 2)) /
                (12.0 * h);
        } else if (c == 0) {
            data.fdot.col(c) = (-3.0 * f.col(0) + 4.0 * f.col(1) - f.col(2)) / (2.0 * h);
        } else if (c == m - 1) {
            data.fdot.col(c) = (3.0 * f.col(m - 1) - 4.0 * f.col(m - 2) + f.col(m - 3)) / (2.0 * h);
        } else {
            data.fdot.col(c) = (f.col(c + 1) - f.col(c - 1)) / (2.0 * h);
        }
    }
    return data;
}

namespace detail {

// Values of f, g, fdot at arbitrary tau >= 0 by linear interpolation; zero
// beyond the grid (compact support).
inline Vector sample_columns(const Matrix& m, double dtau, double tau) {
    const int cols = static_cast<int>(m.cols());
    if (tau < 0.0) raise(errc::out_of_range, "field data defined for tau >= 0");
    double x = tau / dtau;
    int lo = static_cast<int>(std::floor(x));
    if (lo >= cols - 1) {
        if (lo == cols - 1 && x - lo < 1e-9) return m.col(cols - 1);
        return Vector::Zero(m.rows());
    }
    double w = x - lo;
    return (1.0 - w) * m.col(lo) + w * m.col(lo + 1);
}

// Propagator blocks H_iq, H_ii of e^{A t} cached on a uniform step grid. The
// H_ii entries are also kept as flat per-(i,j) arrays so the long convolutions
// run as contiguous dot products.
struct PropagatorTable {
    std::vector<Matrix> h_iq;
    std::vector<Matrix> h_ii;
    std::vector<std::vector<double>> h_ii_flat;  // [i*n+j][step]
    int n = 0;

    void build(const Matrix& a, double step, int count, int dim) {
        n = dim;
        Matrix e = (a * step).exp();
        Matrix h = Matrix::Identity(2 * n, 2 * n);
        h_iq.reserve(count + 1);
        h_ii.reserve(count + 1);
        h_ii_flat.assign(static_cast<std::size_t>(n) * n, {});
        for (auto& v : h_ii_flat) v.reserve(count + 1);
        for (int m = 0; m <= count; ++m) {
            h_iq.push_back(h.block(n, 0, n, n));
            h_ii.push_back(h.block(n, n, n, n));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    h_ii_flat[static_cast<std::size_t>(i) * n + j].push_back(h(n + i, n + j));
            h = e * h;
        }
    }

    // sum_{l=0..m} w_l H_ii[k - l] s(:, l) with trapezoid end weights.
    Vector convolve(const Matrix& s_pre, int k, int m) const {
        Vector acc = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            double total = 0.0;
            for (int j = 0; j < n; ++j) {
                const double* hrow = h_ii_flat[static_cast<std::size_t>(i) * n + j].data();
                double sum = 0.0;
                for (int l = 0; l <= m; ++l) sum += hrow[k - l] * s_pre(j, l);
                sum -= 0.5 * (hrow[k] * s_pre(j, 0) + hrow[k - m] * s_pre(j, m));
                total += sum;
            }
            acc(i) = total;
        }
        return acc;
    }
};

}  // namespace detail

// qdot_out(t) from time-zero data: the t >= 0 branch propagates with the
// damped flow and convolves against G^-; the t <= 0 branch reads the data.
inline Vector output_from_data(const CircuitSpec& spec, double r, const FieldData& data,
                               double t) {
    const int n = spec.n;
    const double h = data.dtau;
    if (!std::isfinite(t)) raise(errc::out_of_range, "t must be finite");

    if (t <= 0.0) {
        Vector g = detail::sample_columns(data.g, h, -t);
        Vector fd = detail::sample_columns(data.fdot, h, -t);
        return 0.5 * (g - fd);
    }

    auto sm = circuit::build_state_matrices(spec, r);
    Matrix e_at = (sm.a_minus * t).exp();
    Vector out = e_at.block(n, 0, n, n) * data.f.col(0) + e_at.block(n, n, n, n) * data.g.col(0);

    // (1/2) \int_0^t G^-(t - tau) (g + fdot)(tau) dtau, trapezoid on the data grid
    // plus a partial last panel when t falls between samples.
    Eigen::LLT<Matrix> llt(spec.L);
    double upper = std::min(t, data.t_end());
    int m = static_cast<int>(std::floor(upper / h + 1e-9));
    Vector acc = Vector::Zero(n);
    for (int k = 0; k <= m; ++k) {
        double tau = k * h;
        Vector s = data.g.col(k) + data.fdot.col(k);
        Matrix e_diff = (sm.a_minus * (t - tau)).exp();
        Vector term = 2.0 * r * (e_diff.block(n, n, n, n) * llt.solve(s));
        double weight = (k == 0 || k == m) ? 0.5 : 1.0;
        acc += weight * term;
    }
    Vector conv = 0.5 * h * acc;
    if (upper - m * h > 1e-12 * h) {
        double w = upper - m * h;
        Vector s_lo = data.g.col(m) + data.fdot.col(m);
        Vector s_hi = detail::sample_columns(data.g, h, upper) +
                      detail::sample_columns(data.fdot, h, upper);
        Matrix e_lo = (sm.a_minus * (t - m * h)).exp();
        Matrix e_hi = (sm.a_minus * (t - upper)).exp();
        conv += 0.5 * w * r *
                (e_lo.block(n, n, n, n) * llt.solve(s_lo) +
                 e_hi.block(n, n, n, n) * llt.solve(s_hi));
    }
    out += conv;

    Vector g_t = detail::sample_columns(data.g, h, t);
    Vector fd_t = detail::sample_columns(data.fdot, h, t);
    out -= 0.5 * (g_t + fd_t);
    return out;
}

// Mirror of output_from_data: reads data for t >= 0, propagates with A+ for
// t <= 0. The backward flow is driven by the outgoing wave, so the convolution
// carries (g - fdot): the literal forward/backward symmetry with (g + fdot)
// breaks the input/output energy isometry (see README conventions).
inline Vector input_from_data(const CircuitSpec& spec, double r, const FieldData& data,
                              double t) {
    const int n = spec.n;
    const double h = data.dtau;
    if (!std::isfinite(t)) raise(errc::out_of_range, "t must be finite");

    if (t >= 0.0) {
        Vector g = detail::sample_columns(data.g, h, t);
        Vector fd = detail::sample_columns(data.fdot, h, t);
        return 0.5 * (g + fd);
    }

    auto sm = circuit::build_state_matrices(spec, r);
    Matrix e_at = (sm.a_plus * t).exp();  // t < 0: decaying since -A+ is Hurwitz
    Vector in = e_at.block(n, 0, n, n) * data.f.col(0) + e_at.block(n, n, n, n) * data.g.col(0);

    // (1/2) \int_0^{-t} G^+(t + sigma) (g - fdot)(sigma) dsigma, with a partial
    // last panel when -t falls between samples.
    Eigen::LLT<Matrix> llt(spec.L);
    double upper = std::min(-t, data.t_end());
    int m = static_cast<int>(std::floor(upper / h + 1e-9));
    Vector acc = Vector::Zero(n);
    for (int k = 0; k <= m; ++k) {
        double sigma = k * h;
        Vector s = data.g.col(k) - data.fdot.col(k);
        Matrix e_diff = (sm.a_plus * (t + sigma)).exp();
        Vector term = 2.0 * r * (e_diff.block(n, n, n, n) * llt.solve(s));
        double weight = (k == 0 || k == m) ? 0.5 : 1.0;
        acc += weight * term;
    }
    Vector conv = 0.5 * h * acc;
    if (upper - m * h > 1e-12 * h) {
        double w = upper - m * h;
        Vector s_lo = data.g.col(m) - data.fdot.col(m);
        Vector s_hi = detail::sample_columns(data.g, h, upper) -
                      detail::sample_columns(data.fdot, h, upper);
        Matrix e_lo = (sm.a_plus * (t + m * h)).exp();
        Matrix e_hi = (sm.a_plus * (t + upper)).exp();
        conv += 0.5 * w * r *
                (e_lo.block(n, n, n, n) * llt.solve(s_lo) +
                 e_hi.block(n, n, n, n) * llt.solve(s_hi));
    }
    in += conv;

    Vector g_mt = detail::sample_columns(data.g, h, -t);
    Vector fd_mt = detail::sample_columns(data.fdot, h, -t);
    in -= 0.5 * (g_mt - fd_mt);
    return in;
}

// Batched field-data maps on a uniform output grid aligned with data.dtau.
// Shares the propagator table and convolution prefix sums across outputs.
inline SampledSignal output_series(const CircuitSpec& spec, double r, const FieldData& data,
                                   double t_min, double t_max) {
    const int n = spec.n;
    const double h = data.dtau;
    int k_min = static_cast<int>(std::llround(t_min / h));
    int k_max = static_cast<int>(std::llround(t_max / h));
    SampledSignal out;
    out.t0 = k_min * h;
    out.dt = h;
    out.values.resize(n, k_max - k_min + 1);

    auto sm = circuit::build_state_matrices(spec, r);
    int pos_steps = std::max(0, k_max);
    detail::PropagatorTable table;
    table.build(sm.a_minus, h, pos_steps, n);
    Eigen::LLT<Matrix> llt(spec.L);

    Matrix s_pre(n, data.samples());
    for (int k = 0; k < data.samples(); ++k)
        s_pre.col(k) = llt.solve(data.g.col(k) + data.fdot.col(k));

    for (int k = k_min; k <= k_max; ++k) {
        double t = k * h;
        Vector value;
        if (k <= 0) {
            Vector g = detail::sample_columns(data.g, h, -t);
            Vector fd = detail::sample_columns(data.fdot, h, -t);
            value = 0.5 * (g - fd);
        } else {
            value = table.h_iq[k] * data.f.col(0) + table.h_ii[k] * data.g.col(0);
            int m = std::min(k, data.samples() - 1);
            value += 0.5 * h * 2.0 * r * table.convolve(s_pre, k, m);
            if (k < data.samples()) value -= 0.5 * (data.g.col(k) + data.fdot.col(k));
        }
        out.values.col(k - k_min) = value;
    }
    return out;
}

inline SampledSignal input_series(const CircuitSpec& spec, double r, const FieldData& data,
                                  double t_min, double t_max) {
    const int n = spec.n;
    const double h = data.dtau;
    int k_min = static_cast<int>(std::llround(t_min / h));
    int k_max = static_cast<int>(std::llround(t_max / h));
    SampledSignal out;
    out.t0 = k_min * h;
    out.dt = h;
    out.values.resize(n, k_max - k_min + 1);

    auto sm = circuit::build_state_matrices(spec, r);
    int neg_steps = std::max(0, -k_min);
    detail::PropagatorTable table;  // e^{A+ (-m h)} = (e^{-A+ h})^m
    table.build(-sm.a_plus, h, neg_steps, n);
    Eigen::LLT<Matrix> llt(spec.L);

    Matrix s_pre(n, data.samples());
    for (int k = 0; k < data.samples(); ++k)
        s_pre.col(k) = llt.solve(data.g.col(k) - data.fdot.col(k));

    for (int k = k_min; k <= k_max; ++k) {
        double t = k * h;
        Vector value;
        if (k >= 0) {
            Vector g = detail::sample_columns(data.g, h, t);
            Vector fd = detail::sample_columns(data.fdot, h, t);
            value = 0.5 * (g + fd);
        } else {
            int mk = -k;
            value = table.h_iq[mk] * data.f.col(0) + table.h_ii[mk] * data.g.col(0);
            // G^+(t + sigma) at sigma = l h has exponent -(mk - l) h.
            int m = std::min(mk, data.samples() - 1);
            value += 0.5 * h * 2.0 * r * table.convolve(s_pre, mk, m);
            Vector g_mt = detail::sample_columns(data.g, h, -t);
            Vector fd_mt = detail::sample_columns(data.fdot, h, -t);
            value -= 0.5 * (g_mt - fd_mt);
        }
        out.values.col(k - k_min) = value;
    }
    return out;
}

// Energy norm of field data:
//   E = (1/2) g(0)^T L g(0) + (1/2) f(0)^T K f(0) + (r/2) \int (g^T g + fdot^T fdot) dtau.
inline double energy_norm(const CircuitSpec& spec, double r, const FieldData& data) {
    double e = 0.5 * data.g.col(0).dot(spec.L * data.g.col(0)) +
               0.5 * data.f.col(0).dot(spec.K * data.f.col(0));
    double integral = 0.0;
    const int m = data.samples();
    for (int k = 0; k < m; ++k) {
        double val = data.g.col(k).squaredNorm() + data.fdot.col(k).squaredNorm();
        integral += (k == 0 || k == m - 1) ? 0.5 * val : val;
    }
    return e + 0.5 * r * integral * data.dtau;
}

// r \int qdot^T qdot dt over a sampled window whose ends must have decayed.
inline double energy_io(double r, const SampledSignal& qdot) {
    const int m = qdot.samples();
    if (m < 2) raise(errc::window_too_short, "need at least two samples");
    double peak = qdot.values.cwiseAbs().maxCoeff();
    double ends = std::max(qdot.values.col(0).cwiseAbs().maxCoeff(),
                           qdot.values.col(m - 1).cwiseAbs().maxCoeff());
    if (ends >= 1e-8 * std::max(peak, 1e-300))
        raise(errc::window_too_short, "window endpoints have not decayed");
    double integral = 0.0;
    for (int k = 0; k < m; ++k) {
        double val = qdot.values.col(k).squaredNorm();
        integral += (k == 0 || k == m - 1) ? 0.5 * val : val;
    }
    return r * integral * qdot.dt;
}

}  // namespace qtl::timedomain
