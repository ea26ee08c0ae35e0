// quadrature.hpp — Gauss-Kronrod adaptive rules, principal-value integrals with
// singularity subtraction, and Abel-regularized oscillatory tails with Richardson
// extrapolation in the damping parameter.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "qtl/common.hpp"

namespace qtl::quad {

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
double scalar_abs(const T& v) {
    return std::abs(v);
}

}  // namespace detail

template <typename T>
struct PanelResult {
    T value{};
    double error = 0.0;   // |kronrod - gauss| based estimate
    double resabs = 0.0;  // integral of |f|
};

// Single GK15 panel on [a, b].
template <typename T, typename F>
PanelResult<T> gk15(F&& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);

    T fc = f(center);
    T resk = fc * detail::kWgk[7];
    T resg = fc * detail::kWg[3];
    double resabs = detail::scalar_abs(fc) * detail::kWgk[7];

    std::array<T, 7> fv1{}, fv2{};
    for (int j = 0; j < 7; ++j) {
        double absc = hlgth * detail::kXgk[j];
        fv1[j] = f(center - absc);
        fv2[j] = f(center + absc);
        T fsum = fv1[j] + fv2[j];
        resk += fsum * detail::kWgk[j];
        resabs += detail::kWgk[j] * (detail::scalar_abs(fv1[j]) + detail::scalar_abs(fv2[j]));
        if (j % 2 == 1) resg += fsum * detail::kWg[j / 2];
    }

    PanelResult<T> out;
    out.value = resk * hlgth;
    out.error = detail::scalar_abs((resk - resg) * hlgth);
    out.resabs = resabs * std::abs(hlgth);
    return out;
}

template <typename T>
struct IntegralResult {
    T value{};
    double error = 0.0;
};

// Adaptive bisection on [a, b].
template <typename T, typename F>
IntegralResult<T> integrate(F&& f, double a, double b, double abs_tol = 1e-12,
                            double rel_tol = 1e-10, int max_depth = 48) {
    struct Segment {
        double a, b;
        PanelResult<T> r;
        int depth;
    };
    auto seed = gk15<T>(f, a, b);
    std::vector<Segment> heap{{a, b, seed, 0}};
    std::vector<Segment> saturated;  // segments at max_depth, no longer refined
    auto worse = [](const Segment& x, const Segment& y) { return x.r.error < y.r.error; };

    T total = seed.value;
    double total_err = seed.error;
    double scale = std::max(seed.resabs, 1e-300);

    const std::size_t max_segments = 4000;
    while (!heap.empty() &&
           total_err > std::max(abs_tol, rel_tol * std::max(scale, detail::scalar_abs(total))) &&
           heap.size() + saturated.size() < max_segments) {
        std::pop_heap(heap.begin(), heap.end(), worse);
        Segment s = heap.back();
        heap.pop_back();
        if (s.depth >= max_depth) {
            saturated.push_back(s);
            continue;
        }
        double mid = 0.5 * (s.a + s.b);
        auto left = gk15<T>(f, s.a, mid);
        auto right = gk15<T>(f, mid, s.b);
        total += left.value + right.value - s.r.value;
        total_err += left.error + right.error - s.r.error;
        scale = std::max(scale, left.resabs + right.resabs);
        heap.push_back({s.a, mid, left, s.depth + 1});
        std::push_heap(heap.begin(), heap.end(), worse);
        heap.push_back({mid, s.b, right, s.depth + 1});
        std::push_heap(heap.begin(), heap.end(), worse);
    }

    // Recompute sums in deterministic segment order to wash out heap ordering.
    heap.insert(heap.end(), saturated.begin(), saturated.end());
    std::sort(heap.begin(), heap.end(),
              [](const Segment& x, const Segment& y) { return x.a < y.a; });
    T v{};
    double e = 0.0;
    for (const auto& s : heap) {
        v += s.r.value;
        e += s.r.error;
    }
    return {v, e};
}

// \int_a^inf f, for absolutely convergent integrands, via x = a + t/(1-t).
template <typename T, typename F>
IntegralResult<T> integrate_to_inf(F&& f, double a, double abs_tol = 1e-12,
                                   double rel_tol = 1e-10) {
    auto mapped = [&](double t) -> T {
        double u = 1.0 - t;
        double x = a + t / u;
        return f(x) * (1.0 / (u * u));
    };
    return integrate<T>(mapped, 0.0, 1.0 - 1e-12, abs_tol, rel_tol);
}

// PV \int_a^b f(x)/(x - x0) dx by singularity subtraction:
//   \int (f(x) - f(x0))/(x - x0) dx + f(x0) log|(b - x0)/(x0 - a)|.
template <typename F>
IntegralResult<double> pv_integral(F&& f, double a, double b, double x0,
                                   double abs_tol = 1e-12, double rel_tol = 1e-10) {
    if (!(x0 > a && x0 < b)) raise(errc::out_of_domain, "PV singularity must lie inside (a,b)");
    const double f0 = f(x0);
    auto reg = [&](double x) -> double {
        double d = x - x0;
        if (std::abs(d) < 1e-9 * (1.0 + std::abs(x0))) {
            // Central finite difference for the removable limit f'(x0).
            double h = 1e-6 * (1.0 + std::abs(x0));
            return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        }
        return (f(x) - f0) / d;
    };
    auto r = integrate<double>(reg, a, b, abs_tol, rel_tol);
    r.value += f0 * std::log((b - x0) / (x0 - a));
    return r;
}

struct AbelOptions {
    // Damping levels; Richardson-extrapolated to eta -> 0. The first three are
    // the standard ladder; extra halvings engage while the extrapolant spread
    // stays above `refine_tol`.
    std::vector<double> etas{1e-2, 5e-3, 2.5e-3};
    int max_extra_levels = 3;
    double refine_tol = 1e-8;     // spread target before extra levels stop
    double fail_tol = 1e-5;       // spread beyond which regularization "failed"
    double panel_tol = 5e-13;     // relative threshold for stopping panel sums
    std::size_t max_panels = 200000;
    std::size_t wynn_window = 40; // partial sums fed to the epsilon algorithm
};

namespace detail {

// Wynn epsilon acceleration on a sequence of partial sums. Deepening stops at
// the first numerical breakdown (vanishing differences make 1/diff explode);
// the best even-column estimate seen so far is returned.
inline double wynn_epsilon(const std::vector<double>& sums) {
    const std::size_t n = sums.size();
    if (n == 0) return 0.0;
    double sum_scale = 0.0;
    for (double s : sums) sum_scale = std::max(sum_scale, std::abs(s));

    std::vector<double> e_prev(n, 0.0);  // column k-2 (seeded with e_{-1} = 0)
    std::vector<double> e_curr = sums;   // column k-1
    double best = sums.back();
    double best_err = std::numeric_limits<double>::max();
    double prev_even = sums.back();

    for (std::size_t k = 1; k < n; ++k) {
        const bool source_is_even = (k % 2 == 1);  // column k-1 holds estimates
        std::vector<double> e_next(n - k);
        for (std::size_t i = 0; i + k < n; ++i) {
            double diff = e_curr[i + 1] - e_curr[i];
            double scale = std::max({std::abs(e_curr[i]), std::abs(e_curr[i + 1]), 1e-300});
            if (std::abs(diff) < 1e-14 * scale) {
                // Estimates converged to roundoff (even source column) or the
                // auxiliary table broke down; either way, stop deepening.
                if (source_is_even) return e_curr[i + 1];
                return best;
            }
            e_next[i] = e_prev[i + 1] + 1.0 / diff;
        }
        if (k % 2 == 0 && !e_next.empty()) {
            double candidate = e_next.back();
            if (std::abs(candidate) > 10.0 * sum_scale + 1e3) return best;  // pollution
            double err = std::abs(candidate - prev_even);
            if (err < best_err) {
                best_err = err;
                best = candidate;
            }
            prev_even = candidate;
        }
        e_prev = std::move(e_curr);
        e_curr = std::move(e_next);
        if (e_curr.size() < 2) break;
    }
    return best;
}

// Neville extrapolation of (x_i, y_i) to x = 0.
inline double neville_at_zero(const std::vector<double>& x, std::vector<double> y,
                              double* last_step = nullptr) {
    const std::size_t n = x.size();
    double prev = y.empty() ? 0.0 : y[0];
    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t i = 0; i + k < n; ++i) {
            y[i] = (x[i + k] * y[i] - x[i] * y[i + 1]) / (x[i + k] - x[i]);
        }
        if (last_step && k == n - 1) *last_step = std::abs(y[0] - prev);
        prev = y[0];
    }
    return y.empty() ? 0.0 : y[0];
}

}  // namespace detail

struct AbelResult {
    double value = 0.0;
    double spread = 0.0;  // |difference of the last two extrapolants|
};

// Abel-regularized oscillatory tail \lim_{eta->0+} \int_a^inf f(x) e^{-eta (x-a)} dx.
// Panels of half an oscillation period share integrand evaluations across all
// damping levels; per level, slowly converging alternating panel sums are
// finished with Wynn's epsilon algorithm.
template <typename F>
AbelResult abel_tail(F&& f, double a, double osc_scale, const AbelOptions& opts = {}) {
    const double freq = std::max(std::abs(osc_scale), 1e-3);
    const double width = kPi / freq;

    std::vector<double> etas = opts.etas;
    std::sort(etas.begin(), etas.end(), std::greater<double>());

    auto damped_sum = [&](double eta) -> double {
        double sum = 0.0;
        double scale = 0.0;
        std::vector<double> partials;
        partials.reserve(opts.wynn_window);
        std::size_t k = 0;
        for (; k < opts.max_panels; ++k) {
            double lo = a + k * width;
            double hi = lo + width;
            auto panel = gk15<double>(
                [&](double x) { return f(x) * std::exp(-eta * (x - a)); }, lo, hi);
            sum += panel.value;
            scale = std::max({scale, std::abs(sum), panel.resabs});
            bool decayed = std::abs(panel.value) <= opts.panel_tol * std::max(scale, 1e-30);
            if (decayed && k > 4) return sum;
            // Once the damped envelope clearly decays, hand the remainder to
            // the epsilon algorithm instead of walking out to e^{-40}.
            if (k * width * eta > 6.0) {
                partials.clear();
                double s = sum;
                for (std::size_t m = 0; m < opts.wynn_window; ++m) {
                    double plo = a + (k + 1 + m) * width;
                    auto p = gk15<double>(
                        [&](double x) { return f(x) * std::exp(-eta * (x - a)); }, plo,
                        plo + width);
                    s += p.value;
                    partials.push_back(s);
                }
                return detail::wynn_epsilon(partials);
            }
        }
        raise(errc::divergent_integral, "oscillatory tail did not settle");
    };

    std::vector<double> vals;
    vals.reserve(etas.size() + opts.max_extra_levels);
    for (double eta : etas) vals.push_back(damped_sum(eta));

    double spread = 0.0;
    double value = detail::neville_at_zero(etas, vals, &spread);
    int extra = 0;
    while (spread > opts.refine_tol && extra < opts.max_extra_levels) {
        etas.push_back(etas.back() * 0.5);
        vals.push_back(damped_sum(etas.back()));
        value = detail::neville_at_zero(etas, vals, &spread);
        ++extra;
    }
    if (!std::isfinite(value) || spread > opts.fail_tol) {
        raise(errc::regularization_failure,
              "Abel extrapolants did not converge (spread " + std::to_string(spread) + ")");
    }
    return {value, spread};
}

}  // namespace qtl::quad
