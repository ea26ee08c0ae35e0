// spectral_density.hpp — Per-line bath spectral densities J(omega)

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "qtl/common.hpp"

namespace qtl::spectral {

// J(omega) = r * omega for all omega > 0 (memoryless friction).
struct Ohmic {
    double r = 1.0;
};

// J(omega) = r * omega * omega_c^2 / (omega^2 + omega_c^2).
struct Drude {
    double r = 1.0;
    double omega_c = 1.0;
};

// J(omega) = r * omega on (0, omega_c], zero above the cutoff.
struct CutoffOhmic {
    double r = 1.0;
    double omega_c = 1.0;
};

// Piecewise-linear J on an ascending grid, zero outside the grid support.
struct Tabulated {
    std::vector<double> omega;
    std::vector<double> value;
};

using SpectralDensity = std::variant<Ohmic, Drude, CutoffOhmic, Tabulated>;

inline void validate_density(const SpectralDensity& sd) {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v))
            raise(errc::bad_spectral_density, std::string(what) + " must be positive");
    };
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Ohmic>) {
                positive(d.r, "ohmic R");
            } else if constexpr (std::is_same_v<T, Drude>) {
                positive(d.r, "drude R");
                positive(d.omega_c, "drude omega_c");
            } else if constexpr (std::is_same_v<T, CutoffOhmic>) {
                positive(d.r, "cutoff-ohmic R");
                positive(d.omega_c, "cutoff-ohmic omega_c");
            } else {
                if (d.omega.size() != d.value.size() || d.omega.size() < 2)
                    raise(errc::bad_spectral_density, "tabulated grids must match, length >= 2");
                for (std::size_t i = 0; i < d.omega.size(); ++i) {
                    if (!std::isfinite(d.omega[i]) || !std::isfinite(d.value[i]))
                        raise(errc::bad_spectral_density, "tabulated entries must be finite");
                    if (d.omega[i] < 0.0)
                        raise(errc::bad_spectral_density, "tabulated grid must be nonnegative");
                    if (i > 0 && d.omega[i] <= d.omega[i - 1])
                        raise(errc::bad_spectral_density, "tabulated grid must ascend");
                    if (d.value[i] < 0.0)
                        raise(errc::bad_spectral_density, "tabulated J must be nonnegative");
                }
            }
        },
        sd);
}

// J(omega); zero for omega <= 0 and outside tabulated support.
inline double eval_J(const SpectralDensity& sd, double omega) {
    if (omega <= 0.0) return 0.0;
    return std::visit(
        [&](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Ohmic>) {
                return d.r * omega;
            } else if constexpr (std::is_same_v<T, Drude>) {
                double wc2 = d.omega_c * d.omega_c;
                return d.r * omega * wc2 / (omega * omega + wc2);
            } else if constexpr (std::is_same_v<T, CutoffOhmic>) {
                return omega <= d.omega_c ? d.r * omega : 0.0;
            } else {
                if (omega < d.omega.front() || omega > d.omega.back()) return 0.0;
                auto it = std::upper_bound(d.omega.begin(), d.omega.end(), omega);
                std::size_t hi = std::min<std::size_t>(d.omega.size() - 1,
                                                       static_cast<std::size_t>(it - d.omega.begin()));
                if (hi == 0) return d.value.front();
                std::size_t lo = hi - 1;
                double t = (omega - d.omega[lo]) / (d.omega[hi] - d.omega[lo]);
                return d.value[lo] + t * (d.value[hi] - d.value[lo]);
            }
        },
        sd);
}

// Upper end of the support; +inf for densities without a cutoff.
inline double support_max(const SpectralDensity& sd) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, CutoffOhmic>) {
                return d.omega_c;
            } else if constexpr (std::is_same_v<T, Tabulated>) {
                return d.omega.back();
            } else {
                return std::numeric_limits<double>::infinity();
            }
        },
        sd);
}

// Slope of J at omega -> 0+, the ohmic-like IR coefficient.
inline double zero_frequency_slope(const SpectralDensity& sd) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Tabulated>) {
                if (d.omega.front() > 0.0) return 0.0;
                if (d.value.front() != 0.0) return std::numeric_limits<double>::infinity();
                return (d.value[1] - d.value[0]) / (d.omega[1] - d.omega[0]);
            } else {
                return d.r;
            }
        },
        sd);
}

inline bool is_identically_zero(const SpectralDensity& sd) {
    if (const auto* tab = std::get_if<Tabulated>(&sd)) {
        return std::all_of(tab->value.begin(), tab->value.end(),
                           [](double v) { return v == 0.0; });
    }
    return false;
}

inline std::string kind_name(const SpectralDensity& sd) {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Ohmic>) return "ohmic";
            if constexpr (std::is_same_v<T, Drude>) return "drude";
            if constexpr (std::is_same_v<T, CutoffOhmic>) return "cutoff_ohmic";
            return "tabulated";
        },
        sd);
}

}  // namespace qtl::spectral
