// common.hpp — Shared scalar/matrix aliases, error codes, and the sweep thread pool

#pragma once

#include <complex>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace qtl {

using Real = double;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Error taxonomy shared by all modules. The CLI maps these to machine-readable
// error objects, so the names are part of the external contract.
enum class errc {
    dimension_mismatch,
    not_symmetric,
    not_positive_definite,
    not_positive_semidefinite,
    bad_spectral_density,
    eigen_failure,
    zero_mode,
    divergent_integral,
    out_of_domain,
    singular_matrix,
    cayley_singular,
    evaluation_failure,
    regularization_failure,
    singular_at_zero,
    nonuniform_input,
    out_of_range,
    window_too_short,
    parse_error,
    validation_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::dimension_mismatch: return "DimensionMismatch";
        case errc::not_symmetric: return "NotSymmetric";
        case errc::not_positive_definite: return "NotPositiveDefinite";
        case errc::not_positive_semidefinite: return "NotPositiveSemidefinite";
        case errc::bad_spectral_density: return "BadSpectralDensity";
        case errc::eigen_failure: return "EigenFailure";
        case errc::zero_mode: return "ZeroMode";
        case errc::divergent_integral: return "DivergentIntegral";
        case errc::out_of_domain: return "OutOfDomain";
        case errc::singular_matrix: return "SingularMatrix";
        case errc::cayley_singular: return "CayleySingular";
        case errc::evaluation_failure: return "EvaluationFailure";
        case errc::regularization_failure: return "RegularizationFailure";
        case errc::singular_at_zero: return "SingularAtZero";
        case errc::nonuniform_input: return "NonuniformInput";
        case errc::out_of_range: return "OutOfRange";
        case errc::window_too_short: return "WindowTooShort";
        case errc::parse_error: return "ParseError";
        case errc::validation_error: return "ValidationError";
    }
    return "UnknownError";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& what) { throw error(code, what); }

// Thread budget for grid sweeps. QTL_THREADS caps it; unset means hardware
// concurrency. Results must not depend on the thread count.
inline unsigned sweep_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("QTL_THREADS")) {
        long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && static_cast<unsigned>(cap) < hw) return static_cast<unsigned>(cap);
        if (cap >= 1) return static_cast<unsigned>(cap);
    }
    return hw;
}

// Deterministic parallel map: workers fill disjoint index ranges, reductions
// happen sequentially in the caller.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    unsigned threads = sweep_threads();
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    if (threads > count) threads = static_cast<unsigned>(count);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace qtl
