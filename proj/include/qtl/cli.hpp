// cli.hpp — Command dispatch for the `qtl` binary. Pure functions over the
// config file; every run with identical inputs emits byte-identical files.

#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtl/commutators.hpp"
#include "qtl/freq_response.hpp"
#include "qtl/io.hpp"
#include "qtl/markov.hpp"
#include "qtl/timedomain.hpp"

namespace qtl::cli {

namespace detail {

inline void write_output(const std::string& path, const std::string& content,
                         std::ostream& fallback) {
    if (path.empty()) {
        fallback << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(errc::parse_error, "cannot open output file '" + path + "'");
    out << content;
}

inline std::string table_to_json(const std::vector<std::string>& header,
                                 const std::vector<std::vector<double>>& rows) {
    io::json j;
    j["header"] = header;
    io::json out_rows = io::json::array();
    for (const auto& r : rows) out_rows.push_back(r);
    j["rows"] = std::move(out_rows);
    return j.dump() + "\n";
}

inline Vector parse_vector_flag(const std::string& csv, int n, const char* what) {
    if (csv.empty()) raise(errc::parse_error, std::string(what) + " is empty");
    Vector v(n);
    std::stringstream ss(csv);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',')) {
        if (i >= n) raise(errc::parse_error, std::string(what) + " has too many entries");
        v(i++) = std::stod(item);
    }
    if (i != n) raise(errc::parse_error, std::string(what) + " needs " + std::to_string(n) +
                                             " entries");
    return v;
}

inline io::json verdict_to_json(const freq::LbrVerdict& v) {
    io::json j;
    j["verdict"] = v.ok();
    j["analytic_ok"] = v.analytic_ok;
    j["contractive_ok"] = v.contractive_ok;
    j["boundary_lossless_ok"] = v.boundary_lossless_ok;
    j["worst_point"] = io::complex_to_json(v.worst_point);
    j["worst_value"] = v.worst_value;
    j["certificate"] = v.certificate_kind == freq::CertificateKind::rational_exact
                           ? "rational-exact"
                           : "sampled";
    return j;
}

inline io::json markov_to_json(const markov::MarkovModel& model) {
    io::json j;
    j["omegas"] = model.omegas;
    j["Y"] = io::matrix_to_json(model.y);
    io::json channels = io::json::array();
    for (const auto& ch : model.channels) {
        channels.push_back(io::json{
            {"line", ch.line}, {"omega", ch.omega}, {"ito_weight", ch.ito_weight}});
    }
    j["channels"] = std::move(channels);
    j["kappa"] = io::complex_matrix_to_json(model.kappa);
    j["generator"] = io::complex_matrix_to_json(model.generator);
    j["A"] = io::complex_matrix_to_json(model.a_mat);
    j["B"] = io::complex_matrix_to_json(model.b_mat);
    j["C"] = io::complex_matrix_to_json(model.c_mat);
    j["gammas"] = model.gammas;
    j["epsilons"] = model.epsilons;
    return j;
}

}  // namespace detail

struct StreamSet {
    std::ostream* out = &std::cout;
    std::ostream* err = &std::cerr;
};

inline int run(const std::vector<std::string>& args, StreamSet streams = {}) {
    CLI::App app{"Quantum transmission-line circuit analysis"};
    app.require_subcommand(1);

    std::string config_path, out_path, format = "csv", verify_path, q0_csv, i0_csv;
    double omega_min = 0.0, omega_max = 10.0, t_max = 20.0, dt = 1e-3, tol = 1e-8;
    double freq_tol = 1e-9;
    int steps = 200;

    auto add_config = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "circuit config JSON")->required();
    };

    auto* c_validate = app.add_subcommand("validate", "validate a circuit config");
    add_config(c_validate);

    auto* c_freq = app.add_subcommand("freq", "scattering G(omega) sweep");
    add_config(c_freq);
    c_freq->add_option("--omega-min", omega_min, "grid start")->capture_default_str();
    c_freq->add_option("--omega-max", omega_max, "grid end")->capture_default_str();
    c_freq->add_option("--steps", steps, "grid points")->capture_default_str();
    c_freq->add_option("--out", out_path, "output path (default stdout)");
    c_freq->add_option("--format", format, "csv or json")->capture_default_str();

    auto* c_lbr = app.add_subcommand("check-lbr", "lossless bounded-real certification");
    add_config(c_lbr);
    c_lbr->add_option("--tol", tol, "certification tolerance")->capture_default_str();
    c_lbr->add_option("--out", out_path, "JSON detail path (default stdout)");

    auto* c_kernel = app.add_subcommand("kernel", "memory kernel and sigma samples");
    add_config(c_kernel);
    c_kernel->add_option("--t-max", t_max, "sample horizon")->capture_default_str();
    c_kernel->add_option("--dt", dt, "sample step")->capture_default_str();
    c_kernel->add_option("--out", out_path, "output path (default stdout)");
    c_kernel->add_option("--format", format, "csv or json")->capture_default_str();

    auto* c_sim = app.add_subcommand("simulate", "time-domain trajectory");
    add_config(c_sim);
    c_sim->add_option("--t-max", t_max, "integration horizon")->capture_default_str();
    c_sim->add_option("--dt", dt, "integration step")->capture_default_str();
    c_sim->add_option("--q0", q0_csv, "initial charges, comma separated (default all 1)");
    c_sim->add_option("--i0", i0_csv, "initial currents, comma separated (default all 0)");
    c_sim->add_option("--out", out_path, "output path (default stdout)");
    c_sim->add_option("--format", format, "csv or json")->capture_default_str();

    auto* c_markov = app.add_subcommand("markov", "weak-coupling A-B-C reduction");
    add_config(c_markov);
    c_markov->add_option("--freq-tol", freq_tol, "mode frequency comparator")
        ->capture_default_str();
    c_markov->add_option("--out", out_path, "output path (default stdout)");
    c_markov->add_option("--verify", verify_path,
                         "re-ingest a previous markov JSON and require exact equality");

    std::vector<const char*> argv;
    argv.push_back("qtl");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, *streams.out, *streams.err);
    }

    try {
        auto spec = io::load_config(config_path);

        if (c_validate->parsed()) {
            *streams.out << "OK\n";
            return 0;
        }

        if (c_freq->parsed()) {
            if (steps < 1) raise(errc::parse_error, "--steps must be >= 1");
            std::vector<std::string> header{"omega"};
            for (int j = 0; j < spec.n; ++j)
                for (int k = 0; k < spec.n; ++k) {
                    header.push_back("reG_" + std::to_string(j + 1) + "_" + std::to_string(k + 1));
                    header.push_back("imG_" + std::to_string(j + 1) + "_" + std::to_string(k + 1));
                }
            header.push_back("unitarity_residual");

            std::vector<std::vector<double>> rows(steps);
            std::vector<std::string> failures(steps);
            parallel_for(static_cast<std::size_t>(steps), [&](std::size_t i) {
                double w = steps == 1 ? omega_min
                                      : omega_min + (omega_max - omega_min) * i / (steps - 1.0);
                try {
                    ComplexMatrix g = freq::scattering_G(spec, w);
                    std::vector<double> row{w};
                    for (int j = 0; j < spec.n; ++j)
                        for (int k = 0; k < spec.n; ++k) {
                            row.push_back(g(j, k).real());
                            row.push_back(g(j, k).imag());
                        }
                    ComplexMatrix defect =
                        g.adjoint() * g - ComplexMatrix::Identity(spec.n, spec.n);
                    row.push_back(defect.cwiseAbs().maxCoeff());
                    rows[i] = std::move(row);
                } catch (const std::exception& e) {
                    failures[i] = e.what();
                }
            });
            for (const auto& f : failures)
                if (!f.empty()) raise(errc::evaluation_failure, f);

            if (format == "json") {
                detail::write_output(out_path, detail::table_to_json(header, rows),
                                     *streams.out);
            } else {
                io::CsvWriter csv(header);
                for (auto& r : rows) csv.add_row(r);
                detail::write_output(out_path, csv.str(), *streams.out);
            }
            return 0;
        }

        if (c_lbr->parsed()) {
            auto s_transfer = freq::make_scattering_transfer(spec);
            auto sigma_transfer = freq::make_cayley_transfer(spec);
            auto lbr = freq::check_lbr(s_transfer, {}, tol);
            auto lpr = freq::check_lpr(sigma_transfer, {}, tol);

            io::json j;
            j["scattering_lbr"] = detail::verdict_to_json(lbr);
            j["kernel_immittance_lpr"] = detail::verdict_to_json(lpr);
            j["theorem_agree"] = (lbr.ok() == lpr.ok());

            bool sampled = lbr.certificate_kind == freq::CertificateKind::sampled;
            *streams.out << "LBR: " << (lbr.ok() ? "true" : "false")
                         << (sampled ? " (sampled)" : " (rational-exact)") << "\n";
            detail::write_output(out_path, j.dump() + "\n", *streams.out);
            if (!lbr.ok()) return 1;
            return sampled ? 2 : 0;
        }

        if (c_kernel->parsed()) {
            auto samples = spectral::kernel_samples(spec.lines, dt, t_max);
            std::vector<std::string> header{"t"};
            for (int k = 0; k < spec.n; ++k) header.push_back("Gamma_" + std::to_string(k + 1));
            for (int k = 0; k < spec.n; ++k) header.push_back("sigma_" + std::to_string(k + 1));

            std::vector<std::vector<double>> rows(samples.t.size());
            std::vector<std::string> failures(samples.t.size());
            parallel_for(samples.t.size(), [&](std::size_t i) {
                try {
                    std::vector<double> row{samples.t[i]};
                    for (int k = 0; k < spec.n; ++k) row.push_back(samples.values[k][i]);
                    for (int k = 0; k < spec.n; ++k)
                        row.push_back(spectral::commutator_sigma(spec.lines[k], samples.t[i]));
                    rows[i] = std::move(row);
                } catch (const std::exception& e) {
                    failures[i] = e.what();
                }
            });
            for (const auto& f : failures)
                if (!f.empty()) raise(errc::evaluation_failure, f);

            if (format == "json") {
                detail::write_output(out_path, detail::table_to_json(header, rows),
                                     *streams.out);
            } else {
                io::CsvWriter csv(header);
                for (auto& r : rows) csv.add_row(r);
                detail::write_output(out_path, csv.str(), *streams.out);
            }
            return 0;
        }

        if (c_sim->parsed()) {
            Vector q0 = q0_csv.empty() ? Vector::Ones(spec.n)
                                       : detail::parse_vector_flag(q0_csv, spec.n, "--q0");
            Vector i0 = i0_csv.empty() ? Vector::Zero(spec.n)
                                       : detail::parse_vector_flag(i0_csv, spec.n, "--i0");

            bool all_ohmic_equal = true;
            double r_common = 0.0;
            for (int k = 0; k < spec.n; ++k) {
                const auto* o = std::get_if<spectral::Ohmic>(&spec.lines[k]);
                if (!o || (k > 0 && std::abs(o->r - r_common) > 0.0)) {
                    all_ohmic_equal = false;
                    break;
                }
                r_common = o->r;
            }

            timedomain::Trajectory traj;
            if (all_ohmic_equal)
                traj = timedomain::propagate_ohmic(spec, r_common, q0, i0, {}, dt, t_max);
            else
                traj = timedomain::simulate_memory(spec, q0, i0, {}, dt, t_max);

            std::vector<std::string> header{"t"};
            for (int j = 0; j < spec.n; ++j) header.push_back("q_" + std::to_string(j + 1));
            for (int j = 0; j < spec.n; ++j) header.push_back("i_" + std::to_string(j + 1));
            header.push_back("component_energy");

            std::vector<std::vector<double>> rows(traj.t.size());
            for (std::size_t i = 0; i < traj.t.size(); ++i) {
                std::vector<double> row{traj.t[i]};
                for (int j = 0; j < spec.n; ++j) row.push_back(traj.q(j, i));
                for (int j = 0; j < spec.n; ++j) row.push_back(traj.i(j, i));
                row.push_back(traj.component_energy[i]);
                rows[i] = std::move(row);
            }

            if (format == "json") {
                detail::write_output(out_path, detail::table_to_json(header, rows),
                                     *streams.out);
            } else {
                io::CsvWriter csv(header);
                for (auto& r : rows) csv.add_row(r);
                detail::write_output(out_path, csv.str(), *streams.out);
            }
            return 0;
        }

        if (c_markov->parsed()) {
            auto model = markov::build_markov(spec, freq_tol);
            io::json j = detail::markov_to_json(model);
            std::string payload = j.dump() + "\n";
            if (!verify_path.empty()) {
                std::ifstream prev(verify_path, std::ios::binary);
                if (!prev) raise(errc::parse_error, "cannot open '" + verify_path + "'");
                std::stringstream buf;
                buf << prev.rdbuf();
                if (buf.str() != payload) {
                    *streams.err << R"({"error":"ValidationError","message":"markov verify mismatch"})"
                                 << "\n";
                    return 1;
                }
                *streams.out << "VERIFIED\n";
                return 0;
            }
            detail::write_output(out_path, payload, *streams.out);
            return 0;
        }
    } catch (const error& e) {
        io::json err;
        err["error"] = errc_name(e.code());
        err["message"] = e.what();
        *streams.err << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        io::json err;
        err["error"] = "InternalError";
        err["message"] = e.what();
        *streams.err << err.dump() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace qtl::cli
