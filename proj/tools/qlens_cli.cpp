// Command-line front end: parse system description files, run the analyses
// and print deterministic reports.
//
// Exit codes: 0 success, 1 domain failure (validation, hypothesis,
// ill-posed loop), 2 parse or usage error.

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qlens/bae.hpp"
#include "qlens/description.hpp"
#include "qlens/feedback.hpp"
#include "qlens/kalman.hpp"
#include "qlens/qnd.hpp"
#include "qlens/report.hpp"
#include "qlens/simulate.hpp"
#include "qlens/transfer.hpp"

namespace {

using namespace qlens;

struct GlobalOpts {
    double tol = 1e-8;
    std::uint64_t seed = 1;
    std::string format = "text";
};

DocumentFormat doc_format(const GlobalOpts& g) {
    return g.format == "structured" ? DocumentFormat::Structured : DocumentFormat::Text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void put_input_section(Document& doc, const std::string& path, const std::string& bytes,
                       const SystemDescription& desc) {
    doc.section("input");
    doc.put("path", path);
    doc.put("hash", "fnv1a:" + fnv1a_hex(bytes));
    doc.put("name", desc.name);
    if (desc.system) {
        doc.put_count("modes", desc.system->num_modes());
        doc.put_count("channels", desc.system->num_channels());
    }
}

const SystemParams& need_system(const SystemDescription& desc) {
    if (!desc.system)
        throw ParseError("document: this command needs the system section (S, C_minus, ...)");
    return *desc.system;
}

std::string selector_name(BlockSelector sel) {
    return std::string(to_string(sel.output)) + "_out<-" + to_string(sel.input) + "_in";
}

void put_certificate(Document& doc, const std::string& prefix, const ZeroBlockCertificate& cert) {
    doc.put(prefix + ".block", selector_name(cert.selector));
    doc.put(prefix + ".verdict", cert.verdict);
    doc.put(prefix + ".max_residual", cert.max_residual);
    doc.put(prefix + ".tolerance", cert.tolerance);
    doc.put_count(prefix + ".horizon", cert.horizon);
    doc.put(prefix + ".sampled_max", cert.sampled_max);
}

void put_bae_report(Document& doc, const BAEReport& report) {
    doc.section("profile");
    doc.put("scattering_class", to_string(report.profile.s_class));
    doc.put("coupling_class", to_string(report.profile.c_class));
    doc.put("hamiltonian_class", to_string(report.profile.omega_class));
    doc.put("re_omega_relation", to_string(report.profile.re_omega_relation));
    doc.put("coupling_pattern", to_string(report.profile.coupling_pattern));

    doc.section("predictions");
    doc.put_count("count", static_cast<long long>(report.predictions.size()));
    for (std::size_t i = 0; i < report.predictions.size(); ++i) {
        const auto& p = report.predictions[i];
        const std::string key = "prediction[" + std::to_string(i) + "]";
        doc.put(key + ".block", selector_name(p.selector));
        doc.put(key + ".citation", p.citation);
    }

    doc.section("certificates");
    for (std::size_t i = 0; i < report.verifications.size(); ++i)
        put_certificate(doc, "certificate[" + std::to_string(i) + "]", report.verifications[i]);
    doc.put("confirmed", report.confirmed());

    if (!report.qnd_flags.empty()) {
        doc.section("qnd_flags");
        for (std::size_t i = 0; i < report.qnd_flags.size(); ++i) {
            const std::string key = "flag[" + std::to_string(i) + "]";
            doc.put(key + ".variable", report.qnd_flags[i].variable);
            doc.put(key + ".observable", report.qnd_flags[i].observable);
            doc.put(key + ".detail", report.qnd_flags[i].detail);
        }
    }
}

int cmd_validate(const std::string& path, bool tol_given, const GlobalOpts& g) {
    const std::string bytes = slurp(path);
    const SystemDescription desc = parse_description(bytes);
    const auto report = tol_given ? validate(need_system(desc), g.tol)
                                  : validate(need_system(desc));
    for (const auto& v : report)
        std::cout << v.field << ": " << v.what << " (residual " << format_float(v.residual)
                  << ")\n";
    if (report.empty()) std::cout << "ok\n";
    return report.empty() ? 0 : 1;
}

int cmd_analyze(const std::string& path, bool bae_only, bool qnd_only, bool kalman_only,
                const GlobalOpts& g) {
    const std::string bytes = slurp(path);
    const SystemDescription desc = parse_description(bytes);
    const SystemParams& params = need_system(desc);
    require_valid(params);

    const bool all = !bae_only && !qnd_only && !kalman_only;
    Document doc;
    put_input_section(doc, path, bytes, desc);

    doc.section("validation");
    doc.put("ok", true);

    if (all || bae_only) put_bae_report(doc, analyze(params, g.tol));

    if (all || qnd_only) {
        doc.section("qnd");
        const auto comm = commutator_lh(params);
        doc.put("interaction", is_qnd_interaction(params));
        doc.put("interaction_residual", comm.max_residual());
        if (params.num_channels() == 1) doc.put("siso_g", siso_g(params));
        const auto vars = qnd_characterize(params);
        doc.put_count("variables", static_cast<long long>(vars.size()));
        for (std::size_t i = 0; i < vars.size(); ++i) {
            const std::string key = "variable[" + std::to_string(i) + "]";
            const char* target = vars[i].target == QNDVariableReport::Target::Q   ? "q"
                                 : vars[i].target == QNDVariableReport::Target::P ? "p"
                                                                                  : "combination";
            doc.put(key + ".target", target);
            doc.put_vector(key + ".coefficients", vars[i].coefficients);
            doc.put(key + ".uncontrollable", vars[i].uncontrollable);
            doc.put(key + ".observable", vars[i].observable);
            doc.put(key + ".is_qnd", vars[i].is_qnd);
        }
    }

    if (all || kalman_only) {
        doc.section("kalman");
        const auto dims = subsystem_dimensions(quadrature_realization(params));
        doc.put_count("n_co", dims.n_co);
        doc.put_count("n_isolated", dims.n_isolated);
        doc.put_count("n_paired", dims.n_paired);
    }

    std::cout << doc.render(doc_format(g));
    return 0;
}

int cmd_transfer(const std::string& path, const std::vector<std::string>& s_values,
                 const GlobalOpts& g) {
    const std::string bytes = slurp(path);
    const SystemDescription desc = parse_description(bytes);
    const QuadratureRealization r = quadrature_realization(need_system(desc));

    Document doc;
    put_input_section(doc, path, bytes, desc);
    std::vector<Complex> points;
    for (const auto& text : s_values) {
        std::istringstream in(text);
        double re = 0.0, im = 0.0;
        char sep = 0;
        in >> re;
        if (in.fail()) throw ParseError("--s: expected RE or RE,IM, got '" + text + "'");
        if (in >> sep && sep == ',') in >> im;
        points.emplace_back(re, im);
    }
    if (points.empty()) points.emplace_back(1.0, 0.0);

    doc.section("transfer");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string key = "G[s=" + format_float(points[i].real()) + "+" +
                                format_float(points[i].imag()) + "i]";
        doc.put_matrix(key, evaluate(r, points[i]));
    }
    std::cout << doc.render(doc_format(g));
    return 0;
}

Quad parse_quad(const std::string& text, const char* what) {
    if (text == "q") return Quad::Q;
    if (text == "p") return Quad::P;
    throw ParseError(std::string(what) + ": expected 'q' or 'p', got '" + text + "'");
}

int cmd_certify(const std::string& path, const std::string& out_block, const std::string& in_block,
                const GlobalOpts& g) {
    const std::string bytes = slurp(path);
    const SystemDescription desc = parse_description(bytes);
    const QuadratureRealization r = quadrature_realization(need_system(desc));
    const BlockSelector sel{parse_quad(out_block, "--output"), parse_quad(in_block, "--input")};
    const auto cert = certify_zero_block(r, sel, g.tol);

    Document doc;
    put_input_section(doc, path, bytes, desc);
    doc.section("certificate");
    put_certificate(doc, "certificate", cert);
    std::cout << doc.render(doc_format(g));
    return cert.verdict ? 0 : 1;
}

int cmd_kalman(const std::string& path, const GlobalOpts& g) {
    const std::string bytes = slurp(path);
    const SystemDescription desc = parse_description(bytes);

    Document doc;
    put_input_section(doc, path, bytes, desc);

    if (desc.partition) {
        const auto& spec = *desc.partition;
        const auto partition =
            make_partition(spec.n_co, spec.n_isolated, spec.n_paired,
                           desc.system ? desc.system->num_channels() : spec.b.cols() / 2, spec.a,
                           spec.b, spec.c);
        const auto verdict = verify_kalman_form(partition);
        doc.section("canonical_form");
        doc.put("valid", verdict.valid);
        for (const auto& res : verdict.residuals)
            doc.put("residual." + res.block, res.residual);

        const auto criteria = kalman_bae_criteria(partition.c_co(), partition.b_co());
        doc.section("bae_criteria");
        doc.put("q_wrt_p", criteria.q_wrt_p);
        doc.put("q_wrt_p_residual", criteria.q_wrt_p_residual);
        doc.put("p_wrt_q", criteria.p_wrt_q);
        doc.put("p_wrt_q_residual", criteria.p_wrt_q_residual);
        doc.put("re_gamma_symmetry_residual", criteria.re_gamma_symmetry_residual);
        doc.put("im_gamma_symmetry_residual", criteria.im_gamma_symmetry_residual);
        doc.put("re_gamma_product_symmetry_residual",
                criteria.re_gamma_product_symmetry_residual);
        std::cout << doc.render(doc_format(g));
        return verdict.valid ? 0 : 1;
    }

    const auto dims = subsystem_dimensions(quadrature_realization(need_system(desc)));
    doc.section("subsystems");
    doc.put_count("n_co", dims.n_co);
    doc.put_count("n_isolated", dims.n_isolated);
    doc.put_count("n_paired", dims.n_paired);
    std::cout << doc.render(doc_format(g));
    return 0;
}

int cmd_compose(const std::string& plant_path, const std::string& bs_path,
                const std::string& out_path, const GlobalOpts& g) {
    const SystemDescription plant_desc = parse_description(slurp(plant_path));
    const SystemDescription bs_desc = parse_description(slurp(bs_path));
    if (!plant_desc.plant) throw ParseError(plant_path + ": missing plant section");
    if (!bs_desc.beamsplitter) throw ParseError(bs_path + ": missing beamsplitter section");

    const SystemParams reduced = reduce_network(*plant_desc.plant, *bs_desc.beamsplitter);
    SystemDescription out;
    out.name = plant_desc.name.empty() ? "reduced" : plant_desc.name + "_reduced";
    out.system = reduced;
    save_description(out, out_path);

    Document doc;
    doc.section("compose");
    doc.put("plant", plant_path);
    doc.put("beamsplitter", bs_path);
    doc.put("output", out_path);
    doc.put("re_omega_minus_norm", max_abs(RealMatrix(reduced.omega_minus.real())));
    doc.put("re_omega_plus_norm", max_abs(RealMatrix(reduced.omega_plus.real())));
    doc.put("coupling_class",
            to_string(classify(doubled_up(reduced.coupling_minus, reduced.coupling_plus).full())));
    std::cout << doc.render(doc_format(g));
    return 0;
}

int cmd_optomech(const std::string& path, const GlobalOpts& g) {
    const std::string bytes = slurp(path);
    const SystemDescription desc = parse_description(bytes);
    if (!desc.optomech) throw ParseError(path + ": missing optomech section");
    const auto report = optomech_qnd_report(*desc.optomech);
    const auto r = build_optomech(*desc.optomech);
    const auto dims = subsystem_dimensions(r.A, r.B, r.C);

    Document doc;
    put_input_section(doc, path, bytes, desc);
    doc.section("optomech");
    doc.put_vector("combination", report.combination);
    doc.put("uncontrollable", report.flags.uncontrollable);
    doc.put("controllability_residual", report.flags.controllability_residual);
    doc.put("observable", report.flags.observable);
    doc.put("is_qnd", report.flags.is_qnd);
    if (report.conjugate_partner) doc.put_vector("conjugate_partner", *report.conjugate_partner);
    doc.put("mode1_is_qnd", report.mode1.is_qnd);
    doc.put("mode2_is_qnd", report.mode2.is_qnd);
    doc.section("subsystems");
    doc.put_count("n_co", dims.n_co);
    doc.put_count("n_isolated", dims.n_isolated);
    doc.put_count("n_paired", dims.n_paired);
    std::cout << doc.render(doc_format(g));
    return 0;
}

RealMatrix gaussian_pulse(int steps, double dt, Eigen::Index channels) {
    RealMatrix signal(steps + 1, channels);
    const double horizon = steps * dt;
    const double center = 0.25 * horizon;
    const double width = 0.05 * horizon;
    for (int k = 0; k <= steps; ++k) {
        const double t = k * dt;
        const double v = std::exp(-0.5 * std::pow((t - center) / width, 2));
        signal.row(k).setConstant(v);
    }
    return signal;
}

int cmd_simulate(const std::string& path, bool martingale, const std::string& inject,
                 bool seed_given, const GlobalOpts& g) {
    const std::string bytes = slurp(path);
    const SystemDescription desc = parse_description(bytes);
    const SystemParams& params = need_system(desc);
    const QuadratureRealization r = quadrature_realization(params);

    SimConfig cfg;
    if (desc.sim) {
        cfg.dt = desc.sim->dt;
        cfg.horizon = desc.sim->horizon;
        cfg.seed = desc.sim->seed;
        cfg.ensemble = desc.sim->ensemble;
    }
    if (seed_given) cfg.seed = g.seed;

    Document doc;
    put_input_section(doc, path, bytes, desc);
    const auto grid = resolve_grid(r, cfg);
    doc.section("config");
    doc.put("dt", grid.dt);
    doc.put("horizon", cfg.horizon);
    doc.put_count("steps", grid.steps);
    doc.put_count("seed", static_cast<long long>(cfg.seed));
    doc.put_count("ensemble", cfg.ensemble);

    if (!inject.empty()) {
        const auto colon = inject.find(':');
        if (colon == std::string::npos)
            throw ParseError("--inject: expected IN:OUT, e.g. p:q");
        const Quad in_block = parse_quad(inject.substr(0, colon), "--inject");
        const Quad out_block = parse_quad(inject.substr(colon + 1), "--inject");
        const RealMatrix signal = gaussian_pulse(grid.steps, grid.dt, r.num_channels());
        const double deviation = injection_bae_test(r, in_block, out_block, signal, cfg);
        doc.section("injection");
        doc.put("in_block", to_string(in_block));
        doc.put("out_block", to_string(out_block));
        doc.put("max_deviation", deviation);
    }

    if (martingale) {
        const auto rep = martingale_check(params, cfg);
        doc.section("martingale");
        doc.put("pass", rep.pass);
        for (std::size_t i = 0; i < rep.channels.size(); ++i) {
            const std::string key = "channel[" + std::to_string(i) + "]";
            doc.put(key + ".initial_mean", rep.channels[i].initial_mean);
            doc.put(key + ".final_mean", rep.channels[i].final_mean);
            doc.put(key + ".standard_error", rep.channels[i].standard_error);
            doc.put(key + ".zscore", rep.channels[i].zscore);
        }
    }

    const auto records = stochastic_trajectories(r, cfg);
    const auto filtered = gaussian_filter(r, records, cfg);
    const auto whiteness = innovation_whiteness(filtered);
    doc.section("filter");
    doc.put("min_uncertainty_eig", filtered.min_uncertainty_eig);
    doc.put("uncertainty_ok", filtered.uncertainty_ok);
    doc.put("innovation_mean_sigma", whiteness.max_mean_sigma);
    doc.put("innovation_var_dev_sigma", whiteness.max_var_dev_sigma);
    doc.put("innovation_autocorr_sigma", whiteness.max_autocorr_sigma);
    doc.put("innovations_white", whiteness.pass);

    std::cout << doc.render(doc_format(g));

    // ensemble-mean output records, columnar
    const Eigen::Index m = r.num_channels();
    std::cout << "# time";
    for (Eigen::Index c = 0; c < m; ++c) std::cout << " q_out" << (c + 1);
    for (Eigen::Index c = 0; c < m; ++c) std::cout << " p_out" << (c + 1);
    std::cout << "\n";
    for (Eigen::Index k = 0; k < records.times.size(); ++k) {
        RealVector mean = RealVector::Zero(2 * m);
        for (const auto& y : records.outputs) mean += y.row(k).transpose();
        mean /= static_cast<double>(records.outputs.size());
        std::cout << format_float(records.times(k));
        for (Eigen::Index c = 0; c < 2 * m; ++c) std::cout << " " << format_float(mean(c));
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"linear quantum system analysis: structural back-action evasion certificates, "
                 "non-demolition tests, coherent feedback composition and stochastic validation"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    auto* tol_opt = app.add_option("--tol", g.tol, "certificate/test tolerance");
    tol_opt->capture_default_str();
    auto* seed_opt = app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--format", g.format, "output format")
        ->check(CLI::IsMember({"text", "structured"}))
        ->capture_default_str();

    std::string path, bs_path, out_path;
    std::string out_block = "q", in_block = "p", inject;
    bool flag_bae = false, flag_qnd = false, flag_kalman = false, flag_martingale = false;
    std::vector<std::string> s_values;

    auto* validate_cmd = app.add_subcommand("validate", "check a system description file");
    validate_cmd->add_option("file", path)->required();

    auto* analyze_cmd = app.add_subcommand("analyze", "full structural analysis");
    analyze_cmd->add_option("file", path)->required();
    analyze_cmd->add_flag("--bae", flag_bae, "only the evasion analysis");
    analyze_cmd->add_flag("--qnd", flag_qnd, "only the non-demolition analysis");
    analyze_cmd->add_flag("--kalman", flag_kalman, "only the subsystem dimensions");

    auto* transfer_cmd = app.add_subcommand("transfer", "evaluate the transfer matrix");
    transfer_cmd->add_option("file", path)->required();
    transfer_cmd->add_option("--s", s_values, "evaluation points RE or RE,IM");

    auto* certify_cmd = app.add_subcommand("certify", "zero-block certificate for one block");
    certify_cmd->add_option("file", path)->required();
    certify_cmd->add_option("--output", out_block, "output quadrature (q|p)");
    certify_cmd->add_option("--input", in_block, "input quadrature (q|p)");

    auto* kalman_cmd = app.add_subcommand("kalman", "subsystem dimensions or partition checks");
    kalman_cmd->add_option("file", path)->required();

    auto* compose_cmd = app.add_subcommand("compose", "close a beamsplitter feedback loop");
    compose_cmd->add_option("plant", path)->required();
    compose_cmd->add_option("beamsplitter", bs_path)->required();
    compose_cmd->add_option("output", out_path)->required();

    auto* optomech_cmd = app.add_subcommand("optomech", "optomechanical QND construction");
    optomech_cmd->add_option("file", path)->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "stochastic time-domain validation");
    simulate_cmd->add_option("file", path)->required();
    simulate_cmd->add_flag("--martingale", flag_martingale, "conditional-mean drift test");
    simulate_cmd->add_option("--inject", inject, "signal injection IN:OUT, e.g. p:q");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(path, tol_opt->count() > 0, g);
        if (analyze_cmd->parsed()) return cmd_analyze(path, flag_bae, flag_qnd, flag_kalman, g);
        if (transfer_cmd->parsed()) return cmd_transfer(path, s_values, g);
        if (certify_cmd->parsed()) return cmd_certify(path, out_block, in_block, g);
        if (kalman_cmd->parsed()) return cmd_kalman(path, g);
        if (compose_cmd->parsed()) return cmd_compose(path, bs_path, out_path, g);
        if (optomech_cmd->parsed()) return cmd_optomech(path, g);
        if (simulate_cmd->parsed())
            return cmd_simulate(path, flag_martingale, inject, seed_opt->count() > 0, g);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
