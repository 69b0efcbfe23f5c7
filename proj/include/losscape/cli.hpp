#pragma once

#include "losscape/config.hpp"
#include "losscape/gradcheck.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace losscape::cli {

// exit codes: 0 success with positive verdict, 1 usage or I/O error,
// 2 ran but verdict negative

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stoi(cell));
    return out;
}

/// --seed flag wins, then the config's seed list, then LOSSCAPE_SEED,
/// then 0.
inline std::vector<unsigned long> resolve_seeds(bool seed_given, unsigned long flag_seed,
                                                const std::vector<unsigned long>& config_seeds) {
    if (seed_given) return {flag_seed};
    if (!config_seeds.empty()) return config_seeds;
    if (const char* env = std::getenv("LOSSCAPE_SEED"))
        return {std::stoul(env)};
    return {0};
}

inline ExperimentConfig load_config(const std::string& path) {
    return parse_experiment_config(read_file(path));
}

inline std::filesystem::path out_path(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    return std::filesystem::path(dir) / name;
}

}  // namespace detail

struct CommonFlags {
    std::string config_path;
    unsigned long seed = 0;
    bool seed_given = false;
    std::string output_dir;
};

inline int cmd_grad_check(unsigned long seed, int configs) {
    const GradCheckResult res = run_grad_check_suite(seed, configs);
    for (const GradCheckCase& c : res.cases) {
        std::cout << "config L=" << c.arch.depth() << " N=" << c.samples << " act="
                  << c.arch.activation.name() << " loss="
                  << (c.loss.is_separable ? std::string("separable") : c.loss.regression.name())
                  << " rel_error=" << fmt_double(c.rel_error) << '\n';
    }
    std::cout << "max_rel_error=" << fmt_double(res.max_rel_error) << '\n';
    return res.max_rel_error <= 1e-5 ? 0 : 2;
}

inline int cmd_train(const ExperimentConfig& cfg, const std::vector<unsigned long>& seeds,
                     long max_iters, double init_scale) {
    const LabeledDataset data = load_dataset(cfg.dataset);
    if (!cfg.loss.is_separable && !targets_in_responsive_range(cfg.arch.activation, data.Y))
        std::cerr << "warning: targets leave the activation's responsive range; "
                     "the zero-loss reference may be unattainable\n";
    TrainConfig tcfg;
    tcfg.max_iters = max_iters;
    tcfg.eps_crit = cfg.tol.eps_crit;
    tcfg.init_scale = init_scale;
    const GradObjective f = make_grad_objective(cfg.arch, data, cfg.loss);
    bool all_converged = true;
    for (unsigned long seed : seeds) {
        std::mt19937_64 rng(seed);
        tcfg.seed = seed;
        const NetworkParams init = random_params(cfg.arch, tcfg.init_scale, rng);
        const TrainResult res = minimize(f, flatten(init), tcfg);
        const NetworkParams trained = unflatten(cfg.arch, res.theta);
        atomic_write_file(detail::out_path(cfg.output_dir,
                                           "params_seed" + std::to_string(seed) + ".json"),
                          params_to_json(cfg.arch, trained));
        atomic_write_file(detail::out_path(cfg.output_dir,
                                           "history_seed" + std::to_string(seed) + ".csv"),
                          history_to_csv(res.history));
        const double phi = res.history.empty() ? 0.0 : res.history.back().phi;
        std::cout << "seed=" << seed << " status=" << to_string(res.status)
                  << " grad_norm=" << fmt_double(res.grad_norm) << " phi=" << fmt_double(phi)
                  << '\n';
        all_converged = all_converged && res.status == TrainStatus::Converged;
    }
    return all_converged ? 0 : 2;
}

inline int cmd_certify(const ExperimentConfig& cfg, const std::string& params_path,
                       const std::string& theorem, const std::string& report_name) {
    const LabeledDataset data = load_dataset(cfg.dataset);
    auto [arch, params] = params_from_json(read_file(params_path));
    if (arch.widths != cfg.arch.widths)
        throw std::invalid_argument("certify: params widths do not match config");

    CertificationReport rep;
    if (theorem == "independent") {
        if (cfg.loss.is_separable)
            throw std::invalid_argument("certify: theorem independent needs a regression loss");
        rep = certify_independent_inputs(arch, params, data, cfg.loss.regression, cfg.tol);
    } else if (theorem == "main") {
        if (cfg.loss.is_separable)
            throw std::invalid_argument("certify: theorem main needs a regression loss");
        rep = certify_main(arch, params, data, cfg.loss.regression, cfg.k, cfg.subset, cfg.tol);
    } else if (theorem == "separable") {
        rep = certify_separable(arch, params, data, cfg.k, cfg.tol);
    } else {
        throw std::invalid_argument("certify: unknown theorem: " + theorem);
    }
    const std::string json = report_to_json(rep);
    atomic_write_file(detail::out_path(cfg.output_dir, report_name), json);
    std::cout << json << '\n';
    return rep.verdict == Verdict::CertifiedGlobalMinimum ? 0 : 2;
}

inline int cmd_construct(const ExperimentConfig& cfg, unsigned long seed) {
    const LabeledDataset data = load_dataset(cfg.dataset);
    std::mt19937_64 rng(seed);
    try {
        auto [params, trace] = construct_full_rank_net(data.X, cfg.arch, cfg.k, rng,
                                                       default_alpha_schedule(),
                                                       cfg.tol.rank_tol);
        Architecture truncated;
        truncated.widths.assign(cfg.arch.widths.begin(),
                                cfg.arch.widths.begin() + cfg.k + 1);
        truncated.activation = cfg.arch.activation;
        atomic_write_file(detail::out_path(cfg.output_dir, "constructed_params.json"),
                          params_to_json(truncated, params));
        atomic_write_file(detail::out_path(cfg.output_dir, "construction_trace.json"),
                          trace_to_json(trace));
        std::cout << "constructed rank " << trace.achieved_rank << " of " << data.samples()
                  << " at alpha=" << fmt_double(trace.alpha_final) << '\n';
        return 0;
    } catch (const ConstructionError& e) {
        std::cout << e.what() << '\n';
        return 2;
    }
}

inline int cmd_probe_rank(const ExperimentConfig& cfg, int trials, unsigned long seed,
                          double init_scale) {
    const LabeledDataset data = load_dataset(cfg.dataset);
    std::mt19937_64 rng(seed);
    const RankProbeResult res = rank_probe(cfg.arch, data.X, cfg.k, trials, init_scale, rng,
                                           cfg.tol.rank_tol);
    std::ostringstream csv;
    csv << "trial,rank\n";
    for (std::size_t t = 0; t < res.ranks.size(); ++t)
        csv << t << ',' << res.ranks[t] << '\n';
    atomic_write_file(detail::out_path(cfg.output_dir, "rank_probe_trials.csv"), csv.str());
    std::ostringstream summary;
    summary << "{\"trials\":" << trials << ",\"deficient\":" << res.deficient
            << ",\"fraction\":" << fmt_double(res.fraction) << ",\"seed\":" << seed << "}";
    atomic_write_file(detail::out_path(cfg.output_dir, "rank_probe_summary.json"),
                      summary.str());
    std::cout << summary.str() << '\n';
    return 0;
}

inline int cmd_audit_activation(const std::string& kind, double alpha, const std::string& mode,
                                const std::string& rho_csv, double T, int points) {
    ActivationKind act;
    if (kind == "sigmoid") act = ActivationKind::sigmoid();
    else if (kind == "tanh") act = ActivationKind::tanh();
    else if (kind == "softplus") act = ActivationKind::softplus(alpha);
    else throw std::invalid_argument("audit-activation: unknown kind: " + kind);

    ActivationAudit audit;
    if (mode == "bounded") {
        audit = audit_activation_bounded(act, T, points);
    } else if (mode == "growth") {
        std::vector<double> rho;
        std::stringstream ss(rho_csv);
        std::string cell;
        while (std::getline(ss, cell, ',')) rho.push_back(std::stod(cell));
        if (rho.size() != 4)
            throw std::invalid_argument("audit-activation: --rho needs four comma-separated values");
        audit = audit_activation_growth(act, {rho[0], rho[1], rho[2], rho[3]}, T, points);
    } else {
        throw std::invalid_argument("audit-activation: mode must be bounded or growth");
    }
    if (audit.pass) {
        std::cout << "pass\n";
        return 0;
    }
    std::cout << "fail at t=" << fmt_double(audit.violating_t) << " (" << audit.detail << ")\n";
    return 2;
}

inline int cmd_separability(const std::string& features_path) {
    const LabeledDataset data = load_dataset(features_path);
    if (!data.class_of)
        throw std::invalid_argument("separability: feature CSV must be in classification mode");
    const SeparabilityCertificate cert =
        check_separability(data.X, *data.class_of, data.output_dim());
    std::cout << "status=" << to_string(cert.status) << " method=" << cert.method
              << " min_margin=" << fmt_double(cert.min_margin) << '\n';
    return cert.status == SeparabilityStatus::Separable ? 0 : 2;
}

inline int run(int argc, const char* const* argv) {
    CLI::App app{"loss-surface certification toolkit"};
    app.require_subcommand(1);

    // grad-check
    auto* gc = app.add_subcommand("grad-check", "backpropagation vs finite differences");
    unsigned long gc_seed = 0;
    int gc_configs = 20;
    gc->add_option("--seed", gc_seed, "rng seed");
    gc->add_option("--configs", gc_configs, "number of random configurations");

    // train
    auto* tr = app.add_subcommand("train", "minimize the objective per config");
    std::string tr_config;
    unsigned long tr_seed = 0;
    long tr_max_iters = 50000;
    double tr_init_scale = 1.0;
    std::string tr_out;
    tr->add_option("--config", tr_config, "experiment config JSON")->required();
    auto* tr_seed_opt = tr->add_option("--seed", tr_seed, "override config seeds");
    tr->add_option("--max-iters", tr_max_iters, "iteration cap");
    tr->add_option("--init-scale", tr_init_scale, "initialization scale");
    tr->add_option("--out", tr_out, "override output directory");

    // certify
    auto* ce = app.add_subcommand("certify", "run a theorem certifier on saved parameters");
    std::string ce_config, ce_params, ce_theorem, ce_subset, ce_report = "report.json";
    int ce_k = -1;
    ce->add_option("--config", ce_config, "experiment config JSON")->required();
    ce->add_option("--params", ce_params, "params JSON file")->required();
    ce->add_option("--theorem", ce_theorem, "independent | main | separable")->required();
    ce->add_option("--k", ce_k, "wide layer index (override)");
    ce->add_option("--subset", ce_subset, "layer subset, e.g. 2,3 (override)");
    ce->add_option("--report", ce_report, "report file name");

    // construct
    auto* co = app.add_subcommand("construct", "wide-layer full-rank construction");
    std::string co_config, co_out;
    unsigned long co_seed = 0;
    int co_k = -1;
    co->add_option("--config", co_config, "experiment config JSON")->required();
    auto* co_seed_opt = co->add_option("--seed", co_seed, "rng seed");
    co->add_option("--k", co_k, "wide layer index (override)");
    co->add_option("--out", co_out, "override output directory");

    // probe-rank
    auto* pr = app.add_subcommand("probe-rank", "empirical measure-zero rank probe");
    std::string pr_config, pr_out;
    int pr_trials = 1000;
    unsigned long pr_seed = 0;
    double pr_init_scale = 1.0;
    pr->add_option("--config", pr_config, "experiment config JSON")->required();
    pr->add_option("--trials", pr_trials, "number of random draws");
    auto* pr_seed_opt = pr->add_option("--seed", pr_seed, "rng seed");
    pr->add_option("--init-scale", pr_init_scale, "parameter draw scale");
    pr->add_option("--out", pr_out, "override output directory");

    // audit-activation
    auto* au = app.add_subcommand("audit-activation", "assumption audit for an activation");
    std::string au_kind, au_mode = "bounded", au_rho;
    double au_alpha = 1.0, au_T = 50.0;
    int au_points = 10000;
    au->add_option("--activation", au_kind, "sigmoid | tanh | softplus")->required();
    au->add_option("--alpha", au_alpha, "softplus sharpness");
    au->add_option("--mode", au_mode, "bounded | growth");
    au->add_option("--rho", au_rho, "growth constants rho1,rho2,rho3,rho4");
    au->add_option("--T", au_T, "grid half-width");
    au->add_option("--points", au_points, "grid points");

    // separability
    auto* se = app.add_subcommand("separability", "linear separability certificate");
    std::string se_features;
    se->add_option("--features", se_features, "classification-mode CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (gc->parsed()) return cmd_grad_check(gc_seed, gc_configs);
        if (tr->parsed()) {
            ExperimentConfig cfg = detail::load_config(tr_config);
            if (!tr_out.empty()) cfg.output_dir = tr_out;
            const auto seeds = detail::resolve_seeds(!tr_seed_opt->empty(), tr_seed, cfg.seeds);
            return cmd_train(cfg, seeds, tr_max_iters, tr_init_scale);
        }
        if (ce->parsed()) {
            ExperimentConfig cfg = detail::load_config(ce_config);
            if (ce_k >= 0) cfg.k = ce_k;
            if (!ce_subset.empty()) cfg.subset = detail::parse_int_list(ce_subset);
            return cmd_certify(cfg, ce_params, ce_theorem, ce_report);
        }
        if (co->parsed()) {
            ExperimentConfig cfg = detail::load_config(co_config);
            if (co_k >= 0) cfg.k = co_k;
            if (!co_out.empty()) cfg.output_dir = co_out;
            const auto seeds = detail::resolve_seeds(!co_seed_opt->empty(), co_seed, cfg.seeds);
            return cmd_construct(cfg, seeds.front());
        }
        if (pr->parsed()) {
            ExperimentConfig cfg = detail::load_config(pr_config);
            if (!pr_out.empty()) cfg.output_dir = pr_out;
            const auto seeds = detail::resolve_seeds(!pr_seed_opt->empty(), pr_seed, cfg.seeds);
            return cmd_probe_rank(cfg, pr_trials, seeds.front(), pr_init_scale);
        }
        if (au->parsed()) return cmd_audit_activation(au_kind, au_alpha, au_mode, au_rho, au_T, au_points);
        if (se->parsed()) return cmd_separability(se_features);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace losscape::cli
