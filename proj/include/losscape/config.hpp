#pragma once

#include "losscape/serialize.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <string>
#include <vector>

namespace losscape {

/// One experiment: dataset, architecture, loss, wide layer, layer
/// subset, tolerances, seeds, output directory. Parses from a single
/// JSON document; unknown keys are rejected.
struct ExperimentConfig {
    std::string dataset;
    Architecture arch;
    LossSpec loss = LossSpec::regression_loss(RegressionLossKind::squared());
    int k = 1;
    std::vector<int> subset;
    Tolerances tol;
    std::vector<unsigned long> seeds;
    std::string output_dir = ".";
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("config: unknown key \"" + it.key() + "\" in " + where);
}

inline double positive_tolerance(const nlohmann::json& j, const std::string& key, double dflt) {
    if (!j.contains(key)) return dflt;
    const double v = j.at(key).get<double>();
    if (!(v > 0.0))
        throw std::invalid_argument("config: tolerance \"" + key + "\" must be positive");
    return v;
}

}  // namespace detail

inline LossSpec loss_from_json(const nlohmann::json& j) {
    detail::reject_unknown_keys(j, {"kind", "delta", "mix", "width"}, "loss");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "separable") return LossSpec::separable_loss();
    if (kind == "squared") return LossSpec::regression_loss(RegressionLossKind::squared());
    if (kind == "pseudo_huber")
        return LossSpec::regression_loss(RegressionLossKind::pseudo_huber(j.value("delta", 1.0)));
    if (kind == "blake_zisserman")
        return LossSpec::regression_loss(
            RegressionLossKind::blake_zisserman(j.value("delta", 1.0)));
    if (kind == "corrupted_gaussian")
        return LossSpec::regression_loss(
            RegressionLossKind::corrupted_gaussian(j.value("mix", 0.5), j.value("width", 1.0)));
    if (kind == "cauchy")
        return LossSpec::regression_loss(RegressionLossKind::cauchy(j.value("delta", 1.0)));
    throw std::invalid_argument("config: unknown loss kind: " + kind);
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    detail::reject_unknown_keys(j,
                                {"dataset", "widths", "activation", "loss", "k", "subset",
                                 "tolerances", "seeds", "output_dir"},
                                "top level");
    ExperimentConfig cfg;
    if (j.contains("dataset")) cfg.dataset = j.at("dataset").get<std::string>();
    for (const auto& w : j.at("widths")) cfg.arch.widths.push_back(w.get<Index>());
    if (j.contains("activation")) {
        detail::reject_unknown_keys(j.at("activation"), {"kind", "alpha"}, "activation");
        cfg.arch.activation = activation_from_json(j.at("activation"));
    }
    cfg.arch.validate();
    if (j.contains("loss")) cfg.loss = loss_from_json(j.at("loss"));
    if (j.contains("k")) cfg.k = j.at("k").get<int>();
    if (j.contains("subset"))
        for (const auto& l : j.at("subset")) cfg.subset.push_back(l.get<int>());
    if (j.contains("tolerances")) {
        const nlohmann::json& t = j.at("tolerances");
        detail::reject_unknown_keys(t, {"eps_crit", "eps_phi", "rank_tol", "tau_nd"},
                                    "tolerances");
        cfg.tol.eps_crit = detail::positive_tolerance(t, "eps_crit", cfg.tol.eps_crit);
        cfg.tol.eps_phi = detail::positive_tolerance(t, "eps_phi", cfg.tol.eps_phi);
        cfg.tol.tau_nd = detail::positive_tolerance(t, "tau_nd", cfg.tol.tau_nd);
        if (t.contains("rank_tol")) {
            if (t.at("rank_tol").is_string()) {
                if (t.at("rank_tol").get<std::string>() != "auto")
                    throw std::invalid_argument("config: rank_tol must be positive or \"auto\"");
                cfg.tol.rank_tol = -1.0;
            } else {
                cfg.tol.rank_tol = detail::positive_tolerance(t, "rank_tol", -1.0);
            }
        }
    }
    if (j.contains("seeds"))
        for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<unsigned long>());
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    return cfg;
}

inline std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "{\"dataset\":\"" << detail::json_escape(cfg.dataset) << "\",\"widths\":[";
    for (std::size_t i = 0; i < cfg.arch.widths.size(); ++i) {
        if (i) os << ',';
        os << cfg.arch.widths[i];
    }
    os << "],\"activation\":{\"kind\":\"" << cfg.arch.activation.name() << "\"";
    if (cfg.arch.activation.kind == Activation::Softplus)
        os << ",\"alpha\":" << fmt_double(cfg.arch.activation.alpha);
    os << "},\"loss\":{\"kind\":\""
       << (cfg.loss.is_separable ? std::string("separable") : cfg.loss.regression.name()) << '"';
    if (!cfg.loss.is_separable) {
        switch (cfg.loss.regression.kind) {
            case RegressionLoss::PseudoHuber:
            case RegressionLoss::BlakeZisserman:
            case RegressionLoss::Cauchy:
                os << ",\"delta\":" << fmt_double(cfg.loss.regression.delta);
                break;
            case RegressionLoss::CorruptedGaussian:
                os << ",\"mix\":" << fmt_double(cfg.loss.regression.mix)
                   << ",\"width\":" << fmt_double(cfg.loss.regression.width);
                break;
            default: break;
        }
    }
    os << "},\"k\":" << cfg.k << ",\"subset\":[";
    for (std::size_t i = 0; i < cfg.subset.size(); ++i) {
        if (i) os << ',';
        os << cfg.subset[i];
    }
    os << "],\"tolerances\":{\"eps_crit\":" << fmt_double(cfg.tol.eps_crit)
       << ",\"eps_phi\":" << fmt_double(cfg.tol.eps_phi) << ",\"rank_tol\":";
    if (cfg.tol.rank_tol < 0.0)
        os << "\"auto\"";
    else
        os << fmt_double(cfg.tol.rank_tol);
    os << ",\"tau_nd\":" << fmt_double(cfg.tol.tau_nd) << "},\"seeds\":[";
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
        if (i) os << ',';
        os << cfg.seeds[i];
    }
    os << "],\"output_dir\":\"" << detail::json_escape(cfg.output_dir) << "\"}";
    return os.str();
}

}  // namespace losscape
