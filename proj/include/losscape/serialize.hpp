#pragma once

#include "losscape/certify.hpp"
#include "losscape/construct.hpp"
#include "losscape/trainer.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace losscape {

/// Floats rendered with 17 significant digits so every value
/// round-trips and identical inputs serialize byte-identically.
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Write via a temp file in the same directory plus rename, so an
/// interrupted run never leaves a partial file.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace detail {

inline void json_array_of_doubles(std::ostringstream& os, const double* data, Index n) {
    os << '[';
    for (Index i = 0; i < n; ++i) {
        if (i) os << ',';
        os << fmt_double(data[i]);
    }
    os << ']';
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace detail

// ---- params JSON: {widths, activation, weights (row-major), biases} ----

inline std::string params_to_json(const Architecture& arch, const NetworkParams& params) {
    params.validate(arch);
    std::ostringstream os;
    os << "{\"widths\":[";
    for (std::size_t i = 0; i < arch.widths.size(); ++i) {
        if (i) os << ',';
        os << arch.widths[i];
    }
    os << "],\"activation\":{\"kind\":\"" << arch.activation.name() << "\"";
    if (arch.activation.kind == Activation::Softplus)
        os << ",\"alpha\":" << fmt_double(arch.activation.alpha);
    os << "},\"weights\":[";
    for (std::size_t k = 0; k < params.weights.size(); ++k) {
        if (k) os << ',';
        const Matrix& W = params.weights[k];
        os << '[';
        for (Index i = 0; i < W.rows(); ++i)
            for (Index j = 0; j < W.cols(); ++j) {
                if (i || j) os << ',';
                os << fmt_double(W(i, j));
            }
        os << ']';
    }
    os << "],\"biases\":[";
    for (std::size_t k = 0; k < params.biases.size(); ++k) {
        if (k) os << ',';
        detail::json_array_of_doubles(os, params.biases[k].data(), params.biases[k].size());
    }
    os << "]}";
    return os.str();
}

inline ActivationKind activation_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "sigmoid") return ActivationKind::sigmoid();
    if (kind == "tanh") return ActivationKind::tanh();
    if (kind == "softplus") return ActivationKind::softplus(j.value("alpha", 1.0));
    if (kind == "identity") return ActivationKind::identity();
    throw std::invalid_argument("unknown activation kind: " + kind);
}

inline std::pair<Architecture, NetworkParams> params_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    Architecture arch;
    for (const auto& w : j.at("widths")) arch.widths.push_back(w.get<Index>());
    arch.activation = activation_from_json(j.at("activation"));
    arch.validate();
    NetworkParams p = NetworkParams::zeros(arch);
    const auto& jw = j.at("weights");
    const auto& jb = j.at("biases");
    if (jw.size() != p.weights.size() || jb.size() != p.biases.size())
        throw std::invalid_argument("params JSON: layer count mismatch");
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        Matrix& W = p.weights[k];
        const auto& arr = jw[k];
        if (static_cast<Index>(arr.size()) != W.size())
            throw std::invalid_argument("params JSON: weight size mismatch at layer " +
                                        std::to_string(k + 1));
        std::size_t idx = 0;
        for (Index i = 0; i < W.rows(); ++i)
            for (Index j2 = 0; j2 < W.cols(); ++j2) W(i, j2) = arr[idx++].get<double>();
        const auto& barr = jb[k];
        if (static_cast<Index>(barr.size()) != p.biases[k].size())
            throw std::invalid_argument("params JSON: bias size mismatch at layer " +
                                        std::to_string(k + 1));
        for (Index i = 0; i < p.biases[k].size(); ++i)
            p.biases[k](i) = barr[static_cast<std::size_t>(i)].get<double>();
    }
    p.validate(arch);
    return {arch, p};
}

// ---- certification report JSON, stable key order ----

inline std::string report_to_json(const CertificationReport& rep) {
    std::ostringstream os;
    os << "{\"theorem\":\"" << detail::json_escape(rep.theorem) << "\",\"conditions\":[";
    for (std::size_t i = 0; i < rep.conditions.size(); ++i) {
        const Condition& c = rep.conditions[i];
        if (i) os << ',';
        os << "{\"name\":\"" << detail::json_escape(c.name) << "\",\"satisfied\":"
           << (c.satisfied ? "true" : "false") << ",\"value\":" << fmt_double(c.value)
           << ",\"threshold\":" << fmt_double(c.threshold) << '}';
    }
    os << "],\"grad_norm\":" << fmt_double(rep.grad_norm)
       << ",\"objective\":" << fmt_double(rep.objective)
       << ",\"global_min_reference\":" << fmt_double(rep.global_min_reference)
       << ",\"verdict\":\"" << to_string(rep.verdict) << "\"}";
    return os.str();
}

// ---- construction trace JSON ----

inline std::string trace_to_json(const ConstructionTrace& trace) {
    std::ostringstream os;
    os << "{\"direction\":";
    detail::json_array_of_doubles(os, trace.direction.data(), trace.direction.size());
    os << ",\"beta\":" << fmt_double(trace.beta) << ",\"alpha_schedule\":[";
    for (std::size_t i = 0; i < trace.alpha_schedule.size(); ++i) {
        if (i) os << ',';
        os << fmt_double(trace.alpha_schedule[i]);
    }
    os << "],\"alpha_final\":" << fmt_double(trace.alpha_final)
       << ",\"achieved_rank\":" << trace.achieved_rank << ",\"layer_seeds\":[";
    for (std::size_t i = 0; i < trace.layer_seeds.size(); ++i) {
        if (i) os << ',';
        os << trace.layer_seeds[i];
    }
    os << "],\"direction_redraws\":" << trace.direction_redraws << '}';
    return os.str();
}

// ---- training history CSV ----

inline std::string history_to_csv(const std::vector<HistoryEntry>& history) {
    std::ostringstream os;
    os << "iteration,phi,grad_norm,step\n";
    for (const HistoryEntry& h : history)
        os << h.iter << ',' << fmt_double(h.phi) << ',' << fmt_double(h.grad_norm) << ','
           << fmt_double(h.step) << '\n';
    return os.str();
}

// ---- dataset CSV ----
// header: "# d=<d> m=<m> mode=<regression|classification>"
// regression rows: d features then m targets
// classification rows: d features then one class index in [1, m]

inline std::string dataset_to_csv(const LabeledDataset& data) {
    std::ostringstream os;
    const bool cls = data.class_of.has_value();
    os << "# d=" << data.input_dim() << " m=" << data.output_dim()
       << " mode=" << (cls ? "classification" : "regression") << '\n';
    for (Index i = 0; i < data.samples(); ++i) {
        for (Index j = 0; j < data.input_dim(); ++j) {
            if (j) os << ',';
            os << fmt_double(data.X(i, j));
        }
        if (cls) {
            os << ',' << (*data.class_of)[static_cast<std::size_t>(i)] + 1;
        } else {
            for (Index j = 0; j < data.output_dim(); ++j)
                os << ',' << fmt_double(data.Y(i, j));
        }
        os << '\n';
    }
    return os.str();
}

inline LabeledDataset dataset_from_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
        throw std::invalid_argument("dataset: empty file");
    Index d = -1, m = -1;
    char mode[32] = {0};
    if (std::sscanf(header.c_str(), "# d=%td m=%td mode=%31s", &d, &m, mode) != 3 || d < 1 ||
        m < 1)
        throw std::invalid_argument("dataset: bad header line: " + header);
    const std::string mode_s = mode;
    if (mode_s != "regression" && mode_s != "classification")
        throw std::invalid_argument("dataset: unknown mode: " + mode_s);
    const bool cls = mode_s == "classification";

    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t pos = 0;
            double v;
            try {
                v = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw std::invalid_argument("dataset: bad number at line " +
                                            std::to_string(lineno));
            }
            vals.push_back(v);
        }
        const std::size_t want = static_cast<std::size_t>(cls ? d + 1 : d + m);
        if (vals.size() != want)
            throw std::invalid_argument("dataset: expected " + std::to_string(want) +
                                        " columns at line " + std::to_string(lineno));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw std::invalid_argument("dataset: no samples");

    const Index N = static_cast<Index>(rows.size());
    Matrix X(N, d);
    for (Index i = 0; i < N; ++i)
        for (Index j = 0; j < d; ++j) X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (cls) {
        std::vector<int> classes;
        for (Index i = 0; i < N; ++i) {
            const double c = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
            const int ci = static_cast<int>(c);
            if (ci != c || ci < 1 || ci > m)
                throw std::invalid_argument("dataset: class index out of [1,m] at row " +
                                            std::to_string(i + 1));
            classes.push_back(ci - 1);
        }
        return LabeledDataset::classification(std::move(X), std::move(classes), m);
    }
    Matrix Y(N, m);
    for (Index i = 0; i < N; ++i)
        for (Index j = 0; j < m; ++j)
            Y(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(d + j)];
    return LabeledDataset::regression(std::move(X), std::move(Y));
}

inline LabeledDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
    return dataset_from_csv(in);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace losscape
