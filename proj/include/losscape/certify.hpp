#pragma once

#include "losscape/autodiff.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace losscape {

struct RankVerdict {
    bool ok = false;
    Index rank = 0;
    Index required = 0;
};

/// rank([X, 1_N]) = N: linearly independent training samples.
inline RankVerdict check_linear_independence(const Matrix& X, double tol = -1.0) {
    RankVerdict v;
    v.required = X.rows();
    v.rank = numerical_rank(with_ones_column(X), tol);
    v.ok = v.rank == v.required;
    return v;
}

struct ColumnRankReport {
    bool all_full = false;
    bool pyramidal = false;  // n_{from-1} >= ... >= n_L
    struct LayerRank {
        int layer;  // 1-based
        Index rank;
        Index required;
        bool ok;
    };
    std::vector<LayerRank> per_layer;
};

/// rank(W_l) = n_l for every l >= from_layer (1-based). Vacuously true
/// when from_layer exceeds L.
inline ColumnRankReport check_column_ranks(const NetworkParams& params, int from_layer,
                                           double tol = -1.0) {
    const int L = static_cast<int>(params.depth());
    if (from_layer < 1)
        throw std::invalid_argument("check_column_ranks: from_layer must be >= 1");
    ColumnRankReport rep;
    rep.all_full = true;
    rep.pyramidal = true;
    for (int l = from_layer; l <= L; ++l) {
        const Matrix& W = params.weights[static_cast<std::size_t>(l - 1)];
        ColumnRankReport::LayerRank lr;
        lr.layer = l;
        lr.required = W.cols();
        lr.rank = numerical_rank(W, tol);
        lr.ok = lr.rank == lr.required;
        rep.all_full = rep.all_full && lr.ok;
        if (W.rows() < W.cols()) rep.pyramidal = false;
        rep.per_layer.push_back(lr);
    }
    return rep;
}

/// rank([F_k, 1_N]) = N at layer k (k = 0 means the raw inputs).
inline RankVerdict check_feature_rank(const ForwardCache& cache, Index k, double tol = -1.0) {
    if (k < 0 || k > static_cast<Index>(cache.F.size()))
        throw std::out_of_range("check_feature_rank: layer index out of range");
    RankVerdict v;
    const Matrix& F = cache.features(k);
    v.required = F.rows();
    v.rank = numerical_rank(with_ones_column(F), tol);
    v.ok = v.rank == v.required;
    return v;
}

enum class SeparabilityStatus { Separable, NotSeparable, Undetermined };

struct SeparabilityCertificate {
    SeparabilityStatus status = SeparabilityStatus::Undetermined;
    std::vector<Vector> a;  // per-class normal vectors (when separable)
    std::vector<double> b;  // per-class offsets
    double min_margin = 0.0;
    std::string method;  // "exact_solve" or "perceptron"
};

namespace detail {

// Smallest squared norm over the convex hull of the rows of P,
// Frank-Wolfe on the simplex. Near-zero value witnesses that 0 lies in
// the hull, i.e. the signed points admit no separating hyperplane
// (Gordan's theorem).
inline double min_norm_in_hull_sq(const Matrix& P, int iters = 20000) {
    const Index n = P.rows();
    Vector lambda = Vector::Constant(n, 1.0 / static_cast<double>(n));
    Vector x = P.transpose() * lambda;
    for (int it = 0; it < iters; ++it) {
        const Vector scores = P * x;
        Index best;
        scores.minCoeff(&best);
        const Vector s = P.row(best).transpose();
        const Vector d = s - x;
        const double dd = d.squaredNorm();
        if (dd == 0.0) break;
        double gamma = -x.dot(d) / dd;
        gamma = std::clamp(gamma, 0.0, 1.0);
        if (gamma == 0.0) break;
        x += gamma * d;
    }
    return x.squaredNorm();
}

}  // namespace detail

/// One-vs-rest linear separability per Definition "a_j^T x_i + b_j > 0
/// iff x_i in C_j". Exact witnesses via a linear solve when
/// [F, 1_N] has full row rank; otherwise a perceptron pass with a
/// convex-hull probe to recognize non-separable classes.
inline SeparabilityCertificate check_separability(const Matrix& F, const std::vector<int>& classes,
                                                  Index num_classes, long max_passes = 100000,
                                                  double tol = -1.0) {
    const Index N = F.rows();
    if (static_cast<Index>(classes.size()) != N)
        throw std::invalid_argument("check_separability: label count mismatch");
    for (int c : classes)
        if (c < 0 || c >= num_classes)
            throw std::invalid_argument("check_separability: label out of range");

    const Matrix Ft = with_ones_column(F);  // N x (n+1)
    SeparabilityCertificate cert;

    if (numerical_rank(Ft, tol) == N) {
        // full row rank: solve [F,1] h_j = t_j exactly, targets +-1
        cert.method = "exact_solve";
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Ft);
        double min_margin = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < num_classes; ++j) {
            Vector t(N);
            for (Index i = 0; i < N; ++i)
                t(i) = classes[static_cast<std::size_t>(i)] == j ? 1.0 : -1.0;
            const Vector h = cod.solve(t);
            const Vector vals = Ft * h;
            for (Index i = 0; i < N; ++i)
                min_margin = std::min(min_margin, t(i) * vals(i));
            cert.a.push_back(h.head(F.cols()));
            cert.b.push_back(h(F.cols()));
        }
        if (min_margin > 0.0) {
            cert.status = SeparabilityStatus::Separable;
            cert.min_margin = min_margin;
            return cert;
        }
        cert = SeparabilityCertificate{};  // fall through to perceptron
    }

    cert.method = "perceptron";
    double min_margin = std::numeric_limits<double>::infinity();
    const double scale = std::max(1.0, Ft.cwiseAbs().maxCoeff());
    bool any_undetermined = false;
    for (Index j = 0; j < num_classes; ++j) {
        Matrix signed_rows(N, Ft.cols());
        Vector t(N);
        for (Index i = 0; i < N; ++i) {
            t(i) = classes[static_cast<std::size_t>(i)] == j ? 1.0 : -1.0;
            signed_rows.row(i) = t(i) * Ft.row(i);
        }
        Vector h = Vector::Zero(Ft.cols());
        bool converged = false;
        for (long pass = 0; pass < max_passes && !converged; ++pass) {
            converged = true;
            for (Index i = 0; i < N; ++i) {
                if (signed_rows.row(i).dot(h) <= 0.0) {
                    h += signed_rows.row(i).transpose();
                    converged = false;
                }
            }
        }
        if (!converged) {
            // perceptron has no finite non-separability certificate;
            // probe whether 0 sits in the hull of the signed rows
            const double mn = detail::min_norm_in_hull_sq(signed_rows);
            if (mn < 1e-12 * scale * scale) {
                cert.status = SeparabilityStatus::NotSeparable;
                cert.a.clear();
                cert.b.clear();
                cert.min_margin = 0.0;
                return cert;
            }
            any_undetermined = true;
            continue;
        }
        const Vector vals = Ft * h;
        for (Index i = 0; i < N; ++i)
            min_margin = std::min(min_margin, t(i) * vals(i));
        cert.a.push_back(h.head(F.cols()));
        cert.b.push_back(h(F.cols()));
    }
    if (any_undetermined) {
        cert.status = SeparabilityStatus::Undetermined;
        return cert;
    }
    cert.status = SeparabilityStatus::Separable;
    cert.min_margin = min_margin;
    return cert;
}

inline const char* to_string(SeparabilityStatus s) {
    switch (s) {
        case SeparabilityStatus::Separable: return "separable";
        case SeparabilityStatus::NotSeparable: return "not_separable";
        case SeparabilityStatus::Undetermined: return "undetermined";
    }
    return "?";
}

struct Condition {
    std::string name;
    bool satisfied = false;
    double value = 0.0;
    double threshold = 0.0;
};

enum class Verdict { CertifiedGlobalMinimum, ConditionsNotMet, NotCritical };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::CertifiedGlobalMinimum: return "certified_global_minimum";
        case Verdict::ConditionsNotMet: return "conditions_not_met";
        case Verdict::NotCritical: return "not_critical";
    }
    return "?";
}

struct Tolerances {
    double eps_crit = 1e-7;  // gradient-norm criticality threshold
    double eps_phi = 1e-6;   // objective closeness to the reference minimum
    double rank_tol = -1.0;  // -1 = auto SVD tolerance
    double tau_nd = 1e-6;    // non-degeneracy factor, scaled by max(1, sigma_max(H))
};

struct CertificationReport {
    std::string theorem;
    std::vector<Condition> conditions;
    double grad_norm = 0.0;
    double objective = 0.0;
    double global_min_reference = 0.0;
    Verdict verdict = Verdict::ConditionsNotMet;
};

namespace detail {

inline Verdict resolve_verdict(const std::vector<Condition>& conditions, bool critical) {
    if (!critical) return Verdict::NotCritical;
    for (const Condition& c : conditions)
        if (!c.satisfied) return Verdict::ConditionsNotMet;
    return Verdict::CertifiedGlobalMinimum;
}

inline double full_gradient_norm(const Architecture& arch, const NetworkParams& params,
                                 const LabeledDataset& data, const LossSpec& loss) {
    const ForwardCache cache = forward(arch, params, data.X);
    return flatten_gradient(backward(arch, params, cache, data, loss)).norm();
}

inline void require_certifiable_activation(const Architecture& arch) {
    if (arch.activation.kind == Activation::Identity)
        throw std::invalid_argument("certify: identity activation is excluded from certification");
}

}  // namespace detail

/// Certifier for the linearly-independent-inputs regime: critical
/// point + rank([X,1]) = N + full column rank of W_2..W_L.
inline CertificationReport certify_independent_inputs(const Architecture& arch,
                                                      const NetworkParams& params,
                                                      const LabeledDataset& data,
                                                      const RegressionLossKind& loss,
                                                      const Tolerances& tol = {}) {
    detail::require_certifiable_activation(arch);
    const LossSpec spec = LossSpec::regression_loss(loss);
    CertificationReport rep;
    rep.theorem = "independent_inputs";
    rep.grad_norm = detail::full_gradient_norm(arch, params, data, spec);
    rep.objective = objective_regression(arch, params, data, loss);
    rep.global_min_reference = 0.0;

    const bool critical = rep.grad_norm <= tol.eps_crit;
    rep.conditions.push_back(
        {"grad_norm", critical, rep.grad_norm, tol.eps_crit});
    const RankVerdict li = check_linear_independence(data.X, tol.rank_tol);
    rep.conditions.push_back({"rank([X,1])=N", li.ok, static_cast<double>(li.rank),
                              static_cast<double>(li.required)});
    const ColumnRankReport cr = check_column_ranks(params, 2, tol.rank_tol);
    rep.conditions.push_back({"full_column_ranks_W2..WL", cr.all_full,
                              cr.all_full ? 1.0 : 0.0, 1.0});
    rep.verdict = detail::resolve_verdict(rep.conditions, critical);
    return rep;
}

/// Certifier for the wide-layer regime: n_k >= N-1, block-Hessian
/// non-degeneracy on layers I (k+1 in I), full column rank above k+1.
inline CertificationReport certify_main(const Architecture& arch, const NetworkParams& params,
                                        const LabeledDataset& data,
                                        const RegressionLossKind& loss, int k,
                                        const std::vector<int>& layer_subset,
                                        const Tolerances& tol = {}) {
    detail::require_certifiable_activation(arch);
    const int L = static_cast<int>(arch.depth());
    if (k < 1 || k > L - 1)
        throw std::invalid_argument("certify_main: k must be in [1, L-1]");
    if (layer_subset.empty())
        throw std::invalid_argument("certify_main: layer subset must be nonempty");
    bool has_kp1 = false;
    for (int l : layer_subset) {
        if (l < k + 1 || l > L)
            throw std::invalid_argument("certify_main: subset layer out of {k+1..L}");
        if (l == k + 1) has_kp1 = true;
    }
    if (!has_kp1)
        throw std::invalid_argument("certify_main: subset must contain layer k+1");

    const LossSpec spec = LossSpec::regression_loss(loss);
    CertificationReport rep;
    rep.theorem = "main";
    rep.grad_norm = detail::full_gradient_norm(arch, params, data, spec);
    rep.objective = objective_regression(arch, params, data, loss);
    rep.global_min_reference = 0.0;

    const Index N = data.samples();
    const Index nk = arch.widths[static_cast<std::size_t>(k)];
    rep.conditions.push_back({"n_k>=N-1", nk >= N - 1, static_cast<double>(nk),
                              static_cast<double>(N - 1)});
    const bool critical = rep.grad_norm <= tol.eps_crit;
    rep.conditions.push_back({"grad_norm", critical, rep.grad_norm, tol.eps_crit});

    const ParamLayout lay = ParamLayout::of(arch);
    const std::vector<Index> coords = lay.indices_for_layers(layer_subset);
    const Objective f = make_objective(arch, data, spec);
    const BlockHessianResult bh = block_hessian(f, flatten(params), coords);
    const double tau = tol.tau_nd * std::max(1.0, max_singular_value(bh.H));
    const NondegeneracyVerdict nd = check_nondegenerate(bh.H, tau);
    rep.conditions.push_back({"block_hessian_nondegenerate", nd.nondegenerate, nd.margin, tau});

    const ColumnRankReport cr = check_column_ranks(params, k + 2, tol.rank_tol);
    rep.conditions.push_back({"full_column_ranks_Wk+2..WL", cr.all_full,
                              cr.all_full ? 1.0 : 0.0, 1.0});
    rep.verdict = detail::resolve_verdict(rep.conditions, critical);
    return rep;
}

/// Certifier for the separable-loss regime (k = 0 means raw inputs).
inline CertificationReport certify_separable(const Architecture& arch,
                                             const NetworkParams& params,
                                             const LabeledDataset& data, int k,
                                             const Tolerances& tol = {}) {
    detail::require_certifiable_activation(arch);
    if (!data.class_of)
        throw std::invalid_argument("certify_separable: dataset has no class labels");
    const int L = static_cast<int>(arch.depth());
    if (k < 0 || k > L - 1)
        throw std::invalid_argument("certify_separable: k must be in [0, L-1]");

    const LossSpec spec = LossSpec::separable_loss();
    CertificationReport rep;
    rep.theorem = "separable";
    rep.grad_norm = detail::full_gradient_norm(arch, params, data, spec);
    rep.objective = objective_separable(arch, params, data);
    rep.global_min_reference = 0.0;

    const bool critical = rep.grad_norm <= tol.eps_crit;
    rep.conditions.push_back({"grad_norm", critical, rep.grad_norm, tol.eps_crit});

    const ForwardCache cache = forward(arch, params, data.X);
    const Matrix& Fk = cache.features(k);
    const SeparabilityCertificate sep =
        check_separability(Fk, *data.class_of, data.output_dim(), 100000, tol.rank_tol);
    rep.conditions.push_back({std::string("F_k_separable(") + to_string(sep.status) + ")",
                              sep.status == SeparabilityStatus::Separable, sep.min_margin, 0.0});

    const ColumnRankReport cr = check_column_ranks(params, k + 2, tol.rank_tol);
    rep.conditions.push_back({"full_column_ranks_Wk+2..WL", cr.all_full,
                              cr.all_full ? 1.0 : 0.0, 1.0});
    rep.verdict = detail::resolve_verdict(rep.conditions, critical);
    return rep;
}

}  // namespace losscape
