#pragma once

#include "losscape/certify.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace losscape {

struct ConstructionTrace {
    Vector direction;                  // a
    double beta = 0.0;
    std::vector<double> alpha_schedule;  // values actually tried
    double alpha_final = 0.0;
    Index achieved_rank = 0;
    std::vector<unsigned long> layer_seeds;  // per-layer draws for layers 1..k-1
    int direction_redraws = 0;
};

struct ConstructionError : std::runtime_error {
    Index best_rank;
    ConstructionError(const std::string& msg, Index rank)
        : std::runtime_error(msg), best_rank(rank) {}
};

inline std::vector<double> default_alpha_schedule() {
    std::vector<double> s;
    for (int e = 0; e <= 15; ++e) s.push_back(std::ldexp(1.0, e));  // 1, 2, ..., 2^15
    return s;
}

namespace detail {

// pairwise-distinct projections with a relative gap floor, guarding
// against round-off ties
inline bool projections_distinct(const Vector& proj) {
    Vector sorted = proj;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    const double scale = std::max(1.0, sorted.cwiseAbs().maxCoeff());
    for (Index i = 0; i + 1 < sorted.size(); ++i)
        if (sorted(i + 1) - sorted(i) <= 1e-12 * scale) return false;
    return true;
}

inline bool rows_distinct(const Matrix& Z) {
    for (Index i = 0; i < Z.rows(); ++i)
        for (Index j = i + 1; j < Z.rows(); ++j)
            if (Z.row(i) == Z.row(j)) return false;
    return true;
}

}  // namespace detail

/// Samples standard-normal directions a until all projections a^T z_i
/// are pairwise distinct (duplicate-z_i inputs rejected up front).
inline Vector distinct_rows_direction(const Matrix& Z, std::mt19937_64& rng,
                                      int* redraws_out = nullptr) {
    if (!detail::rows_distinct(Z))
        throw std::invalid_argument("distinct_rows_direction: duplicate rows");
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int attempt = 0; attempt < 100; ++attempt) {
        Vector a(Z.cols());
        for (Index i = 0; i < a.size(); ++i) a(i) = gauss(rng);
        if (detail::projections_distinct(Z * a)) {
            if (redraws_out) *redraws_out = attempt;
            return a;
        }
    }
    throw std::runtime_error("distinct_rows_direction: no direction found in 100 attempts");
}

/// Wide-layer construction: first N-1 columns use w_j = -alpha a,
/// v_j = alpha z_j^T a + beta (samples sorted by a^T z ascending),
/// surplus columns zero. alpha escalates through the schedule until
/// rank([sigma(Z W + 1 b^T), 1_N]) = N.
inline std::tuple<Matrix, Vector, ConstructionTrace> build_wide_layer(
    const Matrix& Z, Index n_k, double beta, const ActivationKind& activation,
    std::mt19937_64& rng, std::vector<double> alpha_schedule = default_alpha_schedule(),
    double rank_tol = -1.0) {
    const Index N = Z.rows();
    if (n_k < N - 1)
        throw std::invalid_argument("build_wide_layer: need n_k >= N-1");
    if (activation.kind == Activation::Identity)
        throw std::invalid_argument("build_wide_layer: identity activation not supported");
    if (!activation.bounded() && activation_value(activation, beta) == 0.0)
        throw std::invalid_argument("build_wide_layer: need sigma(beta) != 0 for unbounded kinds");

    ConstructionTrace trace;
    trace.beta = beta;
    Vector a = N > 1 ? distinct_rows_direction(Z, rng, &trace.direction_redraws)
                     : Vector::Zero(Z.cols());
    trace.direction = a;

    const Vector proj = Z * a;
    std::vector<Index> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(),
              [&](Index i, Index j) { return proj(i) < proj(j); });

    Index best_rank = 0;
    for (double alpha : alpha_schedule) {
        trace.alpha_schedule.push_back(alpha);
        Matrix W = Matrix::Zero(Z.cols(), n_k);
        Vector b = Vector::Zero(n_k);
        for (Index j = 0; j < N - 1; ++j) {
            W.col(j) = -alpha * a;
            b(j) = alpha * proj(order[static_cast<std::size_t>(j)]) + beta;
        }
        Matrix G = Z * W;
        G.rowwise() += b.transpose();
        const Index r = numerical_rank(with_ones_column(apply_activation(activation, G)),
                                       rank_tol);
        best_rank = std::max(best_rank, r);
        if (r == N) {
            trace.alpha_final = alpha;
            trace.achieved_rank = r;
            return {W, b, trace};
        }
    }
    throw ConstructionError("build_wide_layer: schedule exhausted, best rank " +
                                std::to_string(best_rank) + " of " + std::to_string(N),
                            best_rank);
}

/// Layers 1..k-1 keep the rows of F distinct via random parameters
/// (re-drawn if a collision appears); layer k is the wide-layer
/// construction. Returns parameters for the truncated net of depth k,
/// guaranteed to satisfy rank([F_k, 1_N]) = N on X.
inline std::pair<NetworkParams, ConstructionTrace> construct_full_rank_net(
    const Matrix& X, const Architecture& arch, int k, std::mt19937_64& rng,
    std::vector<double> alpha_schedule = default_alpha_schedule(), double rank_tol = -1.0) {
    arch.validate();
    if (k < 1 || k > static_cast<int>(arch.depth()))
        throw std::invalid_argument("construct_full_rank_net: k out of range");
    if (!detail::rows_distinct(X))
        throw std::invalid_argument("construct_full_rank_net: duplicate input rows");
    const Index N = X.rows();
    if (arch.widths[static_cast<std::size_t>(k)] < N - 1)
        throw std::invalid_argument("construct_full_rank_net: need n_k >= N-1");

    NetworkParams params;
    ConstructionTrace trace;
    Matrix Z = X;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int l = 1; l < k; ++l) {
        const Index rows = arch.widths[static_cast<std::size_t>(l) - 1];
        const Index cols = arch.widths[static_cast<std::size_t>(l)];
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 100)
                throw std::runtime_error("construct_full_rank_net: distinct rows lost at layer " +
                                         std::to_string(l));
            Matrix W(rows, cols);
            for (Index i = 0; i < rows; ++i)
                for (Index j = 0; j < cols; ++j) W(i, j) = gauss(rng);
            Vector b = Vector::Zero(cols);
            Matrix G = Z * W;
            G.rowwise() += b.transpose();
            Matrix F = apply_activation(arch.activation, G);
            if (detail::rows_distinct(F)) {
                params.weights.push_back(std::move(W));
                params.biases.push_back(std::move(b));
                trace.layer_seeds.push_back(static_cast<unsigned long>(attempt));
                Z = std::move(F);
                break;
            }
        }
    }

    const double beta = arch.activation.bounded() ? 0.0 : 1.0;
    auto [W, b, wide_trace] = build_wide_layer(Z, arch.widths[static_cast<std::size_t>(k)], beta,
                                               arch.activation, rng, std::move(alpha_schedule),
                                               rank_tol);
    wide_trace.layer_seeds = trace.layer_seeds;
    params.weights.push_back(std::move(W));
    params.biases.push_back(std::move(b));
    return {std::move(params), std::move(wide_trace)};
}

struct RankProbeResult {
    std::vector<Index> ranks;  // per trial, rank([F_k, 1_N])
    Index deficient = 0;
    double fraction = 0.0;
};

/// Empirical measure-zero probe: i.i.d. normal parameter draws for
/// layers 1..k, counting draws with rank([F_k, 1_N]) < N.
inline RankProbeResult rank_probe(const Architecture& arch, const Matrix& X, int k, int trials,
                                  double init_scale, std::mt19937_64& rng,
                                  double rank_tol = -1.0) {
    arch.validate();
    if (k < 1 || k > static_cast<int>(arch.depth()))
        throw std::invalid_argument("rank_probe: k out of range");
    const Index N = X.rows();
    RankProbeResult res;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        Matrix Z = X;
        for (int l = 1; l <= k; ++l) {
            const Index rows = arch.widths[static_cast<std::size_t>(l) - 1];
            const Index cols = arch.widths[static_cast<std::size_t>(l)];
            Matrix W(rows, cols);
            for (Index i = 0; i < rows; ++i)
                for (Index j = 0; j < cols; ++j) W(i, j) = init_scale * gauss(rng);
            Vector b(cols);
            for (Index j = 0; j < cols; ++j) b(j) = init_scale * gauss(rng);
            Matrix G = Z * W;
            G.rowwise() += b.transpose();
            Z = apply_activation(arch.activation, G);
        }
        const Index r = numerical_rank(with_ones_column(Z), rank_tol);
        res.ranks.push_back(r);
        if (r < N) ++res.deficient;
    }
    res.fraction = trials > 0 ? static_cast<double>(res.deficient) / trials : 0.0;
    return res;
}

struct LinearRankBoundReport {
    bool holds = false;
    struct LayerEntry {
        int layer;
        Index rank_F;
        Index rank_F_prev;
        Index rank_W;
        bool step_ok;      // rank(F_l) <= min{rank(F_{l-1}), rank(W_l)} + 1
        bool iterated_ok;  // rank(F_k) <= rank(W_l) + k - l + 1
    };
    std::vector<LayerEntry> per_layer;
};

/// Linear-network rank bound: with identity activation,
/// rank(F_l) <= min{rank(F_{l-1}), rank(W_l)} + 1 at every layer up to
/// k, plus the iterated bound rank(F_k) <= rank(W_l) + k - l + 1.
inline LinearRankBoundReport linear_rank_bound(const Architecture& arch,
                                               const NetworkParams& params, const Matrix& X,
                                               int k, double rank_tol = -1.0) {
    if (arch.activation.kind != Activation::Identity)
        throw std::invalid_argument("linear_rank_bound: identity activation required");
    if (k < 1 || k > static_cast<int>(arch.depth()))
        throw std::invalid_argument("linear_rank_bound: k out of range");
    const ForwardCache cache = forward(arch, params, X);
    LinearRankBoundReport rep;
    rep.holds = true;
    const Index rank_Fk = numerical_rank(cache.features(k), rank_tol);
    for (int l = 1; l <= k; ++l) {
        LinearRankBoundReport::LayerEntry e;
        e.layer = l;
        e.rank_F = numerical_rank(cache.features(l), rank_tol);
        e.rank_F_prev = numerical_rank(cache.features(l - 1), rank_tol);
        e.rank_W = numerical_rank(params.weights[static_cast<std::size_t>(l) - 1], rank_tol);
        e.step_ok = e.rank_F <= std::min(e.rank_F_prev, e.rank_W) + 1;
        e.iterated_ok = rank_Fk <= e.rank_W + k - l + 1;
        rep.holds = rep.holds && e.step_ok && e.iterated_ok;
        rep.per_layer.push_back(e);
    }
    return rep;
}

}  // namespace losscape
