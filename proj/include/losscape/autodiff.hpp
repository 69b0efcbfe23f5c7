#pragma once

#include "losscape/losses.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

namespace losscape {

/// Either a regression loss or the piecewise-quadratic separable pair.
struct LossSpec {
    bool is_separable = false;
    RegressionLossKind regression;

    static LossSpec regression_loss(const RegressionLossKind& k) { return {false, k}; }
    static LossSpec separable_loss() { return {true, {}}; }
};

/// Sensitivities Delta_k and the gradient blocks they induce.
struct BackwardCache {
    std::vector<Matrix> deltas;  // Delta_k, N x n_k
    std::vector<Matrix> grad_W;
    std::vector<Vector> grad_b;
};

/// Backpropagation:
///   Delta_L = l'(F_L - Y) o sigma'(G_L)
///   Delta_k = (Delta_{k+1} W_{k+1}^T) o sigma'(G_k)
///   grad W_1 = X^T Delta_1, grad W_k = F_{k-1}^T Delta_k, grad b_k = Delta_k^T 1
inline BackwardCache backward(const Architecture& arch, const NetworkParams& params,
                              const ForwardCache& cache, const LabeledDataset& data,
                              const LossSpec& loss) {
    params.validate(arch);
    const Index L = arch.depth();
    if (static_cast<Index>(cache.F.size()) != L || cache.X.rows() != data.X.rows() ||
        cache.X.cols() != data.X.cols() || cache.X != data.X)
        throw std::invalid_argument("backward: cache does not match params/data");
    if (loss.is_separable && !data.class_of)
        throw std::invalid_argument("backward: separable loss needs class labels");

    const Index N = data.samples();
    BackwardCache bw;
    bw.deltas.resize(static_cast<std::size_t>(L));
    bw.grad_W.resize(static_cast<std::size_t>(L));
    bw.grad_b.resize(static_cast<std::size_t>(L));

    const Matrix& FL = cache.output();
    const Matrix& GL = cache.G.back();
    Matrix dL(N, arch.output_dim());
    for (Index i = 0; i < N; ++i)
        for (Index j = 0; j < arch.output_dim(); ++j) {
            const double a = FL(i, j) - data.Y(i, j);
            double lp;
            if (loss.is_separable) {
                const bool in_class = (*data.class_of)[static_cast<std::size_t>(i)] == j;
                lp = separable_loss_eval(a, in_class).second;
            } else {
                lp = regression_loss_eval(loss.regression, a).second;
            }
            dL(i, j) = lp * activation_derivative(arch.activation, GL(i, j));
        }
    bw.deltas[static_cast<std::size_t>(L - 1)] = dL;

    for (Index k = L - 2; k >= 0; --k) {
        const Matrix& Wnext = params.weights[static_cast<std::size_t>(k) + 1];
        const Matrix prod = bw.deltas[static_cast<std::size_t>(k) + 1] * Wnext.transpose();
        bw.deltas[static_cast<std::size_t>(k)] =
            prod.cwiseProduct(apply_activation_derivative(arch.activation,
                                                          cache.G[static_cast<std::size_t>(k)]));
    }

    for (Index k = 0; k < L; ++k) {
        const Matrix& below = k == 0 ? cache.X : cache.F[static_cast<std::size_t>(k) - 1];
        bw.grad_W[static_cast<std::size_t>(k)] =
            below.transpose() * bw.deltas[static_cast<std::size_t>(k)];
        bw.grad_b[static_cast<std::size_t>(k)] =
            bw.deltas[static_cast<std::size_t>(k)].transpose() * Vector::Ones(N);
    }
    return bw;
}

inline Vector flatten_gradient(const BackwardCache& bw) {
    NetworkParams g;
    g.weights = bw.grad_W;
    g.biases = bw.grad_b;
    return flatten(g);
}

using Objective = std::function<double(const Vector&)>;

inline Objective make_objective(const Architecture& arch, const LabeledDataset& data,
                                const LossSpec& loss) {
    return [arch, data, loss](const Vector& theta) {
        const NetworkParams p = unflatten(arch, theta);
        const ForwardCache cache = forward(arch, p, data.X);
        return loss.is_separable ? objective_separable(cache, data)
                                 : objective_regression(cache, data, loss.regression);
    };
}

/// Central differences, per-coordinate step h_i = h * (1 + |theta_i|);
/// h < 0 selects the default 1e-6.
inline Vector gradient_fd(const Objective& f, const Vector& theta, double h = -1.0) {
    if (h < 0.0) h = 1e-6;
    if (h == 0.0) throw std::invalid_argument("gradient_fd: step must be positive");
    Vector g(theta.size());
    Vector probe = theta;
    for (Index i = 0; i < theta.size(); ++i) {
        const double hi = h * (1.0 + std::abs(theta(i)));
        probe(i) = theta(i) + hi;
        const double fp = f(probe);
        probe(i) = theta(i) - hi;
        const double fm = f(probe);
        probe(i) = theta(i);
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("gradient_fd: non-finite objective at coordinate " +
                                     std::to_string(i));
        g(i) = (fp - fm) / (2.0 * hi);
    }
    return g;
}

struct BlockHessianResult {
    Matrix H;           // symmetrized, (H + H^T)/2
    double asymmetry;   // max |H - H^T| before symmetrization
    bool reliable;      // asymmetry <= 1e-3 * (1 + ||H||)
};

/// Second central differences restricted to `subset` (flat coordinate
/// indices). Step per coordinate: cbrt(eps) * (1 + |theta_i|).
inline BlockHessianResult block_hessian(const Objective& f, const Vector& theta,
                                        const std::vector<Index>& subset, double h = -1.0) {
    if (subset.empty()) throw std::invalid_argument("block_hessian: empty subset");
    for (Index c : subset)
        if (c < 0 || c >= theta.size())
            throw std::out_of_range("block_hessian: coordinate out of range");
    const double base = h < 0.0 ? std::cbrt(std::numeric_limits<double>::epsilon()) : h;
    const Index n = static_cast<Index>(subset.size());
    std::vector<double> step(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        step[static_cast<std::size_t>(i)] =
            base * (1.0 + std::abs(theta(subset[static_cast<std::size_t>(i)])));

    Matrix H(n, n);
    Vector probe = theta;
    const double f0 = f(theta);
    for (Index i = 0; i < n; ++i) {
        const Index ci = subset[static_cast<std::size_t>(i)];
        const double hi = step[static_cast<std::size_t>(i)];
        probe(ci) = theta(ci) + hi;
        const double fp = f(probe);
        probe(ci) = theta(ci) - hi;
        const double fm = f(probe);
        probe(ci) = theta(ci);
        H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
        for (Index j = i + 1; j < n; ++j) {
            const Index cj = subset[static_cast<std::size_t>(j)];
            const double hj = step[static_cast<std::size_t>(j)];
            probe(ci) = theta(ci) + hi;
            probe(cj) = theta(cj) + hj;
            const double fpp = f(probe);
            probe(cj) = theta(cj) - hj;
            const double fpm = f(probe);
            probe(ci) = theta(ci) - hi;
            const double fmm = f(probe);
            probe(cj) = theta(cj) + hj;
            const double fmp = f(probe);
            probe(ci) = theta(ci);
            probe(cj) = theta(cj);
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    BlockHessianResult out;
    out.asymmetry = (H - H.transpose()).cwiseAbs().maxCoeff();
    out.H = 0.5 * (H + H.transpose());
    out.reliable = out.asymmetry <= 1e-3 * (1.0 + out.H.norm());
    return out;
}

struct NondegeneracyVerdict {
    bool nondegenerate = false;
    double margin = 0.0;     // smallest singular value
    double threshold = 0.0;  // tau actually applied
};

/// Non-singularity test: smallest singular value above tau.
inline NondegeneracyVerdict check_nondegenerate(const Matrix& H, double tau) {
    if (H.rows() != H.cols())
        throw std::invalid_argument("check_nondegenerate: matrix must be square");
    NondegeneracyVerdict v;
    v.margin = min_singular_value(H);
    v.threshold = tau;
    v.nondegenerate = v.margin > tau;
    return v;
}

}  // namespace losscape
