#pragma once

#include "losscape/autodiff.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace losscape {

struct TrainConfig {
    long max_iters = 50000;
    double eps_crit = 1e-7;
    double initial_step = 1.0;
    double shrink = 0.5;          // backtracking factor, in (0,1)
    double sufficient_decrease = 1e-4;  // Armijo constant, in (0, 0.5]
    unsigned long seed = 0;
    double init_scale = 1.0;

    void validate() const {
        if (!(shrink > 0.0 && shrink < 1.0))
            throw std::invalid_argument("TrainConfig: shrink factor must be in (0,1)");
        if (!(sufficient_decrease > 0.0 && sufficient_decrease <= 0.5))
            throw std::invalid_argument("TrainConfig: sufficient-decrease constant must be in (0, 0.5]");
        if (max_iters < 0 || !(eps_crit > 0.0) || !(initial_step > 0.0))
            throw std::invalid_argument("TrainConfig: invalid bounds");
    }
};

enum class TrainStatus { Converged, MaxIter, Diverged };

inline const char* to_string(TrainStatus s) {
    switch (s) {
        case TrainStatus::Converged: return "converged";
        case TrainStatus::MaxIter: return "maxiter";
        case TrainStatus::Diverged: return "diverged";
    }
    return "?";
}

struct HistoryEntry {
    long iter;
    double phi;
    double grad_norm;
    double step;
};

struct TrainResult {
    Vector theta;
    double grad_norm = 0.0;
    TrainStatus status = TrainStatus::MaxIter;
    std::vector<HistoryEntry> history;
};

/// Objective together with its gradient at a point.
using GradObjective = std::function<std::pair<double, Vector>(const Vector&)>;

inline GradObjective make_grad_objective(const Architecture& arch, const LabeledDataset& data,
                                         const LossSpec& loss) {
    return [arch, data, loss](const Vector& theta) {
        const NetworkParams p = unflatten(arch, theta);
        const ForwardCache cache = forward(arch, p, data.X);
        const double phi = loss.is_separable ? objective_separable(cache, data)
                                             : objective_regression(cache, data, loss.regression);
        return std::make_pair(phi, flatten_gradient(backward(arch, p, cache, data, loss)));
    };
}

/// Steepest descent with Armijo backtracking. Phi history is
/// non-increasing; stops at grad norm <= eps_crit or max_iters.
inline TrainResult minimize(const GradObjective& f, Vector theta0, const TrainConfig& cfg) {
    cfg.validate();
    TrainResult res;
    res.theta = std::move(theta0);
    auto [phi, grad] = f(res.theta);
    if (!std::isfinite(phi)) {
        res.status = TrainStatus::Diverged;
        return res;
    }
    double step = cfg.initial_step;
    for (long it = 0; it < cfg.max_iters; ++it) {
        res.grad_norm = grad.norm();
        res.history.push_back({it, phi, res.grad_norm, step});
        if (res.grad_norm <= cfg.eps_crit) {
            res.status = TrainStatus::Converged;
            return res;
        }
        const double g2 = grad.squaredNorm();
        double s = step;
        bool accepted = false;
        bool saw_finite = false;
        for (int bt = 0; bt < 200; ++bt) {
            const Vector candidate = res.theta - s * grad;
            const auto [phi_new, grad_new] = f(candidate);
            if (!std::isfinite(phi_new)) {
                s *= cfg.shrink;
                continue;
            }
            saw_finite = true;
            if (phi_new <= phi - cfg.sufficient_decrease * s * g2) {
                res.theta = candidate;
                phi = phi_new;
                grad = grad_new;
                // let the step grow back so the search stays adaptive
                step = s / cfg.shrink;
                accepted = true;
                break;
            }
            s *= cfg.shrink;
        }
        if (!accepted) {
            // no decrease found at any representable step
            res.status = saw_finite ? TrainStatus::MaxIter : TrainStatus::Diverged;
            res.grad_norm = grad.norm();
            return res;
        }
    }
    res.grad_norm = grad.norm();
    res.status = res.grad_norm <= cfg.eps_crit ? TrainStatus::Converged : TrainStatus::MaxIter;
    if (res.status == TrainStatus::Converged)
        res.history.push_back({cfg.max_iters, phi, res.grad_norm, step});
    return res;
}

/// ||grad Phi||_2 <= eps, gradient via backpropagation.
inline bool is_critical(const Architecture& arch, const NetworkParams& params,
                        const LabeledDataset& data, const LossSpec& loss, double eps,
                        double* grad_norm_out = nullptr) {
    const ForwardCache cache = forward(arch, params, data.X);
    const double gn = flatten_gradient(backward(arch, params, cache, data, loss)).norm();
    if (grad_norm_out) *grad_norm_out = gn;
    return gn <= eps;
}

/// Targets for bounded activations must sit strictly inside the range,
/// 5% of the span away from each end, so the zero-loss reference is
/// attainable.
inline bool targets_in_responsive_range(const ActivationKind& a, const Matrix& Y) {
    if (!a.bounded()) return true;
    const double span = a.upper() - a.lower();
    const double lo = a.lower() + 0.05 * span;
    const double hi = a.upper() - 0.05 * span;
    return (Y.array() > lo).all() && (Y.array() < hi).all();
}

}  // namespace losscape
