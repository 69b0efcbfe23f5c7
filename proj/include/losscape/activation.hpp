#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace losscape {

enum class Activation { Sigmoid, Tanh, Softplus, Identity };

/// Analytic activation kinds with exact derivative formulas. Bounded
/// kinds carry their range (mu, gamma). Identity exists only for the
/// linear-network rank-bound demonstration and is rejected by the
/// certification paths.
struct ActivationKind {
    Activation kind = Activation::Sigmoid;
    double alpha = 1.0;  // softplus sharpness

    static ActivationKind sigmoid() { return {Activation::Sigmoid, 1.0}; }
    static ActivationKind tanh() { return {Activation::Tanh, 1.0}; }
    static ActivationKind softplus(double a) {
        if (!(a > 0.0))
            throw std::invalid_argument("softplus: alpha must be positive");
        return {Activation::Softplus, a};
    }
    static ActivationKind identity() { return {Activation::Identity, 1.0}; }

    bool bounded() const {
        return kind == Activation::Sigmoid || kind == Activation::Tanh;
    }
    double lower() const {  // mu
        switch (kind) {
            case Activation::Sigmoid: return 0.0;
            case Activation::Tanh: return -1.0;
            default: return -std::numeric_limits<double>::infinity();
        }
    }
    double upper() const {  // gamma
        switch (kind) {
            case Activation::Sigmoid: return 1.0;
            case Activation::Tanh: return 1.0;
            default: return std::numeric_limits<double>::infinity();
        }
    }
    std::string name() const {
        switch (kind) {
            case Activation::Sigmoid: return "sigmoid";
            case Activation::Tanh: return "tanh";
            case Activation::Softplus: return "softplus";
            case Activation::Identity: return "identity";
        }
        return "?";
    }
};

/// Overflow-safe logistic function.
inline double stable_sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

inline double activation_value(const ActivationKind& a, double t) {
    switch (a.kind) {
        case Activation::Sigmoid: return stable_sigmoid(t);
        case Activation::Tanh: return std::tanh(t);
        case Activation::Softplus: {
            const double at = a.alpha * t;
            // branch split at 0 keeps exp() in [0,1]
            if (at >= 0.0) return t + std::log1p(std::exp(-at)) / a.alpha;
            return std::log1p(std::exp(at)) / a.alpha;
        }
        case Activation::Identity: return t;
    }
    return t;
}

inline double activation_derivative(const ActivationKind& a, double t) {
    switch (a.kind) {
        case Activation::Sigmoid:
            // sigma(t) sigma(-t) stays positive where 1 - sigma(t)
            // rounds to zero
            return stable_sigmoid(t) * stable_sigmoid(-t);
        case Activation::Tanh:
            return 4.0 * stable_sigmoid(2.0 * t) * stable_sigmoid(-2.0 * t);
        case Activation::Softplus: return stable_sigmoid(a.alpha * t);
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

inline std::pair<double, double> activation_eval(const ActivationKind& a, double t) {
    return {activation_value(a, t), activation_derivative(a, t)};
}

struct GrowthBounds {
    double rho1, rho2, rho3, rho4;
};

struct ActivationAudit {
    bool pass = false;
    double violating_t = 0.0;  // meaningful when !pass
    std::string detail;
};

/// Distance from sigma(t) to the lower/upper range bound, in forms
/// that stay positive where the direct difference rounds to zero
/// (sigma(t) rounds to 1.0 in double precision for t >~ 37).
inline double lower_range_gap(const ActivationKind& a, double t) {
    switch (a.kind) {
        case Activation::Sigmoid: return stable_sigmoid(t);            // sigma(t) - 0
        case Activation::Tanh: return 2.0 * stable_sigmoid(2.0 * t);   // tanh(t) + 1
        default: return std::numeric_limits<double>::infinity();
    }
}

inline double upper_range_gap(const ActivationKind& a, double t) {
    switch (a.kind) {
        case Activation::Sigmoid: return stable_sigmoid(-t);           // 1 - sigma(t)
        case Activation::Tanh: return 2.0 * stable_sigmoid(-2.0 * t);  // 1 - tanh(t)
        default: return std::numeric_limits<double>::infinity();
    }
}

/// Bounded-mode audit: mu < sigma(t) < gamma (checked through the
/// stable gap forms) and strict monotonicity of the sampled values
/// (non-decreasing samples plus a positive derivative at every point).
inline ActivationAudit audit_activation_bounded(const ActivationKind& a,
                                                double T = 50.0, int points = 10000) {
    if (T < 50.0 || points < 10000)
        throw std::invalid_argument("audit_activation: grid must cover [-50,50] with >= 1e4 points");
    ActivationAudit out;
    if (!a.bounded()) {
        out.detail = "activation is not a bounded kind";
        return out;
    }
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        const double t = -T + 2.0 * T * i / (points - 1);
        const double v = activation_value(a, t);
        if (!(lower_range_gap(a, t) > 0.0 && upper_range_gap(a, t) > 0.0)) {
            out.violating_t = t;
            out.detail = "value outside open range";
            return out;
        }
        if (!(v >= prev) || !(activation_derivative(a, t) > 0.0)) {
            out.violating_t = t;
            out.detail = "sampled values not strictly increasing";
            return out;
        }
        prev = v;
    }
    out.pass = true;
    return out;
}

/// Growth-mode audit: |sigma(t)| <= rho1 e^{rho2 t} for t < 0 and
/// |sigma(t)| <= rho3 t + rho4 for t >= 0, at every grid point.
inline ActivationAudit audit_activation_growth(const ActivationKind& a, const GrowthBounds& rho,
                                               double T = 50.0, int points = 10000) {
    if (T < 50.0 || points < 10000)
        throw std::invalid_argument("audit_activation: grid must cover [-50,50] with >= 1e4 points");
    if (!(rho.rho1 > 0.0 && rho.rho2 > 0.0 && rho.rho3 > 0.0 && rho.rho4 > 0.0))
        throw std::invalid_argument("audit_activation: growth constants must be positive");
    ActivationAudit out;
    for (int i = 0; i < points; ++i) {
        const double t = -T + 2.0 * T * i / (points - 1);
        const double v = std::abs(activation_value(a, t));
        const double bound = t < 0.0 ? rho.rho1 * std::exp(rho.rho2 * t)
                                     : rho.rho3 * t + rho.rho4;
        if (v > bound) {
            out.violating_t = t;
            out.detail = "growth bound violated";
            return out;
        }
    }
    out.pass = true;
    return out;
}

}  // namespace losscape
