#pragma once

#include "losscape/network.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace losscape {

enum class RegressionLoss { Squared, PseudoHuber, BlakeZisserman, CorruptedGaussian, Cauchy };

struct RegressionLossKind {
    RegressionLoss kind = RegressionLoss::Squared;
    double delta = 1.0;   // pseudo-Huber / Blake-Zisserman / Cauchy scale
    double mix = 0.5;     // corrupted-Gaussian inlier weight, in [0,1]
    double width = 1.0;   // corrupted-Gaussian outlier width, > 0

    static RegressionLossKind squared() { return {RegressionLoss::Squared}; }
    static RegressionLossKind pseudo_huber(double d) {
        if (!(d > 0.0)) throw std::invalid_argument("pseudo_huber: delta must be positive");
        return {RegressionLoss::PseudoHuber, d};
    }
    static RegressionLossKind blake_zisserman(double d) {
        if (!(d > 0.0)) throw std::invalid_argument("blake_zisserman: delta must be positive");
        return {RegressionLoss::BlakeZisserman, d};
    }
    static RegressionLossKind corrupted_gaussian(double mix, double w) {
        if (!(mix >= 0.0 && mix <= 1.0))
            throw std::invalid_argument("corrupted_gaussian: mix must be in [0,1]");
        if (!(w > 0.0)) throw std::invalid_argument("corrupted_gaussian: width must be positive");
        return {RegressionLoss::CorruptedGaussian, 1.0, mix, w};
    }
    static RegressionLossKind cauchy(double d) {
        if (d == 0.0) throw std::invalid_argument("cauchy: delta must be nonzero");
        return {RegressionLoss::Cauchy, d};
    }

    std::string name() const {
        switch (kind) {
            case RegressionLoss::Squared: return "squared";
            case RegressionLoss::PseudoHuber: return "pseudo_huber";
            case RegressionLoss::BlakeZisserman: return "blake_zisserman";
            case RegressionLoss::CorruptedGaussian: return "corrupted_gaussian";
            case RegressionLoss::Cauchy: return "cauchy";
        }
        return "?";
    }
};

/// (l(a), l'(a)) for the residual a = f - y.
inline std::pair<double, double> regression_loss_eval(const RegressionLossKind& k, double a) {
    switch (k.kind) {
        case RegressionLoss::Squared:
            return {a * a, 2.0 * a};
        case RegressionLoss::PseudoHuber: {
            const double d2 = k.delta * k.delta;
            const double root = std::sqrt(1.0 + a * a / d2);
            return {2.0 * d2 * (root - 1.0), 2.0 * a / root};
        }
        case RegressionLoss::BlakeZisserman: {
            const double e = std::exp(-a * a);
            return {-std::log(e + k.delta), 2.0 * a * e / (e + k.delta)};
        }
        case RegressionLoss::CorruptedGaussian: {
            // -log(mix e^{-a^2} + (1-mix)/w e^{-a^2/w^2}), log-sum-exp
            // stabilized: e^{-a^2} underflows past |a| ~ 27.
            const double w2 = k.width * k.width;
            const double t1 = -a * a;
            const double t2 = -a * a / w2;
            const double c1 = k.mix;
            const double c2 = (1.0 - k.mix) / k.width;
            if (c1 == 0.0) return {t2 == 0.0 ? -std::log(c2) : -std::log(c2) - t2,
                                   2.0 * a / w2};
            if (c2 == 0.0) return {-std::log(c1) - t1, 2.0 * a};
            const double m = std::max(t1, t2);
            const double s1 = c1 * std::exp(t1 - m);
            const double s2 = c2 * std::exp(t2 - m);
            const double l = -(m + std::log(s1 + s2));
            const double lp = (2.0 * a * s1 + (2.0 * a / w2) * s2) / (s1 + s2);
            return {l, lp};
        }
        case RegressionLoss::Cauchy: {
            const double d2 = k.delta * k.delta;
            return {d2 * std::log1p(a * a / d2), 2.0 * a / (1.0 + a * a / d2)};
        }
    }
    return {0.0, 0.0};
}

/// Piecewise-quadratic classification pair: l1 penalizes a < 0 (true
/// class), l2 penalizes a > 0 (wrong classes).
inline std::pair<double, double> separable_loss_eval(double a, bool in_class) {
    if (in_class) return a <= 0.0 ? std::make_pair(a * a, 2.0 * a) : std::make_pair(0.0, 0.0);
    return a >= 0.0 ? std::make_pair(a * a, 2.0 * a) : std::make_pair(0.0, 0.0);
}

/// Training data. Classification datasets carry a 0-based class index
/// per sample; Y is then the {+1,-1} one-vs-rest encoding.
struct LabeledDataset {
    Matrix X;
    Matrix Y;
    std::optional<std::vector<int>> class_of;

    Index samples() const { return X.rows(); }
    Index input_dim() const { return X.cols(); }
    Index output_dim() const { return Y.cols(); }

    void validate() const {
        require_finite(X, "dataset X");
        require_finite(Y, "dataset Y");
        if (X.rows() != Y.rows())
            throw std::invalid_argument("dataset: X and Y row counts differ");
        for (Index i = 0; i < X.rows(); ++i)
            for (Index j = i + 1; j < X.rows(); ++j)
                if (X.row(i) == X.row(j))
                    throw std::invalid_argument("dataset: identical training samples " +
                                                std::to_string(i) + " and " + std::to_string(j));
        if (class_of) {
            if (static_cast<Index>(class_of->size()) != X.rows())
                throw std::invalid_argument("dataset: class label count mismatch");
            for (Index i = 0; i < X.rows(); ++i) {
                const int c = (*class_of)[static_cast<std::size_t>(i)];
                if (c < 0 || c >= Y.cols())
                    throw std::invalid_argument("dataset: class label out of range");
                for (Index j = 0; j < Y.cols(); ++j) {
                    const double want = j == c ? 1.0 : -1.0;
                    if (Y(i, j) != want)
                        throw std::invalid_argument("dataset: Y is not the +-1 one-vs-rest encoding");
                }
            }
        }
    }

    static LabeledDataset regression(Matrix X, Matrix Y) {
        LabeledDataset d{std::move(X), std::move(Y), std::nullopt};
        d.validate();
        return d;
    }

    static LabeledDataset classification(Matrix X, std::vector<int> classes, Index num_classes) {
        Matrix Y = Matrix::Constant(X.rows(), num_classes, -1.0);
        for (Index i = 0; i < X.rows(); ++i) {
            const int c = classes[static_cast<std::size_t>(i)];
            if (c < 0 || c >= num_classes)
                throw std::invalid_argument("dataset: class label out of range");
            Y(i, c) = 1.0;
        }
        LabeledDataset d{std::move(X), std::move(Y), std::move(classes)};
        d.validate();
        return d;
    }
};

/// Phi = sum_ij l((F_L)_ij - Y_ij), from a precomputed cache.
inline double objective_regression(const ForwardCache& cache, const LabeledDataset& data,
                                   const RegressionLossKind& kind) {
    const Matrix& out = cache.output();
    if (out.rows() != data.Y.rows() || out.cols() != data.Y.cols())
        throw std::invalid_argument("objective_regression: output/target shape mismatch");
    double phi = 0.0;
    for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j)
            phi += regression_loss_eval(kind, out(i, j) - data.Y(i, j)).first;
    return phi;
}

inline double objective_regression(const Architecture& arch, const NetworkParams& params,
                                   const LabeledDataset& data, const RegressionLossKind& kind) {
    return objective_regression(forward(arch, params, data.X), data, kind);
}

/// Phi = sum_ij l1/l2((F_L)_ij - Y_ij) with the true-class case split;
/// equals sum_ij max{0, 1 - y f}^2 under the +-1 encoding.
inline double objective_separable(const ForwardCache& cache, const LabeledDataset& data) {
    if (!data.class_of)
        throw std::invalid_argument("objective_separable: dataset has no class labels");
    const Matrix& out = cache.output();
    if (out.rows() != data.Y.rows() || out.cols() != data.Y.cols())
        throw std::invalid_argument("objective_separable: output/target shape mismatch");
    double phi = 0.0;
    for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j) {
            const bool in_class = (*data.class_of)[static_cast<std::size_t>(i)] == j;
            phi += separable_loss_eval(out(i, j) - data.Y(i, j), in_class).first;
        }
    return phi;
}

inline double objective_separable(const Architecture& arch, const NetworkParams& params,
                                  const LabeledDataset& data) {
    return objective_separable(forward(arch, params, data.X), data);
}

/// Squared-hinge closed form of the separable objective.
inline double squared_hinge_objective(const ForwardCache& cache, const LabeledDataset& data) {
    const Matrix& out = cache.output();
    double phi = 0.0;
    for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j) {
            const double h = std::max(0.0, 1.0 - data.Y(i, j) * out(i, j));
            phi += h * h;
        }
    return phi;
}

}  // namespace losscape
