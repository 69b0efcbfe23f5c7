#pragma once

#include "losscape/trainer.hpp"

#include <random>
#include <vector>

namespace losscape {

struct GradCheckCase {
    Architecture arch;
    LossSpec loss;
    Index samples;
    double rel_error;
};

struct GradCheckResult {
    std::vector<GradCheckCase> cases;
    double max_rel_error = 0.0;
};

/// Backpropagation vs central differences over random configurations:
/// L in [1,4], widths in [1,6], N in [1,8], cycling all activations
/// against squared / pseudo-Huber / Cauchy losses.
inline GradCheckResult run_grad_check_suite(unsigned long seed, int num_configs = 20) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> depth_dist(1, 4);
    std::uniform_int_distribution<Index> width_dist(1, 6);
    std::uniform_int_distribution<Index> sample_dist(1, 8);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::vector<ActivationKind> activations = {
        ActivationKind::sigmoid(), ActivationKind::tanh(), ActivationKind::softplus(1.0)};
    const std::vector<RegressionLossKind> losses = {RegressionLossKind::squared(),
                                                    RegressionLossKind::pseudo_huber(1.0),
                                                    RegressionLossKind::cauchy(1.0)};

    GradCheckResult result;
    for (int c = 0; c < num_configs; ++c) {
        GradCheckCase gc;
        const int L = depth_dist(rng);
        gc.arch.widths.push_back(width_dist(rng));
        for (int l = 0; l < L; ++l) gc.arch.widths.push_back(width_dist(rng));
        gc.arch.activation = activations[static_cast<std::size_t>(c) % activations.size()];
        gc.loss = LossSpec::regression_loss(
            losses[static_cast<std::size_t>(c / 3) % losses.size()]);
        gc.samples = sample_dist(rng);

        Matrix X(gc.samples, gc.arch.input_dim());
        Matrix Y(gc.samples, gc.arch.output_dim());
        for (Index i = 0; i < X.rows(); ++i)
            for (Index j = 0; j < X.cols(); ++j) X(i, j) = gauss(rng);
        for (Index i = 0; i < Y.rows(); ++i)
            for (Index j = 0; j < Y.cols(); ++j) Y(i, j) = gauss(rng);
        // duplicate rows are astronomically unlikely but would trip the
        // dataset invariant; redraw if it happens
        LabeledDataset data = [&] {
            for (;;) {
                try {
                    return LabeledDataset::regression(X, Y);
                } catch (const std::invalid_argument&) {
                    for (Index i = 0; i < X.rows(); ++i)
                        for (Index j = 0; j < X.cols(); ++j) X(i, j) = gauss(rng);
                }
            }
        }();

        NetworkParams params = random_params(gc.arch, 1.0, rng);
        const Vector theta = flatten(params);
        const ForwardCache cache = forward(gc.arch, params, data.X);
        const Vector analytic = flatten_gradient(backward(gc.arch, params, cache, data, gc.loss));
        const Vector fd = gradient_fd(make_objective(gc.arch, data, gc.loss), theta);
        gc.rel_error = (analytic - fd).norm() / std::max(1.0, analytic.norm());
        result.max_rel_error = std::max(result.max_rel_error, gc.rel_error);
        result.cases.push_back(std::move(gc));
    }
    return result;
}

}  // namespace losscape
