// End-to-end acceptance checks. Prints one pass/fail line per
// criterion; exit code is the number of failures.

#include "losscape/certify.hpp"
#include "losscape/construct.hpp"
#include "losscape/gradcheck.hpp"
#include "losscape/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

using namespace losscape;

namespace {

int failures = 0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

void report(const char* id, bool pass, const std::string& detail) {
    std::printf("%s: %s%s%s\n", id, pass ? "pass" : "fail", detail.empty() ? "" : " — ",
                detail.c_str());
    if (!pass) ++failures;
}

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double lo = 0.0,
                     double hi = 0.0) {
    Matrix m(rows, cols);
    if (lo < hi) {
        std::uniform_real_distribution<double> u(lo, hi);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    } else {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    }
    return m;
}

// A1: backpropagation agrees with central differences across the
// randomized configuration sweep.
void a1() {
    const GradCheckResult res = run_grad_check_suite(12345, 20);
    report("A1", res.max_rel_error <= 1e-5,
           "max_rel_error=" + fmt(res.max_rel_error) + " over " +
               std::to_string(res.cases.size()) + " configs");
}

// A2: the wide-layer construction reaches full rank on every random
// dataset for every activation, within the alpha schedule.
void a2() {
    std::mt19937_64 rng(202);
    const std::vector<ActivationKind> acts = {ActivationKind::sigmoid(), ActivationKind::tanh(),
                                              ActivationKind::softplus(1.0)};
    int datasets = 0, successes = 0;
    std::string detail;
    for (int t = 0; t < 50; ++t) {
        const Index N = 2 + static_cast<Index>(rng() % 9);  // [2,10]
        const Index d = 1 + static_cast<Index>(rng() % 5);  // [1,5]
        const Matrix Z = random_matrix(N, d, rng);
        ++datasets;
        bool all = true;
        for (const ActivationKind& act : acts) {
            const double beta = act.bounded() ? 0.0 : 1.0;
            try {
                auto [W, b, trace] = build_wide_layer(Z, N - 1, beta, act, rng);
                if (trace.achieved_rank != N || trace.alpha_final > 32768.0) all = false;
            } catch (const std::exception& e) {
                all = false;
                detail = e.what();
            }
        }
        if (all) ++successes;
    }
    report("A2", successes == datasets,
           std::to_string(successes) + "/" + std::to_string(datasets) +
               " datasets x 3 activations" + (detail.empty() ? "" : "; last error: " + detail));
}

// A3: no rank-deficient draw in 1000 random parameter samples at
// n_k = N-1 (empirical measure-zero check).
void a3() {
    std::mt19937_64 rng(303);
    Architecture arch{{2, 5, 1}, ActivationKind::sigmoid()};
    Matrix X = random_matrix(6, 2, rng);
    const RankProbeResult res = rank_probe(arch, X, 1, 1000, 1.0, rng);
    report("A3", res.deficient == 0,
           std::to_string(res.deficient) + " deficient of 1000 draws");
}

// A4: linearly-independent-inputs regime. Trained runs that are
// critical with full column ranks interpolate (phi <= 1e-6), and the
// certifier flags exactly those runs.
void a4() {
    std::mt19937_64 data_rng(404);
    Architecture arch{{6, 4, 3, 2}, ActivationKind::sigmoid()};
    const Matrix X = random_matrix(5, 6, data_rng);
    const Matrix Y = random_matrix(5, 2, data_rng, 0.2, 0.8);
    const LabeledDataset data = LabeledDataset::regression(X, Y);
    const LossSpec loss = LossSpec::regression_loss(RegressionLossKind::squared());
    const GradObjective f = make_grad_objective(arch, data, loss);

    bool ok = true;
    std::string detail;
    int certified = 0, converged = 0;
    for (unsigned long seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed);
        TrainConfig cfg;
        cfg.max_iters = 30000;
        const TrainResult res = minimize(f, flatten(random_params(arch, 1.0, rng)), cfg);
        const NetworkParams p = unflatten(arch, res.theta);
        const double phi = objective_regression(arch, p, data, RegressionLossKind::squared());
        const bool critical = res.grad_norm <= 1e-7;
        const bool ranks = check_column_ranks(p, 2).all_full;
        const CertificationReport rep =
            certify_independent_inputs(arch, p, data, RegressionLossKind::squared());
        if (critical) ++converged;
        if (critical && ranks && phi > 1e-6) {
            ok = false;
            detail = "seed " + std::to_string(seed) + ": critical full-rank run has phi=" +
                     fmt(phi);
        }
        const bool should_certify = critical && ranks;  // rank([X,1])=N holds by construction
        if ((rep.verdict == Verdict::CertifiedGlobalMinimum) != should_certify) {
            ok = false;
            detail = "seed " + std::to_string(seed) + ": verdict/hypothesis mismatch";
        }
        if (rep.verdict == Verdict::CertifiedGlobalMinimum) ++certified;
    }
    if (certified == 0) {
        ok = false;
        detail = "no run certified";
    }
    report("A4", ok,
           detail.empty() ? std::to_string(certified) + "/10 certified, " +
                                std::to_string(converged) + "/10 converged"
                          : detail);
}

// A5: wide-layer regime with block-Hessian non-degeneracy on I={2,3}.
// Certified runs must interpolate; no false certification.
void a5() {
    std::mt19937_64 data_rng(505);
    Architecture arch{{2, 8, 3, 1}, ActivationKind::sigmoid()};
    const Matrix X = random_matrix(6, 2, data_rng);
    const Matrix Y = random_matrix(6, 1, data_rng, 0.2, 0.8);
    const LabeledDataset data = LabeledDataset::regression(X, Y);
    const LossSpec loss = LossSpec::regression_loss(RegressionLossKind::squared());
    const GradObjective f = make_grad_objective(arch, data, loss);

    bool ok = true;
    std::string detail;
    int certified = 0;
    for (unsigned long seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed);
        TrainConfig cfg;
        cfg.max_iters = 30000;
        const TrainResult res = minimize(f, flatten(random_params(arch, 1.0, rng)), cfg);
        const NetworkParams p = unflatten(arch, res.theta);
        const double phi = objective_regression(arch, p, data, RegressionLossKind::squared());
        const CertificationReport rep =
            certify_main(arch, p, data, RegressionLossKind::squared(), 1, {2, 3});
        if (rep.verdict == Verdict::CertifiedGlobalMinimum) {
            ++certified;
            if (phi > 1e-6) {
                ok = false;
                detail = "seed " + std::to_string(seed) +
                         " falsely certified with phi=" + fmt(phi);
            }
        } else if (res.grad_norm <= 1e-7 && rep.verdict != Verdict::ConditionsNotMet) {
            ok = false;
            detail = "seed " + std::to_string(seed) + ": converged run reported " +
                     to_string(rep.verdict);
        }
    }
    report("A5", ok,
           detail.empty() ? std::to_string(certified) + "/10 certified" : detail);
}

// A6: separable-loss regime. Converged runs certify with phi <= 1e-8
// and the squared-hinge identity holds at every training iterate.
void a6() {
    Architecture arch{{2, 8, 2}, ActivationKind::tanh()};
    Matrix X(8, 2);
    X << -2.0, 0.1, -2.2, -0.3, -1.8, 0.4, -2.4, 0.0,
          2.0, -0.1, 2.3, 0.2, 1.9, -0.4, 2.5, 0.3;
    const LabeledDataset data =
        LabeledDataset::classification(X, {0, 0, 0, 0, 1, 1, 1, 1}, 2);
    const LossSpec loss = LossSpec::separable_loss();

    double max_identity_gap = 0.0;
    const GradObjective base = make_grad_objective(arch, data, loss);
    const GradObjective f = [&](const Vector& theta) {
        const ForwardCache cache = forward(arch, unflatten(arch, theta), data.X);
        max_identity_gap =
            std::max(max_identity_gap, std::abs(objective_separable(cache, data) -
                                                squared_hinge_objective(cache, data)));
        return base(theta);
    };

    bool ok = true;
    std::string detail;
    int certified = 0, converged = 0;
    for (unsigned long seed = 1; seed <= 5; ++seed) {
        std::mt19937_64 rng(seed);
        TrainConfig cfg;
        cfg.max_iters = 20000;
        const TrainResult res = minimize(f, flatten(random_params(arch, 1.0, rng)), cfg);
        if (res.status != TrainStatus::Converged) continue;
        ++converged;
        const NetworkParams p = unflatten(arch, res.theta);
        const double phi = objective_separable(arch, p, data);
        const CertificationReport rep = certify_separable(arch, p, data, 1);
        if (rep.verdict == Verdict::CertifiedGlobalMinimum) {
            ++certified;
            if (phi > 1e-8) {
                ok = false;
                detail = "seed " + std::to_string(seed) +
                         " certified with phi=" + fmt(phi);
            }
        }
    }
    if (max_identity_gap > 1e-12) {
        ok = false;
        detail = "squared-hinge identity gap " + fmt(max_identity_gap);
    }
    if (converged == 0 || certified == 0) {
        ok = false;
        detail = "converged=" + std::to_string(converged) +
                 " certified=" + std::to_string(certified);
    }
    report("A6", ok,
           detail.empty() ? std::to_string(certified) + "/" + std::to_string(converged) +
                                " converged runs certified"
                          : detail);
}

// A7: the linear-network rank bound holds on 100 random identity nets.
void a7() {
    std::mt19937_64 rng(707);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int holds = 0;
    for (int t = 0; t < 100; ++t) {
        const int L = 1 + static_cast<int>(rng() % 4);
        Architecture arch;
        arch.activation = ActivationKind::identity();
        for (int l = 0; l <= L; ++l) arch.widths.push_back(1 + static_cast<Index>(rng() % 6));
        NetworkParams p = random_params(arch, 1.0, rng);
        for (Vector& b : p.biases)
            for (Index i = 0; i < b.size(); ++i) b(i) = gauss(rng);
        const Matrix X = random_matrix(5, arch.input_dim(), rng);
        if (linear_rank_bound(arch, p, X, L).holds) ++holds;
    }
    report("A7", holds == 100, std::to_string(holds) + "/100 nets satisfy the bound");
}

// A8: the two 4x4 example Hessians yield all four non-degeneracy
// verdicts exactly.
void a8() {
    Matrix hx = Matrix::Zero(4, 4);
    hx(0, 0) = 1.0;
    hx(1, 1) = 1.0;
    Matrix hy(4, 4);
    hy << 1, 0, 1, 0,
          0, 1, 0, 1,
          1, 0, 0, 0,
          0, 1, 0, 0;
    const double tau = 1e-6;
    const bool ok = !check_nondegenerate(hx, tau).nondegenerate &&
                    check_nondegenerate(principal_submatrix(hx, {0, 1}), tau).nondegenerate &&
                    check_nondegenerate(hy, tau).nondegenerate &&
                    !check_nondegenerate(principal_submatrix(hy, {2, 3}), tau).nondegenerate;
    report("A8", ok, "four verdicts on the 4x4 example Hessians");
}

// A9: bounded audits for sigmoid/tanh; growth audits for softplus with
// the per-alpha constants.
void a9() {
    bool ok = audit_activation_bounded(ActivationKind::sigmoid()).pass &&
              audit_activation_bounded(ActivationKind::tanh()).pass;
    std::string detail;
    for (double alpha : {0.5, 1.0, 4.0}) {
        const GrowthBounds rho{1.0 / alpha, alpha, 1.0, std::log(2.0) / alpha};
        const ActivationAudit a = audit_activation_growth(ActivationKind::softplus(alpha), rho);
        if (!a.pass) {
            ok = false;
            detail = "softplus alpha=" + std::to_string(alpha) + " failed at t=" +
                     fmt(a.violating_t);
        }
    }
    report("A9", ok, detail);
}

}  // namespace

int main() {
    a1();
    a2();
    a3();
    a4();
    a5();
    a6();
    a7();
    a8();
    a9();
    return failures;
}
