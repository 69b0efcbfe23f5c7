#include "losscape/certify.hpp"
#include "losscape/construct.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace losscape;

TEST_CASE("check_linear_independence") {
    CHECK(check_linear_independence(Matrix::Identity(3, 3)).ok);

    Matrix dup(3, 3);
    dup << 1, 2, 3, 1, 2, 3, 4, 5, 6;
    CHECK_FALSE(check_linear_independence(dup).ok);

    // N = d+2 generic points: rank([X,1]) <= d+1 < N
    std::mt19937_64 rng(2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix X(4, 2);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 2; ++j) X(i, j) = gauss(rng);
    const RankVerdict v = check_linear_independence(X);
    CHECK_FALSE(v.ok);
    CHECK(v.rank <= 3);
}

TEST_CASE("check_column_ranks") {
    Architecture arch{{3, 3, 3}, ActivationKind::sigmoid()};
    NetworkParams p = NetworkParams::zeros(arch);
    p.weights[0] = Matrix::Identity(3, 3);
    p.weights[1] = Matrix::Identity(3, 3);
    CHECK(check_column_ranks(p, 2).all_full);
    CHECK(check_column_ranks(p, 2).pyramidal);

    p.weights[1].col(1).setZero();
    const ColumnRankReport rep = check_column_ranks(p, 2);
    CHECK_FALSE(rep.all_full);
    CHECK(rep.per_layer.size() == 1);
    CHECK(rep.per_layer[0].layer == 2);
    CHECK(rep.per_layer[0].rank == 2);

    // widening layer (3 -> 5) can never have full column rank
    Architecture wide{{3, 3, 5}, ActivationKind::sigmoid()};
    NetworkParams pw = NetworkParams::zeros(wide);
    std::mt19937_64 rng(3);
    pw = random_params(wide, 1.0, rng);
    const ColumnRankReport wrep = check_column_ranks(pw, 2);
    CHECK_FALSE(wrep.pyramidal);
    CHECK_FALSE(wrep.all_full);

    CHECK(check_column_ranks(p, 3).all_full);  // vacuous past L
    CHECK_THROWS_AS(check_column_ranks(p, 0), std::invalid_argument);
}

TEST_CASE("check_feature_rank") {
    Architecture arch{{2, 3, 1}, ActivationKind::sigmoid()};

    // N=1 always has rank 1 with the ones column
    std::mt19937_64 rng(4);
    NetworkParams p = random_params(arch, 1.0, rng);
    Matrix X1(1, 2);
    X1 << 0.3, -0.7;
    CHECK(check_feature_rank(forward(arch, p, X1), 1).ok);

    // zero parameters collapse every row: rank 1 < N
    NetworkParams z = NetworkParams::zeros(arch);
    Matrix X(3, 2);
    X << 0, 0, 0, 1, 1, 0;
    CHECK_FALSE(check_feature_rank(forward(arch, z, X), 1).ok);

    CHECK_THROWS_AS(check_feature_rank(forward(arch, z, X), 5), std::out_of_range);
}

TEST_CASE("constructed wide layer passes check_feature_rank") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix Z(5, 3);
    for (Index i = 0; i < 5; ++i)
        for (Index j = 0; j < 3; ++j) Z(i, j) = gauss(rng);
    auto [W, b, trace] = build_wide_layer(Z, 4, 0.0, ActivationKind::sigmoid(), rng);
    Architecture arch{{3, 4}, ActivationKind::sigmoid()};
    NetworkParams p;
    p.weights.push_back(W);
    p.biases.push_back(b);
    CHECK(check_feature_rank(forward(arch, p, Z), 1).ok);
}

TEST_CASE("check_separability on 1-D point sets") {
    Matrix two(2, 1);
    two << 0.0, 1.0;
    const SeparabilityCertificate s = check_separability(two, {0, 1}, 2);
    CHECK(s.status == SeparabilityStatus::Separable);
    CHECK(s.min_margin > 0.0);

    // A, B, A pattern: class B cannot be cut out by one threshold
    Matrix aba(3, 1);
    aba << 0.0, 1.0, 2.0;
    const SeparabilityCertificate ns = check_separability(aba, {0, 1, 0}, 2);
    CHECK(ns.status == SeparabilityStatus::NotSeparable);

    CHECK_THROWS_AS(check_separability(aba, {0, 5, 0}, 2), std::invalid_argument);
}

TEST_CASE("full-row-rank features separate any labels exactly") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix F(4, 5);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 5; ++j) F(i, j) = gauss(rng);
    const SeparabilityCertificate s = check_separability(F, {0, 1, 0, 1}, 2);
    CHECK(s.status == SeparabilityStatus::Separable);
    CHECK(s.method == "exact_solve");
    CHECK(s.min_margin >= 1.0 - 1e-9);
    // verify the witnesses directly
    for (Index j = 0; j < 2; ++j)
        for (Index i = 0; i < 4; ++i) {
            const double val = s.a[static_cast<std::size_t>(j)].dot(F.row(i)) +
                               s.b[static_cast<std::size_t>(j)];
            const std::vector<int> classes{0, 1, 0, 1};
            CHECK((val > 0.0) == (classes[static_cast<std::size_t>(i)] == j));
        }
}

namespace {

struct TrainedFixture {
    Architecture arch;
    NetworkParams params;
    LabeledDataset data;
};

// small interpolating fixture: N=3 independent inputs in d=4
TrainedFixture independent_inputs_fixture() {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Architecture arch{{4, 3, 2}, ActivationKind::sigmoid()};
    Matrix X(3, 4);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 4; ++j) X(i, j) = gauss(rng);
    NetworkParams p = random_params(arch, 1.0, rng);
    // targets = exact network output so the point is a zero-residual
    // critical point of the squared loss
    const ForwardCache cache = forward(arch, p, X);
    return {arch, p, LabeledDataset::regression(X, cache.output())};
}

}  // namespace

TEST_CASE("certify_independent_inputs verdicts") {
    TrainedFixture fx = independent_inputs_fixture();
    const CertificationReport rep = certify_independent_inputs(
        fx.arch, fx.params, fx.data, RegressionLossKind::squared());
    CHECK(rep.theorem == "independent_inputs");
    CHECK(rep.verdict == Verdict::CertifiedGlobalMinimum);
    CHECK(rep.grad_norm == 0.0);
    CHECK(rep.objective <= 1e-6);

    // breaking a column rank flips the verdict to conditions_not_met
    TrainedFixture broken = independent_inputs_fixture();
    broken.params.weights[1].setZero();
    const ForwardCache cache = forward(broken.arch, broken.params, broken.data.X);
    broken.data = LabeledDataset::regression(broken.data.X, cache.output());
    const CertificationReport rep2 = certify_independent_inputs(
        broken.arch, broken.params, broken.data, RegressionLossKind::squared());
    CHECK(rep2.verdict == Verdict::ConditionsNotMet);

    // random point far from critical
    TrainedFixture rnd = independent_inputs_fixture();
    rnd.data.Y.array() += 0.3;
    const CertificationReport rep3 = certify_independent_inputs(
        rnd.arch, rnd.params, rnd.data, RegressionLossKind::squared());
    CHECK(rep3.verdict == Verdict::NotCritical);
}

TEST_CASE("certify_main precondition checks") {
    Architecture arch{{2, 8, 3, 1}, ActivationKind::sigmoid()};
    std::mt19937_64 rng(9);
    NetworkParams p = random_params(arch, 1.0, rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix X(4, 2), Y(4, 1);
    for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 2; ++j) X(i, j) = gauss(rng);
        Y(i, 0) = 0.5;
    }
    const LabeledDataset d = LabeledDataset::regression(X, Y);
    const RegressionLossKind loss = RegressionLossKind::squared();

    CHECK_THROWS_AS(certify_main(arch, p, d, loss, 0, {1}), std::invalid_argument);
    CHECK_THROWS_AS(certify_main(arch, p, d, loss, 3, {4}), std::invalid_argument);
    CHECK_THROWS_AS(certify_main(arch, p, d, loss, 1, {3}), std::invalid_argument);  // omits k+1
    CHECK_THROWS_AS(certify_main(arch, p, d, loss, 1, {}), std::invalid_argument);

    // non-critical random point is reported, not certified
    const CertificationReport rep = certify_main(arch, p, d, loss, 1, {2, 3});
    CHECK(rep.verdict == Verdict::NotCritical);

    // width condition: n_k = N-2 shows up as a failed condition
    Matrix X2(10, 2), Y2(10, 1);
    for (Index i = 0; i < 10; ++i) {
        for (Index j = 0; j < 2; ++j) X2(i, j) = gauss(rng);
        Y2(i, 0) = 0.5;
    }
    const CertificationReport rep2 =
        certify_main(arch, p, LabeledDataset::regression(X2, Y2), loss, 1, {2, 3});
    bool width_failed = false;
    for (const Condition& c : rep2.conditions)
        if (c.name == "n_k>=N-1") width_failed = !c.satisfied;
    CHECK(width_failed);
}

TEST_CASE("certify_separable verdicts") {
    // two-class 1-D data through a tanh net scaled to saturate: the
    // zero-loss region is flat, so the gradient vanishes there
    Architecture arch{{1, 2, 2}, ActivationKind::tanh()};
    NetworkParams p = NetworkParams::zeros(arch);
    p.weights[0] << 50.0, -50.0;
    p.weights[1] << -50.0, 40.0, 50.0, -60.0;
    Matrix X(2, 1);
    X << -1.0, 1.0;
    const LabeledDataset d = LabeledDataset::classification(X, {0, 1}, 2);

    const CertificationReport rep = certify_separable(arch, p, d, 0);
    CHECK(rep.theorem == "separable");
    CHECK(rep.verdict == Verdict::CertifiedGlobalMinimum);
    CHECK(rep.objective <= 1e-8);

    // A,B,A data with k = 0 cannot be separable
    Matrix aba(3, 1);
    aba << 0.0, 1.0, 2.0;
    const LabeledDataset dn = LabeledDataset::classification(aba, {0, 1, 0}, 2);
    Architecture arch3{{1, 2, 2}, ActivationKind::tanh()};
    const CertificationReport rep2 = certify_separable(arch3, p, dn, 0);
    CHECK(rep2.verdict != Verdict::CertifiedGlobalMinimum);

    CHECK_THROWS_AS(certify_separable(arch, p, d, 2), std::invalid_argument);
}

TEST_CASE("identity activation is rejected by certifiers") {
    Architecture arch{{2, 2}, ActivationKind::identity()};
    NetworkParams p = NetworkParams::zeros(arch);
    Matrix X(2, 2);
    X << 1, 0, 0, 1;
    const LabeledDataset d = LabeledDataset::regression(X, Matrix::Zero(2, 2));
    CHECK_THROWS_AS(certify_independent_inputs(arch, p, d, RegressionLossKind::squared()),
                    std::invalid_argument);
}

TEST_CASE("reports are bit-for-bit reproducible") {
    TrainedFixture fx = independent_inputs_fixture();
    const CertificationReport a = certify_independent_inputs(
        fx.arch, fx.params, fx.data, RegressionLossKind::squared());
    const CertificationReport b = certify_independent_inputs(
        fx.arch, fx.params, fx.data, RegressionLossKind::squared());
    CHECK(a.verdict == b.verdict);
    CHECK(a.grad_norm == b.grad_norm);
    CHECK(a.objective == b.objective);
    REQUIRE(a.conditions.size() == b.conditions.size());
    for (std::size_t i = 0; i < a.conditions.size(); ++i) {
        CHECK(a.conditions[i].value == b.conditions[i].value);
        CHECK(a.conditions[i].satisfied == b.conditions[i].satisfied);
    }
}
