#include <doctest.h>

#include "fixtures.hpp"
#include "ltisets/detail/rng.hpp"
#include "ltisets/inference.hpp"
#include "oracles.hpp"

using namespace ltisets;
using inference::DataBatch;
using inference::PriorBounds;
using matcore::SymMatrix;

namespace {

// certificate re-check, independent of the solver: both Cor.-1 blocks PSD at
// the returned completion
void check_certificate(const DataBatch& data, double L, double alpha,
                       const interp::CompletionCertificate& cert, double eps) {
    const Eigen::Index n = data.n();
    const Eigen::Index t = data.t();
    const Matrix& gamma = cert.offdiag[0][0];
    REQUIRE(gamma.rows() == n);
    REQUIRE(gamma.cols() == t);
    Matrix ver1 = cert.assembled();
    CHECK(matcore::lambda_min(SymMatrix(0.5 * (ver1 + ver1.transpose()))) >= -eps);
    const Matrix y = data.shifted_outputs();
    Matrix ver2 = L * L * data.X.transpose() * data.X + data.X.transpose() * gamma +
                  gamma.transpose() * data.X +
                  static_cast<double>(t) * alpha * alpha * Matrix::Identity(t, t) -
                  y.transpose() * y;
    CHECK(matcore::lambda_min(SymMatrix(0.5 * (ver2 + ver2.transpose()))) >= -eps);
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("empty batch is vacuously consistent") {
    const DataBatch data(Matrix::Zero(2, 0), Matrix::Zero(2, 0), Matrix::Zero(1, 0),
                         Matrix::Zero(2, 1));
    const auto report = inference::verify(data, PriorBounds(1.0, 0.0));
    CHECK(report.consistent);
}

TEST_CASE("dataset 1 verification around the minimal noise level") {
    const auto ds1 = fixtures::dataset1();
    const auto good = inference::verify(ds1, PriorBounds(1.0, 0.065));
    CHECK(good.consistent);
    REQUIRE(good.certificate.has_value());
    check_certificate(ds1, 1.0, 0.065, *good.certificate, 1e-5);

    const auto bad = inference::verify(ds1, PriorBounds(1.0, 0.05));
    CHECK_FALSE(bad.consistent);
}

TEST_CASE("dataset 2 verification around the minimal noise level") {
    // With the printed matrices the minimal noise level at L = 1 is ~0.602,
    // well above the published 0.32 (the print does not match the reported
    // results; pinned by two independent convex solvers).
    const auto ds2 = fixtures::dataset2();
    CHECK(inference::verify(ds2, PriorBounds(1.0, 0.61)).consistent);
    CHECK_FALSE(inference::verify(ds2, PriorBounds(1.0, 0.55)).consistent);
    CHECK_FALSE(inference::verify(ds2, PriorBounds(1.0, 0.32)).consistent);
}

TEST_CASE("noise-free data from a known gain") {
    Matrix a(2, 2);
    a << 0.0, 0.9, 0.3, 0.0;  // singular values 0.9 and 0.3
    detail::Rng rng(5);
    Matrix x(2, 6);
    x.col(0) = rng.normal_vector(2);
    for (int k = 1; k < 6; ++k) x.col(k) = a * x.col(k - 1);
    Matrix X(2, 5), Xp(2, 5);
    for (int k = 0; k < 5; ++k) {
        X.col(k) = x.col(4 - k);
        Xp.col(k) = x.col(5 - k);
    }
    const DataBatch data = fixtures::autonomous_batch(X, Xp);
    CHECK(inference::verify(data, PriorBounds(0.9, 0.0)).consistent);
    CHECK_FALSE(inference::verify(data, PriorBounds(0.5, 0.0)).consistent);
}

TEST_CASE("min_noise on the example datasets") {
    const auto r1 = inference::min_noise(fixtures::dataset1(), 1.0);
    CHECK(r1.value >= 0.05);
    CHECK(r1.value <= 0.07);
    CHECK(r1.value == doctest::Approx(fixtures::kAlphaStarDs1).epsilon(0.05));
    CHECK(std::abs(r1.value - r1.cross_check_value) <= 1e-3);
    REQUIRE(r1.certificate.has_value());

    const auto r2 = inference::min_noise(fixtures::dataset2(), 1.0);
    CHECK(r2.value == doctest::Approx(fixtures::kAlphaStarDs2).epsilon(0.01));
}

TEST_CASE("min_noise is zero for exactly interpolable data") {
    Matrix a(2, 2);
    a << 0.2, 0.4, -0.1, 0.3;
    Matrix x(2, 5);
    x.col(0) << 1.0, -1.0;
    for (int k = 1; k < 5; ++k) x.col(k) = a * x.col(k - 1);
    Matrix X(2, 4), Xp(2, 4);
    for (int k = 0; k < 4; ++k) {
        X.col(k) = x.col(3 - k);
        Xp.col(k) = x.col(4 - k);
    }
    const auto r = inference::min_noise(fixtures::autonomous_batch(X, Xp), 1.0);
    CHECK(r.value == 0.0);
}

TEST_CASE("min_gain on the example datasets") {
    const auto r1 = inference::min_gain(fixtures::dataset1(), 0.06);
    CHECK(r1.value >= 0.98);
    CHECK(r1.value <= 1.02);

    // at the published alpha = 0.32 the printed second dataset admits no gain
    CHECK_THROWS_AS(inference::min_gain(fixtures::dataset2(), 0.32), Infeasible);

    const auto r2 = inference::min_gain(fixtures::dataset2(), 0.61);
    CHECK(r2.value == doctest::Approx(fixtures::kGainStarDs2At061).epsilon(0.02));
}

TEST_CASE("min_gain vanishes for zero-map data") {
    Matrix X(2, 3), Xp(2, 3);
    X << 1.0, -0.5, 0.25, 0.5, 1.0, -1.0;
    Xp.setZero();
    const auto r = inference::min_gain(fixtures::autonomous_batch(X, Xp), 0.0);
    CHECK(r.value <= 1e-3);
}

TEST_CASE("tradeoff curve is nonincreasing") {
    const auto curve = inference::tradeoff_curve(fixtures::dataset1(), {1.0, 2.9});
    REQUIRE(curve.size() == 2);
    REQUIRE(curve[0].alpha_star.has_value());
    REQUIRE(curve[1].alpha_star.has_value());
    CHECK(*curve[0].alpha_star == doctest::Approx(fixtures::kAlphaStarDs1).epsilon(0.05));
    CHECK(*curve[1].alpha_star <= 0.02);
    CHECK(*curve[1].alpha_star <= *curve[0].alpha_star + 1e-6);

    CHECK_THROWS_AS(inference::tradeoff_curve(fixtures::dataset1(), {2.0, 1.0}),
                    InvalidMatrix);
}

TEST_CASE("feasibility verdicts are monotone in L and alpha") {
    const auto ds1 = fixtures::dataset1();
    const std::vector<double> ls{0.8, 1.0, 1.5};
    const std::vector<double> alphas{0.03, 0.0607, 0.1};
    std::vector<std::vector<bool>> verdict(ls.size(),
                                           std::vector<bool>(alphas.size(), false));
    for (std::size_t i = 0; i < ls.size(); ++i) {
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            verdict[i][j] =
                inference::verify(ds1, PriorBounds(ls[i], alphas[j])).consistent;
        }
    }
    for (std::size_t i = 0; i < ls.size(); ++i) {
        for (std::size_t j = 0; j < alphas.size(); ++j) {
            if (!verdict[i][j]) continue;
            for (std::size_t i2 = i; i2 < ls.size(); ++i2) {
                for (std::size_t j2 = j; j2 < alphas.size(); ++j2) {
                    CHECK(verdict[i2][j2]);
                }
            }
        }
    }
}

TEST_CASE("verdicts are scale invariant") {
    const auto ds1 = fixtures::dataset1();
    for (double factor : {10.0, 0.1}) {
        const DataBatch scaled = fixtures::autonomous_batch(factor * ds1.X,
                                                            factor * ds1.Xplus);
        for (double alpha : {0.05, 0.07}) {
            const bool base = inference::verify(ds1, PriorBounds(1.0, alpha)).consistent;
            const bool mapped =
                inference::verify(scaled, PriorBounds(1.0, alpha * factor)).consistent;
            CHECK(base == mapped);
        }
    }
}

TEST_CASE("agreement with the explicit model search on tiny instances") {
    // n = t = 2: feasibility iff some A with ||A|| <= L leaves a residual
    // V = Y - AX with ||V|| <= alpha sqrt(t)
    Matrix X(2, 2), Xp(2, 2);
    X << 1.0, 0.4, -0.3, 1.1;
    Xp << 0.2, 0.9, 0.8, -0.5;
    const DataBatch data = fixtures::autonomous_batch(X, Xp);

    oracles::ModelOracle oracle;
    oracle.X = X;
    oracle.Y = Xp;
    oracle.x = Vector::Zero(2);
    oracle.L = 1.0;

    for (double alpha : {0.2, 0.35, 0.5, 0.65, 0.8}) {
        // reuse the one-step oracle with a dummy current state: prediction of
        // the zero state reduces to plain data consistency with budget
        // alpha sqrt(t+1); rescale to match the verification budget.
        const double budget = alpha * std::sqrt(2.0);
        oracle.budget = budget;
        // oracle.best_slack with y_plus = 0 and x = 0 reduces to
        // min over A of ||[0, V]|| = ||V||
        const double slack = oracle.best_slack(Vector::Zero(2));
        if (std::abs(slack) <= 1e-3) continue;  // too close to the boundary
        const bool expected = slack > 0.0;
        const bool got = inference::verify(data, PriorBounds(1.0, alpha)).consistent;
        CHECK(got == expected);
    }
}

TEST_CASE("energy metric folds in conservatively") {
    const auto ds1 = fixtures::dataset1();
    Matrix p(2, 2);
    p << 4.0, 0.0, 0.0, 1.0;
    const PriorBounds bounds(1.0, 0.08, SymMatrix(p));
    const auto report = inference::verify(ds1, bounds);
    CHECK(report.conservative);
    CHECK(report.effective_alpha == doctest::Approx(0.16));
}

}  // TEST_SUITE
