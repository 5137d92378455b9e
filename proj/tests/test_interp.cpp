#include <doctest.h>

#include "fixtures.hpp"
#include "ltisets/detail/rng.hpp"
#include "ltisets/interp.hpp"
#include "oracles.hpp"

using namespace ltisets;
using interp::EllipsoidParam;
using interp::FeasibleSetTag;
using interp::InterpInstance;
using matcore::SymMatrix;

namespace {

InterpInstance random_feasible_instance(detail::Rng& rng, int n, int m, int t) {
    const Matrix z = rng.normal_matrix(m, t);
    Matrix r = rng.normal_matrix(m, m);
    const SymMatrix g(r * r.transpose() + 0.2 * Matrix::Identity(m, m));
    const Matrix m_op = oracles::random_bounded_operator(rng, n, m, g, false);
    return InterpInstance(z, m_op * z, g);
}

}  // namespace

TEST_SUITE("interp") {

TEST_CASE("interp_exists basics") {
    CHECK(interp::interp_exists(
        InterpInstance(Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2),
                       SymMatrix::identity(2))));

    Matrix z(2, 1), y(2, 1);
    z << 0.0, 1.0;
    y << 2.0, 0.0;
    CHECK_FALSE(interp::interp_exists(InterpInstance(z, y, SymMatrix::identity(2))));

    // the second example dataset needs noise: no unit-norm interpolant exists
    const auto ds2 = fixtures::dataset2();
    CHECK_FALSE(interp::interp_exists(
        InterpInstance(ds2.X, ds2.Xplus, SymMatrix::identity(2))));
}

TEST_CASE("interp_exists shape errors") {
    CHECK_THROWS_AS(InterpInstance(Matrix::Zero(2, 3), Matrix::Zero(2, 2),
                                   SymMatrix::identity(2)),
                    ShapeError);
    CHECK_THROWS_AS(InterpInstance(Matrix::Zero(2, 2), Matrix::Zero(2, 2),
                                   SymMatrix::identity(3)),
                    ShapeError);
    CHECK_THROWS_AS(InterpInstance(Matrix::Zero(2, 2), Matrix::Zero(2, 2),
                                   SymMatrix(-Matrix::Identity(2, 2))),
                    NotPSD);
}

TEST_CASE("feasible_output_set with no data is the prior ball") {
    const double l = 1.7;
    const InterpInstance inst(Matrix::Zero(3, 0), Matrix::Zero(3, 0),
                              SymMatrix(l * l * Matrix::Identity(3, 3)));
    Vector z(3);
    z << 1.0, -2.0, 0.5;
    const auto fs = interp::feasible_output_set(inst, z);
    REQUIRE(fs.tag == FeasibleSetTag::Ellipsoid);
    CHECK((fs.ellipsoid->shape.mat() - Matrix::Identity(3, 3)).norm() <= 1e-12);
    CHECK(fs.ellipsoid->center.norm() <= 1e-12);
    CHECK(fs.ellipsoid->level == doctest::Approx(l * l * z.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("two-point closed forms") {
    // data x0 -> x1, bound G = I, current state z = x1; the 2x2 PSD
    // condition reduces to scalar arithmetic:
    //   shape = I + x1 x1' / D, center = (x0.x1 / |x0|^2) x1,
    //   level = |x1|^2 - (x0.x1)^2 / |x0|^2, with D = |x0|^2 - |x1|^2
    const Vector x0 = fixtures::ex2_x0();
    const Vector x1 = fixtures::ex2_x1();
    const double d = x0.squaredNorm() - x1.squaredNorm();
    CHECK(d == doctest::Approx(0.8959));

    Matrix z(2, 1), y(2, 1);
    z.col(0) = x0;
    y.col(0) = x1;
    const InterpInstance inst(z, y, SymMatrix::identity(2));
    const auto fs = interp::feasible_output_set(inst, x1);
    REQUIRE(fs.tag == FeasibleSetTag::Ellipsoid);

    const Matrix shape_expected =
        Matrix::Identity(2, 2) + (x1 * x1.transpose()) / d;
    const Vector center_expected = (x0.dot(x1) / x0.squaredNorm()) * x1;
    const double level_expected =
        x1.squaredNorm() - std::pow(x0.dot(x1), 2) / x0.squaredNorm();

    CHECK((fs.ellipsoid->shape.mat() - shape_expected).norm() <= 1e-9);
    CHECK((fs.ellipsoid->center - center_expected).norm() <= 1e-9);
    CHECK(fs.ellipsoid->level == doctest::Approx(level_expected).epsilon(1e-9));
    // printed-value spot checks
    CHECK(fs.ellipsoid->center(0) == doctest::Approx(0.4628).epsilon(1e-3));
    CHECK(fs.ellipsoid->center(1) == doctest::Approx(-0.06675).epsilon(1e-3));
}

TEST_CASE("degenerate pair is tagged, epsilon bound flip restores the ellipsoid") {
    Matrix z(2, 1), y(2, 1);
    z << 0.0, 1.0;
    y << 1.0, 0.0;
    const auto fs =
        interp::feasible_output_set(InterpInstance(z, y, SymMatrix::identity(2)), y.col(0));
    CHECK(fs.tag == FeasibleSetTag::Degenerate);
    CHECK(fs.rank_D == 0);
    CHECK(fs.rank_Z == 1);

    const double l_eps = 1.0 + 1e-3;
    const auto fs2 = interp::feasible_output_set(
        InterpInstance(z, y, SymMatrix(l_eps * l_eps * Matrix::Identity(2, 2))), y.col(0));
    CHECK(fs2.tag == FeasibleSetTag::Ellipsoid);
    CHECK(matcore::lambda_min(fs2.ellipsoid->shape) > 0.0);
}

TEST_CASE("inconsistent data gives the empty set") {
    Matrix z(2, 1), y(2, 1);
    z << 1.0, 0.0;
    y << 2.0, 0.0;
    const auto fs =
        interp::feasible_output_set(InterpInstance(z, y, SymMatrix::identity(2)), z.col(0));
    CHECK(fs.tag == FeasibleSetTag::Empty);
}

TEST_CASE("parameter forms agree") {
    detail::Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.raw() % 3);
        const int m = 2 + static_cast<int>(rng.raw() % 3);
        const int t = 1 + static_cast<int>(rng.raw() % 3);
        const InterpInstance inst = random_feasible_instance(rng, n, m, t);
        const Vector z = rng.normal_vector(m);
        const auto a = interp::feasible_output_set(inst, z, EllipsoidParam::Projected);
        const auto b = interp::feasible_output_set(inst, z, EllipsoidParam::NormalEquations);
        REQUIRE(a.tag == b.tag);
        if (a.tag != FeasibleSetTag::Ellipsoid) continue;
        const double s = std::max(1.0, std::abs(a.ellipsoid->level));
        CHECK((a.ellipsoid->center - b.ellipsoid->center).norm() <= 1e-7 * s);
        CHECK(std::abs(a.ellipsoid->level - b.ellipsoid->level) <= 1e-7 * s);
    }
}

TEST_CASE("membership soundness of the output ellipsoid") {
    detail::Rng rng(23);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2, m = 3, t = 2;
        const InterpInstance inst = random_feasible_instance(rng, n, m, t);
        const Vector z = rng.normal_vector(m);
        const auto fs = interp::feasible_output_set(inst, z);
        if (fs.tag != FeasibleSetTag::Ellipsoid) continue;
        for (int s = 0; s < 100; ++s) {
            const Matrix mm =
                oracles::sample_admissible(rng, inst.Z, inst.Y, inst.G, s % 2 == 0);
            const Vector y = mm * z;
            CHECK(fs.ellipsoid->quadratic(y) <= fs.ellipsoid->level + 1e-6);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("two-point tightness") {
    const Vector x0 = fixtures::ex2_x0();
    const Vector x1 = fixtures::ex2_x1();
    Matrix z(2, 1), y(2, 1);
    z.col(0) = x0;
    y.col(0) = x1;
    const InterpInstance inst(z, y, SymMatrix::identity(2));
    const auto fs = interp::feasible_output_set(inst, x1);
    REQUIRE(fs.tag == FeasibleSetTag::Ellipsoid);
    detail::Rng rng(31);
    double best = -1.0;
    for (int s = 0; s < 2000; ++s) {
        const Matrix mm = oracles::sample_admissible(rng, z, y, inst.G, true);
        best = std::max(best, fs.ellipsoid->quadratic(mm * x1));
    }
    CHECK(best >= fs.ellipsoid->level - 1e-3);
    CHECK(best <= fs.ellipsoid->level + 1e-6);
}

TEST_CASE("range condition of the pseudo-inverse projector") {
    // whenever D >= 0 and rank(D) = rank(Z), (I - D D^+) Z' vanishes
    detail::Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng.raw() % 2);
        const int m = 2 + static_cast<int>(rng.raw() % 2);
        const int t = 1 + static_cast<int>(rng.raw() % 4);
        const InterpInstance inst = random_feasible_instance(rng, n, m, t);
        const Matrix d_raw = inst.Z.transpose() * inst.G.mat() * inst.Z -
                             inst.Y.transpose() * inst.Y;
        const SymMatrix d(0.5 * (d_raw + d_raw.transpose()));
        if (!matcore::psd_check(d)) continue;
        if (matcore::num_rank(d.mat()) != matcore::num_rank(inst.Z)) continue;
        const Matrix proj =
            (Matrix::Identity(t, t) - d.mat() * matcore::pinv_sym(d).mat()) *
            inst.Z.transpose();
        CHECK(proj.norm() <= 1e-7 * std::max(1.0, inst.Z.norm()));
    }
}

TEST_CASE("single-bound roundtrip") {
    detail::Rng rng(57);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng.raw() % 3);
        const int m = 2 + static_cast<int>(rng.raw() % 3);
        const int t = 1 + static_cast<int>(rng.raw() % 4);
        const Matrix z = rng.normal_matrix(m, t);
        Matrix r = rng.normal_matrix(m, m);
        const SymMatrix g(r * r.transpose() + 0.1 * Matrix::Identity(m, m));
        const Matrix mm = oracles::random_bounded_operator(rng, n, m, g, false);
        CHECK(interp::interp_exists(InterpInstance(z, mm * z, g)));

        // inflate the outputs until the eigen-margin is clearly negative
        Matrix y = mm * z;
        if (y.norm() < 1e-12) continue;
        double f = 1.0;
        for (int it = 0; it < 60; ++it) {
            f *= 1.5;
            const Matrix d =
                z.transpose() * g.mat() * z - f * f * y.transpose() * y;
            if (matcore::lambda_min(SymMatrix(0.5 * (d + d.transpose()))) < -1e-3) break;
        }
        CHECK_FALSE(interp::interp_exists(InterpInstance(z, f * y, g)));
    }
}

TEST_CASE("multi_bound_exists single block reduces to interp_exists") {
    const auto cert = interp::multi_bound_exists(
        {Matrix::Identity(2, 2)}, 0.5 * Matrix::Identity(2, 2), {SymMatrix::identity(2)});
    REQUIRE(cert.has_value());
    CHECK((cert->assembled() - Matrix::Identity(2, 2)).norm() <= 1e-12);

    const auto ops = interp::certificate_to_operators(
        *cert, {Matrix::Identity(2, 2)}, 0.5 * Matrix::Identity(2, 2));
    REQUIRE(ops.size() == 1);
    CHECK((ops[0] - 0.5 * Matrix::Identity(2, 2)).norm() <= 1e-8);
}

TEST_CASE("multi_bound_exists forward construction and reconstruction") {
    detail::Rng rng(71);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 2, m1 = 2, m2 = 3, t = 3;
        const Matrix z1 = rng.normal_matrix(m1, t);
        const Matrix z2 = rng.normal_matrix(m2, t);
        Matrix m_1 = rng.normal_matrix(n, m1);
        Matrix m_2 = rng.normal_matrix(n, m2);
        m_1 /= std::max(1.0, m_1.operatorNorm() * 1.02);
        m_2 /= std::max(1.0, m_2.operatorNorm() * 1.02);
        const Matrix y = m_1 * z1 + m_2 * z2;
        const std::vector<matcore::SymMatrix> bounds{SymMatrix::identity(m1),
                                                     SymMatrix::identity(m2)};
        const auto cert = interp::multi_bound_exists({z1, z2}, y, bounds);
        REQUIRE(cert.has_value());

        const Matrix g = cert->assembled();
        CHECK((g - g.transpose()).norm() <= 1e-12);
        CHECK(matcore::lambda_min(SymMatrix(0.5 * (g + g.transpose()))) >= -1e-6);
        CHECK((g.topLeftCorner(m1, m1) - Matrix::Identity(m1, m1)).norm() <= 1e-12);
        CHECK((g.bottomRightCorner(m2, m2) - Matrix::Identity(m2, m2)).norm() <= 1e-12);

        const auto ops = interp::certificate_to_operators(*cert, {z1, z2}, y);
        REQUIRE(ops.size() == 2);
        CHECK((y - ops[0] * z1 - ops[1] * z2).norm() <= 1e-6 * std::max(1.0, y.norm()));
        CHECK(ops[0].operatorNorm() <= 1.0 + 1e-6);
        CHECK(ops[1].operatorNorm() <= 1.0 + 1e-6);
    }
}

TEST_CASE("multi_bound_exists detects infeasible bounds") {
    // first example dataset at L = 1 with a noise budget below the minimum
    const auto ds1 = fixtures::dataset1();
    const Eigen::Index t = ds1.t();
    Matrix z2 = Matrix::Identity(t, t);
    const double alpha = 0.05;
    const std::vector<matcore::SymMatrix> bounds{
        SymMatrix::identity(2),
        SymMatrix(alpha * alpha * static_cast<double>(t) * Matrix::Identity(t, t))};
    const auto cert = interp::multi_bound_exists({ds1.X, z2}, ds1.Xplus, bounds);
    CHECK_FALSE(cert.has_value());
}

TEST_CASE("certificate_to_operators with empty data") {
    const auto cert = interp::CompletionCertificate::block_diagonal(
        {SymMatrix::identity(2), SymMatrix::identity(3)});
    const auto ops = interp::certificate_to_operators(
        cert, {Matrix::Zero(2, 0), Matrix::Zero(3, 0)}, Matrix::Zero(4, 0));
    REQUIRE(ops.size() == 2);
    CHECK(ops[0].isZero(0.0));
    CHECK(ops[1].isZero(0.0));
}

TEST_CASE("certificate_to_operators rejects broken certificates") {
    auto cert = interp::CompletionCertificate::block_diagonal(
        {SymMatrix::identity(1), SymMatrix::identity(1)});
    cert.offdiag[0][0] = Matrix::Constant(1, 1, 5.0);  // far outside the cone
    Matrix z1 = Matrix::Identity(1, 1), z2 = Matrix::Identity(1, 1);
    CHECK_THROWS_AS(
        interp::certificate_to_operators(cert, {z1, z2}, Matrix::Constant(1, 1, 0.5)),
        CertificateInvalid);
}

}  // TEST_SUITE
