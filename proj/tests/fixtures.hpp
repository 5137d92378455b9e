#pragma once

#include <vector>

#include "ltisets/inference.hpp"

// Data of the two example trajectories, in the printed reversed-column
// layout. Columns of X run x_{t-1} ... x_0.
namespace fixtures {

using ltisets::Matrix;
using ltisets::Vector;

inline ltisets::inference::DataBatch autonomous_batch(const Matrix& X, const Matrix& Xp) {
    const Eigen::Index t = X.cols();
    return ltisets::inference::DataBatch(X, Xp, Matrix::Zero(1, t), Matrix::Zero(X.rows(), 1));
}

inline ltisets::inference::DataBatch dataset1() {
    Matrix X(2, 5), Xp(2, 5);
    X << 0.03, -0.86, 1.39, -1.44, 1.0,
        -1.55, 1.33, -0.65, -0.21, 1.0;
    Xp << 0.84, 0.03, -0.86, 1.39, -1.44,
        1.25, -1.55, 1.33, -0.65, -0.21;
    return autonomous_batch(X, Xp);
}

inline ltisets::inference::DataBatch dataset2() {
    Matrix X(2, 5), Xp(2, 5);
    X << -0.5, -0.08, 0.9, -1.04, 1.0,
        -0.8, -1.2, -0.4, 0.15, 1.0;
    Xp << 0.83, -0.5, -0.08, 0.9, -1.04,
        0.55, -0.8, -1.2, -0.4, 0.15;
    return autonomous_batch(X, Xp);
}

inline Vector ex2_x0() { return Vector{{1.0, 1.0}}; }
inline Vector ex2_x1() { return Vector{{-1.04, 0.15}}; }
inline Vector ex2_x2() { return Vector{{0.9, -0.4}}; }

// two transitions x0 -> x1 -> x2 in reversed-column layout
inline ltisets::inference::DataBatch example2_three_points() {
    Matrix X(2, 2), Xp(2, 2);
    X.col(0) = ex2_x1();
    X.col(1) = ex2_x0();
    Xp.col(0) = ex2_x2();
    Xp.col(1) = ex2_x1();
    return autonomous_batch(X, Xp);
}

inline ltisets::inference::DataBatch example2_two_points() {
    Matrix X(2, 1), Xp(2, 1);
    X.col(0) = ex2_x0();
    Xp.col(0) = ex2_x1();
    return autonomous_batch(X, Xp);
}

// Minimal noise levels of the printed datasets at L = 1, pinned by two
// independent convex formulations during development. The second dataset's
// published value (0.32) is not reproducible from its printed matrices.
inline constexpr double kAlphaStarDs1 = 0.060670;
inline constexpr double kAlphaStarDs2 = 0.602428;
inline constexpr double kGainStarDs1At006 = 1.000645;
inline constexpr double kAlphaStarDs1At29 = 0.009460;
inline constexpr double kGainStarDs2At061 = 0.454884;

}  // namespace fixtures
