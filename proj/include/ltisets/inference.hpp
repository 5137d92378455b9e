#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ltisets/interp.hpp"
#include "ltisets/lmi.hpp"
#include "ltisets/matcore.hpp"

namespace ltisets::inference {

// Trajectory data in matrix form, columns in reversed time so that fixtures
// can be pasted verbatim: X = [x_{t-1} ... x_0], Xplus = [x_t ... x_1],
// U = [u_{t-1} ... u_0].
struct DataBatch {
    Matrix X;      // n x t
    Matrix Xplus;  // n x t
    Matrix U;      // m x t
    Matrix B;      // n x m

    DataBatch(Matrix x, Matrix xplus, Matrix u, Matrix b);
    Eigen::Index n() const { return X.rows(); }
    Eigen::Index m() const { return B.cols(); }
    Eigen::Index t() const { return X.cols(); }
    // Xplus - B U, the output side of the data equation.
    Matrix shifted_outputs() const { return Xplus - B * U; }
};

struct PriorBounds {
    double L = 1.0;       // energy amplification bound, > 0
    double alpha = 0.0;   // noise level, >= 0
    std::optional<matcore::SymMatrix> P;  // energy metric, positive definite

    PriorBounds(double L_in, double alpha_in,
                std::optional<matcore::SymMatrix> P_in = std::nullopt);
};

struct ConsistencyReport {
    bool consistent = false;
    std::optional<interp::CompletionCertificate> certificate;
    double margin = 0.0;
    // set when an energy metric P was folded in; the verdict is then
    // sufficient for consistency, not necessary
    bool conservative = false;
    double effective_alpha = 0.0;
};

// The Cor.-1-style program shared by verification and one-step membership:
// with data pair (Xd, Yd) of n x tau matrices, decision variable
// Gamma in R^{n x tau} (plus optional leading scalars), the two blocks
//   [[ell I_n, Gamma], [Gamma', s tau I_tau]]            (completion PSD)
//   ell Xd'Xd + Xd'Gamma + Gamma'Xd + tau s I_tau - Yd'Yd (interpolation)
// must be PSD, where ell = L^2 and s = alpha^2. Either scalar can be made a
// decision variable for the inference programs.
struct ConsistencyProgram {
    lmi::LmiProblem problem;
    int ell_index = -1;    // position of ell in the variable vector, -1 if fixed
    int s_index = -1;      // position of s, -1 if fixed
    int gamma_offset = 0;  // first Gamma entry
    Eigen::Index n = 0;
    Eigen::Index tau = 0;

    Matrix gamma_from(const Vector& w) const;
};

ConsistencyProgram make_consistency_program(const Matrix& Xd, const Matrix& Yd,
                                            std::optional<double> fixed_ell,
                                            std::optional<double> fixed_s);

struct InferenceOptions {
    lmi::SolveOptions solver{};
    bool cross_check = true;       // run the bisection route alongside the SDP
    double cross_check_tol = 1e-3; // disagreement beyond this raises SolverDiagnostic
    InferenceOptions() { solver.eps_obj_rel = 1e-7; }
};

ConsistencyReport verify(const DataBatch& data, const PriorBounds& bounds,
                         const lmi::SolveOptions& opts = {});

struct InferenceResult {
    double value = 0.0;  // alpha* or L*
    std::optional<interp::CompletionCertificate> certificate;
    double cross_check_value = 0.0;
    double margin = 0.0;
};

// Minimal noise level explaining the data at fixed L (SDP primary,
// bisection-over-verify cross-check).
InferenceResult min_noise(const DataBatch& data, double L,
                          const InferenceOptions& opts = {});

// Minimal energy amplification bound at fixed alpha. Throws Infeasible when
// even L = 1e3 cannot explain the data.
InferenceResult min_gain(const DataBatch& data, double alpha,
                         const InferenceOptions& opts = {});

struct CurvePoint {
    double L = 0.0;
    std::optional<double> alpha_star;
    std::string error;  // empty on success
};

std::vector<CurvePoint> tradeoff_curve(const DataBatch& data,
                                       const std::vector<double>& L_grid,
                                       const InferenceOptions& opts = {});

}  // namespace ltisets::inference
