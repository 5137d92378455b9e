#include "ltisets/inference.hpp"

#include <cmath>

#include "ltisets/sysio.hpp"

namespace ltisets::inference {

using matcore::SymMatrix;

DataBatch::DataBatch(Matrix x, Matrix xplus, Matrix u, Matrix b)
    : X(std::move(x)), Xplus(std::move(xplus)), U(std::move(u)), B(std::move(b)) {
    if (Xplus.rows() != X.rows() || B.rows() != X.rows()) {
        throw ShapeError("DataBatch: X, Xplus and B must share the state dimension");
    }
    if (X.cols() != Xplus.cols() || X.cols() != U.cols()) {
        throw ShapeError("DataBatch: X, Xplus and U must share the column count");
    }
    if (U.rows() != B.cols()) {
        throw ShapeError("DataBatch: U rows must match B columns");
    }
    if (!X.allFinite() || !Xplus.allFinite() || !U.allFinite() || !B.allFinite()) {
        throw InvalidMatrix("DataBatch: entries must be finite");
    }
}

PriorBounds::PriorBounds(double L_in, double alpha_in,
                         std::optional<SymMatrix> P_in)
    : L(L_in), alpha(alpha_in), P(std::move(P_in)) {
    if (!(L > 0.0)) throw InvalidMatrix("PriorBounds: L must be positive");
    if (!(alpha >= 0.0)) throw InvalidMatrix("PriorBounds: alpha must be nonnegative");
    if (P && matcore::lambda_min(*P) <= 0.0) {
        throw NotPD("PriorBounds: energy metric P must be positive definite");
    }
}

Matrix ConsistencyProgram::gamma_from(const Vector& w) const {
    Matrix gamma(n, tau);
    for (Eigen::Index j = 0; j < tau; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            gamma(i, j) = w(gamma_offset + j * n + i);
        }
    }
    return gamma;
}

ConsistencyProgram make_consistency_program(const Matrix& Xd, const Matrix& Yd,
                                            std::optional<double> fixed_ell,
                                            std::optional<double> fixed_s) {
    if (Xd.rows() != Yd.rows() || Xd.cols() != Yd.cols()) {
        throw ShapeError("make_consistency_program: data pair must share dimensions");
    }
    ConsistencyProgram prog;
    prog.n = Xd.rows();
    prog.tau = Xd.cols();
    const Eigen::Index n = prog.n;
    const Eigen::Index tau = prog.tau;
    const double taud = static_cast<double>(tau);

    int nscalars = 0;
    if (!fixed_ell) prog.ell_index = nscalars++;
    if (!fixed_s) prog.s_index = nscalars++;
    prog.gamma_offset = nscalars;
    prog.problem.var_dim = nscalars + static_cast<int>(n * tau);

    const Matrix gram_x = Xd.transpose() * Xd;
    const Matrix gram_y = Yd.transpose() * Yd;

    // completion block [[ell I_n, Gamma], [Gamma', s tau I_tau]]
    lmi::AffineMatrixMap completion;
    {
        Matrix c0 = Matrix::Zero(n + tau, n + tau);
        if (fixed_ell) c0.topLeftCorner(n, n) = *fixed_ell * Matrix::Identity(n, n);
        if (fixed_s)
            c0.bottomRightCorner(tau, tau) = *fixed_s * taud * Matrix::Identity(tau, tau);
        completion.constant = SymMatrix(c0);
        completion.coefficients.resize(prog.problem.var_dim);
        if (prog.ell_index >= 0) {
            Matrix c = Matrix::Zero(n + tau, n + tau);
            c.topLeftCorner(n, n) = Matrix::Identity(n, n);
            completion.coefficients[prog.ell_index] = SymMatrix(c);
        }
        if (prog.s_index >= 0) {
            Matrix c = Matrix::Zero(n + tau, n + tau);
            c.bottomRightCorner(tau, tau) = taud * Matrix::Identity(tau, tau);
            completion.coefficients[prog.s_index] = SymMatrix(c);
        }
        for (Eigen::Index j = 0; j < tau; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                Matrix c = Matrix::Zero(n + tau, n + tau);
                c(i, n + j) = 1.0;
                c(n + j, i) = 1.0;
                completion.coefficients[prog.gamma_offset + j * n + i] = SymMatrix(c);
            }
        }
    }

    // interpolation block ell Xd'Xd + Xd'Gamma + Gamma'Xd + tau s I - Yd'Yd
    lmi::AffineMatrixMap interp_blk;
    {
        Matrix c0 = -gram_y;
        if (fixed_ell) c0 += *fixed_ell * gram_x;
        if (fixed_s) c0 += *fixed_s * taud * Matrix::Identity(tau, tau);
        interp_blk.constant = SymMatrix(0.5 * (c0 + c0.transpose()));
        interp_blk.coefficients.resize(prog.problem.var_dim);
        if (prog.ell_index >= 0) {
            interp_blk.coefficients[prog.ell_index] =
                SymMatrix(0.5 * (gram_x + gram_x.transpose()));
        }
        if (prog.s_index >= 0) {
            interp_blk.coefficients[prog.s_index] =
                SymMatrix(taud * Matrix::Identity(tau, tau));
        }
        for (Eigen::Index j = 0; j < tau; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                // Xd' E_ij + E_ij' Xd with E_ij the n x tau unit matrix
                Matrix c = Matrix::Zero(tau, tau);
                c.col(j) += Xd.row(i).transpose();
                c.row(j) += Xd.row(i);
                interp_blk.coefficients[prog.gamma_offset + j * n + i] = SymMatrix(c);
            }
        }
    }

    prog.problem.constraints.push_back(std::move(completion));
    prog.problem.constraints.push_back(std::move(interp_blk));

    // nonnegativity of the scalar variables as 1x1 blocks
    for (int idx : {prog.ell_index, prog.s_index}) {
        if (idx < 0) continue;
        lmi::AffineMatrixMap nonneg;
        nonneg.constant = SymMatrix(Matrix::Zero(1, 1));
        nonneg.coefficients.resize(prog.problem.var_dim);
        for (int k = 0; k < prog.problem.var_dim; ++k) {
            nonneg.coefficients[k] = SymMatrix(Matrix::Zero(1, 1));
        }
        nonneg.coefficients[idx] = SymMatrix(Matrix::Ones(1, 1));
        prog.problem.constraints.push_back(std::move(nonneg));
    }
    return prog;
}

namespace {

interp::CompletionCertificate make_certificate(Eigen::Index n, Eigen::Index tau,
                                               double ell, double s,
                                               const Matrix& gamma) {
    auto cert = interp::CompletionCertificate::block_diagonal(
        {SymMatrix(ell * Matrix::Identity(n, n)),
         SymMatrix(s * static_cast<double>(tau) * Matrix::Identity(tau, tau))});
    cert.offdiag[0][0] = gamma;
    return cert;
}

bool consistent_at(const Matrix& Xd, const Matrix& Yd, double ell, double s,
                   const lmi::SolveOptions& opts) {
    const ConsistencyProgram prog = make_consistency_program(Xd, Yd, ell, s);
    return lmi::solve_feasibility(prog.problem, opts).status == lmi::FeasStatus::Feasible;
}

}  // namespace

ConsistencyReport verify(const DataBatch& data, const PriorBounds& bounds,
                         const lmi::SolveOptions& opts) {
    DataBatch working = data;
    PriorBounds effective = bounds;
    ConsistencyReport report;
    if (bounds.P) {
        auto [tdata, tbounds] = sysio::apply_transform(data, bounds, *bounds.P);
        working = std::move(tdata);
        effective = std::move(tbounds);
        report.conservative = true;
    }
    report.effective_alpha = effective.alpha;

    const Eigen::Index n = working.n();
    const Eigen::Index t = working.t();
    if (t == 0) {
        report.consistent = true;
        report.margin = std::numeric_limits<double>::infinity();
        report.certificate = make_certificate(n, 0, effective.L * effective.L,
                                              effective.alpha * effective.alpha,
                                              Matrix::Zero(n, 0));
        return report;
    }

    const Matrix Yd = working.shifted_outputs();
    const ConsistencyProgram prog = make_consistency_program(
        working.X, Yd, effective.L * effective.L, effective.alpha * effective.alpha);
    const lmi::FeasibilityResult res = lmi::solve_feasibility(prog.problem, opts);
    report.consistent = res.status == lmi::FeasStatus::Feasible;
    report.margin = res.margin;
    if (res.point) {
        report.certificate =
            make_certificate(n, t, effective.L * effective.L,
                             effective.alpha * effective.alpha, prog.gamma_from(*res.point));
    }
    return report;
}

InferenceResult min_noise(const DataBatch& data, double L, const InferenceOptions& opts) {
    if (!(L > 0.0)) throw InvalidMatrix("min_noise: L must be positive");
    const Eigen::Index n = data.n();
    const Eigen::Index t = data.t();
    InferenceResult out;
    if (t == 0) {
        out.value = 0.0;
        out.cross_check_value = 0.0;
        out.certificate = make_certificate(n, 0, L * L, 0.0, Matrix::Zero(n, 0));
        return out;
    }
    const Matrix Yd = data.shifted_outputs();
    const double ell = L * L;

    // exactly interpolable data: alpha* = 0
    if (consistent_at(data.X, Yd, ell, 0.0, opts.solver)) {
        out.value = 0.0;
        out.cross_check_value = 0.0;
        const ConsistencyProgram prog = make_consistency_program(data.X, Yd, ell, 0.0);
        const auto res = lmi::solve_feasibility(prog.problem, opts.solver);
        out.margin = res.margin;
        if (res.point) {
            out.certificate = make_certificate(n, t, ell, 0.0, prog.gamma_from(*res.point));
        }
        return out;
    }

    const ConsistencyProgram prog = make_consistency_program(data.X, Yd, ell, std::nullopt);
    lmi::LmiProblem sdp = prog.problem;
    Vector c = Vector::Zero(sdp.var_dim);
    c(prog.s_index) = 1.0;
    sdp.objective = c;
    const lmi::LinearObjectiveResult sol = lmi::solve_linear_objective(sdp, opts.solver);
    const double s_star = std::max(sol.value, 0.0);
    out.value = std::sqrt(s_star);
    out.margin = sol.margin;
    out.certificate =
        make_certificate(n, t, ell, s_star, prog.gamma_from(sol.point));

    if (opts.cross_check) {
        double lo = 0.0;
        double hi = std::max(2.0 * out.value, 1e-2);
        int guard = 0;
        while (!consistent_at(data.X, Yd, ell, hi * hi, opts.solver)) {
            hi *= 2.0;
            if (++guard > 40) {
                throw OracleFailure("min_noise: bisection upper bracket not found");
            }
        }
        while (hi - lo > 0.25 * opts.cross_check_tol) {
            const double mid = 0.5 * (hi + lo);
            if (consistent_at(data.X, Yd, ell, mid * mid, opts.solver)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.cross_check_value = hi;
        if (std::abs(out.value - out.cross_check_value) > opts.cross_check_tol) {
            throw SolverDiagnostic(
                "min_noise: SDP and bisection routes disagree (" +
                std::to_string(out.value) + " vs " + std::to_string(out.cross_check_value) +
                ")");
        }
    } else {
        out.cross_check_value = out.value;
    }
    return out;
}

InferenceResult min_gain(const DataBatch& data, double alpha, const InferenceOptions& opts) {
    if (!(alpha >= 0.0)) throw InvalidMatrix("min_gain: alpha must be nonnegative");
    const Eigen::Index n = data.n();
    const Eigen::Index t = data.t();
    InferenceResult out;
    if (t == 0) {
        out.value = 0.0;
        out.cross_check_value = 0.0;
        out.certificate = make_certificate(n, 0, 0.0, alpha * alpha, Matrix::Zero(n, 0));
        return out;
    }
    const Matrix Yd = data.shifted_outputs();
    const double s = alpha * alpha;
    constexpr double kGainBracket = 1e3;

    if (!consistent_at(data.X, Yd, kGainBracket * kGainBracket, s, opts.solver)) {
        throw Infeasible("min_gain: no L <= 1e3 makes the data consistent at alpha = " +
                         std::to_string(alpha));
    }
    if (consistent_at(data.X, Yd, 0.0, s, opts.solver)) {
        out.value = 0.0;
        out.cross_check_value = 0.0;
        const ConsistencyProgram prog = make_consistency_program(data.X, Yd, 0.0, s);
        const auto res = lmi::solve_feasibility(prog.problem, opts.solver);
        out.margin = res.margin;
        if (res.point) {
            out.certificate = make_certificate(n, t, 0.0, s, prog.gamma_from(*res.point));
        }
        return out;
    }

    const ConsistencyProgram prog = make_consistency_program(data.X, Yd, std::nullopt, s);
    lmi::LmiProblem sdp = prog.problem;
    Vector c = Vector::Zero(sdp.var_dim);
    c(prog.ell_index) = 1.0;
    sdp.objective = c;
    const lmi::LinearObjectiveResult sol = lmi::solve_linear_objective(sdp, opts.solver);
    const double ell_star = std::max(sol.value, 0.0);
    out.value = std::sqrt(ell_star);
    out.margin = sol.margin;
    out.certificate = make_certificate(n, t, ell_star, s, prog.gamma_from(sol.point));

    if (opts.cross_check) {
        double lo = 0.0;
        double hi = kGainBracket;
        while (hi - lo > 0.25 * opts.cross_check_tol) {
            const double mid = 0.5 * (hi + lo);
            if (consistent_at(data.X, Yd, mid * mid, s, opts.solver)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.cross_check_value = hi;
        if (std::abs(out.value - out.cross_check_value) > opts.cross_check_tol) {
            throw SolverDiagnostic(
                "min_gain: SDP and bisection routes disagree (" + std::to_string(out.value) +
                " vs " + std::to_string(out.cross_check_value) + ")");
        }
    } else {
        out.cross_check_value = out.value;
    }
    return out;
}

std::vector<CurvePoint> tradeoff_curve(const DataBatch& data,
                                       const std::vector<double>& L_grid,
                                       const InferenceOptions& opts) {
    for (std::size_t i = 1; i < L_grid.size(); ++i) {
        if (!(L_grid[i] > L_grid[i - 1])) {
            throw InvalidMatrix("tradeoff_curve: grid must be strictly ascending");
        }
    }
    std::vector<CurvePoint> curve;
    curve.reserve(L_grid.size());
    for (double L : L_grid) {
        CurvePoint pt;
        pt.L = L;
        try {
            pt.alpha_star = min_noise(data, L, opts).value;
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
        curve.push_back(std::move(pt));
    }
    return curve;
}

}  // namespace ltisets::inference
