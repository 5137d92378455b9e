#include "ltisets/predict.hpp"

#include <cmath>

#include "ltisets/detail/rng.hpp"

namespace ltisets::predict {

using matcore::SymMatrix;

PredictionInstance::PredictionInstance(inference::DataBatch data_in, Vector x_in,
                                       Vector u_in, inference::PriorBounds bounds_in)
    : data(std::move(data_in)), x(std::move(x_in)), u(std::move(u_in)),
      bounds(std::move(bounds_in)) {
    if (x.size() != data.n()) {
        throw ShapeError("PredictionInstance: x must have the state dimension");
    }
    if (u.size() != data.m()) {
        throw ShapeError("PredictionInstance: u must have the input dimension");
    }
    if (bounds.P) {
        throw InvalidMatrix(
            "PredictionInstance: apply the energy-metric transform before predicting");
    }
}

bool NextStateSet::contains(const Vector& x_plus, double tol) const {
    if (tag == NextStateTag::Empty) return false;
    if (tag == NextStateTag::Degenerate) {
        throw UnsupportedSet("NextStateSet::contains: degenerate set is uncharacterized");
    }
    for (const auto& e : members) {
        if (e.contains(x_plus - offset, tol)) return true;
    }
    return false;
}

bool membership(const PredictionInstance& inst, const Vector& x_plus,
                const lmi::SolveOptions& opts) {
    if (x_plus.size() != inst.data.n()) {
        throw ShapeError("membership: x_plus must have the state dimension");
    }
    const Eigen::Index t = inst.data.t();
    Matrix xbar(inst.data.n(), t + 1);
    xbar.col(0) = inst.x;
    if (t > 0) xbar.rightCols(t) = inst.data.X;
    Matrix ybar(inst.data.n(), t + 1);
    ybar.col(0) = x_plus - inst.offset();
    if (t > 0) ybar.rightCols(t) = inst.data.shifted_outputs();

    const auto prog = inference::make_consistency_program(
        xbar, ybar, inst.bounds.L * inst.bounds.L, inst.bounds.alpha * inst.bounds.alpha);
    return lmi::solve_feasibility(prog.problem, opts).status == lmi::FeasStatus::Feasible;
}

namespace {

NextStateSet from_feasible_set(const interp::FeasibleSetResult& fs, Vector offset) {
    NextStateSet out;
    out.offset = std::move(offset);
    switch (fs.tag) {
        case interp::FeasibleSetTag::Empty:
            out.tag = NextStateTag::Empty;
            break;
        case interp::FeasibleSetTag::Degenerate:
            out.tag = NextStateTag::Degenerate;
            break;
        case interp::FeasibleSetTag::Ellipsoid:
            out.tag = NextStateTag::ExactEllipsoid;
            out.members.push_back(*fs.ellipsoid);
            break;
    }
    return out;
}

SymMatrix assemble_completion(double L, double alpha, Eigen::Index n, Eigen::Index t,
                              const Matrix& W) {
    const double scale = L * alpha * std::sqrt(static_cast<double>(t + 1));
    Matrix g = Matrix::Zero(n + t + 1, n + t + 1);
    g.topLeftCorner(n, n) = L * L * Matrix::Identity(n, n);
    g.bottomRightCorner(t + 1, t + 1) =
        alpha * alpha * static_cast<double>(t + 1) * Matrix::Identity(t + 1, t + 1);
    g.topRightCorner(n, t + 1) = scale * W;
    g.bottomLeftCorner(t + 1, n) = scale * W.transpose();
    return SymMatrix(g);
}

}  // namespace

NextStateSet reachable_noisefree(const PredictionInstance& inst) {
    if (inst.bounds.alpha != 0.0) {
        throw InvalidMatrix("reachable_noisefree: requires alpha = 0");
    }
    const Eigen::Index n = inst.data.n();
    const interp::InterpInstance ii(
        inst.data.X, inst.data.shifted_outputs(),
        SymMatrix(inst.bounds.L * inst.bounds.L * Matrix::Identity(n, n)));
    return from_feasible_set(interp::feasible_output_set(ii, inst.x), inst.offset());
}

std::vector<CompletionSample> sample_completions(Eigen::Index n,
                                                 const inference::PriorBounds& bounds,
                                                 Eigen::Index t, int n_samples,
                                                 std::uint64_t seed) {
    if (n_samples < 1) {
        throw InvalidMatrix("sample_completions: need at least one sample");
    }
    std::vector<CompletionSample> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    const Matrix w0 = Matrix::Zero(n, t + 1);
    out.push_back({w0, assemble_completion(bounds.L, bounds.alpha, n, t, w0)});
    if (bounds.alpha == 0.0) {
        // the Schur bound forces a zero off-diagonal: every completion is the
        // block-diagonal one
        while (static_cast<int>(out.size()) < n_samples) out.push_back(out.front());
        return out;
    }
    detail::Rng rng(seed);
    for (int i = 1; i < n_samples; ++i) {
        Matrix w = rng.normal_matrix(n, t + 1);
        const double nrm = w.size() == 0 ? 0.0 : w.operatorNorm();
        if (nrm > 0.0) w /= nrm;
        // half the draws stay on the boundary ||W|| = 1, the rest move inside
        if (i % 2 == 0) w *= rng.uniform();
        out.push_back({w, assemble_completion(bounds.L, bounds.alpha, n, t, w)});
    }
    return out;
}

NextStateSet reachable_union(const PredictionInstance& inst, int n_samples,
                             std::uint64_t seed, const lmi::SolveOptions& opts) {
    const Eigen::Index n = inst.data.n();
    const Eigen::Index t = inst.data.t();
    if (inst.bounds.alpha == 0.0) {
        // single completion; identical to the noise-free characterization
        NextStateSet set = reachable_noisefree(inst);
        if (set.tag == NextStateTag::ExactEllipsoid) set.tag = NextStateTag::InnerUnion;
        return set;
    }

    // augmented data of the one-step program: z = [x; 1; 0_t], Z = [X; 0; I_t]
    Vector z = Vector::Zero(n + t + 1);
    z.head(n) = inst.x;
    z(n) = 1.0;
    Matrix Z = Matrix::Zero(n + t + 1, t);
    if (t > 0) {
        Z.topRows(n) = inst.data.X;
        Z.bottomRows(t) = Matrix::Identity(t, t);
    }
    const Matrix Yd = inst.data.shifted_outputs();

    NextStateSet out;
    out.offset = inst.offset();
    out.tag = NextStateTag::InnerUnion;
    const auto samples = sample_completions(n, inst.bounds, t, n_samples, seed);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const interp::InterpInstance ii(Z, Yd, samples[i].Ghat);
        const interp::FeasibleSetResult fs = interp::feasible_output_set(ii, z);
        switch (fs.tag) {
            case interp::FeasibleSetTag::Ellipsoid:
                out.members.push_back(*fs.ellipsoid);
                break;
            case interp::FeasibleSetTag::Empty:
                out.skipped.push_back({static_cast<int>(i), "D not PSD"});
                break;
            case interp::FeasibleSetTag::Degenerate:
                out.skipped.push_back(
                    {static_cast<int>(i),
                     "rank(D) = " + std::to_string(fs.rank_D) + " < rank(Z) = " +
                         std::to_string(fs.rank_Z)});
                break;
        }
    }
    if (out.members.empty()) {
        // least-squares center as a probe before declaring the set empty
        const Vector center_guess =
            inst.offset() + Yd * (matcore::pinv(inst.data.X) * inst.x);
        if (membership(inst, center_guess, opts)) {
            throw EmptyUnion(
                "reachable_union: no sampled completion yielded a member though the "
                "set is nonempty; increase n_samples");
        }
        throw EmptyUnion(
            "reachable_union: every completion was skipped and the center guess fails "
            "membership; the feasible set appears empty");
    }
    return out;
}

bool safety_check(const NextStateSet& set, const interp::Ellipsoid& target) {
    if (set.tag == NextStateTag::Degenerate) {
        throw UnsupportedSet("safety_check: degenerate sets are not characterized");
    }
    if (set.tag == NextStateTag::Empty) return true;  // vacuous
    const Matrix& shape_t = target.shape.mat();
    for (const auto& member : set.members) {
        // member in absolute coordinates
        interp::Ellipsoid abs_member(member.shape, member.center + set.offset,
                                     member.level);
        const Vector g = -shape_t * target.center;
        const double c0 = target.center.dot(shape_t * target.center);
        const TrsResult worst = trs_max(abs_member, target.shape, g, c0);
        if (worst.value > target.level + 1e-9 * std::max(1.0, std::abs(target.level))) {
            return false;
        }
    }
    return true;
}

TrsResult trs_max(const interp::Ellipsoid& E, const SymMatrix& H, const Vector& g,
                  double c0) {
    const Eigen::Index n = E.dim();
    if (H.dim() != n || g.size() != n) {
        throw ShapeError("trs_max: dimension mismatch");
    }
    if (!matcore::psd_check(H, 1e-9)) {
        throw NotPSD("trs_max: H must be PSD");
    }
    const matcore::SpectralDecomp shape_sd = matcore::spectral(E.shape);
    if (shape_sd.eigenvalues.minCoeff() <= 0.0) {
        throw NotPSD("trs_max: ellipsoid shape must be positive definite");
    }

    const auto quad = [&](const Vector& p) { return p.dot(H.mat() * p) + 2.0 * g.dot(p) + c0; };

    const double radius = std::sqrt(std::max(E.level, 0.0));
    if (radius == 0.0) {
        return {quad(E.center), E.center};
    }

    // whiten: x = c + S^{-1} y with S = shape^{1/2}, constraint ||y|| <= radius
    Vector inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(shape_sd.eigenvalues(i));
    const Matrix s_inv =
        shape_sd.eigenvectors * inv_sqrt.asDiagonal() * shape_sd.eigenvectors.transpose();
    Matrix h_tilde = s_inv * H.mat() * s_inv;
    h_tilde = (0.5 * (h_tilde + h_tilde.transpose())).eval();
    const Vector g_tilde = s_inv * (H.mat() * E.center + g);

    const matcore::SpectralDecomp hd = matcore::spectral(SymMatrix(h_tilde));
    const Vector& lam = hd.eigenvalues;  // descending
    const Vector b = hd.eigenvectors.transpose() * g_tilde;
    const double lam_top = lam(0);
    const double lam_scale = std::max(1.0, lam.cwiseAbs().maxCoeff());

    // stationarity on the sphere: (nu I - H~) y = b with nu >= lam_top
    const double gap_tol = 1e-12 * lam_scale;
    double top_mass = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lam_top - lam(i) <= gap_tol) top_mass += b(i) * b(i);
    }
    const auto phi = [&](double nu) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = nu - lam(i);
            s += (b(i) * b(i)) / (d * d);
        }
        return s;
    };

    Vector y_white(n);
    const double r2 = radius * radius;
    bool hard_case = false;
    if (top_mass <= 1e-24 * std::max(1.0, b.squaredNorm())) {
        // candidate hard case: b has no component in the top eigenspace
        double norm_perp_sq = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (lam_top - lam(i) > gap_tol) {
                const double wi = b(i) / (lam_top - lam(i));
                norm_perp_sq += wi * wi;
            }
        }
        if (norm_perp_sq <= r2) hard_case = true;
    }

    if (hard_case) {
        y_white.setZero();
        double norm_perp_sq = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (lam_top - lam(i) > gap_tol) {
                y_white(i) = b(i) / (lam_top - lam(i));
                norm_perp_sq += y_white(i) * y_white(i);
            }
        }
        // fill the slack along the top eigenspace
        const double tau = std::sqrt(std::max(r2 - norm_perp_sq, 0.0));
        for (Eigen::Index i = 0; i < n; ++i) {
            if (lam_top - lam(i) <= gap_tol) {
                y_white(i) = tau;
                break;
            }
        }
    } else {
        // phi decreases from +inf to 0 on (lam_top, inf); bracket and bisect
        double lo = lam_top;
        double hi = lam_top + std::max(b.norm() / radius, 1e-8 * lam_scale);
        while (phi(hi) > r2) hi = lam_top + 2.0 * (hi - lam_top);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (phi(mid) > r2) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        const double nu = 0.5 * (lo + hi);
        for (Eigen::Index i = 0; i < n; ++i) {
            y_white(i) = b(i) / (nu - lam(i));
        }
        // project onto the sphere to absorb the residual bisection error
        if (y_white.norm() > 0.0) y_white *= radius / y_white.norm();
    }

    const Vector y = hd.eigenvectors * y_white;
    Vector argmax = E.center + s_inv * y;
    TrsResult best{quad(argmax), argmax};
    // the center is a valid fallback when the quadratic is very flat
    if (quad(E.center) > best.value) best = {quad(E.center), E.center};
    return best;
}

CostResult worst_case_cost(const PredictionInstance& inst, const SymMatrix& Qc,
                           const SymMatrix& Rc, const CostOptions& opts) {
    if (Qc.dim() != inst.data.n()) throw ShapeError("worst_case_cost: Qc must be n x n");
    if (Rc.dim() != inst.u.size()) throw ShapeError("worst_case_cost: Rc must be m x m");
    if (matcore::lambda_min(Qc) <= 0.0 || matcore::lambda_min(Rc) <= 0.0) {
        throw NotPD("worst_case_cost: Qc and Rc must be positive definite");
    }

    NextStateSet set = inst.bounds.alpha == 0.0
                           ? reachable_noisefree(inst)
                           : reachable_union(inst, opts.n_samples, opts.seed, opts.solver);
    if (set.tag == NextStateTag::Empty) {
        throw EmptyUnion("worst_case_cost: the feasible set is empty");
    }
    if (set.tag == NextStateTag::Degenerate) {
        throw UnsupportedSet("worst_case_cost: degenerate sets are not characterized");
    }

    const double input_cost = inst.u.dot(Rc.mat() * inst.u);
    CostResult out;
    out.lower_bound = set.tag == NextStateTag::InnerUnion && inst.bounds.alpha > 0.0;
    out.value = -std::numeric_limits<double>::infinity();
    for (const auto& member : set.members) {
        interp::Ellipsoid abs_member(member.shape, member.center + set.offset,
                                     member.level);
        const TrsResult r = trs_max(abs_member, Qc, Vector::Zero(inst.data.n()), 0.0);
        if (r.value > out.value) {
            out.value = r.value;
            out.argmax = r.argmax;
        }
    }
    out.value += input_cost;

    if (opts.refine && out.argmax.size() > 0) {
        // membership-guided expansion: push the argmax outward along fixed
        // directions as long as the point stays feasible
        const Eigen::Index n = inst.data.n();
        std::vector<Vector> dirs;
        const Vector grad_dir = Qc.mat() * out.argmax;
        if (grad_dir.norm() > 0.0) dirs.push_back(grad_dir.normalized());
        for (Eigen::Index i = 0; i < n; ++i) {
            dirs.push_back(Vector::Unit(n, i));
            dirs.push_back(-Vector::Unit(n, i));
        }
        Vector base = out.argmax;
        for (const auto& d : dirs) {
            double step = 1.0;
            double reach = 0.0;
            while (step > 1e-4) {
                if (membership(inst, base + (reach + step) * d, opts.solver)) {
                    reach += step;
                } else {
                    step *= 0.5;
                }
            }
            const Vector candidate = base + reach * d;
            const double value = candidate.dot(Qc.mat() * candidate) + input_cost;
            if (value > out.value) {
                out.value = value;
                out.argmax = candidate;
            }
        }
    }
    return out;
}

}  // namespace ltisets::predict
