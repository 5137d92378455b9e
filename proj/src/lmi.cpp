#include "ltisets/lmi.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>

#include "ltisets/detail/rng.hpp"

namespace ltisets::lmi {

namespace {

struct EigCache {
    Vector values;   // ascending (Eigen order)
    Matrix vectors;
};

// Eigen-decompositions of all constraint blocks at w; empty blocks skipped.
std::vector<EigCache> decompose(const LmiProblem& p, const Vector& w) {
    std::vector<EigCache> out(p.constraints.size());
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const auto& c = p.constraints[i];
        if (c.dim() == 0) continue;
        Matrix f = c.constant.mat();
        for (int k = 0; k < p.var_dim; ++k) {
            if (w(k) != 0.0) f += w(k) * c.coefficients[k].mat();
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(f);
        out[i].values = es.eigenvalues();
        out[i].vectors = es.eigenvectors();
    }
    return out;
}

double min_eig(const std::vector<EigCache>& eigs) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : eigs) {
        if (e.values.size() > 0) m = std::min(m, e.values(0));
    }
    return m;
}

// Soft-min of all eigenvalues across blocks: -mu * log sum exp(-lambda/mu),
// evaluated with the usual shift for overflow safety. Gradient accumulates
// eigenvector outer products weighted by the soft-min distribution.
struct SoftminEval {
    double value = 0.0;
    Vector grad;
};

SoftminEval softmin(const LmiProblem& p, const std::vector<EigCache>& eigs, double mu) {
    SoftminEval out;
    out.grad = Vector::Zero(p.var_dim);
    const double lo = min_eig(eigs);
    if (!std::isfinite(lo)) {  // all blocks empty
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    double z = 0.0;
    for (const auto& e : eigs) {
        for (Eigen::Index j = 0; j < e.values.size(); ++j) {
            z += std::exp(-(e.values(j) - lo) / mu);
        }
    }
    out.value = lo - mu * std::log(z);
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const auto& e = eigs[i];
        if (e.values.size() == 0) continue;
        Vector wgt(e.values.size());
        for (Eigen::Index j = 0; j < e.values.size(); ++j) {
            wgt(j) = std::exp(-(e.values(j) - lo) / mu) / z;
        }
        if (wgt.maxCoeff() <= 0.0) continue;
        const Matrix probe = e.vectors * wgt.asDiagonal() * e.vectors.transpose();
        for (int k = 0; k < p.var_dim; ++k) {
            out.grad(k) += probe.cwiseProduct(p.constraints[i].coefficients[k].mat()).sum();
        }
    }
    return out;
}

// Two-loop L-BFGS ascent on the soft-min at fixed mu. Returns the best
// iterate seen, judged by the exact nonsmooth margin.
struct StageResult {
    Vector w;
    double exact = -std::numeric_limits<double>::infinity();
    int iters = 0;
    bool converged = false;
};

StageResult maximize_stage(const LmiProblem& p, Vector w, double mu, double stop_margin,
                           const SolveOptions& opts) {
    StageResult best;
    best.w = w;

    std::deque<Vector> s_hist, y_hist;
    auto eigs = decompose(p, w);
    SoftminEval cur = softmin(p, eigs, mu);
    best.exact = min_eig(eigs);

    for (int it = 0; it < opts.max_inner; ++it) {
        best.iters = it + 1;
        if (best.exact >= stop_margin) {
            best.converged = true;
            break;
        }
        const double gnorm = cur.grad.norm();
        if (gnorm <= 1e-12 * std::max(1.0, std::abs(cur.value))) {
            best.converged = true;
            break;
        }

        // two-loop recursion on the ascent direction
        Vector q = cur.grad;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            const double rho = 1.0 / y_hist[i].dot(s_hist[i]);
            alpha[i] = rho * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double rho = 1.0 / y_hist[i].dot(s_hist[i]);
            const double beta = rho * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Vector dir = q;  // ascent direction for the concave soft-min
        if (dir.dot(cur.grad) <= 0.0) dir = cur.grad;

        // Armijo backtracking
        double step = 1.0;
        const double slope = dir.dot(cur.grad);
        bool accepted = false;
        Vector w_new;
        SoftminEval next;
        std::vector<EigCache> eigs_new;
        for (int ls = 0; ls < 60; ++ls) {
            w_new = w + step * dir;
            eigs_new = decompose(p, w_new);
            next = softmin(p, eigs_new, mu);
            if (next.value >= cur.value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            best.converged = true;
            break;
        }

        const Vector s = w_new - w;
        const Vector y = next.grad - cur.grad;  // ascent: curvature s.y < 0 expected
        if (s.dot(y) < -1e-12 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(-y);  // store minimization-convention pairs
            if (static_cast<int>(s_hist.size()) > opts.lbfgs_mem) {
                s_hist.pop_front();
                y_hist.pop_front();
            }
        }

        const double improvement = next.value - cur.value;
        w = w_new;
        cur = next;
        const double exact_here = min_eig(eigs_new);
        if (exact_here > best.exact) {
            best.exact = exact_here;
            best.w = w;
        }
        if (improvement <= 1e-15 * std::max(1.0, std::abs(cur.value))) {
            best.converged = true;
            break;
        }
    }
    return best;
}

}  // namespace

matcore::SymMatrix AffineMatrixMap::evaluate(const Vector& w) const {
    Matrix f = constant.mat();
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
        f += w(static_cast<Eigen::Index>(k)) * coefficients[k].mat();
    }
    return matcore::SymMatrix(f);
}

void LmiProblem::validate() const {
    if (var_dim < 0) throw IllFormed("LmiProblem: var_dim must be nonnegative");
    for (const auto& c : constraints) {
        if (static_cast<int>(c.coefficients.size()) != var_dim) {
            throw IllFormed("LmiProblem: constraint has " +
                            std::to_string(c.coefficients.size()) +
                            " coefficient blocks, expected " + std::to_string(var_dim));
        }
        for (const auto& coef : c.coefficients) {
            if (coef.dim() != c.dim()) {
                throw IllFormed("LmiProblem: coefficient dimension mismatch");
            }
        }
    }
    if (objective && objective->size() != var_dim) {
        throw IllFormed("LmiProblem: objective length does not match var_dim");
    }
}

double LmiProblem::scale() const {
    double s = 1.0;
    for (const auto& c : constraints) {
        if (c.dim() > 0) s = std::max(s, c.constant.mat().cwiseAbs().maxCoeff());
    }
    return s;
}

double exact_margin(const LmiProblem& p, const Vector& w) {
    return min_eig(decompose(p, w));
}

FeasibilityResult solve_feasibility(const LmiProblem& p, const SolveOptions& opts) {
    p.validate();
    const double scale = p.scale();
    const double eps_feas = opts.eps_feas_rel * scale;
    const double stop_margin = opts.margin_goal_rel * scale;

    FeasibilityResult result;
    if (p.var_dim == 0) {
        result.margin = exact_margin(p, Vector(0));
        result.point = Vector(0);
        result.status = result.margin >= -eps_feas ? FeasStatus::Feasible
                                                   : FeasStatus::InfeasibleHeuristic;
        return result;
    }

    detail::Rng rng(opts.seed);
    Vector best_w = Vector::Zero(p.var_dim);
    double best_margin = -std::numeric_limits<double>::infinity();
    int total_iters = 0;
    bool last_converged = true;

    for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
        Vector w = Vector::Zero(p.var_dim);
        if (attempt > 0) {
            w = 0.1 * (1.0 + best_w.norm()) * rng.normal_vector(p.var_dim);
        }
        bool converged = true;
        for (double mu = opts.mu_init * scale; mu >= opts.mu_final * scale * 0.999;
             mu *= opts.mu_factor) {
            StageResult st = maximize_stage(p, w, mu, stop_margin, opts);
            w = st.w;
            total_iters += st.iters;
            converged = st.converged;
            if (st.exact >= stop_margin) break;
        }
        const double margin = exact_margin(p, w);
        if (margin > best_margin) {
            best_margin = margin;
            best_w = w;
            last_converged = converged;
        }
        if (best_margin >= -eps_feas) break;      // feasible; no restart needed
        if (best_margin < -0.1 * scale) break;    // deep infeasibility; restarts
                                                  // only help near-boundary stalls
    }

    result.point = best_w;
    result.margin = best_margin;
    result.iterations = total_iters;
    if (best_margin >= -eps_feas) {
        result.status = FeasStatus::Feasible;
    } else if (last_converged) {
        result.status = FeasStatus::InfeasibleHeuristic;
    } else {
        result.status = FeasStatus::MaxIterations;
    }
    return result;
}

namespace {

// Barrier value t*c.w - sum log det F_i(w); +inf outside the strict interior.
double barrier_value(const LmiProblem& p, const Vector& c, double t, const Vector& w) {
    double phi = t * c.dot(w);
    for (const auto& cons : p.constraints) {
        if (cons.dim() == 0) continue;
        Matrix f = cons.constant.mat();
        for (int k = 0; k < p.var_dim; ++k) f += w(k) * cons.coefficients[k].mat();
        Eigen::LLT<Matrix> llt(f);
        if (llt.info() != Eigen::Success) {
            return std::numeric_limits<double>::infinity();
        }
        const Matrix& l = llt.matrixLLT();
        for (Eigen::Index i = 0; i < cons.dim(); ++i) {
            phi -= 2.0 * std::log(l(i, i));
        }
    }
    return phi;
}

// Damped Newton centering for the log-det barrier at fixed t.
void newton_center(const LmiProblem& p, const Vector& c, double t, Vector& w,
                   double unbounded_floor) {
    const int nvar = p.var_dim;
    double phi = barrier_value(p, c, t, w);
    for (int it = 0; it < 80; ++it) {
        std::vector<Matrix> inv(p.constraints.size());
        for (std::size_t i = 0; i < p.constraints.size(); ++i) {
            const auto& cons = p.constraints[i];
            if (cons.dim() == 0) continue;
            Matrix f = cons.constant.mat();
            for (int k = 0; k < nvar; ++k) f += w(k) * cons.coefficients[k].mat();
            Eigen::LLT<Matrix> llt(f);
            if (llt.info() != Eigen::Success) return;  // lost the interior
            inv[i] = llt.solve(Matrix::Identity(cons.dim(), cons.dim()));
        }
        Vector grad = t * c;
        Matrix hess = Matrix::Zero(nvar, nvar);
        for (std::size_t i = 0; i < p.constraints.size(); ++i) {
            const auto& cons = p.constraints[i];
            if (cons.dim() == 0) continue;
            std::vector<Matrix> a(nvar);
            for (int k = 0; k < nvar; ++k) {
                a[k] = inv[i] * cons.coefficients[k].mat();
                grad(k) -= a[k].trace();
            }
            for (int k = 0; k < nvar; ++k) {
                for (int l = k; l < nvar; ++l) {
                    const double h = a[k].cwiseProduct(a[l].transpose()).sum();
                    hess(k, l) += h;
                    if (l != k) hess(l, k) += h;
                }
            }
        }
        hess.diagonal().array() += 1e-12 * (1.0 + hess.trace());
        Eigen::LDLT<Matrix> ldlt(hess);
        Vector dw = -ldlt.solve(grad);
        const double decrement = -grad.dot(dw);
        if (!(decrement > 1e-12 * (1.0 + std::abs(phi)))) return;

        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Vector w_new = w + step * dw;
            const double phi_new = barrier_value(p, c, t, w_new);
            if (phi_new <= phi - 1e-4 * step * decrement) {
                w = w_new;
                phi = phi_new;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) return;
        if (c.dot(w) < unbounded_floor) {
            throw Unbounded("solve_linear_objective: objective is unbounded below");
        }
    }
}

}  // namespace

LinearObjectiveResult solve_linear_objective(const LmiProblem& p, const SolveOptions& opts) {
    p.validate();
    if (!p.objective) {
        throw IllFormed("solve_linear_objective: problem has no objective");
    }
    const Vector& c = *p.objective;
    const double scale = p.scale();

    LmiProblem feas = p;
    feas.objective.reset();
    FeasibilityResult phase1 = solve_feasibility(feas, opts);
    if (phase1.status != FeasStatus::Feasible) {
        throw Infeasible("solve_linear_objective: no feasible point found (margin " +
                         std::to_string(phase1.margin) + ")");
    }
    Vector w = *phase1.point;
    if (p.var_dim == 0) {
        return {0.0, w, phase1.margin};
    }
    if (phase1.margin <= 0.0) {
        // boundary-feasible only; the barrier cannot start. Fall back to a
        // bisection bracket on the objective value.
        double hi = c.dot(w);
        Vector w_hi = w;
        double delta = std::max(1.0, std::abs(hi));
        double lo = hi;
        bool bracketed = false;
        for (int it = 0; it < 64; ++it) {
            lo = hi - delta;
            if (lo < -opts.unbounded_limit * scale) {
                throw Unbounded("solve_linear_objective: bisection bracket not established");
            }
            LmiProblem capped = feas;
            // constraint: c.w <= gamma encoded as the 1x1 block (gamma - c.w) >= 0
            AffineMatrixMap cap;
            cap.constant = matcore::SymMatrix(Matrix::Constant(1, 1, lo));
            cap.coefficients.reserve(p.var_dim);
            for (int k = 0; k < p.var_dim; ++k) {
                cap.coefficients.push_back(
                    matcore::SymMatrix(Matrix::Constant(1, 1, -c(k))));
            }
            capped.constraints.push_back(cap);
            FeasibilityResult r = solve_feasibility(capped, opts);
            if (r.status == FeasStatus::Feasible) {
                hi = lo;
                w_hi = *r.point;
                delta *= 2.0;
            } else {
                bracketed = true;
                break;
            }
        }
        if (!bracketed) {
            throw Unbounded("solve_linear_objective: bisection bracket not established");
        }
        const double eps_obj = opts.eps_obj_rel * scale;
        while (hi - lo > eps_obj) {
            const double mid = 0.5 * (hi + lo);
            LmiProblem capped = feas;
            AffineMatrixMap cap;
            cap.constant = matcore::SymMatrix(Matrix::Constant(1, 1, mid));
            cap.coefficients.reserve(p.var_dim);
            for (int k = 0; k < p.var_dim; ++k) {
                cap.coefficients.push_back(
                    matcore::SymMatrix(Matrix::Constant(1, 1, -c(k))));
            }
            capped.constraints.push_back(cap);
            FeasibilityResult r = solve_feasibility(capped, opts);
            if (r.status == FeasStatus::Feasible) {
                hi = mid;
                w_hi = *r.point;
            } else {
                lo = mid;
            }
        }
        return {c.dot(w_hi), w_hi, exact_margin(feas, w_hi)};
    }

    // log-det barrier path following
    double nu = 0.0;
    for (const auto& cons : p.constraints) nu += static_cast<double>(cons.dim());
    if (nu == 0.0) return {c.dot(w), w, phase1.margin};

    const double eps_obj = opts.eps_obj_rel * scale;
    const double unbounded_floor = -opts.unbounded_limit * scale;
    double t = std::max(1e-6, 1.0 / scale);
    for (int stage = 0; stage < opts.max_barrier_stages; ++stage) {
        newton_center(feas, c, t, w, unbounded_floor);
        if (nu / t <= 0.5 * eps_obj) break;
        t *= 10.0;
    }
    return {c.dot(w), w, exact_margin(feas, w)};
}

}  // namespace ltisets::lmi
