#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ltisets/matcore.hpp"

namespace ltisets::lmi {

// F(w) = constant + sum_k w_k * coefficients[k], symmetric for every w.
struct AffineMatrixMap {
    matcore::SymMatrix constant;
    std::vector<matcore::SymMatrix> coefficients;

    Eigen::Index dim() const { return constant.dim(); }
    matcore::SymMatrix evaluate(const Vector& w) const;
};

struct LmiProblem {
    int var_dim = 0;
    std::vector<AffineMatrixMap> constraints;
    std::optional<Vector> objective;  // minimize objective . w

    void validate() const;  // throws IllFormed
    // max(1, largest constant-block spectral norm); tolerances scale with it.
    double scale() const;
};

enum class FeasStatus { Feasible, InfeasibleHeuristic, MaxIterations };

struct FeasibilityResult {
    FeasStatus status = FeasStatus::InfeasibleHeuristic;
    std::optional<Vector> point;
    double margin = -std::numeric_limits<double>::infinity();
    int iterations = 0;
};

struct SolveOptions {
    double mu_init = 1e-1;
    double mu_final = 1e-6;
    double mu_factor = 0.1;
    int max_inner = 400;          // quasi-Newton iterations per smoothing stage
    int lbfgs_mem = 10;
    double eps_feas_rel = 1e-6;   // feasibility verdict threshold, times scale()
    double eps_obj_rel = 1e-4;    // objective gap target, times scale()
    double margin_goal_rel = 1e-2;  // stop maximizing once margin exceeds this * scale
    int restarts = 3;
    std::uint64_t seed = 0x11235813;
    int max_barrier_stages = 64;
    double unbounded_limit = 1e9;  // objective below -limit*scale => Unbounded
};

struct LinearObjectiveResult {
    double value = 0.0;
    Vector point;
    double margin = 0.0;  // min eigenvalue over constraints at the point
};

// Exact nonsmooth margin min_i lambda_min(F_i(w)); +inf if all blocks empty.
double exact_margin(const LmiProblem& p, const Vector& w);

// Maximizes the smoothed soft-min of constraint eigenvalues with
// mu-continuation; the verdict uses the exact nonsmooth margin.
FeasibilityResult solve_feasibility(const LmiProblem& p, const SolveOptions& opts = {});

// Minimizes the linear objective by a log-det barrier path, started from a
// strictly feasible point produced by solve_feasibility.
// Throws Infeasible / Unbounded.
LinearObjectiveResult solve_linear_objective(const LmiProblem& p, const SolveOptions& opts = {});

// Oracle interface consumed by interp, inference and predict; implementations
// must be safe for concurrent use or instantiated per call.
class FeasibilityOracle {
public:
    virtual ~FeasibilityOracle() = default;
    virtual FeasibilityResult solve(const LmiProblem& p) const = 0;
};

class SoftminOracle final : public FeasibilityOracle {
public:
    SoftminOracle() = default;
    explicit SoftminOracle(SolveOptions opts) : opts_(opts) {}
    FeasibilityResult solve(const LmiProblem& p) const override {
        return solve_feasibility(p, opts_);
    }
    const SolveOptions& options() const { return opts_; }

private:
    SolveOptions opts_{};
};

}  // namespace ltisets::lmi
