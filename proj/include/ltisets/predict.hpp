#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltisets/inference.hpp"
#include "ltisets/interp.hpp"

namespace ltisets::predict {

struct PredictionInstance {
    inference::DataBatch data;
    Vector x;  // current state x_t
    Vector u;  // candidate input
    inference::PriorBounds bounds;

    PredictionInstance(inference::DataBatch data_in, Vector x_in, Vector u_in,
                       inference::PriorBounds bounds_in);
    Vector offset() const { return data.B * u; }
};

enum class NextStateTag { Empty, ExactEllipsoid, InnerUnion, Degenerate };

struct SkippedCompletion {
    int index = 0;
    std::string reason;
};

// Description of the one-step feasible set; members live in coordinates
// relative to the offset B u.
struct NextStateSet {
    NextStateTag tag = NextStateTag::Empty;
    Vector offset;
    std::vector<interp::Ellipsoid> members;  // one entry for ExactEllipsoid
    std::vector<SkippedCompletion> skipped;

    bool contains(const Vector& x_plus, double tol = 1e-9) const;
};

// Exact membership test for a candidate next state (SDP feasibility over the
// completion variable).
bool membership(const PredictionInstance& inst, const Vector& x_plus,
                const lmi::SolveOptions& opts = {});

// Noise-free reachable set (requires bounds.alpha == 0): a single ellipsoid,
// or Empty / Degenerate.
NextStateSet reachable_noisefree(const PredictionInstance& inst);

// A PSD completion of blockdiag(L^2 I_n, alpha^2 (t+1) I_{t+1}); every such
// completion has off-diagonal L alpha sqrt(t+1) W with ||W|| <= 1.
struct CompletionSample {
    Matrix W;
    matcore::SymMatrix Ghat;
};

std::vector<CompletionSample> sample_completions(Eigen::Index n,
                                                 const inference::PriorBounds& bounds,
                                                 Eigen::Index t, int n_samples,
                                                 std::uint64_t seed);

// Union of per-completion ellipsoids (inner approximation of the feasible
// set). Throws EmptyUnion when no sample yields a member.
NextStateSet reachable_union(const PredictionInstance& inst, int n_samples,
                             std::uint64_t seed, const lmi::SolveOptions& opts = {});

// Containment of the whole set in the target ellipsoid, decided member-wise
// through exact quadratic maximization.
bool safety_check(const NextStateSet& set, const interp::Ellipsoid& target);

struct TrsResult {
    double value = 0.0;
    Vector argmax;
};

// Global maximum of x'Hx + 2g'x + c0 over the ellipsoid E (H PSD); solved on
// the boundary through the secular equation with explicit hard-case handling.
TrsResult trs_max(const interp::Ellipsoid& E, const matcore::SymMatrix& H,
                  const Vector& g, double c0);

struct CostOptions {
    int n_samples = 32;
    std::uint64_t seed = 0x5e7;
    bool refine = false;  // membership-guided expansion from the argmax
    lmi::SolveOptions solver{};
};

struct CostResult {
    double value = 0.0;
    Vector argmax;
    bool lower_bound = false;  // true when computed over an inner union
};

CostResult worst_case_cost(const PredictionInstance& inst, const matcore::SymMatrix& Qc,
                           const matcore::SymMatrix& Rc, const CostOptions& opts = {});

}  // namespace ltisets::predict
