#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ltisets/lmi.hpp"
#include "ltisets/matcore.hpp"

namespace ltisets::interp {

// Data pair (Z, Y) with the operator-energy bound G: does some M with
// M^T M <= G map the columns of Z onto the columns of Y?
struct InterpInstance {
    Matrix Z;  // m x t
    Matrix Y;  // n x t
    matcore::SymMatrix G;  // m x m, PSD

    InterpInstance(Matrix z, Matrix y, matcore::SymMatrix g);
};

// { y : (y - center)' shape (y - center) <= level }, shape positive definite.
struct Ellipsoid {
    matcore::SymMatrix shape;
    Vector center;
    double level = 0.0;

    Ellipsoid(matcore::SymMatrix shape_in, Vector center_in, double level_in);
    Eigen::Index dim() const { return center.size(); }
    double quadratic(const Vector& y) const;
    bool contains(const Vector& y, double tol = 1e-9) const;
};

enum class FeasibleSetTag { Empty, Ellipsoid, Degenerate };

struct FeasibleSetResult {
    FeasibleSetTag tag = FeasibleSetTag::Empty;
    std::optional<Ellipsoid> ellipsoid;
    int rank_D = 0;
    int rank_Z = 0;
};

// Which closed form of (center, level) to evaluate. Both are algebraically
// equal; Projected avoids inverting the shape matrix and is the default,
// NormalEquations exists as a cross-check.
enum class EllipsoidParam { Projected, NormalEquations };

bool interp_exists(const InterpInstance& inst, double tol = matcore::kDefaultPsdTol);

// Set of feasible outputs y = M z over all admissible interpolants M.
// Empty when D = Z'GZ - Y'Y is not PSD; Degenerate when rank(D) < rank(Z).
FeasibleSetResult feasible_output_set(const InterpInstance& inst, const Vector& z,
                                      EllipsoidParam form = EllipsoidParam::Projected,
                                      double rank_tol = matcore::kDefaultRankTol);

// PSD completion of blockdiag(blocks) with the chosen off-diagonal fill.
struct CompletionCertificate {
    std::vector<matcore::SymMatrix> blocks;          // Gamma_1 ... Gamma_N
    std::vector<std::vector<Matrix>> offdiag;        // offdiag[i][j-i-1], i < j

    Matrix assembled() const;
    static CompletionCertificate block_diagonal(std::vector<matcore::SymMatrix> blocks);
};

// Existence of block operators M_i with M_i' M_i <= bounds[i] and
// Y = sum_i M_i Z_i, decided through a PSD completion search.
std::optional<CompletionCertificate> multi_bound_exists(
    const std::vector<Matrix>& Zs, const Matrix& Y,
    const std::vector<matcore::SymMatrix>& bounds, const lmi::FeasibilityOracle& oracle);

std::optional<CompletionCertificate> multi_bound_exists(
    const std::vector<Matrix>& Zs, const Matrix& Y,
    const std::vector<matcore::SymMatrix>& bounds);

// Reconstructs one admissible block operator family from a certificate
// (diagnostic use). Throws CertificateInvalid when the reconstruction does
// not reproduce Y or violates the block bounds.
std::vector<Matrix> certificate_to_operators(const CompletionCertificate& cert,
                                             const std::vector<Matrix>& Zs,
                                             const Matrix& Y);

}  // namespace ltisets::interp
