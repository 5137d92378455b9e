#pragma once

#include <Eigen/Dense>

#include "ltisets/errors.hpp"

namespace ltisets {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace matcore {

inline constexpr double kDefaultRankTol = 1e-8;
inline constexpr double kDefaultPsdTol = 1e-9;
inline constexpr double kSymmetryTol = 1e-12;

// Symmetric matrix with symmetrization enforced on construction.
// Entries must be finite and symmetric to within kSymmetryTol (absolute).
class SymMatrix {
public:
    SymMatrix() : m_(0, 0) {}
    explicit SymMatrix(const Matrix& m);

    static SymMatrix identity(Eigen::Index dim);
    static SymMatrix zero(Eigen::Index dim);

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& mat() const { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    Matrix m_;
};

struct SpectralDecomp {
    Vector eigenvalues;   // descending
    Matrix eigenvectors;  // orthonormal columns, aligned with eigenvalues
};

SpectralDecomp spectral(const SymMatrix& m);

double lambda_min(const SymMatrix& m);
double lambda_max(const SymMatrix& m);

// True iff lambda_min(m) >= -tol * max(1, spectral_radius(m)).
bool psd_check(const SymMatrix& m, double tol = kDefaultPsdTol);

// Moore-Penrose pseudo-inverse; singular values below rank_tol * sigma_max
// are treated as zero.
Matrix pinv(const Matrix& m, double rank_tol = kDefaultRankTol);

// Pseudo-inverse of a symmetric matrix through its spectral decomposition.
SymMatrix pinv_sym(const SymMatrix& m, double rank_tol = kDefaultRankTol);

// Count of singular values above rank_tol * sigma_max (zero matrix -> 0).
int num_rank(const Matrix& m, double rank_tol = kDefaultRankTol);

// PSD square root; eigenvalues negative within tolerance are clamped to zero.
SymMatrix sqrt_psd(const SymMatrix& m);

}  // namespace matcore
}  // namespace ltisets
