#include "ltisets/matcore.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace ltisets::matcore {

SymMatrix::SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw ShapeError("SymMatrix: expected a square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    if (!m.allFinite()) {
        throw InvalidMatrix("SymMatrix: entries must be finite");
    }
    if (m.size() > 0) {
        const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
        if (asym > kSymmetryTol * std::max(1.0, m.cwiseAbs().maxCoeff())) {
            throw InvalidMatrix("SymMatrix: matrix is not symmetric (max asymmetry " +
                                std::to_string(asym) + ")");
        }
    }
    m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
    return SymMatrix(Matrix::Identity(dim, dim));
}

SymMatrix SymMatrix::zero(Eigen::Index dim) {
    return SymMatrix(Matrix::Zero(dim, dim));
}

SpectralDecomp spectral(const SymMatrix& m) {
    SpectralDecomp out;
    if (m.dim() == 0) {
        out.eigenvalues = Vector(0);
        out.eigenvectors = Matrix(0, 0);
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
    if (es.info() != Eigen::Success) {
        throw InvalidMatrix("spectral: eigen-decomposition failed to converge");
    }
    // Eigen returns ascending order; flip to descending.
    const Eigen::Index n = m.dim();
    out.eigenvalues = es.eigenvalues().reverse();
    out.eigenvectors = Matrix(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.eigenvectors.col(j) = es.eigenvectors().col(n - 1 - j);
    }
    return out;
}

double lambda_min(const SymMatrix& m) {
    if (m.dim() == 0) return std::numeric_limits<double>::infinity();
    return spectral(m).eigenvalues.minCoeff();
}

double lambda_max(const SymMatrix& m) {
    if (m.dim() == 0) return -std::numeric_limits<double>::infinity();
    return spectral(m).eigenvalues.maxCoeff();
}

bool psd_check(const SymMatrix& m, double tol) {
    if (m.dim() == 0) return true;  // vacuous
    const SpectralDecomp sd = spectral(m);
    const double radius = sd.eigenvalues.cwiseAbs().maxCoeff();
    return sd.eigenvalues.minCoeff() >= -tol * std::max(1.0, radius);
}

Matrix pinv(const Matrix& m, double rank_tol) {
    if (!m.allFinite()) {
        throw InvalidMatrix("pinv: entries must be finite");
    }
    if (m.rows() == 0 || m.cols() == 0) {
        return Matrix::Zero(m.cols(), m.rows());
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cutoff = rank_tol * sv(0);
    Vector inv_sv = Vector::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff && sv(i) > 0.0) inv_sv(i) = 1.0 / sv(i);
    }
    return svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
}

SymMatrix pinv_sym(const SymMatrix& m, double rank_tol) {
    if (m.dim() == 0) return m;
    const SpectralDecomp sd = spectral(m);
    const double cutoff = rank_tol * sd.eigenvalues.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(sd.eigenvalues.size());
    for (Eigen::Index i = 0; i < inv.size(); ++i) {
        const double ev = sd.eigenvalues(i);
        if (std::abs(ev) > cutoff && ev != 0.0) inv(i) = 1.0 / ev;
    }
    Matrix out = sd.eigenvectors * inv.asDiagonal() * sd.eigenvectors.transpose();
    return SymMatrix(0.5 * (out + out.transpose()));
}

int num_rank(const Matrix& m, double rank_tol) {
    if (!m.allFinite()) {
        throw InvalidMatrix("num_rank: entries must be finite");
    }
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) <= 0.0) return 0;
    const double cutoff = rank_tol * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) ++r;
    }
    return r;
}

SymMatrix sqrt_psd(const SymMatrix& m) {
    if (!psd_check(m, kDefaultPsdTol)) {
        throw NotPSD("sqrt_psd: matrix is indefinite beyond tolerance");
    }
    if (m.dim() == 0) return m;
    const SpectralDecomp sd = spectral(m);
    Vector roots(sd.eigenvalues.size());
    for (Eigen::Index i = 0; i < roots.size(); ++i) {
        roots(i) = std::sqrt(std::max(sd.eigenvalues(i), 0.0));
    }
    Matrix out = sd.eigenvectors * roots.asDiagonal() * sd.eigenvectors.transpose();
    return SymMatrix(0.5 * (out + out.transpose()));
}

}  // namespace ltisets::matcore
