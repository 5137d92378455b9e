#include "ltisets/interp.hpp"

#include <cmath>

namespace ltisets::interp {

using matcore::SymMatrix;

InterpInstance::InterpInstance(Matrix z, Matrix y, SymMatrix g)
    : Z(std::move(z)), Y(std::move(y)), G(std::move(g)) {
    if (Z.cols() != Y.cols()) {
        throw ShapeError("InterpInstance: Z and Y must share the column count");
    }
    if (G.dim() != Z.rows()) {
        throw ShapeError("InterpInstance: bound G must be " + std::to_string(Z.rows()) +
                         "x" + std::to_string(Z.rows()));
    }
    if (!matcore::psd_check(G, matcore::kDefaultPsdTol)) {
        throw NotPSD("InterpInstance: bound G must be PSD");
    }
}

Ellipsoid::Ellipsoid(SymMatrix shape_in, Vector center_in, double level_in)
    : shape(std::move(shape_in)), center(std::move(center_in)), level(level_in) {
    if (shape.dim() != center.size()) {
        throw ShapeError("Ellipsoid: shape and center dimensions differ");
    }
    if (matcore::lambda_min(shape) <= 0.0) {
        throw NotPSD("Ellipsoid: shape matrix must be positive definite");
    }
    if (level < -1e-9) {
        throw InvalidMatrix("Ellipsoid: level " + std::to_string(level) + " is negative");
    }
    level = std::max(level, 0.0);
}

double Ellipsoid::quadratic(const Vector& y) const {
    if (y.size() != center.size()) {
        throw ShapeError("Ellipsoid::quadratic: dimension mismatch");
    }
    const Vector d = y - center;
    return d.dot(shape.mat() * d);
}

bool Ellipsoid::contains(const Vector& y, double tol) const {
    return quadratic(y) <= level + tol;
}

bool interp_exists(const InterpInstance& inst, double tol) {
    const Matrix d =
        inst.Z.transpose() * inst.G.mat() * inst.Z - inst.Y.transpose() * inst.Y;
    return matcore::psd_check(SymMatrix(0.5 * (d + d.transpose())), tol);
}

FeasibleSetResult feasible_output_set(const InterpInstance& inst, const Vector& z,
                                      EllipsoidParam form, double rank_tol) {
    if (z.size() != inst.Z.rows()) {
        throw ShapeError("feasible_output_set: z must have " +
                         std::to_string(inst.Z.rows()) + " entries");
    }
    const Eigen::Index n = inst.Y.rows();
    Matrix d_raw =
        inst.Z.transpose() * inst.G.mat() * inst.Z - inst.Y.transpose() * inst.Y;
    const SymMatrix D(0.5 * (d_raw + d_raw.transpose()));

    FeasibleSetResult out;
    out.rank_Z = matcore::num_rank(inst.Z, rank_tol);
    if (!matcore::psd_check(D, matcore::kDefaultPsdTol)) {
        out.tag = FeasibleSetTag::Empty;
        out.rank_D = matcore::num_rank(D.mat(), rank_tol);
        return out;
    }
    out.rank_D = matcore::num_rank(D.mat(), rank_tol);
    if (out.rank_D != out.rank_Z) {
        out.tag = FeasibleSetTag::Degenerate;
        return out;
    }

    const Matrix d_pinv = matcore::pinv_sym(D, rank_tol).mat();
    Matrix shape_raw = Matrix::Identity(n, n) + inst.Y * d_pinv * inst.Y.transpose();
    const SymMatrix shape(0.5 * (shape_raw + shape_raw.transpose()));

    Vector center;
    double level = 0.0;
    if (form == EllipsoidParam::Projected) {
        const Matrix g_half = matcore::sqrt_psd(inst.G).mat();
        const Matrix hz = g_half * inst.Z;           // G^{1/2} Z
        const Matrix hz_pinv = matcore::pinv(hz, rank_tol);
        const Vector gz = g_half * z;                // G^{1/2} z
        center = inst.Y * (hz_pinv * gz);
        const Vector proj = hz * (d_pinv * (D.mat() * (hz_pinv * gz)));
        level = gz.dot(gz - proj);
    } else {
        // center = shape^{-1} b, level = b' shape^{-1} b - chi with
        // b = Y D^+ Z' G z and chi = z'G^{1/2}(G^{1/2} Z D^+ Z' G^{1/2} - I)G^{1/2} z
        const Vector b = inst.Y * (d_pinv * (inst.Z.transpose() * (inst.G.mat() * z)));
        const Vector gz_full = inst.G.mat() * z;
        const double chi =
            gz_full.dot(inst.Z * (d_pinv * (inst.Z.transpose() * gz_full))) -
            z.dot(gz_full);
        center = shape.mat().ldlt().solve(b);
        level = b.dot(center) - chi;
    }
    if (level < 0.0) level = std::max(level, 0.0);
    out.tag = FeasibleSetTag::Ellipsoid;
    out.ellipsoid.emplace(shape, center, std::max(level, 0.0));
    return out;
}

Matrix CompletionCertificate::assembled() const {
    const std::size_t nblocks = blocks.size();
    Eigen::Index total = 0;
    std::vector<Eigen::Index> offsets(nblocks);
    for (std::size_t i = 0; i < nblocks; ++i) {
        offsets[i] = total;
        total += blocks[i].dim();
    }
    Matrix g = Matrix::Zero(total, total);
    for (std::size_t i = 0; i < nblocks; ++i) {
        g.block(offsets[i], offsets[i], blocks[i].dim(), blocks[i].dim()) = blocks[i].mat();
        for (std::size_t j = i + 1; j < nblocks; ++j) {
            const Matrix& o = offdiag[i][j - i - 1];
            g.block(offsets[i], offsets[j], o.rows(), o.cols()) = o;
            g.block(offsets[j], offsets[i], o.cols(), o.rows()) = o.transpose();
        }
    }
    return g;
}

CompletionCertificate CompletionCertificate::block_diagonal(
    std::vector<SymMatrix> blocks_in) {
    CompletionCertificate cert;
    cert.blocks = std::move(blocks_in);
    cert.offdiag.resize(cert.blocks.size());
    for (std::size_t i = 0; i < cert.blocks.size(); ++i) {
        for (std::size_t j = i + 1; j < cert.blocks.size(); ++j) {
            cert.offdiag[i].push_back(
                Matrix::Zero(cert.blocks[i].dim(), cert.blocks[j].dim()));
        }
    }
    return cert;
}

namespace {

struct OffdiagLayout {
    // flattened decision variable: row-major entries of each block (i, j), i < j
    struct Entry {
        std::size_t bi, bj;
        Eigen::Index row, col;
        Eigen::Index abs_row, abs_col;  // within the assembled matrix
    };
    std::vector<Entry> entries;
    std::vector<Eigen::Index> offsets;
    Eigen::Index total = 0;
};

OffdiagLayout make_layout(const std::vector<SymMatrix>& blocks) {
    OffdiagLayout layout;
    layout.offsets.resize(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        layout.offsets[i] = layout.total;
        layout.total += blocks[i].dim();
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        for (std::size_t j = i + 1; j < blocks.size(); ++j) {
            for (Eigen::Index r = 0; r < blocks[i].dim(); ++r) {
                for (Eigen::Index c = 0; c < blocks[j].dim(); ++c) {
                    layout.entries.push_back({i, j, r, c, layout.offsets[i] + r,
                                              layout.offsets[j] + c});
                }
            }
        }
    }
    return layout;
}

}  // namespace

std::optional<CompletionCertificate> multi_bound_exists(
    const std::vector<Matrix>& Zs, const Matrix& Y,
    const std::vector<SymMatrix>& bounds, const lmi::FeasibilityOracle& oracle) {
    if (Zs.size() != bounds.size() || Zs.empty()) {
        throw ShapeError("multi_bound_exists: need one bound per data block");
    }
    const Eigen::Index t = Y.cols();
    Eigen::Index mtot = 0;
    for (std::size_t i = 0; i < Zs.size(); ++i) {
        if (Zs[i].cols() != t) {
            throw ShapeError("multi_bound_exists: Z blocks must share Y's column count");
        }
        if (bounds[i].dim() != Zs[i].rows()) {
            throw ShapeError("multi_bound_exists: bound " + std::to_string(i) +
                             " does not match its data block");
        }
        mtot += Zs[i].rows();
    }
    Matrix z_stack(mtot, t);
    {
        Eigen::Index at = 0;
        for (const auto& zi : Zs) {
            z_stack.middleRows(at, zi.rows()) = zi;
            at += zi.rows();
        }
    }

    const OffdiagLayout layout = make_layout(bounds);
    const Matrix g0 = CompletionCertificate::block_diagonal(bounds).assembled();

    lmi::LmiProblem problem;
    problem.var_dim = static_cast<int>(layout.entries.size());

    // (1) assembled completion PSD
    lmi::AffineMatrixMap psd_map;
    psd_map.constant = SymMatrix(g0);
    // (2) Y'Y <= Z' Ghat Z
    lmi::AffineMatrixMap interp_map;
    {
        Matrix base = z_stack.transpose() * g0 * z_stack - Y.transpose() * Y;
        interp_map.constant = SymMatrix(0.5 * (base + base.transpose()));
    }
    for (const auto& e : layout.entries) {
        Matrix unit = Matrix::Zero(layout.total, layout.total);
        unit(e.abs_row, e.abs_col) = 1.0;
        unit(e.abs_col, e.abs_row) = 1.0;
        psd_map.coefficients.emplace_back(unit);
        Matrix zz = z_stack.transpose() * unit * z_stack;
        interp_map.coefficients.emplace_back(SymMatrix(0.5 * (zz + zz.transpose())));
    }
    problem.constraints.push_back(std::move(psd_map));
    problem.constraints.push_back(std::move(interp_map));

    const lmi::FeasibilityResult res = oracle.solve(problem);
    if (res.status == lmi::FeasStatus::MaxIterations) {
        throw OracleFailure("multi_bound_exists: oracle did not converge");
    }
    if (res.status != lmi::FeasStatus::Feasible) {
        return std::nullopt;
    }

    CompletionCertificate cert = CompletionCertificate::block_diagonal(bounds);
    const Vector& w = *res.point;
    for (std::size_t k = 0; k < layout.entries.size(); ++k) {
        const auto& e = layout.entries[k];
        cert.offdiag[e.bi][e.bj - e.bi - 1](e.row, e.col) = w(static_cast<Eigen::Index>(k));
    }
    return cert;
}

std::optional<CompletionCertificate> multi_bound_exists(
    const std::vector<Matrix>& Zs, const Matrix& Y,
    const std::vector<SymMatrix>& bounds) {
    return multi_bound_exists(Zs, Y, bounds, lmi::SoftminOracle{});
}

std::vector<Matrix> certificate_to_operators(const CompletionCertificate& cert,
                                             const std::vector<Matrix>& Zs,
                                             const Matrix& Y) {
    if (cert.blocks.size() != Zs.size()) {
        throw ShapeError("certificate_to_operators: block count mismatch");
    }
    const Matrix g = cert.assembled();
    Matrix g_sym = 0.5 * (g + g.transpose());
    // clamp the certificate onto the PSD cone before taking the square root
    SymMatrix g_psd(g_sym);
    if (!matcore::psd_check(g_psd, 1e-7)) {
        throw CertificateInvalid("certificate_to_operators: completion is not PSD");
    }
    const Eigen::Index t = Y.cols();
    Matrix z_stack(g.rows(), t);
    {
        Eigen::Index at = 0;
        for (const auto& zi : Zs) {
            if (zi.cols() != t) {
                throw ShapeError("certificate_to_operators: column count mismatch");
            }
            z_stack.middleRows(at, zi.rows()) = zi;
            at += zi.rows();
        }
    }

    // M = Y (G^{1/2} Z)^+ G^{1/2} satisfies Y = M Z and M'M <= G.
    // Certificates from the oracle may sit a few ulps outside the cone;
    // clamp onto it before taking the root.
    Matrix g_half;
    {
        const matcore::SpectralDecomp sd = matcore::spectral(g_psd);
        Vector roots(sd.eigenvalues.size());
        for (Eigen::Index i = 0; i < roots.size(); ++i) {
            roots(i) = std::sqrt(std::max(sd.eigenvalues(i), 0.0));
        }
        g_half = sd.eigenvectors * roots.asDiagonal() * sd.eigenvectors.transpose();
        g_half = (0.5 * (g_half + g_half.transpose())).eval();
    }
    const Matrix m_full = Y * matcore::pinv(g_half * z_stack) * g_half;

    std::vector<Matrix> ops;
    Eigen::Index at = 0;
    Matrix recon = Matrix::Zero(Y.rows(), t);
    for (std::size_t i = 0; i < Zs.size(); ++i) {
        Matrix mi = m_full.middleCols(at, Zs[i].rows());
        at += Zs[i].rows();
        recon += mi * Zs[i];
        const double bound = std::sqrt(std::max(matcore::lambda_max(cert.blocks[i]), 0.0));
        const double norm_mi = mi.size() == 0 ? 0.0 : mi.operatorNorm();
        if (norm_mi > bound + 1e-6) {
            throw CertificateInvalid("certificate_to_operators: block " + std::to_string(i) +
                                     " exceeds its norm bound (" + std::to_string(norm_mi) +
                                     " > " + std::to_string(bound) + ")");
        }
        ops.push_back(std::move(mi));
    }
    const double y_norm = Y.size() == 0 ? 0.0 : Y.norm();
    if ((Y - recon).norm() > 1e-6 * std::max(1.0, y_norm)) {
        throw CertificateInvalid("certificate_to_operators: reconstruction residual " +
                                 std::to_string((Y - recon).norm()) + " too large");
    }
    return ops;
}

}  // namespace ltisets::interp
