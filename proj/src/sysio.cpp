#include "ltisets/sysio.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ltisets/detail/rng.hpp"

namespace ltisets::sysio {

using matcore::SymMatrix;
using nlohmann::json;

Trajectory::Trajectory(std::vector<Vector> states_in, std::vector<Vector> inputs_in)
    : states(std::move(states_in)), inputs(std::move(inputs_in)) {
    if (states.empty()) {
        throw ShapeError("Trajectory: need at least the initial state");
    }
    if (states.size() != inputs.size() + 1) {
        throw ShapeError("Trajectory: expected one more state than inputs, got " +
                         std::to_string(states.size()) + " states and " +
                         std::to_string(inputs.size()) + " inputs");
    }
    for (const auto& x : states) {
        if (x.size() != states.front().size()) {
            throw ShapeError("Trajectory: states must share the dimension");
        }
    }
    for (const auto& u : inputs) {
        if (u.size() != inputs.front().size()) {
            throw ShapeError("Trajectory: inputs must share the dimension");
        }
    }
}

SimResult simulate(const Matrix& A, const Matrix& B, const Vector& x0,
                   const std::vector<Vector>& inputs, const NoiseSpec& noise) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n || x0.size() != n) {
        throw ShapeError("simulate: dimensions of A, B and x0 are inconsistent");
    }
    const Eigen::Index t = static_cast<Eigen::Index>(inputs.size());
    for (const auto& u : inputs) {
        if (u.size() != B.cols()) {
            throw ShapeError("simulate: input dimension does not match B");
        }
    }

    detail::Rng rng(noise.seed);
    Matrix v = Matrix::Zero(n, t);  // chronological columns v_0 ... v_{t-1}
    switch (noise.kind) {
        case NoiseKind::None:
            break;
        case NoiseKind::PerStepBounded:
            for (Eigen::Index k = 0; k < t; ++k) {
                Vector dir = rng.normal_vector(n);
                const double nn = dir.norm();
                if (nn > 0.0) dir /= nn;
                const double radius =
                    noise.alpha * std::pow(rng.uniform(), 1.0 / std::max<double>(n, 1));
                v.col(k) = radius * dir;
            }
            break;
        case NoiseKind::EnergyBudget: {
            if (t > 0) {
                const Eigen::Index j = static_cast<Eigen::Index>(rng.raw() % t);
                Vector dir = rng.normal_vector(n);
                const double nn = dir.norm();
                if (nn > 0.0) dir /= nn;
                v.col(j) = noise.alpha * std::sqrt(static_cast<double>(t)) * dir;
            }
            break;
        }
    }

    SimResult out;
    out.trajectory.states.reserve(t + 1);
    out.trajectory.states.push_back(x0);
    out.trajectory.inputs = inputs;
    for (Eigen::Index k = 0; k < t; ++k) {
        out.trajectory.states.push_back(A * out.trajectory.states.back() +
                                        B * inputs[k] + v.col(k));
    }
    out.noise = Matrix(n, t);
    for (Eigen::Index k = 0; k < t; ++k) {
        out.noise.col(k) = v.col(t - 1 - k);  // reversed, matching the data layout
    }
    return out;
}

inference::DataBatch build_batch(const Trajectory& traj, const Matrix& B) {
    const Eigen::Index t = traj.t();
    const Eigen::Index n = traj.states.front().size();
    const Eigen::Index m = B.cols();
    if (B.rows() != n) {
        throw ShapeError("build_batch: B rows must match the state dimension");
    }
    if (t > 0 && traj.inputs.front().size() != m) {
        throw ShapeError("build_batch: input dimension does not match B");
    }
    Matrix X(n, t), Xp(n, t), U(m, t);
    for (Eigen::Index k = 0; k < t; ++k) {
        // column k holds time index t-1-k
        X.col(k) = traj.states[t - 1 - k];
        Xp.col(k) = traj.states[t - k];
        U.col(k) = traj.inputs[t - 1 - k];
    }
    return inference::DataBatch(std::move(X), std::move(Xp), std::move(U), B);
}

CoordinateTransform make_transform(const SymMatrix& P) {
    if (matcore::lambda_min(P) <= 0.0) {
        throw NotPD("make_transform: P must be positive definite");
    }
    CoordinateTransform tr;
    tr.R = matcore::sqrt_psd(P).mat();
    tr.R_inv = matcore::pinv(tr.R);
    tr.relaxed_alpha_factor = std::sqrt(matcore::lambda_max(P));
    return tr;
}

std::pair<inference::DataBatch, inference::PriorBounds> apply_transform(
    const inference::DataBatch& batch, const inference::PriorBounds& bounds,
    const SymMatrix& P) {
    if (P.dim() != batch.n()) {
        throw ShapeError("apply_transform: P must be n x n");
    }
    const CoordinateTransform tr = make_transform(P);
    inference::DataBatch mapped(tr.R * batch.X, tr.R * batch.Xplus, batch.U,
                                tr.R * batch.B);
    inference::PriorBounds relaxed(bounds.L, bounds.alpha * tr.relaxed_alpha_factor);
    return {std::move(mapped), std::move(relaxed)};
}

namespace {

Matrix rows_to_matrix(const json& rows, const std::string& field) {
    if (!rows.is_array()) {
        throw InvalidMatrix("trajectory file: field '" + field + "' must be an array");
    }
    const std::size_t nrows = rows.size();
    std::size_t ncols = 0;
    if (nrows > 0) {
        if (!rows[0].is_array()) {
            throw InvalidMatrix("trajectory file: field '" + field +
                                "' must be an array of rows");
        }
        ncols = rows[0].size();
    }
    Matrix m(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
    for (std::size_t i = 0; i < nrows; ++i) {
        if (!rows[i].is_array() || rows[i].size() != ncols) {
            throw InvalidMatrix("trajectory file: ragged rows in field '" + field + "'");
        }
        for (std::size_t j = 0; j < ncols; ++j) {
            if (!rows[i][j].is_number()) {
                throw InvalidMatrix("trajectory file: non-numeric entry in field '" +
                                    field + "'");
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j].get<double>();
        }
    }
    return m;
}

json matrix_to_rows(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TrajectoryFile load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidMatrix("load_trajectory: cannot open '" + path + "'");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw InvalidMatrix("load_trajectory: '" + path + "' is not valid JSON: " +
                            e.what());
    }
    if (!doc.contains("states")) {
        throw InvalidMatrix("load_trajectory: missing field 'states'");
    }
    const Matrix states = rows_to_matrix(doc["states"], "states");
    if (states.rows() == 0) {
        throw InvalidMatrix("load_trajectory: field 'states' needs at least one state");
    }
    const Eigen::Index n = states.cols();
    const Eigen::Index t = states.rows() - 1;

    TrajectoryFile out;
    Matrix inputs;
    if (doc.contains("inputs") && !doc["inputs"].empty()) {
        inputs = rows_to_matrix(doc["inputs"], "inputs");
        if (inputs.rows() != t) {
            throw InvalidMatrix("load_trajectory: field 'inputs' must have " +
                                std::to_string(t) + " rows (one per transition)");
        }
    } else {
        inputs = Matrix::Zero(t, 1);
    }
    if (doc.contains("B")) {
        out.B = rows_to_matrix(doc["B"], "B");
        if (out.B.rows() != n || out.B.cols() != inputs.cols()) {
            throw InvalidMatrix("load_trajectory: field 'B' must be " + std::to_string(n) +
                                "x" + std::to_string(inputs.cols()));
        }
    } else {
        out.B = Matrix::Zero(n, inputs.cols());
    }
    if (doc.contains("P")) {
        const Matrix p = rows_to_matrix(doc["P"], "P");
        if (p.rows() != n || p.cols() != n) {
            throw InvalidMatrix("load_trajectory: field 'P' must be " + std::to_string(n) +
                                "x" + std::to_string(n));
        }
        out.P = SymMatrix(p);
    }

    std::vector<Vector> xs, us;
    for (Eigen::Index i = 0; i <= t; ++i) xs.push_back(states.row(i).transpose());
    for (Eigen::Index i = 0; i < t; ++i) us.push_back(inputs.row(i).transpose());
    out.trajectory = Trajectory(std::move(xs), std::move(us));
    return out;
}

TrajectoryFile load_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidMatrix("load_trajectory_csv: cannot open '" + path + "'");
    }
    std::vector<Vector> xs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw InvalidMatrix("load_trajectory_csv: non-numeric cell '" + cell + "'");
            }
        }
        Vector x(static_cast<Eigen::Index>(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) x(static_cast<Eigen::Index>(i)) = vals[i];
        xs.push_back(std::move(x));
    }
    if (xs.empty()) {
        throw InvalidMatrix("load_trajectory_csv: file holds no states");
    }
    const Eigen::Index n = xs.front().size();
    const Eigen::Index t = static_cast<Eigen::Index>(xs.size()) - 1;
    TrajectoryFile out;
    out.B = Matrix::Zero(n, 1);
    std::vector<Vector> us(static_cast<std::size_t>(t), Vector::Zero(1));
    out.trajectory = Trajectory(std::move(xs), std::move(us));
    return out;
}

void save_trajectory(const std::string& path, const TrajectoryFile& file) {
    json doc;
    const Eigen::Index t = file.trajectory.t();
    const Eigen::Index n = file.trajectory.states.front().size();
    Matrix states(t + 1, n);
    for (Eigen::Index i = 0; i <= t; ++i) {
        states.row(i) = file.trajectory.states[i].transpose();
    }
    doc["states"] = matrix_to_rows(states);
    if (t > 0) {
        Matrix inputs(t, file.trajectory.inputs.front().size());
        for (Eigen::Index i = 0; i < t; ++i) {
            inputs.row(i) = file.trajectory.inputs[i].transpose();
        }
        doc["inputs"] = matrix_to_rows(inputs);
    }
    doc["B"] = matrix_to_rows(file.B);
    if (file.P) doc["P"] = matrix_to_rows(file.P->mat());
    std::ofstream outstream(path);
    if (!outstream) {
        throw InvalidMatrix("save_trajectory: cannot open '" + path + "' for writing");
    }
    outstream << doc.dump(2) << "\n";
}

}  // namespace ltisets::sysio
