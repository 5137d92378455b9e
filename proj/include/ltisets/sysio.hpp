#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ltisets/inference.hpp"
#include "ltisets/matcore.hpp"

namespace ltisets::sysio {

// Chronological input-state record: states x_0 ... x_t, inputs u_0 ... u_{t-1}.
struct Trajectory {
    std::vector<Vector> states;
    std::vector<Vector> inputs;

    Trajectory() = default;
    Trajectory(std::vector<Vector> states_in, std::vector<Vector> inputs_in);
    Eigen::Index t() const { return static_cast<Eigen::Index>(inputs.size()); }
};

enum class NoiseKind { None, PerStepBounded, EnergyBudget };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::None;
    double alpha = 0.0;
    std::uint64_t seed = 0;

    static NoiseSpec none() { return {}; }
    static NoiseSpec per_step_bounded(double alpha, std::uint64_t seed) {
        return {NoiseKind::PerStepBounded, alpha, seed};
    }
    // concentrates the whole budget ||v_j|| = alpha sqrt(t) in one seed-chosen
    // step, the adversarial extreme admitted by the energy bound
    static NoiseSpec energy_budget(double alpha, std::uint64_t seed) {
        return {NoiseKind::EnergyBudget, alpha, seed};
    }
};

struct SimResult {
    Trajectory trajectory;
    Matrix noise;  // realized noise, reversed columns [v_{t-1} ... v_0]
};

SimResult simulate(const Matrix& A, const Matrix& B, const Vector& x0,
                   const std::vector<Vector>& inputs, const NoiseSpec& noise);

// Packs a chronological trajectory into the reversed-column data matrices.
inference::DataBatch build_batch(const Trajectory& traj, const Matrix& B);

struct CoordinateTransform {
    Matrix R;        // P = R'R, symmetric square-root choice
    Matrix R_inv;
    double relaxed_alpha_factor = 1.0;  // sqrt(lambda_max(P))
};

CoordinateTransform make_transform(const matcore::SymMatrix& P);

// Remark-1 change of coordinates: states and B mapped through R, alpha
// relaxed by sqrt(lambda_max(P)). The relaxation is conservative.
std::pair<inference::DataBatch, inference::PriorBounds> apply_transform(
    const inference::DataBatch& batch, const inference::PriorBounds& bounds,
    const matcore::SymMatrix& P);

struct TrajectoryFile {
    Trajectory trajectory;
    Matrix B;
    std::optional<matcore::SymMatrix> P;
};

// JSON document {"states": [[...], ...], "inputs": [[...], ...],
// "B": [[...], ...], "P": [[...], ...]} with rows chronological; "inputs",
// "B" and "P" are optional (autonomous data gets a zero single-column B).
TrajectoryFile load_trajectory(const std::string& path);
// CSV import, one state per row, autonomous.
TrajectoryFile load_trajectory_csv(const std::string& path);
void save_trajectory(const std::string& path, const TrajectoryFile& file);

}  // namespace ltisets::sysio
