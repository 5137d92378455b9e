#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ltisets/inference.hpp"
#include "ltisets/interp.hpp"
#include "ltisets/matcore.hpp"
#include "ltisets/predict.hpp"
#include "ltisets/sysio.hpp"

using namespace ltisets;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNegative = 3;
constexpr int kExitDegenerate = 4;

struct CommonConfig {
    std::string data_path;
    double L = 1.0;
    double alpha = 0.0;
    std::string x_csv, u_csv;
    int samples = 32;
    std::uint64_t seed = 0;
    std::string out_path;
    std::string format = "json";
    double rank_tol = matcore::kDefaultRankTol;
    double psd_tol = matcore::kDefaultPsdTol;
    double eps_feas = 1e-6;
    double eps_obj = 1e-7;
};

Vector parse_vector(const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        vals.push_back(std::stod(cell));
    }
    Vector v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<Eigen::Index>(i)) = vals[i];
    return v;
}

Matrix parse_square_matrix(const std::string& csv, Eigen::Index n, const std::string& name) {
    const Vector flat = parse_vector(csv);
    if (flat.size() != n * n) {
        throw InvalidMatrix(name + ": expected " + std::to_string(n * n) +
                            " comma-separated entries (row-major), got " +
                            std::to_string(flat.size()));
    }
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = flat(i * n + j);
    return m;
}

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json tolerance_block(const CommonConfig& cfg) {
    return json{{"rank_tol", cfg.rank_tol},
                {"psd_tol", cfg.psd_tol},
                {"eps_feas_rel", cfg.eps_feas},
                {"eps_obj_rel", cfg.eps_obj}};
}

lmi::SolveOptions solver_options(const CommonConfig& cfg) {
    lmi::SolveOptions opts;
    opts.eps_feas_rel = cfg.eps_feas;
    opts.eps_obj_rel = cfg.eps_obj;
    return opts;
}

struct LoadedProblem {
    inference::DataBatch batch;
    Vector x;       // current state (defaults to the last state)
    Vector u;       // candidate input (defaults to zero)
    double alpha = 0.0;  // relaxed when an energy metric was folded in
    bool transformed = false;
};

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

sysio::TrajectoryFile load_file(const std::string& path) {
    return ends_with(path, ".csv") ? sysio::load_trajectory_csv(path)
                                   : sysio::load_trajectory(path);
}

LoadedProblem load_problem(const CommonConfig& cfg) {
    const sysio::TrajectoryFile file = load_file(cfg.data_path);
    inference::DataBatch batch = sysio::build_batch(file.trajectory, file.B);
    bool transformed = false;
    double alpha = cfg.alpha;
    Vector x = file.trajectory.states.back();
    if (file.P) {
        auto [mapped, relaxed] = sysio::apply_transform(
            batch, inference::PriorBounds(cfg.L, cfg.alpha), *file.P);
        batch = std::move(mapped);
        alpha = relaxed.alpha;
        transformed = true;
        x = sysio::make_transform(*file.P).R * x;
    }
    if (!cfg.x_csv.empty()) {
        x = parse_vector(cfg.x_csv);
        if (x.size() != batch.n()) {
            throw InvalidMatrix("--x: expected " + std::to_string(batch.n()) + " entries");
        }
    }
    Vector u = Vector::Zero(batch.m());
    if (!cfg.u_csv.empty()) {
        u = parse_vector(cfg.u_csv);
        if (u.size() != batch.m()) {
            throw InvalidMatrix("--u: expected " + std::to_string(batch.m()) + " entries");
        }
    }
    return {std::move(batch), std::move(x), std::move(u), alpha, transformed};
}

void emit(const CommonConfig& cfg, const std::string& text) {
    if (cfg.out_path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(cfg.out_path);
    if (!out) {
        throw InvalidMatrix("--out: cannot open '" + cfg.out_path + "' for writing");
    }
    out << text << "\n";
}

json report_header(const CommonConfig& cfg, const std::string& command) {
    return json{{"command", command},
                {"data", cfg.data_path},
                {"seed", cfg.seed},
                {"tolerances", tolerance_block(cfg)}};
}

// ---------------------------------------------------------------------------
// SVG emission: member boundaries as 256-point polylines computed from the
// shape eigen-structure, the prior ball dashed, the least-squares point
// marked. 2-D only.
std::string render_svg(const predict::NextStateSet& set, const Vector& ls_point,
                       double prior_radius) {
    const int kBoundaryPoints = 256;
    std::vector<std::vector<std::pair<double, double>>> curves;
    double min_x = ls_point(0), max_x = ls_point(0);
    double min_y = ls_point(1), max_y = ls_point(1);
    auto track = [&](double px, double py) {
        min_x = std::min(min_x, px);
        max_x = std::max(max_x, px);
        min_y = std::min(min_y, py);
        max_y = std::max(max_y, py);
    };
    for (const auto& member : set.members) {
        const auto sd = matcore::spectral(member.shape);
        std::vector<std::pair<double, double>> pts;
        for (int k = 0; k <= kBoundaryPoints; ++k) {
            const double th = 2.0 * M_PI * k / kBoundaryPoints;
            const Vector p = member.center + set.offset +
                             std::sqrt(member.level / sd.eigenvalues(0)) * std::cos(th) *
                                 sd.eigenvectors.col(0) +
                             std::sqrt(member.level / sd.eigenvalues(1)) * std::sin(th) *
                                 sd.eigenvectors.col(1);
            pts.emplace_back(p(0), p(1));
            track(p(0), p(1));
        }
        curves.push_back(std::move(pts));
    }
    // dashed prior circle around the offset
    std::vector<std::pair<double, double>> circle;
    for (int k = 0; k <= kBoundaryPoints; ++k) {
        const double th = 2.0 * M_PI * k / kBoundaryPoints;
        const double px = set.offset(0) + prior_radius * std::cos(th);
        const double py = set.offset(1) + prior_radius * std::sin(th);
        circle.emplace_back(px, py);
        track(px, py);
    }

    const double span = std::max({max_x - min_x, max_y - min_y, 1e-6});
    const double pad = 0.1 * span;
    min_x -= pad;
    max_x += pad;
    min_y -= pad;
    max_y += pad;
    const double width = 480.0;
    const double scale = width / (max_x - min_x);
    const double height = (max_y - min_y) * scale;
    auto sx = [&](double v) { return (v - min_x) * scale; };
    auto sy = [&](double v) { return height - (v - min_y) * scale; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    // axes through the origin when visible
    if (min_x < 0.0 && max_x > 0.0) {
        svg << "  <line x1=\"" << sx(0) << "\" y1=\"0\" x2=\"" << sx(0) << "\" y2=\""
            << height << "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
    }
    if (min_y < 0.0 && max_y > 0.0) {
        svg << "  <line x1=\"0\" y1=\"" << sy(0) << "\" x2=\"" << width << "\" y2=\""
            << sy(0) << "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
    }
    auto emit_polyline = [&](const std::vector<std::pair<double, double>>& pts,
                             const std::string& style) {
        svg << "  <polyline fill=\"none\" " << style << " points=\"";
        for (const auto& [px, py] : pts) svg << sx(px) << "," << sy(py) << " ";
        svg << "\"/>\n";
    };
    emit_polyline(circle, "stroke=\"#cc3333\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"");
    for (const auto& c : curves) {
        emit_polyline(c, "stroke=\"#2255cc\" stroke-width=\"1.5\"");
    }
    const double cx = sx(ls_point(0));
    const double cy = sy(ls_point(1));
    svg << "  <line x1=\"" << cx - 5 << "\" y1=\"" << cy << "\" x2=\"" << cx + 5
        << "\" y2=\"" << cy << "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
    svg << "  <line x1=\"" << cx << "\" y1=\"" << cy - 5 << "\" x2=\"" << cx << "\" y2=\""
        << cy + 5 << "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
    svg << "</svg>";
    return svg.str();
}

json set_to_json(const predict::NextStateSet& set) {
    json j;
    switch (set.tag) {
        case predict::NextStateTag::Empty: j["tag"] = "empty"; break;
        case predict::NextStateTag::ExactEllipsoid: j["tag"] = "exact_ellipsoid"; break;
        case predict::NextStateTag::InnerUnion: j["tag"] = "inner_union"; break;
        case predict::NextStateTag::Degenerate: j["tag"] = "degenerate"; break;
    }
    j["offset"] = vector_to_json(set.offset);
    json members = json::array();
    for (const auto& e : set.members) {
        members.push_back(json{{"shape", matrix_to_json(e.shape.mat())},
                               {"center", vector_to_json(e.center)},
                               {"level", e.level}});
    }
    j["members"] = std::move(members);
    json skipped = json::array();
    for (const auto& s : set.skipped) {
        skipped.push_back(json{{"index", s.index}, {"reason", s.reason}});
    }
    j["skipped"] = std::move(skipped);
    return j;
}

json certificate_to_json(const interp::CompletionCertificate& cert) {
    return json{{"gamma", matrix_to_json(cert.offdiag[0][0])}};
}

int cmd_verify(const CommonConfig& cfg) {
    const sysio::TrajectoryFile file = load_file(cfg.data_path);
    const inference::DataBatch batch = sysio::build_batch(file.trajectory, file.B);
    const inference::PriorBounds bounds(cfg.L, cfg.alpha, file.P);
    const auto report = inference::verify(batch, bounds, solver_options(cfg));

    json j = report_header(cfg, "verify");
    j["L"] = cfg.L;
    j["alpha"] = cfg.alpha;
    j["consistent"] = report.consistent;
    j["margin"] = std::isfinite(report.margin) ? json(report.margin) : json("inf");
    j["conservative"] = report.conservative;
    j["effective_alpha"] = report.effective_alpha;
    if (report.certificate) j["certificate"] = certificate_to_json(*report.certificate);
    emit(cfg, j.dump(2));
    return report.consistent ? kExitOk : kExitNegative;
}

int cmd_infer(const CommonConfig& cfg, const std::string& mode, const std::string& grid_csv) {
    const LoadedProblem prob = load_problem(cfg);
    const inference::DataBatch& batch = prob.batch;
    const double alpha = prob.alpha;
    inference::InferenceOptions opts;
    opts.solver = solver_options(cfg);
    opts.solver.eps_obj_rel = cfg.eps_obj;

    json j = report_header(cfg, "infer");
    j["mode"] = mode;
    if (mode == "alpha") {
        j["L"] = cfg.L;
        try {
            const auto res = inference::min_noise(batch, cfg.L, opts);
            j["alpha_star"] = res.value;
            j["cross_check"] = res.cross_check_value;
            j["residual"] = std::abs(res.value - res.cross_check_value);
            if (res.certificate) j["certificate"] = certificate_to_json(*res.certificate);
            emit(cfg, j.dump(2));
            return kExitOk;
        } catch (const Infeasible& e) {
            j["status"] = "infeasible";
            j["message"] = e.what();
            emit(cfg, j.dump(2));
            return kExitNegative;
        }
    }
    if (mode == "L") {
        j["alpha"] = alpha;
        try {
            const auto res = inference::min_gain(batch, alpha, opts);
            j["L_star"] = res.value;
            j["cross_check"] = res.cross_check_value;
            j["residual"] = std::abs(res.value - res.cross_check_value);
            if (res.certificate) j["certificate"] = certificate_to_json(*res.certificate);
            emit(cfg, j.dump(2));
            return kExitOk;
        } catch (const Infeasible& e) {
            j["status"] = "infeasible";
            j["message"] = e.what();
            j["bracket"] = 1e3;
            emit(cfg, j.dump(2));
            return kExitNegative;
        }
    }
    if (mode != "curve") {
        throw InvalidMatrix("--mode must be one of alpha|L|curve");
    }
    std::vector<double> grid;
    if (grid_csv.empty()) {
        grid = {0.5, 1.0, 2.0, 4.0};
    } else {
        const Vector g = parse_vector(grid_csv);
        grid.assign(g.data(), g.data() + g.size());
    }
    const auto curve = inference::tradeoff_curve(batch, grid, opts);
    if (cfg.format == "csv") {
        std::ostringstream csv;
        csv << "L,alpha_star,error\n";
        for (const auto& pt : curve) {
            csv << pt.L << ",";
            if (pt.alpha_star) csv << *pt.alpha_star;
            csv << "," << pt.error << "\n";
        }
        std::string text = csv.str();
        text.pop_back();
        emit(cfg, text);
        return kExitOk;
    }
    json points = json::array();
    for (const auto& pt : curve) {
        json p{{"L", pt.L}};
        if (pt.alpha_star) {
            p["alpha_star"] = *pt.alpha_star;
        } else {
            p["error"] = pt.error;
        }
        points.push_back(std::move(p));
    }
    j["points"] = std::move(points);
    emit(cfg, j.dump(2));
    return kExitOk;
}

int cmd_predict(const CommonConfig& cfg) {
    const LoadedProblem prob = load_problem(cfg);
    const double alpha = prob.alpha;
    const predict::PredictionInstance inst(prob.batch, prob.x, prob.u,
                                           inference::PriorBounds(cfg.L, alpha));

    json j = report_header(cfg, "predict");
    j["L"] = cfg.L;
    j["alpha"] = alpha;
    j["x"] = vector_to_json(prob.x);
    j["u"] = vector_to_json(prob.u);
    j["transformed"] = prob.transformed;

    predict::NextStateSet set;
    try {
        set = alpha == 0.0
                  ? predict::reachable_noisefree(inst)
                  : predict::reachable_union(inst, cfg.samples, cfg.seed,
                                             solver_options(cfg));
    } catch (const EmptyUnion& e) {
        set.tag = predict::NextStateTag::Empty;
        set.offset = inst.offset();
        j["note"] = e.what();
    }
    j["set"] = set_to_json(set);
    const Vector ls_point =
        inst.offset() + prob.batch.shifted_outputs() * (matcore::pinv(prob.batch.X) * prob.x);
    j["least_squares"] = vector_to_json(ls_point);

    if (cfg.format == "svg") {
        if (prob.batch.n() != 2) {
            std::cerr << "plot rejected: SVG output needs a 2-D state, emitting JSON\n";
            emit(cfg, j.dump(2));
        } else {
            const double prior_radius = cfg.L * prob.x.norm() + alpha;
            emit(cfg, render_svg(set, ls_point, prior_radius));
        }
    } else {
        emit(cfg, j.dump(2));
    }
    switch (set.tag) {
        case predict::NextStateTag::Empty: return kExitNegative;
        case predict::NextStateTag::Degenerate: return kExitDegenerate;
        default: return kExitOk;
    }
}

interp::Ellipsoid parse_target(const CommonConfig& cfg, Eigen::Index n,
                               const std::string& center_csv, double radius,
                               const std::string& shape_csv, double level) {
    Vector center = Vector::Zero(n);
    if (!center_csv.empty()) {
        center = parse_vector(center_csv);
        if (center.size() != n) {
            throw InvalidMatrix("--target-center: expected " + std::to_string(n) +
                                " entries");
        }
    }
    if (!shape_csv.empty()) {
        const Matrix shape = parse_square_matrix(shape_csv, n, "--target-shape");
        return interp::Ellipsoid(matcore::SymMatrix(shape), center, level);
    }
    if (!(radius > 0.0)) {
        throw InvalidMatrix("safety: provide --target-radius or --target-shape");
    }
    return interp::Ellipsoid(matcore::SymMatrix::identity(n), center, radius * radius);
}

int cmd_safety(const CommonConfig& cfg, const std::vector<std::string>& u_list,
               const std::string& center_csv, double radius, const std::string& shape_csv,
               double level) {
    const LoadedProblem prob = load_problem(cfg);
    const double alpha = prob.alpha;
    const interp::Ellipsoid target =
        parse_target(cfg, prob.batch.n(), center_csv, radius, shape_csv, level);

    std::vector<Vector> candidates;
    if (u_list.empty()) {
        candidates.push_back(prob.u);
    } else {
        for (const auto& s : u_list) candidates.push_back(parse_vector(s));
    }

    json j = report_header(cfg, "safety");
    j["L"] = cfg.L;
    j["alpha"] = alpha;
    j["target"] = json{{"shape", matrix_to_json(target.shape.mat())},
                       {"center", vector_to_json(target.center)},
                       {"level", target.level}};
    json verdicts = json::array();
    bool any_safe = false;
    for (const auto& u : candidates) {
        if (u.size() != prob.batch.m()) {
            throw InvalidMatrix("--u: expected " + std::to_string(prob.batch.m()) +
                                " entries");
        }
        const predict::PredictionInstance inst(prob.batch, prob.x, u,
                                               inference::PriorBounds(cfg.L, alpha));
        json entry{{"u", vector_to_json(u)}};
        try {
            const auto set =
                alpha == 0.0 ? predict::reachable_noisefree(inst)
                             : predict::reachable_union(inst, cfg.samples, cfg.seed,
                                                        solver_options(cfg));
            const bool safe = predict::safety_check(set, target);
            entry["safe"] = safe;
            any_safe = any_safe || safe;
        } catch (const EmptyUnion&) {
            entry["safe"] = true;  // empty feasible set is vacuously contained
            entry["note"] = "feasible set is empty";
            any_safe = true;
        }
        verdicts.push_back(std::move(entry));
    }
    j["verdicts"] = std::move(verdicts);
    emit(cfg, j.dump(2));
    return any_safe ? kExitOk : kExitNegative;
}

int cmd_cost(const CommonConfig& cfg, const std::vector<std::string>& u_list,
             const std::string& qc_csv, const std::string& rc_csv, bool refine) {
    const LoadedProblem prob = load_problem(cfg);
    const double alpha = prob.alpha;
    const Eigen::Index n = prob.batch.n();
    const Eigen::Index m = prob.batch.m();
    const matcore::SymMatrix qc(qc_csv.empty() ? Matrix::Identity(n, n)
                                               : parse_square_matrix(qc_csv, n, "--Qc"));
    const matcore::SymMatrix rc(rc_csv.empty() ? Matrix::Identity(m, m)
                                               : parse_square_matrix(rc_csv, m, "--Rc"));

    std::vector<Vector> candidates;
    if (u_list.empty()) {
        candidates.push_back(prob.u);
    } else {
        for (const auto& s : u_list) candidates.push_back(parse_vector(s));
    }

    predict::CostOptions copts;
    copts.n_samples = cfg.samples;
    copts.seed = cfg.seed;
    copts.refine = refine;
    copts.solver = solver_options(cfg);

    json table = json::array();
    for (const auto& u : candidates) {
        const predict::PredictionInstance inst(prob.batch, prob.x, u,
                                               inference::PriorBounds(cfg.L, alpha));
        json entry{{"u", vector_to_json(u)}};
        try {
            const auto cost = predict::worst_case_cost(inst, qc, rc, copts);
            entry["value"] = cost.value;
            entry["lower_bound"] = cost.lower_bound;
            entry["argmax"] = vector_to_json(cost.argmax);
        } catch (const EmptyUnion& e) {
            entry["error"] = e.what();
        }
        table.push_back(std::move(entry));
    }
    std::sort(table.begin(), table.end(), [](const json& a, const json& b) {
        const double va = a.contains("value") ? a["value"].get<double>()
                                              : std::numeric_limits<double>::infinity();
        const double vb = b.contains("value") ? b["value"].get<double>()
                                              : std::numeric_limits<double>::infinity();
        return va < vb;
    });

    json j = report_header(cfg, "cost");
    j["L"] = cfg.L;
    j["alpha"] = alpha;
    j["Qc"] = matrix_to_json(qc.mat());
    j["Rc"] = matrix_to_json(rc.mat());
    j["table"] = table;
    if (!table.empty() && table.front().contains("value")) {
        j["best"] = table.front();
    }
    emit(cfg, j.dump(2));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Set-consistency analysis and one-step prediction for linear systems "
                 "from noisy data"};
    app.require_subcommand(1);

    CommonConfig cfg;
    if (const char* env_seed = std::getenv("LTISETS_SEED")) {
        cfg.seed = std::strtoull(env_seed, nullptr, 10);
    }

    auto add_common = [&cfg](CLI::App* sub, bool needs_data = true) {
        auto* opt = sub->add_option("--data", cfg.data_path, "trajectory file (JSON or CSV)");
        if (needs_data) opt->required();
        sub->add_option("--L", cfg.L, "energy amplification bound");
        sub->add_option("--alpha", cfg.alpha, "noise level");
        sub->add_option("--x", cfg.x_csv, "current state (csv; default: last state)");
        sub->add_option("--u", cfg.u_csv, "input vector (csv; default: zero)");
        sub->add_option("--samples", cfg.samples, "completion sample count");
        sub->add_option("--seed", cfg.seed, "sampling seed");
        sub->add_option("--out", cfg.out_path, "output path (default: stdout)");
        sub->add_option("--format", cfg.format, "json|svg|csv")
            ->check(CLI::IsMember({"json", "svg", "csv"}));
        sub->add_option("--rank-tol", cfg.rank_tol, "numerical rank tolerance");
        sub->add_option("--psd-tol", cfg.psd_tol, "PSD test tolerance");
        sub->add_option("--eps-feas", cfg.eps_feas, "relative feasibility tolerance");
        sub->add_option("--eps-obj", cfg.eps_obj, "relative objective tolerance");
    };

    auto* verify_cmd = app.add_subcommand("verify", "data-consistency check");
    add_common(verify_cmd);

    auto* infer_cmd = app.add_subcommand("infer", "minimal-bound inference");
    add_common(infer_cmd);
    std::string mode, grid_csv;
    infer_cmd->add_option("--mode", mode, "alpha|L|curve")->required();
    infer_cmd->add_option("--grid", grid_csv, "L grid for curve mode (csv)");

    auto* predict_cmd = app.add_subcommand("predict", "one-step feasible set");
    add_common(predict_cmd);

    auto* safety_cmd = app.add_subcommand("safety", "containment in a target region");
    add_common(safety_cmd);
    std::vector<std::string> u_list;
    std::string target_center, target_shape;
    double target_radius = 0.0, target_level = 1.0;
    safety_cmd->add_option("--u-candidate", u_list, "candidate input (repeatable, csv)");
    safety_cmd->add_option("--target-center", target_center, "target center (csv)");
    safety_cmd->add_option("--target-radius", target_radius, "target ball radius");
    safety_cmd->add_option("--target-shape", target_shape,
                           "target shape matrix (row-major csv)");
    safety_cmd->add_option("--target-level", target_level, "target level");

    auto* cost_cmd = app.add_subcommand("cost", "worst-case quadratic cost");
    add_common(cost_cmd);
    std::vector<std::string> cost_u_list;
    std::string qc_csv, rc_csv;
    bool refine = false;
    cost_cmd->add_option("--u-candidate", cost_u_list, "candidate input (repeatable, csv)");
    cost_cmd->add_option("--Qc", qc_csv, "state cost matrix (row-major csv)");
    cost_cmd->add_option("--Rc", rc_csv, "input cost matrix (row-major csv)");
    cost_cmd->add_flag("--refine", refine, "membership-guided expansion of the argmax");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(verify_cmd)) return cmd_verify(cfg);
        if (app.got_subcommand(infer_cmd)) return cmd_infer(cfg, mode, grid_csv);
        if (app.got_subcommand(predict_cmd)) return cmd_predict(cfg);
        if (app.got_subcommand(safety_cmd)) {
            return cmd_safety(cfg, u_list, target_center, target_radius, target_shape,
                              target_level);
        }
        if (app.got_subcommand(cost_cmd)) {
            return cmd_cost(cfg, cost_u_list, qc_csv, rc_csv, refine);
        }
    } catch (const UnsupportedSet& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
