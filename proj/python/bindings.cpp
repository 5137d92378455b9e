#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ltisets/inference.hpp"
#include "ltisets/interp.hpp"
#include "ltisets/matcore.hpp"
#include "ltisets/predict.hpp"
#include "ltisets/sysio.hpp"

namespace py = pybind11;
using namespace ltisets;

namespace {

matcore::SymMatrix as_sym(const Matrix& m) { return matcore::SymMatrix(m); }

inference::PriorBounds make_bounds(double L, double alpha, std::optional<Matrix> P) {
    if (P) return inference::PriorBounds(L, alpha, as_sym(*P));
    return inference::PriorBounds(L, alpha);
}

py::dict set_to_dict(const predict::NextStateSet& set) {
    py::dict d;
    switch (set.tag) {
        case predict::NextStateTag::Empty: d["tag"] = "empty"; break;
        case predict::NextStateTag::ExactEllipsoid: d["tag"] = "exact_ellipsoid"; break;
        case predict::NextStateTag::InnerUnion: d["tag"] = "inner_union"; break;
        case predict::NextStateTag::Degenerate: d["tag"] = "degenerate"; break;
    }
    d["offset"] = set.offset;
    py::list members;
    for (const auto& e : set.members) {
        py::dict m;
        m["shape"] = e.shape.mat();
        m["center"] = e.center;
        m["level"] = e.level;
        members.append(std::move(m));
    }
    d["members"] = std::move(members);
    py::list skipped;
    for (const auto& s : set.skipped) {
        py::dict sk;
        sk["index"] = s.index;
        sk["reason"] = s.reason;
        skipped.append(std::move(sk));
    }
    d["skipped"] = std::move(skipped);
    return d;
}

predict::PredictionInstance make_instance(const Matrix& X, const Matrix& Xplus,
                                          const Matrix& U, const Matrix& B,
                                          const Vector& x, const Vector& u, double L,
                                          double alpha) {
    return predict::PredictionInstance(inference::DataBatch(X, Xplus, U, B), x, u,
                                       inference::PriorBounds(L, alpha));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Set-consistency analysis and one-step prediction for linear systems "
              "from noisy data";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<InvalidMatrix>(m, "InvalidMatrix", PyExc_ValueError);
    py::register_exception<NotPSD>(m, "NotPSDError", PyExc_ValueError);
    py::register_exception<Infeasible>(m, "InfeasibleError", PyExc_RuntimeError);
    py::register_exception<EmptyUnion>(m, "EmptyUnionError", PyExc_RuntimeError);
    py::register_exception<UnsupportedSet>(m, "UnsupportedSetError", PyExc_RuntimeError);

    // dense symmetric-matrix utilities
    m.def(
        "psd_check",
        [](const Matrix& mat, double tol) { return matcore::psd_check(as_sym(mat), tol); },
        py::arg("m"), py::arg("tol") = matcore::kDefaultPsdTol);
    m.def(
        "pinv", [](const Matrix& mat, double tol) { return matcore::pinv(mat, tol); },
        py::arg("m"), py::arg("rank_tol") = matcore::kDefaultRankTol);
    m.def(
        "num_rank",
        [](const Matrix& mat, double tol) { return matcore::num_rank(mat, tol); },
        py::arg("m"), py::arg("rank_tol") = matcore::kDefaultRankTol);
    m.def(
        "sqrt_psd", [](const Matrix& mat) { return matcore::sqrt_psd(as_sym(mat)).mat(); },
        py::arg("m"));

    // interpolation
    m.def(
        "interp_exists",
        [](const Matrix& Z, const Matrix& Y, const Matrix& G) {
            return interp::interp_exists(interp::InterpInstance(Z, Y, as_sym(G)));
        },
        py::arg("Z"), py::arg("Y"), py::arg("G"));
    m.def(
        "feasible_output_set",
        [](const Matrix& Z, const Matrix& Y, const Matrix& G, const Vector& z) {
            const auto fs =
                interp::feasible_output_set(interp::InterpInstance(Z, Y, as_sym(G)), z);
            py::dict d;
            switch (fs.tag) {
                case interp::FeasibleSetTag::Empty: d["tag"] = "empty"; break;
                case interp::FeasibleSetTag::Ellipsoid: d["tag"] = "ellipsoid"; break;
                case interp::FeasibleSetTag::Degenerate: d["tag"] = "degenerate"; break;
            }
            d["rank_D"] = fs.rank_D;
            d["rank_Z"] = fs.rank_Z;
            if (fs.ellipsoid) {
                d["shape"] = fs.ellipsoid->shape.mat();
                d["center"] = fs.ellipsoid->center;
                d["level"] = fs.ellipsoid->level;
            }
            return d;
        },
        py::arg("Z"), py::arg("Y"), py::arg("G"), py::arg("z"));

    // data-consistency and inference
    m.def(
        "verify",
        [](const Matrix& X, const Matrix& Xplus, const Matrix& U, const Matrix& B,
           double L, double alpha, std::optional<Matrix> P) {
            const auto report = inference::verify(inference::DataBatch(X, Xplus, U, B),
                                                  make_bounds(L, alpha, std::move(P)));
            py::dict d;
            d["consistent"] = report.consistent;
            d["margin"] = report.margin;
            d["conservative"] = report.conservative;
            d["effective_alpha"] = report.effective_alpha;
            if (report.certificate) d["gamma"] = report.certificate->offdiag[0][0];
            return d;
        },
        py::arg("X"), py::arg("Xplus"), py::arg("U"), py::arg("B"), py::arg("L"),
        py::arg("alpha"), py::arg("P") = std::nullopt);
    m.def(
        "min_noise",
        [](const Matrix& X, const Matrix& Xplus, const Matrix& U, const Matrix& B,
           double L) {
            const auto res = inference::min_noise(inference::DataBatch(X, Xplus, U, B), L);
            return py::make_tuple(res.value, res.cross_check_value);
        },
        py::arg("X"), py::arg("Xplus"), py::arg("U"), py::arg("B"), py::arg("L"));
    m.def(
        "min_gain",
        [](const Matrix& X, const Matrix& Xplus, const Matrix& U, const Matrix& B,
           double alpha) {
            const auto res =
                inference::min_gain(inference::DataBatch(X, Xplus, U, B), alpha);
            return py::make_tuple(res.value, res.cross_check_value);
        },
        py::arg("X"), py::arg("Xplus"), py::arg("U"), py::arg("B"), py::arg("alpha"));
    m.def(
        "tradeoff_curve",
        [](const Matrix& X, const Matrix& Xplus, const Matrix& U, const Matrix& B,
           const std::vector<double>& grid) {
            const auto curve =
                inference::tradeoff_curve(inference::DataBatch(X, Xplus, U, B), grid);
            py::list out;
            for (const auto& pt : curve) {
                py::dict d;
                d["L"] = pt.L;
                if (pt.alpha_star) d["alpha_star"] = *pt.alpha_star;
                if (!pt.error.empty()) d["error"] = pt.error;
                out.append(std::move(d));
            }
            return out;
        },
        py::arg("X"), py::arg("Xplus"), py::arg("U"), py::arg("B"), py::arg("grid"));

    // one-step prediction
    m.def(
        "membership",
        [](const Matrix& X, const Matrix& Xplus, const Matrix& U, const Matrix& B,
           const Vector& x, const Vector& u, double L, double alpha,
           const Vector& x_plus) {
            return predict::membership(make_instance(X, Xplus, U, B, x, u, L, alpha),
                                       x_plus);
        },
        py::arg("X"), py::arg("Xplus"), py::arg("U"), py::arg("B"), py::arg("x"),
        py::arg("u"), py::arg("L"), py::arg("alpha"), py::arg("x_plus"));
    m.def(
        "reachable_noisefree",
        [](const Matrix& X, const Matrix& Xplus, const Matrix& U, const Matrix& B,
           const Vector& x, const Vector& u, double L) {
            return set_to_dict(predict::reachable_noisefree(
                make_instance(X, Xplus, U, B, x, u, L, 0.0)));
        },
        py::arg("X"), py::arg("Xplus"), py::arg("U"), py::arg("B"), py::arg("x"),
        py::arg("u"), py::arg("L"));
    m.def(
        "reachable_union",
        [](const Matrix& X, const Matrix& Xplus, const Matrix& U, const Matrix& B,
           const Vector& x, const Vector& u, double L, double alpha, int n_samples,
           std::uint64_t seed) {
            return set_to_dict(predict::reachable_union(
                make_instance(X, Xplus, U, B, x, u, L, alpha), n_samples, seed));
        },
        py::arg("X"), py::arg("Xplus"), py::arg("U"), py::arg("B"), py::arg("x"),
        py::arg("u"), py::arg("L"), py::arg("alpha"), py::arg("n_samples") = 32,
        py::arg("seed") = 0);
    m.def(
        "trs_max",
        [](const Matrix& shape, const Vector& center, double level, const Matrix& H,
           const Vector& g, double c0) {
            const auto res = predict::trs_max(
                interp::Ellipsoid(as_sym(shape), center, level), as_sym(H), g, c0);
            return py::make_tuple(res.value, res.argmax);
        },
        py::arg("shape"), py::arg("center"), py::arg("level"), py::arg("H"), py::arg("g"),
        py::arg("c0") = 0.0);
    m.def(
        "worst_case_cost",
        [](const Matrix& X, const Matrix& Xplus, const Matrix& U, const Matrix& B,
           const Vector& x, const Vector& u, double L, double alpha, const Matrix& Qc,
           const Matrix& Rc, int n_samples, std::uint64_t seed) {
            predict::CostOptions opts;
            opts.n_samples = n_samples;
            opts.seed = seed;
            const auto res = predict::worst_case_cost(
                make_instance(X, Xplus, U, B, x, u, L, alpha), as_sym(Qc), as_sym(Rc),
                opts);
            return py::make_tuple(res.value, res.argmax, res.lower_bound);
        },
        py::arg("X"), py::arg("Xplus"), py::arg("U"), py::arg("B"), py::arg("x"),
        py::arg("u"), py::arg("L"), py::arg("alpha"), py::arg("Qc"), py::arg("Rc"),
        py::arg("n_samples") = 32, py::arg("seed") = 0);
    m.def(
        "safety_check",
        [](const Matrix& X, const Matrix& Xplus, const Matrix& U, const Matrix& B,
           const Vector& x, const Vector& u, double L, double alpha,
           const Matrix& target_shape, const Vector& target_center, double target_level,
           int n_samples, std::uint64_t seed) {
            const auto inst = make_instance(X, Xplus, U, B, x, u, L, alpha);
            const auto set = alpha == 0.0
                                 ? predict::reachable_noisefree(inst)
                                 : predict::reachable_union(inst, n_samples, seed);
            return predict::safety_check(
                set, interp::Ellipsoid(as_sym(target_shape), target_center, target_level));
        },
        py::arg("X"), py::arg("Xplus"), py::arg("U"), py::arg("B"), py::arg("x"),
        py::arg("u"), py::arg("L"), py::arg("alpha"), py::arg("target_shape"),
        py::arg("target_center"), py::arg("target_level"), py::arg("n_samples") = 32,
        py::arg("seed") = 0);

    // simulation and data assembly
    m.def(
        "simulate",
        [](const Matrix& A, const Matrix& B, const Vector& x0,
           const std::vector<Vector>& inputs, const std::string& noise_kind, double alpha,
           std::uint64_t seed) {
            sysio::NoiseSpec spec;
            if (noise_kind == "none") {
                spec = sysio::NoiseSpec::none();
            } else if (noise_kind == "per_step_bounded") {
                spec = sysio::NoiseSpec::per_step_bounded(alpha, seed);
            } else if (noise_kind == "energy_budget") {
                spec = sysio::NoiseSpec::energy_budget(alpha, seed);
            } else {
                throw InvalidMatrix("simulate: unknown noise kind '" + noise_kind + "'");
            }
            const auto sim = sysio::simulate(A, B, x0, inputs, spec);
            py::list states;
            for (const auto& s : sim.trajectory.states) states.append(s);
            return py::make_tuple(states, sim.noise);
        },
        py::arg("A"), py::arg("B"), py::arg("x0"), py::arg("inputs"),
        py::arg("noise_kind") = "none", py::arg("alpha") = 0.0, py::arg("seed") = 0);
    m.def(
        "build_batch",
        [](const std::vector<Vector>& states, const std::vector<Vector>& inputs,
           const Matrix& B) {
            const auto batch = sysio::build_batch(sysio::Trajectory(states, inputs), B);
            return py::make_tuple(batch.X, batch.Xplus, batch.U, batch.B);
        },
        py::arg("states"), py::arg("inputs"), py::arg("B"));
    m.def(
        "load_trajectory",
        [](const std::string& path) {
            const auto file = sysio::load_trajectory(path);
            const auto batch = sysio::build_batch(file.trajectory, file.B);
            py::dict d;
            d["X"] = batch.X;
            d["Xplus"] = batch.Xplus;
            d["U"] = batch.U;
            d["B"] = batch.B;
            if (file.P) d["P"] = file.P->mat();
            return d;
        },
        py::arg("path"));
    m.def(
        "apply_transform",
        [](const Matrix& X, const Matrix& Xplus, const Matrix& U, const Matrix& B,
           double L, double alpha, const Matrix& P) {
            const auto [mapped, bounds] =
                sysio::apply_transform(inference::DataBatch(X, Xplus, U, B),
                                       inference::PriorBounds(L, alpha), as_sym(P));
            py::dict d;
            d["X"] = mapped.X;
            d["Xplus"] = mapped.Xplus;
            d["U"] = mapped.U;
            d["B"] = mapped.B;
            d["alpha"] = bounds.alpha;
            return d;
        },
        py::arg("X"), py::arg("Xplus"), py::arg("U"), py::arg("B"), py::arg("L"),
        py::arg("alpha"), py::arg("P"));
}
