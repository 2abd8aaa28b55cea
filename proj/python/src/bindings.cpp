#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "c3bf/scenario_io.hpp"
#include "c3bf/svg_plot.hpp"
#include "c3bf/trajectory_csv.hpp"
#include "c3bf/vehicle_models.hpp"

namespace py = pybind11;
using namespace c3bf;

namespace {

VehicleState state_from(const std::string& model, const Eigen::VectorXd& x)
{
    const ModelKind kind = parse_model_kind(model);
    if (x.size() != state_dimension(kind))
        throw ValidationError(model + " state needs " + std::to_string(state_dimension(kind)) + " components");
    return from_vector(kind, x);
}

// Column-major arrays of the logged trajectory, one row per record.
py::dict trajectory_arrays(const TrajectoryLog& log)
{
    const auto n = static_cast<Eigen::Index>(log.records.size());
    const Eigen::Index n_obs = log.records.empty() ? 0 : static_cast<Eigen::Index>(log.records[0].obstacles.size());
    const Eigen::Index dim = state_dimension(log.model);
    Eigen::VectorXd t(n);
    Eigen::MatrixXd state(n, dim), u_ref(n, 2), u_star(n, 2), h(n, n_obs), psi(n, n_obs), dist(n, n_obs),
        radius(n, n_obs);
    for (Eigen::Index k = 0; k < n; ++k) {
        const StepRecord& rec = log.records[static_cast<std::size_t>(k)];
        t(k) = rec.t;
        state.row(k) = to_vector(rec.state).transpose();
        u_ref.row(k) = rec.u_ref.transpose();
        u_star.row(k) = rec.u_star.transpose();
        for (Eigen::Index i = 0; i < n_obs; ++i) {
            const ObstacleSample& o = rec.obstacles[static_cast<std::size_t>(i)];
            h(k, i) = o.h;
            psi(k, i) = o.psi;
            dist(k, i) = o.dist;
            radius(k, i) = o.r;
        }
    }
    py::dict d;
    d["t"] = t;
    d["state"] = state;
    d["u_ref"] = u_ref;
    d["u_star"] = u_star;
    d["h"] = h;
    d["psi"] = psi;
    d["dist"] = dist;
    d["r"] = radius;
    d["collision"] = log.collision;
    d["summary_json"] = summary_to_json(log).dump();
    std::ostringstream csv;
    write_trajectory_csv(csv, log);
    d["csv"] = csv.str();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Collision-cone control barrier function safety filter";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_ValueError);
    py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init<>())
        .def_readwrite("l", &ModelParams::l)
        .def_readwrite("lf", &ModelParams::lf)
        .def_readwrite("lr", &ModelParams::lr)
        .def_readwrite("w", &ModelParams::w)
        .def_readwrite("beta_max", &ModelParams::beta_max)
        .def_readwrite("v_max", &ModelParams::v_max)
        .def("validate", &ModelParams::validate);

    py::class_<Obstacle>(m, "Obstacle")
        .def(py::init([](const Vec2& center, const Vec2& velocity, double c1, double c2) {
                 Obstacle o{center, velocity, c1, c2};
                 o.validate();
                 return o;
             }),
             py::arg("center"), py::arg("velocity") = Vec2::Zero(), py::arg("c1") = 1.0, py::arg("c2") = 1.0)
        .def_readwrite("center", &Obstacle::center)
        .def_readwrite("velocity", &Obstacle::velocity)
        .def_readwrite("c1", &Obstacle::c1)
        .def_readwrite("c2", &Obstacle::c2);

    py::class_<CbfEvaluation>(m, "CbfEvaluation")
        .def(py::init([](double h, double lfh, const Vec2& lgh) { return CbfEvaluation{h, lfh, lgh, false}; }),
             py::arg("h"), py::arg("lfh"), py::arg("lgh"))
        .def_readonly("h", &CbfEvaluation::h)
        .def_readonly("lfh", &CbfEvaluation::lfh)
        .def_readonly("lgh", &CbfEvaluation::lgh)
        .def_readonly("penetration", &CbfEvaluation::penetration);

    py::class_<FilterConfig>(m, "FilterConfig")
        .def(py::init([](double gamma, double activation_radius) {
                 FilterConfig c;
                 c.gamma = gamma;
                 c.activation_radius = activation_radius;
                 c.validate();
                 return c;
             }),
             py::arg("gamma") = 1.0, py::arg("activation_radius") = kInf)
        .def_readwrite("gamma", &FilterConfig::gamma)
        .def_readwrite("activation_radius", &FilterConfig::activation_radius)
        .def_readwrite("regularization_eps", &FilterConfig::regularization_eps)
        .def("set_input_bounds", [](FilterConfig& c, const Vec2& lo, const Vec2& hi) {
            c.input_bounds = InputBounds{lo, hi};
        });

    py::class_<FilterResult>(m, "FilterResult")
        .def_readonly("u_star", &FilterResult::u_star)
        .def_readonly("u_safe", &FilterResult::u_safe)
        .def_readonly("active_set", &FilterResult::active_set)
        .def_readonly("psi", &FilterResult::psi)
        .def_readonly("degenerate", &FilterResult::degenerate)
        .def_readonly("infeasible", &FilterResult::infeasible)
        .def_readonly("bounds_binding", &FilterResult::bounds_binding);

    m.def("derivative",
          [](const std::string& model, const Eigen::VectorXd& x, const Vec2& u, const ModelParams& p) {
              return derivative(state_from(model, x), u, p);
          },
          py::arg("model"), py::arg("state"), py::arg("u"), py::arg("params") = ModelParams{});
    m.def("integrate_step",
          [](const std::string& model, const Eigen::VectorXd& x, const Vec2& u, const ModelParams& p, double dt) {
              return to_vector(integrate_step(state_from(model, x), u, p, dt));
          },
          py::arg("model"), py::arg("state"), py::arg("u"), py::arg("params"), py::arg("dt"));

    m.def("c3bf_value", &c3bf_value, py::arg("p_rel"), py::arg("v_rel"), py::arg("r"));
    m.def("c3bf_eval",
          [](const std::string& model, const Eigen::VectorXd& x, const Obstacle& o, const ModelParams& p) {
              return c3bf_eval(state_from(model, x), o, p);
          },
          py::arg("model"), py::arg("state"), py::arg("obstacle"), py::arg("params") = ModelParams{});
    m.def("evaluate_cbf",
          [](const std::string& kind, const std::string& model, const Eigen::VectorXd& x, const Obstacle& o,
             const ModelParams& p, double gamma1) {
              return evaluate_cbf(parse_cbf_kind(kind), state_from(model, x), o, p, gamma1);
          },
          py::arg("kind"), py::arg("model"), py::arg("state"), py::arg("obstacle"),
          py::arg("params") = ModelParams{}, py::arg("gamma1") = 1.0);

    m.def("filter_single", &filter_single, py::arg("u_ref"), py::arg("evaluation"), py::arg("config"));
    m.def("filter_qp",
          [](const Vec2& u_ref, const std::vector<CbfEvaluation>& evals, const FilterConfig& cfg) {
              return filter_qp(u_ref, evals, cfg);
          },
          py::arg("u_ref"), py::arg("evaluations"), py::arg("config"));

    m.def("validate_scenario", [](const std::string& text) { parse_scenario(text); }, py::arg("text"),
          "Raises ValidationError when the scenario document is invalid.");
    m.def("normalize_scenario", [](const std::string& text) { return scenario_to_json(parse_scenario(text)).dump(); },
          py::arg("text"), "Parses and re-serializes a scenario document.");
    m.def("simulate",
          [](const std::string& text, std::optional<double> dt, std::optional<double> duration,
             std::optional<double> gamma) {
              Scenario sc = parse_scenario(text);
              if (dt) sc.dt = *dt;
              if (duration) sc.duration = *duration;
              if (gamma) sc.filter.gamma = *gamma;
              sc.validate();
              TrajectoryLog log;
              {
                  py::gil_scoped_release release;
                  log = run_scenario(sc);
              }
              return trajectory_arrays(log);
          },
          py::arg("text"), py::arg("dt") = py::none(), py::arg("duration") = py::none(),
          py::arg("gamma") = py::none());
    m.def("render_svg",
          [](const std::string& csv, const std::string& mode) {
              std::istringstream in(csv);
              return render_svg(read_trajectory_csv(in), parse_plot_mode(mode));
          },
          py::arg("csv"), py::arg("mode") = "path");
}
