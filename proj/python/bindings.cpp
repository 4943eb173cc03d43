#include "puo/app/commands.hpp"
#include "puo/app/report.hpp"
#include "puo/dynamics.hpp"
#include "puo/embedding.hpp"
#include "puo/symmetry.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace puo;

namespace {

py::object to_python(const app::Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

app::RunConfig config_from(const py::dict& kwargs) {
  const std::string text = py::module_::import("json").attr("dumps")(kwargs).cast<std::string>();
  app::RunConfig c = app::from_json(app::Json::parse(text));
  app::validate(c);
  return c;
}

}  // namespace

PYBIND11_MODULE(_puo, m) {
  m.doc() = "Pais-Uhlenbeck oscillator numerics";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "PuoError");
  py::register_exception<app::ConfigError>(m, "ConfigError");

  py::class_<PUParams>(m, "PUParams")
      .def_readonly("omega1", &PUParams::omega1)
      .def_readonly("omega2", &PUParams::omega2)
      .def_readonly("alpha", &PUParams::alpha)
      .def_readonly("beta", &PUParams::beta);
  m.def("make_params", &make_params, py::arg("omega1"), py::arg("omega2"));

  m.def("flow_matrix", &flow_matrix);
  m.def("h1", [](const PUParams& p) { return h1(p).coeffs(); });
  m.def("h2", [](const PUParams& p) { return h2(p).coeffs(); });
  m.def("j1", [](const PUParams& p, bool ostro) {
    return j1(p, ostro ? Chart::ostrogradsky : Chart::jet).matrix();
  }, py::arg("params"), py::arg("ostrogradsky") = false);
  m.def("j2", [](const PUParams& p) { return j2(p).matrix(); });
  m.def("blend_j", [](const PUParams& p, double c1, double c2) { return blend_j(p, c1, c2).tensor.matrix(); });
  m.def("jet_to_ostro", [](const PUParams& p, const Vec4& z) { return jet_to_ostro(p, JetState::from(z)).vec(); });
  m.def("ostro_to_jet", [](const PUParams& p, const Vec4& s) { return ostro_to_jet(p, OstroState::from(s)).vec(); });

  m.def("commutant_dimension", [](const PUParams& p) { return symmetry::commutant_basis(flow_matrix(p)).dimension; });
  m.def("invariant_tensor_dimension", [](const PUParams& p, double lambda, std::uint64_t seed, int samples) {
    const VectorField field = lambda > 0.0 ? interacting_vector_field(p, Potential::quartic(lambda)) : free_vector_field(p);
    return symmetry::invariant_tensor_space(field, symmetry::sample_points(seed, samples)).size();
  }, py::arg("params"), py::arg("lambda_") = 0.0, py::arg("seed") = kDefaultSeed, py::arg("samples") = 12);

  m.def("mode_decompose", [](const PUParams& p, const Vec4& z) {
    const auto a = dynamics::mode_decompose(p, JetState::from(z));
    return py::make_tuple(a.a1, a.a2);
  });
  m.def("mode_energy", [](const PUParams& p, std::complex<double> a1, std::complex<double> a2) {
    const auto e = dynamics::mode_energy(p, {a1, a2});
    return py::make_tuple(e.e1, e.e2, e.total);
  });

  m.def("integrate", [](const PUParams& p, const Vec4& z0, double t_end, double lambda, double tol,
                        double sample_rate) {
    const VectorField field = lambda > 0.0 ? interacting_vector_field(p, Potential::quartic(lambda)) : free_vector_field(p);
    const auto tr = dynamics::integrate(p, field, JetState::from(z0), t_end, {tol, sample_rate, std::nullopt});
    Eigen::MatrixX4d states(static_cast<Eigen::Index>(tr.states.size()), 4);
    for (std::size_t i = 0; i < tr.states.size(); ++i) states.row(static_cast<Eigen::Index>(i)) = tr.states[i].vec().transpose();
    py::dict out;
    out["t"] = Eigen::VectorXd(Eigen::VectorXd::Map(tr.times.data(), static_cast<Eigen::Index>(tr.times.size())));
    out["z"] = states;
    out["H1"] = tr.h1_series;
    out["H2"] = tr.h2_series;
    out["Hint"] = tr.hint_series;
    out["summary"] = to_python(app::trajectory_summary(tr));
    return out;
  }, py::arg("params"), py::arg("z0"), py::arg("t_end"), py::arg("lambda_") = 0.0, py::arg("tol") = 1e-10,
     py::arg("sample_rate") = 10.0);

  m.def("reconcile", [](const std::string& family, const std::string& branch, double a_x, double a_y,
                        double b_x, double b_y, double g, const PUParams& p) {
    const embedding::FreeParameters free{a_x, a_y, b_x, b_y, g};
    return to_python(app::reconciliation_json(embedding::reconcile(
        embedding::family_from_string(family), embedding::branch_from_string(branch), free, p)));
  }, py::arg("family"), py::arg("branch"), py::arg("a_x"), py::arg("a_y") = 0.0, py::arg("b_x") = 0.0,
     py::arg("b_y") = 0.0, py::arg("g") = 0.0, py::arg("params"));

  m.def("verify", [](const py::dict& config) {
    const auto r = app::cmd_verify(config_from(config));
    return py::make_tuple(r.exit_code, to_python(r.report));
  }, py::arg("config") = py::dict());
  m.def("scan", [](const py::dict& config) {
    const auto r = app::cmd_scan(config_from(config));
    return py::make_tuple(r.exit_code, to_python(r.report));
  }, py::arg("config") = py::dict());
}
