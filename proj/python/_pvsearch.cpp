#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pvsearch/baselines.hpp"
#include "pvsearch/harness.hpp"
#include "pvsearch/polytope.hpp"
#include "pvsearch/verify.hpp"

namespace py = pybind11;
using namespace pvs;

namespace {

std::string csv_text(const RunRecord& r) {
  std::ostringstream os;
  write_csv(r, os);
  return os.str();
}

RegretModel model_of(const std::string& s) {
  if (s == "d_log") return RegretModel::d_log;
  if (s == "d2_log") return RegretModel::d2_log;
  throw InputError("model must be d_log or d2_log");
}

}  // namespace

PYBIND11_MODULE(_pvsearch, m) {
  m.doc() = "Projected-volume binary search: geometry kernel and regret harness";

  py::class_<Polytope>(m, "Polytope")
      .def(py::init<Mat, Vec>(), py::arg("A"), py::arg("b"))
      .def_static("box", &Polytope::box)
      .def_static("from_json", [](const std::string& s) { return Polytope::from_json(nlohmann::json::parse(s)); })
      .def("to_json", [](const Polytope& P) { return P.to_json().dump(); })
      .def_property_readonly("dim", &Polytope::dim)
      .def_property_readonly("A", &Polytope::A)
      .def_property_readonly("b", &Polytope::b)
      .def("contains", &Polytope::contains, py::arg("x"), py::arg("tol") = 1e-9);

  m.def("width", &width, py::arg("P"), py::arg("u"));
  m.def("chebyshev_center", [](const Polytope& P) {
    const Ball b = chebyshev_center(P);
    return py::make_tuple(b.center, b.radius);
  });
  m.def("ellipsoid_volume_ratio", &ellipsoid_volume_ratio);
  m.def("regret_bound", &regret_bound);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("d", &ExperimentConfig::d)
      .def_readwrite("epsilon", &ExperimentConfig::epsilon)
      .def_readwrite("learner", &ExperimentConfig::learner)
      .def_readwrite("adversary", &ExperimentConfig::adversary)
      .def_readwrite("max_rounds", &ExperimentConfig::max_rounds)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("replicas", &ExperimentConfig::replicas)
      .def_readwrite("phi_estimate", &ExperimentConfig::phi_estimate)
      .def_readwrite("confirmation_rounds", &ExperimentConfig::confirmation_rounds)
      .def_property_readonly("delta", &ExperimentConfig::delta)
      .def("set", [](ExperimentConfig& c, const std::string& k, const std::string& v) { apply_setting(c, k, v); })
      .def("validate", &ExperimentConfig::validate);

  py::class_<RunRecord>(m, "RunRecord")
      .def_property_readonly("total_regret", [](const RunRecord& r) { return r.summary.total_regret; })
      .def_property_readonly("rounds", [](const RunRecord& r) { return r.summary.rounds; })
      .def_property_readonly("terminated_reason", [](const RunRecord& r) { return r.summary.terminated_reason; })
      .def_property_readonly("soundness_violations",
                             [](const RunRecord& r) { return r.summary.soundness_violations; })
      .def_property_readonly("theta", [](const RunRecord& r) { return r.summary.theta; })
      .def_property_readonly("mistakes",
                             [](const RunRecord& r) {
                               std::vector<bool> out;
                               for (const auto& row : r.rows) out.push_back(row.mistake);
                               return out;
                             })
      .def("csv", &csv_text)
      .def("summary_json", [](const RunRecord& r) { return summary_json(r).dump(2); });

  m.def("run_experiment", py::overload_cast<const ExperimentConfig&>(&run_experiment),
        py::call_guard<py::gil_scoped_release>());

  m.def(
      "fit_regret_constant",
      [](const std::vector<std::tuple<int, double, double>>& pts, const std::string& model) {
        std::vector<RegretPoint> p;
        for (const auto& [d, e, r] : pts) p.push_back({d, e, r});
        const FitResult f = fit_regret_constant(p, model_of(model));
        py::dict out;
        out["C"] = f.C;
        out["residual"] = f.residual;
        out["relative_residual"] = f.relative_residual;
        out["poor_fit"] = f.poor_fit;
        out["n"] = f.n;
        return out;
      },
      py::arg("points"), py::arg("model") = "d_log");

  m.def(
      "verify",
      [](const std::vector<int>& ids) {
        py::gil_scoped_release nogil;
        std::vector<std::tuple<int, std::string, bool, std::string>> out;
        for (const auto& r : pvs::verify(VerifyOptions{}, ids)) out.emplace_back(r.id, r.name, r.pass, r.detail);
        return out;
      },
      py::arg("ids") = std::vector<int>{1, 2, 3, 4, 5, 6});
}
