#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cylint/experiment.hpp"
#include "cylint/integrator.hpp"

namespace py = pybind11;
using namespace cylint;

namespace {

LevyModel model_from_json_str(const std::string& model_block, Eigen::Index d_u) {
  json config = {{"dims", {{"d_U", d_u}, {"d_V", 1}}},
                 {"model", json::parse(model_block)}};
  return model_from_config(config);
}

Matrix radonify_samples(const LevyModel& model, const Matrix& phi, double dt,
                        int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("radonify_samples: n must be >= 1");
  Matrix out(n, phi.rows());
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, 7, 0, static_cast<std::uint64_t>(i)));
    out.row(i) = radonify_increment(model, phi, dt, rng).transpose();
  }
  return out;
}

double prokhorov_from_arrays(const Matrix& atoms_mu,
                             const std::vector<double>& weights_mu,
                             const Matrix& atoms_nu,
                             const std::vector<double>& weights_nu) {
  auto build = [](const Matrix& atoms, const std::vector<double>& weights) {
    if (static_cast<std::size_t>(atoms.rows()) != weights.size())
      throw std::invalid_argument("prokhorov: atoms/weights length mismatch");
    EmpiricalMeasure m;
    for (Eigen::Index i = 0; i < atoms.rows(); ++i) {
      m.atoms.push_back(atoms.row(i).transpose());
      m.weights.push_back(weights[static_cast<std::size_t>(i)]);
    }
    return m;
  };
  return prokhorov_distance(build(atoms_mu, weights_mu),
                            build(atoms_nu, weights_nu));
}

std::pair<double, double> p_metric_from_arrays(const Matrix& x,
                                               const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw std::invalid_argument("p_metric: sample shape mismatch");
  std::vector<Vector> xs, ys;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    xs.push_back(x.row(i).transpose());
    ys.push_back(y.row(i).transpose());
  }
  return p_metric(xs, ys);
}

py::list validate_config_str(const std::string& config) {
  py::list out;
  for (const FieldError& e : validate_config(json::parse(config)))
    out.append(py::make_tuple(e.path, e.message));
  return out;
}

py::tuple run_experiment_str(const std::string& config,
                             const std::string& out_dir, int threads,
                             const std::string& fixture_dir) {
  RunOutcome res =
      run_experiment(json::parse(config), out_dir, threads, fixture_dir);
  return py::make_tuple(res.all_passed, res.report.dump(2));
}

py::dict refine_exp_decay_py(const std::string& model_block, Eigen::Index d_u,
                             const Matrix& phi, double rate,
                             const std::vector<int>& levels, double horizon,
                             double t, int replicas, std::uint64_t seed,
                             int threads) {
  LevyModel model = model_from_json_str(model_block, d_u);
  RefinementReport rep = refine_and_integrate(
      model, exp_decay_rule(phi, rate), levels, horizon, t, replicas, seed,
      threads);
  py::dict out;
  out["levels"] = rep.levels;
  out["pairwise_p"] = rep.pairwise_p;
  out["pairwise_se"] = rep.pairwise_se;
  out["final_p"] = rep.final_p;
  out["final_se"] = rep.final_se;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Truncated-basis simulation engine for stochastic integrals "
            "driven by cylindrical Levy noise";

  py::class_<LevyModel>(m, "LevyModel")
      .def_property_readonly("dim", &LevyModel::dim)
      .def_property_readonly("coordinate_representable",
                             &LevyModel::coordinate_representable)
      .def("symbol", &LevyModel::symbol, py::arg("u"),
           "Levy symbol S(u) of the cylindrical noise");

  m.def("model_from_json", &model_from_json_str, py::arg("model_block"),
        py::arg("d_u"),
        "Build a noise model from the JSON model block used in configs");
  m.def("increment_cf", &increment_cf, py::arg("model"), py::arg("phi"),
        py::arg("dt"), py::arg("v"),
        "Exact characteristic function of <phi(L(t+dt)-L(t)), v>");
  m.def("radonify_samples", &radonify_samples, py::arg("model"),
        py::arg("phi"), py::arg("dt"), py::arg("n"), py::arg("seed"),
        "n exact draws of phi(L(t+dt)-L(t)); rows are samples");
  m.def("gauss_dom_constant", &gauss_dom_constant,
        "Universal domination constant 1 / E[min(1, xi^2)]");
  m.def("p_metric", &p_metric_from_arrays, py::arg("x"), py::arg("y"),
        "Convergence-in-probability metric E[min(1, ||x-y||^2)] with its "
        "standard error; rows are coupled samples");
  m.def("prokhorov_distance", &prokhorov_from_arrays, py::arg("atoms_mu"),
        py::arg("weights_mu"), py::arg("atoms_nu"), py::arg("weights_nu"),
        "Prokhorov distance between two discrete probability measures");
  m.def("refine_exp_decay", &refine_exp_decay_py, py::arg("model_block"),
        py::arg("d_u"), py::arg("phi"), py::arg("rate"), py::arg("levels"),
        py::arg("horizon"), py::arg("t"), py::arg("replicas"), py::arg("seed"),
        py::arg("threads") = 1,
        "Coupled partition-refinement study for the rule exp(-rate*t)*phi");
  m.def("validate_config", &validate_config_str, py::arg("config_json"),
        "Full schema check; returns a list of (field_path, message) errors");
  m.def("run_experiment", &run_experiment_str, py::arg("config_json"),
        py::arg("out_dir"), py::arg("threads") = 1,
        py::arg("fixture_dir") = "fixtures",
        "Execute one experiment config; returns (all_passed, report_json)");
}
