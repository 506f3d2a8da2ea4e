#include "hartree_lab/ensemble.hpp"
#include "hartree_lab/finite_n.hpp"
#include "hartree_lab/functionals.hpp"
#include "hartree_lab/records.hpp"
#include "hartree_lab/run.hpp"
#include "hartree_lab/solver.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hartree_lab;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  return py::array_t<double>(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())},
                             v.data());
}

SolverOptions solver_options(double mixing, int max_iterations, double tolerance,
                             const std::string &initial_guess, std::uint64_t seed) {
  SolverOptions o;
  o.mixing = mixing;
  o.max_iterations = max_iterations;
  o.residual_tolerance = tolerance;
  o.initial_guess = parse_initial_guess(initial_guess);
  o.seed = seed;
  return o;
}

PointCloud cloud_from(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2 || a.shape(1) != 3)
    throw LabError(ErrorKind::invalid_argument, "point arrays must have shape (n, 3)");
  PointCloud c;
  c.coords.assign(a.data(), a.data() + a.size());
  return c;
}

py::array_t<double> cloud_array(const PointCloud &c) {
  return py::array_t<double>(std::vector<py::ssize_t>{static_cast<py::ssize_t>(c.size()), 3},
                             c.coords.data());
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of hartree_lab";

  py::register_exception<LabError>(m, "LabError", PyExc_RuntimeError);

  py::class_<HartreeResult>(m, "HartreeResult")
      .def_readonly("lambda_", &HartreeResult::lambda)
      .def_readonly("energy", &HartreeResult::energy)
      .def_readonly("chemical_potential", &HartreeResult::chemical_potential)
      .def_readonly("iterations", &HartreeResult::iterations)
      .def_readonly("residual", &HartreeResult::residual)
      .def_readonly("converged", &HartreeResult::converged)
      .def_readonly("bound", &HartreeResult::bound)
      .def_property_readonly("status",
                             [](const HartreeResult &r) { return std::string(to_string(r.status)); })
      .def_property_readonly("kinetic", [](const HartreeResult &r) { return r.breakdown.kinetic; })
      .def_property_readonly("attraction",
                             [](const HartreeResult &r) { return r.breakdown.attraction; })
      .def_property_readonly("repulsion",
                             [](const HartreeResult &r) { return r.breakdown.repulsion; })
      .def_property_readonly("virial_ratio", &HartreeResult::virial_ratio)
      .def_property_readonly("fisher_ratio", &HartreeResult::fisher_ratio)
      .def_property_readonly("radii",
                             [](const HartreeResult &r) { return to_array(r.orbital.grid()->nodes()); })
      .def_property_readonly("u", [](const HartreeResult &r) { return to_array(r.orbital.values()); })
      .def_property_readonly("density", [](const HartreeResult &r) {
        return to_array(RadialDensity::of(r.orbital).values());
      });

  m.def(
      "minimize_hartree",
      [](double lambda, double repulsion, double mixing, int max_iterations, double tolerance,
         const std::string &initial_guess, std::uint64_t seed) {
        return minimize_hartree_adaptive(
            lambda, solver_options(mixing, max_iterations, tolerance, initial_guess, seed),
            repulsion);
      },
      py::arg("lambda_"), py::arg("repulsion") = 1.0, py::arg("mixing") = 0.4,
      py::arg("max_iterations") = 500, py::arg("tolerance") = 1e-10,
      py::arg("initial_guess") = "hydrogenic", py::arg("seed") = 0,
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "epsilon_sweep",
      [](const std::vector<double> &lambdas) {
        const auto curve = epsilon_sweep(lambdas, nullptr, {}, {.allow_subcritical = true});
        std::vector<std::tuple<double, double, std::string>> out;
        for (const auto &p : curve.points)
          out.emplace_back(p.lambda, p.energy, std::string(to_string(p.status)));
        return out;
      },
      py::arg("lambdas"), py::call_guard<py::gil_scoped_release>());

  m.def(
      "critical_lambda",
      [](double lo, double hi, double width) {
        const auto est = critical_lambda(threshold_grid(), {}, {lo, hi}, width);
        return std::pair(est.estimate, est.half_width);
      },
      py::arg("lo") = 0.5, py::arg("hi") = 1.0, py::arg("width") = 1e-3,
      py::call_guard<py::gil_scoped_release>());

  m.def("n1_exact", &n1_exact, py::arg("lambda_"));
  m.def(
      "two_body_energy",
      [](double lambda, double kappa, int exponents, double lo, double hi,
         const std::string &family) {
        const auto basis = TwoBodyBasis::geometric(parse_two_body_family(family), exponents, lo,
                                                   hi, lambda);
        return minimize_two_body(basis, {lambda, kappa}).energy;
      },
      py::arg("lambda_") = 1.0, py::arg("kappa") = 0.5, py::arg("exponents") = 6,
      py::arg("lo") = 0.4, py::arg("hi") = 4.0,
      py::arg("family") = "product-exponential-plus-r12",
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "sample",
      [](double lambda, std::size_t n, std::uint64_t seed) {
        PointCloud cloud;
        {
          py::gil_scoped_release release;
          const auto res = minimize_hartree_adaptive(lambda, {});
          if (res.status != SolveStatus::converged)
            throw LabError(ErrorKind::not_bound, "no bound minimizer at this coupling");
          cloud = sample_density(RadialDensity::of(res.orbital), n, seed, "hartree");
        }
        return cloud_array(cloud);
      },
      py::arg("lambda_"), py::arg("n"), py::arg("seed") = 0);

  m.def(
      "kr_distance",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> a,
         py::array_t<double, py::array::c_style | py::array::forcecast> b, int directions,
         std::uint64_t seed) {
        return kr_distance(cloud_from(a), cloud_from(b), directions, seed);
      },
      py::arg("a"), py::arg("b"), py::arg("directions") = default_directions,
      py::arg("seed") = 0);

  m.def(
      "run",
      [](const std::vector<std::string> &args) {
        const auto parsed = parse_config(args);
        if (!parsed.config) {
          std::string msg;
          for (const auto &e : parsed.errors)
            msg += (msg.empty() ? "" : "; ") + e;
          return std::tuple(static_cast<int>(ExitCode::validation_error), std::string(), msg);
        }
        RunOutcome out;
        {
          py::gil_scoped_release release;
          out = run(*parsed.config);
        }
        return std::tuple(static_cast<int>(out.code), render(out.records, *parsed.config),
                          out.message);
      },
      py::arg("args"));

  m.def("emit_plotdata", [](const std::string &jsonl, const std::string &kind) {
    return emit_plotdata(parse_lines(jsonl), kind);
  });

  m.attr("schema_version") = schema_version;
}
