#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smp/adjoint.hpp"
#include "smp/config.hpp"
#include "smp/errors.hpp"
#include "smp/dynamics.hpp"
#include "smp/maximum_principle.hpp"
#include "smp/noise.hpp"
#include "smp/optimizer.hpp"

namespace py = pybind11;
using namespace smp;

PYBIND11_MODULE(_core, m) {
  m.doc() = "boundary control of parabolic systems with dynamical boundary conditions";

  py::register_exception<Error>(m, "SmpError");

  py::class_<ControlField>(m, "ControlField")
      .def(py::init(&ControlField::zeros), py::arg("steps"), py::arg("bnodes"), py::arg("m"))
      .def_readonly("steps", &ControlField::steps)
      .def_readonly("bnodes", &ControlField::bnodes)
      .def_readonly("m", &ControlField::m)
      .def_property(
          "data", [](const ControlField& u) { return u.data; },
          [](ControlField& u, const RowMat& d) {
            if (d.rows() != u.steps || d.cols() != u.bnodes * u.m)
              throw Error("data must be steps x (bnodes*m)");
            u.data = d;
          })
      .def("fingerprint", &ControlField::fingerprint);

  py::class_<StateTrajectory>(m, "StateTrajectory")
      .def_readonly("times", &StateTrajectory::times)
      .def_readonly("states", &StateTrajectory::states)
      .def_readonly("path_id", &StateTrajectory::path_id)
      .def("steps", &StateTrajectory::steps)
      .def("dt", &StateTrajectory::dt);

  py::class_<AdjointTrajectory>(m, "AdjointTrajectory")
      .def_readonly("times", &AdjointTrajectory::times)
      .def_readonly("P", &AdjointTrajectory::P)
      .def_readonly("q_loadings", &AdjointTrajectory::q_loadings)
      .def("steps", &AdjointTrajectory::steps);

  py::class_<Problem>(m, "Problem")
      .def_readonly("T", &Problem::T)
      .def_readonly("steps", &Problem::steps)
      .def_readonly("noise_on", &Problem::noise_on)
      .def_readonly("master_seed", &Problem::master_seed)
      .def("dt", &Problem::dt)
      .def("n_bnodes", &Problem::n_bnodes)
      .def("n_nodes", [](const Problem& p) { return p.mesh.n_nodes(); })
      .def("control_dim", [](const Problem& p) { return p.coeffs.control_dim; })
      .def("zero_control", &Problem::zero_control)
      .def("initial_state", [](const Problem& p) { return p.y0; });

  py::class_<CostEstimate>(m, "CostEstimate")
      .def_readonly("value", &CostEstimate::value)
      .def_readonly("half_width", &CostEstimate::half_width)
      .def_readonly("n_paths", &CostEstimate::n_paths);

  py::class_<GradientEstimate>(m, "GradientEstimate")
      .def_readonly("mean", &GradientEstimate::mean)
      .def_readonly("std_error", &GradientEstimate::std_error)
      .def_readonly("n_paths", &GradientEstimate::n_paths);

  py::class_<ResidualWitness>(m, "ResidualWitness")
      .def_readonly("step", &ResidualWitness::step)
      .def_readonly("bnode", &ResidualWitness::bnode)
      .def_readonly("value", &ResidualWitness::value);

  py::class_<ResidualResult>(m, "ResidualResult")
      .def_readonly("residual", &ResidualResult::residual)
      .def_readonly("witness", &ResidualResult::witness);

  py::class_<SufficiencyResult>(m, "SufficiencyResult")
      .def_property_readonly("verdict",
                             [](const SufficiencyResult& s) { return verdict_name(s.verdict); })
      .def_readonly("sigma", &SufficiencyResult::sigma)
      .def_readonly("hypotheses", &SufficiencyResult::hypotheses)
      .def_readonly("min_sigma_pbar", &SufficiencyResult::min_sigma_pbar);

  py::class_<OptimalityReport>(m, "OptimalityReport")
      .def_readonly("residual", &OptimalityReport::residual)
      .def_readonly("residual_step", &OptimalityReport::residual_step)
      .def_readonly("witness", &OptimalityReport::witness)
      .def_readonly("sufficiency", &OptimalityReport::sufficiency)
      .def_readonly("gradient_max_abs", &OptimalityReport::gradient_max_abs)
      .def_readonly("gradient", &OptimalityReport::gradient);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("iteration", &IterationRecord::iteration)
      .def_readonly("cost", &IterationRecord::cost)
      .def_readonly("half_width", &IterationRecord::half_width)
      .def_readonly("residual", &IterationRecord::residual)
      .def_readonly("step", &IterationRecord::step);

  py::class_<RunHistory>(m, "RunHistory")
      .def_readonly("rows", &RunHistory::rows)
      .def_readonly("status", &RunHistory::status);

  py::class_<OptimizerOptions>(m, "OptimizerOptions")
      .def(py::init<>())
      .def_readwrite("n_paths", &OptimizerOptions::n_paths)
      .def_readwrite("max_iters", &OptimizerOptions::max_iters)
      .def_readwrite("tol", &OptimizerOptions::tol)
      .def_readwrite("residual_step", &OptimizerOptions::residual_step)
      .def_readwrite("step0", &OptimizerOptions::step0)
      .def_readwrite("armijo_slope", &OptimizerOptions::armijo_slope)
      .def_readwrite("backtrack", &OptimizerOptions::backtrack)
      .def_readwrite("max_backtracks", &OptimizerOptions::max_backtracks)
      .def_readwrite("crn", &OptimizerOptions::crn)
      .def_readwrite("workers", &OptimizerOptions::workers)
      .def_readwrite("seed", &OptimizerOptions::seed)
      .def_readwrite("with_sufficiency", &OptimizerOptions::with_sufficiency)
      .def_readwrite("sufficiency_tol", &OptimizerOptions::sufficiency_tol);

  py::class_<OptimizeResult>(m, "OptimizeResult")
      .def_readonly("control", &OptimizeResult::control)
      .def_readonly("history", &OptimizeResult::history)
      .def_readonly("report", &OptimizeResult::report);

  m.def(
      "load_problem",
      [](const std::string& path) { return build_problem(load_config(path)); },
      py::arg("path"), "parse, validate and assemble a problem from a TOML config");

  m.def(
      "validate",
      [](const Problem& p, int n_samples) {
        const AssumptionReport rep =
            validate_assumptions(p.coeffs, p.box, p.mesh, n_samples, p.master_seed);
        return py::make_tuple(rep.pass, rep.summary());
      },
      py::arg("problem"), py::arg("n_samples") = 100,
      "sample-check the coefficient hypotheses; returns (pass, summary)");

  m.def(
      "solve_forward",
      [](const Problem& p, const ControlField& u, std::uint64_t path_id) {
        return solve_forward(p, u, path_id);
      },
      py::arg("problem"), py::arg("control"), py::arg("path_id") = 0);
  m.def("solve_adjoint", &solve_adjoint_pathwise, py::arg("problem"), py::arg("trajectory"),
        py::arg("control"));
  m.def("pathwise_cost", &pathwise_cost, py::arg("problem"), py::arg("trajectory"),
        py::arg("control"));
  m.def("gronwall_bound", &gronwall_bound, py::arg("problem"), py::arg("control"),
        py::arg("path_id") = 0);

  m.def("estimate_cost", &estimate_cost, py::arg("problem"), py::arg("control"),
        py::arg("n_paths"), py::arg("seed"), py::arg("workers") = 1);
  m.def("estimate_gradient", &estimate_gradient, py::arg("problem"), py::arg("control"),
        py::arg("n_paths"), py::arg("seed"), py::arg("workers") = 1);

  m.def(
      "smp_residual",
      [](const Problem& p, const ControlField& u, const RowMat& g, double step) {
        return smp_residual(p.box, u, g, step);
      },
      py::arg("problem"), py::arg("control"), py::arg("gradient"), py::arg("step") = 1.0);

  m.def("check_sufficient", &check_sufficient, py::arg("problem"), py::arg("trajectory"),
        py::arg("adjoint"), py::arg("control"), py::arg("tol") = 1e-6);

  m.def("run_optimizer", &run_optimizer, py::arg("problem"), py::arg("u0"),
        py::arg("options") = OptimizerOptions{});
}
