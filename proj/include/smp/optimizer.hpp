#pragma once

#include <cstdint>
#include <vector>

#include "smp/maximum_principle.hpp"
#include "smp/problem.hpp"

namespace smp {

struct CostEstimate {
  double value = 0.0;
  double half_width = 0.0;  // 1.96 * sample std / sqrt(n); 0 when noise is off
  int n_paths = 1;
};

// Discrete cost of one realized path: trapezoid-in-time running cost plus
// terminal cost at the final state.
double pathwise_cost(const Problem& prob, const StateTrajectory& traj,
                     const ControlField& control);

// Monte Carlo estimate of the discrete cost (trapezoid-in-time running cost
// plus terminal cost) over paths 0..n_paths-1 of the given seed.  With noise
// off a single deterministic path is evaluated.  Deterministic for fixed
// (seed, n_paths) and any worker count.
CostEstimate estimate_cost(const Problem& prob, const ControlField& control, int n_paths,
                           std::uint64_t seed, int workers = 1);

struct GradientEstimate {
  RowMat mean;        // ControlField layout
  RowMat std_error;   // per-coordinate standard error of the mean
  int n_paths = 1;
};

// Ensemble average of the pathwise-adjoint gradient density (common random
// numbers across evaluations with the same seed).
GradientEstimate estimate_gradient(const Problem& prob, const ControlField& control, int n_paths,
                                   std::uint64_t seed, int workers = 1);

struct OptimizerOptions {
  int n_paths = 100;
  int max_iters = 100;
  double tol = 1e-4;            // on the projected-gradient residual
  double residual_step = 1.0;   // step used inside smp_residual
  double step0 = 0.0;           // 0 => 1/(1 + Lipschitz probe)
  double armijo_slope = 0.1;    // accepted decrease fraction
  double backtrack = 0.5;
  int max_backtracks = 30;
  bool crn = true;              // frozen seed across iterations
  int workers = 1;
  std::uint64_t seed = 0;       // 0 => problem master seed
  bool with_sufficiency = true;
  // stationarity tolerance of the certificate; must dominate tol plus the
  // Monte Carlo half-width of the gradient at the returned control
  double sufficiency_tol = 1e-3;
  bool record_timings = false;  // keep wall times out of RunHistory by default
};

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double half_width = 0.0;
  double residual = 0.0;
  double step = 0.0;
  double seconds = 0.0;
};

struct RunHistory {
  std::vector<IterationRecord> rows;
  std::string status;  // "converged", "max_iters", "stalled"
};

struct OptimizeResult {
  ControlField control;
  RunHistory history;
  OptimalityReport report;
};

// Projected gradient descent with Armijo backtracking on the common-random-
// number cost estimate.
OptimizeResult run_optimizer(const Problem& prob, const ControlField& u0,
                             const OptimizerOptions& opts);

}  // namespace smp
