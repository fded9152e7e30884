#pragma once

#include <cmath>
#include <string>

#include "smp/config.hpp"
#include "smp/problem.hpp"
#include "smp/rng.hpp"

namespace testutil {

// Assembled lq-dbc problem on (0,1): bump initial state, unit cost weights,
// box [-1,1], m = 1.
inline smp::Problem lq_interval(int n = 21, int steps = 50, bool noise = false,
                                double y0 = 1.0, std::uint64_t seed = 42) {
  smp::ProblemConfig cfg;
  cfg.domain_kind = "interval";
  cfg.interval = {0.0, 1.0, n};
  cfg.y0_kind = "bump";
  cfg.y0_value = y0;
  cfg.horizon = 1.0;
  cfg.steps = steps;
  cfg.family = "lq-dbc";
  cfg.noise_enabled = noise;
  cfg.k_interior = 4;
  cfg.k_boundary = 4;
  cfg.sigma0 = 0.1;
  cfg.decay = 1.0;
  cfg.master_seed = seed;
  return smp::build_problem(cfg);
}

inline smp::Problem semilinear_interval(int n = 21, int steps = 50, bool noise = false,
                                        std::uint64_t seed = 7) {
  smp::ProblemConfig cfg;
  cfg.domain_kind = "interval";
  cfg.interval = {0.0, 1.0, n};
  cfg.y0_kind = "bump";
  cfg.y0_value = 1.0;
  cfg.horizon = 1.0;
  cfg.steps = steps;
  cfg.family = "semilinear-dbc";
  cfg.params.epsilon = 0.5;
  cfg.params.kappa = 0.8;
  cfg.noise_enabled = noise;
  cfg.k_interior = 4;
  cfg.k_boundary = 2;
  cfg.sigma0 = 0.1;
  cfg.decay = 1.0;
  cfg.master_seed = seed;
  return smp::build_problem(cfg);
}

// Deterministic pseudo-random field over all mesh nodes.
inline smp::Field random_field(int n, std::uint64_t seed, std::uint64_t stream = 0) {
  smp::Field f(n);
  for (int i = 0; i < n; ++i) f[i] = smp::normal_draw(seed, stream, 0, i);
  return f;
}

inline smp::ControlField random_control(const smp::Problem& prob, std::uint64_t seed,
                                        double scale = 0.5) {
  smp::ControlField u = prob.zero_control();
  for (int n = 0; n < u.steps; ++n)
    for (int j = 0; j < u.bnodes * u.m; ++j)
      u.data(n, j) = scale * std::tanh(smp::normal_draw(seed, 1, n, j));
  return u;
}

}  // namespace testutil
