#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smp/adjoint.hpp"
#include "smp/field.hpp"
#include "smp/maximum_principle.hpp"
#include "smp/optimizer.hpp"

namespace smp {

// All CSV files open with a `# master_seed=<seed>` comment line followed by
// the header row; doubles are written with full round-trip precision.

void write_trajectory_csv(const std::string& path, const Mesh& mesh, const StateTrajectory& traj,
                          std::uint64_t seed);
void write_boundary_csv(const std::string& path, const Mesh& mesh, const StateTrajectory& traj,
                        std::uint64_t seed);
void write_adjoint_csv(const std::string& path, const Mesh& mesh, const AdjointTrajectory& adj,
                       std::uint64_t seed);
void write_control_csv(const std::string& path, const ControlField& u, std::uint64_t seed);
ControlField read_control_csv(const std::string& path, int expected_m);

void write_history_csv(const std::string& path, const RunHistory& history, std::uint64_t seed,
                       bool with_timings);

struct GradCheckRow {
  int step = 0, bnode = 0, comp = 0;
  double adjoint = 0.0, adjoint_half = 0.0;
  double fd = 0.0, fd_half = 0.0;
  double rel_err = 0.0;
  bool ci_overlap = true;
};
void write_gradcheck_csv(const std::string& path, const std::vector<GradCheckRow>& rows,
                         std::uint64_t seed);

struct ConvergenceRow {
  std::string study;  // "time" | "space" | "variational"
  int level = 0;
  double h = 0.0, dt = 0.0, theta = 0.0;
  double error = 0.0;
  double order = 0.0;  // vs previous level, 0 for the first
};
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows,
                           std::uint64_t seed);

std::string report_json(const OptimalityReport& report, const RunHistory* history,
                        std::uint64_t seed, bool include_gradient = true);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace smp
