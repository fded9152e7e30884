#include "smp/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "smp/errors.hpp"

namespace smp {

namespace {

// shortest representation that parses back to the same double
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::string& path, std::uint64_t seed) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path + "' for writing");
  out << "# master_seed=" << seed << "\n";
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Mesh& mesh, const StateTrajectory& traj,
                          std::uint64_t seed) {
  std::ofstream out = open_out(path, seed);
  out << "step,time,node,value\n";
  for (int n = 0; n < static_cast<int>(traj.states.size()); ++n)
    for (int i = 0; i < mesh.n_nodes(); ++i)
      out << n << ',' << fmt(traj.times[n]) << ',' << i << ',' << fmt(traj.states[n][i]) << '\n';
  require(out.good(), "write failed for '" + path + "'");
}

void write_boundary_csv(const std::string& path, const Mesh& mesh, const StateTrajectory& traj,
                        std::uint64_t seed) {
  std::ofstream out = open_out(path, seed);
  out << "step,time,bnode,node,value\n";
  for (int n = 0; n < static_cast<int>(traj.states.size()); ++n)
    for (int b = 0; b < mesh.n_boundary(); ++b) {
      const int i = mesh.boundary_nodes[b];
      out << n << ',' << fmt(traj.times[n]) << ',' << b << ',' << i << ','
          << fmt(traj.states[n][i]) << '\n';
    }
  require(out.good(), "write failed for '" + path + "'");
}

void write_adjoint_csv(const std::string& path, const Mesh& mesh, const AdjointTrajectory& adj,
                       std::uint64_t seed) {
  std::ofstream out = open_out(path, seed);
  out << "step,time,node,value\n";
  for (int n = 0; n < static_cast<int>(adj.P.size()); ++n)
    for (int i = 0; i < mesh.n_nodes(); ++i)
      out << n << ',' << fmt(adj.times[n]) << ',' << i << ',' << fmt(adj.P[n][i]) << '\n';
  require(out.good(), "write failed for '" + path + "'");
}

void write_control_csv(const std::string& path, const ControlField& u, std::uint64_t seed) {
  std::ofstream out = open_out(path, seed);
  out << "step,bnode";
  for (int c = 0; c < u.m; ++c) out << ",u" << c;
  out << '\n';
  for (int n = 0; n < u.steps; ++n)
    for (int b = 0; b < u.bnodes; ++b) {
      out << n << ',' << b;
      const Eigen::VectorXd val = u.value(n, b);
      for (int c = 0; c < u.m; ++c) out << ',' << fmt(val[c]);
      out << '\n';
    }
  require(out.good(), "write failed for '" + path + "'");
}

ControlField read_control_csv(const std::string& path, int expected_m) {
  std::ifstream in(path);
  require(in.good(), "cannot open control file '" + path + "'");

  std::string line;
  bool header_seen = false;
  struct Entry {
    int step, bnode;
    std::vector<double> u;
  };
  std::vector<Entry> entries;
  int max_step = -1, max_bnode = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      std::string want = "step,bnode";
      for (int c = 0; c < expected_m; ++c) want += ",u" + std::to_string(c);
      require(line == want, path + ": unexpected header '" + line + "', want '" + want + "'");
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string tok;
    Entry e;
    require(static_cast<bool>(std::getline(ss, tok, ',')),
            path + ": short row at line " + std::to_string(line_no));
    e.step = std::stoi(tok);
    require(static_cast<bool>(std::getline(ss, tok, ',')),
            path + ": short row at line " + std::to_string(line_no));
    e.bnode = std::stoi(tok);
    while (std::getline(ss, tok, ',')) e.u.push_back(std::stod(tok));
    require(static_cast<int>(e.u.size()) == expected_m,
            path + ": row at line " + std::to_string(line_no) + " has " +
                std::to_string(e.u.size()) + " control entries, want " +
                std::to_string(expected_m));
    for (double v : e.u)
      require(std::isfinite(v), path + ": non-finite value at line " + std::to_string(line_no));
    require(e.step >= 0 && e.bnode >= 0,
            path + ": negative indices at line " + std::to_string(line_no));
    max_step = std::max(max_step, e.step);
    max_bnode = std::max(max_bnode, e.bnode);
    entries.push_back(std::move(e));
  }
  require(header_seen, path + ": missing header row");
  require(!entries.empty(), path + ": no control rows");

  const int steps = max_step + 1, bnodes = max_bnode + 1;
  require(static_cast<int>(entries.size()) == steps * bnodes,
          path + ": expected " + std::to_string(steps * bnodes) + " rows for a complete " +
              std::to_string(steps) + " x " + std::to_string(bnodes) + " grid, found " +
              std::to_string(entries.size()));

  ControlField u = ControlField::zeros(steps, bnodes, expected_m);
  std::vector<bool> seen(static_cast<size_t>(steps) * bnodes, false);
  for (const auto& e : entries) {
    const size_t slot = static_cast<size_t>(e.step) * bnodes + e.bnode;
    require(!seen[slot], path + ": duplicate row for step " + std::to_string(e.step) +
                             ", bnode " + std::to_string(e.bnode));
    seen[slot] = true;
    u.set_value(e.step, e.bnode,
                Eigen::Map<const Eigen::VectorXd>(e.u.data(), expected_m));
  }
  return u;
}

void write_history_csv(const std::string& path, const RunHistory& history, std::uint64_t seed,
                       bool with_timings) {
  std::ofstream out = open_out(path, seed);
  out << "iteration,cost,half_width,residual,step,seconds\n";
  for (const auto& row : history.rows)
    out << row.iteration << ',' << fmt(row.cost) << ',' << fmt(row.half_width) << ','
        << fmt(row.residual) << ',' << fmt(row.step) << ','
        << fmt(with_timings ? row.seconds : 0.0) << '\n';
  out << "# status=" << history.status << '\n';
  require(out.good(), "write failed for '" + path + "'");
}

void write_gradcheck_csv(const std::string& path, const std::vector<GradCheckRow>& rows,
                         std::uint64_t seed) {
  std::ofstream out = open_out(path, seed);
  out << "step,bnode,comp,adjoint,adjoint_half,fd,fd_half,rel_err,ci_overlap\n";
  for (const auto& r : rows)
    out << r.step << ',' << r.bnode << ',' << r.comp << ',' << fmt(r.adjoint) << ','
        << fmt(r.adjoint_half) << ',' << fmt(r.fd) << ',' << fmt(r.fd_half) << ','
        << fmt(r.rel_err) << ',' << (r.ci_overlap ? 1 : 0) << '\n';
  require(out.good(), "write failed for '" + path + "'");
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows,
                           std::uint64_t seed) {
  std::ofstream out = open_out(path, seed);
  out << "study,level,h,dt,theta,error,order\n";
  for (const auto& r : rows)
    out << r.study << ',' << r.level << ',' << fmt(r.h) << ',' << fmt(r.dt) << ','
        << fmt(r.theta) << ',' << fmt(r.error) << ',' << fmt(r.order) << '\n';
  require(out.good(), "write failed for '" + path + "'");
}

std::string report_json(const OptimalityReport& report, const RunHistory* history,
                        std::uint64_t seed, bool include_gradient) {
  nlohmann::json j;
  j["master_seed"] = seed;
  j["residual"] = report.residual;
  j["residual_step"] = report.residual_step;
  j["gradient_max_abs"] = report.gradient_max_abs;

  nlohmann::json w;
  w["step"] = report.witness.step;
  w["bnode"] = report.witness.bnode;
  w["value"] = report.witness.value;
  w["gradient"] = std::vector<double>(report.witness.direction.data(),
                                      report.witness.direction.data() +
                                          report.witness.direction.size());
  j["witness"] = w;

  nlohmann::json s;
  s["verdict"] = verdict_name(report.sufficiency.verdict);
  s["sigma"] = report.sufficiency.sigma;
  s["min_sigma_pbar"] = report.sufficiency.min_sigma_pbar;
  s["hypotheses"] = report.sufficiency.hypotheses;
  if (report.sufficiency.witness) {
    nlohmann::json sw;
    sw["step"] = report.sufficiency.witness->step;
    sw["bnode"] = report.sufficiency.witness->bnode;
    sw["value"] = report.sufficiency.witness->value;
    s["witness"] = sw;
  } else {
    s["witness"] = nullptr;
  }
  j["sufficiency"] = s;

  if (include_gradient) {
    std::vector<std::vector<double>> g(report.gradient.rows());
    for (int r = 0; r < report.gradient.rows(); ++r)
      g[r].assign(report.gradient.row(r).data(),
                  report.gradient.row(r).data() + report.gradient.cols());
    j["gradient"] = g;
  }

  if (history) {
    j["history"] = {{"status", history->status},
                    {"iterations", history->rows.size()},
                    {"final_cost", history->rows.empty() ? 0.0 : history->rows.back().cost}};
  }
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  require(out.good(), "cannot open '" + path + "' for writing");
  out << content;
  require(out.good(), "write failed for '" + path + "'");
}

}  // namespace smp
