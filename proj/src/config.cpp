#include "smp/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "smp/errors.hpp"

namespace smp {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool bare_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  fail("line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& tok, int line) {
  if (tok.empty()) parse_fail(line, "empty numeric value");
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    parse_fail(line, "'" + tok + "' is not a number");
  }
  if (used != tok.size()) parse_fail(line, "'" + tok + "' is not a number");
  if (!std::isfinite(v)) parse_fail(line, "non-finite numbers are not allowed");
  return v;
}

bool integer_literal(const std::string& tok) {
  size_t i = (tok[0] == '+' || tok[0] == '-') ? 1 : 0;
  if (i >= tok.size()) return false;
  for (; i < tok.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return false;
  return true;
}

TomlValue parse_value(const std::string& raw, int line) {
  TomlValue out;
  out.line = line;
  const std::string s = trim(raw);
  if (s.empty()) parse_fail(line, "missing value");

  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') parse_fail(line, "unterminated string");
    const std::string body = s.substr(1, s.size() - 2);
    if (body.find('"') != std::string::npos || body.find('\\') != std::string::npos)
      parse_fail(line, "escapes and embedded quotes are not supported");
    out.v = body;
    return out;
  }
  if (s == "true" || s == "false") {
    out.v = (s == "true");
    return out;
  }
  if (s.front() == '[') {
    if (s.back() != ']') parse_fail(line, "unterminated array");
    std::vector<double> vals;
    std::string body = s.substr(1, s.size() - 2);
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) parse_fail(line, "empty array element");
      vals.push_back(parse_number(tok, line));
    }
    out.v = vals;
    return out;
  }
  if (integer_literal(s)) {
    try {
      out.v = static_cast<std::int64_t>(std::stoll(s));
    } catch (const std::exception&) {
      parse_fail(line, "integer '" + s + "' out of range");
    }
    return out;
  }
  out.v = parse_number(s, line);
  return out;
}

// cut comments outside of strings
std::string strip_comment(const std::string& line_text) {
  bool in_str = false;
  for (size_t i = 0; i < line_text.size(); ++i) {
    if (line_text[i] == '"') in_str = !in_str;
    if (line_text[i] == '#' && !in_str) return line_text.substr(0, i);
  }
  return line_text;
}

}  // namespace

TomlDoc parse_toml(const std::string& text) {
  TomlDoc doc;
  std::string section;
  bool have_section = false;

  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(line_no, "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (!bare_name(name)) parse_fail(line_no, "invalid section name '" + name + "'");
      if (doc.count(name)) parse_fail(line_no, "duplicate section [" + name + "]");
      doc[name];
      section = name;
      have_section = true;
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) parse_fail(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (!bare_name(key)) parse_fail(line_no, "invalid key '" + key + "'");
    if (!have_section) parse_fail(line_no, "key '" + key + "' outside any [section]");
    TomlTable& tab = doc[section];
    if (tab.count(key))
      parse_fail(line_no, "duplicate key '" + key + "' in [" + section + "]");
    tab[key] = parse_value(line.substr(eq + 1), line_no);
  }
  return doc;
}

TomlDoc parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_toml(buf.str());
  } catch (const Error& e) {
    fail(path + ": " + e.what());
  }
}

namespace {

// strict section access: every read key is recorded, leftovers are rejected
class Section {
 public:
  Section(const std::string& origin, const TomlDoc& doc, std::string name)
      : origin_(origin), name_(std::move(name)) {
    const auto it = doc.find(name_);
    tab_ = (it == doc.end()) ? nullptr : &it->second;
  }

  bool present() const { return tab_ != nullptr; }

  [[noreturn]] void complain(const std::string& what) const {
    fail(origin_ + ": [" + name_ + "] " + what);
  }

  const TomlValue* find(const std::string& key) const {
    if (!tab_) return nullptr;
    seen_.insert(key);
    const auto it = tab_->find(key);
    return it == tab_->end() ? nullptr : &it->second;
  }

  std::string str(const std::string& key, const std::string& dflt) const {
    const TomlValue* v = find(key);
    if (!v) return dflt;
    if (const auto* s = std::get_if<std::string>(&v->v)) return *s;
    complain(key + " must be a string (line " + std::to_string(v->line) + ")");
  }

  std::string str_required(const std::string& key) const {
    if (!find(key)) complain("missing required key '" + key + "'");
    return str(key, "");
  }

  double num(const std::string& key, double dflt) const {
    const TomlValue* v = find(key);
    if (!v) return dflt;
    if (const auto* d = std::get_if<double>(&v->v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v->v)) return static_cast<double>(*i);
    complain(key + " must be a number (line " + std::to_string(v->line) + ")");
  }

  double num_required(const std::string& key) const {
    if (!find(key)) complain("missing required key '" + key + "'");
    return num(key, 0.0);
  }

  std::int64_t integer(const std::string& key, std::int64_t dflt) const {
    const TomlValue* v = find(key);
    if (!v) return dflt;
    if (const auto* i = std::get_if<std::int64_t>(&v->v)) return *i;
    complain(key + " must be an integer (line " + std::to_string(v->line) + ")");
  }

  std::int64_t integer_required(const std::string& key) const {
    if (!find(key)) complain("missing required key '" + key + "'");
    return integer(key, 0);
  }

  bool boolean(const std::string& key, bool dflt) const {
    const TomlValue* v = find(key);
    if (!v) return dflt;
    if (const auto* b = std::get_if<bool>(&v->v)) return *b;
    complain(key + " must be a boolean (line " + std::to_string(v->line) + ")");
  }

  // scalar broadcasts to every component
  Eigen::VectorXd vec(const std::string& key, const Eigen::VectorXd& dflt, int want) const {
    const TomlValue* v = find(key);
    if (!v) return dflt;
    std::vector<double> vals;
    if (const auto* a = std::get_if<std::vector<double>>(&v->v))
      vals = *a;
    else if (const auto* d = std::get_if<double>(&v->v))
      vals.assign(want, *d);
    else if (const auto* i = std::get_if<std::int64_t>(&v->v))
      vals.assign(want, static_cast<double>(*i));
    else
      complain(key + " must be a number or array (line " + std::to_string(v->line) + ")");
    if (static_cast<int>(vals.size()) != want)
      complain(key + " must have " + std::to_string(want) + " entries (line " +
               std::to_string(v->line) + ")");
    return Eigen::Map<const Eigen::VectorXd>(vals.data(), want);
  }

  void finish() const {
    if (!tab_) return;
    for (const auto& [key, val] : *tab_)
      if (!seen_.count(key))
        complain("unknown key '" + key + "' (line " + std::to_string(val.line) + ")");
  }

 private:
  const std::string& origin_;
  std::string name_;
  const TomlTable* tab_ = nullptr;
  mutable std::set<std::string> seen_;
};

}  // namespace

ProblemConfig config_from_doc(const TomlDoc& doc, const std::string& origin) {
  static const std::set<std::string> known = {"domain", "time",      "coefficients", "control",
                                              "noise",  "cost",      "optimizer",    "rng"};
  for (const auto& [name, tab] : doc)
    require(known.count(name) > 0, origin + ": unknown section [" + name + "]");
  for (const char* must : {"domain", "time", "coefficients"})
    require(doc.count(must) > 0, origin + ": missing [" + std::string(must) + "] section");

  ProblemConfig cfg;

  Section domain(origin, doc, "domain");
  cfg.domain_kind = domain.str_required("kind");
  if (cfg.domain_kind == "interval") {
    cfg.interval.a = domain.num("a", 0.0);
    cfg.interval.b = domain.num("b", 1.0);
    cfg.interval.n = static_cast<int>(domain.integer_required("n"));
  } else if (cfg.domain_kind == "rectangle") {
    cfg.rectangle.x0 = domain.num("x0", 0.0);
    cfg.rectangle.x1 = domain.num("x1", 1.0);
    cfg.rectangle.y0 = domain.num("y0", 0.0);
    cfg.rectangle.y1 = domain.num("y1", 1.0);
    cfg.rectangle.nx = static_cast<int>(domain.integer_required("nx"));
    cfg.rectangle.ny = static_cast<int>(domain.integer_required("ny"));
  } else {
    domain.complain("kind must be \"interval\" or \"rectangle\"");
  }
  cfg.y0_kind = domain.str("initial", "constant");
  cfg.y0_value = domain.num("initial_value", 0.0);
  domain.finish();

  Section time(origin, doc, "time");
  cfg.horizon = time.num_required("horizon");
  cfg.steps = static_cast<int>(time.integer_required("steps"));
  require(cfg.horizon > 0.0, origin + ": [time] horizon must be positive");
  require(cfg.steps >= 1, origin + ": [time] steps must be at least 1");
  time.finish();

  Section control(origin, doc, "control");
  cfg.params.m = static_cast<int>(control.integer("m", 1));
  require(cfg.params.m >= 1, origin + ": [control] m must be at least 1");
  cfg.params.lo = control.vec("lo", -Eigen::VectorXd::Ones(cfg.params.m), cfg.params.m);
  cfg.params.hi = control.vec("hi", Eigen::VectorXd::Ones(cfg.params.m), cfg.params.m);
  control.finish();

  Section coeffs(origin, doc, "coefficients");
  cfg.family = coeffs.str_required("family");
  cfg.params.epsilon = coeffs.num("epsilon", 0.0);
  cfg.params.kappa = coeffs.num("kappa", 0.0);
  cfg.params.beta = coeffs.vec("beta", Eigen::VectorXd::Ones(cfg.params.m), cfg.params.m);
  coeffs.finish();

  Section cost(origin, doc, "cost");
  cfg.params.w_ell = cost.num("w_ell", 1.0);
  cfg.params.w_ellbar = cost.num("w_ellbar", 1.0);
  cfg.params.w_psi = cost.num("w_psi", 1.0);
  cfg.params.w_psibar = cost.num("w_psibar", 1.0);
  cfg.params.control_penalty = cost.num("control_penalty", 1.0);
  cost.finish();

  Section noise(origin, doc, "noise");
  cfg.noise_enabled = noise.boolean("enabled", false);
  cfg.k_interior = static_cast<int>(noise.integer("k_interior", 0));
  cfg.k_boundary = static_cast<int>(noise.integer("k_boundary", 0));
  cfg.sigma0 = noise.num("sigma0", 0.1);
  cfg.decay = noise.num("decay", 1.0);
  noise.finish();
  if (cfg.noise_enabled)
    require(cfg.k_interior + cfg.k_boundary > 0,
            origin + ": [noise] enabled but k_interior + k_boundary is zero");

  Section opt(origin, doc, "optimizer");
  cfg.optimizer.n_paths = static_cast<int>(opt.integer("paths", cfg.optimizer.n_paths));
  cfg.optimizer.max_iters = static_cast<int>(opt.integer("max_iters", cfg.optimizer.max_iters));
  cfg.optimizer.tol = opt.num("tol", cfg.optimizer.tol);
  cfg.optimizer.residual_step = opt.num("residual_step", cfg.optimizer.residual_step);
  cfg.optimizer.step0 = opt.num("step0", cfg.optimizer.step0);
  cfg.optimizer.armijo_slope = opt.num("armijo_slope", cfg.optimizer.armijo_slope);
  cfg.optimizer.backtrack = opt.num("backtrack", cfg.optimizer.backtrack);
  cfg.optimizer.max_backtracks =
      static_cast<int>(opt.integer("max_backtracks", cfg.optimizer.max_backtracks));
  cfg.optimizer.crn = opt.boolean("crn", cfg.optimizer.crn);
  cfg.optimizer.with_sufficiency = opt.boolean("sufficiency", cfg.optimizer.with_sufficiency);
  cfg.optimizer.sufficiency_tol = opt.num("sufficiency_tol", cfg.optimizer.sufficiency_tol);
  opt.finish();

  Section rng(origin, doc, "rng");
  const std::int64_t seed = rng.integer("master_seed", 0);
  require(seed >= 0, origin + ": [rng] master_seed must be nonnegative");
  cfg.master_seed = static_cast<std::uint64_t>(seed);
  rng.finish();

  return cfg;
}

Problem build_problem(const ProblemConfig& cfg) {
  Problem prob;
  if (cfg.domain_kind == "interval")
    prob.mesh = build_mesh(cfg.interval);
  else
    prob.mesh = build_mesh(cfg.rectangle);

  BuiltinProblem built = builtin_problem(cfg.family, cfg.params);
  prob.coeffs = std::move(built.coeffs);
  prob.box = std::move(built.box);

  prob.noise_on = cfg.noise_enabled;
  if (cfg.k_interior + cfg.k_boundary > 0)
    prob.noise = build_noise(prob.mesh, cfg.k_interior, cfg.k_boundary, cfg.sigma0, cfg.decay);

  prob.T = cfg.horizon;
  prob.steps = cfg.steps;
  prob.y0 = make_initial_state(prob.mesh, cfg.y0_kind, cfg.y0_value);
  prob.master_seed = cfg.master_seed;
  return prob;
}

ProblemConfig load_config(const std::string& path) {
  const TomlDoc doc = parse_toml_file(path);
  ProblemConfig cfg = config_from_doc(doc, path);
  const Problem prob = build_problem(cfg);
  const AssumptionReport report =
      validate_assumptions(prob.coeffs, prob.box, prob.mesh, 100, prob.master_seed);
  if (!report.pass) {
    std::string msg = path + ": coefficient hypotheses rejected:";
    for (const auto& chk : report.checks)
      if (!chk.pass)
        msg += "\n  " + chk.name + " (margin " + std::to_string(chk.worst_margin) + ") at " +
               chk.witness;
    fail(msg);
  }
  return cfg;
}

}  // namespace smp
