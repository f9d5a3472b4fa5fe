#include "ldp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ldp/parallel.hpp"

namespace ldp {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError(path + "." + it.key() + ": unknown key");
}

double get_number(const json& obj, const std::string& path,
                  const std::string& key, std::optional<double> fallback = {},
                  bool nonneg = false) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(path + "." + key + ": required");
  }
  if (!obj[key].is_number())
    throw ConfigError(path + "." + key + ": must be a number");
  double v = obj[key].get<double>();
  if (nonneg && v < 0.0)
    throw ConfigError(path + "." + key + ": must be nonnegative");
  return v;
}

std::int64_t get_int(const json& obj, const std::string& path,
                     const std::string& key,
                     std::optional<std::int64_t> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(path + "." + key + ": required");
  }
  if (!obj[key].is_number_integer())
    throw ConfigError(path + "." + key + ": must be an integer");
  return obj[key].get<std::int64_t>();
}

Vec get_point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number())
    throw ConfigError(path + ": must be [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

StartSpec parse_start(const json& obj, const std::string& path) {
  StartSpec s;
  if (obj.is_array()) {
    s.anchor = "point";
    s.point = get_point(obj, path);
    return s;
  }
  if (!obj.is_object()) throw ConfigError(path + ": must be object or [x,y]");
  check_keys(obj, path, {"anchor", "point", "shift_toward_z0"});
  if (obj.contains("point")) {
    s.anchor = "point";
    s.point = get_point(obj["point"], path + ".point");
  }
  if (obj.contains("anchor")) {
    if (!obj["anchor"].is_string())
      throw ConfigError(path + ".anchor: must be a string");
    s.anchor = obj["anchor"].get<std::string>();
    if (s.anchor != "zstar" && s.anchor != "ztilde" && s.anchor != "dfe" &&
        s.anchor != "point")
      throw ConfigError(path + ".anchor: expected zstar|ztilde|dfe|point");
  }
  s.shift_toward_z0 = get_number(obj, path, "shift_toward_z0", 0.0);
  return s;
}

json start_json(const StartSpec& s) {
  json j;
  j["anchor"] = s.anchor;
  if (s.anchor == "point") j["point"] = s.point;
  j["shift_toward_z0"] = s.shift_toward_z0;
  return j;
}

std::vector<std::int64_t> get_int_list(const json& obj, const std::string& path,
                                       const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_array() || obj[key].empty())
    throw ConfigError(path + "." + key + ": required nonempty array");
  std::vector<std::int64_t> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number_integer())
      throw ConfigError(path + "." + key + ": entries must be integers");
    out.push_back(v.get<std::int64_t>());
  }
  return out;
}

std::vector<double> get_double_list(const json& obj, const std::string& path,
                                    const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_array() || obj[key].empty())
    throw ConfigError(path + "." + key + ": required nonempty array");
  std::vector<double> out;
  for (const auto& v : obj[key]) {
    if (!v.is_number())
      throw ConfigError(path + "." + key + ": entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

ModelConfig parse_model(const json& root) {
  ModelConfig m;
  if (!root.contains("model") || !root["model"].is_string())
    throw ConfigError("$.model: required string (siv | s0is1)");
  std::string name = root["model"].get<std::string>();
  if (!root.contains("params") || !root["params"].is_object())
    throw ConfigError("$.params: required object");
  const json& p = root["params"];
  if (name == "siv") {
    m.kind = ModelKind::siv;
    check_keys(p, "$.params", {"beta", "chi", "eta", "gamma", "mu", "theta"});
    m.siv.beta = get_number(p, "$.params", "beta", {}, true);
    m.siv.chi = get_number(p, "$.params", "chi", {}, true);
    m.siv.eta = get_number(p, "$.params", "eta", {}, true);
    // The fluid limit pins only mu+gamma and mu+theta; this split is the
    // recorded toolkit default for the stochastic model.
    m.siv.mu = get_number(p, "$.params", "mu", 0.02, true);
    m.siv.gamma = get_number(p, "$.params", "gamma", 1.01, true);
    m.siv.theta = get_number(p, "$.params", "theta", 0.03, true);
    if (m.siv.chi > 1.0)
      throw ConfigError("$.params.chi: must lie in [0,1]");
  } else if (name == "s0is1") {
    m.kind = ModelKind::s0is1;
    check_keys(p, "$.params", {"beta", "alpha", "mu", "r"});
    m.s0is1.beta = get_number(p, "$.params", "beta", {}, true);
    m.s0is1.alpha = get_number(p, "$.params", "alpha", {}, true);
    m.s0is1.mu = get_number(p, "$.params", "mu", {}, true);
    m.s0is1.r = get_number(p, "$.params", "r", {}, true);
  } else {
    throw ConfigError("$.model: expected \"siv\" or \"s0is1\"");
  }
  return m;
}

json model_json(const ModelConfig& m) {
  json p;
  if (m.kind == ModelKind::siv) {
    p = {{"beta", m.siv.beta},   {"chi", m.siv.chi}, {"eta", m.siv.eta},
         {"gamma", m.siv.gamma}, {"mu", m.siv.mu},   {"theta", m.siv.theta}};
  } else {
    p = {{"beta", m.s0is1.beta},
         {"alpha", m.s0is1.alpha},
         {"mu", m.s0is1.mu},
         {"r", m.s0is1.r}};
  }
  return p;
}

}  // namespace

ToolConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("$: top level must be an object");
  check_keys(root, "$",
             {"model", "params", "seed", "threads", "defaults", "sim", "fluid",
              "lln", "tube", "upper", "poisson"});

  ToolConfig cfg;
  cfg.model = parse_model(root);
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned() && !root["seed"].is_number_integer())
      throw ConfigError("$.seed: must be an integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  cfg.threads = static_cast<int>(get_int(root, "$", "threads", 0));
  if (root.contains("defaults")) {
    const json& d = root["defaults"];
    check_keys(d, "$.defaults", {"K", "nu", "integrator_tol"});
    cfg.K = get_number(d, "$.defaults", "K", 1.0, true);
    cfg.nu = get_number(d, "$.defaults", "nu", 0.25, true);
    cfg.integrator_tol =
        get_number(d, "$.defaults", "integrator_tol", 1e-10, true);
    if (!(cfg.nu > 0.0 && cfg.nu < 0.5))
      throw ConfigError("$.defaults.nu: must lie in (0, 1/2)");
  }
  int threads = cfg.threads > 0 ? cfg.threads : hardware_threads();

  if (root.contains("sim")) {
    const json& s = root["sim"];
    check_keys(s, "$.sim", {"N", "T", "start", "reflected"});
    SimSection sim;
    sim.N = get_int(s, "$.sim", "N");
    sim.T = get_number(s, "$.sim", "T");
    if (sim.N < 1) throw ConfigError("$.sim.N: must be >= 1");
    if (!(sim.T > 0)) throw ConfigError("$.sim.T: must be > 0");
    if (s.contains("start")) sim.start = parse_start(s["start"], "$.sim.start");
    if (s.contains("reflected")) {
      if (!s["reflected"].is_boolean())
        throw ConfigError("$.sim.reflected: must be a boolean");
      sim.reflected = s["reflected"].get<bool>();
    }
    cfg.sim = sim;
  }

  if (root.contains("fluid")) {
    const json& f = root["fluid"];
    check_keys(f, "$.fluid", {"start", "T", "tol", "u_end"});
    FluidSection fl;
    if (f.contains("start")) fl.start = parse_start(f["start"], "$.fluid.start");
    fl.T = get_number(f, "$.fluid", "T", 10.0);
    fl.tol = get_number(f, "$.fluid", "tol", cfg.integrator_tol, true);
    if (f.contains("u_end")) {
      double u = get_number(f, "$.fluid", "u_end");
      if (!(u >= 0.0 && u < 1.0))
        throw ConfigError("$.fluid.u_end: must lie in [0,1)");
      fl.u_end = u;
    }
    cfg.fluid = fl;
  }

  if (root.contains("lln")) {
    const json& l = root["lln"];
    check_keys(l, "$.lln",
               {"N_schedule", "replicates", "T", "start", "threshold",
                "reflected"});
    LlnConfig lln;
    lln.model = cfg.model;
    lln.seed = cfg.seed;
    lln.threads = threads;
    lln.N_schedule = get_int_list(l, "$.lln", "N_schedule");
    lln.replicates = get_int(l, "$.lln", "replicates", 200);
    if (lln.replicates < 1) throw ConfigError("$.lln.replicates: must be >= 1");
    lln.T = get_number(l, "$.lln", "T", 5.0);
    if (l.contains("start")) lln.start = parse_start(l["start"], "$.lln.start");
    lln.threshold = get_number(l, "$.lln", "threshold", 0.05, true);
    if (l.contains("reflected")) {
      if (!l["reflected"].is_boolean())
        throw ConfigError("$.lln.reflected: must be a boolean");
      lln.reflected = l["reflected"].get<bool>();
    }
    cfg.lln = lln;
  }

  if (root.contains("tube")) {
    const json& t = root["tube"];
    check_keys(t, "$.tube",
               {"anchor", "direction", "rho", "tau", "breakpoints", "delta",
                "N_schedule", "replicates", "rel_tol"});
    TubeConfig tube;
    tube.model = cfg.model;
    tube.seed = cfg.seed;
    tube.threads = threads;
    if (t.contains("anchor")) tube.anchor = parse_start(t["anchor"], "$.tube.anchor");
    if (t.contains("direction"))
      tube.direction = get_point(t["direction"], "$.tube.direction");
    else
      tube.direction = {0.0, 0.0};
    tube.rho = get_number(t, "$.tube", "rho", 0.05, true);
    tube.tau = get_number(t, "$.tube", "tau", 0.5, true);
    tube.breakpoints = static_cast<int>(get_int(t, "$.tube", "breakpoints", 64));
    tube.delta = get_number(t, "$.tube", "delta", 0.05, true);
    if (!(tube.delta > 0)) throw ConfigError("$.tube.delta: must be > 0");
    tube.N_schedule = get_int_list(t, "$.tube", "N_schedule");
    tube.replicates = get_int(t, "$.tube", "replicates", 100000);
    tube.rel_tol = get_number(t, "$.tube", "rel_tol", 0.30, true);
    cfg.tube = tube;
  }

  if (root.contains("upper")) {
    const json& u = root["upper"];
    check_keys(u, "$.upper",
               {"start", "T", "eps", "K", "nu", "s", "eta", "N_schedule",
                "replicates", "min_successes", "eps_schedule", "fixed_N",
                "eps_replicates"});
    UpperConfig up;
    up.model = cfg.model;
    up.seed = cfg.seed;
    up.threads = threads;
    if (u.contains("start")) up.start = parse_start(u["start"], "$.upper.start");
    up.T = get_number(u, "$.upper", "T", 0.1);
    up.eps = get_number(u, "$.upper", "eps", 0.005);
    up.K = get_number(u, "$.upper", "K", cfg.K, true);
    up.nu = get_number(u, "$.upper", "nu", cfg.nu, true);
    up.s = get_number(u, "$.upper", "s", 0.5, true);
    up.eta = get_number(u, "$.upper", "eta", 0.25, true);
    up.N_schedule = get_int_list(u, "$.upper", "N_schedule");
    up.replicates = get_int(u, "$.upper", "replicates", 1000000);
    up.min_successes = get_int(u, "$.upper", "min_successes", 5);
    if (u.contains("eps_schedule"))
      up.eps_schedule = get_double_list(u, "$.upper", "eps_schedule");
    up.fixed_N = get_int(u, "$.upper", "fixed_N", 200);
    up.eps_replicates = get_int(u, "$.upper", "eps_replicates", 20000);
    if (!(up.nu > 0.0 && up.nu < 0.5))
      throw ConfigError("$.upper.nu: must lie in (0, 1/2)");
    cfg.upper = up;
  }

  if (root.contains("poisson")) {
    const json& q = root["poisson"];
    check_keys(q, "$.poisson", {"sigma", "eps_grid", "N_grid", "s", "K"});
    PoissonTailConfig pt;
    pt.sigma = get_number(q, "$.poisson", "sigma", 1.0, true);
    if (q.contains("eps_grid"))
      pt.eps_grid = get_double_list(q, "$.poisson", "eps_grid");
    if (q.contains("N_grid")) pt.N_grid = get_int_list(q, "$.poisson", "N_grid");
    pt.s = get_number(q, "$.poisson", "s", 1.0, true);
    pt.K = get_number(q, "$.poisson", "K", cfg.K, true);
    cfg.poisson = pt;
  }

  // Resolved view with every default filled in; serializing and re-parsing
  // it reproduces the same configuration.
  json r;
  r["model"] = cfg.model.kind == ModelKind::siv ? "siv" : "s0is1";
  r["params"] = model_json(cfg.model);
  r["seed"] = cfg.seed;
  r["threads"] = cfg.threads;
  r["defaults"] = {{"K", cfg.K}, {"nu", cfg.nu},
                   {"integrator_tol", cfg.integrator_tol}};
  if (cfg.sim)
    r["sim"] = {{"N", cfg.sim->N},
                {"T", cfg.sim->T},
                {"start", start_json(cfg.sim->start)},
                {"reflected", cfg.sim->reflected}};
  if (cfg.fluid) {
    r["fluid"] = {{"start", start_json(cfg.fluid->start)},
                  {"T", cfg.fluid->T},
                  {"tol", cfg.fluid->tol}};
    if (cfg.fluid->u_end) r["fluid"]["u_end"] = *cfg.fluid->u_end;
  }
  if (cfg.lln)
    r["lln"] = {{"N_schedule", cfg.lln->N_schedule},
                {"replicates", cfg.lln->replicates},
                {"T", cfg.lln->T},
                {"start", start_json(cfg.lln->start)},
                {"threshold", cfg.lln->threshold},
                {"reflected", cfg.lln->reflected}};
  if (cfg.tube)
    r["tube"] = {{"anchor", start_json(cfg.tube->anchor)},
                 {"direction", cfg.tube->direction},
                 {"rho", cfg.tube->rho},
                 {"tau", cfg.tube->tau},
                 {"breakpoints", cfg.tube->breakpoints},
                 {"delta", cfg.tube->delta},
                 {"N_schedule", cfg.tube->N_schedule},
                 {"replicates", cfg.tube->replicates},
                 {"rel_tol", cfg.tube->rel_tol}};
  if (cfg.upper)
    r["upper"] = {{"start", start_json(cfg.upper->start)},
                  {"T", cfg.upper->T},
                  {"eps", cfg.upper->eps},
                  {"K", cfg.upper->K},
                  {"nu", cfg.upper->nu},
                  {"s", cfg.upper->s},
                  {"eta", cfg.upper->eta},
                  {"N_schedule", cfg.upper->N_schedule},
                  {"replicates", cfg.upper->replicates},
                  {"min_successes", cfg.upper->min_successes},
                  {"eps_schedule", cfg.upper->eps_schedule},
                  {"fixed_N", cfg.upper->fixed_N},
                  {"eps_replicates", cfg.upper->eps_replicates}};
  if (cfg.poisson)
    r["poisson"] = {{"sigma", cfg.poisson->sigma},
                    {"eps_grid", cfg.poisson->eps_grid},
                    {"N_grid", cfg.poisson->N_grid},
                    {"s", cfg.poisson->s},
                    {"K", cfg.poisson->K}};
  cfg.resolved = r;
  return cfg;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string path_record_csv(const PathRecord& path) {
  std::ostringstream os;
  os << "t,j,applied";
  for (int i = 1; i <= path.dim; ++i) os << ",z" << i;
  os << '\n';
  auto row = [&](double t, int j, int applied, const Vec& z) {
    os << fmt(t) << ',' << j << ',' << applied;
    for (double zi : z) os << ',' << fmt(zi);
    os << '\n';
  };
  row(0.0, -1, 1, path.initial);
  for (std::size_t e = 0; e < path.events.size(); ++e)
    row(path.events[e].t, path.events[e].j, path.events[e].applied ? 1 : 0,
        path.state_after(e));
  row(path.T, -1, 1, path.final_state());
  return os.str();
}

std::string piecewise_csv(const PiecewisePath& phi) {
  std::ostringstream os;
  os << 't';
  for (std::size_t i = 1; i <= phi.x.front().size(); ++i) os << ",z" << i;
  os << '\n';
  for (std::size_t i = 0; i < phi.t.size(); ++i) {
    os << fmt(phi.t[i]);
    for (double c : phi.x[i]) os << ',' << fmt(c);
    os << '\n';
  }
  return os.str();
}

PiecewisePath parse_piecewise_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line))
    throw ConfigError("path csv: empty file");
  PiecewisePath out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 2)
      throw ConfigError("path csv: rows need t plus coordinates");
    out.t.push_back(vals[0]);
    out.x.push_back(Vec(vals.begin() + 1, vals.end()));
  }
  if (out.t.size() < 2) throw ConfigError("path csv: need >= 2 rows");
  return out;
}

std::string curve_csv(const BoundaryCurve& curve) {
  std::ostringstream os;
  os << "u,z1,z2\n";
  for (std::size_t i = 0; i < curve.pts.size(); ++i)
    os << fmt(curve.u[i]) << ',' << fmt(curve.pts[i].x) << ','
       << fmt(curve.pts[i].y) << '\n';
  return os.str();
}

BoundaryCurve parse_curve_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("curve csv: empty file");
  BoundaryCurve out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') ||
        !std::getline(ls, c, ','))
      throw ConfigError("curve csv: rows must be u,z1,z2");
    out.u.push_back(std::stod(a));
    out.pts.push_back(Vec2{std::stod(b), std::stod(c)});
  }
  if (out.pts.size() < 3) throw ConfigError("curve csv: need >= 3 rows");
  // Locate the saddle at u = 1.
  double best = 1e18;
  for (std::size_t i = 0; i < out.u.size(); ++i)
    if (std::abs(out.u[i] - 1.0) < best) {
      best = std::abs(out.u[i] - 1.0);
      out.saddle_index = i;
    }
  out.saddle = out.pts[out.saddle_index];
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << content;
}

}  // namespace ldp
