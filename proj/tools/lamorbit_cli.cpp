#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lamorbit/continuation.hpp"
#include "lamorbit/energy.hpp"
#include "lamorbit/io.hpp"
#include "lamorbit/pipeline.hpp"
#include "lamorbit/seed.hpp"
#include "lamorbit/singular.hpp"
#include "lamorbit/types.hpp"

namespace {

using nlohmann::json;
using namespace lamorbit;

constexpr int kOk = 0;
constexpr int kDomainError = 2;
constexpr int kRunFailure = 3;
constexpr int kSparseGrid = 4;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  json cfg = json::parse(io::read_file(path));
  if (!cfg.is_object()) throw std::invalid_argument("--config must hold a JSON object");
  return cfg;
}

// Config-file values fill in flags the user did not pass on the command line.
template <typename T>
void absorb(const CLI::App* cmd, const std::string& flag, const json& file, const char* key,
            T& value) {
  if (cmd->count(flag) == 0 && file.contains(key)) value = file.at(key).get<T>();
}

void emit(const std::string& path, const std::string& content) {
  io::write_file(path, content);
  std::printf("wrote %s\n", path.c_str());
}

json states_json(const std::vector<State4>& states) {
  json rows = json::array();
  for (const State4& x : states) rows.push_back(json::array({x.u, x.v, x.w, x.z}));
  return rows;
}

void append_states_csv(std::string& csv, const char* segment, const std::vector<State4>& states) {
  for (const State4& x : states) {
    csv += segment;
    for (double c : {x.u, x.v, x.w, x.z}) {
      csv += ',';
      csv += io::format17(c);
    }
    csv += '\n';
  }
}

int run_singular(double mu, const std::string& out_base, const std::string& hash) {
  if (!(mu > kMuMin) || !(mu < kMuMax)) {
    std::fprintf(stderr, "error: --mu must lie strictly between -1/8 and 1/24 (got %g)\n", mu);
    return kDomainError;
  }
  const model::SingularOrbit orbit = model::singular_orbit(mu);

  json j;
  j["meta"] = {{"mu", orbit.mu},      {"T0", orbit.T0},          {"u_jump", orbit.u_jump},
               {"w_min", orbit.w_min}, {"config_hash", hash},     {"version", io::kToolVersion}};
  j["arc_right"] = states_json(orbit.arc_right);
  j["arc_left"] = states_json(orbit.arc_left);
  j["jump_up"] = states_json(orbit.jump_up);
  j["jump_down"] = states_json(orbit.jump_down);
  emit(out_base + ".json", j.dump(2) + "\n");

  std::string csv = "segment,u,v,w,z\n";
  append_states_csv(csv, "arc_right", orbit.arc_right);
  append_states_csv(csv, "jump_down", orbit.jump_down);
  append_states_csv(csv, "arc_left", orbit.arc_left);
  append_states_csv(csv, "jump_up", orbit.jump_up);
  emit(out_base + ".csv", csv);

  std::printf("T0 = %s\nu_jump = %s\nw_min = %s\n", io::format17(orbit.T0).c_str(),
              io::format17(orbit.u_jump).c_str(), io::format17(orbit.w_min).c_str());
  return kOk;
}

int run_seed(double eps, const std::string& out_base, const std::string& hash) {
  if (!(eps >= kEpsMin) || !(eps <= kEpsMax)) {
    std::fprintf(stderr, "error: --eps must lie in [1e-7, 1e-1] (got %g)\n", eps);
    return kDomainError;
  }
  if (eps < 1e-4) {
    std::fprintf(stderr,
                 "error: seeding below eps = 1e-4 is not attempted; seed at a larger eps and use "
                 "`continue --param eps` to reach %g\n",
                 eps);
    return kRunFailure;
  }
  OrbitProfile orbit;
  try {
    orbit = seed::build_seed_orbit(eps);
  } catch (const seed::SeedError& e) {
    std::fprintf(stderr, "seed failure: %s\n", e.what());
    return kRunFailure;
  }
  emit(out_base + ".json", io::orbit_to_json(orbit, hash));
  std::printf("P = %s\nmu = %s\nresidual = %s\n", io::format17(orbit.period).c_str(),
              io::format17(orbit.params.mu).c_str(),
              io::format17(orbit.residual_norm).c_str());
  return kOk;
}

double default_base_eps(double mu) {
  const double delta = mu - kMuMin;
  if (delta >= 5e-3) return 1e-3;
  if (delta >= 5e-4) return 1e-4;
  return 1e-5;
}

struct ContinueArgs {
  std::string param = "mu";
  std::string from;
  std::string out_base = "branch";
  double eps = kNaN;
  double mu = kNaN;
  double to = kNaN;
  double step0 = kNaN;
  int direction = 0;
  int max_steps = 5000;
};

int run_continue(const ContinueArgs& a, const std::string& hash) {
  if (a.param != "mu" && a.param != "eps") {
    std::fprintf(stderr, "error: --param must be 'mu' or 'eps' (got '%s')\n", a.param.c_str());
    return kDomainError;
  }
  const bool in_mu = a.param == "mu";

  OrbitProfile base;
  try {
    if (!a.from.empty()) {
      std::string text;
      try {
        text = io::read_file(a.from);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "error: cannot read input orbit '%s': %s\n", a.from.c_str(),
                     e.what());
        return kDomainError;
      }
      base = solve_periodic(io::orbit_from_json(text));
    } else if (in_mu) {
      if (!std::isfinite(a.eps)) {
        std::fprintf(stderr, "error: --param mu needs --eps (or --from an orbit file)\n");
        return kDomainError;
      }
      pipeline::OrbitSupplier supplier;
      base = pipeline::mu_run_base(supplier, a.eps);
    } else {
      if (!std::isfinite(a.mu)) {
        std::fprintf(stderr, "error: --param eps needs --mu (or --from an orbit file)\n");
        return kDomainError;
      }
      const double eps_base = std::isfinite(a.eps) ? a.eps : default_base_eps(a.mu);
      pipeline::OrbitSupplier supplier;
      base = supplier.at(a.mu, eps_base);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDomainError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "base-orbit failure: %s\n", e.what());
    return kRunFailure;
  }

  ContinuationOptions opts;
  opts.active = in_mu ? ActiveParam::Mu : ActiveParam::LogEps;
  opts.target = a.to;
  opts.direction = a.direction != 0 ? a.direction : (in_mu ? -1 : +1);
  opts.max_steps = a.max_steps;
  if (std::isfinite(a.step0)) opts.step0 = a.step0;

  Branch branch;
  std::vector<BranchPoint> folds;
  try {
    branch = continue_branch(base, opts);
    if (branch.points.size() >= 3) folds = detect_folds(branch);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "continuation failure: %s\n", e.what());
    return kRunFailure;
  }

  emit(a.out_base + ".csv", io::branch_to_csv(branch));
  json j = json::parse(io::branch_to_json(branch, hash));
  json fold_rows = json::array();
  for (const BranchPoint& f : folds) {
    fold_rows.push_back({{"mu", f.mu}, {"eps", f.eps}, {"P", f.P}});
  }
  j["folds"] = fold_rows;
  emit(a.out_base + ".json", j.dump(2) + "\n");

  std::printf("points = %zu\ntermination = %s\n", branch.points.size(),
              branch.termination.c_str());
  if (!branch.note.empty()) std::printf("note = %s\n", branch.note.c_str());
  for (const BranchPoint& f : folds) {
    std::printf("fold at mu = %s, eps = %s, P = %s\n", io::format17(f.mu).c_str(),
                io::format17(f.eps).c_str(), io::format17(f.P).c_str());
  }
  return kOk;
}

struct ScalingArgs {
  double eps_min = 1e-6;
  double eps_max = 1e-3;
  int per_decade = 2;
  std::string eps_list;
  std::string out_base = "scaling";
};

std::vector<double> build_grid(const ScalingArgs& a, std::string* error) {
  std::vector<double> grid;
  if (!a.eps_list.empty()) {
    std::size_t pos = 0;
    while (pos < a.eps_list.size()) {
      std::size_t next = a.eps_list.find(',', pos);
      if (next == std::string::npos) next = a.eps_list.size();
      const std::string tok = a.eps_list.substr(pos, next - pos);
      try {
        if (!tok.empty()) grid.push_back(std::stod(tok));
      } catch (const std::exception&) {
        *error = "unparseable entry '" + tok + "' in --eps-list";
        return {};
      }
      pos = next + 1;
    }
  } else {
    if (!(a.eps_min > 0) || !(a.eps_max >= a.eps_min) || a.per_decade < 1) {
      *error = "need 0 < --eps-min <= --eps-max and --per-decade >= 1";
      return {};
    }
    const double ratio = std::pow(10.0, 1.0 / a.per_decade);
    for (double eps = a.eps_max; eps >= a.eps_min * (1.0 - 1e-12); eps /= ratio) {
      grid.push_back(eps);
    }
  }
  for (double eps : grid) {
    if (!(eps >= kEpsMin) || !(eps <= kEpsMax)) {
      *error = "grid value " + io::format17(eps) + " lies outside [1e-7, 1e-1]";
      return {};
    }
  }
  if (grid.empty()) *error = "the eps grid is empty";
  return grid;
}

int run_scaling(const ScalingArgs& a, const std::string& hash) {
  std::string error;
  const std::vector<double> grid = build_grid(a, &error);
  if (grid.empty()) {
    std::fprintf(stderr, "error: %s\n", error.c_str());
    return kDomainError;
  }

  const pipeline::ScalingSweep sweep = pipeline::scaling_sweep(grid);

  std::string csv = "eps,P_min,P_mueller,ratio\n";
  json rows = json::array();
  for (const pipeline::MinimizerResult& row : sweep.rows) {
    const double pm = energy::mueller_period(row.eps);
    json r = {{"eps", row.eps}, {"P_mueller", pm}, {"ok", row.ok}, {"note", row.note}};
    if (row.ok) {
      const double ratio = row.P_min / pm;
      csv += io::format17(row.eps) + "," + io::format17(row.P_min) + "," + io::format17(pm) +
             "," + io::format17(ratio) + "\n";
      r["P_min"] = row.P_min;
      r["I_min"] = row.I_min;
      r["mu_near_min"] = row.mu_near_min;
      r["ratio"] = ratio;
    }
    rows.push_back(r);
  }
  emit(a.out_base + ".csv", csv);

  json j;
  j["meta"] = {{"config_hash", hash}, {"version", io::kToolVersion}};
  j["rows"] = rows;
  j["n_requested"] = sweep.n_requested;
  j["n_ok"] = sweep.n_ok;
  if (sweep.n_ok >= 4) {
    j["fit"] = {{"alpha", sweep.fit.alpha},
                {"prefactor", sweep.fit.prefactor},
                {"max_residual", sweep.fit.max_residual}};
    std::printf("fit: alpha = %s, prefactor = %s\n", io::format17(sweep.fit.alpha).c_str(),
                io::format17(sweep.fit.prefactor).c_str());
  }
  emit(a.out_base + ".json", j.dump(2) + "\n");

  std::printf("succeeded on %d of %d grid points\n", sweep.n_ok, sweep.n_requested);
  return 4 * sweep.n_ok >= 3 * sweep.n_requested ? kOk : kSparseGrid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"periodic-orbit toolkit for the fast-slow Euler-Lagrange system"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON object supplying defaults for subcommand flags");

  double s_mu = kNaN;
  std::string s_out = "singular";
  CLI::App* sing = app.add_subcommand("singular", "singular (eps = 0) orbit and period at one mu");
  sing->add_option("--mu", s_mu, "energy level in (-1/8, 1/24)");
  sing->add_option("--out", s_out, "output base path (.json/.csv appended)");

  double d_eps = kNaN;
  std::string d_out = "seed";
  CLI::App* seed = app.add_subcommand("seed", "construct a converged periodic orbit from scratch");
  seed->add_option("--eps", d_eps, "perturbation strength in [1e-4, 1e-2]");
  seed->add_option("--out", d_out, "output base path (.json appended)");

  ContinueArgs c;
  CLI::App* cont = app.add_subcommand("continue", "continue a periodic-orbit branch in mu or eps");
  cont->add_option("--param", c.param, "continuation parameter: mu or eps");
  cont->add_option("--from", c.from, "orbit JSON to restart from");
  cont->add_option("--eps", c.eps, "eps of the branch (param mu) or of the base orbit (param eps)");
  cont->add_option("--mu", c.mu, "mu of the branch (param eps)");
  cont->add_option("--to", c.to, "target parameter value (default: run to the window edge)");
  cont->add_option("--direction", c.direction, "initial parameter direction +1/-1");
  cont->add_option("--step0", c.step0, "initial arclength step");
  cont->add_option("--max-steps", c.max_steps, "step budget");
  cont->add_option("--out", c.out_base, "output base path (.json/.csv appended)");

  ScalingArgs g;
  CLI::App* scal = app.add_subcommand("scaling", "energy-minimizing period over an eps grid");
  scal->add_option("--eps-min", g.eps_min, "smallest eps of the geometric grid");
  scal->add_option("--eps-max", g.eps_max, "largest eps of the geometric grid");
  scal->add_option("--per-decade", g.per_decade, "grid points per decade");
  scal->add_option("--eps-list", g.eps_list, "explicit comma-separated eps values (overrides grid)");
  scal->add_option("--out", g.out_base, "output base path (.json/.csv appended)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kDomainError;
  }

  json file_cfg;
  try {
    file_cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDomainError;
  }

  try {
    if (sing->parsed()) {
      absorb(sing, "--mu", file_cfg, "mu", s_mu);
      absorb(sing, "--out", file_cfg, "out", s_out);
      if (!std::isfinite(s_mu)) {
        std::fprintf(stderr, "error: singular needs --mu\n");
        return kDomainError;
      }
      const json eff = {{"command", "singular"}, {"mu", s_mu}};
      return run_singular(s_mu, s_out, io::hash_hex(eff.dump()));
    }
    if (seed->parsed()) {
      absorb(seed, "--eps", file_cfg, "eps", d_eps);
      absorb(seed, "--out", file_cfg, "out", d_out);
      if (!std::isfinite(d_eps)) {
        std::fprintf(stderr, "error: seed needs --eps\n");
        return kDomainError;
      }
      const json eff = {{"command", "seed"}, {"eps", d_eps}};
      return run_seed(d_eps, d_out, io::hash_hex(eff.dump()));
    }
    if (cont->parsed()) {
      absorb(cont, "--param", file_cfg, "param", c.param);
      absorb(cont, "--from", file_cfg, "from", c.from);
      absorb(cont, "--eps", file_cfg, "eps", c.eps);
      absorb(cont, "--mu", file_cfg, "mu", c.mu);
      absorb(cont, "--to", file_cfg, "to", c.to);
      absorb(cont, "--direction", file_cfg, "direction", c.direction);
      absorb(cont, "--step0", file_cfg, "step0", c.step0);
      absorb(cont, "--max-steps", file_cfg, "max_steps", c.max_steps);
      absorb(cont, "--out", file_cfg, "out", c.out_base);
      const json eff = {{"command", "continue"},   {"param", c.param},
                        {"from", c.from},          {"eps", c.eps},
                        {"mu", c.mu},              {"to", c.to},
                        {"direction", c.direction}, {"step0", c.step0},
                        {"max_steps", c.max_steps}};
      return run_continue(c, io::hash_hex(eff.dump()));
    }
    if (scal->parsed()) {
      absorb(scal, "--eps-min", file_cfg, "eps_min", g.eps_min);
      absorb(scal, "--eps-max", file_cfg, "eps_max", g.eps_max);
      absorb(scal, "--per-decade", file_cfg, "per_decade", g.per_decade);
      absorb(scal, "--eps-list", file_cfg, "eps_list", g.eps_list);
      absorb(scal, "--out", file_cfg, "out", g.out_base);
      const json eff = {{"command", "scaling"},        {"eps_min", g.eps_min},
                        {"eps_max", g.eps_max},        {"per_decade", g.per_decade},
                        {"eps_list", g.eps_list}};
      return run_scaling(g, io::hash_hex(eff.dump()));
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kDomainError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return kRunFailure;
  }
  return kDomainError;
}
