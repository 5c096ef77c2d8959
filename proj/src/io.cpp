#include "lamorbit/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lamorbit::io {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(const std::string& data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return std::string(buf);
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string orbit_to_json(const OrbitProfile& profile, const std::string& config_hash) {
  const bvp::Layout lay{4, profile.mesh.stages, profile.mesh.intervals(), 0};
  json j;
  j["meta"] = {{"eps", profile.params.epsilon},
               {"mu", profile.params.mu},
               {"P", profile.period},
               {"lambda", profile.lambda},
               {"residual", profile.residual_norm},
               {"config_hash", config_hash},
               {"version", kToolVersion}};
  j["mesh"] = profile.mesh.nodes;
  json states = json::array();
  for (int i = 0; i <= lay.N; ++i) {
    const double* x = profile.states.data() + lay.node(i);
    states.push_back({x[0], x[1], x[2], x[3]});
  }
  j["states"] = std::move(states);
  return j.dump(2) + "\n";
}

OrbitProfile orbit_from_json(const std::string& text) {
  json j;
  OrbitProfile p;
  std::vector<std::vector<double>> states;
  try {
    j = json::parse(text);
    p.params.epsilon = j.at("meta").at("eps").get<double>();
    p.params.mu = j.at("meta").at("mu").get<double>();
    p.period = j.at("meta").at("P").get<double>();
    p.lambda = j.at("meta").at("lambda").get<double>();
    p.residual_norm = j.at("meta").value("residual", 0.0);
    p.mesh.stages = 4;
    p.mesh.nodes = j.at("mesh").get<std::vector<double>>();
    states = j.at("states").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("orbit JSON: ") + e.what());
  }
  if (states.size() != p.mesh.nodes.size())
    throw std::invalid_argument("orbit JSON: one state per mesh node expected");
  if (p.mesh.nodes.size() < 2)
    throw std::invalid_argument("orbit JSON: mesh needs at least two nodes");
  const bvp::Layout lay{4, p.mesh.stages, p.mesh.intervals(), 0};
  const auto& gt = bvp::gauss_tables(p.mesh.stages);
  p.states.resize(lay.scalar(0));
  for (int i = 0; i <= lay.N; ++i) {
    if (states[i].size() != 4)
      throw std::invalid_argument("orbit JSON: states must have 4 components");
    for (int a = 0; a < 4; ++a) p.states[lay.node(i) + a] = states[i][a];
    if (i == lay.N) break;
    for (int jj = 0; jj < lay.m; ++jj)
      for (int a = 0; a < 4; ++a)
        p.states[lay.stage(i, jj) + a] =
            (1.0 - gt.c[jj]) * states[i][a] + gt.c[jj] * states[i + 1][a];
  }
  return p;
}

std::string branch_to_csv(const Branch& branch) {
  std::ostringstream os;
  os << "step,mu,eps,P,lambda,fold\n";
  for (const auto& bp : branch.points)
    os << bp.step << ',' << format17(bp.mu) << ',' << format17(bp.eps) << ','
       << format17(bp.P) << ',' << format17(bp.lambda) << ',' << (bp.fold ? 1 : 0) << '\n';
  return os.str();
}

std::string branch_to_json(const Branch& branch, const std::string& config_hash) {
  json j;
  j["meta"] = {{"active_param", branch.active_param},
               {"fixed_value", branch.fixed_value},
               {"termination", branch.termination},
               {"note", branch.note},
               {"config_hash", config_hash},
               {"version", kToolVersion}};
  json pts = json::array();
  for (const auto& bp : branch.points) {
    json p = {{"step", bp.step}, {"mu", bp.mu},         {"eps", bp.eps},
              {"P", bp.P},       {"lambda", bp.lambda}, {"fold", bp.fold}};
    if (std::isfinite(bp.energy)) p["energy"] = bp.energy;
    pts.push_back(std::move(p));
  }
  j["points"] = std::move(pts);
  return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace lamorbit::io
