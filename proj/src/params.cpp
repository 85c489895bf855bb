#include "enzyrx/params.hpp"

#include <fstream>

#include "enzyrx/errors.hpp"

namespace enzyrx {

nlohmann::json to_json(const FrontEndParams& p) {
  return {{"a0", p.a0}, {"d0", p.d0}, {"g0", p.g0}, {"g_minus", p.g_minus},
          {"x_total", p.x_total}};
}

nlohmann::json to_json(const ThCycleParams& p) {
  return {{"a1", p.a1}, {"d1", p.d1}, {"k1", p.k1}, {"a2", p.a2},
          {"d2", p.d2}, {"k2", p.k2}, {"p_total", p.p_total}};
}

nlohmann::json to_json(const IntegratorParams& p) {
  return {{"a3", p.a3}, {"d3", p.d3}, {"k3", p.k3},           {"a4", p.a4},
          {"d4", p.d4}, {"k4", p.k4}, {"j_total", p.j_total}, {"ptilde_total", p.ptilde_total}};
}

nlohmann::json to_json(const ReceiverParams& p) {
  return {{"front_end", to_json(p.front)},
          {"th_cycle", to_json(p.th)},
          {"integrator", to_json(p.integrator)},
          {"provenance", p.provenance}};
}

// Missing keys keep their defaults so partial blocks can override presets.
FrontEndParams front_end_from_json(const nlohmann::json& j) {
  FrontEndParams p;
  p.a0 = j.value("a0", p.a0);
  p.d0 = j.value("d0", p.d0);
  p.g0 = j.value("g0", p.g0);
  p.g_minus = j.value("g_minus", p.g_minus);
  p.x_total = j.value("x_total", p.x_total);
  return p;
}

ThCycleParams th_cycle_from_json(const nlohmann::json& j) {
  ThCycleParams p = presets::th_cycle();
  p.a1 = j.value("a1", p.a1);
  p.d1 = j.value("d1", p.d1);
  p.k1 = j.value("k1", p.k1);
  p.a2 = j.value("a2", p.a2);
  p.d2 = j.value("d2", p.d2);
  p.k2 = j.value("k2", p.k2);
  p.p_total = j.value("p_total", p.p_total);
  return p;
}

IntegratorParams integrator_from_json(const nlohmann::json& j) {
  IntegratorParams p;
  p.a3 = j.value("a3", p.a3);
  p.d3 = j.value("d3", p.d3);
  p.k3 = j.value("k3", p.k3);
  p.a4 = j.value("a4", p.a4);
  p.d4 = j.value("d4", p.d4);
  p.k4 = j.value("k4", p.k4);
  p.j_total = j.value("j_total", p.j_total);
  p.ptilde_total = j.value("ptilde_total", p.ptilde_total);
  return p;
}

ReceiverParams receiver_params_from_json(const nlohmann::json& j) {
  try {
    ReceiverParams p = presets::receiver();
    p.provenance.clear();
    if (j.contains("front_end")) p.front = front_end_from_json(j.at("front_end"));
    if (j.contains("th_cycle")) p.th = th_cycle_from_json(j.at("th_cycle"));
    if (j.contains("integrator")) p.integrator = integrator_from_json(j.at("integrator"));
    if (j.contains("provenance"))
      p.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("receiver parameters: ") + e.what());
  }
}

void save_receiver_params(const ReceiverParams& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_json(p).dump(2) << '\n';
}

ReceiverParams load_receiver_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return receiver_params_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace enzyrx
