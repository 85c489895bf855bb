#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "enzyrx/network.hpp"

namespace enzyrx {

// Front-end cycle X + K <-> XK -> X* + K, X* -> X.
struct FrontEndParams {
  double a0 = 1e-3;  // um^3/s
  double d0 = 20.0;  // 1/s
  double g0 = 20.0;  // 1/s
  double g_minus = 1.0;
  std::int64_t x_total = 37;

  double hm0() const noexcept { return (d0 + g0) / a0; }
  double gamma() const noexcept { return g0 / g_minus; }
  // d0, g0 > g- >> a0, with ">>" read as at least tenfold.
  bool time_scale_separated() const noexcept {
    return d0 > g_minus && g0 > g_minus && g_minus >= 10.0 * a0;
  }
};

// TH-cycle Y + K <-> YK -> Y* + K, Y* + P <-> Y*P -> Y + P.
struct ThCycleParams {
  double a1 = 0.0;
  double d1 = 0.0;
  double k1 = 0.0;
  double a2 = 0.0;
  double d2 = 0.0;
  double k2 = 0.0;
  double p_total = 0.0;  // count

  double hm1() const noexcept { return (d1 + k1) / a1; }
  double hm2() const noexcept { return (d2 + k2) / a2; }
};

// Integrator J + X*Y* <-> JX*Y* -> J* + X*Y*, J* + P~ <-> J*P~ -> J + P~.
struct IntegratorParams {
  double a3 = 2e-4;
  double d3 = 100.0;
  double k3 = 100.0;
  double a4 = 2e-6;
  double d4 = 1.0;
  double k4 = 1.0;
  std::int64_t j_total = 185;
  std::int64_t ptilde_total = 30;

  double km3() const noexcept { return (d3 + k3) / a3; }
  double km4() const noexcept { return (d4 + k4) / a4; }
};

struct TxSetting {
  std::string name;
  double r_tx = 3.38;
  std::array<double, 2> mrna{};  // symbol 0, symbol 1

  double source_rate(int symbol) const { return r_tx * mrna.at(static_cast<std::size_t>(symbol)); }
};

// Everything one receiver needs; the designer writes it, the circuit builder
// reads it. X_T also fixes Y_T since X and Y live on one molecule.
struct ReceiverParams {
  FrontEndParams front;
  ThCycleParams th;
  IntegratorParams integrator;
  std::map<std::string, std::string> provenance;
};

nlohmann::json to_json(const FrontEndParams& p);
nlohmann::json to_json(const ThCycleParams& p);
nlohmann::json to_json(const IntegratorParams& p);
nlohmann::json to_json(const ReceiverParams& p);
FrontEndParams front_end_from_json(const nlohmann::json& j);
ThCycleParams th_cycle_from_json(const nlohmann::json& j);
IntegratorParams integrator_from_json(const nlohmann::json& j);
ReceiverParams receiver_params_from_json(const nlohmann::json& j);
void save_receiver_params(const ReceiverParams& p, const std::filesystem::path& path);
ReceiverParams load_receiver_params(const std::filesystem::path& path);

namespace presets {

inline constexpr std::array<int, 3> kMediumDims{6, 6, 3};
inline constexpr double kVoxelEdge = 1.0 / 3.0;
inline constexpr double kDiffusion = 1.0;
inline constexpr Voxel kTxVoxel{2, 3, 2};
inline constexpr Voxel kRxVoxel{5, 3, 2};
inline constexpr double kSymbolDuration = 30.0;
inline constexpr double kDecisionThreshold = 10.0;
inline constexpr double kDesignK1 = 250.0;

inline FrontEndParams front_end() { return {}; }

// Published TH-cycle constants for tx-setting-1.
inline ThCycleParams th_cycle() { return {0.0463, 250.0, 250.0, 24.24, 39.24, 39.24, 10.0}; }

inline IntegratorParams integrator() { return {}; }

inline TxSetting tx_setting_1() { return {"tx-setting-1", 3.38, {96.0, 320.0}}; }
inline TxSetting tx_setting_2() { return {"tx-setting-2", 3.38, {32.0, 96.0}}; }

inline ReceiverParams receiver() {
  return {front_end(), th_cycle(), integrator(), {{"source", "published constants"}}};
}

inline VoxelLattice medium() { return build_medium(kMediumDims, kVoxelEdge, kDiffusion); }

}  // namespace presets

}  // namespace enzyrx
