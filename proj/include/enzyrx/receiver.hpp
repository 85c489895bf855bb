#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "enzyrx/demod.hpp"
#include "enzyrx/network.hpp"
#include "enzyrx/params.hpp"
#include "enzyrx/ssa.hpp"

namespace enzyrx {

// The receiver molecule carries the front-end site and the TH site.
enum class XSite { x, xk, xs };        // X, XK, X*
enum class YSite { y, yk, ys, ys_p };  // Y, YK, Y*, Y*P

inline constexpr std::array<XSite, 3> kXSites{XSite::x, XSite::xk, XSite::xs};
inline constexpr std::array<YSite, 4> kYSites{YSite::y, YSite::yk, YSite::ys, YSite::ys_p};

std::string_view to_string(XSite s);
std::string_view to_string(YSite s);

enum class IntegratorMode {
  // J binds a free (X*,Y*) molecule and both sites freeze until release.
  pair_and_suspend,
  // J + X*Y* -> J* + X*Y* at k3/K_M3 with no complex.
  catalytic,
};

struct ReceiverPlacement {
  std::string name = "rx";
  Voxel voxel = presets::kRxVoxel;
  ReceiverParams params = presets::receiver();
  IntegratorMode mode = IntegratorMode::pair_and_suspend;
};

// Species handles of one receiver inside a NetworkSpec.
struct ReceiverSpecies {
  std::string name;
  std::size_t voxel = 0;
  std::array<std::array<SpeciesId, 4>, 3> xy{};  // [x-site][y-site]
  std::optional<SpeciesId> pair;                 // JX*Y*, pair-and-suspend only
  SpeciesId p = 0;
  SpeciesId j = 0;
  SpeciesId js = 0;
  SpeciesId js_pt = 0;
  SpeciesId pt = 0;
  std::size_t first_reaction = 0;  // index into NetworkSpec::reactions
  std::size_t reaction_count = 0;

  SpeciesId at(XSite x, YSite y) const {
    return xy[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
  }
};

// Appends the receiver species, 40 channels (38 when catalytic) and its four
// conservation laws. The signal species must be declared already.
ReceiverSpecies build_receiver(NetworkSpec& net, SpeciesId signal, const ReceiverPlacement& p);

// Receivers share the signal field; throws UnsupportedConfiguration when two
// share a voxel or a name.
std::vector<ReceiverSpecies> place_multiple(NetworkSpec& net, SpeciesId signal,
                                            std::span<const ReceiverPlacement> receivers);

// Bare front-end X + K <-> XK -> X* + K, X* -> X in one voxel.
struct FrontEndSpecies {
  std::string name;
  std::size_t voxel = 0;
  SpeciesId x = 0;
  SpeciesId xk = 0;
  SpeciesId xs = 0;
};

FrontEndSpecies build_front_end(NetworkSpec& net, SpeciesId signal, std::size_t voxel,
                                const FrontEndParams& p, const std::string& name = "rx");

// Bare TH-cycle with Y_T free Y and P_T free P in one voxel.
struct ThCycleSpecies {
  SpeciesId y = 0;
  SpeciesId yk = 0;
  SpeciesId ys = 0;
  SpeciesId ys_p = 0;
  SpeciesId p = 0;
};

ThCycleSpecies build_th_cycle(NetworkSpec& net, SpeciesId signal, std::size_t voxel,
                              const ThCycleParams& th, std::int64_t y_total,
                              const std::string& name = "th");

// Population groups of one placed receiver on the compiled network.
struct ReceiverObservables {
  std::string name;
  std::vector<PopIndex> xs;     // x-site X*, the pair included
  std::vector<PopIndex> xk;     // x-site XK
  std::vector<PopIndex> ys;     // y-site Y*, the pair included
  std::vector<PopIndex> yk;     // y-site YK
  std::vector<PopIndex> xs_ys;  // both X* and Y*, the pair included
  std::vector<PopIndex> xy_all;
  std::optional<PopIndex> js;   // free J*, absent for a bare front-end
  PopIndex k = kNoPop;          // free signal in the receiver voxel
  std::int64_t x_total = 0;

  std::vector<PopIndex> all() const;
};

ReceiverObservables observe(const CompiledNetwork& net, const ReceiverSpecies& r,
                            SpeciesId signal, std::int64_t x_total);
ReceiverObservables observe(const CompiledNetwork& net, const FrontEndSpecies& r,
                            SpeciesId signal, std::int64_t x_total);

// Every X-Y molecule unmodified, every enzyme and substrate free.
void set_initial(const CompiledNetwork& net, const ReceiverSpecies& r, const ReceiverParams& p,
                 SystemState& state);
void set_initial(const CompiledNetwork& net, const FrontEndSpecies& r, const FrontEndParams& p,
                 SystemState& state);

enum class ReceiverKind { front_end, full };

// Medium, one transmitter sending a fixed symbol, and receivers.
struct SystemConfig {
  VoxelLattice lattice = presets::medium();
  TxSetting tx = presets::tx_setting_1();
  int symbol = 1;
  Voxel tx_voxel = presets::kTxVoxel;
  std::vector<ReceiverPlacement> receivers{ReceiverPlacement{}};
  ReceiverKind kind = ReceiverKind::full;
};

struct System {
  std::shared_ptr<const CompiledNetwork> net;
  SpeciesId signal = 0;
  std::vector<ReceiverObservables> receivers;
  SystemState initial;

  // Populations worth an event record: the receivers and the signal in their
  // voxels.
  RecordSpec record_spec() const;
};

System build_system(const SystemConfig& cfg);

// Free J* count of a receiver sampled on the grid, labelled as the circuit
// estimator.
LlrTrace circuit_output(const Trajectory& traj, const ReceiverObservables& r,
                        std::span<const double> grid);

// Sum of the receiver's X* populations as an activation history.
Observation observed_activations(const Trajectory& traj, const ReceiverObservables& r);

}  // namespace enzyrx
