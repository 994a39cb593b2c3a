#pragma once

#include <string>
#include <vector>

#include "grouprl/dynamics.hpp"
#include "grouprl/train.hpp"

namespace grouprl {

/// A fully specified training experiment: group, dimensions, and trainer
/// configuration.  Presets encode the reproduction protocol; every field can
/// be overridden through the key=value configuration surface.
struct Experiment {
  std::string group_kind = "cyclic";  // cyclic | symmetric | alternating
  int group_n = 96;
  int dpos = 64;
  int cb = 5;
  std::uint64_t space_seed = 9001;    // freezes the alignment permutation
  TrainConfig train;
};

/// Named presets:
///   fig4  — fixed-length runs at L in {5, 15, 45} (one trainer per length)
///   fig5a — mixed lengths {5, 15, 45} (ratio 3)
///   fig5b — mixed lengths {5, 35} (ratio 7)
/// Calibrated for batch 512, EMA momentum 0.95, entropy coefficient 1e-3.
std::vector<Experiment> preset_experiments(const std::string& name);

/// Reduced-dynamics preset used by the phase-structure studies: Z96, C_B = 3,
/// horizons from L1 = 3 up to 45.  q0 sits slightly off the symmetric point,
/// which is an exact stationary point of the expected dynamics on abelian
/// groups.
ReducedConfig preset_reduced(double ratio);

}  // namespace grouprl
