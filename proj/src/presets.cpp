#include "grouprl/presets.hpp"

namespace grouprl {

namespace {

Experiment base_z96() {
  Experiment e;
  e.group_kind = "cyclic";
  e.group_n = 96;
  e.dpos = 64;
  e.cb = 5;  // puts L1 = 5 at the critical horizon
  e.train.eta = 32.0;
  e.train.batch_size = 512;
  e.train.baseline_momentum = 0.95;
  e.train.entropy_coef = 1e-3;
  e.train.eval_cadence = 250;
  e.train.eval_batches = 30;
  e.train.eval_batch_size = 512;
  e.train.seed = 1;
  return e;
}

}  // namespace

std::vector<Experiment> preset_experiments(const std::string& name) {
  std::vector<Experiment> out;
  if (name == "fig4") {
    for (int L : {5, 15, 45}) {
      Experiment e = base_z96();
      e.train.lengths = {L};
      e.train.total_iters = 3000;
      out.push_back(e);
    }
  } else if (name == "fig5a") {
    Experiment e = base_z96();
    e.train.lengths = horizon_set(3, 5, 45);  // {5, 15, 45}
    e.train.total_iters = 6000;
    out.push_back(e);
  } else if (name == "fig5b") {
    Experiment e = base_z96();
    e.train.lengths = horizon_set(7, 5, 35);  // {5, 35}
    e.train.total_iters = 6000;               // same budget as fig5a
    out.push_back(e);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown preset: " + name);
  }
  return out;
}

ReducedConfig preset_reduced(double ratio) {
  ReducedConfig cfg;
  cfg.d = 96;
  cfg.dpos = 64;
  cfg.cb = 3;
  cfg.lengths = horizon_set(ratio, 3, 45);
  cfg.eta = 64.0;
  cfg.max_steps = 60000;
  cfg.mc_instances = 8;
  cfg.seed = 1;
  cfg.q0 = 0.1;
  cfg.stop_when_mastered = true;
  cfg.record_every = 1;
  return cfg;
}

}  // namespace grouprl
