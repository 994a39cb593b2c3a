#include "grouprl.h"

#include <cstring>
#include <deque>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "grouprl/dynamics.hpp"
#include "grouprl/policy.hpp"
#include "grouprl/presets.hpp"
#include "grouprl/rng.hpp"
#include "grouprl/taskgen.hpp"
#include "grouprl/train.hpp"
#include "grouprl/verify.hpp"

namespace {

using namespace grouprl;

thread_local std::string g_last_error;

grl_status status_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kInvalidArgument: return GRL_ERR_INVALID_ARGUMENT;
    case ErrorCode::kInvalidData: return GRL_ERR_INVALID_DATA;
    case ErrorCode::kInconsistent: return GRL_ERR_INCONSISTENT;
    case ErrorCode::kUndefined: return GRL_ERR_UNDEFINED;
    case ErrorCode::kOutOfRegime: return GRL_ERR_OUT_OF_REGIME;
    case ErrorCode::kInstability: return GRL_ERR_INSTABILITY;
    case ErrorCode::kIo: return GRL_ERR_IO;
  }
  return GRL_ERR_UNKNOWN;
}

template <typename F>
grl_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return GRL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GRL_ERR_UNKNOWN;
  }
}

grl_status copy_out(const std::string& s, char* buf, size_t buflen) {
  if (!buf || buflen == 0 || s.size() + 1 > buflen) {
    g_last_error = "output buffer too small (" + std::to_string(s.size() + 1) + " bytes needed)";
    return GRL_ERR_BUFFER_TOO_SMALL;
  }
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return GRL_OK;
}

// ---- configuration strings --------------------------------------------------

std::map<std::string, std::string> parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

struct Cfg {
  std::map<std::string, std::string> kv;

  bool has(const std::string& k) const { return kv.count(k) != 0; }
  std::string str(const std::string& k, const std::string& dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  }
  double num(const std::string& k, double dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    try {
      return std::stod(it->second);
    } catch (...) {
      throw Error(ErrorCode::kInvalidArgument, "bad numeric value for " + k);
    }
  }
  long long integer(const std::string& k, long long dflt) const {
    auto it = kv.find(k);
    if (it == kv.end()) return dflt;
    try {
      return std::stoll(it->second);
    } catch (...) {
      throw Error(ErrorCode::kInvalidArgument, "bad integer value for " + k);
    }
  }
  std::vector<int> int_list(const std::string& k) const {
    std::vector<int> out;
    auto it = kv.find(k);
    if (it == kv.end()) return out;
    std::istringstream in(it->second);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
  }
};

GroupTable make_group(const std::string& kind, int n) {
  if (kind == "cyclic") return GroupTable::cyclic(n);
  if (kind == "symmetric") return GroupTable::symmetric(n);
  if (kind == "alternating") return GroupTable::alternating(n);
  throw Error(ErrorCode::kInvalidArgument, "unknown group kind: " + kind);
}

std::vector<int> lengths_from(const Cfg& cfg, int fallback_l1 = 0) {
  if (cfg.has("lengths.set")) return cfg.int_list("lengths.set");
  if (cfg.has("lengths.fixed")) return {int(cfg.integer("lengths.fixed", 5))};
  if (cfg.has("lengths.ratio"))
    return horizon_set(cfg.num("lengths.ratio", 3.0), int(cfg.integer("lengths.l1", 5)),
                       int(cfg.integer("lengths.lmax", 45)));
  if (fallback_l1 > 0) return {fallback_l1};
  return {};
}

Experiment experiment_from(const Cfg& cfg) {
  Experiment e;
  if (cfg.has("preset")) {
    const auto runs = preset_experiments(cfg.str("preset", ""));
    const int idx = int(cfg.integer("preset.index", 0));
    if (idx < 0 || idx >= static_cast<int>(runs.size()))
      throw Error(ErrorCode::kInvalidArgument, "preset.index out of range");
    e = runs[idx];
  } else {
    e.train.lengths = {5};
  }
  e.group_kind = cfg.str("group.kind", e.group_kind);
  e.group_n = int(cfg.integer("group.n", e.group_n));
  e.dpos = int(cfg.integer("task.dpos", e.dpos));
  e.space_seed = static_cast<std::uint64_t>(cfg.integer("task.space_seed", e.space_seed));
  e.cb = int(cfg.integer("policy.cb", e.cb));
  const auto lens = lengths_from(cfg);
  if (!lens.empty()) e.train.lengths = lens;
  e.train.eta = cfg.num("train.eta", e.train.eta);
  e.train.batch_size = int(cfg.integer("train.batch", e.train.batch_size));
  e.train.total_iters = cfg.integer("train.iters", e.train.total_iters);
  e.train.baseline_momentum = cfg.num("train.momentum", e.train.baseline_momentum);
  e.train.entropy_coef = cfg.num("train.entropy", e.train.entropy_coef);
  e.train.eval_cadence = cfg.integer("train.eval_cadence", e.train.eval_cadence);
  e.train.eval_batches = int(cfg.integer("train.eval_batches", e.train.eval_batches));
  e.train.eval_batch_size = int(cfg.integer("train.eval_batch_size", e.train.eval_batch_size));
  e.train.seed = static_cast<std::uint64_t>(cfg.integer("run.seed", e.train.seed));
  e.train.reduced_params = cfg.str("policy.parametrization", "full") == "reduced";
  e.train.sft = cfg.str("train.algo", "rl") == "sft";
  return e;
}

nlohmann::ordered_json report_to_json(const RegimeReport& rep,
                                      const std::vector<std::optional<long long>>& t_vis,
                                      const std::vector<std::optional<long long>>& t_mas) {
  nlohmann::ordered_json j;
  j["ratio"] = rep.ratio;
  j["lengths"] = rep.lengths;
  j["label"] = rep.label;
  j["statistic"] = rep.statistic;
  j["max_plateau"] = rep.max_plateau;
  j["max_plateau_censored"] = rep.max_plateau_censored;
  j["max_rise"] = rep.max_rise;
  auto opt_arr = [](const std::vector<std::optional<long long>>& v) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& o : v) {
      if (o)
        arr.push_back(*o);
      else
        arr.push_back(nullptr);
    }
    return arr;
  };
  j["t_vis"] = opt_arr(t_vis);
  j["t_mas"] = opt_arr(t_mas);
  nlohmann::ordered_json trs = nlohmann::ordered_json::array();
  for (const auto& tr : rep.transitions) {
    nlohmann::ordered_json o;
    o["index"] = tr.index;
    o["plateau"] = tr.plateau;
    o["censored"] = tr.plateau_censored;
    if (tr.rise)
      o["rise"] = *tr.rise;
    else
      o["rise"] = nullptr;
    trs.push_back(o);
  }
  j["transitions"] = trs;
  return j;
}

}  // namespace

// ---- handle definitions ------------------------------------------------------

struct grl_group {
  grouprl::GroupTable table;
};

struct grl_space {
  grouprl::PositionSpace space;
};

struct grl_trainer {
  std::unique_ptr<grouprl::GroupTable> table;
  std::unique_ptr<grouprl::PositionSpace> space;
  std::unique_ptr<grouprl::Tokenizer> tok;
  grouprl::MlpConfig mlp;
  std::unique_ptr<grouprl::Trainer> trainer;
  std::deque<std::string> records;
};

struct grl_dynamics {
  grouprl::ReducedConfig cfg;
  grouprl::PhaseTimeline timeline;
};

// ---- implementation ----------------------------------------------------------

extern "C" {

const char* grl_version(void) { return "grouprl 1.0.0"; }

const char* grl_last_error(void) { return g_last_error.c_str(); }

grl_status grl_group_create_cyclic(int n, grl_group** out) {
  return guarded([&] { *out = new grl_group{grouprl::GroupTable::cyclic(n)}; });
}

grl_status grl_group_create_permutation(const char* kind, int n, grl_group** out) {
  return guarded([&] {
    const std::string k = kind ? kind : "";
    if (k == "symmetric")
      *out = new grl_group{grouprl::GroupTable::symmetric(n)};
    else if (k == "alternating")
      *out = new grl_group{grouprl::GroupTable::alternating(n)};
    else
      throw grouprl::Error(grouprl::ErrorCode::kInvalidArgument,
                           "kind must be symmetric or alternating");
  });
}

void grl_group_free(grl_group* g) { delete g; }

int grl_group_order(const grl_group* g) { return g->table.order(); }
int grl_group_identity(const grl_group* g) { return g->table.identity(); }
int grl_group_compose(const grl_group* g, int a, int b) {
  return g->table.compose(static_cast<grouprl::Elem>(a), static_cast<grouprl::Elem>(b));
}
int grl_group_inverse(const grl_group* g, int a) {
  return g->table.inverse(static_cast<grouprl::Elem>(a));
}
int grl_group_act(const grl_group* g, int elem, int state) {
  return g->table.act(static_cast<grouprl::Elem>(elem), static_cast<grouprl::Elem>(state));
}
int grl_group_abelian(const grl_group* g) { return g->table.abelian() ? 1 : 0; }
int grl_group_simple(const grl_group* g) {
  const auto s = g->table.simple();
  return s ? (*s ? 1 : 0) : -1;
}

grl_status grl_space_create(int dpos, uint64_t seed, grl_space** out) {
  return guarded([&] { *out = new grl_space{grouprl::PositionSpace(dpos, seed)}; });
}

void grl_space_free(grl_space* s) { delete s; }
int grl_space_dpos(const grl_space* s) { return s->space.dpos(); }
int grl_space_align(const grl_space* s, int prompt_pos) { return s->space.align(prompt_pos); }

grl_status grl_sample_instance(const grl_group* g, const grl_space* s, int horizon,
                               uint64_t seed, int* transitions, int* prompt_pos, int* answer_pos,
                               int* y0, int* states) {
  return guarded([&] {
    auto rng = grouprl::make_stream(seed, 0x696e7374);
    const auto inst = grouprl::sample_instance(g->table, s->space, horizon, rng);
    for (int l = 0; l < horizon; ++l) {
      transitions[l] = inst.transitions[l];
      prompt_pos[l] = inst.prompt_pos[l];
      states[l] = inst.states[l];
    }
    for (int l = 0; l <= horizon; ++l) answer_pos[l] = inst.answer_pos[l];
    *y0 = inst.y0;
  });
}

grl_status grl_validate_instance(const grl_group* g, const grl_space* s, int horizon,
                                 const int* transitions, const int* prompt_pos,
                                 const int* answer_pos, int y0, const int* states, char* report,
                                 size_t report_len) {
  return guarded([&] {
    grouprl::Instance inst;
    inst.horizon = horizon;
    inst.y0 = static_cast<grouprl::Elem>(y0);
    for (int l = 0; l < horizon; ++l) {
      inst.transitions.push_back(static_cast<grouprl::Elem>(transitions[l]));
      inst.prompt_pos.push_back(prompt_pos[l]);
      inst.states.push_back(static_cast<grouprl::Elem>(states[l]));
    }
    for (int l = 0; l <= horizon; ++l) inst.answer_pos.push_back(answer_pos[l]);
    const auto violations = grouprl::validate_instance(inst, g->table, s->space);
    std::string joined;
    for (const auto& v : violations) {
      if (!joined.empty()) joined += "; ";
      joined += v;
    }
    const auto st = copy_out(joined, report, report_len);
    if (st != GRL_OK) throw grouprl::Error(grouprl::ErrorCode::kInvalidArgument, g_last_error);
  });
}

grl_status grl_trainer_create(const char* config, grl_trainer** out) {
  return guarded([&] {
    Cfg cfg{parse_config(config ? config : "")};
    const Experiment e = experiment_from(cfg);
    auto h = std::make_unique<grl_trainer>();
    h->table = std::make_unique<grouprl::GroupTable>(make_group(e.group_kind, e.group_n));
    h->space = std::make_unique<grouprl::PositionSpace>(e.dpos, e.space_seed);
    h->tok = std::make_unique<grouprl::Tokenizer>(h->table->order());
    h->mlp = grouprl::MlpConfig::make(e.cb, h->table->order());
    h->trainer =
        std::make_unique<grouprl::Trainer>(e.train, *h->table, *h->space, h->mlp, *h->tok);
    *out = h.release();
  });
}

void grl_trainer_free(grl_trainer* t) { delete t; }

grl_status grl_trainer_run(grl_trainer* t, long long iters) {
  return guarded([&] {
    t->trainer->run_chunk(iters, [&](const grouprl::EvalRecord& r) {
      t->records.push_back(r.to_json());
    });
  });
}

int grl_trainer_poll_record(grl_trainer* t, char* buf, size_t buflen) {
  if (t->records.empty()) return 0;
  if (copy_out(t->records.front(), buf, buflen) != GRL_OK) return -1;
  t->records.pop_front();
  return 1;
}

long long grl_trainer_iteration(const grl_trainer* t) { return t->trainer->state().iteration; }
long long grl_trainer_total_iters(const grl_trainer* t) {
  return t->trainer->config().total_iters;
}
int grl_trainer_num_lengths(const grl_trainer* t) {
  return static_cast<int>(t->trainer->config().lengths.size());
}
int grl_trainer_length(const grl_trainer* t, int idx) {
  return t->trainer->config().lengths[idx];
}
int grl_trainer_group_order(const grl_trainer* t) { return t->table->order(); }

grl_status grl_trainer_save_checkpoint(const grl_trainer* t, const char* path) {
  return guarded([&] { t->trainer->save_checkpoint(path); });
}

grl_status grl_trainer_load_checkpoint(grl_trainer* t, const char* path) {
  return guarded([&] { t->trainer->load_checkpoint(path); });
}

grl_status grl_dynamics_run(const char* config, grl_dynamics** out) {
  return guarded([&] {
    Cfg cfg{parse_config(config ? config : "")};
    grouprl::ReducedConfig rc;
    if (cfg.has("lengths.ratio") && !cfg.has("lengths.set") && !cfg.has("lengths.fixed")) {
      rc = grouprl::preset_reduced(cfg.num("lengths.ratio", 3.0));
      if (cfg.has("lengths.l1") || cfg.has("lengths.lmax"))
        rc.lengths = grouprl::horizon_set(cfg.num("lengths.ratio", 3.0),
                                          int(cfg.integer("lengths.l1", 3)),
                                          int(cfg.integer("lengths.lmax", 45)));
    } else {
      rc = grouprl::preset_reduced(3.0);
      const auto lens = lengths_from(cfg);
      if (!lens.empty()) rc.lengths = lens;
    }
    rc.d = int(cfg.integer("group.n", rc.d));
    rc.dpos = int(cfg.integer("task.dpos", rc.dpos));
    rc.cb = int(cfg.integer("policy.cb", rc.cb));
    rc.eta = cfg.num("dyn.eta", rc.eta);
    rc.max_steps = cfg.integer("dyn.steps", rc.max_steps);
    rc.mc_instances = int(cfg.integer("dyn.mc", rc.mc_instances));
    rc.fd_step = cfg.num("dyn.fd_step", rc.fd_step);
    rc.record_every = cfg.integer("dyn.record_every", rc.record_every);
    rc.q0 = cfg.num("dyn.q0", rc.q0);
    rc.r0 = cfg.num("dyn.r0", rc.r0);
    rc.stop_when_mastered = cfg.integer("dyn.stop_mastered", rc.stop_when_mastered ? 1 : 0) != 0;
    rc.seed = static_cast<std::uint64_t>(cfg.integer("run.seed", rc.seed));
    const std::string kind = cfg.str("group.kind", "cyclic");
    const auto table = make_group(kind, rc.d);
    auto h = std::make_unique<grl_dynamics>();
    h->cfg = rc;
    h->timeline = grouprl::integrate_reduced(rc, table);
    *out = h.release();
  });
}

void grl_dynamics_free(grl_dynamics* dyn) { delete dyn; }

int grl_dynamics_num_lengths(const grl_dynamics* dyn) {
  return static_cast<int>(dyn->timeline.lengths.size());
}
int grl_dynamics_length(const grl_dynamics* dyn, int idx) { return dyn->timeline.lengths[idx]; }
long long grl_dynamics_rows(const grl_dynamics* dyn) {
  return static_cast<long long>(dyn->timeline.rows.size());
}
int grl_dynamics_diverged(const grl_dynamics* dyn) { return dyn->timeline.diverged ? 1 : 0; }

grl_status grl_dynamics_row(const grl_dynamics* dyn, long long idx, long long* t, double* q,
                            double* r, double* j_center, double* j_exact, double* grad_q) {
  return guarded([&] {
    if (idx < 0 || idx >= static_cast<long long>(dyn->timeline.rows.size()))
      throw grouprl::Error(grouprl::ErrorCode::kInvalidArgument, "row index out of range");
    const auto& row = dyn->timeline.rows[static_cast<std::size_t>(idx)];
    if (t) *t = row.t;
    if (q) *q = row.q;
    if (r) *r = row.r;
    for (std::size_t i = 0; i < dyn->timeline.lengths.size(); ++i) {
      if (j_center) j_center[i] = row.j_center[i];
      if (j_exact) j_exact[i] = row.j_exact[i];
      if (grad_q) grad_q[i] = row.gq[i];
    }
  });
}

grl_status grl_dynamics_report_json(const grl_dynamics* dyn, double ratio,
                                    double grokking_threshold, char* buf, size_t buflen) {
  return guarded([&] {
    const auto rep = grouprl::regime_report(dyn->timeline, ratio, grokking_threshold);
    const auto j = report_to_json(rep, dyn->timeline.t_vis, dyn->timeline.t_mas);
    const auto st = copy_out(j.dump(), buf, buflen);
    if (st != GRL_OK) throw grouprl::Error(grouprl::ErrorCode::kInvalidArgument, g_last_error);
  });
}

grl_status grl_critical_q(int horizon, double xi, int d, int cb, int attention_mode,
                          double* value, double* paper_form, double* first_order) {
  return guarded([&] {
    const auto cq = grouprl::critical_q(horizon, xi, d, cb, attention_mode != 0);
    if (value) *value = cq.value;
    if (paper_form) *paper_form = cq.paper_form;
    if (first_order) *first_order = cq.first_order;
  });
}

grl_status grl_analyze_curves(int d, int num_lengths, const int* lengths, long long num_points,
                              const long long* iterations, const double* rewards, double ratio,
                              double grokking_threshold, char* buf, size_t buflen) {
  return guarded([&] {
    std::vector<int> lens(lengths, lengths + num_lengths);
    std::vector<long long> iters(iterations, iterations + num_points);
    std::vector<std::vector<double>> curves(num_lengths);
    for (int li = 0; li < num_lengths; ++li)
      curves[li].assign(rewards + li * num_points, rewards + (li + 1) * num_points);
    const auto tl = grouprl::analyze_curves(lens, iters, curves, d);
    const auto rep = grouprl::regime_report(tl, ratio, grokking_threshold);
    const auto j = report_to_json(rep, tl.t_vis, tl.t_mas);
    const auto st = copy_out(j.dump(), buf, buflen);
    if (st != GRL_OK) throw grouprl::Error(grouprl::ErrorCode::kInvalidArgument, g_last_error);
  });
}

grl_status grl_verify(int full_level, const char* data_dir, uint64_t seed, grl_check_cb cb,
                      void* user, int* failures) {
  return guarded([&] {
    grouprl::verify::Options opts;
    opts.full = full_level != 0;
    if (data_dir) opts.data_dir = data_dir;
    opts.seed = seed;
    int failed = 0;
    const auto results = grouprl::verify::run_suite(
        opts, [&](const grouprl::verify::CheckResult& r) {
          if (cb) cb(r.name.c_str(), r.pass ? 1 : 0, r.detail.c_str(), user);
        });
    for (const auto& r : results)
      if (!r.pass) ++failed;
    if (failures) *failures = failed;
  });
}

uint64_t grl_config_hash(const char* config) {
  const auto kv = parse_config(config ? config : "");
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over canonicalized pairs
  auto mix = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : kv) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  return h;
}

}  // extern "C"
