// grouprl command-line front end.
//
// Subcommands:
//   gen      sample a reasoning-instance corpus to a line-delimited file
//   train    run REINFORCE/SFT training, writing metrics JSONL + checkpoints + SVG plots
//   analyze  detect visible/mastered transitions and the grokking/relay regime
//   scan     sweep the difficulty ratio with the reduced-dynamics integrator
//   verify   run the invariant suites (fast) or the full acceptance table
//
// The binary drives everything through the C API in grouprl.h.  Worker
// parallelism is capped by the GROUP_RLVR_THREADS environment variable.

#include <grouprl.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitVerify = 3;
constexpr int kExitInstability = 4;

[[noreturn]] void die(int code, const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  std::exit(code);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) die(kExitConfig, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Flat key=value configuration with optional [section] headers; sections
// prefix the keys that follow ("[train]\neta = 2" becomes "train.eta = 2").
std::string canonical_config(const std::string& text) {
  std::istringstream in(text);
  std::string line, section, out;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) die(kExitConfig, "bad config line: " + t);
    std::string key = trim(t.substr(0, eq));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    out += key + " = " + trim(t.substr(eq + 1)) + "\n";
  }
  return out;
}

void check(grl_status st, const std::string& what) {
  if (st == GRL_OK) return;
  const int code = (st == GRL_ERR_INSTABILITY) ? kExitInstability : kExitConfig;
  die(code, what + ": " + grl_last_error());
}

// ---------------------------------------------------------------- svg plots

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Minimal deterministic polyline chart: axes, ticks, legend, fixed palette.
void write_svg(const std::string& path, const std::string& title, const std::string& x_label,
               const std::string& y_label, const std::vector<Series>& series, double y_min = 0.0,
               double y_max = 1.0) {
  const int w = 760, h = 480, ml = 64, mr = 160, mt = 40, mb = 48;
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  double x_min = 0.0, x_max = 1.0;
  bool first = true;
  for (const auto& s : series)
    for (double v : s.x) {
      if (first) {
        x_min = x_max = v;
        first = false;
      }
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;
  auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb); };
  char buf[256];
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"480\" "
         "viewBox=\"0 0 760 480\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"760\" height=\"480\" fill=\"white\"/>\n";
  snprintf(buf, sizeof buf,
           "<text x=\"%d\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">%s</text>\n",
           (ml + w - mr) / 2, title.c_str());
  svg += buf;
  // axes
  snprintf(buf, sizeof buf,
           "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", ml, h - mb,
           w - mr, h - mb);
  svg += buf;
  snprintf(buf, sizeof buf,
           "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", ml, mt, ml,
           h - mb);
  svg += buf;
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 5.0;
    const double yv = y_min + (y_max - y_min) * i / 5.0;
    snprintf(buf, sizeof buf,
             "<text x=\"%.1f\" y=\"%d\" text-anchor=\"middle\">%.6g</text>\n", px(xv), h - mb + 18,
             xv);
    svg += buf;
    snprintf(buf, sizeof buf,
             "<text x=\"%d\" y=\"%.1f\" text-anchor=\"end\">%.6g</text>\n", ml - 6, py(yv) + 4,
             yv);
    svg += buf;
    snprintf(buf, sizeof buf,
             "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"#dddddd\"/>\n", ml,
             py(yv), w - mr, py(yv));
    svg += buf;
  }
  snprintf(buf, sizeof buf,
           "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">%s</text>\n", (ml + w - mr) / 2,
           h - 10, x_label.c_str());
  svg += buf;
  snprintf(buf, sizeof buf,
           "<text x=\"16\" y=\"%d\" transform=\"rotate(-90 16 %d)\" "
           "text-anchor=\"middle\">%s</text>\n",
           (mt + h - mb) / 2, (mt + h - mb) / 2, y_label.c_str());
  svg += buf;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = palette[si % 6];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]),
               py(std::min(std::max(s.y[i], y_min), y_max)));
      pts += buf;
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.6\" points=\"" + pts + "\"/>\n";
    snprintf(buf, sizeof buf,
             "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"%s\" stroke-width=\"2\"/>"
             "<text x=\"%d\" y=\"%d\">%s</text>\n",
             w - mr + 12, mt + 16 + int(si) * 18, w - mr + 34, mt + 16 + int(si) * 18, color,
             w - mr + 40, mt + 20 + int(si) * 18, s.label.c_str());
    svg += buf;
  }
  svg += "</svg>\n";
  std::ofstream out(path);
  if (!out) die(kExitConfig, "cannot write " + path);
  out << svg;
}

// ---------------------------------------------------------------- manifest

struct Manifest {
  Manifest(std::string cmd, std::string cfg) : command(std::move(cmd)), config(std::move(cfg)) {}

  std::string command;
  std::string config;
  std::vector<std::string> files;
  std::chrono::system_clock::time_point start = std::chrono::system_clock::now();

  void write(const fs::path& dir) const {
    ordered_json j;
    j["artifact"] = grl_version();
    j["command"] = command;
    char hash[32];
    snprintf(hash, sizeof hash, "%016llx",
             static_cast<unsigned long long>(grl_config_hash(config.c_str())));
    j["config_hash"] = hash;
    const auto to_s = [](std::chrono::system_clock::time_point tp) {
      const std::time_t t = std::chrono::system_clock::to_time_t(tp);
      char buf[64];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
      return std::string(buf);
    };
    j["started"] = to_s(start);
    j["finished"] = to_s(std::chrono::system_clock::now());
    j["files"] = files;
    std::ofstream out(dir / "manifest.json");
    out << j.dump(2) << "\n";
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) die(kExitConfig, "cannot write " + path.string());
  out << text;
}

// ---------------------------------------------------------------- commands

struct CommonArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir = "runs/out";
  long long seed = -1;
  std::string data_dir = "data";
};

std::string resolve_config(const CommonArgs& a, const std::string& extra = "") {
  std::string cfg;
  if (!a.preset.empty()) cfg += "preset = " + a.preset + "\n";
  if (!a.config_path.empty()) cfg += canonical_config(slurp(a.config_path));
  if (a.seed >= 0) cfg += "run.seed = " + std::to_string(a.seed) + "\n";
  cfg += extra;
  return cfg;
}

int cmd_gen(const CommonArgs& a, int count, int horizon) {
  const std::string cfg = resolve_config(a);
  // parse the handful of keys gen needs from the canonical text
  std::map<std::string, std::string> kv;
  {
    std::istringstream in(cfg);
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto x = s.find_first_not_of(" \t");
        const auto y = s.find_last_not_of(" \t");
        return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
      };
      kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }
  const std::string kind = kv.count("group.kind") ? kv["group.kind"] : "cyclic";
  const int n = kv.count("group.n") ? std::stoi(kv["group.n"]) : 96;
  const int dpos = kv.count("task.dpos") ? std::stoi(kv["task.dpos"]) : 64;
  const long long space_seed = kv.count("task.space_seed") ? std::stoll(kv["task.space_seed"]) : 9001;
  const long long seed = kv.count("run.seed") ? std::stoll(kv["run.seed"]) : 1;
  if (kv.count("gen.horizon")) horizon = std::stoi(kv["gen.horizon"]);
  if (kv.count("gen.count")) count = std::stoi(kv["gen.count"]);

  grl_group* group = nullptr;
  if (kind == "cyclic")
    check(grl_group_create_cyclic(n, &group), "group");
  else
    check(grl_group_create_permutation(kind.c_str(), n, &group), "group");
  grl_space* space = nullptr;
  check(grl_space_create(dpos, static_cast<uint64_t>(space_seed), &space), "position space");

  fs::create_directories(a.out_dir);
  Manifest man{"gen", cfg};
  const fs::path path = fs::path(a.out_dir) / "corpus.txt";
  std::ofstream out(path);
  if (!out) die(kExitConfig, "cannot write " + path.string());
  out << "# grouprl-corpus v1 group=" << kind << ":" << n << " dpos=" << dpos
      << " horizon=" << horizon << " count=" << count << " seed=" << seed << "\n";
  out << "# fields: horizon y0 | transitions | prompt_positions | answer_positions\n";
  std::vector<int> ts(horizon), xp(horizon), xa(horizon + 1), ys(horizon);
  for (int i = 0; i < count; ++i) {
    int y0 = 0;
    check(grl_sample_instance(group, space, horizon, static_cast<uint64_t>(seed) * 1000003ULL + i,
                              ts.data(), xp.data(), xa.data(), &y0, ys.data()),
          "sample instance");
    char report[256];
    check(grl_validate_instance(group, space, horizon, ts.data(), xp.data(), xa.data(), y0,
                                ys.data(), report, sizeof report),
          "validate instance");
    if (report[0] != '\0') die(kExitConfig, std::string("generated instance invalid: ") + report);
    out << horizon << " " << y0 << " |";
    for (int v : ts) out << " " << v;
    out << " |";
    for (int v : xp) out << " " << v;
    out << " |";
    for (int v : xa) out << " " << v;
    out << "\n";
  }
  out.close();
  man.files.push_back("corpus.txt");
  man.write(a.out_dir);
  std::cout << "wrote " << count << " instances to " << path.string() << "\n";
  grl_space_free(space);
  grl_group_free(group);
  return 0;
}

struct RunData {
  std::vector<int> lengths;
  std::vector<long long> iters;
  std::vector<std::vector<double>> success, greedy, hits;
  int group_order = 96;
};

RunData run_one_training(const std::string& cfg, const fs::path& metrics_path,
                         const fs::path& ckpt_path) {
  grl_trainer* tr = nullptr;
  check(grl_trainer_create(cfg.c_str(), &tr), "trainer");
  RunData rd;
  rd.group_order = grl_trainer_group_order(tr);
  const int nl = grl_trainer_num_lengths(tr);
  for (int i = 0; i < nl; ++i) rd.lengths.push_back(grl_trainer_length(tr, i));
  rd.success.resize(nl);
  rd.greedy.resize(nl);
  rd.hits.resize(nl);
  std::ofstream metrics(metrics_path);
  if (!metrics) die(kExitConfig, "cannot write " + metrics_path.string());
  std::vector<char> buf(1 << 16);
  const long long total = grl_trainer_total_iters(tr);
  long long last_echo = -1;
  while (grl_trainer_iteration(tr) < total) {
    const grl_status st = grl_trainer_run(tr, 100);
    if (st == GRL_ERR_INSTABILITY) {
      std::cerr << "training diverged: " << grl_last_error() << "\n";
      metrics.close();
      grl_trainer_free(tr);
      std::exit(kExitInstability);
    }
    check(st, "train");
    while (grl_trainer_poll_record(tr, buf.data(), buf.size()) == 1) {
      metrics << buf.data() << "\n";
      const json rec = json::parse(buf.data());
      rd.iters.push_back(rec["iteration"].get<long long>());
      for (int i = 0; i < nl; ++i) {
        rd.success[i].push_back(rec["success"][i].get<double>());
        rd.greedy[i].push_back(rec["greedy_success"][i].get<double>());
        rd.hits[i].push_back(rec["hit_rate"][i].get<double>());
      }
      if (rd.iters.back() - last_echo >= 500 || grl_trainer_iteration(tr) >= total) {
        last_echo = rd.iters.back();
        std::cout << "  t=" << rd.iters.back();
        for (int i = 0; i < nl; ++i)
          std::cout << "  L" << rd.lengths[i] << " success=" << rd.success[i].back()
                    << " hit=" << rd.hits[i].back();
        std::cout << "\n";
      }
    }
  }
  check(grl_trainer_save_checkpoint(tr, ckpt_path.string().c_str()), "checkpoint");
  grl_trainer_free(tr);
  return rd;
}

int cmd_train(const CommonArgs& a) {
  fs::create_directories(a.out_dir);
  int preset_runs = 1;
  if (a.preset == "fig4") preset_runs = 3;
  std::vector<RunData> runs;
  Manifest man{"train", resolve_config(a)};
  write_text(fs::path(a.out_dir) / "config.txt", man.config);
  man.files.push_back("config.txt");
  for (int r = 0; r < preset_runs; ++r) {
    const std::string cfg =
        resolve_config(a, preset_runs > 1 ? "preset.index = " + std::to_string(r) + "\n" : "");
    const std::string tag = preset_runs > 1 ? "_run" + std::to_string(r) : "";
    std::cout << "run " << (r + 1) << "/" << preset_runs << "\n";
    runs.push_back(run_one_training(cfg, fs::path(a.out_dir) / ("metrics" + tag + ".jsonl"),
                                    fs::path(a.out_dir) / ("checkpoint" + tag + ".txt")));
    man.files.push_back("metrics" + tag + ".jsonl");
    man.files.push_back("checkpoint" + tag + ".txt");
  }
  // overlaid per-length curves across all runs, one SVG per metric family
  std::vector<Series> s_success, s_hits, s_greedy;
  for (const auto& rd : runs)
    for (std::size_t i = 0; i < rd.lengths.size(); ++i) {
      Series s;
      s.label = "L=" + std::to_string(rd.lengths[i]);
      for (std::size_t k = 0; k < rd.iters.size(); ++k) s.x.push_back(double(rd.iters[k]));
      s.y = rd.success[i];
      s_success.push_back(s);
      s.y = rd.hits[i];
      s_hits.push_back(s);
      s.y = rd.greedy[i];
      s_greedy.push_back(s);
    }
  write_svg((fs::path(a.out_dir) / "reward.svg").string(), "average reward (sampled rollouts)",
            "iteration", "success rate", s_success);
  write_svg((fs::path(a.out_dir) / "hit_rate.svg").string(), "peak attention-hit rate",
            "iteration", "hit rate", s_hits);
  write_svg((fs::path(a.out_dir) / "greedy.svg").string(), "greedy-decoding success", "iteration",
            "success rate", s_greedy);
  man.files.push_back("reward.svg");
  man.files.push_back("hit_rate.svg");
  man.files.push_back("greedy.svg");
  man.write(a.out_dir);
  std::cout << "outputs in " << a.out_dir << "\n";
  return 0;
}

int cmd_analyze(const CommonArgs& a, const std::vector<std::string>& files, double ratio,
                double grok_threshold) {
  if (files.empty()) die(kExitConfig, "analyze needs at least one metrics file");
  std::vector<int> lengths;
  std::vector<long long> iters;
  std::vector<std::vector<double>> curves;
  int d = 96;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) die(kExitConfig, "cannot read " + file);
    std::vector<long long> file_iters;
    std::vector<std::vector<double>> file_curves;
    std::vector<int> file_lengths;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const std::exception& e) {
        die(kExitConfig, file + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
      }
      if (file_lengths.empty()) {
        for (const auto& l : rec["lengths"]) file_lengths.push_back(l.get<int>());
        file_curves.resize(file_lengths.size());
      }
      file_iters.push_back(rec["iteration"].get<long long>());
      for (std::size_t i = 0; i < file_lengths.size(); ++i)
        file_curves[i].push_back(rec["success"][i].get<double>());
    }
    if (file_iters.empty()) die(kExitConfig, file + ": no records");
    if (iters.empty())
      iters = file_iters;
    else if (iters != file_iters)
      die(kExitConfig, "metrics files have different iteration axes; analyze them separately");
    for (std::size_t i = 0; i < file_lengths.size(); ++i) {
      lengths.push_back(file_lengths[i]);
      curves.push_back(file_curves[i]);
    }
  }
  // flatten row-major for the C call
  std::vector<double> flat;
  for (const auto& c : curves) flat.insert(flat.end(), c.begin(), c.end());
  std::vector<char> buf(1 << 16);
  check(grl_analyze_curves(d, int(lengths.size()), lengths.data(), (long long)iters.size(),
                           iters.data(), flat.data(), ratio, grok_threshold, buf.data(),
                           buf.size()),
        "analyze");
  const json rep = json::parse(buf.data());
  std::cout << "horizons:";
  for (int l : lengths) std::cout << " " << l;
  std::cout << "\n";
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    std::cout << "  L=" << lengths[i] << "  t_vis=";
    if (rep["t_vis"][i].is_null())
      std::cout << "-";
    else
      std::cout << rep["t_vis"][i].get<long long>();
    std::cout << "  t_mas=";
    if (rep["t_mas"][i].is_null())
      std::cout << "-";
    else
      std::cout << rep["t_mas"][i].get<long long>();
    std::cout << "\n";
  }
  for (const auto& tr : rep["transitions"]) {
    std::cout << "  transition " << tr["index"].get<int>() << ": plateau "
              << tr["plateau"].get<long long>() << (tr["censored"].get<bool>() ? " (censored)" : "")
              << ", rise ";
    if (tr["rise"].is_null())
      std::cout << "-";
    else
      std::cout << tr["rise"].get<long long>();
    std::cout << "\n";
  }
  std::cout << "regime: " << rep["label"].get<std::string>()
            << " (statistic " << rep["statistic"].get<double>() << ")\n";
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    write_text(fs::path(a.out_dir) / "analysis.json", rep.dump(2) + "\n");
    Manifest man{"analyze", resolve_config(a)};
    man.files.push_back("analysis.json");
    man.write(a.out_dir);
  }
  return 0;
}

int cmd_scan(const CommonArgs& a, const std::vector<double>& grid, double grok_threshold) {
  if (grid.empty()) die(kExitConfig, "scan needs a nonempty ratio grid");
  fs::create_directories(a.out_dir);
  Manifest man{"scan", resolve_config(a)};
  std::ostringstream summary;
  summary << "ratio,max_plateau,censored,max_rise,label,statistic\n";
  std::vector<Series> plateau_series(1);
  plateau_series[0].label = "max plateau";
  std::vector<char> buf(1 << 16);
  for (double ratio : grid) {
    char extra[128];
    snprintf(extra, sizeof extra, "lengths.ratio = %.6g\n", ratio);
    const std::string cfg = resolve_config(a, extra);
    grl_dynamics* dyn = nullptr;
    check(grl_dynamics_run(cfg.c_str(), &dyn), "dynamics");
    if (grl_dynamics_diverged(dyn)) {
      grl_dynamics_free(dyn);
      die(kExitInstability, "reduced dynamics diverged");
    }
    check(grl_dynamics_report_json(dyn, ratio, grok_threshold, buf.data(), buf.size()), "report");
    const json rep = json::parse(buf.data());
    summary << ratio << "," << rep["max_plateau"].get<long long>() << ","
            << (rep["max_plateau_censored"].get<bool>() ? 1 : 0) << ","
            << rep["max_rise"].get<long long>() << "," << rep["label"].get<std::string>() << ","
            << rep["statistic"].get<double>() << "\n";
    plateau_series[0].x.push_back(ratio);
    plateau_series[0].y.push_back(double(rep["max_plateau"].get<long long>()));
    // timeline CSV: one row per iteration
    const int nl = grl_dynamics_num_lengths(dyn);
    std::ostringstream csv;
    csv << "t,q,r";
    for (int i = 0; i < nl; ++i) csv << ",J_L" << grl_dynamics_length(dyn, i);
    for (int i = 0; i < nl; ++i) csv << ",Jx_L" << grl_dynamics_length(dyn, i);
    csv << "\n";
    std::vector<double> jc(nl), jx(nl), gq(nl);
    char num[64];
    for (long long row = 0; row < grl_dynamics_rows(dyn); ++row) {
      long long t;
      double q, r;
      check(grl_dynamics_row(dyn, row, &t, &q, &r, jc.data(), jx.data(), gq.data()), "row");
      csv << t;
      snprintf(num, sizeof num, ",%.10g,%.10g", q, r);
      csv << num;
      for (int i = 0; i < nl; ++i) {
        snprintf(num, sizeof num, ",%.10g", jc[i]);
        csv << num;
      }
      for (int i = 0; i < nl; ++i) {
        snprintf(num, sizeof num, ",%.10g", jx[i]);
        csv << num;
      }
      csv << "\n";
    }
    char name[64];
    snprintf(name, sizeof name, "timeline_R%g.csv", ratio);
    write_text(fs::path(a.out_dir) / name, csv.str());
    man.files.push_back(name);
    snprintf(name, sizeof name, "report_R%g.json", ratio);
    write_text(fs::path(a.out_dir) / name, rep.dump(2) + "\n");
    man.files.push_back(name);
    std::cout << "R=" << ratio << ": max plateau " << rep["max_plateau"].get<long long>()
              << ", label " << rep["label"].get<std::string>() << "\n";
    grl_dynamics_free(dyn);
  }
  write_text(fs::path(a.out_dir) / "scan_summary.csv", summary.str());
  man.files.push_back("scan_summary.csv");
  double ymax = 1.0;
  for (double v : plateau_series[0].y) ymax = std::max(ymax, v * 1.1);
  write_svg((fs::path(a.out_dir) / "phase_diagram.svg").string(),
            "inter-horizon plateau vs difficulty ratio", "ratio R", "iterations", plateau_series,
            0.0, ymax);
  man.files.push_back("phase_diagram.svg");
  man.write(a.out_dir);
  return 0;
}

int cmd_verify(const CommonArgs& a, bool full) {
  int failures = 0;
  const auto cb = [](const char* name, int pass, const char* detail, void*) {
    std::printf("%-48s %s  %s\n", name, pass ? "PASS" : "FAIL", detail);
    std::fflush(stdout);
  };
  check(grl_verify(full ? 1 : 0, a.data_dir.c_str(),
                   static_cast<uint64_t>(a.seed >= 0 ? a.seed : 1), cb, nullptr, &failures),
        "verify");
  if (failures > 0) {
    std::cout << failures << " check(s) failed\n";
    return kExitVerify;
  }
  std::cout << "all checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grouprl: RL with verifiable rewards on group-composition tasks"};
  app.require_subcommand(1);
  CommonArgs args;

  auto add_common = [&](CLI::App* sub, bool with_preset = true) {
    sub->add_option("--config", args.config_path, "configuration file (key = value, [sections])");
    sub->add_option("--seed", args.seed, "run seed override");
    sub->add_option("--out", args.out_dir, "output directory");
    if (with_preset)
      sub->add_option("--preset", args.preset, "experiment preset: fig4, fig5a, fig5b");
  };

  auto* gen = app.add_subcommand("gen", "sample a reasoning-instance corpus");
  int gen_count = 1000, gen_horizon = 5;
  add_common(gen, false);
  gen->add_option("--count", gen_count, "number of instances");
  gen->add_option("--horizon", gen_horizon, "instance horizon L");

  auto* train = app.add_subcommand("train", "run a training experiment");
  add_common(train);

  auto* analyze = app.add_subcommand("analyze", "phase transitions and regime label");
  std::vector<std::string> metrics_files;
  double ratio = 0.0, grok_threshold = 10.0;
  add_common(analyze, false);
  analyze->add_option("files", metrics_files, "metrics JSONL files")->required();
  analyze->add_option("--ratio", ratio, "difficulty ratio annotation");
  analyze->add_option("--grok-threshold", grok_threshold, "plateau/rise ratio for grokking");

  auto* scan = app.add_subcommand("scan", "sweep difficulty ratios (reduced dynamics)");
  std::vector<double> grid;
  add_common(scan, false);
  scan->add_option("--ratios", grid, "difficulty ratio grid")->required();
  scan->add_option("--grok-threshold", grok_threshold, "plateau/rise ratio for grokking");

  auto* verify = app.add_subcommand("verify", "run the invariant suites");
  bool full = false;
  add_common(verify, false);
  verify->add_flag("--full", full, "include the long acceptance checks");
  verify->add_option("--data", args.data_dir, "irrep data directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(args, gen_count, gen_horizon);
    if (train->parsed()) return cmd_train(args);
    if (analyze->parsed()) return cmd_analyze(args, metrics_files, ratio, grok_threshold);
    if (scan->parsed()) return cmd_scan(args, grid, grok_threshold);
    if (verify->parsed()) return cmd_verify(args, full);
  } catch (const std::exception& e) {
    die(kExitConfig, e.what());
  }
  return 0;
}
