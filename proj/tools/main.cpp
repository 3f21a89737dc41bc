#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "ocflow/control.hpp"
#include "ocflow/errors.hpp"
#include "ocflow/image_io.hpp"
#include "ocflow/metrics.hpp"
#include "selftest.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace ocflow;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitSolver = 4;

struct SolverOptions {
  int loop = 2;
  int levels = 3;
  double lambda_star = 1.7782794100389227e5;
  double kappa = 1.2589254117941673;
  int n_loop = 10;
  std::string scheme = "char";
  int n_t = 1;
  double stop_tol = 1e-3;
  double lambda_ratio = 2.2387211385683394;
  double sigma_cfl = 0.1;
  double dt_ode = 0.1;
  double horizon = 1.0;
  double stokes_tol = 1e-8;
  std::string config_path;
};

void add_solver_flags(CLI::App* cmd, SolverOptions& opt) {
  cmd->add_option("--loop", opt.loop, "Segregation loop variant (1 or 2)")
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--levels", opt.levels, "Pyramid depth L (coarsest level index)");
  cmd->add_option("--lambda-star", opt.lambda_star, "Regularization weight at the coarsest level");
  cmd->add_option("--kappa", opt.kappa, "Loop I lambda schedule ratio (> 1)");
  cmd->add_option("--n-loop", opt.n_loop, "Outer iterations per level");
  cmd->add_option("--scheme", opt.scheme, "Transport scheme: char or tvd")
      ->check(CLI::IsMember({"char", "tvd"}));
  cmd->add_option("--nt", opt.n_t, "Flow time samples over [0, T]");
  cmd->add_option("--stop-tol", opt.stop_tol, "Loop II mismatch stagnation threshold");
  cmd->add_option("--lambda-ratio", opt.lambda_ratio,
                  "Per-level lambda growth, in [10^0.2, 10^0.5]");
  cmd->add_option("--sigma-cfl", opt.sigma_cfl, "Target CFL number of the TVD scheme");
  cmd->add_option("--dt-ode", opt.dt_ode, "RK4 backtrace step");
  cmd->add_option("--horizon", opt.horizon, "Time horizon T");
  cmd->add_option("--stokes-tol", opt.stokes_tol, "Relative residual of each Stokes solve");
  cmd->add_option("--config", opt.config_path, "Flat key = value config file (flags override)");
}

// flat `key = value` lines, '#' comments
std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  const auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

void apply_config_file(SolverOptions& opt, const CLI::App* cmd) {
  if (opt.config_path.empty()) return;
  const auto kv = parse_config_file(opt.config_path);
  const auto flag_given = [&](const std::string& name) {
    const CLI::Option* o = cmd->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  const auto set_d = [&](const char* key, const char* flag, double& slot) {
    if (auto it = kv.find(key); it != kv.end() && !flag_given(flag)) slot = std::stod(it->second);
  };
  const auto set_i = [&](const char* key, const char* flag, int& slot) {
    if (auto it = kv.find(key); it != kv.end() && !flag_given(flag)) slot = std::stoi(it->second);
  };
  set_i("loop", "--loop", opt.loop);
  set_i("levels", "--levels", opt.levels);
  set_d("lambda_star", "--lambda-star", opt.lambda_star);
  set_d("kappa", "--kappa", opt.kappa);
  set_i("n_loop", "--n-loop", opt.n_loop);
  set_i("nt", "--nt", opt.n_t);
  set_d("stop_tol", "--stop-tol", opt.stop_tol);
  set_d("lambda_ratio", "--lambda-ratio", opt.lambda_ratio);
  set_d("sigma_cfl", "--sigma-cfl", opt.sigma_cfl);
  set_d("dt_ode", "--dt-ode", opt.dt_ode);
  set_d("horizon", "--horizon", opt.horizon);
  set_d("stokes_tol", "--stokes-tol", opt.stokes_tol);
  if (auto it = kv.find("scheme"); it != kv.end() && !flag_given("--scheme")) {
    opt.scheme = it->second;
  }
}

RunConfig to_run_config(const SolverOptions& opt) {
  RunConfig cfg;
  cfg.horizon = opt.horizon;
  cfg.n_loop = opt.n_loop;
  cfg.lambda_star = opt.lambda_star;
  cfg.lambda_schedule = LambdaSchedule::kGeometric;
  cfg.kappa = opt.kappa;
  cfg.pyramid_levels = opt.levels;
  cfg.lambda_level_ratio = opt.lambda_ratio;
  cfg.sigma_cfl = opt.sigma_cfl;
  cfg.dt_ode = opt.dt_ode;
  cfg.n_t = opt.n_t;
  cfg.scheme = opt.scheme == "tvd" ? TransportScheme::kTvd : TransportScheme::kCharacteristic;
  cfg.stop_tol = opt.stop_tol;
  cfg.stokes_tol = opt.stokes_tol;
  cfg.validate();
  return cfg;
}

json config_to_json(const SolverOptions& opt) {
  json j;
  j["loop"] = opt.loop;
  j["levels"] = opt.levels;
  j["lambda_star"] = opt.lambda_star;
  j["kappa"] = opt.kappa;
  j["n_loop"] = opt.n_loop;
  j["scheme"] = opt.scheme;
  j["nt"] = opt.n_t;
  j["stop_tol"] = opt.stop_tol;
  j["lambda_ratio"] = opt.lambda_ratio;
  j["sigma_cfl"] = opt.sigma_cfl;
  j["dt_ode"] = opt.dt_ode;
  j["horizon"] = opt.horizon;
  j["stokes_tol"] = opt.stokes_tol;
  return j;
}

json levels_to_json(const std::vector<LevelReport>& reports) {
  json arr = json::array();
  for (const LevelReport& r : reports) {
    json jr;
    jr["level"] = r.level;
    jr["width"] = r.width;
    jr["height"] = r.height;
    jr["lambda"] = r.lambda;
    json its = json::array();
    for (const IterationStats& s : r.iterations) {
      its.push_back({{"iteration", s.iteration},
                     {"terminal_mismatch", s.terminal_mismatch},
                     {"data_term", s.data_term},
                     {"reg_term", s.reg_term}});
    }
    jr["iterations"] = std::move(its);
    arr.push_back(std::move(jr));
  }
  return arr;
}

std::string frame_name(double t, bool float_out) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "interp_%.4f.%s", t, float_out ? "pfm" : "png");
  return buf;
}

int cmd_interp(const std::string& frame0_path, const std::string& frameT_path,
               const std::string& out_dir, const SolverOptions& opt, std::vector<double> times,
               bool no_average, bool float_out, int crop_border) {
  const ScalarField u0 = read_image(frame0_path);
  const ScalarField uT = read_image(frameT_path);
  if (!u0.same_shape(uT)) {
    std::fprintf(stderr, "error: frames differ in size (%dx%d vs %dx%d)\n", u0.width(),
                 u0.height(), uT.width(), uT.height());
    return kExitUsage;
  }
  const RunConfig cfg = to_run_config(opt);
  if (times.empty()) {
    for (int k = 1; k <= 9; ++k) times.push_back(cfg.horizon * k / 10.0);
  }
  for (double t : times) {
    if (t < 0.0 || t > cfg.horizon) {
      std::fprintf(stderr, "error: requested time %g outside [0, %g]\n", t, cfg.horizon);
      return kExitUsage;
    }
  }
  std::filesystem::create_directories(out_dir);

  const LoopVariant variant = opt.loop == 1 ? LoopVariant::kLoopI : LoopVariant::kLoopII;
  std::vector<LevelReport> fwd_reports;
  std::vector<LevelReport> bwd_reports;
  const TimeFlow flow_fwd = hierarchical_solve(u0, uT, cfg, variant, &fwd_reports);

  json meta;
  meta["command"] = "interp";
  meta["frame0"] = frame0_path;
  meta["frameT"] = frameT_path;
  meta["width"] = u0.width();
  meta["height"] = u0.height();
  meta["config"] = config_to_json(opt);
  meta["average"] = !no_average;
  meta["times"] = times;
  meta["levels_forward"] = levels_to_json(fwd_reports);

  std::vector<std::string> written;
  if (no_average) {
    for (double t : times) {
      const ScalarField frame = transport_frame(u0, flow_fwd, t, cfg);
      const std::string name = frame_name(t, float_out);
      write_image(out_dir + "/" + name, frame);
      written.push_back(name);
    }
  } else {
    const TimeFlow flow_bwd = hierarchical_solve(uT, u0, cfg, variant, &bwd_reports);
    meta["levels_backward"] = levels_to_json(bwd_reports);
    for (double t : times) {
      const ScalarField frame = interpolate_at(u0, uT, flow_fwd, flow_bwd, t, cfg);
      const std::string name = frame_name(t, float_out);
      write_image(out_dir + "/" + name, frame);
      written.push_back(name);
    }
  }
  write_flo(out_dir + "/flow.flo", flow_fwd.sample(0));

  // in-run quality summary: terminal mismatch against the zero-flow baseline
  const double baseline_rms = interpolation_error(u0, uT, crop_border);
  const ScalarField uT_reached = transport_frame(u0, flow_fwd, cfg.horizon, cfg);
  const double final_rms = interpolation_error(uT_reached, uT, crop_border);
  meta["baseline_terminal_rms"] = baseline_rms;
  meta["final_terminal_rms"] = final_rms;
  meta["improvement_ratio"] = baseline_rms > 0.0 ? final_rms / baseline_rms : 0.0;
  meta["outputs"] = written;
  meta["flow_output"] = "flow.flo";

  std::ofstream metaf(out_dir + "/metadata.json");
  if (!metaf) throw IoError("cannot write " + out_dir + "/metadata.json");
  metaf << meta.dump(2) << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& interp_path, const std::string& truth_path, int crop_border,
             const std::string& json_path, const std::string& flo_path) {
  const ScalarField u = read_image(interp_path);
  const ScalarField truth = read_image(truth_path);
  if (!u.same_shape(truth)) {
    std::fprintf(stderr, "error: images differ in size (%dx%d vs %dx%d)\n", u.width(), u.height(),
                 truth.width(), truth.height());
    return kExitUsage;
  }
  EvalReport report;
  report.ie = interpolation_error(u, truth, crop_border);
  const double mass_truth = mass(truth);
  report.mass_drift = mass_truth != 0.0 ? std::abs(mass(u) - mass_truth) / std::abs(mass_truth)
                                        : std::abs(mass(u));
  const double tv_truth = total_variation(truth);
  report.tv_ratio = tv_truth != 0.0 ? total_variation(u) / tv_truth : 0.0;
  if (!flo_path.empty()) report.div_residual = max_divergence(read_flo(flo_path));

  std::printf("%.3f\n", report.ie);
  if (!json_path.empty()) {
    json j;
    j["ie"] = report.ie;
    j["mass_drift"] = report.mass_drift;
    j["tv_ratio"] = report.tv_ratio;
    j["div_residual"] = report.div_residual;
    std::ofstream out(json_path);
    if (!out) throw IoError("cannot write " + json_path);
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

int cmd_flow(const std::string& frame0_path, const std::string& frameT_path,
             const std::string& out_path, const SolverOptions& opt) {
  const ScalarField u0 = read_image(frame0_path);
  const ScalarField uT = read_image(frameT_path);
  if (!u0.same_shape(uT)) {
    std::fprintf(stderr, "error: frames differ in size\n");
    return kExitUsage;
  }
  const RunConfig cfg = to_run_config(opt);
  const LoopVariant variant = opt.loop == 1 ? LoopVariant::kLoopI : LoopVariant::kLoopII;
  std::vector<LevelReport> reports;
  const TimeFlow flow = hierarchical_solve(u0, uT, cfg, variant, &reports);
  write_flo(out_path, flow.sample(0));

  json meta;
  meta["command"] = "flow";
  meta["frame0"] = frame0_path;
  meta["frameT"] = frameT_path;
  meta["config"] = config_to_json(opt);
  meta["levels"] = levels_to_json(reports);
  std::ofstream metaf(out_path + ".json");
  if (!metaf) throw IoError("cannot write " + out_path + ".json");
  metaf << meta.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frame interpolation by optimal control of a divergence-free transport flow"};
  app.require_subcommand(1);

  // interp
  auto* interp = app.add_subcommand("interp", "Interpolate frames between two images");
  std::string frame0, frameT, out_dir = "out";
  std::vector<double> times;
  bool no_average = false;
  bool float_out = false;
  int crop_border = 0;
  SolverOptions interp_opt;
  interp->add_option("frame0", frame0, "First frame")->required();
  interp->add_option("frameT", frameT, "Second frame")->required();
  interp->add_option("-o,--out-dir", out_dir, "Output directory");
  interp->add_option("--times", times, "Interpolation times (default: 9 uniform)")
      ->delimiter(',');
  interp->add_flag("--no-average", no_average, "One-sided forward interpolation only");
  interp->add_flag("--float-out", float_out, "Write lossless PFM frames instead of PNG");
  interp->add_option("--crop-border", crop_border, "Crop for the metadata RMS summary");
  add_solver_flags(interp, interp_opt);

  // eval
  auto* eval = app.add_subcommand("eval", "Interpolation error against a reference frame");
  std::string eval_a, eval_b, eval_json, eval_flo;
  int eval_crop = 0;
  eval->add_option("interp", eval_a, "Interpolated frame")->required();
  eval->add_option("truth", eval_b, "Ground-truth frame")->required();
  eval->add_option("--crop-border", eval_crop, "Exclude an outer border from the error");
  eval->add_option("--json", eval_json, "Write the evaluation report to this JSON file");
  eval->add_option("--flo", eval_flo, "Flow file for the divergence diagnostic");

  // flow
  auto* flowc = app.add_subcommand("flow", "Estimate and export the optical flow only");
  std::string flow0, flowT, flow_out = "flow.flo";
  SolverOptions flow_opt;
  flowc->add_option("frame0", flow0, "First frame")->required();
  flowc->add_option("frameT", flowT, "Second frame")->required();
  flowc->add_option("-o,--output", flow_out, "Output .flo path");
  add_solver_flags(flowc, flow_opt);

  // selftest
  auto* selftest = app.add_subcommand("selftest", "Run the embedded synthetic verification suite");
  bool quick = false;
  selftest->add_flag("--quick", quick, "Skip the mesh-refinement convergence study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (interp->parsed()) {
      apply_config_file(interp_opt, interp);
      return cmd_interp(frame0, frameT, out_dir, interp_opt, times, no_average, float_out,
                        crop_border);
    }
    if (eval->parsed()) {
      return cmd_eval(eval_a, eval_b, eval_crop, eval_json, eval_flo);
    }
    if (flowc->parsed()) {
      apply_config_file(flow_opt, flowc);
      return cmd_flow(flow0, flowT, flow_out, flow_opt);
    }
    if (selftest->parsed()) {
      return ocflow::tools::run_selftest(quick) == 0 ? kExitOk : 1;
    }
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitOk;
}
