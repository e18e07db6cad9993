// omit: command-line front end for spectra, window reports, steady states,
// time-domain runs and parameter sweeps.
//
// Exit codes: 0 success, 2 invalid configuration, 3 solver failure,
// 4 every sweep point failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "omit/io.hpp"
#include "omit/omit.hpp"

namespace {

using nlohmann::json;
using namespace omit;

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kBadConfig = 2, kSolver = 3, kAllFailed = 4 };

/// Configuration problem detected before any solver ran.
struct ConfigProblem {
  std::vector<std::string> lines;
};

void check_config(const PhysicalConfig& c) {
  const auto v = validate(c);
  if (v.empty()) return;
  ConfigProblem p;
  for (const auto& x : v) p.lines.push_back(to_string(x));
  throw p;
}

PhysicalConfig config_of(const json& args) {
  try {
    PhysicalConfig c = io::config_from_json(args.at("config"));
    check_config(c);
    return c;
  } catch (const ParseError& e) {
    throw ConfigProblem{{e.what()}};
  }
}

ResponseOptions response_options(const json& args) {
  ResponseOptions o;
  o.paper_sign = args.value("paper_sign", false);
  o.literal_atom_weight = args.value("literal_atom_weight", false);
  return o;
}

/// Normalized system, solving the steady state first in Drive mode.
NormalizedSystem system_of(const PhysicalConfig& c) {
  if (std::holds_alternative<Drive>(c.drive_mode)) return normalize(c, solve_self_consistent(c));
  return normalize(c);
}

ResponseSpectrum compute_spectrum(const NormalizedSystem& s, const json& args) {
  const std::string method = args.value("method", "cf");
  const double xmin = args.value("xmin", -3.0);
  const double xmax = args.value("xmax", 3.0);
  const auto points = args.value("points", std::size_t{20001});
  const ResponseOptions ro = response_options(args);
  if (method == "timedomain") {
    if (points < 2) throw PreconditionError("spectrum requires at least 2 points");
    return timedomain_spectrum(s, uniform_grid(xmin, xmax, points), args.value("periods", 200), ro);
  }
  return spectrum(s, xmin, xmax, points, method_from_string(method), ro);
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_output(const std::string& path, const std::string& text, const std::string& subcommand,
                  const json& args, double wall_s) {
  io::write_text_file(path, text);
  json m;
  m["tool"] = "omit";
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  m["config"] = args.contains("config") ? args.at("config") : json(nullptr);
  m["method"] = args.contains("method") ? args.at("method") : json(nullptr);
  m["grid"] = {{"xmin", args.value("xmin", -3.0)},
               {"xmax", args.value("xmax", 3.0)},
               {"points", args.value("points", std::size_t{20001})}};
  m["outputs"] = json::array({path});
  m["wall_time_s"] = wall_s;
  m["created_utc"] = utc_now();
  m["args"] = args;
  io::write_text_file(path + ".manifest.json", m.dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Subcommands -----------------------------------------------------------------

int cmd_spectrum(const json& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const PhysicalConfig c = config_of(args);
  const ResponseSpectrum sp = compute_spectrum(system_of(c), args);
  const std::string csv = io::spectrum_csv(sp);
  const std::string out = args.value("out", "");
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_output(out, csv, "spectrum", args, seconds_since(t0));
  }
  return kOk;
}

WindowThresholds thresholds_of(const json& args) {
  WindowThresholds t;
  t.max_depth = args.value("max_depth", t.max_depth);
  t.min_prominence = args.value("min_prominence", t.min_prominence);
  t.width_level = args.value("width_level", t.width_level);
  t.central_band = args.value("central_band", t.central_band);
  return t;
}

int cmd_windows(const json& args) {
  const auto t0 = std::chrono::steady_clock::now();
  ResponseSpectrum sp;
  if (args.contains("spectrum")) {
    try {
      sp = io::read_spectrum_csv(args.at("spectrum").get<std::string>());
    } catch (const ParseError& e) {
      throw ConfigProblem{{e.what()}};
    }
    if (args.contains("cavities")) sp.n_cavities = args.at("cavities").get<int>();
  } else {
    sp = compute_spectrum(system_of(config_of(args)), args);
  }
  const WindowReport rep = detect_windows(sp, thresholds_of(args));
  std::cout << io::window_table(rep);
  const std::string out = args.value("out", "");
  if (!out.empty()) write_output(out, io::window_report_json(rep).dump(2) + "\n", "windows", args, seconds_since(t0));
  return kOk;
}

int cmd_steady(const json& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const PhysicalConfig c = config_of(args);
  if (!std::holds_alternative<Drive>(c.drive_mode)) {
    throw ConfigProblem{{"drive_mode: steady requires Drive mode"}};
  }
  const SteadyState st = solve_self_consistent(c);
  const NormalizedSystem s = normalize(c, st);
  json j = io::steady_state_json(st);
  j["G"] = json::array({s.G.real(), s.G.imag()});
  j["delta_1"] = s.delta.front();
  j["delta_tilde_1"] = s.delta_tilde_1;
  const std::string text = j.dump(2) + "\n";
  const std::string out = args.value("out", "");
  if (out.empty()) {
    std::cout << text;
  } else {
    write_output(out, text, "steady", args, seconds_since(t0));
  }
  return kOk;
}

int cmd_timedomain(const json& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const PhysicalConfig c = config_of(args);
  const std::string mode = args.value("mode", "linearized");
  const bool nonlinear = mode == "nonlinear";
  if (!nonlinear && mode != "linearized") throw ConfigProblem{{"mode: expected linearized or nonlinear"}};
  const bool drive = std::holds_alternative<Drive>(c.drive_mode);
  if (nonlinear && !drive) throw ConfigProblem{{"drive_mode: nonlinear integration requires Drive mode"}};

  std::optional<SteadyState> st;
  if (drive) st = solve_self_consistent(c);
  const NormalizedSystem s = normalize(c, st);
  const double x = args.value("x", 0.5) * s.kappa_n();
  const double big_delta = s.omega_m + x;
  const int periods = args.value("periods", 200);
  const double eps_p = s.epsilon_p > 0.0 ? s.epsilon_p : 1.0;

  const DemodulationPlan plan = plan_demodulation(s, big_delta, periods);
  IntegrationOptions opt;
  opt.dt = args.value("dt", plan.dt);
  opt.t_end = args.value("t_end", static_cast<double>(plan.steps) * plan.dt);
  opt.stride = args.value("stride", std::size_t{1});
  opt.record_from = args.value("record_from", 0.0);

  std::optional<MeanFieldState> init;
  if (nonlinear && !args.value("from_rest", false)) init = state_from_steady(s, *st);
  const Trajectory tr =
      nonlinear ? integrate_nonlinear(s, big_delta, opt, init) : integrate_linearized(s, eps_p, big_delta, opt);

  json summary;
  summary["mode"] = mode;
  summary["x_over_kappaN"] = args.value("x", 0.5);
  summary["samples"] = tr.size();
  try {
    const auto [m, p] = demodulate_series(tr.t, tr.cavity_series(s.n_cavities - 1), big_delta, periods);
    const cplx e = epsilon_T_from_sideband(m, s.kappa_n(), nonlinear ? s.epsilon_p : eps_p, response_options(args));
    summary["eps_T"] = json::array({e.real(), e.imag()});
    summary["c_N_minus"] = json::array({m.real(), m.imag()});
    summary["c_N_plus"] = json::array({p.real(), p.imag()});
  } catch (const WindowError& e) {
    summary["eps_T"] = nullptr;
    summary["note"] = e.what();
  }
  std::cout << summary.dump(2) << "\n";

  const std::string out = args.value("out", "");
  if (!out.empty()) write_output(out, io::trajectory_csv(tr), "timedomain", args, seconds_since(t0));
  return kOk;
}

/// Sets a scalar config field addressed by a dotted path such as `kappa[1]`,
/// `atom.position` or `drive_mode.G_mag` (the variant tag may be omitted).
void set_path(json& root, const std::string& path, double value) {
  static const std::regex part(R"(([A-Za-z_][A-Za-z0-9_]*)(?:\[(\d+)\])?)");
  json* node = &root;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t dot = path.find('.', start);
    const std::string token = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    std::smatch m;
    if (!std::regex_match(token, m, part)) throw ParseError(path + ": malformed parameter path");
    const std::string key = m[1];
    if (!node->is_object()) throw ParseError(path + ": not a config field");
    if (!node->contains(key) && node->size() == 1 && node->begin()->is_object() &&
        node->begin()->contains(key)) {
      node = &*node->begin();  // descend through the variant tag
    }
    if (!node->contains(key) || (*node)[key].is_null()) throw ParseError(path + ": no such field in config");
    node = &(*node)[key];
    if (m[2].matched) {
      const auto idx = std::stoul(m[2]);
      if (!node->is_array() || idx >= node->size()) throw ParseError(path + ": index out of range");
      node = &(*node)[idx];
    }
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_number_integer()) {
    if (value != std::floor(value)) throw ParseError(path + ": integer field needs integer values");
    *node = static_cast<long long>(value);
  } else if (node->is_number()) {
    *node = value;
  } else {
    throw ParseError(path + ": not a scalar field");
  }
}

std::vector<double> sweep_values(const json& args) {
  std::vector<double> v = args.value("values", std::vector<double>{});
  if (args.contains("range")) {
    const auto r = args.at("range").get<std::vector<double>>();  // from, to, count
    const auto n = static_cast<std::size_t>(r.at(2));
    for (std::size_t k = 0; k < n; ++k) {
      v.push_back(n == 1 ? r[0] : r[0] + (r[1] - r[0]) * static_cast<double>(k) / static_cast<double>(n - 1));
    }
  }
  return v;
}

int cmd_sweep(const json& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const PhysicalConfig base = config_of(args);
  const std::string param = args.at("param").get<std::string>();
  const std::vector<double> values = sweep_values(args);
  if (!values.empty()) {
    json probe = io::config_to_json(base);
    try {
      set_path(probe, param, values.front());
    } catch (const ParseError& e) {
      throw ConfigProblem{{e.what()}};
    }
  }

  struct Row {
    std::size_t count = 0;
    std::string feature, width, error;
  };
  std::vector<Row> rows(values.size());
  const WindowThresholds thr = thresholds_of(args);
  parallel_for(values.size(), [&](std::size_t k) {
    Row& row = rows[k];
    try {
      json cj = io::config_to_json(base);
      set_path(cj, param, values[k]);
      const PhysicalConfig c = io::config_from_json(cj);
      if (const auto v = validate(c); !v.empty()) throw PreconditionError(to_string(v.front()));
      const ResponseSpectrum sp = compute_spectrum(system_of(c), args);
      const WindowReport rep = detect_windows(sp, thr);
      row.count = rep.count;
      row.feature = rep.central_feature ? std::string(to_string(*rep.central_feature)) : "";
      try {
        row.width = io::detail::fmt17(central_feature_width(sp, thr));
      } catch (const NotApplicableError&) {
        row.width = "";
      }
    } catch (const std::exception& e) {
      row = Row{};
      row.error = e.what();
      for (auto& ch : row.error) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
    }
  });

  std::string csv = "param_value,count,central_feature,central_width,error\n";
  std::size_t failed = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const Row& r = rows[k];
    if (!r.error.empty()) ++failed;
    csv += io::detail::fmt17(values[k]) + ',' + (r.error.empty() ? std::to_string(r.count) : "") + ',' + r.feature +
           ',' + r.width + ',' + r.error + '\n';
  }
  const std::string out = args.value("out", "");
  if (out.empty()) {
    std::cout << csv;
  } else {
    write_output(out, csv, "sweep", args, seconds_since(t0));
  }
  return (!values.empty() && failed == values.size()) ? kAllFailed : kOk;
}

int dispatch(const std::string& sub, const json& args);

int cmd_rerun(const std::string& manifest_path, const std::string& out_override) {
  json m;
  try {
    m = io::read_json_file(manifest_path);
  } catch (const ParseError& e) {
    throw ConfigProblem{{e.what()}};
  }
  if (!m.contains("subcommand") || !m.contains("args")) throw ConfigProblem{{manifest_path + ": not a manifest"}};
  json args = m.at("args");
  if (!out_override.empty()) args["out"] = out_override;
  return dispatch(m.at("subcommand").get<std::string>(), args);
}

int dispatch(const std::string& sub, const json& args) {
  if (sub == "spectrum") return cmd_spectrum(args);
  if (sub == "windows") return cmd_windows(args);
  if (sub == "steady") return cmd_steady(args);
  if (sub == "timedomain") return cmd_timedomain(args);
  if (sub == "sweep") return cmd_sweep(args);
  throw ConfigProblem{{"unknown subcommand '" + sub + "'"}};
}

// Argument parsing ----------------------------------------------------------

struct Common {
  std::string config_path, preset, out, method = "cf";
  double xmin = -3.0, xmax = 3.0;
  std::size_t points = 20001;
  int periods = 200;
  bool paper_sign = false, literal_atom_weight = false;
  std::optional<double> max_depth, min_prominence, width_level;
};

void add_source(CLI::App* app, Common& c) {
  auto* cfg = app->add_option("--config", c.config_path, "Config JSON file");
  auto* pre = app->add_option("--preset", c.preset, "Built-in parameter set");
  cfg->excludes(pre);
}

void add_grid(CLI::App* app, Common& c) {
  app->add_option("--method", c.method, "cf | linear | full | timedomain")
      ->check(CLI::IsMember({"cf", "linear", "full", "timedomain"}));
  app->add_option("--xmin", c.xmin, "Lower grid edge, units of kappa_N");
  app->add_option("--xmax", c.xmax, "Upper grid edge, units of kappa_N");
  app->add_option("--points", c.points, "Grid points");
  app->add_option("--periods", c.periods, "Demodulation periods (timedomain method)");
  app->add_flag("--paper-sign", c.paper_sign, "Report the conjugate (kappa - ix) convention");
  app->add_flag("--literal-atom-weight", c.literal_atom_weight, "Atom weight g_a^2 |sigma_z|^2");
}

void add_thresholds(CLI::App* app, Common& c) {
  app->add_option("--max-depth", c.max_depth, "Window depth threshold on |eps_T|");
  app->add_option("--min-prominence", c.min_prominence, "Window prominence threshold");
  app->add_option("--width-level", c.width_level, "Re(eps_T) level defining widths");
}

json base_args(const Common& c, bool need_config) {
  json a;
  if (!c.preset.empty()) {
    const auto p = presets::find(c.preset);
    if (!p) throw ConfigProblem{{"unknown preset '" + c.preset + "'"}};
    a["preset"] = c.preset;
    a["config"] = io::config_to_json(*p);
  } else if (!c.config_path.empty()) {
    try {
      a["config"] = io::config_to_json(io::load_config(c.config_path));
    } catch (const ParseError& e) {
      throw ConfigProblem{{e.what()}};
    }
    a["config_path"] = c.config_path;
  } else if (need_config) {
    throw ConfigProblem{{"one of --config or --preset is required"}};
  }
  a["method"] = c.method;
  a["xmin"] = c.xmin;
  a["xmax"] = c.xmax;
  a["points"] = c.points;
  a["periods"] = c.periods;
  a["paper_sign"] = c.paper_sign;
  a["literal_atom_weight"] = c.literal_atom_weight;
  if (c.max_depth) a["max_depth"] = *c.max_depth;
  if (c.min_prominence) a["min_prominence"] = *c.min_prominence;
  if (c.width_level) a["width_level"] = *c.width_level;
  if (!c.out.empty()) a["out"] = c.out;
  return a;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probe response and transparency windows of optomechanical cavity chains"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common c;
  auto* sp = app.add_subcommand("spectrum", "Compute eps_T on a grid of x/kappa_N and write CSV");
  add_source(sp, c);
  add_grid(sp, c);
  sp->add_option("--out", c.out, "Output CSV (stdout if omitted)");

  std::string spectrum_in;
  std::optional<int> cavities;
  auto* wn = app.add_subcommand("windows", "Detect transparency windows");
  add_source(wn, c);
  add_grid(wn, c);
  add_thresholds(wn, c);
  wn->add_option("--spectrum", spectrum_in, "Analyze an existing spectrum CSV");
  wn->add_option("--cavities", cavities, "Cavity count of the --spectrum input");
  wn->add_option("--out", c.out, "Output JSON report");

  auto* stc = app.add_subcommand("steady", "Solve the mean-field steady state (Drive mode)");
  add_source(stc, c);
  stc->add_option("--out", c.out, "Output JSON (stdout if omitted)");

  std::string mode = "linearized";
  double x = 0.5;
  std::optional<double> t_end, dt, record_from;
  std::size_t stride = 1;
  bool from_rest = false;
  auto* td = app.add_subcommand("timedomain", "Integrate the mean-field equations and demodulate");
  add_source(td, c);
  td->add_option("--mode", mode, "linearized | nonlinear")->check(CLI::IsMember({"linearized", "nonlinear"}));
  td->add_option("--x", x, "Probe detuning x/kappa_N");
  td->add_option("--t-end", t_end, "End time in us (default: transient plus demodulation periods)");
  td->add_option("--dt", dt, "Step in us");
  td->add_option("--stride", stride, "Store every k-th sample");
  td->add_option("--record-from", record_from, "Discard samples before this time (us)");
  td->add_option("--periods", c.periods, "Demodulation periods");
  td->add_flag("--from-rest", from_rest, "Nonlinear run starts from empty cavities");
  td->add_flag("--paper-sign", c.paper_sign, "Report the conjugate (kappa - ix) convention");
  td->add_option("--out", c.out, "Output trajectory CSV");

  std::string param;
  std::vector<double> values;
  std::vector<double> range;
  auto* sw = app.add_subcommand("sweep", "Sweep one scalar config field and tabulate windows");
  add_source(sw, c);
  add_grid(sw, c);
  add_thresholds(sw, c);
  sw->add_option("--param", param, "Dotted field path, e.g. drive_mode.G_mag, kappa[0], atom.position")
      ->required();
  auto* vals = sw->add_option("--values", values, "Comma-separated values")->delimiter(',');
  auto* rng = sw->add_option("--range", range, "FROM TO COUNT")->expected(3);
  vals->excludes(rng);
  sw->add_option("--out", c.out, "Output CSV (stdout if omitted)");

  std::string manifest_path;
  auto* rr = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  rr->add_option("manifest", manifest_path, "Manifest JSON")->required();
  rr->add_option("--out", c.out, "Write to a different output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (rr->parsed()) return cmd_rerun(manifest_path, c.out);
    if (sp->parsed()) return cmd_spectrum(base_args(c, true));
    if (stc->parsed()) return cmd_steady(base_args(c, true));
    if (wn->parsed()) {
      json a = base_args(c, spectrum_in.empty());
      if (!spectrum_in.empty()) {
        a.erase("config");
        a["spectrum"] = spectrum_in;
      }
      if (cavities) a["cavities"] = *cavities;
      return cmd_windows(a);
    }
    if (td->parsed()) {
      json a = base_args(c, true);
      a["mode"] = mode;
      a["x"] = x;
      if (t_end) a["t_end"] = *t_end;
      if (dt) a["dt"] = *dt;
      if (record_from) a["record_from"] = *record_from;
      a["stride"] = stride;
      a["from_rest"] = from_rest;
      return cmd_timedomain(a);
    }
    if (sw->parsed()) {
      json a = base_args(c, true);
      a["param"] = param;
      a["values"] = values;
      if (!range.empty()) a["range"] = range;
      return cmd_sweep(a);
    }
  } catch (const ConfigProblem& p) {
    for (const auto& line : p.lines) std::cerr << "invalid config: " << line << "\n";
    return kBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
  return kOk;
}
