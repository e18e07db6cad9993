#pragma once

// JSON and CSV serialization of configs, spectra, steady states, window
// reports and trajectories. Config parsing is strict: unknown keys and
// wrongly typed values raise ParseError with the offending path.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "omit/errors.hpp"
#include "omit/model.hpp"
#include "omit/response.hpp"
#include "omit/steady_state.hpp"
#include "omit/timedomain.hpp"
#include "omit/windows.hpp"

namespace omit {

class ParseError : public Error {
 public:
  using Error::Error;
};

namespace io {

using nlohmann::json;

namespace detail {

inline void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ParseError((where.empty() ? "" : where + ".") + it.key() + ": unknown key");
  }
}

inline const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError((where.empty() ? "" : where + ".") + key + ": missing");
  return j.at(key);
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path + ": expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path + ": expected an integer");
  return j.get<int>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array");
  std::vector<double> v;
  for (std::size_t k = 0; k < j.size(); ++k) v.push_back(number(j[k], path + "[" + std::to_string(k) + "]"));
  return v;
}

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace detail

inline PhysicalConfig config_from_json(const json& j) {
  using namespace detail;
  only_keys(j, {"n_cavities", "kappa", "hopping", "omega_m", "gamma_m", "drive_mode", "atom", "detuning_mode",
                "epsilon_p"},
            "");
  PhysicalConfig c;
  c.n_cavities = integer(need(j, "n_cavities", ""), "n_cavities");
  c.kappa = numbers(need(j, "kappa", ""), "kappa");
  c.hopping = j.contains("hopping") ? numbers(j.at("hopping"), "hopping") : std::vector<double>{};
  c.omega_m = number(need(j, "omega_m", ""), "omega_m");
  c.gamma_m = number(need(j, "gamma_m", ""), "gamma_m");
  if (j.contains("epsilon_p")) c.epsilon_p = number(j.at("epsilon_p"), "epsilon_p");

  const json& dm = need(j, "drive_mode", "");
  if (!dm.is_object() || dm.size() != 1) throw ParseError("drive_mode: expected {\"DirectG\": {...}} or {\"Drive\": {...}}");
  if (dm.contains("DirectG")) {
    const json& d = dm.at("DirectG");
    only_keys(d, {"G_mag", "G_phase", "sigma_z_fixed"}, "drive_mode.DirectG");
    DirectG g;
    g.G_mag = number(need(d, "G_mag", "drive_mode.DirectG"), "drive_mode.DirectG.G_mag");
    if (d.contains("G_phase")) g.G_phase = number(d.at("G_phase"), "drive_mode.DirectG.G_phase");
    if (d.contains("sigma_z_fixed")) g.sigma_z_fixed = number(d.at("sigma_z_fixed"), "drive_mode.DirectG.sigma_z_fixed");
    c.drive_mode = g;
  } else if (dm.contains("Drive")) {
    const json& d = dm.at("Drive");
    only_keys(d, {"epsilon_c", "g_single_photon"}, "drive_mode.Drive");
    Drive g;
    g.epsilon_c = number(need(d, "epsilon_c", "drive_mode.Drive"), "drive_mode.Drive.epsilon_c");
    g.g_single_photon = number(need(d, "g_single_photon", "drive_mode.Drive"), "drive_mode.Drive.g_single_photon");
    c.drive_mode = g;
  } else {
    throw ParseError("drive_mode." + dm.begin().key() + ": unknown drive mode");
  }

  if (j.contains("atom") && !j.at("atom").is_null()) {
    const json& a = j.at("atom");
    only_keys(a, {"position", "g_a", "gamma_a"}, "atom");
    Atom at;
    at.position = integer(need(a, "position", "atom"), "atom.position");
    at.g_a = number(need(a, "g_a", "atom"), "atom.g_a");
    at.gamma_a = number(need(a, "gamma_a", "atom"), "atom.gamma_a");
    c.atom = at;
  }

  if (j.contains("detuning_mode")) {
    const json& d = j.at("detuning_mode");
    if (d.is_string()) {
      if (d.get<std::string>() != "ResolvedSideband") throw ParseError("detuning_mode: unknown mode");
      c.detuning_mode = ResolvedSideband{};
    } else if (d.is_object() && d.size() == 1 && d.contains("ResolvedSideband")) {
      only_keys(d.at("ResolvedSideband"), {}, "detuning_mode.ResolvedSideband");
      c.detuning_mode = ResolvedSideband{};
    } else if (d.is_object() && d.size() == 1 && d.contains("Explicit")) {
      const json& e = d.at("Explicit");
      only_keys(e, {"Delta", "Delta_a"}, "detuning_mode.Explicit");
      ExplicitDetuning ex;
      ex.Delta = numbers(need(e, "Delta", "detuning_mode.Explicit"), "detuning_mode.Explicit.Delta");
      if (e.contains("Delta_a")) ex.Delta_a = number(e.at("Delta_a"), "detuning_mode.Explicit.Delta_a");
      c.detuning_mode = ex;
    } else {
      throw ParseError("detuning_mode: expected \"ResolvedSideband\" or {\"Explicit\": {...}}");
    }
  }
  return c;
}

inline json config_to_json(const PhysicalConfig& c) {
  json j;
  j["n_cavities"] = c.n_cavities;
  j["kappa"] = c.kappa;
  j["hopping"] = c.hopping;
  j["omega_m"] = c.omega_m;
  j["gamma_m"] = c.gamma_m;
  if (const auto* d = std::get_if<DirectG>(&c.drive_mode)) {
    j["drive_mode"] = {{"DirectG", {{"G_mag", d->G_mag}, {"G_phase", d->G_phase}, {"sigma_z_fixed", d->sigma_z_fixed}}}};
  } else {
    const auto& dr = std::get<Drive>(c.drive_mode);
    j["drive_mode"] = {{"Drive", {{"epsilon_c", dr.epsilon_c}, {"g_single_photon", dr.g_single_photon}}}};
  }
  if (c.atom) {
    j["atom"] = {{"position", c.atom->position}, {"g_a", c.atom->g_a}, {"gamma_a", c.atom->gamma_a}};
  } else {
    j["atom"] = nullptr;
  }
  if (const auto* e = std::get_if<ExplicitDetuning>(&c.detuning_mode)) {
    j["detuning_mode"] = {{"Explicit", {{"Delta", e->Delta}, {"Delta_a", e->Delta_a}}}};
  } else {
    j["detuning_mode"] = "ResolvedSideband";
  }
  j["epsilon_p"] = c.epsilon_p;
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot open for writing");
  out << text;
  if (!out) throw Error(path + ": write failed");
}

inline PhysicalConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

// Spectra -------------------------------------------------------------------

inline std::string spectrum_csv(const ResponseSpectrum& sp) {
  std::string out = "x_over_kappaN,re_eT,im_eT,abs_eT\n";
  for (std::size_t k = 0; k < sp.x_grid.size(); ++k) {
    const cplx e = sp.eps_T[k];
    out += detail::fmt17(sp.x_grid[k]) + ',' + detail::fmt17(e.real()) + ',' + detail::fmt17(e.imag()) + ',' +
           detail::fmt17(std::abs(e)) + '\n';
  }
  return out;
}

/// Parses spectrum CSV text. The abs column is ignored; metadata is unset.
inline ResponseSpectrum spectrum_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("spectrum CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x_over_kappaN,re_eT,im_eT,abs_eT") throw ParseError("spectrum CSV: unexpected header '" + line + "'");
  ResponseSpectrum sp;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    double x = 0, re = 0, im = 0, ab = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x, &re, &im, &ab) < 3) {
      throw ParseError("spectrum CSV: malformed row " + std::to_string(row));
    }
    sp.x_grid.push_back(x);
    sp.eps_T.emplace_back(re, im);
  }
  return sp;
}

inline ResponseSpectrum read_spectrum_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return spectrum_from_csv(ss.str());
}

// Reports -------------------------------------------------------------------

inline json window_report_json(const WindowReport& r) {
  json ws = json::array();
  for (const auto& w : r.windows) {
    ws.push_back({{"center_x", w.center_x},
                  {"depth", w.depth},
                  {"width", w.width},
                  {"prominence", w.prominence},
                  {"left_x", w.left_x},
                  {"right_x", w.right_x}});
  }
  json j;
  j["windows"] = ws;
  j["count"] = r.count;
  j["central_feature"] = r.central_feature ? json(std::string(to_string(*r.central_feature))) : json(nullptr);
  j["thresholds"] = {{"max_depth", r.thresholds.max_depth},
                     {"min_prominence", r.thresholds.min_prominence},
                     {"width_level", r.thresholds.width_level},
                     {"central_band", r.thresholds.central_band},
                     {"min_points", r.thresholds.min_points}};
  return j;
}

/// Fixed-column text table of a window report.
inline std::string window_table(const WindowReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%4s %12s %12s %12s %12s\n", "#", "center_x", "depth", "width", "prominence");
  out += buf;
  for (std::size_t k = 0; k < r.windows.size(); ++k) {
    const auto& w = r.windows[k];
    std::snprintf(buf, sizeof buf, "%4zu %12.6f %12.6f %12.6f %12.6f\n", k + 1, w.center_x, w.depth, w.width,
                  w.prominence);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "count: %zu  central: %s\n", r.count,
                r.central_feature ? std::string(to_string(*r.central_feature)).c_str() : "n/a");
  out += buf;
  return out;
}

inline json steady_state_json(const SteadyState& st) {
  json c = json::array();
  for (const auto& z : st.c_bar) c.push_back(detail::complex_json(z));
  return {{"c_bar", c},
          {"lambda_bar", st.lambda_bar},
          {"sigma_minus_bar", detail::complex_json(st.sigma_minus_bar)},
          {"sigma_z_bar", detail::complex_json(st.sigma_z_bar)},
          {"residual_norm", st.residual_norm},
          {"iterations", st.iterations}};
}

/// `t_us, re_c1, im_c1, ..., re_b, im_b, re_sm, im_sm[, sz]`; the σ_z column
/// (real part) is present for nonlinear runs only.
inline std::string trajectory_csv(const Trajectory& tr) {
  const bool has_sz = !tr.sigma_z.empty();
  std::string out = "t_us";
  for (int n = 1; n <= tr.n_cavities; ++n) out += ",re_c" + std::to_string(n) + ",im_c" + std::to_string(n);
  out += ",re_b,im_b,re_sm,im_sm";
  if (has_sz) out += ",sz";
  out += '\n';
  using detail::fmt17;
  for (std::size_t s = 0; s < tr.size(); ++s) {
    out += fmt17(tr.t[s]);
    for (int n = 0; n < tr.n_cavities; ++n) {
      const cplx z = tr.cavity(s, n);
      out += ',' + fmt17(z.real()) + ',' + fmt17(z.imag());
    }
    out += ',' + fmt17(tr.b[s].real()) + ',' + fmt17(tr.b[s].imag());
    out += ',' + fmt17(tr.sigma_minus[s].real()) + ',' + fmt17(tr.sigma_minus[s].imag());
    if (has_sz) out += ',' + fmt17(tr.sigma_z[s].real());
    out += '\n';
  }
  return out;
}

}  // namespace io
}  // namespace omit
