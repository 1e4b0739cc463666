// Command line front end for the deformed sine kernel toolkit.
//
// Subcommands:
//   det                  one Fredholm determinant, refined until converged
//   surface              log-determinant surface over a (y, s) rectangle
//   fields               dressed wave functions and first moment matrix
//   scattering           direct transform of a Gaussian pulse plus round trip data
//   classical            thinned-kernel determinants against the classical ODE
//   calibrate-constants  least squares fit of the structure constants
//   verify {trace|zs|pde|scattering|classical}   named residual checks
//
// Exit codes: 0 on success, 1 when a verification bound is violated or a
// computation fails, 2 on usage errors or invalid parameter values.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sinedet/classical_pv.hpp"
#include "sinedet/run_io.hpp"
#include "sinedet/scattering.hpp"

namespace {

using namespace sinedet;
using nlohmann::ordered_json;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return std::string(buf);
}

// ------------------------------------------------------------- flag parsing

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& tok) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + tok + "'");
  }
  if (used != tok.size())
    throw std::invalid_argument("not a number: '" + tok + "'");
  return v;
}

// Axis grid from "a:b:h" or "a:b"; a positive h_override replaces the step.
std::vector<double> axis_points(const std::string& text, double h_override) {
  auto parts = split(text, ':');
  if (parts.size() != 2 && parts.size() != 3)
    throw std::invalid_argument("range must look like a:b or a:b:h, got '" +
                                text + "'");
  double a = to_double(parts[0]);
  double b = to_double(parts[1]);
  double h = h_override;
  if (h <= 0.0) {
    if (parts.size() != 3)
      throw std::invalid_argument("range '" + text +
                                  "' has no step; pass a:b:h or a step flag");
    h = to_double(parts[2]);
  }
  if (!(h > 0.0)) throw std::invalid_argument("range step must be positive");
  if (b < a) throw std::invalid_argument("range end must not precede the start");
  int n = static_cast<int>(std::round((b - a) / h)) + 1;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + h * i;
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& tok : split(text, ',')) out.push_back(to_double(tok));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Flat "key = value" configuration, expanded into flags before parsing.
// A key whose flag already appears on the command line is skipped, so
// explicit flags override the file.
void expand_config(std::vector<std::string>& tokens) {
  std::string path;
  for (auto it = tokens.begin(); it != tokens.end();) {
    if (*it == "--config") {
      if (std::next(it) == tokens.end())
        throw std::invalid_argument("--config needs a file path");
      path = *std::next(it);
      it = tokens.erase(it, std::next(it, 2));
    } else if (it->rfind("--config=", 0) == 0) {
      path = it->substr(9);
      it = tokens.erase(it);
    } else {
      ++it;
    }
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line must look like key = value: '" +
                                  line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line without a key: '" + line + "'");
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    const std::string flag = "--" + key;
    bool given = false;
    for (const std::string& t : tokens)
      if (t == flag || t.rfind(flag + "=", 0) == 0) {
        given = true;
        break;
      }
    if (!given) {
      tokens.push_back(flag);
      tokens.push_back(value);
    }
  }
}

void add_config_flag(CLI::App* cmd) {
  static std::string sink;
  cmd->add_option("--config", sink,
                  "flat key = value file; command line flags override it");
}

// ------------------------------------------------------------ weight flags

struct WeightFlags {
  std::string weight = "none";
  double alpha = 1.0;
  double epsilon = 0.1;
  std::string profile;
  double y = 0.0;
};

void add_weight_flags(CLI::App* cmd, WeightFlags& wf) {
  cmd->add_option("--weight", wf.weight,
                  "weight family: none, fermi, gaussian_square, erf_window, "
                  "smoothed_indicator, profile")
      ->capture_default_str();
  cmd->add_option("--alpha", wf.alpha, "family parameter for fermi / erf_window")
      ->capture_default_str();
  cmd->add_option("--epsilon", wf.epsilon, "edge width for smoothed_indicator")
      ->capture_default_str();
  cmd->add_option("--profile", wf.profile,
                  "profile name (fermi_factor or gaussian_square); implies the "
                  "profile-induced weight w(u) = W(u^2 - y)")
      ->capture_default_str();
  cmd->add_option("--y", wf.y, "profile shift parameter")->capture_default_str();
}

Profile make_profile(const std::string& name) {
  if (name == "fermi_factor") return Profile::fermi_factor();
  if (name == "gaussian_square") return Profile::gaussian_square();
  throw std::invalid_argument("unknown profile '" + name + "'");
}

Weight make_weight(const WeightFlags& wf) {
  if (!wf.profile.empty() || wf.weight == "profile")
    return Weight::from_profile(
        make_profile(wf.profile.empty() ? "fermi_factor" : wf.profile), wf.y);
  if (wf.weight == "none") return Weight::none();
  if (wf.weight == "fermi") return Weight::fermi(wf.alpha);
  if (wf.weight == "gaussian_square") return Weight::gaussian_square();
  if (wf.weight == "erf_window") return Weight::erf_window(wf.alpha);
  if (wf.weight == "smoothed_indicator")
    return Weight::smoothed_indicator(wf.epsilon);
  throw std::invalid_argument("unknown weight family '" + wf.weight + "'");
}

// --------------------------------------------------------------- manifests

// Record every long option of the parsed subcommand as a string.  Values the
// user passed are stored verbatim so a recorded command line reproduces the
// run byte for byte; unset options fall back to their default string.
void record_parameters(RunManifest& man, const CLI::App* cmd) {
  for (const CLI::Option* opt : cmd->get_options()) {
    auto names = opt->get_lnames();
    if (names.empty()) continue;
    const std::string& name = names.front();
    if (name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      const auto& rs = opt->results();
      for (std::size_t i = 0; i < rs.size(); ++i)
        value += (i ? "," : "") + rs[i];
    } else {
      value = opt->get_default_str();
    }
    man.parameters[name] = value;
  }
}

std::filesystem::path prepare_out_dir(const std::string& out_dir) {
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ------------------------------------------------------------- subcommands

struct DetArgs {
  WeightFlags wf;
  double s = 1.0;
  double tol = 1e-11;
  int order = 16;
  std::string rep = "conjugated";
  std::string out_dir = ".";
};

int run_det(const DetArgs& a, const CLI::App* cmd,
            std::chrono::steady_clock::time_point t0) {
  Weight w = make_weight(a.wf);
  if (a.rep != "conjugated" && a.rep != "interval")
    throw std::invalid_argument("unknown representation '" + a.rep + "'");
  auto build = [&](int panels) {
    return a.rep == "interval" ? build_interval_operator(w, a.s, a.order, panels)
                               : build_conjugated_operator(w, a.s, a.order, panels);
  };
  RefineResult rr = refine_until_converged(build, 1, a.tol);
  const DetResult& d = rr.result;

  auto dir = prepare_out_dir(a.out_dir);
  ordered_json result;
  result["weight"] = w.describe();
  result["s"] = a.s;
  result["representation"] = a.rep;
  result["log_det_real"] = d.log_det.real();
  result["log_det_imag"] = d.log_det.imag();
  result["det_real"] = d.det.real();
  result["det_imag"] = d.det.imag();
  result["trace_real"] = d.trace.real();
  result["trace_imag"] = d.trace.imag();
  result["nodes"] = d.nodes;
  result["panels"] = rr.panels;
  result["est_error"] = d.est_error;
  {
    std::ofstream out(dir / "result.json");
    if (!out) throw std::runtime_error("cannot write result.json");
    out << result.dump(2) << "\n";
  }

  RunManifest man;
  man.command = "det";
  record_parameters(man, cmd);
  man.outputs = {"result.json"};
  man.residual_summary["refinement_delta"] = d.est_error;
  man.wall_time_seconds = seconds_since(t0);
  man.write((dir / "manifest.json").string());

  std::printf("log det = %.12g %+.12gi   det = %.12g %+.12gi   (%d nodes)\n",
              d.log_det.real(), d.log_det.imag(), d.det.real(), d.det.imag(),
              d.nodes);
  return 0;
}

struct SurfaceArgs {
  std::string profile = "fermi_factor";
  std::string y_range = "-2:2:0.05";
  std::string s_range = "0.2:3:0.02";
  double hy = 0.0;
  double hs = 0.0;
  int order = 16;
  std::string out_dir = ".";
};

// Heatmap script over the long-format surface table: one panel per residual
// column, s across and y up.
void write_heatmap_script(const std::string& script_path,
                          const std::string& csv_path,
                          const std::vector<std::pair<int, std::string>>& panels) {
  std::ofstream out(script_path);
  if (!out)
    throw std::runtime_error("write_heatmap_script: cannot open " + script_path);
  out << "set datafile separator ','\n";
  out << "set key autotitle columnhead\n";
  out << "set datafile missing 'nan'\n";
  out << "set xlabel 's'\n";
  out << "set ylabel 'y'\n";
  out << "set logscale cb\n";
  out << "set multiplot layout 1," << panels.size() << "\n";
  for (const auto& panel : panels) {
    out << "set title '" << panel.second << "'\n";
    out << "plot '" << csv_path << "' using 2:1:" << panel.first
        << " with image notitle\n";
  }
  out << "unset multiplot\n";
}

int run_surface(const SurfaceArgs& a, const CLI::App* cmd,
                std::chrono::steady_clock::time_point t0) {
  Profile prof = make_profile(a.profile);
  std::vector<double> ys = axis_points(a.y_range, a.hy);
  std::vector<double> ss = axis_points(a.s_range, a.hs);
  if (ys.size() < 2 || ss.size() < 2)
    throw std::invalid_argument("surface needs at least two points per axis");
  SurfaceSpec spec;
  spec.y0 = ys.front();
  spec.y1 = ys.back();
  spec.hy = ys[1] - ys[0];
  spec.s0 = ss.front();
  spec.s1 = ss.back();
  spec.hs = ss[1] - ss[0];
  spec.grid.order = a.order;
  SigmaSurface surf = build_sigma_surface(prof, spec);
  PdeResidualFields fields = pde_residual_fields(surf);

  CsvTable table{{"y", "s", "sigma", "p", "q", "res_sigma_form", "res_q_form",
                  "res_coupled"}};
  for (std::size_t iy = 0; iy < surf.ys.size(); ++iy)
    for (std::size_t is = 0; is < surf.ss.size(); ++is) {
      auto r = static_cast<Eigen::Index>(iy);
      auto c = static_cast<Eigen::Index>(is);
      table.add_row({surf.ys[iy], surf.ss[is], surf.sigma(r, c), surf.p(r, c),
                     surf.q(r, c), fields.sigma_form(r, c), fields.q_form(r, c),
                     fields.coupled(r, c)});
    }
  auto dir = prepare_out_dir(a.out_dir);
  table.write((dir / "surface.csv").string());
  write_plot_script((dir / "surface.gp").string(), "surface.csv",
                    {"sigma", "p", "q"}, "log-determinant surface slices",
                    "value");
  write_heatmap_script((dir / "residuals.gp").string(), "surface.csv",
                       {{6, "res_sigma_form"}, {7, "res_q_form"},
                        {8, "res_coupled"}});

  std::vector<int> strides;
  std::size_t ns = surf.ss.size();
  if (ns > 25 && surf.ys.size() > 9)
    strides = {4, 2, 1};
  else
    strides = {1};
  PdeReport pde = pde_residuals(surf, strides);

  RunManifest man;
  man.command = "surface";
  record_parameters(man, cmd);
  man.outputs = {"surface.csv", "surface.gp", "residuals.gp"};
  if (!pde.strides.empty()) {
    const PdeStrideResult& fin = pde.strides.back();
    man.residual_summary["sigma_form_max"] = fin.sigma_form_max;
    man.residual_summary["q_form_max"] = fin.q_form_max;
    man.residual_summary["coupled_max"] = fin.coupled_max;
    man.residual_summary["max_imag"] = surf.max_imag;
  }
  man.wall_time_seconds = seconds_since(t0);
  man.write((dir / "manifest.json").string());

  std::printf("surface: %zu x %zu nodes, max |Im log det| = %.3e\n",
              surf.ys.size(), surf.ss.size(), surf.max_imag);
  if (!pde.strides.empty())
    std::printf("finest-stride residuals: sigma-form %.3e, q-form %.3e, "
                "coupled %.3e\n",
                pde.strides.back().sigma_form_max,
                pde.strides.back().q_form_max, pde.strides.back().coupled_max);
  return 0;
}

struct FieldsArgs {
  WeightFlags wf;
  double s = 1.0;
  std::string out_dir = ".";
};

int run_fields(const FieldsArgs& a, const CLI::App* cmd,
               std::chrono::steady_clock::time_point t0) {
  Weight w = make_weight(a.wf);
  FieldSet fs = assemble_fields(w, a.s);
  compute_phi_psi(fs);
  U1Coefficients u1 = compute_U1(fs);
  TraceIdentityReport tr = verify_trace_identities(fs, u1);

  auto dir = prepare_out_dir(a.out_dir);
  CsvTable table{{"lambda", "phi_re", "phi_im", "psi_re", "psi_im", "w",
                  "w_prime"}};
  for (Eigen::Index i = 0; i < fs.phi.size(); ++i) {
    double lam = fs.lambda.nodes[static_cast<std::size_t>(i)];
    table.add_row({lam, fs.phi(i).real(), fs.phi(i).imag(), fs.psi(i).real(),
                   fs.psi(i).imag(), w.value(lam), w.derivative(lam)});
  }
  table.write((dir / "fields.csv").string());
  write_plot_script((dir / "fields.gp").string(), "fields.csv",
                    {"phi_re", "phi_im", "psi_re", "psi_im"},
                    "dressed wave functions", "value");

  ordered_json result;
  result["weight"] = w.describe();
  result["s"] = a.s;
  result["alpha_re"] = u1.alpha.real();
  result["alpha_im"] = u1.alpha.imag();
  result["beta_re"] = u1.beta.real();
  result["beta_im"] = u1.beta.imag();
  result["gamma_re"] = u1.gamma.real();
  result["gamma_im"] = u1.gamma.imag();
  result["p_re"] = u1.p.real();
  result["p_im"] = u1.p.imag();
  result["q_re"] = u1.q.real();
  result["q_im"] = u1.q.imag();
  result["sign"] = u1.sign;
  result["identity_residual"] = u1.identity_residual;
  result["trace_orthogonality"] = tr.orthogonality;
  result["trace_beta_residual"] = tr.beta_residual;
  result["trace_gamma_residual"] = tr.gamma_residual;
  result["trace_even_orthogonality"] = tr.even_orthogonality;
  {
    std::ofstream out(dir / "fields.json");
    if (!out) throw std::runtime_error("cannot write fields.json");
    out << result.dump(2) << "\n";
  }

  RunManifest man;
  man.command = "fields";
  record_parameters(man, cmd);
  man.outputs = {"fields.csv", "fields.gp", "fields.json"};
  man.residual_summary["identity_residual"] = u1.identity_residual;
  man.residual_summary["trace_max"] = tr.max_residual();
  man.wall_time_seconds = seconds_since(t0);
  man.write((dir / "manifest.json").string());

  std::printf("s = %g: p = %.9g%+.9gi, q = %.9g%+.9gi, trace residual max "
              "%.3e\n",
              a.s, u1.p.real(), u1.p.imag(), u1.q.real(), u1.q.imag(),
              tr.max_residual());
  return 0;
}

struct ScatteringArgs {
  std::string f = "gaussian";
  double amp = 1.0;
  double center = 0.0;
  std::string y_range = "-2:2:0.25";
  std::string s_seq = "1e-2,5e-3,2.5e-3";
  std::string out_dir = ".";
};

int run_scattering(const ScatteringArgs& a, const CLI::App* cmd,
                   std::chrono::steady_clock::time_point t0) {
  if (a.f != "gaussian")
    throw std::invalid_argument("unknown pulse family '" + a.f +
                                "' (built-in: gaussian)");
  std::vector<double> seq = parse_list(a.s_seq);
  if (seq.size() < 2)
    throw std::invalid_argument("--s-seq needs at least two points");
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    if (!(seq[i] > 0.0) || std::abs(seq[i + 1] / seq[i] - 0.5) > 1e-2)
      throw std::invalid_argument(
          "--s-seq must be a positive halving ladder like 1e-2,5e-3,2.5e-3");
  }
  GaussianPulse pulse{a.amp, a.center};
  ScatteringPair pair = W_from_f(pulse);
  std::vector<double> ys = axis_points(a.y_range, 0.0);

  auto dir = prepare_out_dir(a.out_dir);
  CsvTable wtab{{"r", "W"}};
  for (std::size_t i = 0; i < pair.r.size(); ++i)
    wtab.add_row({pair.r[i], pair.W_values[i]});
  wtab.write((dir / "transform.csv").string());

  CsvTable rtab{{"y", "f", "reconstructed", "abs_error"}};
  double sup = 0.0;
  for (double y : ys) {
    SmallSData d = small_s_initial_data(pair, y, seq.front());
    double err = std::abs(d.c0_richardson - d.pulse_value);
    sup = std::max(sup, err);
    rtab.add_row({y, d.pulse_value, d.c0_richardson, err});
  }
  rtab.write((dir / "roundtrip.csv").string());
  write_plot_script((dir / "roundtrip.gp").string(), "roundtrip.csv",
                    {"f", "reconstructed"}, "round trip to the initial pulse",
                    "value");

  RunManifest man;
  man.command = "scattering";
  record_parameters(man, cmd);
  man.outputs = {"transform.csv", "roundtrip.csv", "roundtrip.gp"};
  man.residual_summary["sup_roundtrip_defect"] = sup;
  man.residual_summary["W_at_zero"] = pair.W_at(0.0);
  man.wall_time_seconds = seconds_since(t0);
  man.write((dir / "manifest.json").string());

  std::printf("W(0) = %.12g, sup_y |c0 - f| = %.3e over %zu points\n",
              pair.W_at(0.0), sup, ys.size());
  return 0;
}

struct ClassicalArgs {
  double ell = 1.0;
  double s_max = 5.0;
  double s_step = 0.1;
  double det_tol = 1e-11;
  std::string out_dir = ".";
};

int run_classical(const ClassicalArgs& a, const CLI::App* cmd,
                  std::chrono::steady_clock::time_point t0) {
  if (!(a.s_step > 0.0) || !(a.s_max >= a.s_step))
    throw std::invalid_argument("need 0 < s-step <= s-max");
  std::vector<double> ss;
  for (double s = a.s_step; s <= a.s_max + 1e-12; s += a.s_step) ss.push_back(s);

  PVSolution sol = solve_sigma_pv(a.ell, a.s_max + 0.05);
  CsvTable table{{"s", "nu", "nu_prime", "logdet_fredholm", "logdet_ode",
                  "logdet_diff"}};
  double max_diff = 0.0;
  for (double s : ss) {
    double u0 = thinned_gap_determinant(a.ell, s, a.det_tol).log_det.real();
    double ode = sol.logdet_at(s).real();
    double diff = std::abs(u0 - ode);
    max_diff = std::max(max_diff, diff);
    table.add_row({s, sol.nu_at(s).real(), sol.nu_prime_at(s).real(), u0, ode,
                   diff});
  }
  auto dir = prepare_out_dir(a.out_dir);
  table.write((dir / "classical.csv").string());
  write_plot_script((dir / "classical.gp").string(), "classical.csv",
                    {"logdet_fredholm", "logdet_ode"},
                    "thinned-kernel determinant against the ODE", "log det");

  RunManifest man;
  man.command = "classical";
  record_parameters(man, cmd);
  man.outputs = {"classical.csv", "classical.gp"};
  man.residual_summary["max_logdet_diff"] = max_diff;
  man.residual_summary["ode_max_step_error"] = sol.max_residual;
  man.wall_time_seconds = seconds_since(t0);
  man.write((dir / "manifest.json").string());

  std::printf("ell = %g: max |log det - integral of nu/x| = %.3e over %zu "
              "values of s\n",
              a.ell, max_diff, ss.size());
  return 0;
}

struct CalibrateArgs {
  std::string profile = "fermi_factor";
  std::string ys = "-0.3,0,0.3";
  std::string ss = "0.7,0.9,1.1";
  double ds_step = 1e-3;
  double tol = 1e-3;
  std::string out_dir = ".";
};

int run_calibrate(const CalibrateArgs& a, const CLI::App* cmd,
                  std::chrono::steady_clock::time_point t0) {
  Profile prof = make_profile(a.profile);
  std::vector<double> ys = parse_list(a.ys);
  std::vector<double> ss = parse_list(a.ss);
  std::vector<U1Sample> samples = u1_sweep(prof, ys, ss, {}, a.ds_step);
  CalibrationReport rep = calibrate_constants(samples);

  ordered_json out = ordered_json::array();
  bool ok = rep.all_snapped(a.tol);
  for (const CalibrationFit& f : rep.fits) {
    ordered_json j;
    j["relation"] = f.relation;
    j["fitted_re"] = f.fitted.real();
    j["fitted_im"] = f.fitted.imag();
    j["snapped_num"] = f.num;
    j["snapped_den"] = f.den;
    j["snap_error"] = f.snap_error;
    j["rel_residual"] = f.rel_residual;
    out.push_back(j);
    std::printf("%-24s c = %+.6f%+.6fi  ->  %ld/%ld   snap residual %.2e, "
                "fit residual %.2e\n",
                f.relation.c_str(), f.fitted.real(), f.fitted.imag(), f.num,
                f.den, f.snap_error, f.rel_residual);
  }
  auto dir = prepare_out_dir(a.out_dir);
  {
    std::ofstream os(dir / "calibration.json");
    if (!os) throw std::runtime_error("cannot write calibration.json");
    os << out.dump(2) << "\n";
  }

  RunManifest man;
  man.command = "calibrate-constants";
  record_parameters(man, cmd);
  man.outputs = {"calibration.json"};
  for (const CalibrationFit& f : rep.fits)
    man.residual_summary["snap:" + f.relation] = f.snap_error;
  man.wall_time_seconds = seconds_since(t0);
  man.write((dir / "manifest.json").string());

  std::printf(ok ? "all constants snapped to small rationals\n"
                 : "snap residual above tolerance\n");
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------- verify

int check_line(const char* name, double value, double tol) {
  bool ok = value <= tol;
  std::printf("%-34s residual = %.3e   (tol %.1e)  %s\n", name, value, tol,
              ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

int check_order(const char* name, double order, double window) {
  bool ok = std::abs(order - 2.0) <= window;
  std::printf("%-34s order    = %.3f     (want 2 +/- %.2f)  %s\n", name, order,
              window, ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}

struct VerifyTraceArgs {
  WeightFlags wf;
  double s = 1.0;
  double tol = 1e-6;
  std::string out_dir = ".";
};

int run_verify_trace(const VerifyTraceArgs& a, const CLI::App* cmd,
                     std::chrono::steady_clock::time_point t0) {
  Weight w = make_weight(a.wf);
  FieldSet fs = assemble_fields(w, a.s);
  compute_phi_psi(fs);
  U1Coefficients u1 = compute_U1(fs);
  TraceIdentityReport tr = verify_trace_identities(fs, u1);
  int bad = 0;
  bad += check_line("phi/psi orthogonality", tr.orthogonality, a.tol);
  bad += check_line("beta trace identity", tr.beta_residual, a.tol);
  bad += check_line("gamma trace identity", tr.gamma_residual, a.tol);
  bad += check_line("even orthogonality", tr.even_orthogonality, a.tol);

  RunManifest man;
  man.command = "verify trace";
  record_parameters(man, cmd);
  man.residual_summary["orthogonality"] = tr.orthogonality;
  man.residual_summary["beta"] = tr.beta_residual;
  man.residual_summary["gamma"] = tr.gamma_residual;
  man.residual_summary["even_orthogonality"] = tr.even_orthogonality;
  man.wall_time_seconds = seconds_since(t0);
  man.write((prepare_out_dir(a.out_dir) / "manifest.json").string());
  return bad ? 1 : 0;
}

struct VerifyZsArgs {
  WeightFlags wf;
  double s = 1.0;
  double order_window = 0.3;
  double identity_tol = 1e-4;
  std::string out_dir = ".";
};

int run_verify_zs(const VerifyZsArgs& a, const CLI::App* cmd,
                  std::chrono::steady_clock::time_point t0) {
  Weight w = make_weight(a.wf);
  DynamicsReport rep = verify_dynamics(w, a.s);
  for (std::size_t i = 0; i < rep.steps.size(); ++i)
    std::printf("step h = %-9.2e  dynamics residual = %.3e\n", rep.steps[i],
                rep.residuals[i]);
  int bad = 0;
  for (std::size_t i = 0; i < rep.orders.size(); ++i)
    bad += check_order("dynamics convergence", rep.orders[i], a.order_window);
  bad += check_line("second log-derivative identity",
                    rep.second_logderiv_residual, a.identity_tol);

  RunManifest man;
  man.command = "verify zs";
  record_parameters(man, cmd);
  for (std::size_t i = 0; i < rep.orders.size(); ++i)
    man.residual_summary[fmt("dynamics_order_%zu", i)] = rep.orders[i];
  man.residual_summary["second_logderiv"] = rep.second_logderiv_residual;
  man.wall_time_seconds = seconds_since(t0);
  man.write((prepare_out_dir(a.out_dir) / "manifest.json").string());
  return bad ? 1 : 0;
}

struct VerifyPdeArgs {
  std::string profile = "fermi_factor";
  std::string y_range = "-2:2:0.05";
  std::string s_range = "0.2:3:0.02";
  double hy = 0.0;
  double hs = 0.0;
  std::string strides = "4,2,1";
  double order_window = 0.3;
  double q_floor = 1e-3;
  std::string out_dir = ".";
};

int run_verify_pde(const VerifyPdeArgs& a, const CLI::App* cmd,
                   std::chrono::steady_clock::time_point t0) {
  Profile prof = make_profile(a.profile);
  std::vector<double> ys = axis_points(a.y_range, a.hy);
  std::vector<double> ss = axis_points(a.s_range, a.hs);
  if (ys.size() < 2 || ss.size() < 2)
    throw std::invalid_argument("pde check needs at least two points per axis");
  SurfaceSpec spec;
  spec.y0 = ys.front();
  spec.y1 = ys.back();
  spec.hy = ys[1] - ys[0];
  spec.s0 = ss.front();
  spec.s1 = ss.back();
  spec.hs = ss[1] - ss[0];
  SigmaSurface surf = build_sigma_surface(prof, spec);
  std::vector<int> strides;
  for (double v : parse_list(a.strides)) strides.push_back(static_cast<int>(v));
  PdeReport rep = pde_residuals(surf, strides, a.q_floor);
  for (const PdeStrideResult& r : rep.strides)
    std::printf("stride %d: sigma-form residual %.3e, q-form residual %.3e, "
                "coupled residual %.3e\n",
                r.stride, r.sigma_form_max, r.q_form_max, r.coupled_max);
  int bad = 0;
  bad += check_order("sigma-form convergence", rep.sigma_form_order,
                     a.order_window);
  bad += check_order("q-form convergence", rep.q_form_order, a.order_window);
  bad += check_order("coupled-system convergence", rep.coupled_order,
                     a.order_window);

  RunManifest man;
  man.command = "verify pde";
  record_parameters(man, cmd);
  man.residual_summary["sigma_form_order"] = rep.sigma_form_order;
  man.residual_summary["q_form_order"] = rep.q_form_order;
  man.residual_summary["coupled_order"] = rep.coupled_order;
  if (!rep.strides.empty()) {
    const PdeStrideResult& fin = rep.strides.back();
    man.residual_summary["sigma_form_max"] = fin.sigma_form_max;
    man.residual_summary["q_form_max"] = fin.q_form_max;
    man.residual_summary["coupled_max"] = fin.coupled_max;
  }
  man.wall_time_seconds = seconds_since(t0);
  man.write((prepare_out_dir(a.out_dir) / "manifest.json").string());
  return bad ? 1 : 0;
}

struct VerifyScatteringArgs {
  std::string y_range = "-2:2:0.25";
  double tol = 5e-3;
  double w0_tol = 1e-10;
  std::string out_dir = ".";
};

int run_verify_scattering(const VerifyScatteringArgs& a, const CLI::App* cmd,
                          std::chrono::steady_clock::time_point t0) {
  std::vector<double> ys = axis_points(a.y_range, 0.0);
  int bad = 0;
  RunManifest man;
  man.command = "verify scattering";
  record_parameters(man, cmd);
  for (const GaussianPulse& pulse :
       {GaussianPulse{1.0, 0.0}, GaussianPulse{0.5, 1.0}}) {
    ScatteringPair pair = W_from_f(pulse);
    double sup = 0.0;
    for (double y : ys) {
      SmallSData d = small_s_initial_data(pair, y, 1e-2);
      sup = std::max(sup, std::abs(d.c0_richardson - d.pulse_value));
    }
    bad += check_line(
        fmt("round trip (amp %g, center %g)", pulse.amplitude, pulse.center)
            .c_str(),
        sup, a.tol);
    man.residual_summary[fmt("roundtrip_amp%g_center%g", pulse.amplitude,
                             pulse.center)] = sup;
  }
  ScatteringPair unit = W_from_f(GaussianPulse{1.0, 0.0});
  const double w0 = std::abs(unit.W_at(0.0) + std::tgamma(0.75));
  bad += check_line("W(0) + Gamma(3/4)", w0, a.w0_tol);
  man.residual_summary["w0_closed_form"] = w0;
  man.wall_time_seconds = seconds_since(t0);
  man.write((prepare_out_dir(a.out_dir) / "manifest.json").string());
  return bad ? 1 : 0;
}

struct VerifyClassicalArgs {
  std::string ells = "0.5,1";
  double s_max = 5.0;
  double s_step = 0.1;
  double det_tol = 1e-11;
  double tol = 1e-6;
  std::string out_dir = ".";
};

int run_verify_classical(const VerifyClassicalArgs& a, const CLI::App* cmd,
                         std::chrono::steady_clock::time_point t0) {
  std::vector<double> ss;
  for (double s = a.s_step; s <= a.s_max + 1e-12; s += a.s_step)
    ss.push_back(s);
  double bound = std::max(a.tol, 10.0 * a.det_tol);
  int bad = 0;
  RunManifest man;
  man.command = "verify classical";
  record_parameters(man, cmd);
  for (double ell : parse_list(a.ells)) {
    ClassicalComparison cmp = compare_classical(ell, ss, a.det_tol);
    bad += check_line(fmt("log det match (ell %g)", ell).c_str(), cmp.max_diff,
                      a.tol);
    bad += check_line(fmt("nu residual (ell %g)", ell).c_str(),
                      cmp.residual_nu, bound);
    bad += check_line(fmt("nu' residual (ell %g)", ell).c_str(),
                      cmp.residual_nu_prime, 10.0 * bound);
    man.residual_summary[fmt("max_diff_ell%g", ell)] = cmp.max_diff;
    man.residual_summary[fmt("residual_nu_ell%g", ell)] = cmp.residual_nu;
    man.residual_summary[fmt("residual_nu_prime_ell%g", ell)] =
        cmp.residual_nu_prime;
  }
  man.wall_time_seconds = seconds_since(t0);
  man.write((prepare_out_dir(a.out_dir) / "manifest.json").string());
  return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  auto t0 = std::chrono::steady_clock::now();
  CLI::App app{"deformed sine kernel determinants and their integrable "
               "structure"};
  app.require_subcommand(1);

  DetArgs det;
  CLI::App* det_cmd = app.add_subcommand("det", "compute one determinant");
  add_weight_flags(det_cmd, det.wf);
  det_cmd->add_option("--s", det.s, "interval parameter")->capture_default_str();
  det_cmd->add_option("--tol", det.tol, "refinement tolerance")
      ->capture_default_str();
  det_cmd->add_option("--order", det.order, "quadrature order per panel")
      ->capture_default_str();
  det_cmd->add_option("--rep", det.rep,
                      "operator representation: conjugated or interval")
      ->capture_default_str();
  det_cmd->add_option("--out-dir", det.out_dir, "output directory")
      ->capture_default_str();
  add_config_flag(det_cmd);

  SurfaceArgs surface;
  CLI::App* surface_cmd =
      app.add_subcommand("surface", "log-determinant surface over (y, s)");
  surface_cmd->add_option("--profile", surface.profile, "profile name")
      ->capture_default_str();
  surface_cmd->add_option("--y-range", surface.y_range, "y grid as a:b or a:b:h")
      ->capture_default_str();
  surface_cmd->add_option("--s-range", surface.s_range, "s grid as a:b or a:b:h")
      ->capture_default_str();
  surface_cmd->add_option("--hy", surface.hy, "y step, overrides the range step")
      ->capture_default_str();
  surface_cmd->add_option("--hs", surface.hs, "s step, overrides the range step")
      ->capture_default_str();
  surface_cmd->add_option("--order", surface.order, "quadrature order")
      ->capture_default_str();
  surface_cmd->add_option("--out-dir", surface.out_dir, "output directory")
      ->capture_default_str();
  add_config_flag(surface_cmd);

  FieldsArgs fields;
  CLI::App* fields_cmd =
      app.add_subcommand("fields", "dressed wave functions and moments");
  add_weight_flags(fields_cmd, fields.wf);
  fields_cmd->add_option("--s", fields.s, "interval parameter")
      ->capture_default_str();
  fields_cmd->add_option("--out-dir", fields.out_dir, "output directory")
      ->capture_default_str();
  add_config_flag(fields_cmd);

  ScatteringArgs scattering;
  CLI::App* scattering_cmd = app.add_subcommand(
      "scattering", "direct transform of a Gaussian pulse and round trip");
  scattering_cmd->add_option("--f", scattering.f, "pulse family")
      ->capture_default_str();
  scattering_cmd->add_option("--amp", scattering.amp, "pulse amplitude")
      ->capture_default_str();
  scattering_cmd->add_option("--center", scattering.center, "pulse center")
      ->capture_default_str();
  scattering_cmd
      ->add_option("--y-range", scattering.y_range, "round trip points a:b:h")
      ->capture_default_str();
  scattering_cmd->add_option("--s-seq", scattering.s_seq,
                             "halving s ladder for the extrapolation")
      ->capture_default_str();
  scattering_cmd->add_option("--out-dir", scattering.out_dir,
                             "output directory")
      ->capture_default_str();
  add_config_flag(scattering_cmd);

  ClassicalArgs classical;
  CLI::App* classical_cmd = app.add_subcommand(
      "classical", "thinned-kernel determinants against the classical ODE");
  classical_cmd->add_option("--ell", classical.ell, "thinning parameter in (0,1]")
      ->capture_default_str();
  classical_cmd->add_option("--s-max", classical.s_max, "largest s value")
      ->capture_default_str();
  classical_cmd->add_option("--s-step", classical.s_step, "s grid step")
      ->capture_default_str();
  classical_cmd->add_option("--det-tol", classical.det_tol,
                            "determinant refinement tolerance")
      ->capture_default_str();
  classical_cmd->add_option("--out-dir", classical.out_dir, "output directory")
      ->capture_default_str();
  add_config_flag(classical_cmd);

  CalibrateArgs calibrate;
  CLI::App* calibrate_cmd = app.add_subcommand(
      "calibrate-constants", "fit the structure constants and snap to rationals");
  calibrate_cmd->add_option("--profile", calibrate.profile, "profile name")
      ->capture_default_str();
  calibrate_cmd->add_option("--ys", calibrate.ys, "comma separated y values")
      ->capture_default_str();
  calibrate_cmd->add_option("--ss", calibrate.ss, "comma separated s values")
      ->capture_default_str();
  calibrate_cmd->add_option("--ds-step", calibrate.ds_step,
                            "finite difference step in s")
      ->capture_default_str();
  calibrate_cmd->add_option("--tol", calibrate.tol, "snap tolerance")
      ->capture_default_str();
  calibrate_cmd->add_option("--out-dir", calibrate.out_dir, "output directory")
      ->capture_default_str();
  add_config_flag(calibrate_cmd);

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "named residual checks with exit status");
  verify_cmd->require_subcommand(1);

  VerifyTraceArgs vtrace;
  CLI::App* vtrace_cmd =
      verify_cmd->add_subcommand("trace", "trace identities for phi and psi");
  add_weight_flags(vtrace_cmd, vtrace.wf);
  vtrace_cmd->add_option("--s", vtrace.s, "interval parameter")
      ->capture_default_str();
  vtrace_cmd->add_option("--tol", vtrace.tol, "residual tolerance")
      ->capture_default_str();
  vtrace_cmd->add_option("--out-dir", vtrace.out_dir, "output directory")
      ->capture_default_str();
  add_config_flag(vtrace_cmd);

  VerifyZsArgs vzs;
  CLI::App* vzs_cmd = verify_cmd->add_subcommand(
      "zs", "s-dynamics of the wave functions and the log-derivative identity");
  add_weight_flags(vzs_cmd, vzs.wf);
  vzs_cmd->add_option("--s", vzs.s, "interval parameter")->capture_default_str();
  vzs_cmd->add_option("--order-window", vzs.order_window,
                      "allowed deviation from order 2")
      ->capture_default_str();
  vzs_cmd->add_option("--identity-tol", vzs.identity_tol,
                      "tolerance for the second log-derivative identity")
      ->capture_default_str();
  vzs_cmd->add_option("--out-dir", vzs.out_dir, "output directory")
      ->capture_default_str();
  add_config_flag(vzs_cmd);

  VerifyPdeArgs vpde;
  CLI::App* vpde_cmd = verify_cmd->add_subcommand(
      "pde", "sigma-form, q-form and coupled-system residual convergence");
  vpde_cmd->add_option("--profile", vpde.profile, "profile name")
      ->capture_default_str();
  vpde_cmd->add_option("--y-range", vpde.y_range, "y grid as a:b or a:b:h")
      ->capture_default_str();
  vpde_cmd->add_option("--s-range", vpde.s_range, "s grid as a:b or a:b:h")
      ->capture_default_str();
  vpde_cmd->add_option("--hy", vpde.hy, "y step, overrides the range step")
      ->capture_default_str();
  vpde_cmd->add_option("--hs", vpde.hs, "s step, overrides the range step")
      ->capture_default_str();
  vpde_cmd->add_option("--strides", vpde.strides, "comma separated strides")
      ->capture_default_str();
  vpde_cmd->add_option("--order-window", vpde.order_window,
                       "allowed deviation from order 2")
      ->capture_default_str();
  vpde_cmd->add_option("--q-floor", vpde.q_floor,
                       "skip q-form points with |q| below this")
      ->capture_default_str();
  vpde_cmd->add_option("--out-dir", vpde.out_dir, "output directory")
      ->capture_default_str();
  add_config_flag(vpde_cmd);

  VerifyScatteringArgs vscat;
  CLI::App* vscat_cmd = verify_cmd->add_subcommand(
      "scattering", "round trip from pulse to initial data");
  vscat_cmd->add_option("--y-range", vscat.y_range, "round trip points a:b:h")
      ->capture_default_str();
  vscat_cmd->add_option("--tol", vscat.tol, "round trip tolerance")
      ->capture_default_str();
  vscat_cmd->add_option("--w0-tol", vscat.w0_tol,
                        "tolerance for the closed form value at zero")
      ->capture_default_str();
  vscat_cmd->add_option("--out-dir", vscat.out_dir, "output directory")
      ->capture_default_str();
  add_config_flag(vscat_cmd);

  VerifyClassicalArgs vclass;
  CLI::App* vclass_cmd = verify_cmd->add_subcommand(
      "classical", "thinned determinants against the classical ODE");
  vclass_cmd->add_option("--ell", vclass.ells, "comma separated ell values")
      ->capture_default_str();
  vclass_cmd->add_option("--s-max", vclass.s_max, "largest s value")
      ->capture_default_str();
  vclass_cmd->add_option("--s-step", vclass.s_step, "s grid step")
      ->capture_default_str();
  vclass_cmd->add_option("--det-tol", vclass.det_tol,
                         "determinant refinement tolerance")
      ->capture_default_str();
  vclass_cmd->add_option("--tol", vclass.tol, "comparison tolerance")
      ->capture_default_str();
  vclass_cmd->add_option("--out-dir", vclass.out_dir, "output directory")
      ->capture_default_str();
  add_config_flag(vclass_cmd);

  std::vector<std::string> tokens(argv + 1, argv + argc);
  try {
    expand_config(tokens);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  std::reverse(tokens.begin(), tokens.end());
  try {
    app.parse(tokens);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (det_cmd->parsed()) return run_det(det, det_cmd, t0);
    if (surface_cmd->parsed()) return run_surface(surface, surface_cmd, t0);
    if (fields_cmd->parsed()) return run_fields(fields, fields_cmd, t0);
    if (scattering_cmd->parsed())
      return run_scattering(scattering, scattering_cmd, t0);
    if (classical_cmd->parsed())
      return run_classical(classical, classical_cmd, t0);
    if (calibrate_cmd->parsed())
      return run_calibrate(calibrate, calibrate_cmd, t0);
    if (verify_cmd->parsed()) {
      if (vtrace_cmd->parsed()) return run_verify_trace(vtrace, vtrace_cmd, t0);
      if (vzs_cmd->parsed()) return run_verify_zs(vzs, vzs_cmd, t0);
      if (vpde_cmd->parsed()) return run_verify_pde(vpde, vpde_cmd, t0);
      if (vscat_cmd->parsed())
        return run_verify_scattering(vscat, vscat_cmd, t0);
      if (vclass_cmd->parsed())
        return run_verify_classical(vclass, vclass_cmd, t0);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "error: no subcommand\n");
  return 2;
}
