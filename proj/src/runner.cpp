#include "nlsdamp/runner.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "nlsdamp/airy.hpp"
#include "nlsdamp/analysis.hpp"
#include "nlsdamp/csv.hpp"
#include "nlsdamp/errors.hpp"
#include "nlsdamp/profiles.hpp"
#include "nlsdamp/reduced.hpp"

#ifndef NLSDAMP_VERSION
#define NLSDAMP_VERSION "0.0.0"
#endif

namespace nlsdamp::runner {

namespace fs = std::filesystem;

const char* tool_version() { return NLSDAMP_VERSION; }

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::PdeSeries: return "pde_series";
    case ExperimentKind::ReducedVsPde: return "reduced_vs_pde";
    case ExperimentKind::KappaTable: return "kappa_table";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
  if (name == "pde_series") return ExperimentKind::PdeSeries;
  if (name == "reduced_vs_pde") return ExperimentKind::ReducedVsPde;
  if (name == "kappa_table") return ExperimentKind::KappaTable;
  throw ValidationError("unknown experiment kind '" + name +
                        "' (expected pde_series, reduced_vs_pde or kappa_table)");
}

// ---------------------------------------------------------------------------
// Hashing

namespace {

std::string to_hex(const unsigned char* digest, unsigned len) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw IoError("sha256: digest initialization failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) throw IoError("sha256: digest update failed");
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    if (EVP_DigestFinal_ex(ctx_, md, &len) != 1) throw IoError("sha256: digest finalization failed");
    return to_hex(md, len);
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_string(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for hashing");
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

// ---------------------------------------------------------------------------
// Config schema

namespace {

// Walks one JSON object, demanding every key it is asked for and rejecting
// any key nobody asked for once finish() runs.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError("config: " + where() + " must be an object");
  }

  const Json& at(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) throw ValidationError("config: missing required key '" + join(key) + "'");
    return *it;
  }

  double num(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number()) throw ValidationError("config: '" + join(key) + "' must be a number");
    return v.get<double>();
  }
  std::int64_t integer(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
      throw ValidationError("config: '" + join(key) + "' must be an integer");
    return v.get<std::int64_t>();
  }
  bool flag(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_boolean()) throw ValidationError("config: '" + join(key) + "' must be true or false");
    return v.get<bool>();
  }
  std::string str(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_string()) throw ValidationError("config: '" + join(key) + "' must be a string");
    return v.get<std::string>();
  }
  std::vector<double> nums(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_array()) throw ValidationError("config: '" + join(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ValidationError("config: '" + join(key) + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<std::string> strs(const std::string& key) {
    const Json& v = at(key);
    if (!v.is_array()) throw ValidationError("config: '" + join(key) + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ValidationError("config: '" + join(key) + "' must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }
  Fields sub(const std::string& key) { return Fields(at(key), join(key)); }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ValidationError("config: unknown key '" + join(key) + "'");
  }

  [[nodiscard]] std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  [[nodiscard]] std::string where() const { return path_.empty() ? "top level" : "'" + path_ + "'"; }
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

SolverConfig solver_from_json(Fields f) {
  SolverConfig c;
  c.p = f.num("p");
  c.q = f.num("q");
  c.delta = f.num("delta");
  {
    Fields ic = f.sub("initial_condition");
    c.initial_condition.kind = initial_kind_from_string(ic.str("kind"));
    c.initial_condition.amplitude = ic.num("amplitude");
    c.initial_condition.T_c = ic.num("T_c");
    c.initial_condition.alpha = ic.num("alpha");
    ic.finish();
  }
  c.domain_half_width = f.num("domain_half_width");
  c.n_points = static_cast<int>(f.integer("n_points"));
  c.core_spacing = f.num("core_spacing");
  c.dt0 = f.num("dt0");
  c.time_order = static_cast<int>(f.integer("time_order"));
  c.focus_stop = f.num("focus_stop");
  c.t_end = f.num("t_end");
  c.sample_stride = static_cast<int>(f.integer("sample_stride"));
  c.stop_after_growth = f.num("stop_after_growth");
  c.snapshot_focus = f.nums("snapshot_focus");
  c.snapshot_growth = f.nums("snapshot_growth");
  c.boundary_tol = f.num("boundary_tol");
  const std::int64_t steps = f.integer("max_steps");
  if (steps < 1) throw ValidationError("config: '" + f.join("max_steps") + "' must be positive");
  c.max_steps = static_cast<std::uint64_t>(steps);
  f.finish();
  return c;
}

Json solver_to_json(const SolverConfig& c) {
  return Json{{"p", c.p},
              {"q", c.q},
              {"delta", c.delta},
              {"initial_condition",
               {{"kind", to_string(c.initial_condition.kind)},
                {"amplitude", c.initial_condition.amplitude},
                {"T_c", c.initial_condition.T_c},
                {"alpha", c.initial_condition.alpha}}},
              {"domain_half_width", c.domain_half_width},
              {"n_points", c.n_points},
              {"core_spacing", c.core_spacing},
              {"dt0", c.dt0},
              {"time_order", c.time_order},
              {"focus_stop", c.focus_stop},
              {"t_end", c.t_end},
              {"sample_stride", c.sample_stride},
              {"stop_after_growth", c.stop_after_growth},
              {"snapshot_focus", c.snapshot_focus},
              {"snapshot_growth", c.snapshot_growth},
              {"boundary_tol", c.boundary_tol},
              {"max_steps", c.max_steps}};
}

void check_rate_models(const std::vector<std::string>& models) {
  for (const auto& m : models)
    if (m != "sqrt" && m != "sqrt_free" && m != "loglog")
      throw ValidationError("config: analysis.rate_models entry '" + m +
                            "' is not one of sqrt, sqrt_free, loglog");
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  Fields top(j, "");
  ExperimentConfig c;
  c.id = top.str("id");
  if (c.id.empty() || c.id.find_first_of("/\\") != std::string::npos || c.id == "." || c.id == "..")
    throw ValidationError("config: 'id' must be a non-empty name without path separators");
  c.kind = experiment_kind_from_string(top.str("kind"));
  c.description = top.str("description");
  c.desk_scale_overrides = top.strs("desk_scale_overrides");

  if (c.kind == ExperimentKind::KappaTable) {
    Fields k = top.sub("kappa");
    c.kappa.d = static_cast<int>(k.integer("d"));
    c.kappa.q_values = k.nums("q_values");
    c.kappa.deltas = k.nums("deltas");
    c.kappa.tol = k.num("tol");
    c.kappa.trajectory_delta = k.num("trajectory_delta");
    c.kappa.trajectory_q = k.nums("trajectory_q");
    c.kappa.trajectory_T_c = k.num("trajectory_T_c");
    c.kappa.trajectory_t_end = k.num("trajectory_t_end");
    k.finish();
    if (c.kappa.d < 1) throw ValidationError("config: 'kappa.d' must be at least 1");
    if (c.kappa.q_values.empty()) throw ValidationError("config: 'kappa.q_values' must not be empty");
    if (!(c.kappa.trajectory_delta > 0.0))
      throw ValidationError("config: 'kappa.trajectory_delta' must be positive");
    if (!(c.kappa.trajectory_T_c > 0.0) || !(c.kappa.trajectory_t_end > 0.0))
      throw ValidationError("config: 'kappa.trajectory_T_c' and 'kappa.trajectory_t_end' must be positive");
  } else {
    const Json& runs = top.at("runs");
    if (!runs.is_array() || runs.empty()) throw ValidationError("config: 'runs' must be a non-empty array");
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const std::string path = "runs[" + std::to_string(i) + "]";
      Fields r(runs[i], path);
      PdeRunSpec spec;
      spec.label = r.str("label");
      spec.solver = solver_from_json(r.sub("solver"));
      r.finish();
      try {
        validate(spec.solver);
      } catch (const ValidationError& e) {
        throw ValidationError("config: " + path + ": " + e.what());
      }
      c.runs.push_back(std::move(spec));
    }
    Fields a = top.sub("analysis");
    c.analysis.asymmetry = a.flag("asymmetry");
    c.analysis.asymmetry_window_fraction = a.num("asymmetry_window_fraction");
    c.analysis.profile_fits = a.flag("profile_fits");
    c.analysis.profile_window = a.num("profile_window");
    c.analysis.rate_models = a.strs("rate_models");
    c.analysis.rate_min_focus = a.num("rate_min_focus");
    a.finish();
    check_rate_models(c.analysis.rate_models);
    if (!(c.analysis.asymmetry_window_fraction > 0.0))
      throw ValidationError("config: 'analysis.asymmetry_window_fraction' must be positive");
    if (!(c.analysis.profile_window > 0.0))
      throw ValidationError("config: 'analysis.profile_window' must be positive");

    if (c.kind == ExperimentKind::ReducedVsPde) {
      Fields rd = top.sub("reduced");
      c.reduced.tol = rd.num("tol");
      c.reduced.pre_L_floor = rd.num("pre_L_floor");
      c.reduced.post_L_fraction = rd.num("post_L_fraction");
      rd.finish();
      for (std::size_t i = 0; i < c.runs.size(); ++i)
        if (c.runs[i].solver.initial_condition.kind != InitialKind::Explicit)
          throw ValidationError("config: runs[" + std::to_string(i) +
                                "]: reduced_vs_pde requires explicit initial data");
    }
  }
  top.finish();
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j{{"id", c.id},
         {"kind", to_string(c.kind)},
         {"description", c.description},
         {"desk_scale_overrides", c.desk_scale_overrides}};
  if (c.kind == ExperimentKind::KappaTable) {
    j["kappa"] = Json{{"d", c.kappa.d},
                      {"q_values", c.kappa.q_values},
                      {"deltas", c.kappa.deltas},
                      {"tol", c.kappa.tol},
                      {"trajectory_delta", c.kappa.trajectory_delta},
                      {"trajectory_q", c.kappa.trajectory_q},
                      {"trajectory_T_c", c.kappa.trajectory_T_c},
                      {"trajectory_t_end", c.kappa.trajectory_t_end}};
    return j;
  }
  Json runs = Json::array();
  for (const auto& r : c.runs) runs.push_back(Json{{"label", r.label}, {"solver", solver_to_json(r.solver)}});
  j["runs"] = runs;
  j["analysis"] = Json{{"asymmetry", c.analysis.asymmetry},
                       {"asymmetry_window_fraction", c.analysis.asymmetry_window_fraction},
                       {"profile_fits", c.analysis.profile_fits},
                       {"profile_window", c.analysis.profile_window},
                       {"rate_models", c.analysis.rate_models},
                       {"rate_min_focus", c.analysis.rate_min_focus}};
  if (c.kind == ExperimentKind::ReducedVsPde)
    j["reduced"] = Json{{"tol", c.reduced.tol},
                        {"pre_L_floor", c.reduced.pre_L_floor},
                        {"post_L_fraction", c.reduced.post_L_fraction}};
  return j;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Presets

namespace {

// Grid, time step and budget shared by every desk-scale PDE preset.
SolverConfig desk_solver(double p, double q, double delta, InitialCondition ic) {
  SolverConfig c;
  c.p = p;
  c.q = q;
  c.delta = delta;
  c.initial_condition = ic;
  c.domain_half_width = 40.0;
  c.n_points = 2048;
  c.core_spacing = 0.0;
  c.dt0 = 2e-3;
  c.time_order = 4;
  c.focus_stop = 1e4;
  c.t_end = 5.0;
  c.sample_stride = 1;
  c.stop_after_growth = 1000.0;
  c.boundary_tol = 1e-8;
  c.max_steps = 20'000'000;
  return c;
}

InitialCondition gaussian(double a) { return {InitialKind::Gaussian, a, 1.0, 1.0}; }
InitialCondition scaled_ground(double a) { return {InitialKind::ScaledGround, a, 1.0, 1.0}; }
InitialCondition explicit_ic(double T_c, double alpha) { return {InitialKind::Explicit, 1.0, T_c, alpha}; }

std::string delta_label(double delta) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "delta=%g", delta);
  return buf;
}

AnalysisSpec width_analysis(std::vector<std::string> rate_models) {
  AnalysisSpec a;
  a.asymmetry = true;
  a.rate_models = std::move(rate_models);
  return a;
}

const char* kFocusOverride =
    "focus_stop=1e4 with a matching core spacing (undamped collapse is not followed past focusing 1e4)";

ExperimentConfig make_fig1() {
  ExperimentConfig c;
  c.id = "fig1";
  c.description = "p = q in {5, 7}, delta = 5e-3, initial data 1.05 R_p";
  for (double p : {5.0, 7.0}) {
    SolverConfig s = desk_solver(p, p, 5e-3, scaled_ground(1.05));
    s.focus_stop = 1e3;
    s.stop_after_growth = 10.0;
    s.t_end = 3.0;
    c.runs.push_back({p == 5.0 ? "p=5" : "p=7", s});
  }
  c.analysis.asymmetry = false;
  c.desk_scale_overrides = {"focus_stop=1e3 (the unarrested p=7 collapse is followed to focusing 1e3 only)"};
  return c;
}

ExperimentConfig ladder(const std::string& id, const std::string& description, double p, double q,
                        double amplitude, const std::vector<double>& deltas,
                        std::vector<std::string> rate_models) {
  ExperimentConfig c;
  c.id = id;
  c.description = description;
  for (double d : deltas) c.runs.push_back({delta_label(d), desk_solver(p, q, d, gaussian(amplitude))});
  c.analysis = width_analysis(std::move(rate_models));
  c.desk_scale_overrides = {kFocusOverride};
  return c;
}

ExperimentConfig profile_preset(const std::string& id, const std::string& description, double p,
                                double q, double amplitude, double delta,
                                std::vector<double> focus, std::vector<double> growth) {
  ExperimentConfig c;
  c.id = id;
  c.description = description;
  SolverConfig s = desk_solver(p, q, delta, gaussian(amplitude));
  s.snapshot_focus = std::move(focus);
  s.snapshot_growth = std::move(growth);
  c.runs.push_back({delta_label(delta), s});
  c.analysis.asymmetry = true;
  c.analysis.profile_fits = true;
  c.desk_scale_overrides = {kFocusOverride};
  return c;
}

ExperimentConfig make_fig8() {
  ExperimentConfig c;
  c.id = "fig8";
  c.kind = ExperimentKind::ReducedVsPde;
  c.description = "reduced equations against the PDE, explicit-solution data, d = 1, delta = 2.5e-5";
  for (double q : {1.0, 3.0, 5.0, 7.0}) {
    SolverConfig s = desk_solver(5.0, q, 2.5e-5, explicit_ic(1.0, 1.0));
    s.focus_stop = 1e3;
    s.stop_after_growth = 0.0;
    s.t_end = 1.8;
    char label[32];
    std::snprintf(label, sizeof label, "q=%g", q);
    c.runs.push_back({label, s});
  }
  c.analysis.asymmetry = false;
  c.desk_scale_overrides = {"T_c=1 for the explicit data",
                            "t_end=1.8 (comparison stops once L regrows to L(0)/2)"};
  return c;
}

ExperimentConfig make_fig9() {
  ExperimentConfig c;
  c.id = "fig9";
  c.kind = ExperimentKind::KappaTable;
  c.description = "reduced equations at delta = 1e-7 for several q, and kappa(q)";
  c.kappa.d = 1;
  c.kappa.q_values = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0};
  c.kappa.deltas = {1e-6, 1e-7, 1e-8};
  c.kappa.tol = 1e-10;
  c.kappa.trajectory_delta = 1e-7;
  c.kappa.trajectory_q = {1.0, 3.0, 5.0, 7.0};
  c.kappa.trajectory_T_c = 1.0;
  c.kappa.trajectory_t_end = 3.0;
  c.desk_scale_overrides = {"kappa extrapolated to delta -> 0 from the ladder 1e-6, 1e-7, 1e-8"};
  return c;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"fig1", "fig2", "fig3", "fig4", "fig5",
                                                 "fig6", "fig7", "fig8", "fig9"};
  return names;
}

ExperimentConfig preset(const std::string& name) {
  // Snapshot triggers are focusing factors 1/L before the maximum and
  // L/L_min ratios after it.
  if (name == "fig1") return make_fig1();
  if (name == "fig2")
    return ladder("fig2", "p = 7, q = 9, initial data 1.3 exp(-x^2)", 7, 9, 1.3,
                  {0.0, 5e-3, 7.5e-3, 1e-2}, {"sqrt_free"});
  if (name == "fig3")
    return profile_preset("fig3", "p = 7, q = 9, delta = 5e-3: fitted R and Q profiles", 7, 9, 1.3, 5e-3,
                          {1.0 / 0.38, 5.0, 20.0}, {0.0119 / 0.0118, 0.135 / 0.0118});
  if (name == "fig4")
    return ladder("fig4", "p = 7, q = 11, initial data 1.3 exp(-x^2)", 7, 11, 1.3, {0.0, 5e-4, 1e-3},
                  {"sqrt_free"});
  if (name == "fig5")
    return profile_preset("fig5", "p = 7, q = 11, delta = 5e-4: fitted R and Q profiles", 7, 11, 1.3, 5e-4,
                          {1.0 / 0.33, 1.0 / 0.22, 1.0 / 0.033}, {0.02343 / 0.02341, 0.0267 / 0.02341});
  if (name == "fig6") {
    // Fits against R at the default snapshots give the closeness at T_max for every delta.
    auto c = ladder("fig6", "p = 5, q = 7, initial data 1.6 exp(-x^2)", 5, 7, 1.6, {1e-5, 2.5e-4, 5e-4}, {});
    c.analysis.profile_fits = true;
    return c;
  }
  if (name == "fig7")
    return profile_preset("fig7", "p = 5, q = 7, delta = 1e-5: fitted R profile", 5, 7, 1.6, 1e-5,
                          {1.0 / 0.45, 1.0 / 0.24, 1.0 / 0.0037}, {0.0046 / 0.0032});
  if (name == "fig8") return make_fig8();
  if (name == "fig9") return make_fig9();
  throw ValidationError("unknown preset '" + name + "' (expected fig1 ... fig9)");
}

ExperimentConfig resolve_experiment(const std::string& name_or_path) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return preset(name_or_path);
  if (!fs::exists(name_or_path))
    throw ValidationError("'" + name_or_path + "' is neither a preset name nor an existing config file");
  return load_config(name_or_path);
}

fs::path default_output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("nlsdamp_out");
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

Json num_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double json_num(const Json& v) { return v.is_number() ? v.get<double>() : std::nan(""); }

// Reference profiles are expensive; one experiment solves each p at most once.
class ProfileCache {
 public:
  const GroundStateProfile& ground(double p) {
    auto it = ground_.find(p);
    if (it == ground_.end()) it = ground_.emplace(p, solve_ground_state(1, p)).first;
    return it->second;
  }
  const QProfile& chirped(double p) {
    auto it = q_.find(p);
    if (it == q_.end()) it = q_.emplace(p, solve_Q_profile(p)).first;
    return it->second;
  }

 private:
  std::map<double, GroundStateProfile> ground_;
  std::map<double, QProfile> q_;
};

std::string sanitize(const std::string& label) {
  std::string out;
  for (char ch : label) out.push_back(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' ? ch : '_');
  return out;
}

Json fit_json(const RateFit& f) {
  return Json{{"model", to_string(f.model_kind)}, {"T_c", f.T_c_fit},
              {"prefactor", f.prefactor},         {"exponent", f.exponent},
              {"residual", f.residual},           {"condition", num_or_null(f.condition)},
              {"ill_conditioned", f.ill_conditioned}, {"t_first", f.t_first},
              {"t_last", f.t_last},               {"points", f.points}};
}

struct ProfileRow {
  double run, snapshot, t, kind, L_fit, rel_distance, window, points;
};

// Everything derived from one run's stored data. Used both right after the
// run and by analyze(), so both paths produce identical summaries.
Json analyze_run(const ExperimentConfig& cfg, std::size_t index, const DiagnosticsSeries& diag,
                 const std::vector<RadialField>& snapshots, ProfileCache& profiles,
                 std::vector<ProfileRow>& profile_rows, bool focus_stopped) {
  const SolverConfig& s = cfg.runs[index].solver;
  Json out;
  const TmaxResult tm = detect_Tmax(diag);
  double L_min = std::numeric_limits<double>::infinity();
  for (const auto& smp : diag.samples) L_min = std::min(L_min, smp.L);
  const bool arrested = !focus_stopped && !tm.on_boundary;
  out["arrested"] = arrested;
  out["T_max"] = tm.t;
  out["sup_norm_at_T_max"] = tm.sup_norm;
  out["L_min"] = L_min;
  out["max_focus"] = diag.samples.empty() ? 1.0 : diag.samples.front().L / L_min;

  if (cfg.analysis.asymmetry && arrested) {
    try {
      AsymmetryOptions opt;
      opt.window_fraction = cfg.analysis.asymmetry_window_fraction;
      const AsymmetryRecord a = asymmetry_and_phase(diag, tm.t, opt);
      out["asymmetry"] = Json{{"window", a.window},         {"pre_slope", a.pre_slope},
                              {"post_slope", a.post_slope}, {"ratio", a.ratio},
                              {"theta_at_arrest", a.theta_at_arrest}};
    } catch (const ValidationError& e) {
      out["asymmetry"] = Json{{"error", e.what()}};
    }
  }

  if (s.delta == 0.0 && !cfg.analysis.rate_models.empty()) {
    const auto widths = width_series(diag, s.p);
    Json fits = Json::object();
    for (const auto& name : cfg.analysis.rate_models) {
      RateFitOptions opt;
      opt.min_focus = cfg.analysis.rate_min_focus;
      opt.L0 = diag.samples.front().L;
      RateModel model = RateModel::SquareRoot;
      if (name == "sqrt_free") opt.free_exponent = true;
      if (name == "loglog") model = RateModel::LogLog;
      try {
        fits[name] = fit_json(fit_blowup_rate(widths, model, opt));
      } catch (const std::exception& e) {
        fits[name] = Json{{"error", e.what()}};
      }
    }
    out["rate_fits"] = fits;
  }

  if (cfg.analysis.profile_fits) {
    Json rows = Json::array();
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
      auto record = [&](const ProfileFit& f) {
        rows.push_back(Json{{"snapshot", snapshots[k].label}, {"t", f.t},
                            {"profile", to_string(f.profile_kind)}, {"L_fit", f.L_fit},
                            {"rel_distance", f.rel_distance}, {"points", f.points}});
        profile_rows.push_back({static_cast<double>(index), static_cast<double>(k), f.t,
                                f.profile_kind == ProfileKind::R ? 0.0 : 1.0, f.L_fit, f.rel_distance,
                                f.window, static_cast<double>(f.points)});
      };
      try {
        record(fit_profile(snapshots[k], profiles.ground(s.p), s.p, cfg.analysis.profile_window));
        if (s.p > 5.0) record(fit_profile(snapshots[k], profiles.chirped(s.p), s.p, cfg.analysis.profile_window));
      } catch (const ValidationError& e) {
        rows.push_back(Json{{"snapshot", snapshots[k].label}, {"error", e.what()}});
      }
    }
    out["profile_fits"] = rows;
  }
  return out;
}

void write_profile_rows(const std::vector<ProfileRow>& rows, const fs::path& path) {
  csv::Table tab;
  tab.comments.push_back("profile: 0 = R, 1 = Q; snapshot indexes the run's snapshot list in the manifest");
  tab.header = {"run", "snapshot", "t", "profile", "L_fit", "rel_distance", "window", "points"};
  for (const auto& r : rows)
    tab.rows.push_back({r.run, r.snapshot, r.t, r.kind, r.L_fit, r.rel_distance, r.window, r.points});
  csv::write(path, tab);
}

void write_summary_csv(const Json& runs, const fs::path& path) {
  csv::Table tab;
  tab.header = {"run",    "p",        "q",          "delta",     "arrested",   "max_focus", "T_max",
                "L_min",  "pre_slope", "post_slope", "ratio",    "theta",      "power_ratio"};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Json& r = runs[i];
    const Json& a = r["analysis"];
    const Json asym = a.contains("asymmetry") ? a["asymmetry"] : Json::object();
    auto field = [&](const char* key) { return asym.contains(key) ? json_num(asym[key]) : std::nan(""); };
    tab.rows.push_back({static_cast<double>(i), json_num(r["p"]), json_num(r["q"]), json_num(r["delta"]),
                        a["arrested"].get<bool>() ? 1.0 : 0.0, json_num(a["max_focus"]),
                        json_num(a["T_max"]), json_num(a["L_min"]), field("pre_slope"),
                        field("post_slope"), field("ratio"), field("theta_at_arrest"),
                        json_num(r["power_ratio"])});
  }
  csv::write(path, tab);
}

class Inventory {
 public:
  explicit Inventory(fs::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, const std::string& role, Json extra = Json::object()) {
    const fs::path p = dir_ / name;
    extra["path"] = name;
    extra["role"] = role;
    extra["sha256"] = sha256_file(p);
    extra["bytes"] = static_cast<std::uint64_t>(fs::file_size(p));
    files_.push_back(std::move(extra));
  }
  [[nodiscard]] const Json& files() const { return files_; }

 private:
  fs::path dir_;
  Json files_ = Json::array();
};

std::string config_hash(const ExperimentConfig& c) { return sha256_string(config_to_json(c).dump()); }

std::string run_context(const ExperimentConfig& c, std::size_t i) {
  return "experiment '" + c.id + "', run " + std::to_string(i) + " ('" + c.runs[i].label + "'): ";
}

struct Comparison {
  double pre_max = 0.0, post_max = 0.0;
  std::size_t pre_points = 0, post_points = 0;
};

// Relative L difference between PDE samples and the reduced trajectory,
// linearly interpolated in time, on the pre- and post-arrest windows.
Comparison compare_widths(const DiagnosticsSeries& diag, const ReducedTrajectory& tr,
                          const ReducedComparisonSpec& spec) {
  Comparison c;
  const double L0 = tr.states.front().L;
  std::size_t k = 0;
  for (const auto& s : diag.samples) {
    while (k + 1 < tr.states.size() && tr.states[k + 1].t < s.t) ++k;
    if (k + 1 >= tr.states.size()) break;
    const auto& a = tr.states[k];
    const auto& b = tr.states[k + 1];
    const double Lr = a.L + (b.L - a.L) * (s.t - a.t) / (b.t - a.t);
    const double e = std::abs(s.L - Lr) / Lr;
    if (s.t < tr.t_min) {
      if (Lr >= spec.pre_L_floor) {
        c.pre_max = std::max(c.pre_max, e);
        ++c.pre_points;
      }
    } else if (Lr <= spec.post_L_fraction * L0) {
      c.post_max = std::max(c.post_max, e);
      ++c.post_points;
    }
  }
  return c;
}

ReducedTrajectory reduced_for_run(const SolverConfig& s, const GroundStateProfile& g,
                                  const ReducedComparisonSpec& spec) {
  const auto& ic = s.initial_condition;
  ReducedOptions opt;
  opt.tol = spec.tol;
  opt.max_rel_step = 0.002;  // dense output for interpolation at the PDE sample times
  const ReducedState start{0.0, ic.alpha * ic.T_c, -ic.alpha, 0.0};
  return integrate_reduced(reduced_params(g, s.q, s.delta), start, s.t_end, opt);
}

Json comparison_json(const std::string& label, double q, const DiagnosticsSeries& diag,
                     const ReducedTrajectory& tr, const Comparison& c) {
  double L_min = std::numeric_limits<double>::infinity(), t_min = 0.0;
  for (const auto& s : diag.samples)
    if (s.L < L_min) {
      L_min = s.L;
      t_min = s.t;
    }
  return Json{{"label", label},
              {"q", q},
              {"t_min_pde", t_min},
              {"L_min_pde", L_min},
              {"t_min_reduced", tr.t_min},
              {"L_min_reduced", tr.L_min},
              {"reduced_post_slope", num_or_null(tr.post_slope)},
              {"pre_max_rel_diff", c.pre_max},
              {"post_max_rel_diff", c.post_max},
              {"pre_points", c.pre_points},
              {"post_points", c.post_points}};
}

void write_comparison_csv(const Json& rows, const fs::path& path) {
  csv::Table tab;
  tab.header = {"q", "t_min_pde", "L_min_pde", "t_min_reduced", "L_min_reduced", "pre_max_rel_diff",
                "post_max_rel_diff"};
  for (const auto& r : rows)
    tab.rows.push_back({json_num(r["q"]), json_num(r["t_min_pde"]), json_num(r["L_min_pde"]),
                        json_num(r["t_min_reduced"]), json_num(r["L_min_reduced"]),
                        json_num(r["pre_max_rel_diff"]), json_num(r["post_max_rel_diff"])});
  csv::write(path, tab);
}

std::string q_tag(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", q);
  return sanitize(buf);
}

Json run_kappa(const ExperimentConfig& cfg, const fs::path& dir, Inventory& inv) {
  const KappaSpec& k = cfg.kappa;
  std::vector<KappaEstimate> rows;
  Json table = Json::array();
  for (double q : k.q_values) {
    KappaEstimate e;
    try {
      e = kappa_of_q(q, k.d, k.deltas, k.tol);
    } catch (const ValidationError& ex) {
      throw ValidationError("experiment '" + cfg.id + "': " + ex.what());
    } catch (const NumericalError& ex) {
      throw NumericalError("experiment '" + cfg.id + "': " + ex.what());
    }
    table.push_back(Json{{"q", q},
                         {"kappa", e.kappa},
                         {"kappa_delta", e.kappa_linear},
                         {"kappa_sqrt_delta", e.kappa_sqrt},
                         {"residual_delta", e.residual_linear},
                         {"residual_sqrt_delta", e.residual_sqrt},
                         {"chosen", e.chosen},
                         {"settled", e.settled},
                         {"slopes", e.slopes}});
    rows.push_back(std::move(e));
  }
  export_kappa_table(rows, dir / "kappa.csv");
  inv.add("kappa.csv", "kappa_table");

  const GroundStateProfile g = solve_ground_state(k.d, 1.0 + 4.0 / k.d);
  Json trajectories = Json::array();
  for (double q : k.trajectory_q) {
    ReducedOptions opt;
    opt.tol = k.tol;
    const ReducedState start{0.0, k.trajectory_T_c, -1.0, 0.0};
    const auto tr = integrate_reduced(reduced_params(g, q, k.trajectory_delta), start, k.trajectory_t_end, opt);
    const std::string name = "trajectory_q" + q_tag(q) + ".csv";
    export_trajectory(tr, dir / name);
    inv.add(name, "reduced_trajectory", Json{{"q", q}});
    trajectories.push_back(Json{{"q", q},
                                {"minimum_found", tr.minimum_found},
                                {"t_min", tr.t_min},
                                {"L_min", tr.L_min},
                                {"post_slope", num_or_null(tr.post_slope)}});
  }
  Json summary;
  summary["kappa"] = table;
  summary["trajectories"] = trajectories;
  summary["s_star"] = find_s_star();
  summary["kappa_critical"] = kappa_critical();
  return summary;
}

Json pde_run_record(const PdeRunSpec& spec, const RunResult& r) {
  return Json{{"label", spec.label},
              {"p", spec.solver.p},
              {"q", spec.solver.q},
              {"delta", spec.solver.delta},
              {"reason", to_string(r.reason)},
              {"message", r.message},
              {"steps", r.steps},
              {"initial_power", r.initial_power},
              {"power_ratio", num_or_null(r.power_ratio)},
              {"t_final", r.diagnostics.samples.back().t}};
}

void write_manifest(const fs::path& path, const Json& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace

ManifestRef run_experiment(const ExperimentConfig& cfg, const fs::path& output_root) {
  const fs::path dir = output_root / cfg.id;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  Inventory inv(dir);
  ProfileCache profiles;
  const std::string hash = config_hash(cfg);
  Json summary = Json::object();

  if (cfg.kind == ExperimentKind::KappaTable) {
    summary = run_kappa(cfg, dir, inv);
  } else {
    Json runs = Json::array();
    Json comparisons = Json::array();
    std::vector<ProfileRow> profile_rows;
    for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
      const PdeRunSpec& spec = cfg.runs[i];
      RunResult r;
      try {
        r = run(spec.solver);
      } catch (const ValidationError& e) {
        throw ValidationError(run_context(cfg, i) + e.what());
      } catch (const NumericalError& e) {
        throw NumericalError(run_context(cfg, i) + e.what());
      }
      if (r.reason == StopReason::NonFinite || r.reason == StopReason::StepBudget)
        throw NumericalError(run_context(cfg, i) + "solver stopped (" + to_string(r.reason) + ")" +
                             (r.message.empty() ? "" : ": " + r.message));

      const std::string tag = "run" + std::to_string(i);
      write_diagnostics(r.diagnostics, dir / (tag + "_diagnostics.csv"), hash);
      inv.add(tag + "_diagnostics.csv", "diagnostics", Json{{"run", i}});
      for (const auto& snap : r.snapshots) {
        const std::string name = tag + "_" + sanitize(snap.label) + ".csv";
        write_snapshot(snap, dir / name);
        inv.add(name, "snapshot", Json{{"run", i}, {"label", snap.label}});
      }

      Json record = pde_run_record(spec, r);
      record["analysis"] = analyze_run(cfg, i, r.diagnostics, r.snapshots, profiles, profile_rows,
                                       r.reason == StopReason::FocusStop);
      runs.push_back(std::move(record));

      if (cfg.kind == ExperimentKind::ReducedVsPde) {
        const auto tr = reduced_for_run(spec.solver, profiles.ground(5.0), cfg.reduced);
        const std::string name = "reduced_" + tag + ".csv";
        export_trajectory(tr, dir / name);
        inv.add(name, "reduced_trajectory", Json{{"run", i}});
        comparisons.push_back(
            comparison_json(spec.label, spec.solver.q, r.diagnostics, tr, compare_widths(r.diagnostics, tr, cfg.reduced)));
      }
    }
    summary["runs"] = runs;
    write_summary_csv(runs, dir / "summary.csv");
    inv.add("summary.csv", "summary");
    if (cfg.analysis.profile_fits) {
      write_profile_rows(profile_rows, dir / "profile_fits.csv");
      inv.add("profile_fits.csv", "profile_fits");
    }
    if (cfg.kind == ExperimentKind::ReducedVsPde) {
      summary["comparison"] = comparisons;
      write_comparison_csv(comparisons, dir / "comparison.csv");
      inv.add("comparison.csv", "comparison");
    }
  }

  Json manifest{{"experiment_id", cfg.id},
                {"kind", to_string(cfg.kind)},
                {"tool", {{"name", "nlsdamp"}, {"version", tool_version()}}},
                {"config", config_to_json(cfg)},
                {"config_hash", hash},
                {"desk_scale_overrides", cfg.desk_scale_overrides},
                {"files", inv.files()},
                {"summary", summary}};
  const fs::path mpath = dir / "manifest.json";
  write_manifest(mpath, manifest);
  verify_manifest(mpath);
  return {mpath, manifest};
}

ManifestRef run_preset(const std::string& name, const fs::path& output_root) {
  return run_experiment(preset(name), output_root);
}

void verify_manifest(const fs::path& manifest_path) {
  const Json m = read_json(manifest_path);
  if (!m.contains("files") || !m["files"].is_array())
    throw IoError(manifest_path.string() + ": no file inventory");
  const fs::path dir = manifest_path.parent_path();
  for (const auto& f : m["files"]) {
    const fs::path p = dir / f.at("path").get<std::string>();
    if (!fs::exists(p)) throw IoError("manifest lists missing file " + p.string());
    if (sha256_file(p) != f.at("sha256").get<std::string>())
      throw IoError("hash mismatch for " + p.string());
  }
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

void set_path(Json& obj, const std::string& dotted, double value, const std::string& full) {
  Json* cur = &obj;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(key))
      throw ValidationError("sweep: parameter '" + full + "' is not addressable in this experiment");
    if (dot == std::string::npos) {
      Json& leaf = (*cur)[key];
      if (leaf.is_number_integer() || leaf.is_number_unsigned()) {
        if (value != std::floor(value))
          throw ValidationError("sweep: parameter '" + full + "' takes integer values");
        leaf = static_cast<std::int64_t>(value);
      } else if (leaf.is_number()) {
        leaf = value;
      } else {
        throw ValidationError("sweep: parameter '" + full + "' is not numeric");
      }
      return;
    }
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

int error_code_of(const std::exception_ptr& ep, std::string& message) {
  try {
    std::rethrow_exception(ep);
  } catch (const ValidationError& e) {
    message = e.what();
    return 2;
  } catch (const NumericalError& e) {
    message = e.what();
    return 3;
  } catch (const IoError& e) {
    message = e.what();
    return 4;
  } catch (const std::exception& e) {
    message = e.what();
    return 1;
  }
}

}  // namespace

std::vector<SweepItem> sweep(const ExperimentConfig& base, const std::string& parameter,
                             const std::vector<double>& values, int parallelism, const fs::path& output_root) {
  if (parallelism < 1) throw ValidationError("sweep: parallelism must be at least 1");
  if (std::set<double>(values.begin(), values.end()).size() != values.size())
    throw ValidationError("sweep: values must be distinct");
  if (parameter.empty()) throw ValidationError("sweep: empty parameter name");

  // Build every variant up front: addressing errors abort the sweep before any
  // run starts, while a value the config rejects only fails its own item.
  std::vector<SweepItem> items(values.size());
  std::vector<ExperimentConfig> configs(values.size());
  std::vector<bool> runnable(values.size(), false);
  const Json base_json = config_to_json(base);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    items[i].value = v;
    Json j = base_json;
    if (parameter.rfind("kappa.", 0) == 0) {
      if (base.kind != ExperimentKind::KappaTable)
        throw ValidationError("sweep: parameter '" + parameter + "' needs a kappa_table experiment");
      set_path(j["kappa"], parameter.substr(6), v, parameter);
    } else {
      if (base.kind == ExperimentKind::KappaTable)
        throw ValidationError("sweep: kappa_table experiments take 'kappa.' parameters");
      for (auto& r : j["runs"]) set_path(r["solver"], parameter, v, parameter);
    }
    char suffix[96];
    std::snprintf(suffix, sizeof suffix, "_%s_%.6g", parameter.c_str(), v);
    j["id"] = base.id + sanitize(suffix);
    try {
      configs[i] = config_from_json(j);
      runnable[i] = true;
    } catch (...) {
      items[i].error_code = error_code_of(std::current_exception(), items[i].error);
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      if (!runnable[i]) continue;
      try {
        items[i].manifest_path = run_experiment(configs[i], output_root).path;
        items[i].ok = true;
      } catch (...) {
        items[i].error_code = error_code_of(std::current_exception(), items[i].error);
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(parallelism), configs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return items;
}

// ---------------------------------------------------------------------------
// Analyze and export

Json analyze(const fs::path& manifest_path) {
  verify_manifest(manifest_path);
  const Json m = read_json(manifest_path);
  const ExperimentConfig cfg = config_from_json(m.at("config"));
  const fs::path dir = manifest_path.parent_path();
  Json report{{"experiment_id", cfg.id}, {"manifest", manifest_path.string()}, {"verified", true}};
  if (cfg.kind == ExperimentKind::KappaTable) {
    const csv::Table tab = csv::read(dir / "kappa.csv");
    Json rows = Json::array();
    const auto q = tab.column_values("q"), kappa = tab.column_values("kappa");
    for (std::size_t i = 0; i < q.size(); ++i) rows.push_back(Json{{"q", q[i]}, {"kappa", kappa[i]}});
    report["kappa"] = rows;
    report["kappa_critical"] = kappa_critical();
    return report;
  }

  std::vector<DiagnosticsSeries> diags(cfg.runs.size());
  std::vector<std::vector<RadialField>> snaps(cfg.runs.size());
  std::vector<bool> seen(cfg.runs.size(), false);
  for (const auto& f : m.at("files")) {
    const std::string role = f.at("role").get<std::string>();
    if (role != "diagnostics" && role != "snapshot") continue;
    const std::size_t i = f.at("run").get<std::size_t>();
    if (i >= cfg.runs.size()) throw IoError("manifest lists a file for unknown run " + std::to_string(i));
    const fs::path p = dir / f.at("path").get<std::string>();
    if (role == "diagnostics") {
      diags[i] = read_diagnostics(p);
      seen[i] = true;
    } else {
      snaps[i].push_back(read_snapshot(p));
    }
  }
  ProfileCache profiles;
  std::vector<ProfileRow> rows;
  Json runs = Json::array();
  const Json& recorded = m.at("summary").at("runs");
  for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
    if (!seen[i]) throw IoError("manifest has no diagnostics for run " + std::to_string(i));
    const bool focus_stopped = recorded.at(i).at("reason").get<std::string>() == to_string(StopReason::FocusStop);
    Json a = analyze_run(cfg, i, diags[i], snaps[i], profiles, rows, focus_stopped);
    runs.push_back(Json{{"label", cfg.runs[i].label}, {"analysis", a}});
  }
  report["runs"] = runs;
  return report;
}

void export_artifact(const std::string& what, const Json& params, const fs::path& path) {
  Fields f(params, what);
  if (what == "ground_state") {
    const int d = static_cast<int>(f.integer("d"));
    const double p = f.num("p");
    f.finish();
    export_profile(solve_ground_state(d, p), path);
  } else if (what == "q_profile") {
    const double p = f.num("p");
    f.finish();
    export_profile(solve_Q_profile(p), path);
  } else if (what == "reduced_trajectory") {
    const int d = static_cast<int>(f.integer("d"));
    const double q = f.num("q"), delta = f.num("delta"), T_c = f.num("T_c"), t_end = f.num("t_end");
    f.finish();
    if (!(T_c > 0.0)) throw ValidationError("export: T_c must be positive");
    const auto g = solve_ground_state(d, 1.0 + 4.0 / d);
    export_trajectory(integrate_reduced(reduced_params(g, q, delta), explicit_initial_state(T_c), t_end), path);
  } else if (what == "kappa_table") {
    const int d = static_cast<int>(f.integer("d"));
    const auto qs = f.nums("q_values"), deltas = f.nums("deltas");
    f.finish();
    std::vector<KappaEstimate> rows;
    for (double q : qs) rows.push_back(kappa_of_q(q, d, deltas));
    export_kappa_table(rows, path);
  } else {
    throw ValidationError("export: unknown artifact '" + what +
                          "' (expected ground_state, q_profile, reduced_trajectory or kappa_table)");
  }
}

}  // namespace nlsdamp::runner
