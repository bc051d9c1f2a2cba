// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Experiments are written below $NLSDAMP_OUTPUT_ROOT/acceptance (or the system
// temporary directory when the variable is unset) and reused across criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "nlsdamp/airy.hpp"
#include "nlsdamp/profiles.hpp"
#include "nlsdamp/reduced.hpp"
#include "nlsdamp/runner.hpp"
#include "nlsdamp/solver.hpp"

namespace fs = std::filesystem;
namespace rn = nlsdamp::runner;
using rn::Json;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Fail : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

fs::path acceptance_root() {
  const char* env = std::getenv(rn::kOutputRootEnv);
  const fs::path base = env != nullptr && *env != '\0' ? fs::path(env) : fs::temp_directory_path();
  return base / "nlsdamp_acceptance";
}

// Each experiment runs once; later criteria reuse the manifest.
const rn::ManifestRef& experiment(const rn::ExperimentConfig& cfg) {
  static std::map<std::string, rn::ManifestRef> cache;
  auto it = cache.find(cfg.id);
  if (it == cache.end()) it = cache.emplace(cfg.id, rn::run_experiment(cfg, acceptance_root())).first;
  return it->second;
}

const rn::ManifestRef& preset_run(const std::string& name) { return experiment(rn::preset(name)); }

rn::ExperimentConfig critical_rates_config() {
  rn::ExperimentConfig c = rn::preset("fig6");
  c.id = "critical_rates";
  c.description = "p = 5, q = 7, delta = 0, initial data 1.6 exp(-x^2): rate fits";
  c.runs.resize(1);
  c.runs[0].label = "delta=0";
  c.runs[0].solver.delta = 0.0;
  c.analysis = rn::AnalysisSpec{};
  c.analysis.rate_models = {"sqrt", "loglog"};
  return c;
}

const Json& runs_of(const rn::ManifestRef& m) { return m.manifest.at("summary").at("runs"); }

nlsdamp::DiagnosticsSeries diagnostics(const rn::ManifestRef& m, int run) {
  return nlsdamp::read_diagnostics(m.path.parent_path() / ("run" + std::to_string(run) + "_diagnostics.csv"));
}

const Json& asymmetry(const Json& run) {
  const Json& a = run.at("analysis");
  if (!a.contains("asymmetry")) throw Fail(run.at("label").get<std::string>() + ": no asymmetry record");
  if (a.at("asymmetry").contains("error"))
    throw Fail(run.at("label").get<std::string>() + ": " + a.at("asymmetry").at("error").get<std::string>());
  return a.at("asymmetry");
}

double profile_distance(const Json& run, const std::string& snapshot, const std::string& kind) {
  for (const auto& f : run.at("analysis").at("profile_fits"))
    if (f.contains("snapshot") && f.at("snapshot") == snapshot && f.at("profile") == kind)
      return f.at("rel_distance").get<double>();
  throw Fail("no " + kind + " fit for snapshot " + snapshot);
}

// Runs sorted by decreasing delta (the order of a damping ladder), damped runs only.
std::vector<Json> damped_by_decreasing_delta(const rn::ManifestRef& m) {
  std::vector<Json> out;
  for (const auto& r : runs_of(m))
    if (r.at("delta").get<double>() > 0.0) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const Json& a, const Json& b) { return a.at("delta") > b.at("delta"); });
  return out;
}

// ---------------------------------------------------------------------------

Verdict kappa_closed_form() {
  const auto start = std::chrono::steady_clock::now();
  const double s = nlsdamp::find_s_star();
  const double k = nlsdamp::kappa_critical();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = std::abs(s + 2.6663) <= 1e-3 && std::abs(k - 1.614) <= 1e-3 && secs < 1.0;
  return {ok, "s*=" + num(s, 8) + " kappa=" + num(k, 8) + " in " + num(secs, 2) + " s"};
}

Verdict kappa_of_q_reduced() {
  const auto ladder = rn::preset("fig9").kappa.deltas;
  const double kc = nlsdamp::kappa_critical();
  std::vector<double> ks;
  std::string detail;
  for (double q : {1.0, 3.0, 5.0, 7.0}) {
    ks.push_back(nlsdamp::kappa_of_q(q, 1, ladder).kappa);
    detail += "kappa(" + num(q, 2) + ")=" + num(ks.back(), 6) + " ";
  }
  bool ok = ks[2] >= 1.58 && ks[2] <= 1.65 && std::abs(ks[2] - kc) / kc < 0.02 && std::abs(ks[0] - 1.0) < 0.01;
  for (std::size_t i = 1; i < ks.size(); ++i) ok = ok && ks[i] > ks[i - 1];
  return {ok, detail + "(Airy " + num(kc, 6) + ")"};
}

Verdict ground_state_oracle() {
  double worst = 0.0;
  for (double p : {5.0, 7.0}) {
    const auto g = nlsdamp::solve_ground_state(1, p);
    const double A = std::pow((p + 1.0) / 2.0, 1.0 / (p - 1.0));
    for (std::size_t i = 0; i < g.r_grid.size(); ++i) {
      const double exact = A * std::pow(1.0 / std::cosh((p - 1.0) / 2.0 * g.r_grid[i]), 2.0 / (p - 1.0));
      worst = std::max(worst, std::abs(g.R_values[i] - exact));
    }
  }
  // int sqrt(3) sech(2x) dx over the line = sqrt(3) pi / 2.
  const double oracle = std::sqrt(3.0) * std::numbers::pi / 2.0;
  const double P = nlsdamp::solve_ground_state(1, 5.0).P_cr;
  const bool ok = worst < 1e-8 && std::abs(P - 2.720699) <= 1e-5 && std::abs(P - oracle) <= 1e-5;
  return {ok, "sup error " + num(worst, 3) + ", P_cr=" + num(P, 10) + " (oracle " + num(oracle, 10) + ")"};
}

Verdict reduced_vs_pde() {
  const auto& m = preset_run("fig8");
  bool ok = true;
  std::string detail;
  const auto& cmp = m.manifest.at("summary").at("comparison");
  if (cmp.size() != 4) throw Fail("expected four comparisons");
  for (const auto& c : cmp) {
    const double pre = c.at("pre_max_rel_diff").get<double>(), post = c.at("post_max_rel_diff").get<double>();
    ok = ok && pre < 0.02 && post < 0.10 && c.at("pre_points").get<int>() > 0 && c.at("post_points").get<int>() > 0;
    detail += c.at("label").get<std::string>() + ": pre " + num(pre, 3) + " post " + num(post, 3) + "; ";
  }
  return {ok, detail};
}

Verdict critical_threshold() {
  const auto& runs = runs_of(preset_run("fig1"));
  const Json& a5 = runs.at(0).at("analysis");
  const Json& a7 = runs.at(1).at("analysis");
  const double f5 = a5.at("max_focus").get<double>(), f7 = a7.at("max_focus").get<double>();
  const bool ok = a5.at("arrested").get<bool>() && f5 >= 5.0 && f5 <= 20.0 && !a7.at("arrested").get<bool>() &&
                  f7 >= 1e3;
  return {ok, "p=5 arrested=" + a5.at("arrested").dump() + " focus " + num(f5) + "; p=7 arrested=" +
                  a7.at("arrested").dump() + " focus " + num(f7)};
}

Verdict supercritical_asymmetry() {
  bool ok = true;
  std::string detail;
  for (const char* fig : {"fig2", "fig4"}) {
    const auto runs = damped_by_decreasing_delta(preset_run(fig));
    double prev_post = -1.0;
    detail += std::string(fig) + ":";
    for (const auto& r : runs) {
      const Json& as = asymmetry(r);
      const double ratio = as.at("ratio").get<double>(), post = as.at("post_slope").get<double>();
      ok = ok && r.at("analysis").at("arrested").get<bool>() && ratio > 1.0 && post > prev_post;
      prev_post = post;
      detail += " delta=" + num(r.at("delta").get<double>(), 3) + " ratio " + num(ratio) + " post " + num(post);
    }
    detail += "; ";
  }
  return {ok, detail};
}

Verdict profile_flip() {
  const Json& run = runs_of(preset_run("fig3")).at(0);
  bool ok = true;
  int focus_checked = 0;
  std::string detail;
  for (const auto& f : run.at("analysis").at("profile_fits")) {
    const std::string label = f.at("snapshot").get<std::string>();
    if (label.rfind("focus=", 0) != 0 || f.at("profile") != "Q") continue;
    const double focus = std::stod(label.substr(6));
    if (focus < 5.0 - 1e-9 || focus > 20.0 + 1e-9) continue;
    const double dq = f.at("rel_distance").get<double>(), dr = profile_distance(run, label, "R");
    ok = ok && dq < dr;
    ++focus_checked;
    detail += label + ": Q " + num(dq, 3) + " R " + num(dr, 3) + "; ";
  }
  const double dq = profile_distance(run, "max", "Q"), dr = profile_distance(run, "max", "R");
  ok = ok && focus_checked > 0 && dr < dq;
  return {ok, detail + "T_max: R " + num(dr, 3) + " Q " + num(dq, 3)};
}

Verdict critical_loglog_continuation() {
  const auto runs = damped_by_decreasing_delta(preset_run("fig6"));
  bool ok = runs.size() == 3;
  double prev_ratio = 0.0, prev_theta = -1e300;
  std::string detail;
  for (const auto& r : runs) {
    const Json& as = asymmetry(r);
    const double ratio = as.at("ratio").get<double>(), theta = as.at("theta_at_arrest").get<double>();
    const double dR = profile_distance(r, "max", "R");
    ok = ok && r.at("analysis").at("arrested").get<bool>() && ratio > prev_ratio && theta > prev_theta && dR < 0.15;
    prev_ratio = ratio;
    prev_theta = theta;
    detail += "delta=" + num(r.at("delta").get<double>(), 3) + " ratio " + num(ratio) + " theta " + num(theta) +
              " dR(T_max) " + num(dR, 3) + "; ";
  }
  return {ok, detail};
}

Verdict conservation() {
  const auto& fig2 = preset_run("fig2");
  std::string detail;

  // Undamped runs: supercritical from fig2 and the critical run used for rate fits.
  double drift = 0.0;
  for (const rn::ManifestRef* m : {&fig2, &experiment(critical_rates_config())}) {
    const auto d = diagnostics(*m, 0);
    const double P0 = d.samples.front().power, L0 = d.samples.front().L;
    for (const auto& s : d.samples)
      if (L0 / s.L <= 100.0) drift = std::max(drift, std::abs(s.power - P0) / P0);
  }
  bool ok = drift < 1e-6;
  detail += "delta=0 drift " + num(drift, 3) + "; ";

  // Damped run: monotone power, power loss against the integrated damping rate,
  // and the Hamiltonian on either side of the arrest.
  const auto d = diagnostics(fig2, 1);
  const auto& s = d.samples;
  double worst_rel = 0.0, worst_increase = 0.0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double loss = s[i].power - s[i + 1].power;
    worst_increase = std::max(worst_increase, -loss / s[i].power);
    const double integral = 0.5 * (s[i].damping_rate + s[i + 1].damping_rate) * (s[i + 1].t - s[i].t);
    if (integral > 1e-10 * s[i].power) worst_rel = std::max(worst_rel, std::abs(loss - integral) / integral);
  }
  ok = ok && worst_increase <= 1e-13 && worst_rel < 0.01;
  detail += "delta=5e-3 max power increase " + num(worst_increase, 3) + ", dP/dt mismatch " + num(worst_rel, 3) + "; ";

  std::size_t imin = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i].L < s[imin].L) imin = i;
  std::size_t before = imin, after = imin;
  while (before > 0 && s[before].L < 2.0 * s[imin].L) --before;
  while (after + 1 < s.size() && s[after].L < 2.0 * s[imin].L) ++after;
  const double jump = s[after].hamiltonian - s[before].hamiltonian;
  ok = ok && before < imin && after > imin && s[after].L >= 2.0 * s[imin].L && jump > 0.0;
  detail += "H jump (L = 2 L_min on each side) " + num(jump);
  return {ok, detail};
}

Verdict rate_fits() {
  const Json& sup = runs_of(preset_run("fig2")).at(0).at("analysis").at("rate_fits").at("sqrt_free");
  if (sup.contains("error")) throw Fail(sup.at("error").get<std::string>());
  const Json& crit = runs_of(experiment(critical_rates_config())).at(0).at("analysis").at("rate_fits");
  for (const char* k : {"sqrt", "loglog"})
    if (crit.at(k).contains("error")) throw Fail(crit.at(k).at("error").get<std::string>());
  const double gamma = sup.at("exponent").get<double>();
  const double r_sqrt = crit.at("sqrt").at("residual").get<double>(), r_ll = crit.at("loglog").at("residual").get<double>();
  const bool ok = std::abs(gamma - 0.5) <= 0.05 && r_ll < r_sqrt;
  return {ok, "supercritical exponent " + num(gamma, 5) + "; critical residuals loglog " + num(r_ll, 4) +
                  " vs sqrt " + num(r_sqrt, 4)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"kappa closed form", kappa_closed_form},
      {"kappa(q) from reduced equations", kappa_of_q_reduced},
      {"ground-state oracle", ground_state_oracle},
      {"reduced-vs-PDE agreement", reduced_vs_pde},
      {"critical damping-exponent threshold", critical_threshold},
      {"supercritical asymmetry and velocity divergence", supercritical_asymmetry},
      {"profile flip", profile_flip},
      {"critical loglog continuation", critical_loglog_continuation},
      {"conservation and monotonicity", conservation},
      {"rate fits", rate_fits},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("%s  [%zu] %s (%.1f s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
