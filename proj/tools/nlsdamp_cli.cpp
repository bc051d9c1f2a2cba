// Command-line front end. Uses only the C interface of libnlsdamp.
//
// Exit codes: 0 success, 2 validation error (bad arguments, configs, manifests
// or files), 3 numerical failure, 1 anything unexpected.

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "nlsdamp/nlsdamp.h"

namespace {

int exit_code(nlsdamp_status s) {
  switch (s) {
    case NLSDAMP_OK: return 0;
    case NLSDAMP_ERR_VALIDATION:
    case NLSDAMP_ERR_IO: return 2;
    case NLSDAMP_ERR_NUMERICAL: return 3;
    default: return 1;
  }
}

int report(nlsdamp_status s) {
  if (s != NLSDAMP_OK) std::fprintf(stderr, "nlsdamp: %s: %s\n", nlsdamp_status_name(s), nlsdamp_last_error());
  return exit_code(s);
}

struct StringDeleter {
  void operator()(char* p) const { nlsdamp_string_free(p); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct ExperimentDeleter {
  void operator()(nlsdamp_experiment* p) const { nlsdamp_experiment_free(p); }
};
struct ManifestDeleter {
  void operator()(nlsdamp_manifest* p) const { nlsdamp_manifest_free(p); }
};
struct SweepDeleter {
  void operator()(nlsdamp_sweep_result* p) const { nlsdamp_sweep_free(p); }
};

const char* root_arg(const std::string& root) { return root.empty() ? nullptr : root.c_str(); }

int cmd_presets() {
  char* raw = nullptr;
  if (auto s = nlsdamp_list_presets(&raw); s != NLSDAMP_OK) return report(s);
  OwnedString text(raw);
  std::fputs(text.get(), stdout);
  return 0;
}

int cmd_show(const std::string& target) {
  nlsdamp_experiment* raw = nullptr;
  if (auto s = nlsdamp_experiment_resolve(target.c_str(), &raw); s != NLSDAMP_OK) return report(s);
  std::unique_ptr<nlsdamp_experiment, ExperimentDeleter> exp(raw);
  char* json = nullptr;
  if (auto s = nlsdamp_experiment_to_json(exp.get(), &json); s != NLSDAMP_OK) return report(s);
  OwnedString text(json);
  std::printf("%s\n", text.get());
  return 0;
}

int cmd_run(const std::string& target, const std::string& root) {
  nlsdamp_experiment* raw = nullptr;
  if (auto s = nlsdamp_experiment_resolve(target.c_str(), &raw); s != NLSDAMP_OK) return report(s);
  std::unique_ptr<nlsdamp_experiment, ExperimentDeleter> exp(raw);
  nlsdamp_manifest* mraw = nullptr;
  if (auto s = nlsdamp_run(exp.get(), root_arg(root), &mraw); s != NLSDAMP_OK) return report(s);
  std::unique_ptr<nlsdamp_manifest, ManifestDeleter> manifest(mraw);
  char* path = nullptr;
  if (auto s = nlsdamp_manifest_path(manifest.get(), &path); s != NLSDAMP_OK) return report(s);
  OwnedString p(path);
  std::printf("%s\n", p.get());
  return 0;
}

int cmd_sweep(const std::string& target, const std::string& parameter, const std::vector<double>& values,
              int parallelism, const std::string& root) {
  nlsdamp_experiment* raw = nullptr;
  if (auto s = nlsdamp_experiment_resolve(target.c_str(), &raw); s != NLSDAMP_OK) return report(s);
  std::unique_ptr<nlsdamp_experiment, ExperimentDeleter> exp(raw);
  nlsdamp_sweep_result* rraw = nullptr;
  if (auto s = nlsdamp_sweep(exp.get(), parameter.c_str(), values.data(), values.size(), parallelism,
                             root_arg(root), &rraw);
      s != NLSDAMP_OK)
    return report(s);
  std::unique_ptr<nlsdamp_sweep_result, SweepDeleter> result(rraw);
  int code = 0;
  for (size_t i = 0; i < nlsdamp_sweep_size(result.get()); ++i) {
    double v = 0.0;
    nlsdamp_sweep_item_value(result.get(), i, &v);
    const nlsdamp_status st = nlsdamp_sweep_item_status(result.get(), i);
    char* text = nullptr;
    if (st == NLSDAMP_OK) {
      nlsdamp_sweep_item_manifest(result.get(), i, &text);
      OwnedString t(text);
      std::printf("%.17g\tok\t%s\n", v, t.get());
    } else {
      nlsdamp_sweep_item_error(result.get(), i, &text);
      OwnedString t(text);
      std::printf("%.17g\t%s\t%s\n", v, nlsdamp_status_name(st), t.get());
      if (code == 0) code = exit_code(st);
    }
  }
  return code;
}

int cmd_analyze(const std::string& manifest) {
  char* raw = nullptr;
  if (auto s = nlsdamp_analyze(manifest.c_str(), &raw); s != NLSDAMP_OK) return report(s);
  OwnedString text(raw);
  std::printf("%s\n", text.get());
  return 0;
}

int cmd_verify(const std::string& manifest) {
  if (auto s = nlsdamp_verify_manifest(manifest.c_str()); s != NLSDAMP_OK) return report(s);
  std::printf("ok\n");
  return 0;
}

int cmd_export(const std::string& what, const std::string& params, const std::string& out) {
  if (auto s = nlsdamp_export(what.c_str(), params.c_str(), out.c_str()); s != NLSDAMP_OK) return report(s);
  std::printf("%s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped NLS collapse laboratory"};
  app.set_version_flag("--version", std::string(nlsdamp_version()));
  app.require_subcommand(1);

  std::string target, root, parameter, manifest, what, params, out;
  std::vector<double> values;
  int parallelism = 1;

  app.add_subcommand("presets", "List preset names");

  auto* show = app.add_subcommand("show", "Print the full experiment config of a preset or file");
  show->add_option("experiment", target, "Preset name or JSON config file")->required();

  auto* run = app.add_subcommand("run", "Run a preset or config file and write data plus manifest");
  run->add_option("experiment", target, "Preset name or JSON config file")->required();
  run->add_option("--output-root", root, "Output root (default: $NLSDAMP_OUTPUT_ROOT or ./nlsdamp_out)");

  auto* sw = app.add_subcommand("sweep", "Run one experiment per parameter value");
  sw->add_option("experiment", target, "Preset name or JSON config file")->required();
  sw->add_option("--param", parameter, "Solver key (e.g. delta, initial_condition.amplitude) or kappa.<key>")
      ->required();
  sw->add_option("--values", values, "Parameter values")->delimiter(',');
  sw->add_option("--parallel", parallelism, "Concurrent experiments")->check(CLI::PositiveNumber);
  sw->add_option("--output-root", root, "Output root");

  auto* an = app.add_subcommand("analyze", "Verify a manifest and recompute its analysis");
  an->add_option("manifest", manifest, "Path to manifest.json")->required();

  auto* ver = app.add_subcommand("verify", "Check every file hash listed in a manifest");
  ver->add_option("manifest", manifest, "Path to manifest.json")->required();

  auto* ex = app.add_subcommand("export", "Write a profile, reduced trajectory or kappa table");
  ex->add_option("what", what, "ground_state | q_profile | reduced_trajectory | kappa_table")->required();
  ex->add_option("--params", params, "JSON object of parameters, e.g. '{\"d\":1,\"p\":5}'")->required();
  ex->add_option("-o,--out", out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (app.got_subcommand("presets")) return cmd_presets();
  if (app.got_subcommand(show)) return cmd_show(target);
  if (app.got_subcommand(run)) return cmd_run(target, root);
  if (app.got_subcommand(sw)) return cmd_sweep(target, parameter, values, parallelism, root);
  if (app.got_subcommand(an)) return cmd_analyze(manifest);
  if (app.got_subcommand(ver)) return cmd_verify(manifest);
  if (app.got_subcommand(ex)) return cmd_export(what, params, out);
  return 2;
}
