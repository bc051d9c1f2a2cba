#include "nlsdamp/nlsdamp.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "nlsdamp/airy.hpp"
#include "nlsdamp/errors.hpp"
#include "nlsdamp/profiles.hpp"
#include "nlsdamp/reduced.hpp"
#include "nlsdamp/runner.hpp"

namespace rn = nlsdamp::runner;

struct nlsdamp_experiment {
  rn::ExperimentConfig config;
};

struct nlsdamp_manifest {
  std::string path;
  rn::Json json;
};

struct nlsdamp_sweep_result {
  std::vector<rn::SweepItem> items;
};

namespace {

thread_local std::string g_last_error;

nlsdamp_status fail(nlsdamp_status code, std::string message) {
  g_last_error = std::move(message);
  return code;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
nlsdamp_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return NLSDAMP_OK;
  } catch (const nlsdamp::ValidationError& e) {
    return fail(NLSDAMP_ERR_VALIDATION, e.what());
  } catch (const nlsdamp::NumericalError& e) {
    return fail(NLSDAMP_ERR_NUMERICAL, e.what());
  } catch (const nlsdamp::IoError& e) {
    return fail(NLSDAMP_ERR_IO, e.what());
  } catch (const rn::Json::exception& e) {
    return fail(NLSDAMP_ERR_IO, std::string("malformed JSON: ") + e.what());
  } catch (const std::exception& e) {
    return fail(NLSDAMP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(NLSDAMP_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* ptr, const char* what) {
  if (ptr == nullptr) throw nlsdamp::ValidationError(std::string(what) + " must not be NULL");
}

std::filesystem::path root_or_default(const char* output_root) {
  return output_root != nullptr ? std::filesystem::path(output_root) : rn::default_output_root();
}

const rn::SweepItem& item_at(const nlsdamp_sweep_result* r, size_t i) {
  need(r, "sweep result");
  if (i >= r->items.size()) throw nlsdamp::ValidationError("sweep item index out of range");
  return r->items[i];
}

}  // namespace

extern "C" {

const char* nlsdamp_version(void) { return rn::tool_version(); }

const char* nlsdamp_last_error(void) { return g_last_error.c_str(); }

const char* nlsdamp_status_name(nlsdamp_status status) {
  switch (status) {
    case NLSDAMP_OK: return "ok";
    case NLSDAMP_ERR_INTERNAL: return "internal error";
    case NLSDAMP_ERR_VALIDATION: return "validation error";
    case NLSDAMP_ERR_NUMERICAL: return "numerical failure";
    case NLSDAMP_ERR_IO: return "i/o error";
  }
  return "unknown status";
}

void nlsdamp_string_free(char* s) { std::free(s); }

nlsdamp_status nlsdamp_list_presets(char** out) {
  return guarded([&] {
    need(out, "out");
    std::string s;
    for (const auto& n : rn::preset_names()) s += n + "\n";
    *out = dup(s);
  });
}

nlsdamp_status nlsdamp_default_output_root(char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup(rn::default_output_root().string());
  });
}

nlsdamp_status nlsdamp_experiment_from_preset(const char* name, nlsdamp_experiment** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = new nlsdamp_experiment{rn::preset(name)};
  });
}

nlsdamp_status nlsdamp_experiment_from_file(const char* path, nlsdamp_experiment** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new nlsdamp_experiment{rn::load_config(path)};
  });
}

nlsdamp_status nlsdamp_experiment_from_json(const char* json_text, nlsdamp_experiment** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    rn::Json j;
    try {
      j = rn::Json::parse(json_text);
    } catch (const rn::Json::parse_error& e) {
      throw nlsdamp::ValidationError(std::string("config: ") + e.what());
    }
    *out = new nlsdamp_experiment{rn::config_from_json(j)};
  });
}

nlsdamp_status nlsdamp_experiment_resolve(const char* name_or_path, nlsdamp_experiment** out) {
  return guarded([&] {
    need(name_or_path, "name_or_path");
    need(out, "out");
    *out = new nlsdamp_experiment{rn::resolve_experiment(name_or_path)};
  });
}

nlsdamp_status nlsdamp_experiment_to_json(const nlsdamp_experiment* exp, char** out) {
  return guarded([&] {
    need(exp, "experiment");
    need(out, "out");
    *out = dup(rn::config_to_json(exp->config).dump(2));
  });
}

nlsdamp_status nlsdamp_experiment_id(const nlsdamp_experiment* exp, char** out) {
  return guarded([&] {
    need(exp, "experiment");
    need(out, "out");
    *out = dup(exp->config.id);
  });
}

void nlsdamp_experiment_free(nlsdamp_experiment* exp) { delete exp; }

nlsdamp_status nlsdamp_run(const nlsdamp_experiment* exp, const char* output_root, nlsdamp_manifest** out) {
  return guarded([&] {
    need(exp, "experiment");
    need(out, "out");
    auto ref = rn::run_experiment(exp->config, root_or_default(output_root));
    *out = new nlsdamp_manifest{ref.path.string(), std::move(ref.manifest)};
  });
}

nlsdamp_status nlsdamp_manifest_load(const char* manifest_path, nlsdamp_manifest** out) {
  return guarded([&] {
    need(manifest_path, "manifest_path");
    need(out, "out");
    std::ifstream in(manifest_path);
    if (!in) throw nlsdamp::IoError(std::string("cannot open ") + manifest_path);
    *out = new nlsdamp_manifest{manifest_path, rn::Json::parse(in)};
  });
}

nlsdamp_status nlsdamp_manifest_path(const nlsdamp_manifest* m, char** out) {
  return guarded([&] {
    need(m, "manifest");
    need(out, "out");
    *out = dup(m->path);
  });
}

nlsdamp_status nlsdamp_manifest_json(const nlsdamp_manifest* m, char** out) {
  return guarded([&] {
    need(m, "manifest");
    need(out, "out");
    *out = dup(m->json.dump(2));
  });
}

void nlsdamp_manifest_free(nlsdamp_manifest* m) { delete m; }

nlsdamp_status nlsdamp_verify_manifest(const char* manifest_path) {
  return guarded([&] {
    need(manifest_path, "manifest_path");
    rn::verify_manifest(manifest_path);
  });
}

nlsdamp_status nlsdamp_analyze(const char* manifest_path, char** report_json) {
  return guarded([&] {
    need(manifest_path, "manifest_path");
    need(report_json, "report_json");
    *report_json = dup(rn::analyze(manifest_path).dump(2));
  });
}

nlsdamp_status nlsdamp_sweep(const nlsdamp_experiment* base, const char* parameter, const double* values,
                             size_t n_values, int parallelism, const char* output_root,
                             nlsdamp_sweep_result** out) {
  return guarded([&] {
    need(base, "base experiment");
    need(parameter, "parameter");
    need(out, "out");
    if (n_values > 0) need(values, "values");
    std::vector<double> v(values, values + n_values);
    *out = new nlsdamp_sweep_result{
        rn::sweep(base->config, parameter, v, parallelism, root_or_default(output_root))};
  });
}

size_t nlsdamp_sweep_size(const nlsdamp_sweep_result* r) { return r == nullptr ? 0 : r->items.size(); }

nlsdamp_status nlsdamp_sweep_item_status(const nlsdamp_sweep_result* r, size_t i) {
  if (r == nullptr || i >= r->items.size()) return fail(NLSDAMP_ERR_VALIDATION, "sweep item index out of range");
  const auto& it = r->items[i];
  return it.ok ? NLSDAMP_OK : static_cast<nlsdamp_status>(it.error_code);
}

nlsdamp_status nlsdamp_sweep_item_value(const nlsdamp_sweep_result* r, size_t i, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = item_at(r, i).value;
  });
}

nlsdamp_status nlsdamp_sweep_item_manifest(const nlsdamp_sweep_result* r, size_t i, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup(item_at(r, i).manifest_path.string());
  });
}

nlsdamp_status nlsdamp_sweep_item_error(const nlsdamp_sweep_result* r, size_t i, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup(item_at(r, i).error);
  });
}

void nlsdamp_sweep_free(nlsdamp_sweep_result* r) { delete r; }

nlsdamp_status nlsdamp_export(const char* what, const char* params_json, const char* path) {
  return guarded([&] {
    need(what, "what");
    need(params_json, "params_json");
    need(path, "path");
    rn::Json params;
    try {
      params = rn::Json::parse(params_json);
    } catch (const rn::Json::parse_error& e) {
      throw nlsdamp::ValidationError(std::string("export parameters: ") + e.what());
    }
    rn::export_artifact(what, params, path);
  });
}

nlsdamp_status nlsdamp_find_s_star(double* out) {
  return guarded([&] {
    need(out, "out");
    *out = nlsdamp::find_s_star();
  });
}

nlsdamp_status nlsdamp_kappa_critical(double* out) {
  return guarded([&] {
    need(out, "out");
    *out = nlsdamp::kappa_critical();
  });
}

nlsdamp_status nlsdamp_kappa_of_q(double q, int d, const double* deltas, size_t n_deltas, double* out) {
  return guarded([&] {
    need(out, "out");
    if (n_deltas > 0) need(deltas, "deltas");
    *out = nlsdamp::kappa_of_q(q, d, std::vector<double>(deltas, deltas + n_deltas)).kappa;
  });
}

nlsdamp_status nlsdamp_critical_power(int d, double p, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = nlsdamp::solve_ground_state(d, p).P_cr;
  });
}

}  // extern "C"
