#pragma once

// Shared by the C interface and command-line tests.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace api_fixtures {

// A subcritical, short and coarse experiment with every key spelled out.
inline std::string tiny_config_json(const std::string& id = "tiny_api", int max_steps = 20000000) {
  std::ostringstream s;
  s << R"({
  "id": ")" << id << R"(",
  "kind": "pde_series",
  "description": "cubic gaussian, short run",
  "desk_scale_overrides": [],
  "analysis": {"asymmetry": false, "asymmetry_window_fraction": 0.01, "profile_fits": false,
               "profile_window": 3.0, "rate_min_focus": 10.0, "rate_models": []},
  "runs": [{
    "label": "p=3",
    "solver": {
      "p": 3.0, "q": 3.0, "delta": 0.01,
      "initial_condition": {"kind": "gaussian", "amplitude": 0.5, "T_c": 1.0, "alpha": 1.0},
      "domain_half_width": 20.0, "n_points": 256, "core_spacing": 0.05, "dt0": 0.002,
      "focus_stop": 1000.0, "t_end": 0.2, "sample_stride": 5, "stop_after_growth": 0.0,
      "snapshot_focus": [], "snapshot_growth": [], "boundary_tol": 1e-08,
      "max_steps": )" << max_steps << R"(, "time_order": 4
    }
  }]
})";
  return s.str();
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("nlsdamp_api_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace api_fixtures
