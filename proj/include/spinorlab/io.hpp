#pragma once

#include <string>
#include <vector>

#include "spinorlab/fields.hpp"
#include "spinorlab/geometry.hpp"

namespace spinorlab::io {

// Binary field dump: magic "SPLB", u32 version, u32 N_t, u32 N_x,
// u32 components, then little-endian f64 interleaved re/im, t-major.
void dump_field(const std::string& path, const geometry::Grid& grid,
                const fields::DoubleField& f);
fields::DoubleField load_field(const std::string& path, geometry::Grid* grid_out = nullptr);

// Metric specification: named preset plus grid sizes and parameters;
// optional perturbation block for deformation runs.
struct MetricSpec {
  std::string preset = "minkowski";
  int nt = 129;
  int nx = 128;
  double T = 2.0;
  double L = 2.0 * M_PI;
  double mass = 1.0;
  // preset parameters
  double amp = 0.05;
  double freq = 1.3;
  double phase = 0.4;
  double t0 = 1.0, x0 = M_PI, wt = 0.4, wx = 1.0;
  // perturbation block
  bool has_perturbation = false;
  std::string direction = "conformal";
  double pert_amp = 1.0;
  double pert_t0 = 1.0, pert_x0 = M_PI, pert_wt = 0.3, pert_wx = 0.8;
  double eps_max = 0.05;

  geometry::MetricSlab build() const;
  geometry::MetricFamily build_family() const;
};

MetricSpec metric_spec_from_json(const std::string& text);
MetricSpec metric_spec_preset(const std::string& name);

// One verification line of a CLI report.
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Report {
  std::string command;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<Check> checks;
  double wall_time_s = 0.0;

  void add(const std::string& name, double value, double tolerance);
  // value must exceed the threshold (sanity detectors)
  void add_min(const std::string& name, double value, double minimum);
  void note(const std::string& name, double value);
  bool all_pass() const;
  std::string to_json() const;
};

std::string read_text_file(const std::string& path);

}  // namespace spinorlab::io
