#include "spinorlab/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace spinorlab::io {

namespace {
constexpr char kMagic[4] = {'S', 'P', 'L', 'B'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kComponents = 8;  // 4 spinor + 4 cospinor per point

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}
}  // namespace

void dump_field(const std::string& path, const geometry::Grid& grid,
                const fields::DoubleField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open dump file: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(grid.nt));
  put_u32(os, static_cast<std::uint32_t>(grid.nx));
  put_u32(os, kComponents);
  for (int it = 0; it < grid.nt; ++it)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const std::size_t p = grid.idx(it, ix);
      for (int c = 0; c < 4; ++c) {
        put_f64(os, f.u.d[p](c).real());
        put_f64(os, f.u.d[p](c).imag());
      }
      for (int c = 0; c < 4; ++c) {
        put_f64(os, f.v.d[p](c).real());
        put_f64(os, f.v.d[p](c).imag());
      }
    }
}

fields::DoubleField load_field(const std::string& path, geometry::Grid* grid_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open dump file: " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw ConfigError("bad magic in field dump");
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) throw ConfigError("unsupported dump version");
  geometry::Grid g;
  g.nt = static_cast<int>(get_u32(is));
  g.nx = static_cast<int>(get_u32(is));
  const std::uint32_t comps = get_u32(is);
  if (comps != kComponents) throw ConfigError("unsupported component count in dump");
  fields::DoubleField f = fields::DoubleField::zero(g);
  for (int it = 0; it < g.nt; ++it)
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t p = g.idx(it, ix);
      for (int c = 0; c < 4; ++c) {
        const double re = get_f64(is), im = get_f64(is);
        f.u.d[p](c) = cd(re, im);
      }
      for (int c = 0; c < 4; ++c) {
        const double re = get_f64(is), im = get_f64(is);
        f.v.d[p](c) = cd(re, im);
      }
    }
  if (grid_out) *grid_out = g;
  return f;
}

geometry::MetricSlab MetricSpec::build() const {
  if (preset == "minkowski") return geometry::minkowski_slab(nt, nx, T, L);
  if (preset == "frw") return geometry::frw_slab(nt, nx, T, L, amp, freq, phase);
  if (preset == "conformal-bump")
    return geometry::conformal_bump_slab(nt, nx, T, L, amp, t0, x0, wt, wx);
  if (preset == "tx-bump") return geometry::tx_bump_slab(nt, nx, T, L, amp, t0, x0, wt, wx);
  throw ConfigError("unknown metric preset: " + preset);
}

geometry::MetricFamily MetricSpec::build_family() const {
  return geometry::make_family(build(), direction, pert_amp, pert_t0, pert_x0, pert_wt, pert_wx,
                               eps_max);
}

MetricSpec metric_spec_preset(const std::string& name) {
  MetricSpec spec;
  spec.preset = name;
  if (name == "conformal-bump" || name == "tx-bump") spec.amp = 0.15;
  spec.build();  // validate the name
  return spec;
}

MetricSpec metric_spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("metric JSON parse error: ") + e.what());
  }
  MetricSpec spec;
  spec.preset = j.value("preset", spec.preset);
  spec.nt = j.value("nt", spec.nt);
  spec.nx = j.value("nx", spec.nx);
  spec.T = j.value("T", spec.T);
  spec.L = j.value("L", spec.L);
  spec.mass = j.value("mass", spec.mass);
  if (j.contains("params")) {
    const auto& p = j["params"];
    spec.amp = p.value("amp", spec.amp);
    spec.freq = p.value("freq", spec.freq);
    spec.phase = p.value("phase", spec.phase);
    spec.t0 = p.value("t0", spec.t0);
    spec.x0 = p.value("x0", spec.x0);
    spec.wt = p.value("wt", spec.wt);
    spec.wx = p.value("wx", spec.wx);
  }
  if (j.contains("perturbation")) {
    const auto& p = j["perturbation"];
    spec.has_perturbation = true;
    spec.direction = p.value("kind", spec.direction);
    spec.pert_amp = p.value("amp", spec.pert_amp);
    spec.pert_t0 = p.value("t0", spec.pert_t0);
    spec.pert_x0 = p.value("x0", spec.pert_x0);
    spec.pert_wt = p.value("wt", spec.pert_wt);
    spec.pert_wx = p.value("wx", spec.pert_wx);
    spec.eps_max = p.value("eps_max", spec.eps_max);
  }
  spec.build();
  return spec;
}

void Report::add(const std::string& name, double value, double tolerance) {
  checks.push_back({name, value, tolerance, std::abs(value) <= tolerance});
}

void Report::add_min(const std::string& name, double value, double minimum) {
  checks.push_back({name, value, minimum, value >= minimum});
}

void Report::note(const std::string& name, double value) {
  checks.push_back({name, value, 0.0, true});
}

bool Report::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string Report::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& [k, v] : parameters) params[k] = v;
  j["parameters"] = params;
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["value"] = c.value;
    e["tolerance"] = c.tolerance;
    e["pass"] = c.pass;
    arr.push_back(e);
  }
  j["checks"] = arr;
  j["wall_time_s"] = wall_time_s;
  return j.dump(2);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace spinorlab::io
