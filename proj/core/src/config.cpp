#include "cdm/io.hpp"

#include <toml.hpp>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace cdm {

namespace {

std::string join(const std::string& prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : prefix + "." + std::string(key);
}

void check_keys(const toml::table& t, const std::string& prefix,
                std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, v] : t) {
    if (std::find(allowed.begin(), allowed.end(), k.str()) == allowed.end()) {
      throw ConfigError(join(prefix, k.str()), "unknown key");
    }
  }
}

const toml::table* sub_table(const toml::table& t, std::string_view key) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return nullptr;
  if (!n->is_table()) throw ConfigError(std::string(key), "expected a table");
  return n->as_table();
}

double get_number(const toml::table& t, const std::string& prefix, std::string_view key,
                  double fallback) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return fallback;
  if (auto v = n->value<double>()) return *v;
  throw ConfigError(join(prefix, key), "expected a number");
}

std::int64_t get_integer(const toml::table& t, const std::string& prefix, std::string_view key,
                         std::int64_t fallback) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return fallback;
  if (n->is_integer()) return *n->value<std::int64_t>();
  throw ConfigError(join(prefix, key), "expected an integer");
}

bool get_bool(const toml::table& t, const std::string& prefix, std::string_view key, bool fallback) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return fallback;
  if (n->is_boolean()) return *n->value<bool>();
  throw ConfigError(join(prefix, key), "expected true or false");
}

std::optional<std::string> get_string(const toml::table& t, const std::string& prefix,
                                      std::string_view key) {
  const toml::node* n = t.get(key);
  if (n == nullptr) return std::nullopt;
  if (n->is_string()) return *n->value<std::string>();
  throw ConfigError(join(prefix, key), "expected a string");
}

ControlMode control_mode_from_string(const std::string& s) {
  if (s == "direct") return ControlMode::Direct;
  if (s == "cod") return ControlMode::Cod;
  if (s == "corrosion") return ControlMode::Corrosion;
  throw ConfigError("controller.mode", "expected direct, cod or corrosion, got '" + s + "'");
}

void read_scenario(const toml::table& t, ScenarioSpec& s) {
  const std::string p = "scenario";
  check_keys(t, p,
             {"kind", "width", "height", "thickness", "rebars", "p_left", "p_right", "p_uniform",
              "p_bottom", "p_top", "cod_gauge_length", "overhang"});
  s.width = get_number(t, p, "width", s.width);
  s.height = get_number(t, p, "height", s.height);
  s.thickness = get_number(t, p, "thickness", s.thickness);
  s.p_left = get_number(t, p, "p_left", s.p_left);
  s.p_right = get_number(t, p, "p_right", s.p_right);
  s.p_uniform = get_number(t, p, "p_uniform", s.p_uniform);
  s.p_bottom = get_number(t, p, "p_bottom", s.p_bottom);
  s.p_top = get_number(t, p, "p_top", s.p_top);
  s.cod_gauge_length = get_number(t, p, "cod_gauge_length", s.cod_gauge_length);
  s.overhang = get_number(t, p, "overhang", s.overhang);
  if (const toml::node* n = t.get("rebars")) {
    const toml::array* arr = n->as_array();
    if (arr == nullptr) throw ConfigError("scenario.rebars", "expected an array of tables");
    s.rebars.clear();
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string rp = "scenario.rebars[" + std::to_string(i) + "]";
      const toml::table* r = arr->get(i)->as_table();
      if (r == nullptr) throw ConfigError(rp, "expected a table {x, y, radius}");
      check_keys(*r, rp, {"x", "y", "radius"});
      for (const char* k : {"x", "y", "radius"}) {
        if (r->get(k) == nullptr) throw ConfigError(join(rp, k), "missing");
      }
      CircularHole h;
      h.center = {get_number(*r, rp, "x", 0.0), get_number(*r, rp, "y", 0.0)};
      h.radius = get_number(*r, rp, "radius", 0.0);
      s.rebars.push_back(h);
    }
  }
}

void read_material(const toml::table& t, Materials& m) {
  const std::string p = "material";
  check_keys(t, p, {"E0", "alpha", "ft", "Gt", "kappa", "xi", "mu", "rho", "biot"});
  const MechMaterial& d = m.mech;
  try {
    m.mech = MechMaterial::create(get_number(t, p, "E0", d.E0), get_number(t, p, "alpha", d.alpha),
                                  get_number(t, p, "ft", d.ft), get_number(t, p, "Gt", d.Gt));
  } catch (const MaterialError& e) {
    throw ConfigError(p, e.what());
  }
  m.transport.kappa = get_number(t, p, "kappa", m.transport.kappa);
  m.transport.xi = get_number(t, p, "xi", m.transport.xi);
  m.transport.mu = get_number(t, p, "mu", m.transport.mu);
  m.transport.rho = get_number(t, p, "rho", m.transport.rho);
  m.biot = get_number(t, p, "biot", m.biot);
}

void read_controller(const toml::table& t, StepController& c) {
  const std::string p = "controller";
  check_keys(t, p,
             {"mode", "increment", "max_steps", "tol_rel", "max_stagger", "max_iterations",
              "max_bisections", "i_cor", "alpha_e", "dt"});
  if (auto m = get_string(t, p, "mode")) c.mode = control_mode_from_string(*m);
  c.increment = get_number(t, p, "increment", c.increment);
  c.max_steps = static_cast<int>(get_integer(t, p, "max_steps", c.max_steps));
  c.tol_rel = get_number(t, p, "tol_rel", c.tol_rel);
  c.max_stagger = static_cast<int>(get_integer(t, p, "max_stagger", c.max_stagger));
  c.max_iterations = static_cast<int>(get_integer(t, p, "max_iterations", c.max_iterations));
  c.max_bisections = static_cast<int>(get_integer(t, p, "max_bisections", c.max_bisections));
  c.corrosion.i_cor = get_number(t, p, "i_cor", c.corrosion.i_cor);
  c.corrosion.alpha_e = get_number(t, p, "alpha_e", c.corrosion.alpha_e);
  c.corrosion.dt_days = get_number(t, p, "dt", c.corrosion.dt_days);
}

void read_refinement(const toml::table& t, Discretization& d) {
  const std::string p = "refinement";
  check_keys(t, p,
             {"lmin_fine", "lmin_coarse", "threshold_ratio", "r_fine", "r_transition",
              "max_events_per_step", "interface_lmin", "interface_band"});
  d.lmin_fine = get_number(t, p, "lmin_fine", d.lmin_fine);
  d.lmin_coarse = get_number(t, p, "lmin_coarse", d.lmin_coarse);
  d.refinement.threshold_ratio = get_number(t, p, "threshold_ratio", d.refinement.threshold_ratio);
  d.refinement.r_fine = get_number(t, p, "r_fine", d.refinement.r_fine);
  d.refinement.r_transition = get_number(t, p, "r_transition", d.refinement.r_transition);
  d.refinement.max_events_per_step = static_cast<int>(
      get_integer(t, p, "max_events_per_step", d.refinement.max_events_per_step));
  d.interface_lmin = get_number(t, p, "interface_lmin", d.interface_lmin);
  d.interface_band = get_number(t, p, "interface_band", d.interface_band);
}

void read_output(const toml::table& t, OutputOptions& o, const std::filesystem::path& base) {
  const std::string p = "output";
  check_keys(t, p, {"dir", "crack_interval", "mesh_vtk", "timing"});
  if (auto dir = get_string(t, p, "dir")) o.dir = *dir;
  const std::int64_t ci = get_integer(t, p, "crack_interval", o.crack_interval);
  if (ci < 0) throw ConfigError("output.crack_interval", "must be non-negative");
  o.crack_interval = static_cast<int>(ci);
  o.mesh_vtk = get_bool(t, p, "mesh_vtk", o.mesh_vtk);
  o.timing = get_bool(t, p, "timing", o.timing);
  if (o.dir.is_relative() && !base.empty()) o.dir = base / o.dir;
}

}  // namespace

void RunConfig::validate() const {
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ConfigError("scenario", e.what());
  }
  try {
    disc.validate();
  } catch (const std::exception& e) {
    throw ConfigError("refinement", e.what());
  }
  if (shared_points && disc.mode != ModelMode::Adaptive) {
    throw ConfigError("shared_points", "only meaningful with mode = \"adaptive\"");
  }
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError("", msg.str());
  }
  check_keys(root, "",
             {"mode", "seed", "shared_points", "scenario", "material", "refinement", "controller",
              "output"});

  const toml::table* scen = sub_table(root, "scenario");
  if (scen == nullptr) throw ConfigError("scenario", "missing");
  const auto kind_name = get_string(*scen, "scenario", "kind");
  if (!kind_name) throw ConfigError("scenario.kind", "missing");
  ScenarioKind kind;
  try {
    kind = scenario_kind_from_string(*kind_name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scenario.kind", e.what());
  }

  ModelMode mode = ModelMode::Fine;
  if (auto m = get_string(root, "", "mode")) {
    try {
      mode = model_mode_from_string(*m);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("mode", e.what());
    }
  }

  RunConfig cfg;
  cfg.spec = ScenarioSpec::defaults(kind);
  cfg.disc = Discretization::defaults(kind, mode);
  const std::int64_t seed = get_integer(root, "", "seed", 0);
  if (seed < 0) throw ConfigError("seed", "must be non-negative");
  cfg.disc.seed = static_cast<std::uint64_t>(seed);
  cfg.shared_points = get_bool(root, "", "shared_points", false);

  read_scenario(*scen, cfg.spec);
  if (const toml::table* t = sub_table(root, "material")) read_material(*t, cfg.spec.materials);
  if (const toml::table* t = sub_table(root, "controller")) read_controller(*t, cfg.spec.controller);
  if (const toml::table* t = sub_table(root, "refinement")) read_refinement(*t, cfg.disc);
  if (const toml::table* t = sub_table(root, "output")) {
    read_output(*t, cfg.output, base_dir);
  } else if (!base_dir.empty()) {
    cfg.output.dir = base_dir / cfg.output.dir;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("", "cannot read " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), file.parent_path());
}

}  // namespace cdm
