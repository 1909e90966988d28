#include "exo/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "exo/errors.hpp"

namespace exo {

using json = nlohmann::json;

CylinderSpec PneumaticsConfig::cylinder() const {
  CylinderSpec spec;
  spec.bore = bore;
  spec.rod_diameter = rod_diameter;
  spec.stroke = stroke;
  spec.supply_pressure = pressure;
  spec.acting_side = ActingSide::rod;
  return spec;
}

namespace {

json loads_document(const std::vector<PointLoad>& loads, bool with_position) {
  json out = json::array();
  for (const auto& p : loads) {
    json item{{"magnitude_n", p.magnitude}, {"angle_deg", p.angle_from_vertical_deg}};
    if (with_position) item["position_m"] = p.position;
    out.push_back(item);
  }
  return out;
}

json component_document(const StructuralLoadCase& lc) {
  json doc{{"support", to_string(lc.support)}};
  if (const auto* beam = std::get_if<CantileverModel>(&lc.model)) {
    doc["section"] = {{"shape", to_string(beam->section.shape)},
                      {"width_m", beam->section.width},
                      {"height_m", beam->section.height},
                      {"thickness_m", beam->section.thickness}};
    doc["arm_length_m"] = beam->arm_length;
    doc["loads"] = loads_document(lc.loads, true);
  } else {
    const auto& pin = std::get<PinJointModel>(lc.model);
    doc["plate_thickness_m"] = pin.plate_thickness;
    doc["hole_diameter_m"] = pin.hole_diameter;
    doc["shear_planes"] = pin.shear_planes;
    doc["loads"] = loads_document(lc.loads, false);
  }
  return doc;
}

// Overlay `user` onto `base`; every user key must already exist in `base`.
void merge_checked(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) throw ValidationError(path.empty() ? "(document)" : path, "expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw UnknownKeyError(full);
    json& slot = base[key];
    if (slot.is_object()) {
      merge_checked(slot, value, full);
    } else {
      slot = value;
    }
  }
}

std::string join(const std::string& path, const std::string& key) { return path + "." + key; }

double number(const json& section, const std::string& path, const std::string& key) {
  const json& v = section.at(key);
  if (!v.is_number()) throw ValidationError(join(path, key), "expected a number");
  return v.get<double>();
}

double checked(const json& section, const std::string& path, const std::string& key,
               const std::function<bool(double)>& ok, const char* reason) {
  const double v = number(section, path, key);
  if (!std::isfinite(v) || !ok(v)) throw ValidationError(join(path, key), fmt::format("{} (got {})", reason, v));
  return v;
}

const auto positive = [](double v) { return v > 0.0; };
const auto nonnegative = [](double v) { return v >= 0.0; };

void reject_unknown(const json& object, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!object.is_object()) throw ValidationError(path, "expected an object");
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw UnknownKeyError(join(path, key));
  }
}

std::vector<PointLoad> read_loads(const json& component, const std::string& path, bool with_position) {
  const json& arr = component.at("loads");
  const std::string loads_path = join(path, "loads");
  if (!arr.is_array()) throw ValidationError(loads_path, "expected an array");
  if (arr.empty()) throw ValidationError(loads_path, "at least one load is required");
  std::vector<PointLoad> loads;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string item_path = fmt::format("{}[{}]", loads_path, i);
    const json& item = arr[i];
    if (with_position)
      reject_unknown(item, item_path, {"magnitude_n", "angle_deg", "position_m"});
    else
      reject_unknown(item, item_path, {"magnitude_n", "angle_deg"});
    for (const char* req : {"magnitude_n", "angle_deg"})
      if (!item.contains(req)) throw ValidationError(join(item_path, req), "missing");
    PointLoad p;
    p.magnitude = checked(item, item_path, "magnitude_n", nonnegative, "must be >= 0");
    p.angle_from_vertical_deg = checked(item, item_path, "angle_deg", [](double) { return true; }, "");
    if (with_position) {
      if (!item.contains("position_m")) throw ValidationError(join(item_path, "position_m"), "missing");
      p.position = checked(item, item_path, "position_m", positive, "must be positive");
    }
    loads.push_back(p);
  }
  return loads;
}

std::string read_string(const json& section, const std::string& path, const std::string& key) {
  const json& v = section.at(key);
  if (!v.is_string()) throw ValidationError(join(path, key), "expected a string");
  return v.get<std::string>();
}

StructuralLoadCase read_component(const json& doc, const std::string& path, Component component) {
  StructuralLoadCase lc;
  lc.component = component;
  const std::string support = read_string(doc, path, "support");
  if (support == "fixed_edge") lc.support = SupportCondition::fixed_edge;
  else if (support == "fixed_hinge_ends") lc.support = SupportCondition::fixed_hinge_ends;
  else if (support == "fixed_back_face") lc.support = SupportCondition::fixed_back_face;
  else throw ValidationError(join(path, "support"), fmt::format("unknown support '{}'", support));

  if (component == Component::u_section) {
    PinJointModel pin;
    pin.plate_thickness = checked(doc, path, "plate_thickness_m", positive, "must be positive");
    pin.hole_diameter = checked(doc, path, "hole_diameter_m", positive, "must be positive");
    pin.shear_planes = static_cast<int>(
        checked(doc, path, "shear_planes", [](double v) { return v == 1.0 || v == 2.0; }, "must be 1 or 2"));
    lc.model = pin;
    lc.loads = read_loads(doc, path, false);
    return lc;
  }

  CantileverModel beam;
  const json& section = doc.at("section");
  const std::string spath = join(path, "section");
  try {
    beam.section.shape = section_shape_from_string(read_string(section, spath, "shape"));
  } catch (const DomainError& e) {
    throw ValidationError(join(spath, "shape"), e.what());
  }
  beam.section.width = checked(section, spath, "width_m", positive, "must be positive");
  beam.section.height = checked(section, spath, "height_m", positive, "must be positive");
  beam.section.thickness = checked(section, spath, "thickness_m", nonnegative, "must be >= 0");
  try {
    section_properties(beam.section);
  } catch (const DimensionError& e) {
    throw ValidationError(spath, e.what());
  }
  beam.arm_length = checked(doc, path, "arm_length_m", positive, "must be positive");
  lc.model = beam;
  lc.loads = read_loads(doc, path, true);
  for (std::size_t i = 0; i < lc.loads.size(); ++i)
    if (lc.loads[i].position > beam.arm_length)
      throw ValidationError(fmt::format("{}.loads[{}].position_m", path, i), "beyond arm_length_m");
  return lc;
}

std::optional<std::filesystem::path> data_dir() {
  const char* dir = std::getenv(kDataDirEnv);
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::filesystem::path(dir);
}

std::vector<MaterialSpec> available_materials() {
  if (auto dir = data_dir()) {
    const auto file = *dir / "materials.txt";
    if (std::filesystem::exists(file)) {
      std::ifstream in(file);
      if (!in) throw ParseError(fmt::format("cannot read '{}'", file.string()));
      return parse_materials(in);
    }
  }
  return default_materials();
}

BoreCatalog default_catalog() {
  if (auto dir = data_dir()) {
    const auto file = *dir / "bore_catalog.txt";
    if (std::filesystem::exists(file)) return BoreCatalog::from_file(file.string());
  }
  return BoreCatalog::standard();
}

}  // namespace

json default_config_document() {
  const ArmGeometry g;
  const SweepRange sweep;
  const LoadCase load;
  const PneumaticsConfig pn;
  const ControlConfig ctl;
  const SimulationConfig sim;
  const StructuralConfig st;

  json structural{{"material", st.material.name}};
  for (const auto& lc : st.cases) structural[to_string(lc.component)] = component_document(lc);

  return json{
      {"geometry",
       {{"ab", g.ab},
        {"ac", g.ac},
        {"ad", g.ad},
        {"initial_forearm_angle_deg", 30.0},
        {"initial_transfer_angle_deg", 120.0},
        {"mount_angle_deg", 45.0},
        {"forearm_offset_deg", 0.0},
        {"sweep_deg", {42.93, 120.0}}}},
      {"load", {{"mass_per_arm_kg", load.mass_per_arm}, {"gravity", load.gravity}}},
      {"pneumatics",
       {{"pressure_pa", pn.pressure},
        {"rod_diameter_m", pn.rod_diameter},
        {"bore_m", pn.bore},
        {"stroke_m", pn.stroke},
        {"catalog", nullptr},
        {"catalog_mm", nullptr}}},
      {"control",
       {{"threshold", ctl.sound_threshold},
        {"debounce_s", ticks_to_seconds(ctl.debounce_window)},
        {"relay_delay_s", ticks_to_seconds(ctl.relay_delay)},
        {"flow_rate_m3s", ctl.flow_rate_retract},
        {"flow_rate_extend_m3s", nullptr},
        {"manual_override", ctl.manual_override}}},
      {"simulation", {{"sample_step_s", ticks_to_seconds(sim.sample_step)}, {"duration_s", nullptr}}},
      {"structural", structural},
  };
}

DesignConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json user;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    user = json::object();
  } else {
    try {
      user = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!user.is_object()) throw ParseError("config must be a JSON object at the top level");
  }

  json doc = default_config_document();
  merge_checked(doc, user, "");

  DesignConfig cfg;
  cfg.effective = doc;

  // geometry
  {
    const json& g = doc["geometry"];
    const std::string p = "geometry";
    ArmGeometry& geo = cfg.geometry;
    geo.ab = checked(g, p, "ab", positive, "must be positive");
    geo.ac = checked(g, p, "ac", positive, "must be positive");
    if (geo.ab > geo.ac) throw ValidationError("geometry.ab", "must not exceed geometry.ac");
    geo.ad = checked(g, p, "ad", positive, "must be positive");
    geo.initial_forearm_angle = deg_to_rad(checked(
        g, p, "initial_forearm_angle_deg", [](double v) { return v > -90.0 && v < 90.0; }, "must lie in (-90, 90)"));
    geo.initial_transfer_angle = deg_to_rad(checked(
        g, p, "initial_transfer_angle_deg", [](double v) { return v > 0.0 && v <= kTransferAngleCapDeg; },
        "must lie in (0, 135]"));
    geo.mount_angle = deg_to_rad(
        checked(g, p, "mount_angle_deg", [](double v) { return v >= 0.0 && v < 90.0; }, "must lie in [0, 90)"));
    geo.forearm_offset = deg_to_rad(checked(
        g, p, "forearm_offset_deg", [](double v) { return v >= 0.0 && v < 180.0; }, "must lie in [0, 180)"));
    const json& sweep = g["sweep_deg"];
    if (!sweep.is_array() || sweep.size() != 2 || !sweep[0].is_number() || !sweep[1].is_number())
      throw ValidationError("geometry.sweep_deg", "expected [min, max] in degrees");
    const double lo = sweep[0].get<double>();
    const double hi = sweep[1].get<double>();
    if (!(lo > 0.0 && lo <= hi && hi < 180.0))
      throw ValidationError("geometry.sweep_deg", "must satisfy 0 < min <= max < 180");
    cfg.sweep = {deg_to_rad(lo), deg_to_rad(hi)};
    try {
      geo.validate();
    } catch (const Error& e) {
      throw ValidationError("geometry", e.what());
    }
  }

  // load
  {
    const json& l = doc["load"];
    cfg.load.mass_per_arm = checked(l, "load", "mass_per_arm_kg", nonnegative, "must be >= 0");
    cfg.load.gravity = checked(l, "load", "gravity", positive, "must be positive");
  }

  // pneumatics
  {
    const json& pn = doc["pneumatics"];
    const std::string p = "pneumatics";
    cfg.pneumatics.pressure = checked(pn, p, "pressure_pa", positive, "must be positive");
    cfg.pneumatics.rod_diameter = checked(pn, p, "rod_diameter_m", positive, "must be positive");
    cfg.pneumatics.bore = checked(pn, p, "bore_m", positive, "must be positive");
    if (cfg.pneumatics.bore <= cfg.pneumatics.rod_diameter)
      throw ValidationError("pneumatics.bore_m", "must exceed pneumatics.rod_diameter_m");
    cfg.pneumatics.stroke = checked(pn, p, "stroke_m", positive, "must be positive");

    const json& file = pn["catalog"];
    const json& inline_mm = pn["catalog_mm"];
    if (!file.is_null() && !inline_mm.is_null())
      throw ValidationError("pneumatics.catalog", "give either catalog or catalog_mm, not both");
    try {
      if (!file.is_null()) {
        if (!file.is_string()) throw ValidationError("pneumatics.catalog", "expected a file path");
        std::filesystem::path path = file.get<std::string>();
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        cfg.pneumatics.catalog = BoreCatalog::from_file(path.string());
      } else if (!inline_mm.is_null()) {
        if (!inline_mm.is_array()) throw ValidationError("pneumatics.catalog_mm", "expected an array");
        std::vector<double> bores;
        for (const auto& v : inline_mm) {
          if (!v.is_number()) throw ValidationError("pneumatics.catalog_mm", "expected numbers");
          bores.push_back(mm_to_m(v.get<double>()));
        }
        cfg.pneumatics.catalog = BoreCatalog(std::move(bores));
      } else {
        cfg.pneumatics.catalog = default_catalog();
      }
    } catch (const DomainError& e) {
      throw ValidationError("pneumatics.catalog_mm", e.what());
    }
  }

  // control
  {
    const json& c = doc["control"];
    const std::string p = "control";
    ControlConfig& ctl = cfg.control;
    ctl.sound_threshold =
        checked(c, p, "threshold", [](double v) { return v > 0.0 && v <= 1.0; }, "must lie in (0, 1]");
    ctl.debounce_window = seconds_to_ticks(checked(c, p, "debounce_s", nonnegative, "must be >= 0"));
    ctl.relay_delay = seconds_to_ticks(checked(c, p, "relay_delay_s", nonnegative, "must be >= 0"));
    ctl.flow_rate_retract = checked(c, p, "flow_rate_m3s", positive, "must be positive");
    ctl.flow_rate_extend = c["flow_rate_extend_m3s"].is_null()
                               ? ctl.flow_rate_retract
                               : checked(c, p, "flow_rate_extend_m3s", positive, "must be positive");
    if (!c["manual_override"].is_boolean()) throw ValidationError("control.manual_override", "expected true/false");
    ctl.manual_override = c["manual_override"].get<bool>();
  }

  // simulation
  {
    const json& s = doc["simulation"];
    cfg.simulation.sample_step =
        seconds_to_ticks(checked(s, "simulation", "sample_step_s", positive, "must be positive"));
    if (cfg.simulation.sample_step <= Ticks{0})
      throw ValidationError("simulation.sample_step_s", "must be at least 1 microsecond");
    if (!s["duration_s"].is_null())
      cfg.simulation.duration =
          seconds_to_ticks(checked(s, "simulation", "duration_s", nonnegative, "must be >= 0"));
  }

  // structural
  {
    const json& st = doc["structural"];
    const std::string name = read_string(st, "structural", "material");
    bool found = false;
    for (const auto& m : available_materials()) {
      if (m.name == name) {
        cfg.structural.material = m;
        found = true;
      }
    }
    if (!found) throw ValidationError("structural.material", fmt::format("unknown material '{}'", name));
    cfg.structural.cases.clear();
    for (Component c : kComponents) {
      const std::string key = to_string(c);
      const json& comp = st[key];
      const std::string path = join("structural", key);
      if (c == Component::u_section)
        reject_unknown(comp, path, {"support", "plate_thickness_m", "hole_diameter_m", "shear_planes", "loads"});
      else
        reject_unknown(comp, path, {"support", "section", "arm_length_m", "loads"});
      cfg.structural.cases.push_back(read_component(comp, path, c));
    }
  }

  return cfg;
}

DesignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read config '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

}  // namespace exo
