#include "rrcd/energy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rrcd/errors.hpp"

namespace rrcd {

using nlohmann::json;

void EnergyLedger::record(EnergyEvent e, std::uint64_t n) {
  switch (e) {
    case EnergyEvent::SliceBlockRead: slice_block_read += n; return;
    case EnergyEvent::SliceBlockWrite: slice_block_write += n; return;
    case EnergyEvent::DesBlock: des_block += n; return;
    case EnergyEvent::ComBlock: com_block += n; return;
    case EnergyEvent::TrRead: tr_read += n; return;
    case EnergyEvent::TrWrite: tr_write += n; return;
    case EnergyEvent::UsrAlloc: usr_alloc += n; return;
    case EnergyEvent::LdsSpillAccess: lds_spill_access += n; return;
    case EnergyEvent::MispeculationExtraWrite: mispeculation_extra_writes += n; return;
  }
}

EnergyLedger& EnergyLedger::operator+=(const EnergyLedger& o) {
  slice_block_read += o.slice_block_read;
  slice_block_write += o.slice_block_write;
  des_block += o.des_block;
  com_block += o.com_block;
  tr_read += o.tr_read;
  tr_write += o.tr_write;
  usr_alloc += o.usr_alloc;
  lds_spill_access += o.lds_spill_access;
  mispeculation_extra_writes += o.mispeculation_extra_writes;
  cycles += o.cycles;
  return *this;
}

double EnergyConstants::suav_dynamic_factor() const {
  if (suav_dynamic_scale) return *suav_dynamic_scale;
  const double r = smoothing_vdd_mv / nominal_vdd_mv;
  return r * r;
}

double EnergyConstants::suav_static_factor() const {
  return suav_static_scale ? *suav_static_scale : smoothing_vdd_mv / nominal_vdd_mv;
}

SliceEnergy EnergyConstants::slice_suav() const {
  return {slice_conv.read_pj * suav_dynamic_factor(), slice_conv.write_pj * suav_dynamic_factor(),
          slice_conv.static_mw * suav_static_factor()};
}

SliceEnergy EnergyConstants::slice_at(ScenarioKind kind) const {
  switch (kind) {
    case ScenarioKind::Comun: return slice_comun;
    case ScenarioKind::Agrupado: return slice_agrupado;
    case ScenarioKind::Disperso: return slice_disperso;
    case ScenarioKind::Conventional: return slice_conv;
    case ScenarioKind::Smoothing: return slice_suav();
  }
  throw ConfigError("unknown scenario kind");
}

double EnergyConstants::rrcd_static_mw() const {
  return com.static_mw * com.count + des.static_mw * des.count + tr.static_mw * tr.count + usr.static_mw * usr.count;
}

void EnergyConstants::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
  };
  auto non_negative = [](double v, const std::string& what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(what + " must be non-negative");
  };
  positive(clock_ghz, "clock_ghz");
  positive(nominal_vdd_mv, "nominal_vdd_mv");
  positive(smoothing_vdd_mv, "smoothing_vdd_mv");
  if (suav_dynamic_scale) non_negative(*suav_dynamic_scale, "suav_dynamic_scale");
  if (suav_static_scale) non_negative(*suav_static_scale, "suav_static_scale");
  for (const auto& [name, s] : {std::pair{"conv", slice_conv}, std::pair{"comun", slice_comun},
                                std::pair{"agrupado", slice_agrupado}, std::pair{"disperso", slice_disperso}}) {
    non_negative(s.read_pj, std::string("slice.") + name + ".read_pj");
    non_negative(s.write_pj, std::string("slice.") + name + ".write_pj");
    non_negative(s.static_mw, std::string("slice.") + name + ".static_mw");
  }
  non_negative(slice_area_mm2, "slice_area_mm2");
  non_negative(slice_access_ns, "slice_access_ns");
  for (const auto& [name, u] : {std::pair{"com", com}, std::pair{"des", des}, std::pair{"tr", tr}, std::pair{"usr", usr}}) {
    const std::string p = std::string("units.") + name + ".";
    non_negative(u.read_pj, p + "read_pj");
    non_negative(u.write_pj, p + "write_pj");
    non_negative(u.static_mw, p + "static_mw");
    non_negative(u.area_mm2, p + "area_mm2");
    non_negative(u.access_ns, p + "access_ns");
    if (u.count < 0) throw ConfigError(p + "count must be non-negative");
  }
  non_negative(lds_access_pj, "lds_access_pj");
}

namespace {

json slice_json(const SliceEnergy& s) {
  return {{"read_pj", s.read_pj}, {"write_pj", s.write_pj}, {"static_mw", s.static_mw}};
}

json unit_json(const UnitEnergy& u) {
  return {{"read_pj", u.read_pj},   {"write_pj", u.write_pj},   {"static_mw", u.static_mw},
          {"area_mm2", u.area_mm2}, {"access_ns", u.access_ns}, {"count", u.count}};
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown key '" + where + (where.empty() ? "" : ".") + k + "'");
  }
}

void read_number(const json& j, const char* key, double& out) {
  if (j.contains(key)) out = j.at(key).get<double>();
}

void read_slice(const json& j, SliceEnergy& s, const std::string& where) {
  check_keys(j, {"read_pj", "write_pj", "static_mw"}, where);
  read_number(j, "read_pj", s.read_pj);
  read_number(j, "write_pj", s.write_pj);
  read_number(j, "static_mw", s.static_mw);
}

void read_unit(const json& j, UnitEnergy& u, const std::string& where) {
  check_keys(j, {"read_pj", "write_pj", "static_mw", "area_mm2", "access_ns", "count"}, where);
  read_number(j, "read_pj", u.read_pj);
  read_number(j, "write_pj", u.write_pj);
  read_number(j, "static_mw", u.static_mw);
  read_number(j, "area_mm2", u.area_mm2);
  read_number(j, "access_ns", u.access_ns);
  if (j.contains("count")) u.count = j.at("count").get<int>();
}

}  // namespace

std::string energy_constants_to_json(const EnergyConstants& c) {
  json j = {{"clock_ghz", c.clock_ghz},
            {"nominal_vdd_mv", c.nominal_vdd_mv},
            {"smoothing_vdd_mv", c.smoothing_vdd_mv},
            {"slice",
             {{"conv", slice_json(c.slice_conv)},
              {"comun", slice_json(c.slice_comun)},
              {"agrupado", slice_json(c.slice_agrupado)},
              {"disperso", slice_json(c.slice_disperso)}}},
            {"slice_area_mm2", c.slice_area_mm2},
            {"slice_access_ns", c.slice_access_ns},
            {"units", {{"com", unit_json(c.com)}, {"des", unit_json(c.des)}, {"tr", unit_json(c.tr)}, {"usr", unit_json(c.usr)}}},
            {"lds_access_pj", c.lds_access_pj}};
  if (c.suav_dynamic_scale) j["suav_dynamic_scale"] = *c.suav_dynamic_scale;
  if (c.suav_static_scale) j["suav_static_scale"] = *c.suav_static_scale;
  return j.dump(2);
}

EnergyConstants energy_constants_from_json(std::string_view text, std::string_view origin) {
  EnergyConstants c;
  try {
    const json j = json::parse(text);
    check_keys(j,
               {"clock_ghz", "nominal_vdd_mv", "smoothing_vdd_mv", "suav_dynamic_scale", "suav_static_scale", "slice",
                "slice_area_mm2", "slice_access_ns", "units", "lds_access_pj"},
               "");
    read_number(j, "clock_ghz", c.clock_ghz);
    read_number(j, "nominal_vdd_mv", c.nominal_vdd_mv);
    read_number(j, "smoothing_vdd_mv", c.smoothing_vdd_mv);
    if (j.contains("suav_dynamic_scale")) c.suav_dynamic_scale = j.at("suav_dynamic_scale").get<double>();
    if (j.contains("suav_static_scale")) c.suav_static_scale = j.at("suav_static_scale").get<double>();
    if (j.contains("slice")) {
      const json& s = j.at("slice");
      check_keys(s, {"conv", "comun", "agrupado", "disperso"}, "slice");
      if (s.contains("conv")) read_slice(s.at("conv"), c.slice_conv, "slice.conv");
      if (s.contains("comun")) read_slice(s.at("comun"), c.slice_comun, "slice.comun");
      if (s.contains("agrupado")) read_slice(s.at("agrupado"), c.slice_agrupado, "slice.agrupado");
      if (s.contains("disperso")) read_slice(s.at("disperso"), c.slice_disperso, "slice.disperso");
    }
    read_number(j, "slice_area_mm2", c.slice_area_mm2);
    read_number(j, "slice_access_ns", c.slice_access_ns);
    if (j.contains("units")) {
      const json& u = j.at("units");
      check_keys(u, {"com", "des", "tr", "usr"}, "units");
      if (u.contains("com")) read_unit(u.at("com"), c.com, "units.com");
      if (u.contains("des")) read_unit(u.at("des"), c.des, "units.des");
      if (u.contains("tr")) read_unit(u.at("tr"), c.tr, "units.tr");
      if (u.contains("usr")) read_unit(u.at("usr"), c.usr, "units.usr");
    }
    read_number(j, "lds_access_pj", c.lds_access_pj);
    c.validate();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return c;
}

EnergyConstants load_energy_constants(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open energy constants '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return energy_constants_from_json(ss.str(), path);
}

EnergyReport finalize(const EnergyLedger& ledger, const EnergyConstants& constants, Mode mode,
                      ScenarioKind scenario) {
  constants.validate();
  const SliceEnergy slice = mode == Mode::Conv   ? constants.slice_conv
                            : mode == Mode::Suav ? constants.slice_suav()
                                                 : constants.slice_at(scenario);
  const double ns = static_cast<double>(ledger.cycles) * constants.cycle_ns();
  auto n = [](std::uint64_t v) { return static_cast<double>(v); };

  EnergyReport r;
  r.static_pj = slice.static_mw * ns;
  r.read_pj = n(ledger.slice_block_read) * slice.read_pj;
  r.write_pj = n(ledger.slice_block_write) * slice.write_pj;
  if (mode == Mode::Rrcd) {
    const auto& c = constants;
    r.comdes_static_pj = (c.com.static_mw * c.com.count + c.des.static_mw * c.des.count) * ns;
    r.comdes_pj = r.comdes_static_pj + n(ledger.com_block) * c.com.write_pj + n(ledger.des_block) * c.des.read_pj;
    r.redirections_static_pj = (c.tr.static_mw * c.tr.count + c.usr.static_mw * c.usr.count) * ns;
    r.redirections_pj = r.redirections_static_pj + n(ledger.tr_read) * c.tr.read_pj +
                        n(ledger.tr_write) * c.tr.write_pj + n(ledger.usr_alloc) * c.usr.write_pj;
  }
  r.lds_pj = n(ledger.lds_spill_access) * constants.lds_access_pj;
  if (ledger.lds_spill_access > 0 && constants.lds_access_pj == 0.0) {
    r.warnings.push_back("LDS spill energy not configured (lds_access_pj = 0); " +
                         std::to_string(ledger.lds_spill_access) + " beats charged at zero");
  }
  return r;
}

double AreaReport::overhead_percent_rounded() const { return std::round(overhead * 1000.0) / 10.0; }

AreaReport area_report(const EnergyConstants& c) {
  AreaReport a;
  a.slice_mm2 = c.slice_area_mm2;
  a.com_mm2 = c.com.area_mm2;
  a.des_mm2 = c.des.area_mm2;
  a.tr_mm2 = c.tr.area_mm2;
  a.usr_mm2 = c.usr.area_mm2;
  a.unit_sum_mm2 = a.com_mm2 + a.des_mm2 + a.tr_mm2 + a.usr_mm2;
  a.total_mm2 = a.com_mm2 * c.com.count + a.des_mm2 * c.des.count + a.tr_mm2 * c.tr.count + a.usr_mm2 * c.usr.count;
  if (a.slice_mm2 > 0.0) {
    a.unit_sum_overhead = a.unit_sum_mm2 / a.slice_mm2;
    a.overhead = a.total_mm2 / a.slice_mm2;
  }
  return a;
}

}  // namespace rrcd
