#include "rrcd/trace.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "rrcd/errors.hpp"

namespace rrcd {

using nlohmann::json;

namespace {

template <typename T>
T get_int(const json& params, const char* key, long long lo, long long hi) {
  if (!params.contains(key)) throw ConfigError(std::string("missing parameter \"") + key + "\"");
  const json& v = params.at(key);
  if (!v.is_number_integer()) throw ConfigError(std::string("parameter \"") + key + "\" must be an integer");
  const auto x = v.is_number_unsigned() ? static_cast<long long>(v.get<unsigned long long>()) : v.get<long long>();
  if (x < lo || x > hi) {
    throw ConfigError(std::string("parameter \"") + key + "\" = " + std::to_string(x) + " out of range");
  }
  return static_cast<T>(x);
}

std::optional<int> optional_index(const json& j, const char* what) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_number_integer()) throw ConfigError(std::string(what) + " must be an integer register index");
  return j.get<int>();
}

TraceInstruction parse_line(const json& j) {
  if (!j.is_object()) throw ConfigError("trace line is not a JSON object");
  if (!j.contains("wf")) throw ConfigError("missing \"wf\"");
  const int wf = j.at("wf").get<int>();
  if (j.contains("start")) return TraceInstruction::start(wf, j.at("start").get<int>());
  if (j.contains("end")) {
    if (j.at("end") != true) throw ConfigError("\"end\" must be true");
    return TraceInstruction::end(wf);
  }
  TraceInstruction ins;
  ins.wf = wf;
  if (j.contains("src")) {
    const json& src = j.at("src");
    if (!src.is_array() || src.size() > 2) throw ConfigError("\"src\" must be an array of at most two indices");
    if (src.size() > 0) ins.src0 = optional_index(src[0], "src[0]");
    if (src.size() > 1) ins.src1 = optional_index(src[1], "src[1]");
  }
  if (j.contains("dst")) ins.dest = optional_index(j.at("dst"), "dst");
  if (j.contains("val") && !j.at("val").is_null()) ins.dest_value = value_from_json(j.at("val"));
  return ins;
}

}  // namespace

json value_to_json(const RegisterEntry& value) {
  const auto c = try_compress(value);
  if (!c) return {{"pattern", "raw"}, {"params", {{"hex", value.to_hex()}}}};
  json params = {{"base", c->base}};
  if (c->pattern == Pattern::Stride) params["delta"] = int{c->delta1};
  if (c->pattern == Pattern::TwoDelta) {
    params["delta1"] = int{c->delta1};
    params["delta2"] = int{c->delta2};
    params["group_len"] = c->group_len();
  }
  return {{"pattern", std::string(to_string(c->pattern))}, {"params", params}};
}

RegisterEntry value_from_json(const json& j) {
  if (!j.is_object() || !j.contains("pattern")) throw ConfigError("value needs a \"pattern\"");
  const std::string pattern = j.at("pattern").get<std::string>();
  const json params = j.value("params", json::object());
  if (pattern == "raw") {
    if (!params.contains("hex") || !params.at("hex").is_string()) throw ConfigError("raw value needs params.hex");
    return RegisterEntry::from_hex(params.at("hex").get<std::string>());
  }
  CompressedReg c;
  c.base = get_int<std::uint32_t>(params, "base", 0, 0xFFFFFFFFLL);
  if (pattern == "scalar") {
    c.pattern = Pattern::Scalar;
  } else if (pattern == "stride") {
    c.pattern = Pattern::Stride;
    c.delta1 = get_int<std::int8_t>(params, "delta", -128, 127);
  } else if (pattern == "twodelta") {
    c.pattern = Pattern::TwoDelta;
    c.delta1 = get_int<std::int8_t>(params, "delta1", -128, 127);
    c.delta2 = get_int<std::int8_t>(params, "delta2", -128, 127);
    const int g = get_int<int>(params, "group_len", 2, 32);
    if ((g & (g - 1)) != 0) throw ConfigError("group_len must be a power of two");
    while ((1 << c.group_log2) < g) ++c.group_log2;
  } else {
    throw ConfigError("unknown pattern \"" + pattern + "\"");
  }
  return decompress(c);
}

Trace read_trace(std::istream& is, std::string_view path) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      TraceInstruction ins = parse_line(json::parse(line));
      ins.line = lineno;
      trace.push_back(std::move(ins));
    } catch (const json::exception& e) {
      throw ConfigError(std::string(path) + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(path) + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  try {
    validate_trace(trace);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(path) + ": " + e.what());
  }
  return trace;
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open trace file");
  return read_trace(in, path);
}

void write_trace(std::ostream& os, const Trace& trace) {
  for (const auto& ins : trace) {
    json j = {{"wf", ins.wf}};
    if (ins.marker) {
      if (ins.marker->kind == Marker::Kind::Start) {
        j["start"] = ins.marker->window;
      } else {
        j["end"] = true;
      }
    } else {
      json src = json::array();
      if (ins.src0 || ins.src1) src.push_back(ins.src0 ? json(*ins.src0) : json(nullptr));
      if (ins.src1) src.push_back(*ins.src1);
      j["src"] = src;
      if (ins.dest) {
        j["dst"] = *ins.dest;
        j["val"] = value_to_json(*ins.dest_value);
      }
    }
    os << j.dump() << '\n';
  }
}

void save_trace(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot write trace file");
  write_trace(out, trace);
  if (!out) throw ConfigError(path + ": write failed");
}

}  // namespace rrcd
