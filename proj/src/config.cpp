#include "kgsm/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "kgsm/csv.hpp"

namespace kgsm {

using nlohmann::json;

std::string_view to_string(Sampling sampling) {
  return sampling == Sampling::Uniform ? "uniform" : "squared-norm";
}

std::optional<Sampling> parse_sampling(std::string_view name) {
  if (name == "squared-norm") {
    return Sampling::SquaredNorm;
  }
  if (name == "uniform") {
    return Sampling::Uniform;
  }
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  if (generator != "spectrum" && generator != "gaussian") {
    throw ConfigError("system.generator must be \"spectrum\" or \"gaussian\"");
  }
  if (preset.cols == 0 || preset.rows < preset.cols) {
    throw ConfigError("system needs rows >= cols >= 1");
  }
  if (generator == "spectrum") {
    try {
      expand_preset(preset);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("system: ") + e.what());
    }
  }
  if (methods.empty()) {
    throw ConfigError("methods must not be empty");
  }
  const bool momentum = std::any_of(methods.begin(), methods.end(), uses_momentum);
  if (!momentum && (mass != 0.0 || beta.has_value())) {
    throw ConfigError("mass and beta require a momentum method (kgsm or hbm)");
  }
  try {
    MomentumParams::make(mass, beta.value_or(0.0));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (trials == 0) {
    throw ConfigError("trials must be at least 1");
  }
  for (std::size_t l : tracked) {
    if (l == 0 || l > preset.cols) {
      throw ConfigError("tracked direction " + std::to_string(l) + " outside 1.." +
                        std::to_string(preset.cols));
    }
  }
  if (output.empty()) {
    throw ConfigError("output directory must not be empty");
  }
}

SystemDescriptor ExperimentConfig::descriptor() const {
  return {generator, preset, seed};
}

std::vector<std::size_t> ExperimentConfig::tracked_zero_based() const {
  if (tracked.empty()) {
    return {preset.cols - 1};
  }
  std::set<std::size_t> unique;
  for (std::size_t l : tracked) {
    unique.insert(l - 1);
  }
  return {unique.begin(), unique.end()};
}

json to_json(const ExperimentConfig& c) {
  json system = {{"generator", c.generator},
                 {"preset", std::string(to_string(c.preset.kind))},
                 {"rows", c.preset.rows},
                 {"cols", c.preset.cols},
                 {"floor", c.preset.floor}};
  if (c.preset.kind == SpectrumKind::Explicit) {
    system["sigma"] = c.preset.explicit_sigma;
  }
  json methods = json::array();
  for (Method m : c.methods) {
    methods.push_back(std::string(to_string(m)));
  }
  return {{"system", system},
          {"methods", methods},
          {"mass", c.mass},
          {"beta", c.beta ? json(*c.beta) : json("auto")},
          {"iterations", c.iterations},
          {"trials", c.trials},
          {"tracked", c.tracked},
          {"seed", c.seed},
          {"stride", c.stride},
          {"sampling", std::string(to_string(c.sampling))},
          {"x0", c.zero_start ? "zeros" : "gaussian"},
          {"output", c.output},
          {"svg", c.svg}};
}

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys,
                    const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("bad value for '") + key + "'");
    }
  }
}

} // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  reject_unknown(j,
                 {"system", "methods", "mass", "beta", "iterations", "trials", "tracked", "seed",
                  "stride", "sampling", "x0", "output", "svg"},
                 "config");
  ExperimentConfig c;
  if (j.contains("system")) {
    const json& s = j.at("system");
    if (!s.is_object()) {
      throw ConfigError("'system' must be an object");
    }
    reject_unknown(s, {"generator", "preset", "rows", "cols", "floor", "sigma"}, "system");
    read_field(s, "generator", c.generator);
    std::string preset_name(to_string(c.preset.kind));
    read_field(s, "preset", preset_name);
    const auto kind = parse_spectrum_kind(preset_name);
    if (!kind) {
      throw ConfigError("unknown preset '" + preset_name + "'");
    }
    c.preset.kind = *kind;
    read_field(s, "rows", c.preset.rows);
    read_field(s, "cols", c.preset.cols);
    read_field(s, "floor", c.preset.floor);
    if (*kind == SpectrumKind::Explicit) {
      if (!s.contains("sigma")) {
        throw ConfigError("explicit preset needs 'sigma'");
      }
      read_field(s, "sigma", c.preset.explicit_sigma);
      if (!s.contains("cols")) {
        c.preset.cols = c.preset.explicit_sigma.size();
      }
    } else if (s.contains("sigma")) {
      throw ConfigError("'sigma' is only valid with the explicit preset");
    }
  }
  if (j.contains("methods")) {
    std::vector<std::string> names;
    read_field(j, "methods", names);
    c.methods.clear();
    for (const auto& name : names) {
      const auto m = parse_method(name);
      if (!m) {
        throw ConfigError("unknown method '" + name + "'");
      }
      c.methods.push_back(*m);
    }
  }
  read_field(j, "mass", c.mass);
  if (!j.contains("mass") && std::none_of(c.methods.begin(), c.methods.end(), uses_momentum)) {
    c.mass = 0.0;
  }
  if (j.contains("beta")) {
    const json& b = j.at("beta");
    if (b.is_string() && b.get<std::string>() == "auto") {
      c.beta.reset();
    } else if (b.is_number()) {
      c.beta = b.get<double>();
    } else {
      throw ConfigError("'beta' must be a number or \"auto\"");
    }
  }
  read_field(j, "iterations", c.iterations);
  read_field(j, "trials", c.trials);
  read_field(j, "tracked", c.tracked);
  read_field(j, "seed", c.seed);
  read_field(j, "stride", c.stride);
  if (j.contains("sampling")) {
    std::string name;
    read_field(j, "sampling", name);
    const auto s = parse_sampling(name);
    if (!s) {
      throw ConfigError("unknown sampling '" + name + "'");
    }
    c.sampling = *s;
  }
  if (j.contains("x0")) {
    std::string start;
    read_field(j, "x0", start);
    if (start != "gaussian" && start != "zeros") {
      throw ConfigError("'x0' must be \"gaussian\" or \"zeros\"");
    }
    c.zero_start = start == "zeros";
  }
  read_field(j, "output", c.output);
  read_field(j, "svg", c.svg);
  return c;
}

json system_to_json(const LinearSystem& system, const SystemDescriptor& d) {
  json rows = json::array();
  for (std::size_t i = 0; i < system.rows(); ++i) {
    const auto r = system.a.row(i);
    rows.push_back(Vector(r.begin(), r.end()));
  }
  json preset = {{"preset", std::string(to_string(d.preset.kind))},
                 {"rows", d.preset.rows},
                 {"cols", d.preset.cols},
                 {"floor", d.preset.floor}};
  if (d.preset.kind == SpectrumKind::Explicit) {
    preset["sigma"] = d.preset.explicit_sigma;
  }
  return {{"descriptor", {{"generator", d.generator}, {"system", preset}, {"seed", d.seed}}},
          {"rows", system.rows()},
          {"cols", system.cols()},
          {"a", rows},
          {"b", system.b},
          {"solution", system.solution},
          {"singular_values", system.spectrum.singular_values},
          {"frobenius_sq", system.frob_sq}};
}

std::string system_to_csv(const LinearSystem& system) {
  std::ostringstream out;
  std::vector<std::string> fields;
  for (std::size_t j = 0; j < system.cols(); ++j) {
    fields.push_back("a_" + std::to_string(j + 1));
  }
  fields.emplace_back("b");
  csv::write_row(out, fields);
  for (std::size_t i = 0; i < system.rows(); ++i) {
    fields.clear();
    for (double v : system.a.row(i)) {
      fields.push_back(csv::format_double(v));
    }
    fields.push_back(csv::format_double(system.b[i]));
    csv::write_row(out, fields);
  }
  return out.str();
}

Instance make_instance(const SystemDescriptor& d, bool zero_start) {
  RngStream stream(d.seed);
  Instance inst;
  if (d.generator == "gaussian") {
    inst.system = generate_gaussian_system(d.preset.rows, d.preset.cols, stream);
  } else if (d.generator == "spectrum") {
    inst.system = generate_spectrum_system(d.preset, stream);
  } else {
    throw ConfigError("unknown generator '" + d.generator + "'");
  }
  inst.x0 = zero_start ? Vector(inst.system.cols(), 0.0)
                       : gaussian_vector(inst.system.cols(), stream);
  return inst;
}

} // namespace kgsm
