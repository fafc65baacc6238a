#include "jointmap_cli/config.hpp"

#include <algorithm>
#include <set>

#include "jointmap/error.hpp"
#include "jointmap/text.hpp"

namespace jointmap::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::format, std::string("config field '") + key + "': " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<NamedComponent> parse_components(const json& value, const fs::path& base) {
  if (value.is_string()) {
    const auto name = value.get<std::string>();
    if (name == "default") return default_named_components();
    return parse_components(read_json(resolve(base, name)), base);
  }
  if (!value.is_array()) throw Error(ErrorCode::format, "component_map must be \"default\", a file path or a list");
  std::vector<NamedComponent> out;
  for (const auto& entry : value) {
    NamedComponent c;
    try {
      c.label = entry.at("label").get<std::string>();
      c.diseases = entry.at("diseases").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::format, std::string("component_map entry: ") + e.what());
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

HyperParameters RunConfig::hyper(std::size_t n_diseases) const {
  auto h = HyperParameters::defaults(n_diseases);
  h.gamma_shape = priors.gamma_shape;
  h.gamma_rate = priors.gamma_rate;
  h.weight_prior_variance = priors.weight_prior_variance;
  h.alpha_prior_variance = priors.alpha_prior_variance;
  h.validate(n_diseases);
  return h;
}

json read_json(const fs::path& path) {
  const auto text = text::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::format, path.string() + ": " + e.what());
  }
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::format, "override must look like key=value: " + std::string(assignment));
  }
  const auto key = assignment.substr(0, eq);
  const auto raw = std::string(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  for (auto part : text::split(key, '.')) {
    if (part.empty()) throw Error(ErrorCode::format, "empty key segment in override " + std::string(assignment));
    if (!node->is_object()) *node = json::object();
    node = &(*node)[std::string(part)];
  }
  *node = std::move(value);
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw Error(ErrorCode::format, "config must be a JSON object");
  RunConfig c;
  c.document = doc;

  std::string s;
  if (doc.contains("counts")) {
    read_if(doc, "counts", s);
    c.counts = resolve(base_dir, s);
  }
  if (doc.contains("adjacency")) {
    read_if(doc, "adjacency", s);
    c.adjacency = resolve(base_dir, s);
  }
  if (doc.contains("population")) {
    read_if(doc, "population", s);
    c.population = resolve(base_dir, s);
  }
  if (doc.contains("geojson")) {
    read_if(doc, "geojson", s);
    c.geojson = resolve(base_dir, s);
  }
  if (doc.contains("variant")) {
    read_if(doc, "variant", s);
    c.variant = parse_variant(s);
  }
  c.components = parse_components(doc.value("component_map", json("default")), base_dir);
  if (doc.contains("output_dir")) {
    read_if(doc, "output_dir", s);
    c.output_dir = resolve(base_dir, s);
  } else {
    c.output_dir = base_dir / "out";
  }
  if (doc.contains("period_order")) {
    std::vector<std::string> order;
    read_if(doc, "period_order", order);
    c.period_order = std::move(order);
  }

  if (doc.contains("mcmc")) {
    const auto& m = doc.at("mcmc");
    read_if(m, "n_keep_iterations", c.mcmc.n_keep_iterations);
    read_if(m, "thin", c.mcmc.thin);
    read_if(m, "burn_in", c.mcmc.burn_in);
    read_if(m, "n_chains", c.mcmc.n_chains);
    read_if(m, "seed", c.mcmc.seed);
    read_if(m, "target_acceptance", c.mcmc.target_acceptance);
    read_if(m, "adapt_interval", c.mcmc.adapt_interval);
    read_if(m, "initial_step_size", c.mcmc.initial_step_size);
    read_if(m, "joint_field_updates", c.mcmc.joint_field_updates);
    read_if(m, "joint_target_acceptance", c.mcmc.joint_target_acceptance);
  }
  c.mcmc.validate();

  if (doc.contains("priors")) {
    const auto& p = doc.at("priors");
    read_if(p, "gamma_shape", c.priors.gamma_shape);
    read_if(p, "gamma_rate", c.priors.gamma_rate);
    read_if(p, "weight_prior_variance", c.priors.weight_prior_variance);
    if (p.contains("alpha_prior_variance")) {
      double v = 0.0;
      read_if(p, "alpha_prior_variance", v);
      c.priors.alpha_prior_variance = v;
    }
  }

  if (doc.contains("simulate")) {
    const auto& m = doc.at("simulate");
    read_if(m, "areas", c.simulation.areas);
    read_if(m, "periods", c.simulation.periods);
    read_if(m, "expected", c.simulation.expected);
    read_if(m, "field_sd", c.simulation.field_sd);
    read_if(m, "edge_probability", c.simulation.edge_probability);
  }
  return c;
}

RunConfig load_run_config(const fs::path& path, const std::vector<std::string>& overrides) {
  auto doc = read_json(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_run_config(doc, path.parent_path());
}

std::vector<NamedComponent> default_named_components() {
  const auto map = default_component_map();
  const auto diseases = default_disease_labels();
  std::vector<NamedComponent> out;
  for (std::size_t l = 0; l < map.n_components(); ++l) {
    NamedComponent c{map.labels()[l], {}};
    for (auto k : map.members(l)) c.diseases.push_back(diseases[k]);
    out.push_back(std::move(c));
  }
  return out;
}

ComponentMap resolve_components(const std::vector<NamedComponent>& components,
                                const std::vector<std::string>& disease_labels) {
  std::vector<std::string> labels;
  std::vector<std::vector<bool>> include;
  for (const auto& c : components) {
    labels.push_back(c.label);
    std::vector<bool> row(disease_labels.size(), false);
    for (const auto& name : c.diseases) {
      const auto it = std::find(disease_labels.begin(), disease_labels.end(), name);
      if (it == disease_labels.end()) {
        throw Error(ErrorCode::unknown_label,
                    "component '" + c.label + "' names disease '" + name + "' which is not in the data");
      }
      row[static_cast<std::size_t>(it - disease_labels.begin())] = true;
    }
    include.push_back(std::move(row));
  }
  return ComponentMap(std::move(labels), std::move(include));
}

std::vector<std::string> component_diseases(const std::vector<NamedComponent>& components) {
  std::set<std::string> all;
  for (const auto& c : components) all.insert(c.diseases.begin(), c.diseases.end());
  return {all.begin(), all.end()};
}

}  // namespace jointmap::cli
