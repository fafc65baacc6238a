#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "jointmap/dataset.hpp"
#include "jointmap/mcmc.hpp"
#include "jointmap/model.hpp"

namespace jointmap::cli {

struct NamedComponent {
  std::string label;
  std::vector<std::string> diseases;
};

struct PriorSettings {
  double gamma_shape = 0.5;
  double gamma_rate = 0.0005;
  double weight_prior_variance = 5.0;
  std::optional<double> alpha_prior_variance;
};

// Settings of the `simulate` command.
struct SimulationSettings {
  std::size_t areas = 10;
  std::size_t periods = 5;
  double expected = 200.0;
  double field_sd = 0.3;
  double edge_probability = 0.2;
};

// Parsed run configuration. Relative paths are resolved against the directory
// of the config file.
struct RunConfig {
  nlohmann::json document;  // effective config after overrides
  std::filesystem::path counts;
  std::filesystem::path adjacency;
  std::optional<std::filesystem::path> population;
  std::optional<std::filesystem::path> geojson;
  Variant variant = Variant::B;
  std::vector<NamedComponent> components;
  McmcConfig mcmc;
  PriorSettings priors;
  std::filesystem::path output_dir = "out";
  std::optional<std::vector<std::string>> period_order;
  SimulationSettings simulation;

  HyperParameters hyper(std::size_t n_diseases) const;
};

nlohmann::json read_json(const std::filesystem::path& path);

// Applies `dotted.key=value`. The value is parsed as JSON when possible and
// kept as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// The packaged four-component layout, by disease name.
std::vector<NamedComponent> default_named_components();

// Component map over `disease_labels` (in that order). Every named disease must
// be present.
ComponentMap resolve_components(const std::vector<NamedComponent>& components,
                                const std::vector<std::string>& disease_labels);

// Sorted union of the diseases named by the components.
std::vector<std::string> component_diseases(const std::vector<NamedComponent>& components);

}  // namespace jointmap::cli
