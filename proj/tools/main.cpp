#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jointmap/error.hpp"
#include "jointmap_cli/commands.hpp"
#include "jointmap_cli/config.hpp"

namespace {

struct RunOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::size_t chains = 0;
  std::uint64_t seed = 0;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "Override a config entry, e.g. mcmc.burn_in=1000");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--chains", o.chains, "Number of chains");
  cmd->add_option("--seed", o.seed, "Run seed");
}

jointmap::cli::RunConfig load(const CLI::App* cmd, const RunOptions& o) {
  auto overrides = o.overrides;
  if (cmd->count("--out")) overrides.push_back("output_dir=\"" + o.out + "\"");
  if (cmd->count("--chains")) overrides.push_back("mcmc.n_chains=" + std::to_string(o.chains));
  if (cmd->count("--seed")) overrides.push_back("mcmc.seed=" + std::to_string(o.seed));
  auto config = jointmap::cli::load_run_config(o.config, overrides);
  // --out is relative to the working directory, not the config file
  if (cmd->count("--out")) config.output_dir = o.out;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint space-time disease mapping with shared components"};
  app.require_subcommand(1);

  RunOptions fit_opts, sim_opts, cmp_opts;
  auto* fit = app.add_subcommand("fit", "Fit a model and write posterior summaries");
  add_run_options(fit, fit_opts);
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic dataset and its true parameters");
  add_run_options(simulate, sim_opts);
  auto* compare = app.add_subcommand("compare", "Fit variants A to D and tabulate DIC");
  add_run_options(compare, cmp_opts);

  jointmap::cli::GeojsonJob geo;
  auto* export_geo = app.add_subcommand("export-geojson", "Join posterior relative risks onto GeoJSON features");
  export_geo->add_option("--summary", geo.summary, "summary_rr.csv from fit")->required()->check(CLI::ExistingFile);
  export_geo->add_option("--geojson", geo.geojson, "Input FeatureCollection")->required()->check(CLI::ExistingFile);
  export_geo->add_option("--period", geo.period, "Period label")->required();
  export_geo->add_option("--disease", geo.disease, "Disease label")->required();
  export_geo->add_option("--label-property", geo.label_property, "Feature property holding the area label")
      ->capture_default_str();
  export_geo->add_option("--out", geo.out, "Output GeoJSON path")->required();

  std::string counts, population, expected_out;
  auto* expected = app.add_subcommand("expected", "Compute expected counts from populations");
  expected->add_option("--counts", counts, "Counts CSV")->required()->check(CLI::ExistingFile);
  expected->add_option("--population", population, "CSV area,period,population")->required()->check(CLI::ExistingFile);
  expected->add_option("--out", expected_out, "Output counts CSV with an expected column")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) jointmap::cli::cmd_fit(load(fit, fit_opts));
    if (*simulate) jointmap::cli::cmd_simulate(load(simulate, sim_opts));
    if (*compare) jointmap::cli::cmd_compare(load(compare, cmp_opts));
    if (*export_geo) jointmap::cli::cmd_export_geojson(geo);
    if (*expected) jointmap::cli::cmd_expected(counts, population, expected_out);
  } catch (const jointmap::Error& e) {
    std::cerr << "error [" << jointmap::to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
