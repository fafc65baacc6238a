#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jointmap/dataset.hpp"
#include "jointmap/diagnostics.hpp"
#include "jointmap/graph.hpp"
#include "jointmap/mcmc.hpp"
#include "jointmap/model.hpp"
#include "jointmap_cli/config.hpp"

namespace jointmap::cli {

// Dataset, model and priors assembled from a run config; areas follow the
// adjacency file's node order.
struct Problem {
  AdjacencyGraph graph;
  CancerDataset data;
  ModelSpec spec;
  StructureMatrix spatial;
  StructureMatrix temporal;
  HyperParameters hyper;
};

Problem load_problem(const RunConfig& config);

struct FitResult {
  std::vector<ChainOutput> chains;
  DicResult dic;
  std::vector<PsrfEntry> psrf;
};

FitResult fit_problem(const Problem& problem, const McmcConfig& mcmc);

// Output files, all inside config.output_dir.
inline constexpr const char* kSummaryFile = "summary_rr.csv";
inline constexpr const char* kSpatialComponentsFile = "components_spatial.csv";
inline constexpr const char* kTemporalComponentsFile = "components_temporal.csv";
inline constexpr const char* kSpatialWeightsFile = "weights_spatial.csv";
inline constexpr const char* kTemporalWeightsFile = "weights_temporal.csv";
inline constexpr const char* kPsrfFile = "psrf.csv";
inline constexpr const char* kDicFile = "dic.json";
inline constexpr const char* kMetaFile = "run_meta.json";
inline constexpr const char* kCompareFile = "dic_table.csv";

// PSRF above this is flagged in psrf.csv.
inline constexpr double kPsrfThreshold = 1.1;

std::string summary_csv(const Problem& problem, const FitResult& fit);
std::string draws_csv(const ModelSpec& spec, const ChainOutput& chain);

void cmd_fit(const RunConfig& config);
// Writes counts.csv, adjacency.adj and truth.json.
void cmd_simulate(const RunConfig& config);
// Fits variants A to D on the config's dataset and writes dic_table.csv.
void cmd_compare(const RunConfig& config);

struct GeojsonJob {
  std::filesystem::path summary;
  std::filesystem::path geojson;
  std::filesystem::path out;
  std::string period;
  std::string disease;
  std::string label_property = "name";
};

void cmd_export_geojson(const GeojsonJob& job);

// Adds an expected column computed from populations by internal
// standardization.
void cmd_expected(const std::filesystem::path& counts, const std::filesystem::path& population,
                  const std::filesystem::path& out);

}  // namespace jointmap::cli
