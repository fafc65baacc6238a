#include "jointmap_cli/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iostream>
#include <map>

#include "jointmap/error.hpp"
#include "jointmap/simulate.hpp"
#include "jointmap/text.hpp"
#include "jointmap_cli/serialize.hpp"

namespace jointmap::cli {

using nlohmann::json;
namespace fs = std::filesystem;
using text::format_double;

namespace {

void require_file(const fs::path& p, const char* what) {
  if (p.empty()) throw Error(ErrorCode::io, std::string("config does not name a ") + what + " file");
  if (!fs::is_regular_file(p)) throw Error(ErrorCode::io, std::string(what) + " file not found: " + p.string());
}

std::string summary_row(const PosteriorSummary& s) {
  return format_double(s.median) + "," + format_double(s.lower) + "," + format_double(s.upper);
}

std::string weights_csv(const Problem& problem, const FitResult& fit, WeightMode mode) {
  const auto& cm = problem.spec.components();
  const auto& diseases = problem.data.disease_labels();
  std::string out = "component,row_disease,col_disease,median,lo,hi,significant\n";
  for (std::size_t l = 0; l < cm.n_components(); ++l) {
    const auto table = weight_ratio_table(fit.chains, problem.spec, l, mode);
    for (auto r : table.diseases)
      for (auto c : table.diseases) {
        const auto& s = table.at(r, c);
        out += cm.labels()[l] + "," + diseases[r] + "," + diseases[c] + "," + summary_row(s) + "," +
               (r != c && s.excludes(1.0) ? "1" : "0") + "\n";
      }
  }
  return out;
}

std::string components_csv(const Problem& problem, const FitResult& fit, bool spatial) {
  const auto& cm = problem.spec.components();
  const auto& labels = spatial ? problem.data.area_labels() : problem.data.period_labels();
  std::string out = spatial ? "component,area,median,lo,hi\n" : "component,period,median,lo,hi\n";
  for (std::size_t l = 0; l < cm.n_components(); ++l) {
    const auto rows = spatial ? spatial_component_table(fit.chains, problem.spec, l)
                              : temporal_rr_table(fit.chains, problem.spec, l);
    for (std::size_t i = 0; i < rows.size(); ++i) out += cm.labels()[l] + "," + labels[i] + "," + summary_row(rows[i]) + "\n";
  }
  return out;
}

std::string psrf_csv(const FitResult& fit) {
  std::string out = "parameter,psrf,flag\n";
  for (const auto& e : fit.psrf) {
    const char* flag = std::isnan(e.psrf) ? "undefined" : e.psrf > kPsrfThreshold ? "above_threshold" : "ok";
    out += e.parameter + "," + format_double(e.psrf) + "," + flag + "\n";
  }
  return out;
}

json dic_json(Variant v, const DicResult& d) {
  return json{{"model", to_string(v)}, {"d_bar", d.d_bar}, {"p_d", d.p_d}, {"dic", d.dic}};
}

json mcmc_json(const McmcConfig& m) {
  return json{{"n_keep_iterations", m.n_keep_iterations}, {"thin", m.thin},
              {"burn_in", m.burn_in},                     {"n_chains", m.n_chains},
              {"seed", m.seed},                           {"target_acceptance", m.target_acceptance},
              {"adapt_interval", m.adapt_interval},       {"initial_step_size", m.initial_step_size},
              {"joint_field_updates", m.joint_field_updates}, {"joint_target_acceptance", m.joint_target_acceptance}};
}

json meta_json(const RunConfig& config, const Problem& problem, const FitResult& fit) {
  json chains = json::array();
  for (const auto& c : fit.chains) {
    json acc = json::array();
    for (const auto& a : c.acceptance) {
      acc.push_back(json{{"block", a.block}, {"proposed", a.proposed}, {"accepted", a.accepted}, {"rate", a.rate()}});
    }
    chains.push_back(json{{"index", c.chain_index}, {"seed", c.seed}, {"draws", c.draws.size()}, {"acceptance", acc}});
  }
  const auto n_islands = fit.chains.empty() ? std::size_t{1} : fit.chains.front().n_islands;
  json components = json::array();
  const auto& cm = problem.spec.components();
  for (std::size_t l = 0; l < cm.n_components(); ++l) {
    json names = json::array();
    for (auto k : cm.members(l)) names.push_back(problem.data.disease_labels()[k]);
    components.push_back(json{{"label", cm.labels()[l]}, {"diseases", names}});
  }
  json meta;
  meta["config"] = config.document;
  meta["variant"] = to_string(problem.spec.variant());
  meta["mcmc"] = mcmc_json(config.mcmc);
  meta["seed"] = config.mcmc.seed;
  meta["chains"] = chains;
  meta["components"] = components;
  meta["dims"] = json{{"areas", problem.data.dims().areas},
                      {"periods", problem.data.dims().periods},
                      {"diseases", problem.data.dims().diseases}};
  meta["n_islands"] = n_islands;
  meta["islands"] = n_islands > 1;
  if (n_islands > 1) meta["island_recentering"] = "single global mean per spatial field";
  std::size_t flagged = 0;
  for (const auto& e : fit.psrf) flagged += e.psrf > kPsrfThreshold ? 1 : 0;
  meta["psrf_above_threshold"] = flagged;
  return meta;
}

void write(const fs::path& dir, const std::string& name, const std::string& content) {
  text::write_file(dir / name, content);
}

}  // namespace

Problem load_problem(const RunConfig& config) {
  require_file(config.counts, "counts");
  require_file(config.adjacency, "adjacency");
  LabelOrder order;
  order.periods = config.period_order;
  const auto table = load_counts(text::read_file(config.counts), order);
  std::optional<Eigen::MatrixXd> population;
  if (config.population) {
    require_file(*config.population, "population");
    population = load_population(text::read_file(*config.population), table.area_labels, table.period_labels);
  }
  auto graph = parse_adjacency(text::read_file(config.adjacency));
  auto data = align_to_graph(make_dataset(table, population), graph);
  auto components = resolve_components(config.components, data.disease_labels());
  ModelSpec spec(config.variant, std::move(components), data.dims());
  auto spatial = structure_matrix(graph);
  auto temporal = rw1_structure(data.dims().periods);
  auto hyper = config.hyper(data.dims().diseases);
  return Problem{std::move(graph), std::move(data), std::move(spec), std::move(spatial), std::move(temporal),
                 std::move(hyper)};
}

FitResult fit_problem(const Problem& p, const McmcConfig& mcmc) {
  FitResult out;
  out.chains = run_chains(p.data, p.spec, p.hyper, p.spatial, p.temporal, mcmc, Execution::concurrent);
  out.dic = dic(p.data, p.spec, out.chains);
  if (out.chains.size() >= 2) out.psrf = psrf_report(out.chains, p.spec);
  return out;
}

std::string summary_csv(const Problem& problem, const FitResult& fit) {
  const auto rows = area_rr_map_data(fit.chains, problem.spec);
  const auto& d = problem.data.dims();
  std::string out = "area,period,disease,median,lo,hi\n";
  for (std::size_t i = 0; i < d.areas; ++i)
    for (std::size_t j = 0; j < d.periods; ++j)
      for (std::size_t k = 0; k < d.diseases; ++k) {
        out += problem.data.area_labels()[i] + "," + problem.data.period_labels()[j] + "," +
               problem.data.disease_labels()[k] + "," + summary_row(rows[d.index(i, j, k)]) + "\n";
      }
  return out;
}

std::string draws_csv(const ModelSpec& spec, const ChainOutput& chain) {
  const auto names = parameter_names(spec);
  std::string out = "iteration,parameter,value\n";
  for (std::size_t t = 0; t < chain.draws.size(); ++t) {
    const auto iteration = std::to_string(chain.config.burn_in + (t + 1) * chain.config.thin);
    const auto values = flatten(chain.draws[t], spec);
    for (std::size_t p = 0; p < names.size(); ++p) out += iteration + "," + names[p] + "," + format_double(values[p]) + "\n";
    out += iteration + ",deviance," + format_double(chain.deviance[t]) + "\n";
  }
  return out;
}

void cmd_fit(const RunConfig& config) {
  const auto problem = load_problem(config);
  const auto& d = problem.data.dims();
  std::clog << "fit: variant " << to_string(config.variant) << ", " << d.areas << " areas x " << d.periods
            << " periods x " << d.diseases << " diseases, " << config.mcmc.n_chains << " chains x "
            << config.mcmc.n_draws() << " draws\n";
  const auto fit = fit_problem(problem, config.mcmc);

  const auto& dir = config.output_dir;
  fs::create_directories(dir);
  for (const auto& c : fit.chains) {
    write(dir, "chain_" + std::to_string(c.chain_index) + "_draws.csv", draws_csv(problem.spec, c));
  }
  write(dir, kSummaryFile, summary_csv(problem, fit));
  write(dir, kSpatialComponentsFile, components_csv(problem, fit, true));
  write(dir, kTemporalComponentsFile, components_csv(problem, fit, false));
  write(dir, kSpatialWeightsFile, weights_csv(problem, fit, WeightMode::spatial));
  write(dir, kTemporalWeightsFile, weights_csv(problem, fit, WeightMode::temporal));
  write(dir, kPsrfFile, psrf_csv(fit));
  write(dir, kDicFile, dic_json(config.variant, fit.dic).dump(2) + "\n");
  write(dir, kMetaFile, meta_json(config, problem, fit).dump(2) + "\n");

  std::size_t flagged = 0;
  for (const auto& e : fit.psrf) flagged += e.psrf > kPsrfThreshold ? 1 : 0;
  if (flagged > 0) std::clog << "fit: " << flagged << " quantities with PSRF above " << kPsrfThreshold << "\n";
  if (fit.chains.size() < 2) std::clog << "fit: PSRF needs at least two chains; report left empty\n";
  std::clog << "fit: DIC " << format_double(fit.dic.dic) << ", outputs in " << dir.string() << "\n";
}

void cmd_simulate(const RunConfig& config) {
  const auto& sim = config.simulation;
  const auto diseases = component_diseases(config.components);
  ModelSpec spec(config.variant, resolve_components(config.components, diseases),
                 Dims{sim.areas, sim.periods, diseases.size()});
  Rng rng(config.mcmc.seed);
  const auto graph = random_connected_graph(sim.areas, sim.edge_probability, rng);
  const auto truth = draw_true_state(spec, rng, sim.field_sd);
  SimulationRecipe recipe{spec,     truth, Expected(spec.dims(), sim.expected), rng(), graph.labels(),
                          numbered_labels("period", sim.periods), diseases};
  const auto data = simulate_dataset(recipe);

  json components = json::array();
  for (const auto& c : config.components) components.push_back(json{{"label", c.label}, {"diseases", c.diseases}});
  json doc;
  doc["variant"] = to_string(config.variant);
  doc["seed"] = config.mcmc.seed;
  doc["data_seed"] = recipe.seed;
  doc["areas"] = data.area_labels();
  doc["periods"] = data.period_labels();
  doc["diseases"] = data.disease_labels();
  doc["components"] = components;
  doc["expected"] = sim.expected;
  doc["field_sd"] = sim.field_sd;
  doc["state"] = state_to_json(truth);

  const auto& dir = config.output_dir;
  fs::create_directories(dir);
  write(dir, "counts.csv", write_counts_csv(data));
  write(dir, "adjacency.adj", serialize_adjacency(graph));
  write(dir, "truth.json", doc.dump(2) + "\n");
  std::clog << "simulate: " << data.dims().cells() << " cells written to " << dir.string() << "\n";
}

void cmd_compare(const RunConfig& config) {
  const auto base = load_problem(config);
  struct Row {
    Variant variant;
    DicResult dic;
  };
  std::vector<Row> rows;
  for (auto v : {Variant::A, Variant::B, Variant::C, Variant::D}) {
    Problem p{base.graph, base.data, ModelSpec(v, base.spec.components(), base.spec.dims()),
              base.spatial, base.temporal, base.hyper};
    std::clog << "compare: fitting variant " << to_string(v) << "\n";
    FitResult fit;
    fit.chains = run_chains(p.data, p.spec, p.hyper, p.spatial, p.temporal, config.mcmc, Execution::concurrent);
    rows.push_back({v, dic(p.data, p.spec, fit.chains)});
  }
  const auto best = std::min_element(rows.begin(), rows.end(),
                                     [](const Row& a, const Row& b) { return a.dic.dic < b.dic.dic; });
  std::string out = "model,d_bar,p_d,dic,best\n";
  for (auto it = rows.begin(); it != rows.end(); ++it) {
    out += to_string(it->variant) + "," + format_double(it->dic.d_bar) + "," + format_double(it->dic.p_d) + "," +
           format_double(it->dic.dic) + "," + (it == best ? "1" : "0") + "\n";
  }
  fs::create_directories(config.output_dir);
  write(config.output_dir, kCompareFile, out);
  std::cout << out;
}

void cmd_export_geojson(const GeojsonJob& job) {
  const auto content = text::read_file(job.summary);
  const auto lines = text::lines(content);
  if (lines.empty() || text::trim(lines.front()) != "area,period,disease,median,lo,hi") {
    throw Error(ErrorCode::format, job.summary.string() + ": expected header area,period,disease,median,lo,hi");
  }
  std::map<std::string, std::array<double, 3>> by_area;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto f = text::split(lines[n], ',');
    if (f.size() != 6) throw Error(ErrorCode::format, "summary line " + std::to_string(n + 1) + ": expected 6 fields");
    if (f[1] != job.period || f[2] != job.disease) continue;
    try {
      by_area[std::string(f[0])] = {std::stod(std::string(f[3])), std::stod(std::string(f[4])),
                                    std::stod(std::string(f[5]))};
    } catch (const std::exception&) {
      throw Error(ErrorCode::format, "summary line " + std::to_string(n + 1) + ": bad number");
    }
  }
  if (by_area.empty()) {
    throw Error(ErrorCode::value, "summary has no rows for period '" + job.period + "' and disease '" + job.disease + "'");
  }

  auto doc = read_json(job.geojson);
  if (!doc.is_object() || !doc.contains("features") || !doc.at("features").is_array()) {
    throw Error(ErrorCode::format, job.geojson.string() + ": not a GeoJSON FeatureCollection");
  }
  std::vector<std::string> unmatched;
  for (auto& feature : doc.at("features")) {
    auto& props = feature["properties"];
    std::string label;
    if (props.is_object() && props.contains(job.label_property)) {
      const auto& v = props.at(job.label_property);
      label = v.is_string() ? v.get<std::string>() : v.dump();
    }
    const auto it = by_area.find(label);
    if (it == by_area.end()) {
      unmatched.push_back(label.empty() ? "<feature without " + job.label_property + ">" : label);
      continue;
    }
    props["rr_median"] = it->second[0];
    props["rr_lo"] = it->second[1];
    props["rr_hi"] = it->second[2];
  }
  if (!unmatched.empty()) {
    std::string names;
    for (const auto& u : unmatched) names += (names.empty() ? "" : ", ") + u;
    throw Error(ErrorCode::join, "features with no matching area in the summary: " + names);
  }
  text::write_file(job.out, doc.dump(2) + "\n");
}

void cmd_expected(const fs::path& counts, const fs::path& population, const fs::path& out) {
  const auto table = load_counts(text::read_file(counts));
  const auto pop = load_population(text::read_file(population), table.area_labels, table.period_labels);
  const CancerDataset data(table.counts, compute_expected(pop, table.counts), table.area_labels, table.period_labels,
                           table.disease_labels);
  text::write_file(out, write_counts_csv(data));
}

}  // namespace jointmap::cli
