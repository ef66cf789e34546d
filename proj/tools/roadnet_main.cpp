#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roadnet/errors.hpp"
#include "roadnet/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace roadnet;

constexpr const char* kEvalColumns =
    "county_id,precision,recall,f1,ri_at_k,g_samples,h_samples,matched,g_len_km,h_len_km,"
    "g_density,h_density,rl_ape,rd_ape,recall_class_1..recall_class_10 "
    "(footer row ALL carries the cross-county means; rl_ape/rd_ape there are MRL/MRD)";

struct ConfigCli {
  std::string config_path;
  std::string tile_root, mask_root, truth_root, output_dir, counties_file, panel_file;
  int parallelism = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "pipeline config JSON (or set ROADNET_CONFIG)");
    cmd->add_option("--tile-root", tile_root, "override tile_root");
    cmd->add_option("--mask-root", mask_root, "override mask_root");
    cmd->add_option("--truth-root", truth_root, "override truth_root");
    cmd->add_option("--output-dir", output_dir, "override output_dir");
    cmd->add_option("--counties", counties_file, "override counties_file");
    cmd->add_option("--panel", panel_file, "override panel_file");
    cmd->add_option("--parallelism", parallelism, "override parallelism");
  }

  PipelineConfig resolve() const {
    PipelineConfig config;
    std::string path = config_path;
    if (path.empty())
      if (const char* env = std::getenv("ROADNET_CONFIG")) path = env;
    if (!path.empty()) config = load_config(path);
    if (!tile_root.empty()) config.tile_root = tile_root;
    if (!mask_root.empty()) config.mask_root = mask_root;
    if (!truth_root.empty()) config.truth_root = truth_root;
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (!counties_file.empty()) config.counties_file = counties_file;
    if (!panel_file.empty()) config.panel_file = panel_file;
    if (parallelism > 0) config.parallelism = parallelism;
    return config;
  }
};

CountyDef find_county(const PipelineConfig& config, const std::string& id) {
  if (config.counties_file.empty())
    throw UsageError("a counties file is required (config key counties_file or --counties)");
  for (const CountyDef& c : load_counties(config.counties_file))
    if (c.id == id) return c;
  throw DataError("county '" + id + "' not found in " + config.counties_file.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"road network extraction and evaluation toolkit"};
  app.require_subcommand(1);

  ConfigCli cfg;
  std::string county_id, analysis, extracted, truth, out_file, fixture_dir;
  std::string indicator, metric, outcome;
  int year = 0, pre_year = 0, post_year = 0;
  double area = 0.0;
  bool log_outcome = false;
  std::uint64_t seed = 7;

  auto* qa = app.add_subcommand("qa", "screen a county's tiles for noise and cloud cover");
  cfg.attach(qa);
  qa->add_option("--county", county_id, "county id")->required();
  qa->add_option("--year", year, "epoch year")->required();

  auto* extract = app.add_subcommand(
      "extract", "build the county road graph: masks -> morphology -> combustion");
  cfg.attach(extract);
  extract->add_option("--county", county_id, "county id")->required();
  extract->add_option("--year", year, "epoch year")->required();

  auto* eval = app.add_subcommand(
      "eval", std::string("score an extracted graph against ground truth; report columns: ") +
                  kEvalColumns);
  cfg.attach(eval);
  eval->add_option("--extracted", extracted, "extracted road graph GeoJSON")->required();
  eval->add_option("--truth", truth, "ground-truth road graph GeoJSON")->required();
  eval->add_option("--county", county_id, "county id (for area lookup and labeling)");
  eval->add_option("--area", area, "county area in km^2 (overrides the counties file)");
  eval->add_option("--out", out_file, "report path (default <output_dir>/eval_report.csv)");

  std::string road_stats, morph_in, morph_out;
  auto* stats = app.add_subcommand("stats",
                                   "panel analyses: scaling | correlation | deciles | growth | did");
  cfg.attach(stats);
  stats->add_option("--analysis", analysis, "which analysis to run")->required();
  stats->add_option("--indicator", indicator, "correlation indicator (population|gdp|sse|balance)");
  stats->add_option("--metric", metric, "did group metric (arl|rrl|rrpc)");
  stats->add_option("--outcome", outcome, "did outcome (gdp|sse|balance)");
  stats->add_option("--pre-year", pre_year, "first epoch (default: earliest in panel)");
  stats->add_option("--post-year", post_year, "second epoch (default: latest in panel)");
  stats->add_flag("--log", log_outcome, "estimate DiD on log outcomes");
  stats->add_option("--road-stats", road_stats,
                    "join road lengths from an extract sidecar CSV by (county_id, year)");

  auto* morph = app.add_subcommand("morph",
                                   "run closing + thinning + refinement on one mask PNG");
  cfg.attach(morph);
  morph->add_option("--in", morph_in, "binary mask PNG")->required();
  morph->add_option("--out", morph_out, "skeleton PNG to write")->required();

  auto* runall = app.add_subcommand("run-all", "qa + extract (+ eval, + stats) for every county and year");
  cfg.attach(runall);

  auto* fixture = app.add_subcommand("make-fixture",
                                     "write a synthetic county (tiles, truth, panel, config)");
  fixture->add_option("--out", fixture_dir, "fixture directory")->required();
  fixture->add_option("--seed", seed, "rng seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (qa->parsed()) {
      const PipelineConfig config = cfg.resolve();
      const QaOutcome out = cmd_qa(config, find_county(config, county_id), year);
      std::cout << "wrote " << out.csv_path.string() << "\n";
      for (const auto& [verdict, count] : out.tally)
        std::cout << "  " << verdict << "=" << count << "\n";
    } else if (extract->parsed()) {
      const PipelineConfig config = cfg.resolve();
      const ExtractOutcome out = cmd_extract(config, find_county(config, county_id), year);
      std::cout << "wrote " << out.geojson_path.string() << " ("
                << out.simplified_graph.edges.size() << " edges) and " << out.stats_path.string()
                << "\n";
    } else if (eval->parsed()) {
      const PipelineConfig config = cfg.resolve();
      double area_km2 = area;
      std::string label = county_id.empty() ? "county" : county_id;
      if (area_km2 <= 0.0 && !county_id.empty())
        area_km2 = find_county(config, county_id).area_km2;
      if (area_km2 <= 0.0)
        throw UsageError("eval needs --area or --county to resolve the county area");
      const fs::path report =
          out_file.empty() ? config.output_dir / "eval_report.csv" : fs::path(out_file);
      const EvalOutcome out = cmd_eval(config, extracted, truth, label, area_km2, report);
      std::cout << "wrote " << out.report_path.string() << "\n";
      const CountyEval& c = out.report.counties.front();
      std::cout << "  precision=" << c.scores.precision << " recall=" << c.scores.recall
                << " f1=" << c.scores.f1 << "\n";
    } else if (stats->parsed()) {
      const PipelineConfig config = cfg.resolve();
      if (config.panel_file.empty())
        throw UsageError("stats needs a panel CSV (config key panel_file or --panel)");
      std::map<std::string, std::string> opts;
      if (!indicator.empty()) opts["indicator"] = indicator;
      if (!metric.empty()) opts["metric"] = metric;
      if (!outcome.empty()) opts["outcome"] = outcome;
      if (pre_year > 0) opts["pre_year"] = std::to_string(pre_year);
      if (post_year > 0) opts["post_year"] = std::to_string(post_year);
      if (log_outcome) opts["log"] = "true";
      if (!road_stats.empty()) opts["road_stats"] = road_stats;
      const StatsOutcome out = cmd_stats(config, config.panel_file, analysis, opts);
      for (const fs::path& p : out.outputs) std::cout << "wrote " << p.string() << "\n";
    } else if (morph->parsed()) {
      const PipelineConfig config = cfg.resolve();
      run_morph_file(config, morph_in, morph_out);
      std::cout << "wrote " << morph_out << "\n";
    } else if (runall->parsed()) {
      const PipelineConfig config = cfg.resolve();
      run_all(config);
      std::cout << "wrote " << (config.output_dir / "run_manifest.json").string() << "\n";
    } else if (fixture->parsed()) {
      make_fixture(fixture_dir, seed);
      std::cout << "fixture at " << fixture_dir << " (config.json inside)\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
