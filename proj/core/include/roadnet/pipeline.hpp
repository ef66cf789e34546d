#ifndef ROADNET_PIPELINE_HPP
#define ROADNET_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadnet/graph_eval.hpp"
#include "roadnet/graph_extract.hpp"
#include "roadnet/morphology.hpp"
#include "roadnet/socio_stats.hpp"
#include "roadnet/tile_qa.hpp"

namespace roadnet {

struct CountyDef {
  std::string id;
  Region region = Region::kWestern;
  TileRect bbox;
  double area_km2 = 1.0;
};

// Everything a batch run needs. The CLI loads this from one JSON file and
// lets individual flags override keys; the effective copy is embedded in
// the run manifest.
struct PipelineConfig {
  std::filesystem::path tile_root;   // <tile_root>/<year>/<z>/<x>/<y>.png
  std::filesystem::path mask_root;   // optional pre-made masks, same layout
  std::filesystem::path truth_root;  // optional truth_<county>_<year>.geojson
  std::filesystem::path counties_file;
  std::filesystem::path panel_file;  // socioeconomic panel CSV
  std::filesystem::path output_dir = "out";
  int zoom = 17;
  int tile_size = kDefaultTileSize;
  std::vector<int> years{2017, 2021};
  QaThresholds qa;
  MorphParams morph;
  BaselineParams baseline;
  ExtractParams extract;
  SamplingParams sampling;
  int parallelism = 1;
  std::uint64_t seed = 7;
  bool write_intermediate = false;  // also dump mask/skeleton canvases

  void validate() const;  // numeric ranges + referenced paths
};

PipelineConfig config_from_json_text(const std::string& text, const std::string& source = "");
std::string config_to_json_text(const PipelineConfig& config);
PipelineConfig load_config(const std::filesystem::path& file);
void save_config(const std::filesystem::path& file, const PipelineConfig& config);

std::vector<CountyDef> load_counties(const std::filesystem::path& file);
void save_counties(const std::filesystem::path& file, const std::vector<CountyDef>& counties);

// Content digest used by manifests: FNV-1a 64 over the file bytes.
std::string file_digest(const std::filesystem::path& file);

struct StageRecord {
  std::string stage;
  std::string county;
  int year = 0;
  std::vector<std::pair<std::string, std::string>> outputs;  // path, digest
  std::map<std::string, std::string> notes;  // e.g. per-tile mask sources
  double timing_ms = 0.0;
};

struct RunManifest {
  PipelineConfig config;
  std::vector<StageRecord> stages;
  std::map<std::string, std::size_t> qa_tally;  // valid/noisy/cloudy totals

  void add(StageRecord rec) { stages.push_back(std::move(rec)); }
};

void save_manifest(const std::filesystem::path& file, const RunManifest& manifest);

struct QaOutcome {
  std::filesystem::path csv_path;
  std::map<std::string, std::size_t> tally;  // by verdict name
};

// Classifies every tile of the county present on disk for that year and
// writes qa_<county>_<year>.csv. Errors when the tile tree has no tiles.
QaOutcome cmd_qa(const PipelineConfig& config, const CountyDef& county, int year,
                 RunManifest* manifest = nullptr);

enum class MaskSource { kExternal, kBaseline, kInterpolated, kMissing };
const char* to_string(MaskSource s);

struct ExtractOutcome {
  std::filesystem::path geojson_path;
  std::filesystem::path stats_path;
  RoadGraph full_graph;        // with interval nodes
  RoadGraph simplified_graph;  // what the GeoJSON holds
  std::map<std::string, std::string> mask_sources;  // "z/x/y" -> source[:year]
};

// Mask ingestion -> mosaic -> close -> skeletonize -> refine -> extract.
// Tiles failing QA pull their mask from the nearest valid epoch.
ExtractOutcome cmd_extract(const PipelineConfig& config, const CountyDef& county, int year,
                           RunManifest* manifest = nullptr);

struct EvalOutcome {
  std::filesystem::path report_path;
  EvalReport report;
};

EvalOutcome cmd_eval(const PipelineConfig& config, const std::filesystem::path& extracted,
                     const std::filesystem::path& truth, const std::string& county_id,
                     double area_km2, const std::filesystem::path& out_csv,
                     RunManifest* manifest = nullptr);

void write_eval_csv(const std::filesystem::path& file, const EvalReport& report);

// One analysis over the panel CSV: scaling | correlation | deciles |
// growth | did. Writes stats_<analysis>[...].csv and a JSON summary.
struct StatsOutcome {
  std::vector<std::filesystem::path> outputs;
};

StatsOutcome cmd_stats(const PipelineConfig& config, const std::filesystem::path& panel_csv,
                       const std::string& analysis, const std::map<std::string, std::string>& opts,
                       RunManifest* manifest = nullptr);

// Standalone morphology stage: binary mask PNG in, closing + thinning +
// refinement, skeleton PNG out.
void run_morph_file(const PipelineConfig& config, const std::filesystem::path& in_png,
                    const std::filesystem::path& out_png);

// qa + extract (+ eval when truth exists) per county-year, road_stats.csv,
// every stats analysis when a panel is configured, and the manifest.
void run_all(const PipelineConfig& config);

// Deterministic synthetic county (tiles, truth, panel, config) for demos
// and end-to-end tests.
void make_fixture(const std::filesystem::path& dir, std::uint64_t seed);

void write_text_atomic(const std::filesystem::path& file, const std::string& content);

}  // namespace roadnet

#endif
