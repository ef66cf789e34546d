#include "roadnet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "roadnet/errors.hpp"
#include "roadnet/geojson.hpp"
#include "roadnet/png_io.hpp"

namespace roadnet {

using nlohmann::json;

namespace {

std::string fmt(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// Bounded worker pool; results land by index so callers stay deterministic.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn) {
  const int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

void PipelineConfig::validate() const {
  if (zoom < 0 || zoom > 22) throw InvariantError("config: zoom out of range");
  if (tile_size < 16) throw InvariantError("config: tile_size too small");
  if (years.empty()) throw InvariantError("config: years must not be empty");
  if (!(qa.var_lap_max > 0.0)) throw InvariantError("config: qa.var_lap_max must be positive");
  if (!(qa.mean_int_max > 0.0 && qa.mean_int_max < 1.0))
    throw InvariantError("config: qa.mean_int_max must be in (0,1)");
  if (morph.kernel_size < 1 || morph.kernel_size % 2 == 0)
    throw InvariantError("config: morph.kernel_size must be odd and >= 1");
  if (morph.refine_min_len < 1)
    throw InvariantError("config: morph.refine_min_len must be >= 1");
  if (extract.node_interval < 1)
    throw InvariantError("config: extract.node_interval must be >= 1");
  if (!(sampling.sample_interval > 0.0))
    throw InvariantError("config: sampling.sample_interval must be positive");
  if (!(sampling.max_match_dist > 0.0))
    throw InvariantError("config: sampling.max_match_dist must be positive");
  if (sampling.k < 3) throw InvariantError("config: sampling.k must be >= 3");
  if (parallelism < 1) throw InvariantError("config: parallelism must be >= 1");
  for (const auto& [name, path] :
       std::initializer_list<std::pair<const char*, const std::filesystem::path&>>{
           {"tile_root", tile_root},
           {"mask_root", mask_root},
           {"truth_root", truth_root},
           {"counties_file", counties_file},
           {"panel_file", panel_file}}) {
    if (!path.empty() && !std::filesystem::exists(path))
      throw DataError("config: " + std::string(name) + " does not exist: " + path.string());
  }
}

namespace {

json config_to_json(const PipelineConfig& c) {
  return json{
      {"tile_root", c.tile_root.string()},
      {"mask_root", c.mask_root.string()},
      {"truth_root", c.truth_root.string()},
      {"counties_file", c.counties_file.string()},
      {"panel_file", c.panel_file.string()},
      {"output_dir", c.output_dir.string()},
      {"zoom", c.zoom},
      {"tile_size", c.tile_size},
      {"years", c.years},
      {"qa", json{{"var_lap_max", c.qa.var_lap_max}, {"mean_int_max", c.qa.mean_int_max}}},
      {"morph",
       json{{"kernel_size", c.morph.kernel_size}, {"refine_min_len", c.morph.refine_min_len}}},
      {"baseline", json{{"gray_min", c.baseline.gray_min},
                        {"gray_max", c.baseline.gray_max},
                        {"contrast_max", c.baseline.contrast_max}}},
      {"extract", json{{"node_interval", c.extract.node_interval}}},
      {"sampling", json{{"sample_interval", c.sampling.sample_interval},
                        {"max_match_dist", c.sampling.max_match_dist},
                        {"k", c.sampling.k},
                        {"haversine", c.sampling.haversine},
                        {"optimal_matching", c.sampling.optimal_matching}}},
      {"parallelism", c.parallelism},
      {"seed", c.seed},
      {"write_intermediate", c.write_intermediate}};
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void maybe_path(const json& j, const char* key, std::filesystem::path& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

}  // namespace

PipelineConfig config_from_json_text(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError((source.empty() ? "config" : source) + ": " + e.what());
  }
  PipelineConfig c;
  maybe_path(j, "tile_root", c.tile_root);
  maybe_path(j, "mask_root", c.mask_root);
  maybe_path(j, "truth_root", c.truth_root);
  maybe_path(j, "counties_file", c.counties_file);
  maybe_path(j, "panel_file", c.panel_file);
  maybe_path(j, "output_dir", c.output_dir);
  maybe(j, "zoom", c.zoom);
  maybe(j, "tile_size", c.tile_size);
  maybe(j, "years", c.years);
  if (j.contains("qa")) {
    maybe(j["qa"], "var_lap_max", c.qa.var_lap_max);
    maybe(j["qa"], "mean_int_max", c.qa.mean_int_max);
  }
  if (j.contains("morph")) {
    maybe(j["morph"], "kernel_size", c.morph.kernel_size);
    maybe(j["morph"], "refine_min_len", c.morph.refine_min_len);
  }
  if (j.contains("baseline")) {
    maybe(j["baseline"], "gray_min", c.baseline.gray_min);
    maybe(j["baseline"], "gray_max", c.baseline.gray_max);
    maybe(j["baseline"], "contrast_max", c.baseline.contrast_max);
  }
  if (j.contains("extract")) maybe(j["extract"], "node_interval", c.extract.node_interval);
  if (j.contains("sampling")) {
    maybe(j["sampling"], "sample_interval", c.sampling.sample_interval);
    maybe(j["sampling"], "max_match_dist", c.sampling.max_match_dist);
    maybe(j["sampling"], "k", c.sampling.k);
    maybe(j["sampling"], "haversine", c.sampling.haversine);
    maybe(j["sampling"], "optimal_matching", c.sampling.optimal_matching);
  }
  maybe(j, "parallelism", c.parallelism);
  maybe(j, "seed", c.seed);
  maybe(j, "write_intermediate", c.write_intermediate);
  return c;
}

std::string config_to_json_text(const PipelineConfig& config) {
  return config_to_json(config).dump(2) + "\n";
}

PipelineConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(file.string() + ": cannot open config");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json_text(text, file.string());
}

void save_config(const std::filesystem::path& file, const PipelineConfig& config) {
  write_text_atomic(file, config_to_json_text(config));
}

std::vector<CountyDef> load_counties(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(file.string() + ": cannot open counties file");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw DataError(file.string() + ": " + e.what());
  }
  if (!j.contains("counties") || !j["counties"].is_array())
    throw DataError(file.string() + ": expected top-level 'counties' array");
  std::vector<CountyDef> out;
  for (const json& c : j["counties"]) {
    CountyDef d;
    d.id = c.at("id").get<std::string>();
    d.region = region_from_string(c.value("region", "western"));
    const json& b = c.at("bbox");
    d.bbox.x = b.at("x").get<int>();
    d.bbox.y = b.at("y").get<int>();
    d.bbox.w = b.at("w").get<int>();
    d.bbox.h = b.at("h").get<int>();
    d.bbox.z = b.value("z", 17);
    d.area_km2 = c.at("area_km2").get<double>();
    if (d.bbox.w <= 0 || d.bbox.h <= 0)
      throw DataError(file.string() + ": county " + d.id + " has an empty bbox");
    if (!(d.area_km2 > 0.0))
      throw DataError(file.string() + ": county " + d.id + " needs a positive area");
    out.push_back(std::move(d));
  }
  return out;
}

void save_counties(const std::filesystem::path& file, const std::vector<CountyDef>& counties) {
  json arr = json::array();
  for (const CountyDef& c : counties)
    arr.push_back(json{{"id", c.id},
                       {"region", to_string(c.region)},
                       {"bbox", json{{"x", c.bbox.x},
                                     {"y", c.bbox.y},
                                     {"w", c.bbox.w},
                                     {"h", c.bbox.h},
                                     {"z", c.bbox.z}}},
                       {"area_km2", c.area_km2}});
  write_text_atomic(file, json{{"counties", arr}}.dump(2) + "\n");
}

std::string file_digest(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError(file.string() + ": cannot open for digest");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[32];
  std::snprintf(hex, sizeof hex, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void save_manifest(const std::filesystem::path& file, const RunManifest& manifest) {
  json stages = json::array();
  for (const StageRecord& s : manifest.stages) {
    json outputs = json::array();
    for (const auto& [path, digest] : s.outputs)
      outputs.push_back(json{{"path", path}, {"digest", digest}});
    stages.push_back(json{{"stage", s.stage},
                          {"county", s.county},
                          {"year", s.year},
                          {"outputs", outputs},
                          {"notes", s.notes},
                          {"timing_ms", s.timing_ms}});
  }
  json root{{"config", config_to_json(manifest.config)},
            {"qa_tally", manifest.qa_tally},
            {"stages", stages}};
  write_text_atomic(file, root.dump(2) + "\n");
}

void write_text_atomic(const std::filesystem::path& file, const std::string& content) {
  if (!file.parent_path().empty()) std::filesystem::create_directories(file.parent_path());
  const std::filesystem::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError(tmp.string() + ": cannot open for writing");
    out << content;
  }
  std::filesystem::rename(tmp, file);
}

namespace {

std::filesystem::path tile_path(const std::filesystem::path& root, int year, const TileCoord& c) {
  return root / std::to_string(year) / std::to_string(c.z) / std::to_string(c.x) /
         (std::to_string(c.y) + ".png");
}

std::string tile_key(const TileCoord& c) {
  return std::to_string(c.z) + "/" + std::to_string(c.x) + "/" + std::to_string(c.y);
}

std::vector<TileCoord> county_tiles(const CountyDef& county) {
  std::vector<TileCoord> out;
  for (int ty = county.bbox.y; ty < county.bbox.y + county.bbox.h; ++ty)
    for (int tx = county.bbox.x; tx < county.bbox.x + county.bbox.w; ++tx)
      out.push_back({tx, ty, county.bbox.z});
  return out;
}

}  // namespace

const char* to_string(MaskSource s) {
  switch (s) {
    case MaskSource::kExternal: return "external";
    case MaskSource::kBaseline: return "baseline";
    case MaskSource::kInterpolated: return "interpolated";
    case MaskSource::kMissing: return "missing";
  }
  return "?";
}

QaOutcome cmd_qa(const PipelineConfig& config, const CountyDef& county, int year,
                 RunManifest* manifest) {
  const auto start = std::chrono::steady_clock::now();
  if (!std::filesystem::is_directory(config.tile_root))
    throw DataError("tile root does not exist: " + config.tile_root.string());

  const std::vector<TileCoord> tiles = county_tiles(county);
  struct Row {
    TileCoord coord;
    TileStatus status;
    bool present = false;
  };
  std::vector<Row> rows(tiles.size());
  parallel_for(tiles.size(), config.parallelism, [&](std::size_t i) {
    const std::filesystem::path path = tile_path(config.tile_root, year, tiles[i]);
    rows[i].coord = tiles[i];
    if (!std::filesystem::exists(path)) return;
    rows[i].present = true;
    rows[i].status = classify_tile(read_tile_png(path, tiles[i]), config.qa);
  });

  QaOutcome out;
  out.tally = {{"valid", 0}, {"noisy", 0}, {"cloudy", 0}};
  std::string csv = "tile_z,tile_x,tile_y,year,var_lap,mean_r,mean_g,mean_b,verdict\n";
  std::size_t present = 0;
  for (const Row& r : rows) {
    if (!r.present) continue;
    ++present;
    ++out.tally[to_string(r.status.verdict)];
    csv += std::to_string(r.coord.z) + "," + std::to_string(r.coord.x) + "," +
           std::to_string(r.coord.y) + "," + std::to_string(year) + "," + fmt(r.status.var_lap) +
           "," + fmt(r.status.mean_int[0]) + "," + fmt(r.status.mean_int[1]) + "," +
           fmt(r.status.mean_int[2]) + "," + to_string(r.status.verdict) + "\n";
  }
  if (present == 0)
    throw DataError("no tiles found for county " + county.id + " year " + std::to_string(year) +
                    " under " + config.tile_root.string());

  out.csv_path = config.output_dir / ("qa_" + county.id + "_" + std::to_string(year) + ".csv");
  write_text_atomic(out.csv_path, csv);

  if (manifest) {
    StageRecord rec;
    rec.stage = "qa";
    rec.county = county.id;
    rec.year = year;
    rec.outputs.push_back({out.csv_path.string(), file_digest(out.csv_path)});
    for (const auto& [verdict, count] : out.tally) {
      rec.notes["tally_" + verdict] = std::to_string(count);
      manifest->qa_tally[verdict] += count;
    }
    rec.timing_ms = elapsed_ms(start);
    manifest->add(rec);
  }
  return out;
}

namespace {

struct ResolvedMask {
  MaskSource source = MaskSource::kMissing;
  int year = 0;
};

// external mask > QA-valid imagery, at the tile's own epoch first, then
// the nearest other epoch (ties to the earlier year).
ResolvedMask resolve_mask(const PipelineConfig& config, const TileCoord& coord, int target_year) {
  std::map<int, TileVerdict> series;
  for (int year : config.years) {
    if (!config.mask_root.empty() &&
        std::filesystem::exists(tile_path(config.mask_root, year, coord))) {
      series[year] = TileVerdict::kValid;
      continue;
    }
    const std::filesystem::path img = tile_path(config.tile_root, year, coord);
    if (!std::filesystem::exists(img)) continue;
    series[year] = classify_tile(read_tile_png(img, coord), config.qa).verdict;
  }
  if (series.empty()) return {MaskSource::kMissing, 0};
  const SubstitutionPlan plan = interpolate_missing(series);
  if (plan.permanently_missing) return {MaskSource::kMissing, 0};

  int source_year;
  auto it = plan.source_year.find(target_year);
  if (it != plan.source_year.end()) {
    source_year = it->second;
  } else {
    // target epoch has no file at all: fall back to the nearest valid one
    source_year = -1;
    for (const auto& [y, src] : plan.source_year) {
      if (src != y) continue;  // substituted epochs are not donors
      if (source_year < 0 || std::abs(y - target_year) < std::abs(source_year - target_year) ||
          (std::abs(y - target_year) == std::abs(source_year - target_year) && y < source_year))
        source_year = y;
    }
    if (source_year < 0) return {MaskSource::kMissing, 0};
  }

  ResolvedMask r;
  r.year = source_year;
  if (!config.mask_root.empty() &&
      std::filesystem::exists(tile_path(config.mask_root, source_year, coord)))
    r.source = source_year == target_year ? MaskSource::kExternal : MaskSource::kInterpolated;
  else
    r.source = source_year == target_year ? MaskSource::kBaseline : MaskSource::kInterpolated;
  return r;
}

MaskTile load_mask_tile(const PipelineConfig& config, const TileCoord& coord,
                        const ResolvedMask& r) {
  const std::filesystem::path mask_file =
      config.mask_root.empty() ? std::filesystem::path{}
                               : tile_path(config.mask_root, r.year, coord);
  MaskTile t;
  t.coord = coord;
  if (!mask_file.empty() && std::filesystem::exists(mask_file)) {
    const BitCanvas c = read_canvas_png(mask_file, coord);
    if (c.width != config.tile_size || c.height != config.tile_size)
      throw DataError(mask_file.string() + ": mask must be " + std::to_string(config.tile_size) +
                      "px square");
    t.bits = c.bits;
    return t;
  }
  const TileImage img = read_tile_png(tile_path(config.tile_root, r.year, coord), coord);
  if (img.width != config.tile_size || img.height != config.tile_size)
    throw DataError("tile " + tile_key(coord) + ": expected " + std::to_string(config.tile_size) +
                    "px square");
  t.bits = baseline_segment(img, config.baseline);
  return t;
}

}  // namespace

ExtractOutcome cmd_extract(const PipelineConfig& config, const CountyDef& county, int year,
                           RunManifest* manifest) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<TileCoord> tiles = county_tiles(county);

  std::vector<ResolvedMask> resolved(tiles.size());
  std::vector<MaskTile> masks(tiles.size());
  parallel_for(tiles.size(), config.parallelism, [&](std::size_t i) {
    resolved[i] = resolve_mask(config, tiles[i], year);
    if (resolved[i].source != MaskSource::kMissing)
      masks[i] = load_mask_tile(config, tiles[i], resolved[i]);
  });

  ExtractOutcome out;
  std::vector<MaskTile> usable;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    std::string note = to_string(resolved[i].source);
    if (resolved[i].source == MaskSource::kInterpolated)
      note += ":" + std::to_string(resolved[i].year);
    out.mask_sources[tile_key(tiles[i])] = note;
    if (resolved[i].source != MaskSource::kMissing) usable.push_back(std::move(masks[i]));
  }
  if (usable.empty())
    throw DataError("no usable masks for county " + county.id + " year " + std::to_string(year));

  BitCanvas canvas = mosaic(usable, county.bbox, config.tile_size);
  canvas = close(canvas, config.morph);
  canvas = skeletonize(canvas);
  canvas = refine(canvas, config.morph);

  std::filesystem::path skeleton_png;
  if (config.write_intermediate) {
    skeleton_png =
        config.output_dir / ("skeleton_" + county.id + "_" + std::to_string(year) + ".png");
    std::filesystem::create_directories(config.output_dir);
    write_canvas_png(skeleton_png, canvas);
  }

  out.full_graph = extract_graph(canvas, config.extract, config.tile_size);
  out.simplified_graph = simplify_to_segments(out.full_graph);

  const std::string stem = county.id + "_" + std::to_string(year);
  out.geojson_path = config.output_dir / ("graph_" + stem + ".geojson");
  write_text_atomic(out.geojson_path, road_graph_to_geojson(out.simplified_graph));

  const double len_km = total_length_km(out.full_graph);
  std::string csv = "county_id,year,total_length_km,density_km_per_km2,node_count,edge_count\n";
  csv += county.id + "," + std::to_string(year) + "," + fmt(len_km) + "," +
         fmt(len_km / county.area_km2) + "," + std::to_string(out.full_graph.nodes.size()) + "," +
         std::to_string(out.full_graph.edges.size()) + "\n";
  out.stats_path = config.output_dir / ("stats_" + stem + ".csv");
  write_text_atomic(out.stats_path, csv);

  if (manifest) {
    StageRecord rec;
    rec.stage = "extract";
    rec.county = county.id;
    rec.year = year;
    rec.outputs.push_back({out.geojson_path.string(), file_digest(out.geojson_path)});
    rec.outputs.push_back({out.stats_path.string(), file_digest(out.stats_path)});
    if (!skeleton_png.empty())
      rec.outputs.push_back({skeleton_png.string(), file_digest(skeleton_png)});
    rec.notes = out.mask_sources;
    rec.timing_ms = elapsed_ms(start);
    manifest->add(rec);
  }
  return out;
}

void write_eval_csv(const std::filesystem::path& file, const EvalReport& report) {
  std::string csv =
      "county_id,precision,recall,f1,ri_at_k,g_samples,h_samples,matched,"
      "g_len_km,h_len_km,g_density,h_density,rl_ape,rd_ape";
  for (int c = 1; c <= 10; ++c) csv += ",recall_class_" + std::to_string(c);
  csv += "\n";
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  for (const CountyEval& c : report.counties) {
    const double gd = c.g_len_km / c.area_km2, hd = c.h_len_km / c.area_km2;
    const double rl_ape = c.g_len_km > 0.0 ? std::abs(c.g_len_km - c.h_len_km) / c.g_len_km : 0.0;
    const double rd_ape = gd > 0.0 ? std::abs(gd - hd) / gd : 0.0;
    csv += c.county_id + "," + fmt(c.scores.precision) + "," + fmt(c.scores.recall) + "," +
           fmt(c.scores.f1) + "," + opt(c.ri) + "," + std::to_string(c.g_samples) + "," +
           std::to_string(c.h_samples) + "," + std::to_string(c.matched) + "," + fmt(c.g_len_km) +
           "," + fmt(c.h_len_km) + "," + fmt(gd) + "," + fmt(hd) + "," + fmt(rl_ape) + "," +
           fmt(rd_ape);
    for (int cls = 0; cls < 10; ++cls) csv += "," + opt(c.class_recall[cls]);
    csv += "\n";
  }
  // aggregate footer: means of the rates, MAPE over lengths and densities
  csv += "ALL," + fmt(report.mean_precision) + "," + fmt(report.mean_recall) + "," +
         fmt(report.mean_f1) + "," + (report.mean_ri ? fmt(*report.mean_ri) : std::string()) +
         ",,,,,,,," + fmt(report.mrl) + "," + fmt(report.mrd);
  for (int cls = 0; cls < 10; ++cls) csv += ",";
  csv += "\n";
  write_text_atomic(file, csv);
}

EvalOutcome cmd_eval(const PipelineConfig& config, const std::filesystem::path& extracted,
                     const std::filesystem::path& truth, const std::string& county_id,
                     double area_km2, const std::filesystem::path& out_csv,
                     RunManifest* manifest) {
  const auto start = std::chrono::steady_clock::now();
  const RoadGraph h = read_road_graph(extracted);
  const RoadGraph g = read_road_graph(truth);

  bool with_classes = !g.edges.empty();
  for (const auto& e : g.edges)
    if (e.cls == 0) with_classes = false;

  CountyEval county =
      evaluate_county(county_id, g, h, area_km2, config.sampling, with_classes);
  EvalOutcome out;
  out.report = aggregate_report({std::move(county)});
  out.report_path = out_csv;
  write_eval_csv(out.report_path, out.report);

  if (manifest) {
    StageRecord rec;
    rec.stage = "eval";
    rec.county = county_id;
    rec.outputs.push_back({out.report_path.string(), file_digest(out.report_path)});
    rec.timing_ms = elapsed_ms(start);
    manifest->add(rec);
  }
  return out;
}

namespace {

std::vector<CountyRecord> panel_year(const std::vector<CountyRecord>& panel, int year) {
  std::vector<CountyRecord> out;
  for (const CountyRecord& r : panel)
    if (r.year == year) out.push_back(r);
  return out;
}

std::string region_scope(Region r) { return to_string(r); }

void append_output(StatsOutcome& out, RunManifest* manifest, StageRecord& rec,
                   const std::filesystem::path& path) {
  out.outputs.push_back(path);
  if (manifest) rec.outputs.push_back({path.string(), file_digest(path)});
}

}  // namespace

namespace {

// Joins road lengths from an extract sidecar CSV onto the panel rows,
// matching on (county_id, year).
void join_road_stats(std::vector<CountyRecord>& panel, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(file.string() + ": cannot open road stats CSV");
  std::string line;
  if (!std::getline(in, line)) throw DataError(file.string() + ": empty road stats CSV");
  std::map<std::pair<std::string, int>, double> lengths;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, year_s, len_s;
    if (!std::getline(ss, id, ',') || !std::getline(ss, year_s, ',') ||
        !std::getline(ss, len_s, ','))
      throw DataError(file.string() + ": malformed row '" + line + "'");
    lengths[{id, std::stoi(year_s)}] = std::stod(len_s);
  }
  for (CountyRecord& r : panel) {
    auto it = lengths.find({r.county_id, r.year});
    if (it != lengths.end()) r.road_length_km = it->second;
  }
}

}  // namespace

StatsOutcome cmd_stats(const PipelineConfig& config, const std::filesystem::path& panel_csv,
                       const std::string& analysis, const std::map<std::string, std::string>& opts,
                       RunManifest* manifest) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<CountyRecord> panel = read_county_panel(panel_csv);
  if (auto it = opts.find("road_stats"); it != opts.end()) join_road_stats(panel, it->second);
  std::set<int> years;
  for (const CountyRecord& r : panel) years.insert(r.year);

  auto opt_int = [&](const char* key, int fallback) {
    auto it = opts.find(key);
    return it == opts.end() ? fallback : std::stoi(it->second);
  };
  const int pre_year = opt_int("pre_year", years.empty() ? 0 : *years.begin());
  const int post_year = opt_int("post_year", years.empty() ? 0 : *years.rbegin());

  StatsOutcome out;
  StageRecord rec;
  rec.stage = "stats";
  rec.notes["analysis"] = analysis;
  std::filesystem::create_directories(config.output_dir);

  if (analysis == "scaling") {
    std::string csv = "year,scope,n,c,z,r2\n";
    json summary = json::array();
    for (int year : years) {
      const std::vector<CountyRecord> rows = panel_year(panel, year);
      std::vector<std::pair<std::string, std::vector<CountyRecord>>> scopes{{"all", rows}};
      for (Region reg : {Region::kWestern, Region::kCentral, Region::kEastern,
                         Region::kNortheastern}) {
        std::vector<CountyRecord> sub;
        for (const CountyRecord& r : rows)
          if (r.region == reg) sub.push_back(r);
        if (sub.size() >= 3) scopes.push_back({region_scope(reg), std::move(sub)});
      }
      for (const auto& [scope, records] : scopes) {
        const PowerLawFit fit = fit_scaling_law(records);
        csv += std::to_string(year) + "," + scope + "," + std::to_string(records.size()) + "," +
               fmt(fit.c) + "," + fmt(fit.z) + "," + fmt(fit.r2) + "\n";
        summary.push_back(json{{"year", year},
                               {"scope", scope},
                               {"n", records.size()},
                               {"c", fit.c},
                               {"z", fit.z},
                               {"r2", fit.r2},
                               {"rejected", fit.rejected}});
      }
    }
    const auto csv_path = config.output_dir / "stats_scaling.csv";
    const auto json_path = config.output_dir / "stats_scaling.json";
    write_text_atomic(csv_path, csv);
    write_text_atomic(json_path, summary.dump(2) + "\n");
    append_output(out, manifest, rec, csv_path);
    append_output(out, manifest, rec, json_path);
  } else if (analysis == "correlation") {
    std::string csv = "year,indicator,slope,intercept,r2\n";
    json summary = json::array();
    std::vector<Indicator> indicators;
    auto it = opts.find("indicator");
    if (it != opts.end())
      indicators.push_back(indicator_from_string(it->second));
    else
      indicators = {Indicator::kPopulation, Indicator::kGdp, Indicator::kSse,
                    Indicator::kBalance};
    for (int year : years)
      for (Indicator ind : indicators) {
        const LinearFit fit = correlate(panel_year(panel, year), ind);
        csv += std::to_string(year) + "," + to_string(ind) + "," + fmt(fit.slope) + "," +
               fmt(fit.intercept) + "," + fmt(fit.r2) + "\n";
        summary.push_back(json{{"year", year},
                               {"indicator", to_string(ind)},
                               {"slope", fit.slope},
                               {"intercept", fit.intercept},
                               {"r2", fit.r2}});
      }
    const auto csv_path = config.output_dir / "stats_correlation.csv";
    const auto json_path = config.output_dir / "stats_correlation.json";
    write_text_atomic(csv_path, csv);
    write_text_atomic(json_path, summary.dump(2) + "\n");
    append_output(out, manifest, rec, csv_path);
    append_output(out, manifest, rec, json_path);
  } else if (analysis == "deciles") {
    std::string csv = "year,decile,n,mean_rl_km,mean_rpc_m_per_person\n";
    for (int year : years) {
      for (const DecileRow& row : decile_summary(panel_year(panel, year)))
        csv += std::to_string(year) + "," + std::to_string(row.decile) + "," +
               std::to_string(row.count) + "," + fmt(row.mean_rl_km) + "," + fmt(row.mean_rpc) +
               "\n";
    }
    const auto csv_path = config.output_dir / "stats_deciles.csv";
    write_text_atomic(csv_path, csv);
    append_output(out, manifest, rec, csv_path);
  } else if (analysis == "growth") {
    const RegionalGrowthResult rg =
        regional_growth(panel_year(panel, pre_year), panel_year(panel, post_year));
    std::string csv = "region,n,mean_rl_growth,mean_rpc_growth\n";
    for (const RegionGrowth& g : rg.regions)
      csv += std::string(to_string(g.region)) + "," + std::to_string(g.count) + "," +
             fmt(g.mean_rl_growth) + "," + fmt(g.mean_rpc_growth) + "\n";
    const auto csv_path = config.output_dir / "stats_growth.csv";
    write_text_atomic(csv_path, csv);
    append_output(out, manifest, rec, csv_path);
    for (const std::string& id : rg.skipped) rec.notes["skipped_" + id] = "missing epoch";
  } else if (analysis == "did") {
    std::vector<DidMetric> metrics;
    auto mit = opts.find("metric");
    if (mit != opts.end())
      metrics.push_back(did_metric_from_string(mit->second));
    else
      metrics = {DidMetric::kArl, DidMetric::kRrl, DidMetric::kRrpc};
    std::vector<Outcome> outcomes;
    auto oit = opts.find("outcome");
    if (oit != opts.end())
      outcomes.push_back(outcome_from_string(oit->second));
    else
      outcomes = {Outcome::kGdp, Outcome::kSse, Outcome::kBalance};
    const bool log_outcome = opts.count("log") && opts.at("log") == "true";

    const std::vector<CountyRecord> pre = panel_year(panel, pre_year);
    const std::vector<CountyRecord> post = panel_year(panel, post_year);
    std::string csv = "metric,outcome,beta,n_control,n_treatment,n_excluded,residual_ss\n";
    json summary = json::array();
    for (DidMetric metric : metrics) {
      DidSpec spec;
      spec.metric = metric;
      spec.pre_year = pre_year;
      spec.post_year = post_year;
      const GroupDivision groups = divide_groups(pre, post, spec);
      for (Outcome outcome : outcomes) {
        const DidResult res = did_estimate(pre, post, groups, outcome, log_outcome);
        csv += std::string(to_string(metric)) + "," + to_string(outcome) + "," + fmt(res.beta) +
               "," + std::to_string(groups.control.size()) + "," +
               std::to_string(groups.treatment.size()) + "," +
               std::to_string(groups.excluded.size()) + "," + fmt(res.residual_ss) + "\n";
        summary.push_back(json{{"metric", to_string(metric)},
                               {"outcome", to_string(outcome)},
                               {"beta", res.beta},
                               {"beta_closed_form", res.beta_closed_form},
                               {"n_control", groups.control.size()},
                               {"n_treatment", groups.treatment.size()},
                               {"excluded", groups.excluded},
                               {"log_outcome", log_outcome}});
      }
    }
    const auto csv_path = config.output_dir / "stats_did.csv";
    const auto json_path = config.output_dir / "stats_did.json";
    write_text_atomic(csv_path, csv);
    write_text_atomic(json_path, summary.dump(2) + "\n");
    append_output(out, manifest, rec, csv_path);
    append_output(out, manifest, rec, json_path);
  } else {
    throw UsageError("unknown analysis '" + analysis +
                     "' (expected scaling|correlation|deciles|growth|did)");
  }

  if (manifest) {
    rec.timing_ms = elapsed_ms(start);
    manifest->add(rec);
  }
  return out;
}

void run_morph_file(const PipelineConfig& config, const std::filesystem::path& in_png,
                    const std::filesystem::path& out_png) {
  BitCanvas canvas = read_canvas_png(in_png, TileCoord{0, 0, config.zoom});
  canvas = close(canvas, config.morph);
  canvas = skeletonize(canvas);
  canvas = refine(canvas, config.morph);
  write_canvas_png(out_png, canvas);
}

void run_all(const PipelineConfig& config) {
  config.validate();
  if (config.counties_file.empty())
    throw DataError("run-all requires a counties file in the config");
  const std::vector<CountyDef> counties = load_counties(config.counties_file);
  if (counties.empty()) throw DataError("counties file lists no counties");
  std::filesystem::create_directories(config.output_dir);

  RunManifest manifest;
  manifest.config = config;

  struct Job {
    const CountyDef* county;
    int year;
  };
  std::vector<Job> jobs;
  for (const CountyDef& c : counties)
    for (int year : config.years) jobs.push_back({&c, year});

  // per-job manifests merge in job order so the output is schedule-free
  std::vector<RunManifest> partial(jobs.size());
  std::vector<std::string> stats_rows(jobs.size());
  parallel_for(jobs.size(), config.parallelism, [&](std::size_t i) {
    const Job& job = jobs[i];
    partial[i].config = config;
    cmd_qa(config, *job.county, job.year, &partial[i]);
    const ExtractOutcome ex = cmd_extract(config, *job.county, job.year, &partial[i]);

    const double len = total_length_km(ex.full_graph);
    stats_rows[i] = job.county->id + "," + std::to_string(job.year) + "," + fmt(len) + "," +
                    fmt(len / job.county->area_km2) + "," +
                    std::to_string(ex.full_graph.nodes.size()) + "," +
                    std::to_string(ex.full_graph.edges.size()) + "\n";

    if (!config.truth_root.empty()) {
      const std::filesystem::path truth =
          config.truth_root /
          ("truth_" + job.county->id + "_" + std::to_string(job.year) + ".geojson");
      if (std::filesystem::exists(truth)) {
        const std::filesystem::path report =
            config.output_dir /
            ("eval_" + job.county->id + "_" + std::to_string(job.year) + ".csv");
        cmd_eval(config, ex.geojson_path, truth, job.county->id, job.county->area_km2, report,
                 &partial[i]);
      }
    }
  });
  for (RunManifest& p : partial) {
    for (StageRecord& s : p.stages) manifest.add(std::move(s));
    for (const auto& [verdict, count] : p.qa_tally) manifest.qa_tally[verdict] += count;
  }

  std::string road_stats =
      "county_id,year,total_length_km,density_km_per_km2,node_count,edge_count\n";
  for (const std::string& row : stats_rows) road_stats += row;
  const std::filesystem::path road_stats_path = config.output_dir / "road_stats.csv";
  write_text_atomic(road_stats_path, road_stats);
  {
    StageRecord rec;
    rec.stage = "road_stats";
    rec.outputs.push_back({road_stats_path.string(), file_digest(road_stats_path)});
    manifest.add(rec);
  }

  if (!config.panel_file.empty() && std::filesystem::exists(config.panel_file)) {
    for (const char* analysis : {"scaling", "correlation", "deciles", "growth", "did"})
      cmd_stats(config, config.panel_file, analysis, {}, &manifest);
  }

  save_manifest(config.output_dir / "run_manifest.json", manifest);
}

namespace {

// Integer Bresenham with a 3x3 stamp: strokes come out ~3 px wide.
void stamp_line(BitCanvas& canvas, int x0, int y0, int x1, int y1) {
  const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  int x = x0, y = y0;
  while (true) {
    for (int oy = -1; oy <= 1; ++oy)
      for (int ox = -1; ox <= 1; ++ox)
        if (canvas.inside(x + ox, y + oy)) canvas.set(x + ox, y + oy, 1);
    if (x == x1 && y == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y += sy;
    }
  }
}

struct FixtureRoad {
  double x0, y0, x1, y1;  // canvas pixel coordinates
};

// Proper or endpoint crossing of two segments, with parameters on each.
struct SegCross {
  double ta, tb, x, y;
};

std::optional<SegCross> seg_intersect(const FixtureRoad& a, const FixtureRoad& b) {
  const double rx = a.x1 - a.x0, ry = a.y1 - a.y0;
  const double sx = b.x1 - b.x0, sy = b.y1 - b.y0;
  const double denom = rx * sy - ry * sx;
  if (denom == 0.0) return std::nullopt;
  const double qpx = b.x0 - a.x0, qpy = b.y0 - a.y0;
  const double ta = (qpx * sy - qpy * sx) / denom;
  const double tb = (qpx * ry - qpy * rx) / denom;
  if (ta < -1e-9 || ta > 1.0 + 1e-9 || tb < -1e-9 || tb > 1.0 + 1e-9) return std::nullopt;
  return SegCross{ta, tb, a.x0 + ta * rx, a.y0 + ta * ry};
}

// Roads split at their mutual crossings so junctions are real graph nodes.
RoadGraph fixture_truth(const std::vector<FixtureRoad>& roads, const BitCanvas& frame,
                        int tile_size) {
  RoadGraph g;
  std::map<std::pair<double, double>, int> node_of;
  auto node_id = [&](double x, double y) {
    auto it = node_of.find({x, y});
    if (it != node_of.end()) return it->second;
    const int id = g.add_node(pixel_to_geo(frame, x + 0.5, y + 0.5, tile_size));
    node_of.emplace(std::make_pair(x, y), id);
    return id;
  };
  const std::size_t n = roads.size();
  std::vector<std::vector<std::pair<double, std::pair<double, double>>>> cuts(n);
  for (std::size_t i = 0; i < n; ++i) {
    cuts[i].push_back({0.0, {roads[i].x0, roads[i].y0}});
    cuts[i].push_back({1.0, {roads[i].x1, roads[i].y1}});
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (const auto cross = seg_intersect(roads[i], roads[j])) {
        cuts[i].push_back({cross->ta, {cross->x, cross->y}});
        cuts[j].push_back({cross->tb, {cross->x, cross->y}});
      }
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(cuts[i].begin(), cuts[i].end());
    for (std::size_t k = 0; k + 1 < cuts[i].size(); ++k) {
      const int a = node_id(cuts[i][k].second.first, cuts[i][k].second.second);
      const int b = node_id(cuts[i][k + 1].second.first, cuts[i][k + 1].second.second);
      if (a != b) g.add_edge(a, b);
    }
  }
  return g;
}

}  // namespace

void make_fixture(const std::filesystem::path& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  const TileRect bbox{109776, 52800, 2, 2, 17};
  const int tile_size = kDefaultTileSize;
  const int W = bbox.w * tile_size, H = bbox.h * tile_size;

  // straight roads with well-separated crossings; 2021 adds one more
  const std::vector<FixtureRoad> base{
      {30, 200, 480, 200},   // horizontal
      {250, 40, 250, 470},   // vertical
      {80, 400, 420, 100},   // diagonal
  };
  const FixtureRoad extra{100, 350, 450, 350};

  CountyDef county;
  county.id = "demo";
  county.region = Region::kWestern;
  county.bbox = bbox;
  {
    // physical footprint of the canvas, for densities
    BitCanvas probe = BitCanvas::zeros(TileCoord{bbox.x, bbox.y, bbox.z}, W, H);
    const GeoPoint tl = pixel_to_geo(probe, 0, 0, tile_size);
    const GeoPoint tr = pixel_to_geo(probe, W, 0, tile_size);
    const GeoPoint bl = pixel_to_geo(probe, 0, H, tile_size);
    county.area_km2 = haversine_km(tl, tr) * haversine_km(tl, bl);
  }
  save_counties(dir / "counties.json", {county});

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> bg_noise(-3, 3), road_noise(-2, 2);

  for (int year : {2017, 2021}) {
    std::vector<FixtureRoad> roads = base;
    if (year == 2021) roads.push_back(extra);

    BitCanvas road_mask = BitCanvas::zeros(TileCoord{bbox.x, bbox.y, bbox.z}, W, H);
    for (const FixtureRoad& r : roads)
      stamp_line(road_mask, static_cast<int>(std::lround(r.x0)),
                 static_cast<int>(std::lround(r.y0)), static_cast<int>(std::lround(r.x1)),
                 static_cast<int>(std::lround(r.y1)));
    const RoadGraph truth = fixture_truth(roads, road_mask, tile_size);
    std::filesystem::create_directories(dir / "truth");
    write_text_atomic(dir / "truth" / ("truth_demo_" + std::to_string(year) + ".geojson"),
                      road_graph_to_geojson(truth));

    for (int ty = 0; ty < bbox.h; ++ty)
      for (int tx = 0; tx < bbox.w; ++tx) {
        const TileCoord coord{bbox.x + tx, bbox.y + ty, bbox.z};
        TileImage img = TileImage::filled(coord, tile_size, tile_size, 0, 0, 0);
        const bool cloudy = year == 2021 && tx == 1 && ty == 1;
        for (int y = 0; y < tile_size; ++y)
          for (int x = 0; x < tile_size; ++x) {
            int v;
            if (cloudy) {
              v = 200;
            } else if (road_mask.at(tx * tile_size + x, ty * tile_size + y)) {
              v = 130 + road_noise(rng);
            } else {
              v = 30 + bg_noise(rng);
            }
            img.set(x, y, static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v),
                    static_cast<std::uint8_t>(v));
          }
        write_tile_png(tile_path(dir / "tiles", year, coord), img);
      }
  }

  // small panel: road length follows a power law in population, with
  // growth between the two epochs
  std::vector<CountyRecord> panel;
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  const Region regions[4] = {Region::kWestern, Region::kCentral, Region::kEastern,
                             Region::kNortheastern};
  for (int i = 0; i < 12; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "c%02d", i + 1);
    const double pop = 50.0 * std::pow(1.35, i);
    const double rl = 2.0 * std::pow(pop, 0.6) * (1.0 + jitter(rng));
    CountyRecord r;
    r.county_id = id;
    r.region = regions[i % 4];
    r.year = 2017;
    r.population = pop;
    r.road_length_km = rl;
    r.gdp = 0.02 * rl * (1.0 + jitter(rng));
    r.sse = 0.4 * r.gdp * (1.0 + jitter(rng));
    r.balance = 0.8 * r.gdp * (1.0 + jitter(rng));
    r.area_km2 = 1500.0 + 100.0 * i;
    panel.push_back(r);
    CountyRecord r2 = r;
    r2.year = 2021;
    const double growth = 1.1 + 0.04 * (i % 5);
    r2.road_length_km = rl * growth;
    r2.population = pop * 1.02;
    r2.gdp = r.gdp * (1.0 + 0.5 * (growth - 1.0));
    r2.sse = r.sse * 1.05;
    r2.balance = r.balance * 1.2;
    panel.push_back(r2);
  }
  write_county_panel(dir / "panel.csv", panel);

  PipelineConfig config;
  config.tile_root = dir / "tiles";
  config.truth_root = dir / "truth";
  config.counties_file = dir / "counties.json";
  config.panel_file = dir / "panel.csv";
  config.output_dir = dir / "out";
  config.years = {2017, 2021};
  config.baseline = BaselineParams{110, 150, 120};
  config.morph = MorphParams{5, 40};
  config.extract = ExtractParams{50};
  // degree-scale sampling tuned to the fixture's pixel pitch (~1.1e-5 deg)
  config.sampling.sample_interval = 5e-5;
  config.sampling.max_match_dist = 2e-4;
  config.seed = seed;
  save_config(dir / "config.json", config);
}

}  // namespace roadnet
