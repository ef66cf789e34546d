// End-to-end acceptance suite. Each check prints one PASS/FAIL line; the
// binary exits nonzero if any check fails.
//
// usage: roadnet_acceptance <default_config.json> <roadnet_cli_binary>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "roadnet/graph_eval.hpp"
#include "roadnet/graph_extract.hpp"
#include "roadnet/morphology.hpp"
#include "roadnet/pipeline.hpp"
#include "roadnet/socio_stats.hpp"
#include "roadnet/tile_qa.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace roadnet;

namespace {

std::string g_config_path;
std::string g_cli_path;

struct Check {
  const char* name;
  std::function<bool(std::string&)> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool expect(bool ok, const std::string& what, std::string& detail) {
  if (!ok && detail.empty()) detail = what;
  return ok;
}

// ---- 1. metric identity on random graphs -----------------------------------

bool check_metric_identity(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240817);
  const SamplingParams params{0.01, 0.1, 3};
  int ri_defined = 0;
  for (int it = 0; it < 25; ++it) {
    const RoadGraph g = synthetic::random_road_graph(rng, 6, 28);
    const CountyEval ev = evaluate_county("self", g, g, 25.0, params);
    if (!expect(ev.scores.precision == 1.0 && ev.scores.recall == 1.0 && ev.scores.f1 == 1.0,
                "self-evaluation rates not exactly 1 on iteration " + std::to_string(it), detail))
      return false;
    if (!expect(ev.g_len_km == ev.h_len_km, "self length mismatch", detail)) return false;
    const MrlMrd m = mrl_mrd({{ev.g_len_km, ev.h_len_km, 25.0}});
    if (!expect(m.mrl == 0.0 && m.mrd == 0.0, "self MRL/MRD not exactly 0", detail)) return false;
    if (ev.ri) {
      ++ri_defined;
      if (!expect(*ev.ri == 1.0, "self RI@3 not exactly 1", detail)) return false;
    }
  }
  const double secs = seconds_since(t0);
  if (!expect(ri_defined > 0, "no random graph had a qualifying intersection", detail))
    return false;
  if (!expect(secs < 10.0, "runtime " + std::to_string(secs) + "s exceeds 10s", detail))
    return false;
  detail = "25 graphs, RI defined on " + std::to_string(ri_defined) + ", " +
           std::to_string(secs).substr(0, 4) + "s";
  return true;
}

// ---- 2. closing vs brute-force set morphology ------------------------------

bool check_morphology_oracle(std::string& detail) {
  std::mt19937_64 rng(20240818);
  std::uniform_int_distribution<int> kernel_pick(0, 2);
  const int kernels[3] = {3, 5, 7};
  std::uniform_real_distribution<double> density(0.1, 0.6);
  for (int it = 0; it < 200; ++it) {
    BitCanvas c = oracles::random_canvas(rng, 48, density(rng));
    int k = kernels[kernel_pick(rng)];
    if (k > std::min(c.width, c.height)) k = 3;
    const MorphParams p{k, 1};
    const BitCanvas got = close(c, p);
    const BitCanvas want = oracles::brute_close(c, k);
    if (!expect(got.bits == want.bits,
                "closing differs from the set-morphology oracle on case " + std::to_string(it),
                detail))
      return false;
    for (std::size_t i = 0; i < c.bits.size(); ++i)
      if (!expect(!c.bits[i] || got.bits[i], "closing lost an input pixel (not extensive)",
                  detail))
        return false;
    if (!expect(close(got, p).bits == got.bits, "closing not idempotent on case " +
                                                    std::to_string(it), detail))
      return false;
  }
  detail = "200 canvases <=48x48, kernels {3,5,7}, bit-exact";
  return true;
}

// ---- 3. skeleton properties --------------------------------------------------

bool is_junction_config(const BitCanvas& c, int x, int y) {
  return fringe_count(c, {x, y}) >= 3;
}

bool check_skeleton_properties(std::string& detail) {
  std::mt19937_64 rng(20240819);
  int blocks_at_junctions = 0;
  for (int it = 0; it < 100; ++it) {
    const BitCanvas c = oracles::random_blobs(rng, 64);
    const BitCanvas s = skeletonize(c);
    const int before = oracles::count_components(c, true);
    const int after = oracles::count_components(s, true);
    if (!expect(before == after,
                "component count changed " + std::to_string(before) + "->" +
                    std::to_string(after) + " on case " + std::to_string(it),
                detail))
      return false;
    // no 2x2 solid block outside junction configurations may still be
    // thinnable under the published deletion rules
    for (int y = 0; y + 1 < s.height; ++y)
      for (int x = 0; x + 1 < s.width; ++x) {
        if (!(s.at(x, y) && s.at(x + 1, y) && s.at(x, y + 1) && s.at(x + 1, y + 1))) continue;
        bool junction = false;
        for (int dy = 0; dy < 2 && !junction; ++dy)
          for (int dx = 0; dx < 2 && !junction; ++dx)
            if (is_junction_config(s, x + dx, y + dy)) junction = true;
        if (junction) {
          ++blocks_at_junctions;
          continue;
        }
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx)
            if (!expect(!zhang_suen_deletable(s, x + dx, y + dy, 0) &&
                            !zhang_suen_deletable(s, x + dx, y + dy, 1),
                        "deletable 2x2 block away from junctions at (" + std::to_string(x) + "," +
                            std::to_string(y) + ") case " + std::to_string(it),
                        detail))
              return false;
      }
  }
  detail = "100 blob canvases <=64x64; junction-adjacent 2x2 blocks: " +
           std::to_string(blocks_at_junctions);
  return true;
}

// ---- 4. combustion closed forms ----------------------------------------------

bool check_extract_oracle(std::string& detail) {
  const int interval = 25;
  auto interior = [&](int m) { return m >= 1 ? (m - 1) / interval : 0; };

  struct Shape {
    const char* name;
    BitCanvas canvas;
    int nodes;
    int edges;
  };
  const std::vector<Shape> shapes{
      {"line", synthetic::line_skeleton(100), 2 + interior(99), 1 + interior(99)},
      {"plus", synthetic::plus_skeleton(30), 5 + 4 * interior(30), 4 + 4 * interior(30)},
      {"H", synthetic::h_skeleton(), 6 + 4 * interior(30) + interior(50),
       5 + 4 * interior(30) + interior(50)},
      {"grid", synthetic::grid_skeleton(),
       21 + 6 * (2 * interior(10) + 2 * interior(30)),
       24 + 6 * (2 * interior(10) + 2 * interior(30))},
  };
  for (const Shape& s : shapes) {
    const RoadGraph g = extract_graph(s.canvas, ExtractParams{interval});
    if (!expect(static_cast<int>(g.nodes.size()) == s.nodes,
                std::string(s.name) + ": nodes " + std::to_string(g.nodes.size()) + " != " +
                    std::to_string(s.nodes),
                detail))
      return false;
    if (!expect(static_cast<int>(g.edges.size()) == s.edges,
                std::string(s.name) + ": edges " + std::to_string(g.edges.size()) + " != " +
                    std::to_string(s.edges),
                detail))
      return false;
    validate_graph(g);
  }
  detail = "line/plus/H/grid node+edge counts exact at interval 25";
  return true;
}

// ---- 5. end-to-end raster round trip ----------------------------------------

bool check_end_to_end(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const synthetic::PlanarScene scene = synthetic::planar_grid_scene();
  const TileCoord origin{109776, 52800, 17};
  const int side = 1024;
  const BitCanvas mask = synthetic::rasterize_scene(scene, origin, side, side);
  const RoadGraph truth = synthetic::scene_truth(scene, mask);

  const MorphParams morph{5, 30};
  BitCanvas canvas = close(mask, morph);
  canvas = skeletonize(canvas);
  canvas = refine(canvas, morph);
  const RoadGraph extracted = extract_graph(canvas, ExtractParams{50});
  const RoadGraph simplified = simplify_to_segments(extracted);

  // one canvas pixel is ~1.07e-5 deg of longitude here; sample every ~2 px
  // and accept matches within ~3 px
  SamplingParams params;
  params.sample_interval = 2.1e-5;
  params.max_match_dist = 3.3e-5;
  params.k = 3;
  const CountyEval ev = evaluate_county("e2e", truth, simplified, 1.0, params);

  const double mrl = std::abs(ev.g_len_km - ev.h_len_km) / ev.g_len_km;
  int junctions = 0;
  for (int d : node_degrees(simplified))
    if (d >= 3) ++junctions;

  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << "f1=" << ev.scores.f1 << " mrl=" << mrl << " junctions=" << junctions << "/"
     << scene.junction_count << " samples=" << ev.g_samples << " time=" << secs << "s";
  detail = os.str();
  if (!expect(ev.g_samples > 1000 && ev.h_samples > 1000, "sampling too sparse to be meaningful",
              detail))
    return false;
  if (!expect(ev.scores.f1 >= 0.95, "F1 " + std::to_string(ev.scores.f1) + " < 0.95", detail))
    return false;
  if (!expect(mrl <= 0.05, "MRL " + std::to_string(mrl) + " > 0.05", detail)) return false;
  if (!expect(junctions == scene.junction_count, "junction count drifted: " + detail, detail))
    return false;
  if (!expect(secs < 60.0, "runtime over a minute", detail)) return false;
  return true;
}

// ---- 6. shipped defaults carry the published constants -----------------------

bool check_config_defaults(std::string& detail) {
  std::ifstream in(g_config_path);
  if (!expect(static_cast<bool>(in), "cannot open " + g_config_path, detail)) return false;
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const PipelineConfig shipped = config_from_json_text(text, g_config_path);
  const PipelineConfig builtin;

  for (const auto& [name, got, want] :
       std::vector<std::tuple<const char*, double, double>>{
           {"qa.var_lap_max", shipped.qa.var_lap_max, 10000.0},
           {"qa.mean_int_max", shipped.qa.mean_int_max, 0.45},
           {"morph.kernel_size", static_cast<double>(shipped.morph.kernel_size), 11.0},
           {"morph.refine_min_len", static_cast<double>(shipped.morph.refine_min_len), 500.0},
           {"sampling.sample_interval", shipped.sampling.sample_interval, 0.01},
           {"sampling.max_match_dist", shipped.sampling.max_match_dist, 0.1},
           {"sampling.k", static_cast<double>(shipped.sampling.k), 3.0},
           {"builtin qa.var_lap_max", builtin.qa.var_lap_max, 10000.0},
           {"builtin qa.mean_int_max", builtin.qa.mean_int_max, 0.45},
           {"builtin morph.kernel_size", static_cast<double>(builtin.morph.kernel_size), 11.0},
           {"builtin morph.refine_min_len", static_cast<double>(builtin.morph.refine_min_len),
            500.0},
           {"builtin sampling.sample_interval", builtin.sampling.sample_interval, 0.01},
           {"builtin sampling.max_match_dist", builtin.sampling.max_match_dist, 0.1},
           {"builtin sampling.k", static_cast<double>(builtin.sampling.k), 3.0},
       }) {
    if (!expect(got == want,
                std::string(name) + " = " + std::to_string(got) + ", expected " +
                    std::to_string(want),
                detail))
      return false;
  }
  detail = "shipped config and built-in defaults both carry the published constants";
  return true;
}

// ---- 7. statistics oracles ----------------------------------------------------

bool check_stats_oracles(std::string& detail) {
  // noiseless power law, exact to 1e-12
  std::vector<CountyRecord> exact;
  for (double x : {10.0, 100.0, 1000.0}) {
    CountyRecord r;
    r.county_id = "x" + std::to_string(static_cast<int>(x));
    r.year = 2021;
    r.population = x;
    r.road_length_km = 2.0 * std::pow(x, 0.6);
    r.gdp = r.sse = r.balance = 1.0;
    r.area_km2 = 100.0;
    exact.push_back(r);
  }
  const PowerLawFit noiseless = fit_scaling_law(exact);
  if (!expect(std::abs(noiseless.z - 0.6) < 1e-12 && std::abs(noiseless.c - 2.0) < 1e-10 &&
                  std::abs(noiseless.r2 - 1.0) < 1e-12,
              "noiseless fit drifted: z=" + std::to_string(noiseless.z), detail))
    return false;

  // 5% multiplicative noise, n=400, fixed seed: z within +-0.02
  std::mt19937_64 rng(987654321);
  std::uniform_real_distribution<double> logx(std::log(10.0), std::log(10000.0));
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<CountyRecord> noisy;
  for (int i = 0; i < 400; ++i) {
    CountyRecord r = exact[0];
    r.county_id = "n" + std::to_string(i);
    r.population = std::exp(logx(rng));
    r.road_length_km = 2.0 * std::pow(r.population, 0.6) * std::max(0.01, 1.0 + noise(rng));
    noisy.push_back(r);
  }
  const PowerLawFit noisy_fit = fit_scaling_law(noisy);
  if (!expect(std::abs(noisy_fit.z - 0.6) < 0.02,
              "noisy fit z=" + std::to_string(noisy_fit.z) + " off by more than 0.02", detail))
    return false;

  // DiD beta=2 panel; the estimator also cross-checks the 2x2 closed form
  // internally on every call
  std::vector<CountyRecord> pre, post;
  GroupDivision groups;
  for (int i = 0; i < 10; ++i) {
    CountyRecord a = exact[0];
    a.county_id = "c" + std::to_string(i);
    a.year = 2017;
    a.gdp = 5.0 + 3.0 * i;
    CountyRecord b = a;
    b.year = 2021;
    b.gdp = a.gdp + 2.0 + (i >= 5 ? 2.0 : 0.0);
    pre.push_back(a);
    post.push_back(b);
    (i >= 5 ? groups.treatment : groups.control).push_back(a.county_id);
  }
  const DidResult did = did_estimate(pre, post, groups, Outcome::kGdp);
  if (!expect(std::abs(did.beta - 2.0) <= 1e-9,
              "DiD beta=" + std::to_string(did.beta) + " not 2 within 1e-9", detail))
    return false;
  if (!expect(std::abs(did.beta - did.beta_closed_form) <= 1e-9, "OLS vs 2x2 mismatch", detail))
    return false;

  std::ostringstream os;
  os << "z_exact err " << std::abs(noiseless.z - 0.6) << ", z_noisy " << noisy_fit.z
     << ", beta " << did.beta;
  detail = os.str();
  return true;
}

// ---- 8. QA classifier truth table --------------------------------------------

bool check_qa_truth_table(std::string& detail) {
  const QaThresholds t;  // defaults: 10000 / 0.45
  const TileImage gray = TileImage::filled(TileCoord{0, 0, 0}, 32, 32, 128, 128, 128);
  const TileImage black = TileImage::filled(TileCoord{0, 0, 0}, 32, 32, 0, 0, 0);
  TileImage sp = TileImage::filled(TileCoord{0, 0, 0}, 32, 32, 0, 0, 0);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      if ((x + y) % 2) sp.set(x, y, 255, 255, 255);
  if (!expect(oracles::brute_laplacian_variance(sp) > 10000.0,
              "salt-and-pepper fixture does not cross the variance threshold", detail))
    return false;

  if (!expect(classify_tile(gray, t).verdict == TileVerdict::kCloudy, "mid-gray not cloudy",
              detail))
    return false;
  if (!expect(classify_tile(black, t).verdict == TileVerdict::kValid, "black not valid", detail))
    return false;
  if (!expect(classify_tile(sp, t).verdict == TileVerdict::kNoisy, "salt-and-pepper not noisy",
              detail))
    return false;
  detail = "cloudy / valid / noisy as constructed";
  return true;
}

// ---- 9. CLI determinism --------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

bool files_equal(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return sa == sb;
}

bool check_determinism(std::string& detail) {
  const fs::path dir = fs::temp_directory_path() / "roadnet_acceptance_fixture";
  fs::remove_all(dir);
  if (!expect(run_cli("make-fixture --out " + dir.string() + " --seed 7") == 0,
              "make-fixture failed", detail))
    return false;
  const std::string config = (dir / "config.json").string();
  if (!expect(run_cli("run-all --config " + config + " --output-dir " +
                      (dir / "run1").string()) == 0,
              "first run-all failed", detail))
    return false;
  if (!expect(run_cli("run-all --config " + config + " --output-dir " +
                      (dir / "run2").string()) == 0,
              "second run-all failed", detail))
    return false;

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "run1")) {
    const std::string name = entry.path().filename().string();
    const std::string ext = entry.path().extension().string();
    if (name == "run_manifest.json") continue;  // timings may differ
    if (ext != ".csv" && ext != ".geojson" && ext != ".json") continue;
    ++compared;
    if (!expect(files_equal(entry.path(), dir / "run2" / name),
                "re-run differs in " + name, detail))
      return false;
  }
  if (!expect(compared >= 10, "too few artifacts compared: " + std::to_string(compared), detail))
    return false;
  fs::remove_all(dir);
  detail = std::to_string(compared) + " artifacts byte-identical across runs";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: roadnet_acceptance <default_config.json> <roadnet_cli>\n";
    return 2;
  }
  g_config_path = argv[1];
  g_cli_path = argv[2];

  const std::vector<Check> checks{
      {"metric_identity_suite", check_metric_identity},
      {"morphology_oracle_equivalence", check_morphology_oracle},
      {"skeleton_properties", check_skeleton_properties},
      {"graph_extraction_oracle", check_extract_oracle},
      {"end_to_end_round_trip", check_end_to_end},
      {"paper_constant_defaults", check_config_defaults},
      {"statistics_oracles", check_stats_oracles},
      {"qa_classifier_truth_table", check_qa_truth_table},
      {"run_all_determinism", check_determinism},
  };

  bool all_ok = true;
  for (const Check& c : checks) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.name;
    if (!detail.empty()) std::cout << " — " << detail;
    std::cout << "\n";
    all_ok = all_ok && ok;
  }
  if (!all_ok) {
    std::cerr << "acceptance suite failed\n";
    return 1;
  }
  std::cout << "acceptance suite passed (" << checks.size() << " criteria)\n";
  return 0;
}
