#ifndef ROADNET_TILE_QA_HPP
#define ROADNET_TILE_QA_HPP

#include <array>
#include <map>
#include <string>

#include "roadnet/raster.hpp"

namespace roadnet {

struct QaThresholds {
  double var_lap_max = 10000.0;  // above: high-frequency noise
  double mean_int_max = 0.45;    // no channel below: cloud cover
};

enum class TileVerdict { kValid, kNoisy, kCloudy };

const char* to_string(TileVerdict v);
TileVerdict verdict_from_string(const std::string& s);

struct TileStatus {
  TileVerdict verdict = TileVerdict::kValid;
  double var_lap = 0.0;
  std::array<double, 3> mean_int{0.0, 0.0, 0.0};
};

// Mean over the three channel variances of the 4-neighbor Laplacian,
// reflect-101 borders, population normalization.
double laplacian_variance(const TileImage& img);

// Per-channel mean of value/255.
std::array<double, 3> mean_channel_intensity(const TileImage& img);

// noisy if var_lap above threshold; else cloudy unless some channel mean
// sits below the intensity threshold; else valid.
TileVerdict classify_from_stats(double var_lap, const std::array<double, 3>& mean_int,
                                const QaThresholds& t);
TileStatus classify_tile(const TileImage& img, const QaThresholds& t);

// Year-to-year mask substitution for tiles that failed screening.
// source_year[y] names the epoch whose mask stands in for year y
// (y itself when the tile was valid). A tile with no valid epoch at all
// is permanently missing and must be left out of the county canvas.
struct SubstitutionPlan {
  std::map<int, int> source_year;
  bool permanently_missing = false;
};

SubstitutionPlan interpolate_missing(const std::map<int, TileVerdict>& series);

}  // namespace roadnet

#endif
