#include "roadnet/tile_qa.hpp"

#include <cmath>
#include <cstdlib>
#include <vector>

#include "roadnet/errors.hpp"

namespace roadnet {

const char* to_string(TileVerdict v) {
  switch (v) {
    case TileVerdict::kValid: return "valid";
    case TileVerdict::kNoisy: return "noisy";
    case TileVerdict::kCloudy: return "cloudy";
  }
  return "?";
}

TileVerdict verdict_from_string(const std::string& s) {
  if (s == "valid") return TileVerdict::kValid;
  if (s == "noisy") return TileVerdict::kNoisy;
  if (s == "cloudy") return TileVerdict::kCloudy;
  throw DataError("unknown tile verdict: " + s);
}

namespace {

// reflect-101: -1 -> 1, n -> n-2. Keeps the Laplacian of a constant image
// exactly zero at the borders.
inline int reflect101(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

}  // namespace

double laplacian_variance(const TileImage& img) {
  if (img.width <= 0 || img.height <= 0 || img.rgb.empty())
    throw InvariantError("laplacian_variance: empty image");
  const int w = img.width, h = img.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  double var_sum = 0.0;
  std::vector<double> lap(n);
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < h; ++y) {
      const int yu = reflect101(y - 1, h), yd = reflect101(y + 1, h);
      for (int x = 0; x < w; ++x) {
        const int xl = reflect101(x - 1, w), xr = reflect101(x + 1, w);
        const double center = img.at(x, y, c);
        lap[static_cast<std::size_t>(y) * w + x] = img.at(xl, y, c) + img.at(xr, y, c) +
                                                   img.at(x, yu, c) + img.at(x, yd, c) -
                                                   4.0 * center;
      }
    }
    double mean = 0.0;
    for (double v : lap) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : lap) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    var_sum += var;
  }
  return var_sum / 3.0;
}

std::array<double, 3> mean_channel_intensity(const TileImage& img) {
  if (img.width <= 0 || img.height <= 0 || img.rgb.empty())
    throw InvariantError("mean_channel_intensity: empty image");
  std::array<double, 3> sum{0.0, 0.0, 0.0};
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (std::size_t i = 0; i < n; ++i) {
    sum[0] += img.rgb[i * 3];
    sum[1] += img.rgb[i * 3 + 1];
    sum[2] += img.rgb[i * 3 + 2];
  }
  for (double& s : sum) s /= static_cast<double>(n) * 255.0;
  return sum;
}

TileVerdict classify_from_stats(double var_lap, const std::array<double, 3>& mean_int,
                                const QaThresholds& t) {
  if (var_lap > t.var_lap_max) return TileVerdict::kNoisy;
  // non-cloud iff at least one channel mean is below the threshold
  for (double m : mean_int)
    if (m < t.mean_int_max) return TileVerdict::kValid;
  return TileVerdict::kCloudy;
}

TileStatus classify_tile(const TileImage& img, const QaThresholds& t) {
  TileStatus s;
  s.var_lap = laplacian_variance(img);
  s.mean_int = mean_channel_intensity(img);
  s.verdict = classify_from_stats(s.var_lap, s.mean_int, t);
  return s;
}

SubstitutionPlan interpolate_missing(const std::map<int, TileVerdict>& series) {
  SubstitutionPlan plan;
  std::vector<int> valid_years;
  for (const auto& [year, verdict] : series)
    if (verdict == TileVerdict::kValid) valid_years.push_back(year);
  if (valid_years.empty()) {
    plan.permanently_missing = true;
    return plan;
  }
  for (const auto& [year, verdict] : series) {
    if (verdict == TileVerdict::kValid) {
      plan.source_year[year] = year;
      continue;
    }
    int best = valid_years.front();
    for (int v : valid_years) {
      const int d = std::abs(v - year), bd = std::abs(best - year);
      if (d < bd || (d == bd && v < best)) best = v;
    }
    plan.source_year[year] = best;
  }
  return plan;
}

}  // namespace roadnet
