#ifndef ROADNET_SOCIO_STATS_HPP
#define ROADNET_SOCIO_STATS_HPP

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace roadnet {

enum class Region { kWestern, kCentral, kEastern, kNortheastern };

const char* to_string(Region r);
Region region_from_string(const std::string& s);

// One county-year row of the socioeconomic panel. Population is stored in
// thousand people regardless of the unit the CSV declared; money columns
// are billion CNY.
struct CountyRecord {
  std::string county_id;
  Region region = Region::kWestern;
  int year = 0;
  double population = 0.0;  // thousand people
  double gdp = 0.0;
  double sse = 0.0;
  double balance = 0.0;
  double road_length_km = 0.0;
  double area_km2 = 0.0;
};

// km per thousand people == meters per person.
inline double road_per_capita(const CountyRecord& r) { return r.road_length_km / r.population; }

struct PowerLawFit {
  double c = 0.0;   // multiplicative constant
  double z = 0.0;   // exponent
  double r2 = 0.0;  // in log-log space
  std::vector<std::string> rejected;  // ids dropped for non-positive values
};

// OLS of log(road_length) on log(population).
PowerLawFit fit_scaling_law(const std::vector<CountyRecord>& records);

enum class Indicator { kPopulation, kGdp, kSse, kBalance };
const char* to_string(Indicator i);
Indicator indicator_from_string(const std::string& s);
double indicator_value(const CountyRecord& r, Indicator i);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// OLS of road_length on the chosen indicator. Throws DataError when the
// indicator is constant or the outcome has no variance (r2 undefined).
LinearFit correlate(const std::vector<CountyRecord>& records, Indicator indicator);

struct DecileRow {
  int decile = 0;  // 1 = least populous 10%
  std::size_t count = 0;
  double mean_rl_km = 0.0;
  double mean_rpc = 0.0;  // meters per person
};

std::vector<DecileRow> decile_summary(std::vector<CountyRecord> records);

struct RegionGrowth {
  Region region = Region::kWestern;
  std::size_t count = 0;
  double mean_rl_growth = 0.0;   // (RL_t2 - RL_t1) / RL_t2, averaged
  double mean_rpc_growth = 0.0;  // same with per-capita road length
};

struct RegionalGrowthResult {
  std::vector<RegionGrowth> regions;
  std::vector<std::string> skipped;  // counties missing an epoch
};

RegionalGrowthResult regional_growth(const std::vector<CountyRecord>& year1,
                                     const std::vector<CountyRecord>& year2);

enum class DidMetric { kArl, kRrl, kRrpc };
const char* to_string(DidMetric m);
DidMetric did_metric_from_string(const std::string& s);

struct DidSpec {
  DidMetric metric = DidMetric::kArl;
  double control_quantile = 0.5;    // bottom share -> control
  double treatment_quantile = 0.4;  // top share -> treatment
  int pre_year = 2017;
  int post_year = 2021;
};

struct GroupDivision {
  std::vector<std::string> control;
  std::vector<std::string> treatment;
  std::vector<std::string> excluded;  // undefined metric (zero denominator)
};

// Sorts counties by the chosen growth metric ascending, ties by county id;
// bottom control_quantile goes to control, top treatment_quantile to
// treatment, the sliver in between is discarded.
GroupDivision divide_groups(const std::vector<CountyRecord>& pre,
                            const std::vector<CountyRecord>& post, const DidSpec& spec);

enum class Outcome { kGdp, kSse, kBalance };
const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct DidResult {
  double beta = 0.0;
  double beta_closed_form = 0.0;  // 2x2 group-mean double difference
  std::size_t n_units = 0;
  std::size_t n_obs = 0;
  double residual_ss = 0.0;
};

// Two-way fixed effects by within-demeaning. With two periods the OLS beta
// must coincide with the closed-form double difference; a mismatch beyond
// 1e-9 trips an internal check.
DidResult did_estimate(const std::vector<CountyRecord>& pre, const std::vector<CountyRecord>& post,
                       const GroupDivision& groups, Outcome outcome, bool log_outcome = false);

// Panel CSV with a declared-unit header; see README for the population
// unit suffixes recognized.
std::vector<CountyRecord> read_county_panel(const std::filesystem::path& file);
void write_county_panel(const std::filesystem::path& file,
                        const std::vector<CountyRecord>& records);

}  // namespace roadnet

#endif
