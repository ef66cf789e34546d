#include "roadnet/socio_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "roadnet/errors.hpp"

namespace roadnet {

const char* to_string(Region r) {
  switch (r) {
    case Region::kWestern: return "western";
    case Region::kCentral: return "central";
    case Region::kEastern: return "eastern";
    case Region::kNortheastern: return "northeastern";
  }
  return "?";
}

Region region_from_string(const std::string& s) {
  if (s == "western") return Region::kWestern;
  if (s == "central") return Region::kCentral;
  if (s == "eastern") return Region::kEastern;
  if (s == "northeastern") return Region::kNortheastern;
  throw DataError("unknown region: " + s);
}

const char* to_string(Indicator i) {
  switch (i) {
    case Indicator::kPopulation: return "population";
    case Indicator::kGdp: return "gdp";
    case Indicator::kSse: return "sse";
    case Indicator::kBalance: return "balance";
  }
  return "?";
}

Indicator indicator_from_string(const std::string& s) {
  if (s == "population") return Indicator::kPopulation;
  if (s == "gdp") return Indicator::kGdp;
  if (s == "sse") return Indicator::kSse;
  if (s == "balance") return Indicator::kBalance;
  throw UsageError("unknown indicator: " + s);
}

double indicator_value(const CountyRecord& r, Indicator i) {
  switch (i) {
    case Indicator::kPopulation: return r.population;
    case Indicator::kGdp: return r.gdp;
    case Indicator::kSse: return r.sse;
    case Indicator::kBalance: return r.balance;
  }
  return 0.0;
}

const char* to_string(DidMetric m) {
  switch (m) {
    case DidMetric::kArl: return "arl";
    case DidMetric::kRrl: return "rrl";
    case DidMetric::kRrpc: return "rrpc";
  }
  return "?";
}

DidMetric did_metric_from_string(const std::string& s) {
  if (s == "arl") return DidMetric::kArl;
  if (s == "rrl") return DidMetric::kRrl;
  if (s == "rrpc") return DidMetric::kRrpc;
  throw UsageError("unknown DiD metric: " + s);
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::kGdp: return "gdp";
    case Outcome::kSse: return "sse";
    case Outcome::kBalance: return "balance";
  }
  return "?";
}

Outcome outcome_from_string(const std::string& s) {
  if (s == "gdp") return Outcome::kGdp;
  if (s == "sse") return Outcome::kSse;
  if (s == "balance") return Outcome::kBalance;
  throw UsageError("unknown outcome: " + s);
}

namespace {

struct Ols {
  double slope = 0.0, intercept = 0.0, r2 = 0.0, ss_res = 0.0, ss_tot = 0.0;
};

Ols ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DataError("regression: predictor has no variance");
  Ols o;
  o.slope = sxy / sxx;
  o.intercept = my - o.slope * mx;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (o.intercept + o.slope * x[i]);
    o.ss_res += r * r;
    o.ss_tot += (y[i] - my) * (y[i] - my);
  }
  if (o.ss_tot == 0.0) throw DataError("regression: outcome has no variance, r2 undefined");
  o.r2 = 1.0 - o.ss_res / o.ss_tot;
  return o;
}

}  // namespace

PowerLawFit fit_scaling_law(const std::vector<CountyRecord>& records) {
  PowerLawFit fit;
  std::vector<double> lx, ly;
  for (const CountyRecord& r : records) {
    if (!(r.population > 0.0) || !(r.road_length_km > 0.0)) {
      fit.rejected.push_back(r.county_id);
      continue;
    }
    lx.push_back(std::log(r.population));
    ly.push_back(std::log(r.road_length_km));
  }
  if (lx.size() < 3)
    throw DataError("fit_scaling_law: need at least 3 usable records, have " +
                    std::to_string(lx.size()));
  const Ols o = ols_fit(lx, ly);
  fit.z = o.slope;
  fit.c = std::exp(o.intercept);
  fit.r2 = o.r2;
  return fit;
}

LinearFit correlate(const std::vector<CountyRecord>& records, Indicator indicator) {
  if (records.size() < 3)
    throw DataError("correlate: need at least 3 records, have " + std::to_string(records.size()));
  std::vector<double> x, y;
  for (const CountyRecord& r : records) {
    x.push_back(indicator_value(r, indicator));
    y.push_back(r.road_length_km);
  }
  const Ols o = ols_fit(x, y);
  return {o.slope, o.intercept, o.r2};
}

std::vector<DecileRow> decile_summary(std::vector<CountyRecord> records) {
  if (records.size() < 10)
    throw DataError("decile_summary: need at least 10 records, have " +
                    std::to_string(records.size()));
  std::sort(records.begin(), records.end(), [](const CountyRecord& a, const CountyRecord& b) {
    if (a.population != b.population) return a.population < b.population;
    return a.county_id < b.county_id;
  });
  const std::size_t n = records.size();
  const std::size_t base = n / 10, extra = n % 10;
  std::vector<DecileRow> rows;
  std::size_t pos = 0;
  for (int d = 1; d <= 10; ++d) {
    // the remainder spreads over the lower deciles
    const std::size_t take = base + (static_cast<std::size_t>(d) <= extra ? 1 : 0);
    DecileRow row;
    row.decile = d;
    row.count = take;
    for (std::size_t i = 0; i < take; ++i, ++pos) {
      row.mean_rl_km += records[pos].road_length_km;
      row.mean_rpc += road_per_capita(records[pos]);
    }
    if (take > 0) {
      row.mean_rl_km /= static_cast<double>(take);
      row.mean_rpc /= static_cast<double>(take);
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::map<std::string, const CountyRecord*> by_id(const std::vector<CountyRecord>& records) {
  std::map<std::string, const CountyRecord*> m;
  for (const CountyRecord& r : records) m[r.county_id] = &r;
  return m;
}

}  // namespace

RegionalGrowthResult regional_growth(const std::vector<CountyRecord>& year1,
                                     const std::vector<CountyRecord>& year2) {
  RegionalGrowthResult out;
  const auto m1 = by_id(year1);
  const auto m2 = by_id(year2);
  struct Acc {
    double rl = 0.0, rpc = 0.0;
    std::size_t n = 0;
  };
  std::map<Region, Acc> acc;
  for (const CountyRecord& r1 : year1) {
    auto it = m2.find(r1.county_id);
    if (it == m2.end()) {
      out.skipped.push_back(r1.county_id);
      continue;
    }
    const CountyRecord& r2 = *it->second;
    if (!(r2.road_length_km > 0.0)) {
      out.skipped.push_back(r1.county_id);
      continue;
    }
    Acc& a = acc[r1.region];
    a.rl += (r2.road_length_km - r1.road_length_km) / r2.road_length_km;
    a.rpc += (road_per_capita(r2) - road_per_capita(r1)) / road_per_capita(r2);
    ++a.n;
  }
  for (const CountyRecord& r2 : year2)
    if (!m1.count(r2.county_id)) out.skipped.push_back(r2.county_id);
  for (const auto& [region, a] : acc) {
    RegionGrowth g;
    g.region = region;
    g.count = a.n;
    g.mean_rl_growth = a.rl / static_cast<double>(a.n);
    g.mean_rpc_growth = a.rpc / static_cast<double>(a.n);
    out.regions.push_back(g);
  }
  return out;
}

GroupDivision divide_groups(const std::vector<CountyRecord>& pre,
                            const std::vector<CountyRecord>& post, const DidSpec& spec) {
  if (spec.control_quantile + spec.treatment_quantile > 1.0 + 1e-12)
    throw InvariantError("divide_groups: control and treatment shares exceed 1");
  const auto m_post = by_id(post);
  GroupDivision out;
  std::vector<std::pair<double, std::string>> scored;
  for (const CountyRecord& r1 : pre) {
    auto it = m_post.find(r1.county_id);
    if (it == m_post.end())
      throw DataError("divide_groups: county " + r1.county_id + " missing in post period");
    const CountyRecord& r2 = *it->second;
    double metric = 0.0;
    switch (spec.metric) {
      case DidMetric::kArl:
        metric = r2.road_length_km - r1.road_length_km;
        break;
      case DidMetric::kRrl:
        if (!(r2.road_length_km > 0.0)) {
          out.excluded.push_back(r1.county_id);
          continue;
        }
        metric = (r2.road_length_km - r1.road_length_km) / r2.road_length_km;
        break;
      case DidMetric::kRrpc: {
        if (!(r2.road_length_km > 0.0)) {
          out.excluded.push_back(r1.county_id);
          continue;
        }
        const double rpc2 = road_per_capita(r2), rpc1 = road_per_capita(r1);
        metric = (rpc2 - rpc1) / rpc2;
        break;
      }
    }
    scored.push_back({metric, r1.county_id});
  }
  std::sort(scored.begin(), scored.end());
  const std::size_t n = scored.size();
  // floor-based index cuts; the epsilon keeps 0.6*n from landing just
  // under an integer in floating point
  const std::size_t n_control =
      static_cast<std::size_t>(std::floor(spec.control_quantile * n + 1e-9));
  const std::size_t cut_treat =
      static_cast<std::size_t>(std::floor((1.0 - spec.treatment_quantile) * n + 1e-9));
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_control)
      out.control.push_back(scored[i].second);
    else if (i >= cut_treat)
      out.treatment.push_back(scored[i].second);
  }
  return out;
}

DidResult did_estimate(const std::vector<CountyRecord>& pre, const std::vector<CountyRecord>& post,
                       const GroupDivision& groups, Outcome outcome, bool log_outcome) {
  if (groups.control.empty() || groups.treatment.empty())
    throw InvariantError("did_estimate: both groups must be non-empty");
  const auto m_pre = by_id(pre);
  const auto m_post = by_id(post);

  auto outcome_of = [&](const CountyRecord& r) {
    double v = 0.0;
    switch (outcome) {
      case Outcome::kGdp: v = r.gdp; break;
      case Outcome::kSse: v = r.sse; break;
      case Outcome::kBalance: v = r.balance; break;
    }
    if (log_outcome) {
      if (!(v > 0.0)) throw DataError("did_estimate: non-positive outcome under log transform");
      v = std::log(v);
    }
    return v;
  };

  struct Cell {
    double y_pre = 0.0, y_post = 0.0;
    bool treated = false;
  };
  std::vector<Cell> cells;
  auto collect = [&](const std::vector<std::string>& ids, bool treated) {
    for (const std::string& id : ids) {
      auto ip = m_pre.find(id);
      auto iq = m_post.find(id);
      if (ip == m_pre.end() || iq == m_post.end())
        throw DataError("did_estimate: county " + id + " missing an epoch");
      cells.push_back({outcome_of(*ip->second), outcome_of(*iq->second), treated});
    }
  };
  collect(groups.control, false);
  collect(groups.treatment, true);

  // closed-form 2x2 double difference
  double ct_pre = 0.0, ct_post = 0.0, tr_pre = 0.0, tr_post = 0.0;
  std::size_t n_ct = 0, n_tr = 0;
  for (const Cell& c : cells) {
    if (c.treated) {
      tr_pre += c.y_pre;
      tr_post += c.y_post;
      ++n_tr;
    } else {
      ct_pre += c.y_pre;
      ct_post += c.y_post;
      ++n_ct;
    }
  }
  const double dd = (tr_post / n_tr - tr_pre / n_tr) - (ct_post / n_ct - ct_pre / n_ct);

  // two-way within transform: y_it - mean_i - mean_t + grand mean,
  // same for the D*T regressor, then slope through the origin
  const std::size_t n_units = cells.size();
  const double grand_y = (ct_pre + ct_post + tr_pre + tr_post) / (2.0 * n_units);
  const double mean_t_pre = (ct_pre + tr_pre) / n_units;
  const double mean_t_post = (ct_post + tr_post) / n_units;
  const double grand_x = static_cast<double>(n_tr) / (2.0 * n_units);
  const double mean_x_pre = 0.0, mean_x_post = static_cast<double>(n_tr) / n_units;

  double sxy = 0.0, sxx = 0.0;
  for (const Cell& c : cells) {
    const double mean_i_y = (c.y_pre + c.y_post) / 2.0;
    const double mean_i_x = c.treated ? 0.5 : 0.0;
    const double yt_pre = c.y_pre - mean_i_y - mean_t_pre + grand_y;
    const double yt_post = c.y_post - mean_i_y - mean_t_post + grand_y;
    const double xt_pre = 0.0 - mean_i_x - mean_x_pre + grand_x;
    const double xt_post = (c.treated ? 1.0 : 0.0) - mean_i_x - mean_x_post + grand_x;
    sxy += xt_pre * yt_pre + xt_post * yt_post;
    sxx += xt_pre * xt_pre + xt_post * xt_post;
  }
  if (sxx == 0.0) throw DataError("did_estimate: degenerate design matrix");

  DidResult res;
  res.beta = sxy / sxx;
  res.beta_closed_form = dd;
  res.n_units = n_units;
  res.n_obs = 2 * n_units;
  if (std::abs(res.beta - res.beta_closed_form) > 1e-9)
    throw InvariantError("did_estimate: within-OLS beta diverged from the 2x2 double difference");
  for (const Cell& c : cells) {
    const double mean_i_y = (c.y_pre + c.y_post) / 2.0;
    const double mean_i_x = c.treated ? 0.5 : 0.0;
    const double rt_pre = (c.y_pre - mean_i_y - mean_t_pre + grand_y) -
                          res.beta * (0.0 - mean_i_x - mean_x_pre + grand_x);
    const double rt_post = (c.y_post - mean_i_y - mean_t_post + grand_y) -
                           res.beta * ((c.treated ? 1.0 : 0.0) - mean_i_x - mean_x_post + grand_x);
    res.residual_ss += rt_pre * rt_pre + rt_post * rt_post;
  }
  return res;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& col, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("counties CSV line " + std::to_string(line_no) + ": column '" + col +
                    "' is not a number: '" + s + "'");
  }
}

}  // namespace

std::vector<CountyRecord> read_county_panel(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(file.string() + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw DataError(file.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);

  // population column name declares its unit
  double pop_to_thousand = 1.0;
  std::map<std::string, int> col;
  for (int i = 0; i < static_cast<int>(header.size()); ++i) {
    std::string name = header[i];
    if (name == "population" || name == "population_thousand") {
      pop_to_thousand = 1.0;
      name = "population";
    } else if (name == "population_million") {
      pop_to_thousand = 1000.0;
      name = "population";
    } else if (name == "population_persons") {
      pop_to_thousand = 0.001;
      name = "population";
    }
    col[name] = i;
  }
  for (const char* required : {"county_id", "region", "year", "population", "gdp", "sse",
                               "balance", "road_length_km", "area_km2"}) {
    if (!col.count(required))
      throw DataError(file.string() + ": missing column '" + std::string(required) + "'");
  }

  std::vector<CountyRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() < header.size())
      throw DataError(file.string() + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns, found " +
                      std::to_string(f.size()));
    CountyRecord r;
    r.county_id = f[col["county_id"]];
    r.region = region_from_string(f[col["region"]]);
    r.year = static_cast<int>(parse_double(f[col["year"]], "year", line_no));
    r.population = parse_double(f[col["population"]], "population", line_no) * pop_to_thousand;
    r.gdp = parse_double(f[col["gdp"]], "gdp", line_no);
    r.sse = parse_double(f[col["sse"]], "sse", line_no);
    r.balance = parse_double(f[col["balance"]], "balance", line_no);
    r.road_length_km = parse_double(f[col["road_length_km"]], "road_length_km", line_no);
    r.area_km2 = parse_double(f[col["area_km2"]], "area_km2", line_no);
    if (!(r.population > 0.0))
      throw DataError(file.string() + " line " + std::to_string(line_no) +
                      ": population must be positive");
    if (!(r.area_km2 > 0.0))
      throw DataError(file.string() + " line " + std::to_string(line_no) +
                      ": area_km2 must be positive");
    if (r.road_length_km < 0.0)
      throw DataError(file.string() + " line " + std::to_string(line_no) +
                      ": road_length_km must be non-negative");
    records.push_back(std::move(r));
  }
  return records;
}

void write_county_panel(const std::filesystem::path& file,
                        const std::vector<CountyRecord>& records) {
  std::ofstream out(file);
  if (!out) throw DataError(file.string() + ": cannot open for writing");
  out << "county_id,region,year,population_thousand,gdp,sse,balance,road_length_km,area_km2\n";
  char buf[256];
  for (const CountyRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  r.county_id.c_str(), to_string(r.region), r.year, r.population, r.gdp, r.sse,
                  r.balance, r.road_length_km, r.area_km2);
    out << buf;
  }
}

}  // namespace roadnet
