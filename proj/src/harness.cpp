#include "topocmp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "csv.hpp"
#include "topocmp/error.hpp"
#include "topocmp/random.hpp"

namespace topocmp {

void ExperimentConfig::validate() const {
  shape1.validate();
  shape2.validate();
  if (n < 1) throw ValidationError("sample size must be positive");
  if (replicates < 1) throw ValidationError("need at least one replicate");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw ValidationError("bandwidth must be positive");
  if (!(alpha_level > 0.0 && alpha_level < 1.0))
    throw ValidationError("alpha_level must lie in (0, 1)");
  if (resolution < 2) throw ValidationError("grid resolution must be at least 2");
  if (!(wasserstein_p >= 1.0)) throw ValidationError("wasserstein_p must be >= 1");
  rst.validate();
}

std::pair<std::uint64_t, std::uint64_t> replicate_seeds(const ExperimentConfig& cfg,
                                                        std::size_t replicate) {
  const std::uint64_t s1 = derive_seed(cfg.seed, replicate, 0);
  const std::uint64_t s2 = cfg.same_seed_both_sides ? s1 : derive_seed(cfg.seed, replicate, 1);
  return {s1, s2};
}

ReplicateResult run_replicate(const ExperimentConfig& cfg, std::size_t replicate) {
  const auto [seed1, seed2] = replicate_seeds(cfg, replicate);
  PipelineOptions popts;
  popts.resolution = cfg.resolution;
  popts.compute_h1 = false;
  popts.essential_policy =
      cfg.drop_essential ? EssentialPolicy::Dropped : EssentialPolicy::DeathAtGridMin;

  const PersistenceDiagram d1 =
      diagram_pipeline(sample_shape(cfg.shape1, cfg.n, seed1), cfg.bandwidth, popts).h0;
  const PersistenceDiagram d2 =
      diagram_pipeline(sample_shape(cfg.shape2, cfg.n, seed2), cfg.bandwidth, popts).h0;

  ReplicateResult r;
  r.h0_size1 = d1.size();
  r.h0_size2 = d2.size();
  r.bottleneck = bottleneck(d1, d2);
  r.wasserstein = wasserstein_power(d1, d2, cfg.wasserstein_p);
  if (!cfg.fit_rst) return r;

  try {
    const RstFit f1 = fit(transform(d1), cfg.rst);
    const RstFit f2 = fit(transform(d2), cfg.rst);
    for (std::size_t j = 0; j < f1.theta.size(); ++j) {
      const double se = std::sqrt(f1.variances[j] + f2.variances[j]);
      if (!(se > 0.0) || !std::isfinite(se)) throw VarianceUnavailableError("zero standard error");
      r.delta.push_back(f1.theta[j] - f2.theta[j]);
      r.se.push_back(se);
    }
    r.fit_ok = true;
  } catch (const std::runtime_error& e) {
    r.fit_ok = false;
    r.fit_error = e.what();
    r.delta.clear();
    r.se.clear();
  } catch (const ValidationError& e) {
    // too few diagram points for the cluster size
    r.fit_ok = false;
    r.fit_error = e.what();
    r.delta.clear();
    r.se.clear();
  }
  return r;
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SampleStats summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("summary of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  SampleStats s;
  s.range = {v.front(), v.back()};
  s.iqr = {quantile(v, 0.25), quantile(v, 0.75)};
  s.median = quantile(v, 0.5);
  if (v.size() > 1) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());
    double ss = 0.0;
    for (double x : values) ss += (x - mean) * (x - mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

PooledTests pooled_tests(std::span<const ReplicateResult> results, std::size_t K,
                         double alpha_level) {
  std::vector<const ReplicateResult*> ok;
  for (const auto& r : results)
    if (r.fit_ok && r.delta.size() == K) ok.push_back(&r);

  PooledTests out;
  std::vector<std::vector<double>> pvals(ok.size(), std::vector<double>(K, 1.0));
  for (std::size_t j = 0; j < K; ++j) {
    std::vector<double> pool;
    for (const auto* r : ok) pool.push_back(r->delta[j]);

    bool use_z = pool.size() < 100;
    if (pool.size() >= 20) use_z = use_z || ks_normal_check(pool);
    out.method.push_back(use_z ? "z" : "empirical");
    if (use_z) {
      for (std::size_t i = 0; i < ok.size(); ++i) pvals[i][j] = z_pvalue(ok[i]->delta[j], ok[i]->se[j]);
    } else {
      // Null sample: the pool shifted to median zero.
      std::vector<double> sorted = pool;
      std::sort(sorted.begin(), sorted.end());
      const double centre = quantile(sorted, 0.5);
      std::vector<double> null_sample;
      for (double d : pool) null_sample.push_back(d - centre);
      for (std::size_t i = 0; i < ok.size(); ++i)
        pvals[i][j] = empirical_pvalue(null_sample, ok[i]->delta[j]);
    }
  }
  for (const auto& p : pvals) out.k.push_back(count_significant(p, alpha_level));
  return out;
}

SummaryRow summarize_replicates(const ExperimentConfig& cfg,
                                std::span<const ReplicateResult> results) {
  if (results.empty()) throw ValidationError("no replicate results");
  SummaryRow row;
  row.name = cfg.name;
  row.n = cfg.n;
  row.replicates = results.size();

  std::vector<double> b, w;
  for (const auto& r : results) {
    b.push_back(r.bottleneck);
    w.push_back(r.wasserstein);
  }
  row.bottleneck = summarize(b);
  row.wasserstein = summarize(w);
  try {
    std::tie(row.min_ratio, row.max_ratio) = range_ratio(row.bottleneck.range, row.wasserstein.range);
  } catch (const UndefinedRatioError&) {
    row.min_ratio = row.max_ratio = std::numeric_limits<double>::quiet_NaN();
  }

  const std::size_t K = cfg.rst.K;
  row.rst_proportions.assign(K + 1, 0.0);
  if (!cfg.fit_rst) return row;
  for (const auto& r : results) row.fit_failures += r.fit_ok ? 0 : 1;
  const PooledTests tests = pooled_tests(results, K, cfg.alpha_level);
  row.pvalue_method = tests.method;
  for (std::size_t k : tests.k) row.rst_proportions[k] += 1.0;
  for (double& p : row.rst_proportions) p /= static_cast<double>(results.size());
  return row;
}

std::vector<ReplicateResult> run_replicates(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ReplicateResult> results(cfg.replicates);
  std::size_t workers = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, cfg.replicates);
  if (workers == 1) {
    for (std::size_t r = 0; r < cfg.replicates; ++r) results[r] = run_replicate(cfg, r);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t r = next++; r < cfg.replicates; r = next++) {
        try {
          results[r] = run_replicate(cfg, r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = cfg.replicates;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

SummaryRow run_experiment(const ExperimentConfig& cfg) {
  const auto results = run_replicates(cfg);
  return summarize_replicates(cfg, results);
}

std::vector<SuiteRow> run_suite(std::span<const ExperimentConfig> configs) {
  std::vector<SuiteRow> rows;
  for (const auto& cfg : configs) {
    SuiteRow row{cfg, std::nullopt, {}};
    try {
      row.row = run_experiment(cfg);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  return detail::format_double(v);
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

void write_summary_csv(std::ostream& out, std::span<const SuiteRow> rows) {
  std::size_t max_k = 0;
  for (const auto& r : rows) max_k = std::max(max_k, r.config.rst.K);

  out << "example,n,replicates";
  for (const char* m : {"bottleneck", "wasserstein"})
    out << ',' << m << "_min," << m << "_max," << m << "_q1," << m << "_q3," << m << "_std";
  out << ",ratio_min,ratio_max";
  for (std::size_t k = 0; k <= max_k; ++k) out << ",p" << k;
  out << ",fit_failures,bottleneck_median,wasserstein_median,error\n";

  for (const auto& r : rows) {
    out << csv_text(r.config.name) << ',' << r.config.n << ',';
    if (!r.row) {
      out << r.config.replicates;
      for (std::size_t i = 0; i < 12 + max_k + 1 + 3; ++i) out << ',';
      out << ',' << csv_text(r.error) << '\n';
      continue;
    }
    const SummaryRow& s = *r.row;
    out << s.replicates;
    for (const SampleStats* st : {&s.bottleneck, &s.wasserstein})
      out << ',' << csv_number(st->range.low) << ',' << csv_number(st->range.high) << ','
          << csv_number(st->iqr.low) << ',' << csv_number(st->iqr.high) << ','
          << csv_number(st->std);
    out << ',' << csv_number(s.min_ratio) << ',' << csv_number(s.max_ratio);
    for (std::size_t k = 0; k <= max_k; ++k)
      out << ',' << (k < s.rst_proportions.size() ? csv_number(s.rst_proportions[k]) : "");
    out << ',' << s.fit_failures << ',' << csv_number(s.bottleneck.median) << ','
        << csv_number(s.wasserstein.median) << ",\n";
  }
}

// ---- configuration file ----

namespace {

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

std::vector<std::string> list_items(std::string_view value) {
  value = detail::trim(value);
  if (!value.empty() && value.front() == '[') value.remove_prefix(1);
  if (!value.empty() && value.back() == ']') value.remove_suffix(1);
  std::vector<std::string> items;
  for (auto& item : detail::split_csv_line(value))
    if (!item.empty()) items.push_back(item);
  return items;
}

double to_number(const std::string& key, std::string_view value) {
  const auto v = detail::parse_double(value);
  if (!v) throw ValidationError("config key '" + key + "': not a number: " + std::string(value));
  return *v;
}

std::size_t to_count(const std::string& key, std::string_view value) {
  const double v = to_number(key, value);
  if (v < 0 || v != std::floor(v) || v > 9.0e15)
    throw ValidationError("config key '" + key + "': not a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, std::string_view value) {
  const std::string v(detail::trim(value));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config key '" + key + "': not a boolean: " + v);
}

struct Pending {
  ExperimentConfig cfg;
  std::vector<std::size_t> sizes{100};
};

void apply_key(Pending& p, const std::string& key, const std::string& raw) {
  ExperimentConfig& c = p.cfg;
  std::string value(detail::trim(raw));
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
  auto shape_for = [&](char side) -> ShapeSpec& { return side == '1' ? c.shape1 : c.shape2; };

  if (key == "name") {
    c.name = value;
  } else if (key == "example") {
    const ExamplePair ex = example_pair(static_cast<int>(to_count(key, value)));
    c.name = ex.name;
    c.shape1 = ex.first;
    c.shape2 = ex.second;
  } else if (key == "shape1" || key == "shape2") {
    shape_for(key.back()).kind = parse_shape_kind(value);
  } else if (key == "radii1" || key == "radii2") {
    std::vector<double> radii;
    for (const auto& item : list_items(value)) radii.push_back(to_number(key, item));
    shape_for(key.back()).radii = radii;
  } else if (key == "gap1" || key == "gap2") {
    shape_for(key.back()).gap = to_number(key, value);
  } else if (key == "split1" || key == "split2") {
    shape_for(key.back()).split = to_number(key, value);
  } else if (key == "n") {
    p.sizes.clear();
    for (const auto& item : list_items(value)) p.sizes.push_back(to_count(key, item));
    if (p.sizes.empty()) throw ValidationError("config key 'n': empty list");
  } else if (key == "replicates") {
    c.replicates = to_count(key, value);
  } else if (key == "seed") {
    const auto v = value;
    std::uint64_t s = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
    if (ec != std::errc() || ptr != v.data() + v.size())
      throw ValidationError("config key 'seed': not an unsigned integer");
    c.seed = s;
  } else if (key == "bandwidth" || key == "eta") {
    c.bandwidth = to_number(key, value);
  } else if (key == "K") {
    c.rst.K = to_count(key, value);
  } else if (key == "alpha_level") {
    c.alpha_level = to_number(key, value);
  } else if (key == "alpha_max") {
    c.rst.alpha_max = to_number(key, value);
  } else if (key == "quadrature_nodes") {
    const std::size_t q = to_count(key, value);
    c.rst.quadrature_nodes = {q, q};
  } else if (key == "resolution") {
    c.resolution = to_count(key, value);
  } else if (key == "wasserstein_p") {
    c.wasserstein_p = to_number(key, value);
  } else if (key == "drop_essential") {
    c.drop_essential = to_bool(key, value);
  } else if (key == "same_seed") {
    c.same_seed_both_sides = to_bool(key, value);
  } else if (key == "fit_rst") {
    c.fit_rst = to_bool(key, value);
  } else if (key == "threads") {
    c.threads = to_count(key, value);
  } else {
    throw ValidationError("unknown config key '" + key + "'");
  }
}

void expand(const Pending& p, std::vector<ExperimentConfig>& out) {
  for (std::size_t n : p.sizes) {
    ExperimentConfig c = p.cfg;
    c.n = n;
    c.validate();
    out.push_back(c);
  }
}

}  // namespace

std::vector<ExperimentConfig> parse_config(std::istream& in) {
  Pending defaults;
  std::optional<Pending> current;
  std::vector<ExperimentConfig> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text(detail::trim(strip_comment(line)));
    if (text.empty()) continue;
    try {
      if (text.front() == '[') {
        if (current) expand(*current, out);
        current = defaults;
        continue;
      }
      const auto eq = text.find('=');
      if (eq == std::string::npos) throw ValidationError("expected key = value");
      const std::string key(detail::trim(text.substr(0, eq)));
      apply_key(current ? *current : defaults, key, text.substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ValidationError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (current) expand(*current, out);
  else expand(defaults, out);
  return out;
}

std::vector<ExperimentConfig> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  return parse_config(in);
}

// ---- ingestion ----

std::set<int> cold_months() { return {11, 12, 1, 2, 3}; }
std::set<int> hot_months() { return {4, 5, 6, 7, 8, 9, 10}; }

int parse_month(const std::string& timestamp) {
  const std::string t(detail::trim(timestamp));
  auto digits = [&](std::size_t pos, std::size_t len) -> int {
    if (pos + len > t.size()) return -1;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (t[i] < '0' || t[i] > '9') return -1;
      v = v * 10 + (t[i] - '0');
    }
    return v;
  };
  int month = -1;
  if (t.size() >= 10 && (t[4] == '-' || t[4] == '/') && t[7] == t[4] && digits(0, 4) >= 0)
    month = digits(5, 2);
  else if (t.size() >= 10 && (t[2] == '/' || t[2] == '-' || t[2] == '.') && t[5] == t[2] &&
           digits(6, 4) >= 0)
    month = digits(3, 2);
  if (month < 1 || month > 12) throw ValidationError("unrecognised timestamp '" + t + "'");
  return month;
}

namespace {

bool is_missing(std::string_view s) {
  static const std::set<std::string, std::less<>> tokens{"", "NA", "N/A", "NaN", "nan",
                                                         "null", "NULL", "-"};
  return tokens.contains(detail::trim(s));
}

}  // namespace

IngestResult ingest_csv(std::istream& in, const CsvSchema& schema) {
  if (!schema.months.empty() && schema.time_column.empty())
    throw ValidationError("a month filter needs a time column");
  IngestResult res;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::is_blank(line)) {
      header = detail::split_csv_line(line);
      break;
    }
  }
  if (header.empty()) {
    res.warnings.push_back("empty file: no header and no rows");
    return res;
  }

  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ia = column(schema.var_a);
  const std::size_t ib = column(schema.var_b);
  const std::optional<std::size_t> it =
      schema.time_column.empty() ? std::nullopt : std::optional(column(schema.time_column));

  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank(line)) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      res.errors.push_back({lineno, "expected " + std::to_string(header.size()) +
                                        " fields, found " + std::to_string(fields.size())});
      continue;
    }
    if (!schema.months.empty()) {
      int month = 0;
      try {
        month = parse_month(fields[*it]);
      } catch (const ValidationError& e) {
        res.errors.push_back({lineno, e.what()});
        continue;
      }
      if (!schema.months.contains(month)) {
        ++res.filtered;
        continue;
      }
    }
    if (is_missing(fields[ia]) || is_missing(fields[ib])) {
      ++res.dropped;
      continue;
    }
    const auto a = detail::parse_double(fields[ia]);
    const auto b = detail::parse_double(fields[ib]);
    if (!a || !b || !std::isfinite(*a) || !std::isfinite(*b)) {
      res.errors.push_back({lineno, "unparseable value in '" + schema.var_a + "' or '" +
                                        schema.var_b + "'"});
      continue;
    }
    res.cloud.push_back(std::vector<double>{*a, *b});
    ++res.kept;
  }
  if (res.kept == 0) res.warnings.push_back("no usable rows");
  return res;
}

IngestResult ingest_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return ingest_csv(in, schema);
}

// ---- comparison ----

namespace {

RankComparison compare_rank(const PersistenceDiagram& a, const PersistenceDiagram& b,
                            const RstConfig& rst_cfg, const CompareOptions& opts) {
  RankComparison rc;
  rc.rank = a.rank;
  rc.size_a = a.size();
  rc.size_b = b.size();
  rc.bottleneck = bottleneck(a, b);
  rc.wasserstein = wasserstein_power(a, b, opts.wasserstein_p);
  try {
    const RstFit fa = fit(transform(a), rst_cfg);
    const RstFit fb = fit(transform(b), rst_cfg);
    rc.rst = compare_fits(fa, fb, opts.alpha_level);
  } catch (const std::exception& e) {
    rc.rst_error = std::string("not fittable: ") + e.what();
  }
  return rc;
}

nlohmann::json rank_json(const RankComparison& rc) {
  nlohmann::json j;
  j["points_a"] = rc.size_a;
  j["points_b"] = rc.size_b;
  j["bottleneck"] = rc.bottleneck;
  j["wasserstein"] = rc.wasserstein;
  if (rc.rst) {
    j["rst"] = nlohmann::json::parse(to_json(*rc.rst));
  } else {
    j["rst"] = nullptr;
    j["rst_error"] = rc.rst_error;
  }
  return j;
}

}  // namespace

ComparisonReport compare_datasets(const PointCloud& a, const PointCloud& b, double bandwidth,
                                  const RstConfig& rst_cfg, const CompareOptions& opts) {
  if (a.dim() != 2 || b.dim() != 2) throw ValidationError("comparison needs 2-D clouds");
  if (a.size() == 0 || b.size() == 0) throw ValidationError("comparison needs nonempty clouds");
  rst_cfg.validate();
  PipelineOptions popts;
  popts.resolution = opts.resolution;
  popts.essential_policy =
      opts.drop_essential ? EssentialPolicy::Dropped : EssentialPolicy::DeathAtGridMin;
  const DiagramSet da = diagram_pipeline(a, bandwidth, popts);
  const DiagramSet db = diagram_pipeline(b, bandwidth, popts);

  ComparisonReport rep;
  rep.bandwidth = bandwidth;
  rep.wasserstein_p = opts.wasserstein_p;
  rep.h0 = compare_rank(da.h0, db.h0, rst_cfg, opts);
  rep.h1 = compare_rank(da.h1, db.h1, rst_cfg, opts);
  return rep;
}

std::string to_json(const ComparisonReport& report) {
  nlohmann::json j;
  j["bandwidth"] = report.bandwidth;
  j["wasserstein_p"] = report.wasserstein_p;
  j["H0"] = rank_json(report.h0);
  j["H1"] = rank_json(report.h1);
  return j.dump(2);
}

}  // namespace topocmp
