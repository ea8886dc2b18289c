#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topocmp/distances.hpp"
#include "topocmp/inference.hpp"
#include "topocmp/point_cloud.hpp"
#include "topocmp/rst.hpp"
#include "topocmp/samplers.hpp"

namespace topocmp {

struct ExperimentConfig {
  std::string name = "experiment";
  ShapeSpec shape1 = ShapeSpec::circle(1.0);
  ShapeSpec shape2 = ShapeSpec::circle(1.0);
  std::size_t n = 100;
  std::size_t replicates = 1000;
  double bandwidth = 0.1;
  std::uint64_t seed = 1;
  RstConfig rst;
  double alpha_level = 0.05;
  std::size_t resolution = kDefaultGridResolution;
  // Power of the Wasserstein column, reported as W_p^p (no root).
  double wasserstein_p = 2.0;
  // Remove the essential H0 class before computing distances.
  bool drop_essential = false;
  // Both sides of replicate r use the same sampling seed.
  bool same_seed_both_sides = false;
  bool fit_rst = true;
  // Worker threads for replicates; 0 = hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
};

// Seeds of the two clouds of replicate r.
std::pair<std::uint64_t, std::uint64_t> replicate_seeds(const ExperimentConfig& cfg,
                                                        std::size_t replicate);

struct ReplicateResult {
  double bottleneck = 0.0;
  double wasserstein = 0.0;
  std::size_t h0_size1 = 0, h0_size2 = 0;
  bool fit_ok = false;
  std::string fit_error;
  std::vector<double> delta;  // theta1 - theta2
  std::vector<double> se;
};

// One replicate, start to finish; pure in (cfg, replicate).
ReplicateResult run_replicate(const ExperimentConfig& cfg, std::size_t replicate);

// Sample summary; quantiles use linear interpolation between order statistics
// (type 7), std divides by n - 1 and is 0 for a single value.
struct SampleStats {
  Range range;
  Range iqr;
  double median = 0.0;
  double std = 0.0;
};

SampleStats summarize(std::span<const double> values);
double quantile(std::span<const double> sorted, double q);

struct SummaryRow {
  std::string name;
  std::size_t n = 0;
  std::size_t replicates = 0;
  SampleStats bottleneck;
  SampleStats wasserstein;
  // NaN when a Wasserstein endpoint is zero.
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  // Proportion of replicates with k = 0..K significant parameters, over all
  // replicates; fit failures make up the rest.
  std::vector<double> rst_proportions;
  std::size_t fit_failures = 0;
  // How each parameter's p-values were obtained: "z" or "empirical".
  std::vector<std::string> pvalue_method;
};

// Per-replicate p-values for the pooled Delta_j: the z-test when the pool
// passes the KS normality check, else the empirical density-matched p-value
// against the pool recentred at its median. Pools under 20 use the z-test, pools
// under 100 that fail normality as well.
struct PooledTests {
  std::vector<std::size_t> k;  // significant count per successful replicate
  std::vector<std::string> method;
};
PooledTests pooled_tests(std::span<const ReplicateResult> results, std::size_t K,
                         double alpha_level);

// Aggregation of finished replicates, in replicate order.
SummaryRow summarize_replicates(const ExperimentConfig& cfg,
                                std::span<const ReplicateResult> results);

std::vector<ReplicateResult> run_replicates(const ExperimentConfig& cfg);
SummaryRow run_experiment(const ExperimentConfig& cfg);

struct SuiteRow {
  ExperimentConfig config;
  std::optional<SummaryRow> row;
  std::string error;
};
std::vector<SuiteRow> run_suite(std::span<const ExperimentConfig> configs);

// CSV in the published column order, one row per suite entry. Failed rows keep
// their name and n and carry the message in the last column.
void write_summary_csv(std::ostream& out, std::span<const SuiteRow> rows);

// Plain key = value configuration. Keys before the first [section] are
// defaults; every [section] (or [[experiment]]) adds experiments. An `n` list
// expands into one experiment per size. Unknown keys are a ValidationError.
std::vector<ExperimentConfig> parse_config(std::istream& in);
std::vector<ExperimentConfig> parse_config_file(const std::string& path);

// ---- Dataset ingestion ----

struct CsvSchema {
  std::string time_column;  // empty: no time column
  std::string var_a;
  std::string var_b;
  // Months (1-12) to keep; empty keeps every row. Needs time_column.
  std::set<int> months;
};

// November to March, and April to October.
std::set<int> cold_months();
std::set<int> hot_months();

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct IngestResult {
  PointCloud cloud{2};
  std::size_t kept = 0;
  std::size_t dropped = 0;       // missing value in the selected pair
  std::size_t filtered = 0;      // outside the month filter
  std::vector<RowError> errors;  // unparseable rows, skipped
  std::vector<std::string> warnings;
};

// Month of a timestamp: "YYYY-MM-DD[...]", "YYYY/MM/DD[...]" or "DD/MM/YYYY[...]".
int parse_month(const std::string& timestamp);

IngestResult ingest_csv(std::istream& in, const CsvSchema& schema);
IngestResult ingest_csv(const std::string& path, const CsvSchema& schema);

// ---- Two-dataset comparison ----

struct RankComparison {
  HomologyRank rank = HomologyRank::H0;
  std::size_t size_a = 0, size_b = 0;
  double bottleneck = 0.0;
  double wasserstein = 0.0;
  std::optional<TestReport> rst;
  std::string rst_error;  // "not fittable: ..." when rst is empty
};

struct ComparisonReport {
  double bandwidth = 0.0;
  double wasserstein_p = 2.0;
  RankComparison h0;
  RankComparison h1;
};

struct CompareOptions {
  std::size_t resolution = kDefaultGridResolution;
  double wasserstein_p = 2.0;
  double alpha_level = 0.05;
  bool drop_essential = false;
};

ComparisonReport compare_datasets(const PointCloud& a, const PointCloud& b, double bandwidth,
                                  const RstConfig& rst_cfg, const CompareOptions& opts = {});

std::string to_json(const ComparisonReport& report);

}  // namespace topocmp
