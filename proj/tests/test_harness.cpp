#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "topocmp/error.hpp"
#include "topocmp/harness.hpp"

using namespace topocmp;

namespace {

ExperimentConfig quick(std::size_t n, std::size_t reps, bool fit = false) {
  ExperimentConfig c;
  c.name = "one-circle";
  c.n = n;
  c.replicates = reps;
  c.seed = 12345;
  c.fit_rst = fit;
  c.resolution = 64;
  c.threads = 1;
  return c;
}

bool same_row(const SummaryRow& a, const SummaryRow& b) {
  auto same_stats = [](const SampleStats& x, const SampleStats& y) {
    return x.range.low == y.range.low && x.range.high == y.range.high && x.iqr.low == y.iqr.low &&
           x.iqr.high == y.iqr.high && x.median == y.median && x.std == y.std;
  };
  return same_stats(a.bottleneck, b.bottleneck) && same_stats(a.wasserstein, b.wasserstein) &&
         a.rst_proportions == b.rst_proportions && a.fit_failures == b.fit_failures &&
         a.replicates == b.replicates;
}

}  // namespace

TEST_CASE("summary statistics") {
  const std::vector<double> one{0.42};
  const auto s1 = summarize(one);
  CHECK(s1.range.low == 0.42);
  CHECK(s1.range.high == 0.42);
  CHECK(s1.iqr.low == 0.42);
  CHECK(s1.iqr.high == 0.42);
  CHECK(s1.std == 0.0);

  const std::vector<double> v{4, 1, 3, 2, 10};
  const auto s = summarize(v);
  CHECK(s.range.low == 1);
  CHECK(s.range.high == 10);
  CHECK(s.iqr.low == 2);  // type 7: position 0.25 * 4 = 1
  CHECK(s.iqr.high == 4);
  CHECK(s.median == 3);
  CHECK(s.std == doctest::Approx(std::sqrt(12.5)));
  const std::vector<double> w{1, 2, 3, 4};
  CHECK(summarize(w).iqr.low == 1.75);
  CHECK(summarize(w).iqr.high == 3.25);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), ValidationError);
}

TEST_CASE("aggregation agrees with a streaming recomputation") {
  const auto cfg = quick(80, 12);
  const auto results = run_replicates(cfg);
  const auto row = summarize_replicates(cfg, results);
  // Welford pass and a running min/max
  double mean = 0.0, m2 = 0.0, lo = INFINITY, hi = -INFINITY;
  std::size_t n = 0;
  for (const auto& r : results) {
    ++n;
    const double d = r.bottleneck - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (r.bottleneck - mean);
    lo = std::min(lo, r.bottleneck);
    hi = std::max(hi, r.bottleneck);
  }
  CHECK(std::abs(row.bottleneck.std - std::sqrt(m2 / static_cast<double>(n - 1))) < 1e-12);
  CHECK(row.bottleneck.range.low == lo);
  CHECK(row.bottleneck.range.high == hi);
  CHECK(row.bottleneck.range.low <= row.bottleneck.iqr.low);
  CHECK(row.bottleneck.iqr.low <= row.bottleneck.iqr.high);
  CHECK(row.bottleneck.iqr.high <= row.bottleneck.range.high);
  CHECK(row.wasserstein.iqr.high <= row.wasserstein.range.high);
}

TEST_CASE("single replicate gives a degenerate summary") {
  const auto row = run_experiment(quick(60, 1));
  CHECK(row.bottleneck.range.low == row.bottleneck.range.high);
  CHECK(row.bottleneck.iqr.low == row.bottleneck.range.low);
  CHECK(row.bottleneck.iqr.high == row.bottleneck.range.high);
  CHECK(row.bottleneck.std == 0.0);
  CHECK(row.wasserstein.std == 0.0);
}

TEST_CASE("identical seeds on both sides") {
  auto cfg = quick(100, 3, true);
  cfg.same_seed_both_sides = true;
  const auto row = run_experiment(cfg);
  CHECK(row.bottleneck.range.high == 0.0);
  CHECK(row.wasserstein.range.high == 0.0);
  REQUIRE(row.rst_proportions.size() == 4);
  CHECK(row.rst_proportions[0] == 1.0);
  CHECK(row.fit_failures == 0);
}

TEST_CASE("proportions and failures add up") {
  const auto cfg = quick(100, 4, true);
  const auto row = run_experiment(cfg);
  double total = static_cast<double>(row.fit_failures) / static_cast<double>(row.replicates);
  for (double p : row.rst_proportions) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("reproducible and identical in parallel and serial") {
  auto serial = quick(100, 6, true);
  auto parallel = serial;
  parallel.threads = 3;
  const auto a = run_replicates(serial);
  const auto b = run_replicates(parallel);
  const auto c = run_replicates(serial);
  REQUIRE(a.size() == b.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    CHECK(a[r].bottleneck == b[r].bottleneck);
    CHECK(a[r].wasserstein == b[r].wasserstein);
    CHECK(a[r].delta == b[r].delta);
    CHECK(a[r].se == b[r].se);
    CHECK(a[r].delta == c[r].delta);
  }
  CHECK(same_row(summarize_replicates(serial, a), summarize_replicates(parallel, b)));
}

TEST_CASE("replicate seeds are distinct") {
  const auto cfg = quick(10, 1);
  CHECK(replicate_seeds(cfg, 0).first != replicate_seeds(cfg, 0).second);
  CHECK(replicate_seeds(cfg, 0).first != replicate_seeds(cfg, 1).first);
  auto same = cfg;
  same.same_seed_both_sides = true;
  CHECK(replicate_seeds(same, 4).first == replicate_seeds(same, 4).second);
}

TEST_CASE("pooled tests pick the normality branch per parameter") {
  std::vector<ReplicateResult> results(150);
  for (std::size_t r = 0; r < results.size(); ++r) {
    auto& x = results[r];
    x.fit_ok = true;
    // parameter 1 roughly normal, parameter 2 heavy tailed
    const double u = (static_cast<double>(r) + 0.5) / 150.0;
    const double z = std::sqrt(2.0) * std::erfc(2 * u) * (u < 0.5 ? 1 : -1);
    x.delta = {std::sqrt(-2 * std::log(u)) * std::cos(6.283185307 * u * 37.0), std::pow(u, 8.0) * 1e3 + z};
    x.se = {1.0, 1.0};
  }
  results[7].fit_ok = false;
  const auto tests = pooled_tests(results, 2, 0.05);
  CHECK(tests.k.size() == 149);
  CHECK(tests.method[1] == "empirical");
}

TEST_CASE("suite: empty, ordered, partial failure") {
  CHECK(run_suite(std::span<const ExperimentConfig>{}).empty());
  std::vector<ExperimentConfig> cfgs{quick(50, 2), quick(90, 2)};
  cfgs[1].name = "second";
  auto bad = quick(50, 2);
  bad.bandwidth = -1.0;
  cfgs.push_back(bad);
  const auto rows = run_suite(cfgs);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].row->n == 50);
  CHECK(rows[1].row->name == "second");
  CHECK_FALSE(rows[2].row.has_value());
  CHECK_FALSE(rows[2].error.empty());

  std::ostringstream out;
  write_summary_csv(out, rows);
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  CHECK(header.rfind("example,n,replicates,bottleneck_min,bottleneck_max,bottleneck_q1,bottleneck_q3,bottleneck_std,wasserstein_min", 0) == 0);
  const auto columns = std::count(header.begin(), header.end(), ',');
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(std::count(line.begin(), line.end(), ',') >= columns);
  }
  CHECK(lines == 3);
}

TEST_CASE("config parsing") {
  std::istringstream in(R"(# defaults
replicates = 20
seed = 7
bandwidth = 0.1
K = 3

[experiment]
example = 2
n = [100, 300]

[experiment]
name = "custom"
shape1 = distinct
radii1 = [0.5, 1.2]
gap1 = 1.5
shape2 = concentric
radii2 = 1, 2
split2 = 0.3
n = 500
alpha_level = 0.01
)");
  const auto cfgs = parse_config(in);
  REQUIRE(cfgs.size() == 3);
  CHECK(cfgs[0].name == "different-radii");
  CHECK(cfgs[0].n == 100);
  CHECK(cfgs[1].n == 300);
  CHECK(cfgs[0].replicates == 20);
  CHECK(cfgs[0].seed == 7);
  CHECK(cfgs[0].shape2.radii == std::vector<double>{3.0});
  CHECK(cfgs[2].name == "custom");
  CHECK(cfgs[2].shape1.kind == ShapeKind::TwoDistinctCircles);
  CHECK(cfgs[2].shape1.gap == 1.5);
  CHECK(cfgs[2].shape2.kind == ShapeKind::TwoConcentricCircles);
  CHECK(cfgs[2].shape2.split == 0.3);
  CHECK(cfgs[2].alpha_level == 0.01);

  std::istringstream no_sections("n = 100\nreplicates = 5\n");
  CHECK(parse_config(no_sections).size() == 1);
  std::istringstream unknown("colour = red\n");
  CHECK_THROWS_AS(parse_config(unknown), ValidationError);
  std::istringstream bad_value("replicates = many\n");
  CHECK_THROWS_AS(parse_config(bad_value), ValidationError);
  std::istringstream invalid("bandwidth = 0\n");
  CHECK_THROWS_AS(parse_config(invalid), ValidationError);
}

TEST_CASE("ingestion drops missing values") {
  std::istringstream in("time,temp,humidity\n"
                        "2020-01-01 00:00,12.5,80\n"
                        "2020-01-01 00:10,12.4,\n"
                        "2020-01-01 00:20,12.3,79\n");
  const auto res = ingest_csv(in, {"time", "temp", "humidity", {}});
  CHECK(res.cloud.size() == 2);
  CHECK(res.kept == 2);
  CHECK(res.dropped == 1);
  CHECK(res.cloud.point(1)[0] == 12.3);
  CHECK(res.cloud.point(1)[1] == 79.0);
}

TEST_CASE("ingestion month filter") {
  std::istringstream in("time,temp,humidity\n"
                        "2020-01-15 00:00,10,80\n"
                        "2020-04-15 00:00,20,50\n"
                        "15/11/2020 00:00,12,70\n"
                        "2020-07-01 00:00,30,40\n"
                        "2020-03-31 23:50,NA,60\n");
  const auto cold = ingest_csv(in, {"time", "temp", "humidity", cold_months()});
  CHECK(cold.kept == 2);
  CHECK(cold.filtered == 2);
  CHECK(cold.dropped == 1);
  std::istringstream again(R"(time,temp,humidity
2020-01-15 00:00,10,80
2020-04-15 00:00,20,50
)");
  const auto hot = ingest_csv(again, {"time", "temp", "humidity", hot_months()});
  CHECK(hot.kept == 1);
  CHECK(hot.cloud.point(0)[0] == 20.0);
  CHECK(parse_month("2021/12/01") == 12);
  CHECK_THROWS_AS(parse_month("yesterday"), ValidationError);
}

TEST_CASE("ingestion errors") {
  std::istringstream missing_col("time,temp\n2020-01-01,3\n");
  CHECK_THROWS_AS(ingest_csv(missing_col, {"time", "temp", "humidity", {}}), SchemaError);

  std::istringstream bad_rows("time,temp,humidity\n"
                              "2020-01-01,1,2\n"
                              "2020-01-01,abc,2\n"
                              "2020-01-01,1\n"
                              "2020-01-01,3,4\n");
  const auto res = ingest_csv(bad_rows, {"time", "temp", "humidity", {}});
  CHECK(res.kept == 2);
  REQUIRE(res.errors.size() == 2);
  CHECK(res.errors[0].line == 3);
  CHECK(res.errors[1].line == 4);

  std::istringstream empty("");
  const auto e = ingest_csv(empty, {"time", "temp", "humidity", {}});
  CHECK(e.cloud.size() == 0);
  CHECK_FALSE(e.warnings.empty());
}

TEST_CASE("compare identical datasets") {
  const auto cloud = sample_shape(ShapeSpec::circle(1.0), 400, 6);
  CompareOptions opts;
  opts.resolution = 64;
  const auto rep = compare_datasets(cloud, cloud, 0.1, RstConfig{}, opts);
  CHECK(rep.h0.bottleneck == 0.0);
  CHECK(rep.h0.wasserstein == 0.0);
  CHECK(rep.h1.bottleneck == 0.0);
  REQUIRE(rep.h0.rst.has_value());
  CHECK(rep.h0.rst->significant_count == 0);
  CHECK(rep.h0.rst->decision() == "No");

  const auto j = nlohmann::json::parse(to_json(rep));
  CHECK(j["H0"]["rst"]["k"] == 0);
  CHECK(j["H0"]["bottleneck"] == 0.0);
  CHECK(j.contains("H1"));
}

TEST_CASE("compare reports an unfittable H1 diagram") {
  // A single circle has one H1 point, too few for K = 3.
  const auto a = sample_shape(ShapeSpec::circle(1.0), 2000, 1);
  const auto b = sample_shape(ShapeSpec::circle(1.0), 2000, 2);
  CompareOptions opts;
  opts.resolution = 64;
  const auto rep = compare_datasets(a, b, 0.1, RstConfig{}, opts);
  if (rep.h1.size_a <= 4 || rep.h1.size_b <= 4) {
    CHECK_FALSE(rep.h1.rst.has_value());
    CHECK(rep.h1.rst_error.rfind("not fittable", 0) == 0);
    const auto j = nlohmann::json::parse(to_json(rep));
    CHECK(j["H1"]["rst"].is_null());
  }
  CHECK_THROWS_AS(compare_datasets(PointCloud(2), b, 0.1, RstConfig{}), ValidationError);
}

TEST_CASE("different radii are far apart in bottleneck distance") {
  const auto a = sample_shape(ShapeSpec::circle(1.0), 1000, 21);
  const auto b = sample_shape(ShapeSpec::circle(3.0), 1000, 22);
  const auto rep = compare_datasets(a, b, 0.1, RstConfig{});
  CHECK(rep.h0.bottleneck >= 0.3);
  CHECK(rep.h0.bottleneck <= 0.5);
}
