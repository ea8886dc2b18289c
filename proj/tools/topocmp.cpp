#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "topocmp/distances.hpp"
#include "topocmp/error.hpp"
#include "topocmp/harness.hpp"
#include "topocmp/persistence.hpp"
#include "topocmp/rst.hpp"
#include "topocmp/samplers.hpp"

using namespace topocmp;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  return out;
}

HomologyRank rank_from(int r) {
  if (r != 0 && r != 1) throw ValidationError("rank must be 0 or 1");
  return r == 0 ? HomologyRank::H0 : HomologyRank::H1;
}

PointCloud load_cloud(const std::string& path, const CsvSchema& schema) {
  if (schema.var_a.empty()) return read_cloud_csv(path);
  IngestResult res = ingest_csv(path, schema);
  std::cerr << path << ": kept " << res.kept << ", dropped " << res.dropped << " (missing), "
            << res.filtered << " outside months, " << res.errors.size() << " bad rows\n";
  for (const auto& e : res.errors) std::cerr << "  line " << e.line << ": " << e.message << '\n';
  for (const auto& w : res.warnings) std::cerr << "  warning: " << w << '\n';
  return std::move(res.cloud);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sample comparison of point clouds through persistence diagrams"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte Carlo experiments from a config file");
  std::string sim_config, sim_out;
  std::size_t sim_threads = 0;
  std::size_t sim_replicates = 0;
  sim->add_option("--config", sim_config, "key = value experiment file")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "summary table (CSV)")->required();
  sim->add_option("--threads", sim_threads, "worker threads (0 = all cores)");
  sim->add_option("--replicates", sim_replicates, "override the replicate count");

  // compare
  auto* cmp = app.add_subcommand("compare", "Compare two point clouds (H0 and H1)");
  std::string cmp_a, cmp_b, cmp_out, time_col, var_a, var_b, months;
  double cmp_bw = 0.1, cmp_p = 2.0;
  std::size_t cmp_k = 3, cmp_res = kDefaultGridResolution;
  cmp->add_option("--a", cmp_a, "first cloud (CSV)")->required()->check(CLI::ExistingFile);
  cmp->add_option("--b", cmp_b, "second cloud (CSV)")->required()->check(CLI::ExistingFile);
  cmp->add_option("--bandwidth", cmp_bw, "KDE bandwidth")->capture_default_str();
  cmp->add_option("--out", cmp_out, "report (JSON); stdout when omitted");
  cmp->add_option("--k", cmp_k, "RST cluster size")->capture_default_str();
  cmp->add_option("--resolution", cmp_res, "grid nodes per axis")->capture_default_str();
  cmp->add_option("--wasserstein-p", cmp_p, "Wasserstein power, reported as W_p^p")->capture_default_str();
  cmp->add_option("--var-a", var_a, "column for the first coordinate (table input)");
  cmp->add_option("--var-b", var_b, "column for the second coordinate (table input)");
  cmp->add_option("--time-column", time_col, "timestamp column (table input)");
  cmp->add_option("--months", months, "month filter for table input")->check(CLI::IsMember({"cold", "hot"}));

  // distance
  auto* dist = app.add_subcommand("distance", "Distance between two diagram files");
  std::string da, db, metric = "bottleneck";
  double dist_p = 1.0;
  int dist_rank = 0;
  bool dist_power = false;
  dist->add_option("--a", da, "first diagram (rank,birth,death CSV)")->required()->check(CLI::ExistingFile);
  dist->add_option("--b", db, "second diagram")->required()->check(CLI::ExistingFile);
  dist->add_option("--metric", metric)->check(CLI::IsMember({"bottleneck", "wasserstein"}))->capture_default_str();
  dist->add_option("--p", dist_p, "Wasserstein order")->capture_default_str();
  dist->add_option("--rank", dist_rank, "homology rank to read")->capture_default_str();
  dist->add_flag("--power", dist_power, "print W_p^p instead of W_p");

  // fit-rst
  auto* fitc = app.add_subcommand("fit-rst", "Fit the RST model to a diagram");
  std::string fit_diagram;
  std::size_t fit_k = 3;
  double alpha_max = 3.0;
  int fit_rank = 0;
  fitc->add_option("--diagram", fit_diagram, "diagram CSV")->required()->check(CLI::ExistingFile);
  fitc->add_option("--k", fit_k, "cluster size")->capture_default_str();
  fitc->add_option("--alpha-max", alpha_max, "upper end of the alpha search")->capture_default_str();
  fitc->add_option("--rank", fit_rank, "homology rank to read")->capture_default_str();

  // sample
  auto* smp = app.add_subcommand("sample", "Draw a point cloud from one side of a built-in example");
  int example = 1, side = 1;
  std::size_t smp_n = 1000;
  std::uint64_t smp_seed = 1;
  std::string smp_out;
  smp->add_option("--example", example, "example number 1-7")->capture_default_str();
  smp->add_option("--side", side, "1 or 2")->check(CLI::Range(1, 2))->capture_default_str();
  smp->add_option("--n", smp_n)->capture_default_str();
  smp->add_option("--seed", smp_seed)->capture_default_str();
  smp->add_option("--out", smp_out, "points CSV")->required();

  // diagram
  auto* dg = app.add_subcommand("diagram", "Persistence diagrams of a point cloud");
  std::string dg_cloud, dg_out;
  double dg_bw = 0.1;
  std::size_t dg_res = kDefaultGridResolution;
  dg->add_option("--cloud", dg_cloud, "points CSV")->required()->check(CLI::ExistingFile);
  dg->add_option("--bandwidth", dg_bw)->capture_default_str();
  dg->add_option("--resolution", dg_res)->capture_default_str();
  dg->add_option("--out", dg_out, "diagram CSV (H0 and H1)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      auto configs = parse_config_file(sim_config);
      for (auto& c : configs) {
        if (sim_threads) c.threads = sim_threads;
        if (sim_replicates) c.replicates = sim_replicates;
      }
      const auto rows = run_suite(configs);
      auto out = open_out(sim_out);
      write_summary_csv(out, rows);
      int failed = 0;
      for (const auto& r : rows)
        if (!r.row) {
          std::cerr << r.config.name << " n=" << r.config.n << ": " << r.error << '\n';
          ++failed;
        }
      return failed ? 2 : 0;
    }

    if (*cmp) {
      CsvSchema schema{time_col, var_a, var_b, {}};
      if (var_a.empty() != var_b.empty()) throw ValidationError("--var-a and --var-b go together");
      if (months == "cold") schema.months = cold_months();
      if (months == "hot") schema.months = hot_months();
      const PointCloud a = load_cloud(cmp_a, schema);
      const PointCloud b = load_cloud(cmp_b, schema);
      RstConfig rst;
      rst.K = cmp_k;
      CompareOptions opts;
      opts.resolution = cmp_res;
      opts.wasserstein_p = cmp_p;
      const auto report = compare_datasets(a, b, cmp_bw, rst, opts);
      if (cmp_out.empty()) {
        std::cout << to_json(report) << '\n';
      } else {
        open_out(cmp_out) << to_json(report) << '\n';
      }
      return 0;
    }

    if (*dist) {
      const HomologyRank r = rank_from(dist_rank);
      const auto a = read_diagram_csv(da, r);
      const auto b = read_diagram_csv(db, r);
      double v = 0.0;
      if (metric == "bottleneck") v = bottleneck(a, b);
      else v = dist_power ? wasserstein_power(a, b, dist_p) : wasserstein(a, b, dist_p);
      std::printf("%.17g\n", v);
      return 0;
    }

    if (*fitc) {
      RstConfig cfg;
      cfg.K = fit_k;
      cfg.alpha_max = alpha_max;
      const auto f = fit(transform(read_diagram_csv(fit_diagram, rank_from(fit_rank))), cfg);
      nlohmann::json j{{"alpha", f.alpha}, {"theta", f.theta}, {"variances", f.variances},
                       {"log_pl", f.log_pl}, {"K", f.K}, {"aic", f.aic()}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*smp) {
      const auto pair = example_pair(example);
      auto out = open_out(smp_out);
      write_cloud_csv(out, sample_shape(side == 1 ? pair.first : pair.second, smp_n, smp_seed));
      return 0;
    }

    if (*dg) {
      PipelineOptions opts;
      opts.resolution = dg_res;
      auto out = open_out(dg_out);
      write_diagrams_csv(out, diagram_pipeline(read_cloud_csv(dg_cloud), dg_bw, opts));
      return 0;
    }
  } catch (const FitFailedError& e) {
    std::cerr << "error: " << e.what() << " (best log_pl " << e.log_pl() << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
