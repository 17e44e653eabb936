// Command-line front door: estimate active subspaces from gradient
// samples (built-in models or external CSVs), bootstrap the estimates,
// evaluate the theoretical bounds, and run the benchmark experiments.

#include <cstdio>
#include <exception>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "actsub/actsub.hpp"

namespace {

using actsub::json;

struct GlobalOptions {
  int threads = 0;
  bool json_errors = false;
};

// exit codes: 0 ok, 1 usage / invalid parameters, 2 malformed CSV
constexpr int kExitUsage = 1;
constexpr int kExitBadCsv = 2;

void report_error(const GlobalOptions& opts, const std::string& message, int code) {
  if (opts.json_errors) {
    json j{{"error", message}, {"code", code}};
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << "error: " << message << "\n";
  }
}

struct SampleArgs {
  std::string samples_csv;
  std::string sidecar;
  std::string model_json;
  std::size_t n = 0;
  std::int64_t seed = 0;
  double fd_step = 0.0;

  void attach(CLI::App& cmd) {
    cmd.add_option("--samples", samples_csv, "gradient CSV (N rows x m columns, optional header)");
    cmd.add_option("--sidecar", sidecar, "JSON sidecar with the CSV's provenance");
    cmd.add_option("--model", model_json, "model description JSON file");
    cmd.add_option("--n", n, "number of gradient samples to draw (with --model)");
    cmd.add_option("--seed", seed, "random seed");
    cmd.add_option("--fd", fd_step, "use forward differences with this step instead of exact gradients");
  }

  actsub::GradientSampleSet load() const {
    if (!samples_csv.empty()) return actsub::load_gradient_samples(samples_csv, sidecar);
    if (model_json.empty())
      throw CLI::ValidationError("provide either --samples or --model");
    if (n == 0) throw CLI::ValidationError("--model requires --n (sample count)");
    auto model = actsub::model_from_json_file(model_json);
    const auto source = fd_step > 0.0 ? actsub::GradientSource::forward_difference(fd_step)
                                      : actsub::GradientSource::exact();
    return actsub::sample_gradients(*model, n, seed, source);
  }
};

int cmd_estimate(const SampleArgs& sample_args, const std::string& out,
                 const std::string& csv_out, std::size_t top_k, bool use_svd) {
  const auto samples = sample_args.load();
  actsub::ActiveSubspaceEstimate est;
  if (use_svd) {
    est.c_hat = actsub::estimate_C(samples);
    auto [values, vectors] = actsub::estimate_via_svd(samples);
    est.eigenvalues = std::move(values);
    est.eigenvectors = std::move(vectors);
    est.provenance = samples.provenance();
    est.provenance["route"] = "svd";
  } else {
    est = actsub::make_estimate(samples);
    est.provenance["route"] = "eig";
  }
  if (!out.empty()) actsub::write_text_file(out, est.to_json().dump(2) + "\n");
  if (!csv_out.empty()) est.write_eigenvalues_csv(csv_out);
  const std::size_t show = std::min<std::size_t>(top_k, est.eigenvalues.size());
  for (std::size_t i = 0; i < show; ++i)
    std::printf("lambda_%zu = %.12g\n", i + 1, est.eigenvalues[i]);
  return 0;
}

int cmd_bootstrap(const SampleArgs& sample_args, std::size_t k, std::size_t n_boot,
                  std::int64_t boot_seed, const std::string& out_prefix) {
  const auto samples = sample_args.load();
  const auto summary = actsub::bootstrap(samples, k, n_boot, boot_seed);
  if (!out_prefix.empty()) {
    actsub::write_text_file(out_prefix + "_bootstrap.json", summary.to_json().dump(2) + "\n");
    summary.write_eigenvalue_csv(out_prefix + "_eigs.csv");
    summary.write_subspace_csv(out_prefix + "_subspace.csv");
  }
  const auto suggestion = actsub::suggest_dimension(summary);
  std::printf("suggested n = %zu (gap_found = %s)\n", suggestion.n,
              suggestion.gap_found ? "true" : "false");
  return 0;
}

int cmd_bounds(const std::string& input_path, std::optional<std::size_t> k,
               std::optional<std::size_t> m, std::optional<double> alpha,
               const std::string& out) {
  if (!input_path.empty()) {
    const json report = actsub::bounds_report(json::parse(actsub::read_text_file(input_path)));
    const std::string text = report.dump(2) + "\n";
    if (out.empty())
      std::cout << text;
    else
      actsub::write_text_file(out, text);
    return 0;
  }
  if (k && m && alpha) {
    std::printf("N = %zu\n", actsub::heuristic_sample_count(*k, *m, *alpha));
    return 0;
  }
  throw CLI::ValidationError("bounds needs --input, or all of --k/--m/--alpha");
}

int cmd_bench(const std::string& exp, int case_id, double fd_step, double beta, double alpha,
              std::size_t k, std::int64_t seed, std::size_t n_boot, std::size_t grid,
              std::size_t m, std::string out_prefix) {
  actsub::ExperimentReport report;
  if (exp == "quadratic") {
    const auto source = fd_step > 0.0 ? actsub::GradientSource::forward_difference(fd_step)
                                      : actsub::GradientSource::exact();
    report = actsub::run_quadratic_experiment(case_id, source, alpha, k, seed, n_boot);
    if (out_prefix.empty()) out_prefix = "quadratic";
  } else if (exp == "elliptic") {
    const auto model = actsub::build_kl(beta, m == 0 ? 100 : m, grid);
    report = actsub::run_elliptic_experiment(model, alpha, k, seed, n_boot);
    if (out_prefix.empty()) out_prefix = "elliptic";
    model.write_kl_spectrum_csv(out_prefix + "_kl.csv");
  } else {
    throw CLI::ValidationError("--exp must be 'quadratic' or 'elliptic'");
  }
  report.write_files(out_prefix);
  std::printf("wrote %s_report.json, %s_eigs.csv, %s_subspace.csv\n", out_prefix.c_str(),
              out_prefix.c_str(), out_prefix.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo estimation of active subspaces from gradient samples"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  GlobalOptions global;
  app.add_option("--threads", global.threads, "cap worker threads (results do not depend on it)");
  app.add_flag("--json-errors", global.json_errors, "emit errors as single-line JSON on stderr");

  SampleArgs est_args;
  std::string est_out, est_csv;
  std::size_t est_top_k = 10;
  bool est_svd = false;
  auto* estimate = app.add_subcommand("estimate", "estimate eigenvalues and eigenvectors of C");
  est_args.attach(*estimate);
  estimate->add_option("--out", est_out, "write the estimate JSON here");
  estimate->add_option("--csv", est_csv, "also write the eigenvalues as (index, lambda) CSV");
  estimate->add_option("--k", est_top_k, "how many leading eigenvalues to print");
  estimate->add_flag("--svd", est_svd, "use the SVD route instead of the eigendecomposition");

  SampleArgs boot_args;
  std::size_t boot_k = 6, boot_nboot = 1000;
  std::int64_t boot_seed = 0;
  bool boot_seed_set = false;
  std::string boot_out;
  auto* boot = app.add_subcommand("bootstrap", "bootstrap intervals and subspace stability");
  boot_args.attach(*boot);
  boot->add_option("--k", boot_k, "number of eigenvalues of interest")->capture_default_str();
  boot->add_option("--nboot", boot_nboot, "number of bootstrap replicates")->capture_default_str();
  boot->add_option("--boot-seed", boot_seed, "separate seed for the resampling streams")
      ->each([&](const std::string&) { boot_seed_set = true; });
  boot->add_option("--out", boot_out, "prefix for <prefix>_bootstrap.json and the two CSVs");

  std::string bounds_input, bounds_out;
  std::optional<std::size_t> bounds_k, bounds_m;
  std::optional<double> bounds_alpha;
  auto* bounds = app.add_subcommand("bounds", "evaluate the theoretical bounds");
  bounds->add_option("--input", bounds_input, "BoundsInput JSON file");
  bounds->add_option("--out", bounds_out, "write the report here instead of stdout");
  bounds->add_option("--k", bounds_k, "eigenvalues of interest (heuristic N)");
  bounds->add_option("--m", bounds_m, "input dimension (heuristic N)");
  bounds->add_option("--alpha", bounds_alpha, "multiplier between 2 and 10 (heuristic N)");

  std::string bench_exp = "quadratic", bench_prefix;
  int bench_case = 1;
  double bench_fd = 0.0, bench_beta = 1.0, bench_alpha = 2.0;
  std::size_t bench_k = 6, bench_nboot = 1000, bench_grid = 512, bench_m = 0;
  std::int64_t bench_seed = 0;
  auto* bench = app.add_subcommand("bench", "run a benchmark experiment and emit figure data");
  bench->add_option("--exp", bench_exp, "quadratic | elliptic")->capture_default_str();
  bench->add_option("--case", bench_case, "quadratic case 1, 2, or 3")->capture_default_str();
  bench->add_option("--fd", bench_fd, "forward-difference step (quadratic; 0 = exact gradients)");
  bench->add_option("--beta", bench_beta, "correlation length (elliptic)")->capture_default_str();
  bench->add_option("--alpha", bench_alpha, "sample-count multiplier")->capture_default_str();
  bench->add_option("--k", bench_k, "eigenvalues of interest")->capture_default_str();
  bench->add_option("--seed", bench_seed, "random seed")->capture_default_str();
  bench->add_option("--nboot", bench_nboot, "bootstrap replicates")->capture_default_str();
  bench->add_option("--grid", bench_grid, "elliptic grid cells")->capture_default_str();
  bench->add_option("--m", bench_m, "elliptic KL truncation (default 100)");
  bench->add_option("--out-prefix", bench_prefix, "output file prefix (default: experiment name)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    report_error(global, e.what(), kExitUsage);
    std::cerr << app.help() << "\n";
    return kExitUsage;
  }

  actsub::set_thread_cap(global.threads);

  try {
    if (estimate->parsed()) return cmd_estimate(est_args, est_out, est_csv, est_top_k, est_svd);
    if (boot->parsed())
      return cmd_bootstrap(boot_args, boot_k, boot_nboot,
                           boot_seed_set ? boot_seed : boot_args.seed, boot_out);
    if (bounds->parsed()) return cmd_bounds(bounds_input, bounds_k, bounds_m, bounds_alpha,
                                            bounds_out);
    if (bench->parsed())
      return cmd_bench(bench_exp, bench_case, bench_fd, bench_beta, bench_alpha, bench_k,
                       bench_seed, bench_nboot, bench_grid, bench_m, bench_prefix);
  } catch (const CLI::ValidationError& e) {
    report_error(global, e.what(), kExitUsage);
    return kExitUsage;
  } catch (const actsub::CsvError& e) {
    report_error(global, e.what(), kExitBadCsv);
    return kExitBadCsv;
  } catch (const json::exception& e) {
    report_error(global, std::string("invalid JSON: ") + e.what(), kExitUsage);
    return kExitUsage;
  } catch (const std::exception& e) {
    report_error(global, e.what(), kExitUsage);
    return kExitUsage;
  }
  return kExitUsage;
}
