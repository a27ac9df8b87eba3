#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "hidalgo/error.hpp"
#include "hidalgo/evaluation.hpp"
#include "hidalgo/geometry.hpp"
#include "hidalgo/io.hpp"
#include "hidalgo/model.hpp"
#include "hidalgo/sampler.hpp"
#include "hidalgo/synth.hpp"
#include "hidalgo/twonn.hpp"
#include "json.hpp"

namespace hidalgo::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_of_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

/// Everything needed to reproduce a run; attached to every output file.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  json config = json::object();
  json inputs = json::array();
  std::optional<std::uint64_t> seed;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void add_input(const std::string& path) {
    if (!path.empty()) inputs.push_back({{"path", path}, {"sha256", sha256_of_file(path)}});
  }
  json to_json() const {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json j = {{"tool", "hidalgo"}, {"version", kVersion}, {"command", command}, {"args", args},
              {"config", config},  {"inputs", inputs},   {"elapsed_seconds", elapsed}};
    if (seed) j["seed"] = *seed;
    return j;
  }
  std::string csv_header() const { return "# manifest: " + to_json().dump() + "\n"; }
};

struct DataOptions {
  std::string input;
  std::string distances;
  std::string metric = "euclidean";
  bool independent = false;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  auto* in = cmd->add_option("--input", d.input, "Coordinate CSV, one point per row");
  auto* dm = cmd->add_option("--distances", d.distances, "Square distance-matrix CSV");
  in->excludes(dm);
  cmd->add_option("--metric", d.metric,
                  "euclidean | normalized | periodic:<p1>[,<p2>...] | none (with --distances)");
  cmd->add_flag("--independent", d.independent,
                "Restrict to points sharing no first or second neighbors");
}

struct LoadedData {
  NeighborData nd;
  /// Original indices of the analyzed points.
  std::vector<std::size_t> index;
};

LoadedData load_data(const DataOptions& opt, std::size_t q, RunManifest& manifest) {
  if (opt.input.empty() == opt.distances.empty())
    throw CLI::ValidationError("exactly one of --input or --distances is required");
  q = std::max<std::size_t>(q, 2);
  LoadedData out;
  if (!opt.distances.empty()) {
    if (opt.metric != "none" && opt.metric != "euclidean")
      throw CLI::ValidationError("--metric must be 'none' when --distances is given");
    manifest.add_input(opt.distances);
    const DistanceMatrix dm = io::read_distance_matrix(opt.distances);
    out.nd = build_neighbor_data(dm, q);
    if (opt.independent) {
      out.index = independent_subset(out.nd);
      out.nd = restrict_to_subset(dm, out.nd, out.index, q);
    }
  } else {
    if (opt.metric == "none") throw CLI::ValidationError("--metric none requires --distances");
    Metric metric;
    try {
      metric = Metric::parse(opt.metric);
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError(e.what());
    }
    manifest.add_input(opt.input);
    const PointCloud cloud = io::read_point_cloud(opt.input);
    out.nd = build_neighbor_data(cloud, metric, q);
    if (opt.independent) {
      out.index = independent_subset(out.nd);
      out.nd = restrict_to_subset(cloud, metric, out.nd, out.index, q);
    }
  }
  if (!opt.independent) {
    out.index.resize(out.nd.n_points());
    for (std::size_t i = 0; i < out.index.size(); ++i) out.index[i] = i;
  }
  return out;
}

std::size_t default_threads() {
  if (const char* env = std::getenv("HIDALGO_THREADS")) {
    try {
      return static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception&) {
      return 0;
    }
  }
  return 0;
}

void add_config_options(CLI::App* cmd, HidalgoConfig& cfg, bool with_k) {
  if (with_k) cmd->add_option("--k", cfg.K, "Number of manifolds")->capture_default_str();
  cmd->add_option("--q", cfg.q, "Neighborhood homogeneity range")->capture_default_str();
  cmd->add_option("--xi", cfg.xi, "Neighborhood homogeneity level, in [0.5, 1)")->capture_default_str();
  cmd->add_option("--sweeps", cfg.n_sweeps, "Gibbs sweeps per chain")->capture_default_str();
  cmd->add_option("--chains", cfg.n_chains, "Independent chains (best one is kept)")->capture_default_str();
  cmd->add_option("--burn-in", cfg.burn_in_fraction, "Fraction of sweeps discarded")->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "Base RNG seed")->capture_default_str();
  cmd->add_option("--prior-a", cfg.prior_a, "Gamma shape of the d prior")->capture_default_str();
  cmd->add_option("--prior-b", cfg.prior_b, "Gamma rate of the d prior")->capture_default_str();
  cmd->add_option("--prior-c", cfg.prior_c, "Dirichlet concentration of the p prior")->capture_default_str();
  cmd->add_flag("--random-scan", cfg.random_scan, "Random-scan instead of systematic-scan Gibbs");
  cmd->add_option("--threads", cfg.threads, "Worker threads for chains (0 = all cores; env HIDALGO_THREADS)");
}

json config_json(const HidalgoConfig& c) {
  return {{"K", c.K},
          {"q", c.q},
          {"xi", c.xi},
          {"prior_a", c.prior_a},
          {"prior_b", c.prior_b},
          {"prior_c", c.prior_c},
          {"n_sweeps", c.n_sweeps},
          {"n_chains", c.n_chains},
          {"burn_in_fraction", c.burn_in_fraction},
          {"seed", c.seed},
          {"random_scan", c.random_scan}};
}

void validate_config(const HidalgoConfig& cfg) {
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError(e.what());
  }
}

json fit_json(const FitResult& r) {
  std::size_t uncertain = 0;
  for (int z : r.hard_z) uncertain += z == kUncertain;
  return {{"K", r.K},
          {"n_points", r.n_points},
          {"d_mean", r.d_mean},
          {"d_sd", r.d_sd},
          {"p_mean", r.p_mean},
          {"avg_logpost", r.avg_logpost},
          {"max_logpost", r.max_logpost},
          {"best_chain", r.best_chain},
          {"chain_max_logpost", r.chain_max_logpost},
          {"n_retained", r.best_trace.retained()},
          {"n_uncertain", uncertain},
          {"flagged_sweeps", r.best_trace.flagged_sweeps}};
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << std::setprecision(17);
  return f;
}

void write_json(const fs::path& path, const json& j) { open_output(path) << j.dump(2) << "\n"; }

void write_assignments(const fs::path& path, const FitResult& r, const std::vector<std::size_t>& index,
                       const RunManifest& manifest) {
  auto f = open_output(path);
  f << manifest.csv_header() << "index,label";
  for (std::size_t k = 0; k < r.K; ++k) f << ",pi_" << k + 1;
  f << "\n";
  for (std::size_t i = 0; i < r.n_points; ++i) {
    f << index[i] << ",";
    if (r.hard_z[i] == kUncertain)
      f << "uncertain";
    else
      f << r.hard_z[i] + 1;
    for (std::size_t k = 0; k < r.K; ++k) f << "," << r.pi_at(i, k);
    f << "\n";
  }
}

void write_trace(const fs::path& path, const ChainTrace& t, const RunManifest& manifest) {
  auto f = open_output(path);
  f << manifest.csv_header() << "sweep,logpost";
  for (std::size_t k = 0; k < t.K; ++k) f << ",d_" << k + 1;
  for (std::size_t k = 0; k < t.K; ++k) f << ",p_" << k + 1;
  f << "\n";
  for (std::size_t s = 0; s < t.n_sweeps; ++s) {
    f << s << "," << t.logpost_samples[s];
    for (std::size_t k = 0; k < t.K; ++k) f << "," << t.d(s, k);
    for (std::size_t k = 0; k < t.K; ++k) f << "," << t.p(s, k);
    f << "\n";
  }
}

void write_labeled_cloud(const fs::path& dir, const LabeledCloud& lc, const RunManifest& manifest) {
  {
    auto f = open_output(dir / "coords.csv");
    f << manifest.csv_header();
    for (std::size_t c = 0; c < lc.cloud.n_dims(); ++c) f << (c ? "," : "") << "x" << c + 1;
    f << "\n";
    for (std::size_t i = 0; i < lc.cloud.n_points(); ++i) {
      const auto row = lc.cloud.row(i);
      for (std::size_t c = 0; c < row.size(); ++c) f << (c ? "," : "") << row[c];
      f << "\n";
    }
  }
  auto f = open_output(dir / "labels.csv");
  f << manifest.csv_header() << "index,label\n";
  for (std::size_t i = 0; i < lc.labels.size(); ++i) f << i << "," << lc.labels[i] + 1 << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Segment point clouds by local intrinsic dimension (Hidalgo Gibbs sampler)", "hidalgo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunManifest manifest;
  manifest.args = args;
  const std::size_t env_threads = default_threads();

  // fit
  HidalgoConfig fit_cfg;
  fit_cfg.K = 2;
  fit_cfg.threads = env_threads;
  DataOptions fit_data;
  std::string fit_out = ".";
  bool fit_trace = false;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the mixture at fixed K");
  add_data_options(fit_cmd, fit_data);
  add_config_options(fit_cmd, fit_cfg, true);
  fit_cmd->add_option("--out", fit_out, "Output directory for fit.json, assignments.csv, trace.csv");
  fit_cmd->add_flag("--trace", fit_trace, "Also write the per-sweep trace of the best chain");

  // select-k
  HidalgoConfig sel_cfg;
  sel_cfg.threads = env_threads;
  DataOptions sel_data;
  std::size_t k_max = 6;
  std::string sel_out;
  auto* sel_cmd = app.add_subcommand("select-k", "Fit K = 1..k-max and pick the K with the largest average log-posterior");
  add_data_options(sel_cmd, sel_data);
  add_config_options(sel_cmd, sel_cfg, false);
  sel_cmd->add_option("--k-max", k_max, "Largest K to try")->capture_default_str();
  sel_cmd->add_option("--out", sel_out, "Also write the report to this JSON file");

  // generate
  std::string preset;
  std::uint64_t gen_seed = 0;
  std::size_t n_per = 1000;
  std::string gen_out = ".";
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic benchmark (coords.csv + labels.csv)");
  gen_cmd->add_option("--preset", preset, "two-gauss | five-gauss-linear | five-gauss-curved")->required();
  gen_cmd->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
  gen_cmd->add_option("--n-per-manifold", n_per, "Points per manifold")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output directory")->capture_default_str();

  // nmi
  std::string pred_path, truth_path;
  auto* nmi_cmd = app.add_subcommand("nmi", "Mutual information normalized by the ground-truth entropy");
  nmi_cmd->add_option("--pred", pred_path, "Predicted labels (e.g. assignments.csv)")->required();
  nmi_cmd->add_option("--truth", truth_path, "Ground-truth labels")->required();

  // twonn
  DataOptions tn_data;
  double tn_a = 1.0, tn_b = 1.0;
  auto* tn_cmd = app.add_subcommand("twonn", "Homogeneous TWO-NN dimension estimate");
  add_data_options(tn_cmd, tn_data);
  tn_cmd->add_option("--prior-a", tn_a, "Gamma prior shape")->capture_default_str();
  tn_cmd->add_option("--prior-b", tn_b, "Gamma prior rate")->capture_default_str();

  // convergence
  std::string conv_input;
  std::vector<std::string> conv_columns;
  ConvergenceOptions conv_opts;
  bool no_escalate = false;
  auto* conv_cmd = app.add_subcommand("convergence", "Cumulative-sum convergence check on trace columns");
  conv_cmd->add_option("--input", conv_input, "Trace CSV written by fit --trace")->required();
  conv_cmd->add_option("--columns", conv_columns, "Columns to monitor (default: every d_* column)")->delimiter(',');
  conv_cmd->add_option("--theta", conv_opts.theta, "Subsampling stride")->capture_default_str();
  conv_cmd->add_option("--t0", conv_opts.t0, "First sweep monitored")->capture_default_str();
  conv_cmd->add_option("--alpha", conv_opts.alpha, "Significance level")->capture_default_str();
  conv_cmd->add_flag("--no-escalate", no_escalate, "Keep theta fixed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) {
      manifest.command = "fit";
      validate_config(fit_cfg);
      manifest.config = config_json(fit_cfg);
      manifest.seed = fit_cfg.seed;
      const LoadedData data = load_data(fit_data, fit_cfg.q, manifest);
      const FitResult r = fit(data.nd, fit_cfg);
      json j = fit_json(r);
      j["independent"] = fit_data.independent;
      j["manifest"] = manifest.to_json();
      const fs::path dir(fit_out);
      write_json(dir / "fit.json", j);
      write_assignments(dir / "assignments.csv", r, data.index, manifest);
      if (fit_trace) write_trace(dir / "trace.csv", r.best_trace, manifest);
      out << j.dump(2) << "\n";
    } else if (sel_cmd->parsed()) {
      manifest.command = "select-k";
      if (k_max < 1) throw CLI::ValidationError("--k-max must be at least 1");
      validate_config(sel_cfg);
      manifest.config = config_json(sel_cfg);
      manifest.config["k_max"] = k_max;
      manifest.seed = sel_cfg.seed;
      const LoadedData data = load_data(sel_data, sel_cfg.q, manifest);
      const KSelectionReport rep = select_k(data.nd, sel_cfg, k_max);
      json fits = json::array();
      for (const auto& f : rep.fits) fits.push_back(fit_json(f));
      json j = {{"k_values", rep.k_values}, {"avg_logpost", rep.avg_logpost}, {"best_k", rep.best_k}, {"fits", fits}};
      j["manifest"] = manifest.to_json();
      if (!sel_out.empty()) write_json(sel_out, j);
      out << j.dump(2) << "\n";
    } else if (gen_cmd->parsed()) {
      manifest.command = "generate";
      manifest.seed = gen_seed;
      manifest.config = {{"preset", preset}, {"n_per_manifold", n_per}};
      Preset p;
      try {
        p = named_preset(preset, n_per);
      } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError(e.what());
      }
      const LabeledCloud lc = generate(p, gen_seed);
      write_labeled_cloud(gen_out, lc, manifest);
      out << json{{"coords", (fs::path(gen_out) / "coords.csv").string()},
                  {"labels", (fs::path(gen_out) / "labels.csv").string()},
                  {"n_points", lc.cloud.n_points()},
                  {"n_dims", lc.cloud.n_dims()},
                  {"manifest", manifest.to_json()}}
                 .dump(2)
          << "\n";
    } else if (nmi_cmd->parsed()) {
      manifest.command = "nmi";
      manifest.add_input(pred_path);
      manifest.add_input(truth_path);
      const auto pred = io::read_labels(pred_path);
      const auto truth = io::read_labels(truth_path);
      out << json{{"nmi", nmi(pred, truth)}, {"n_points", truth.size()}, {"manifest", manifest.to_json()}}.dump(2)
          << "\n";
    } else if (tn_cmd->parsed()) {
      manifest.command = "twonn";
      manifest.config = {{"prior_a", tn_a}, {"prior_b", tn_b}};
      const LoadedData data = load_data(tn_data, 2, manifest);
      const TwonnEstimate est = twonn_fit(data.nd.mu, tn_a, tn_b);
      out << json{{"d_mle", est.d_mle},
                  {"d_post_mean", est.d_post_mean},
                  {"d_post_sd", est.d_post_sd},
                  {"n_used", est.n_used},
                  {"V", est.V},
                  {"independent", tn_data.independent},
                  {"manifest", manifest.to_json()}}
                 .dump(2)
          << "\n";
    } else if (conv_cmd->parsed()) {
      manifest.command = "convergence";
      manifest.add_input(conv_input);
      conv_opts.escalate_theta = !no_escalate;
      if (conv_columns.empty()) {
        for (const auto& h : io::read_csv(conv_input).header)
          if (h.rfind("d_", 0) == 0) conv_columns.push_back(h);
        if (conv_columns.empty()) throw CLI::ValidationError("trace has no d_* columns; pass --columns");
      }
      std::vector<std::vector<double>> traces;
      for (const auto& c : conv_columns) traces.push_back(io::read_column(conv_input, c));
      ConvergenceReport rep;
      try {
        rep = convergence_check(traces, conv_opts);
      } catch (const std::invalid_argument& e) {
        throw CLI::ValidationError(e.what());
      }
      json series = json::array();
      for (std::size_t s = 0; s < rep.series.size(); ++s)
        series.push_back({{"column", conv_columns[s]},
                          {"final_E", rep.series[s].E.empty() ? 0.5 : rep.series[s].E.back()},
                          {"window_pass", rep.series[s].window_pass}});
      json j = {{"theta", rep.theta}, {"t0", rep.t0},          {"alpha", rep.alpha},
                {"windows", rep.windows}, {"series", series}, {"converged", rep.converged()}};
      j["T_conv"] = rep.t_conv ? json(*rep.t_conv) : json("not converged");
      j["manifest"] = manifest.to_json();
      out << j.dump(2) << "\n";
    }
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace hidalgo::cli
