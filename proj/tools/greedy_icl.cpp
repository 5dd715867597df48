// Apache License, Version 2.0, refer to LICENSE.txt

// greedy_icl fit | simulate | evaluate | study
//
// Exit status: 0 success, 1 input error, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <numeric>
#include <iostream>
#include <optional>
#include <string>

#include "greedy_icl/greedy_icl.hpp"

namespace {

using namespace greedy_icl;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct HyperFlags {
  double alpha0 = 1.0;
  double beta0 = 1.0;
  std::optional<double> eta, zeta, delta, gamma, xi, kappa;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--alpha0", alpha0, "Dirichlet concentration of row-cluster weights");
    cmd.add_option("--beta0", beta0, "Dirichlet concentration of column-cluster weights");
    cmd.add_option("--eta", eta, "Beta prior parameter (bernoulli)");
    cmd.add_option("--zeta", zeta, "Dirichlet prior parameter (categorical)");
    cmd.add_option("--delta", delta, "Gamma shape (poisson) or precision rate (gaussian)");
    cmd.add_option("--gamma", gamma, "Gamma rate (poisson) or precision shape (gaussian)");
    cmd.add_option("--xi", xi, "prior mean (gaussian)");
    cmd.add_option("--kappa", kappa, "prior mean precision scale (gaussian)");
  }

  PriorConfig resolve(const AttributeModel& model) const {
    const auto reject = [&](const std::optional<double>& v, const char* flag) {
      if (v) throw UsageError(std::string(flag) + " does not apply to the " + std::string(to_string(model.kind)) + " model");
    };
    PriorConfig p = PriorConfig::defaults_for(model);
    p.alpha0 = alpha0;
    p.beta0 = beta0;
    switch (model.kind) {
      case ModelKind::bernoulli:
        for (auto [v, f] : {std::pair{&zeta, "--zeta"}, {&delta, "--delta"}, {&gamma, "--gamma"}, {&xi, "--xi"},
                            {&kappa, "--kappa"}}) {
          reject(*v, f);
        }
        if (eta) std::get<BetaPrior>(p.model_prior).eta = *eta;
        break;
      case ModelKind::categorical:
        for (auto [v, f] : {std::pair{&eta, "--eta"}, {&delta, "--delta"}, {&gamma, "--gamma"}, {&xi, "--xi"},
                            {&kappa, "--kappa"}}) {
          reject(*v, f);
        }
        if (zeta) std::get<DirichletPrior>(p.model_prior).zeta = *zeta;
        break;
      case ModelKind::poisson: {
        for (auto [v, f] : {std::pair{&eta, "--eta"}, {&zeta, "--zeta"}, {&xi, "--xi"}, {&kappa, "--kappa"}}) {
          reject(*v, f);
        }
        auto& gp = std::get<GammaPoissonPrior>(p.model_prior);
        if (delta) gp.delta = *delta;
        if (gamma) gp.gamma = *gamma;
        break;
      }
      case ModelKind::gaussian: {
        for (auto [v, f] : {std::pair{&eta, "--eta"}, {&zeta, "--zeta"}}) reject(*v, f);
        auto& ng = std::get<NormalGammaPrior>(p.model_prior);
        if (xi) ng.xi = *xi;
        if (kappa) ng.kappa = *kappa;
        if (gamma) ng.gamma = *gamma;
        if (delta) ng.delta = *delta;
        break;
      }
    }
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return p;
  }
};

AttributeModel resolve_model(const std::string& name, std::optional<int> categories) {
  const auto kind = parse_model_kind(name);
  if (kind == ModelKind::categorical) {
    if (!categories) throw UsageError("--model categorical requires --categories");
    if (*categories < 2 || *categories > CategoricalModel::kMaxCategories) {
      throw UsageError("--categories must lie in [2, " + std::to_string(CategoricalModel::kMaxCategories) + "]");
    }
    return AttributeModel::categorical(*categories);
  }
  if (categories) throw UsageError("--categories only applies to the categorical model");
  switch (kind) {
    case ModelKind::bernoulli: return AttributeModel::bernoulli();
    case ModelKind::poisson: return AttributeModel::poisson();
    default: return AttributeModel::gaussian();
  }
}

struct FitFlags {
  std::string input, format = "dense", model = "bernoulli", prune = "off", engine = "dense";
  std::string output, heatmap, trace;
  std::optional<int> categories;
  int kmax = 0, gmax = 0, restarts = 1, threads = 1, max_sweeps = 200;
  std::uint64_t seed = 1;
  HyperFlags hyper;
};

int run_fit(const FitFlags& f) {
  const auto model = resolve_model(f.model, f.categories);
  const auto prior = f.hyper.resolve(model);
  SearchConfig search;
  search.k_init = f.kmax;
  search.g_init = f.gmax;
  search.pruning = f.prune == "on";
  search.sparse_engine = f.engine == "sparse";
  search.restarts = f.restarts;
  search.rng_seed = f.seed;
  search.threads = f.threads;
  search.max_sweeps = f.max_sweeps;

  const auto adj = load_matrix(f.input, model, f.format == "sparse");
  try {
    search.validate(adj.n_rows(), adj.n_cols());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto result = fit(adj, prior, search);
  const auto report = FitReport::of(result, model, f.input);
  save_report(report, f.output);
  if (!f.trace.empty()) save_trace_csv(result.trace, f.trace);
  if (!f.heatmap.empty()) render_heatmap(adj, result.partition, f.heatmap);
  std::printf("icl %.6f  K %d  G %d  sweeps %d  restarts %d  best %d  %lld ms\n", result.icl, result.k(), result.g(),
              result.sweeps, search.restarts, result.best_restart, static_cast<long long>(report.wall_time_ms));
  return 0;
}

struct SimulateFlags {
  std::size_t n = 100, m = 100;
  int k = 5;
  std::optional<double> q;
  std::string theta_file, model = "bernoulli", format = "dense", output, truth_output;
  std::optional<int> categories;
  std::uint64_t seed = 1;
};

int run_simulate(const SimulateFlags& f) {
  GeneratorSpec spec;
  if (f.q && !f.theta_file.empty()) throw UsageError("give either --q or --theta-file, not both");
  if (f.q) {
    if (f.model != "bernoulli") throw UsageError("--q builds a bernoulli design; use --theta-file for other models");
    if (f.categories) throw UsageError("--categories only applies to the categorical model");
    if (f.k < 1) throw UsageError("--k must be at least 1");
    try {
      spec = diagonal_spec(f.n, f.m, f.k, *f.q, f.seed);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  } else if (!f.theta_file.empty()) {
    const auto grid = load_theta_grid(f.theta_file);
    spec.n = f.n;
    spec.m = f.m;
    spec.model = resolve_model(f.model, f.categories);
    spec.row_weights.assign(grid.k, 1.0 / grid.k);
    spec.col_weights.assign(grid.g, 1.0 / grid.g);
    spec.row_weights.back() += 1.0 - std::accumulate(spec.row_weights.begin(), spec.row_weights.end(), 0.0);
    spec.col_weights.back() += 1.0 - std::accumulate(spec.col_weights.begin(), spec.col_weights.end(), 0.0);
    spec.theta = grid.cells;
    spec.seed = f.seed;
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError(f.theta_file + ": " + e.what());
    }
  } else {
    throw UsageError("simulate needs --q or --theta-file");
  }
  if (f.n == 0 || f.m == 0) throw UsageError("--n and --m must be positive");
  const auto net = generate(spec);
  save_matrix(net.adjacency, f.output, f.format == "sparse");
  if (!f.truth_output.empty()) save_labels({net.row_labels, net.col_labels}, f.truth_output);
  return 0;
}

int run_evaluate(const std::string& pred_path, const std::string& truth_path) {
  const auto pred = load_report(pred_path);
  const auto truth = load_labels(truth_path);
  if (pred.row_labels.size() != truth.rows.size() || pred.col_labels.size() != truth.cols.size()) {
    throw InputError("label lengths differ: prediction is " + std::to_string(pred.row_labels.size()) + "x" +
                     std::to_string(pred.col_labels.size()) + ", truth is " + std::to_string(truth.rows.size()) +
                     "x" + std::to_string(truth.cols.size()));
  }
  std::printf("%.6f\n", combined_nmi(pred.row_labels, truth.rows, pred.col_labels, truth.cols));
  return 0;
}

struct StudyFlags {
  std::string q_grid = "0.0125:0.0125:0.5", out_csv, out_plot;
  int reps = 20, restarts = 5, kmax = 0, gmax = 0, threads = 1;
  std::size_t n = 100, m = 100;
  int k = 5;
  std::uint64_t seed = 1;
};

int run_study_cmd(const StudyFlags& f) {
  StudyConfig cfg;
  try {
    cfg.q_grid = parse_q_grid(f.q_grid);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  for (double q : cfg.q_grid) {
    if (q < 0.0 || q > 1.0) throw UsageError("q values must lie in [0, 1]");
  }
  if (f.reps < 1) throw UsageError("--reps must be at least 1");
  cfg.reps = f.reps;
  cfg.n = f.n;
  cfg.m = f.m;
  cfg.k = f.k;
  cfg.seed = f.seed;
  cfg.search.restarts = f.restarts;
  cfg.search.k_init = f.kmax;
  cfg.search.g_init = f.gmax;
  cfg.search.threads = f.threads;
  try {
    cfg.search.validate(f.n, f.m);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto rows = run_study(cfg, [](const StudyRow& r) {
    std::fprintf(stderr, "q %.4f rep %d nmi %.4f K %d G %d\n", r.q, r.replicate, r.nmi, r.k, r.g);
  });
  if (!f.out_csv.empty()) save_study_csv(rows, f.out_csv);
  if (!f.out_plot.empty()) save_study_plot(rows, f.out_plot);
  for (const auto& [q, mean] : mean_nmi_by_q(rows)) std::printf("%.4f %.6f\n", q, mean);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy exact-ICL co-clustering of bipartite networks"};
  app.require_subcommand(1);
  const std::vector<std::string> models{"bernoulli", "categorical", "poisson", "gaussian"};
  const std::vector<std::string> formats{"dense", "sparse"};

  FitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "Co-cluster a matrix by greedy ICL maximization");
  fit_cmd->add_option("--input", fit_flags.input, "matrix file")->required();
  fit_cmd->add_option("--format", fit_flags.format, "dense CSV or sparse triplets")->check(CLI::IsMember(formats));
  fit_cmd->add_option("--model", fit_flags.model)->check(CLI::IsMember(models));
  fit_cmd->add_option("--categories", fit_flags.categories, "number of categories (categorical model)");
  fit_cmd->add_option("--kmax", fit_flags.kmax, "initial row clusters, 0 = min(N, 50)")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--gmax", fit_flags.gmax, "initial column clusters, 0 = min(M, 50)")->check(CLI::NonNegativeNumber);
  fit_flags.hyper.add_to(*fit_cmd);
  fit_cmd->add_option("--prune", fit_flags.prune)->check(CLI::IsMember({"on", "off"}));
  fit_cmd->add_option("--engine", fit_flags.engine)->check(CLI::IsMember(formats));
  fit_cmd->add_option("--restarts", fit_flags.restarts)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit_flags.seed);
  fit_cmd->add_option("--threads", fit_flags.threads)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--max-sweeps", fit_flags.max_sweeps, "safety cap on full sweeps per run")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--output", fit_flags.output, "report path")->required();
  fit_cmd->add_option("--heatmap", fit_flags.heatmap, "re-ordered matrix image, .svg or .ppm");
  fit_cmd->add_option("--trace", fit_flags.trace, "per-sweep trace CSV");

  SimulateFlags sim_flags;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a matrix from a latent block model");
  sim_cmd->add_option("--n", sim_flags.n)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--m", sim_flags.m)->check(CLI::PositiveNumber);
  sim_cmd->add_option("--k", sim_flags.k, "blocks per side of the diagonal design");
  sim_cmd->add_option("--q", sim_flags.q, "off-diagonal tie probability");
  sim_cmd->add_option("--theta-file", sim_flags.theta_file, "general block parameter grid");
  sim_cmd->add_option("--model", sim_flags.model)->check(CLI::IsMember(models));
  sim_cmd->add_option("--categories", sim_flags.categories);
  sim_cmd->add_option("--format", sim_flags.format)->check(CLI::IsMember(formats));
  sim_cmd->add_option("--seed", sim_flags.seed);
  sim_cmd->add_option("--output", sim_flags.output)->required();
  sim_cmd->add_option("--truth-output", sim_flags.truth_output);

  std::string pred_path, truth_path;
  auto* eval_cmd = app.add_subcommand("evaluate", "Combined NMI of a fit against planted labels");
  eval_cmd->add_option("--pred", pred_path, "fit report")->required();
  eval_cmd->add_option("--truth", truth_path, "label sidecar")->required();

  StudyFlags study_flags;
  auto* study_cmd = app.add_subcommand("study", "Planted-diagonal simulation study over a q grid");
  study_cmd->add_option("--q-grid", study_flags.q_grid, "start:step:end");
  study_cmd->add_option("--reps", study_flags.reps);
  study_cmd->add_option("--restarts", study_flags.restarts)->check(CLI::PositiveNumber);
  study_cmd->add_option("--kmax", study_flags.kmax)->check(CLI::NonNegativeNumber);
  study_cmd->add_option("--gmax", study_flags.gmax)->check(CLI::NonNegativeNumber);
  study_cmd->add_option("--threads", study_flags.threads)->check(CLI::PositiveNumber);
  study_cmd->add_option("--n", study_flags.n)->check(CLI::PositiveNumber);
  study_cmd->add_option("--m", study_flags.m)->check(CLI::PositiveNumber);
  study_cmd->add_option("--k", study_flags.k)->check(CLI::PositiveNumber);
  study_cmd->add_option("--seed", study_flags.seed);
  study_cmd->add_option("--out-csv", study_flags.out_csv);
  study_cmd->add_option("--out-plot", study_flags.out_plot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit_cmd) return run_fit(fit_flags);
    if (*sim_cmd) return run_simulate(sim_flags);
    if (*eval_cmd) return run_evaluate(pred_path, truth_path);
    return run_study_cmd(study_flags);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
