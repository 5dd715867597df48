// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "greedy.hpp"
#include "io.hpp"

namespace greedy_icl {

/// Serializable summary of a fit. Labels are stored 0-based here and
/// written 1-based.
struct FitReport {
  static constexpr const char* kFormatVersion = "greedy-icl-report/1";

  std::string format_version = kFormatVersion;
  std::string input;  // source path, empty when fitted in memory
  double icl = 0.0;
  int k = 0;
  int g = 0;
  std::vector<int> row_labels;
  std::vector<int> col_labels;
  std::vector<TraceEntry> trace;
  int restarts = 1;
  int best_restart = 0;
  std::vector<double> restart_icls;
  int sweeps = 0;
  int moves = 0;
  int merges = 0;
  bool sweep_cap_reached = false;
  std::int64_t wall_time_ms = 0;
  SearchConfig search;
  PriorConfig prior;
  AttributeModel model;

  static FitReport of(const FitResult& fit, const AttributeModel& model, std::string input = {}) {
    FitReport r;
    r.input = std::move(input);
    r.icl = fit.icl;
    r.k = fit.k();
    r.g = fit.g();
    r.row_labels = fit.partition.rows;
    r.col_labels = fit.partition.cols;
    r.trace = fit.trace;
    r.restarts = fit.search.restarts;
    r.best_restart = fit.best_restart;
    r.restart_icls = fit.restart_icls;
    r.sweeps = fit.sweeps;
    r.moves = fit.moves;
    r.merges = fit.merges;
    r.sweep_cap_reached = fit.sweep_cap_reached;
    r.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(fit.wall_time).count();
    r.search = fit.search;
    r.prior = fit.prior;
    r.model = model;
    return r;
  }

  /// Equality ignoring wall time.
  bool same_result(const FitReport& other) const {
    FitReport a = *this;
    a.wall_time_ms = other.wall_time_ms;
    return a == other;
  }

  friend bool operator==(const FitReport&, const FitReport&) = default;
};

namespace detail {

inline nlohmann::ordered_json prior_to_json(const PriorConfig& p) {
  nlohmann::ordered_json j{{"alpha0", p.alpha0}, {"beta0", p.beta0}};
  std::visit(
      [&](const auto& prior) {
        using P = std::decay_t<decltype(prior)>;
        if constexpr (std::is_same_v<P, BetaPrior>) {
          j["eta"] = prior.eta;
        } else if constexpr (std::is_same_v<P, DirichletPrior>) {
          j["zeta"] = prior.zeta;
          j["categories"] = prior.categories;
        } else if constexpr (std::is_same_v<P, GammaPoissonPrior>) {
          j["delta"] = prior.delta;
          j["gamma"] = prior.gamma;
        } else {
          j["xi"] = prior.xi;
          j["kappa"] = prior.kappa;
          j["gamma"] = prior.gamma;
          j["delta"] = prior.delta;
        }
      },
      p.model_prior);
  return j;
}

inline PriorConfig prior_from_json(const nlohmann::json& j, ModelKind kind) {
  PriorConfig p;
  p.alpha0 = j.at("alpha0").get<double>();
  p.beta0 = j.at("beta0").get<double>();
  switch (kind) {
    case ModelKind::bernoulli: p.model_prior = BetaPrior{j.at("eta").get<double>()}; break;
    case ModelKind::categorical:
      p.model_prior = DirichletPrior{j.at("zeta").get<double>(), j.at("categories").get<int>()};
      break;
    case ModelKind::poisson:
      p.model_prior = GammaPoissonPrior{j.at("delta").get<double>(), j.at("gamma").get<double>()};
      break;
    case ModelKind::gaussian:
      p.model_prior = NormalGammaPrior{j.at("xi").get<double>(), j.at("kappa").get<double>(),
                                       j.at("gamma").get<double>(), j.at("delta").get<double>()};
      break;
  }
  return p;
}

inline std::vector<int> one_based(const std::vector<int>& labels) {
  std::vector<int> out(labels);
  for (auto& l : out) ++l;
  return out;
}

inline std::vector<int> zero_based(std::vector<int> labels) {
  for (auto& l : labels) {
    if (l < 1) throw InputError("report labels must be positive");
    --l;
  }
  return labels;
}

}  // namespace detail

inline std::string to_json(const FitReport& r) {
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  std::vector<double> trace_icl;
  for (const auto& t : r.trace) {
    trace_icl.push_back(t.icl);
    trace.push_back({{"sweep", t.sweep}, {"icl", t.icl}, {"moves", t.moves}, {"k", t.k}, {"g", t.g}});
  }
  nlohmann::ordered_json j{
      {"format_version", r.format_version},
      {"input", r.input},
      {"model", to_string(r.model.kind)},
      {"icl", r.icl},
      {"k", r.k},
      {"g", r.g},
      {"row_labels", detail::one_based(r.row_labels)},
      {"col_labels", detail::one_based(r.col_labels)},
      {"trace", trace_icl},
      {"trace_detail", trace},
      {"restarts", r.restarts},
      {"best_restart", r.best_restart},
      {"restart_icls", r.restart_icls},
      {"sweeps", r.sweeps},
      {"moves", r.moves},
      {"merges", r.merges},
      {"sweep_cap_reached", r.sweep_cap_reached},
      {"wall_time_ms", r.wall_time_ms},
      {"config",
       {{"variant", r.search.variant_name()},
        {"categories", r.model.categories},
        {"kmax", r.search.k_init},
        {"gmax", r.search.g_init},
        {"prune", r.search.pruning},
        {"sparse_engine", r.search.sparse_engine},
        {"prune_threshold", r.search.prune_threshold},
        {"prune_warmup_sweeps", r.search.prune_warmup_sweeps},
        {"max_sweeps", r.search.max_sweeps},
        {"restarts", r.search.restarts},
        {"seed", r.search.rng_seed},
        {"threads", r.search.threads},
        {"prior", detail::prior_to_json(r.prior)}}},
  };
  return j.dump(2) + "\n";
}

inline FitReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("report is not valid JSON: ") + e.what());
  }
  try {
    FitReport r;
    r.format_version = j.at("format_version").get<std::string>();
    if (r.format_version != FitReport::kFormatVersion) {
      throw InputError("unsupported report format '" + r.format_version + "'");
    }
    r.input = j.at("input").get<std::string>();
    const auto& cfg = j.at("config");
    r.model = {parse_model_kind(j.at("model").get<std::string>()), cfg.at("categories").get<int>()};
    r.icl = j.at("icl").get<double>();
    r.k = j.at("k").get<int>();
    r.g = j.at("g").get<int>();
    r.row_labels = detail::zero_based(j.at("row_labels").get<std::vector<int>>());
    r.col_labels = detail::zero_based(j.at("col_labels").get<std::vector<int>>());
    for (const auto& t : j.at("trace_detail")) {
      r.trace.push_back({t.at("sweep").get<int>(), t.at("icl").get<double>(), t.at("moves").get<int>(),
                         t.at("k").get<int>(), t.at("g").get<int>()});
    }
    r.restarts = j.at("restarts").get<int>();
    r.best_restart = j.at("best_restart").get<int>();
    r.restart_icls = j.at("restart_icls").get<std::vector<double>>();
    r.sweeps = j.at("sweeps").get<int>();
    r.moves = j.at("moves").get<int>();
    r.merges = j.at("merges").get<int>();
    r.sweep_cap_reached = j.at("sweep_cap_reached").get<bool>();
    r.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
    r.search.k_init = cfg.at("kmax").get<int>();
    r.search.g_init = cfg.at("gmax").get<int>();
    r.search.pruning = cfg.at("prune").get<bool>();
    r.search.sparse_engine = cfg.at("sparse_engine").get<bool>();
    r.search.prune_threshold = cfg.at("prune_threshold").get<double>();
    r.search.prune_warmup_sweeps = cfg.at("prune_warmup_sweeps").get<int>();
    r.search.max_sweeps = cfg.at("max_sweeps").get<int>();
    r.search.restarts = cfg.at("restarts").get<int>();
    r.search.rng_seed = cfg.at("seed").get<std::uint64_t>();
    r.search.threads = cfg.at("threads").get<int>();
    r.prior = detail::prior_from_json(cfg.at("prior"), r.model.kind);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed report: ") + e.what());
  }
}

inline void save_report(const FitReport& r, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << to_json(r);
  if (!out) throw InputError(path.string() + ": write failed");
}

inline FitReport load_report(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return report_from_json(buffer.str());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

/// One row per sweep: sweep,icl,moves,K,G.
inline void save_trace_csv(const std::vector<TraceEntry>& trace, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << "sweep,icl,moves,K,G\n";
  for (const auto& t : trace) {
    out << t.sweep << ',' << detail::format_double(t.icl) << ',' << t.moves << ',' << t.k << ',' << t.g << '\n';
  }
  if (!out) throw InputError(path.string() + ": write failed");
}

}  // namespace greedy_icl
