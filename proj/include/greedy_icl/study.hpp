// Apache License, Version 2.0, refer to LICENSE.txt

// Planted-diagonal simulation study: generate, fit and score over a grid of
// noise levels q.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "greedy.hpp"
#include "io.hpp"
#include "metrics.hpp"
#include "simulation.hpp"

namespace greedy_icl {

struct StudyConfig {
  std::vector<double> q_grid;
  int reps = 20;
  std::size_t n = 100;
  std::size_t m = 100;
  int k = 5;
  SearchConfig search;  // restarts, seeds and cluster caps for each fit
  PriorConfig prior;
  std::uint64_t seed = 1;
};

struct StudyRow {
  double q = 0.0;
  int replicate = 0;
  double nmi = 0.0;
  double icl = 0.0;
  int k = 0;
  int g = 0;
  double seconds = 0.0;
};

/// Inclusive grid "start:step:end".
inline std::vector<double> parse_q_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    double v = 0.0;
    if (!detail::parse_double(item, v)) throw std::invalid_argument("bad q-grid '" + text + "'");
    parts.push_back(v);
  }
  if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0]) {
    throw std::invalid_argument("q-grid must be start:step:end with step > 0 and end >= start");
  }
  const auto count = static_cast<int>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9)) + 1;
  std::vector<double> grid;
  for (int i = 0; i < count; ++i) grid.push_back(parts[0] + i * parts[1]);
  return grid;
}

/// Seed of replicate `rep` at grid point `qi`; distinct for every cell of the study.
inline std::uint64_t study_seed(std::uint64_t base, std::size_t qi, int rep) {
  return base * 1000003ULL + qi * 1009ULL + static_cast<std::uint64_t>(rep);
}

inline std::vector<StudyRow> run_study(const StudyConfig& cfg,
                                       const std::function<void(const StudyRow&)>& on_row = {}) {
  std::vector<StudyRow> rows;
  for (std::size_t qi = 0; qi < cfg.q_grid.size(); ++qi) {
    for (int rep = 0; rep < cfg.reps; ++rep) {
      const auto seed = study_seed(cfg.seed, qi, rep);
      const auto net = generate(diagonal_spec(cfg.n, cfg.m, cfg.k, cfg.q_grid[qi], seed));
      SearchConfig search = cfg.search;
      search.rng_seed = seed;
      const auto started = std::chrono::steady_clock::now();
      const auto fit_result = fit(net.adjacency, cfg.prior, search);
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
      StudyRow row{cfg.q_grid[qi],
                   rep,
                   combined_nmi(fit_result.partition.rows, net.row_labels, fit_result.partition.cols,
                                net.col_labels),
                   fit_result.icl,
                   fit_result.k(),
                   fit_result.g(),
                   elapsed.count()};
      rows.push_back(row);
      if (on_row) on_row(row);
    }
  }
  return rows;
}

/// (q, mean combined NMI) per grid point, in grid order.
inline std::vector<std::pair<double, double>> mean_nmi_by_q(const std::vector<StudyRow>& rows) {
  std::vector<std::pair<double, double>> out;
  std::vector<int> counts;
  for (const auto& r : rows) {
    if (out.empty() || out.back().first != r.q) {
      out.emplace_back(r.q, 0.0);
      counts.push_back(0);
    }
    out.back().second += r.nmi;
    ++counts.back();
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].second /= counts[i];
  return out;
}

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = 0.5 * static_cast<double>(i + j) + 1.0;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

/// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("spearman needs two equal-length samples");
  const auto rx = detail::average_ranks(x), ry = detail::average_ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

inline void save_study_csv(const std::vector<StudyRow>& rows, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << "q,replicate,nmi,icl,k,g,seconds\n";
  for (const auto& r : rows) {
    out << detail::format_double(r.q) << ',' << r.replicate << ',' << detail::format_double(r.nmi) << ','
        << detail::format_double(r.icl) << ',' << r.k << ',' << r.g << ',' << r.seconds << '\n';
  }
  if (!out) throw InputError(path.string() + ": write failed");
}

/// Line plot of mean combined NMI against q, as SVG.
inline void save_study_plot(const std::vector<StudyRow>& rows, const std::filesystem::path& path) {
  const auto means = mean_nmi_by_q(rows);
  auto out = detail::open_output(path);
  constexpr double kW = 640, kH = 420, kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  const double q_lo = means.empty() ? 0.0 : means.front().first;
  double q_hi = means.empty() ? 1.0 : means.back().first;
  if (q_hi <= q_lo) q_hi = q_lo + 1.0;
  const auto px = [&](double q) { return kLeft + (q - q_lo) / (q_hi - q_lo) * (kW - kLeft - kRight); };
  const auto py = [&](double v) { return kTop + (1.0 - v / 2.0) * (kH - kTop - kBottom); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << kW - kRight << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << py(0) << "\" x2=\"" << kLeft << "\" y2=\"" << py(2)
      << "\" stroke=\"black\"/>\n";
  for (double v = 0.0; v <= 2.0 + 1e-9; v += 0.5) {
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(v) + 4 << "\" font-size=\"11\" text-anchor=\"end\">" << v
        << "</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double q = q_lo + t * (q_hi - q_lo) / 4;
    out << "<text x=\"" << px(q) << "\" y=\"" << py(0) + 16 << "\" font-size=\"11\" text-anchor=\"middle\">" << q
        << "</text>\n";
  }
  out << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">q</text>\n"
      << "<text x=\"15\" y=\"" << (kTop + kH - kBottom) / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << (kTop + kH - kBottom) / 2 << ")\">mean combined NMI</text>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const auto& [q, v] : means) out << px(q) << ',' << py(v) << ' ';
  out << "\"/>\n";
  for (const auto& [q, v] : means) {
    out << "<circle cx=\"" << px(q) << "\" cy=\"" << py(v) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  out << "</svg>\n";
  if (!out) throw InputError(path.string() + ": write failed");
}

}  // namespace greedy_icl
