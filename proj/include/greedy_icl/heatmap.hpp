// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "adjacency.hpp"
#include "io.hpp"
#include "partition.hpp"

namespace greedy_icl {

/// Matrix re-ordered by cluster, shaded 0 (black) .. 255 (white).
struct HeatmapLayout {
  std::vector<std::size_t> row_order;  // display position -> original row
  std::vector<std::size_t> col_order;
  std::vector<std::size_t> row_breaks;  // display positions where a new cluster starts, excluding 0
  std::vector<std::size_t> col_breaks;
  std::vector<std::uint8_t> gray;  // row-major in display order

  std::uint8_t at(std::size_t r, std::size_t c) const { return gray[r * col_order.size() + c]; }
};

namespace detail {

inline std::vector<std::size_t> cluster_order(const std::vector<int>& labels, std::vector<std::size_t>& breaks) {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return labels[a] < labels[b]; });
  for (std::size_t p = 1; p < order.size(); ++p) {
    if (labels[order[p]] != labels[order[p - 1]]) breaks.push_back(p);
  }
  return order;
}

}  // namespace detail

/// Rows sorted by row cluster then index, columns likewise. Binary data is
/// black for 1 and white for 0; other data is a linear grayscale from the
/// minimum (white) to the 99th percentile (black), clipped above.
inline HeatmapLayout heatmap_layout(const BipartiteAdjacency& adj, const Partition& p) {
  if (p.rows.size() != adj.n_rows() || p.cols.size() != adj.n_cols()) {
    throw std::invalid_argument("partition does not match the matrix dimensions");
  }
  HeatmapLayout h;
  h.row_order = detail::cluster_order(p.rows, h.row_breaks);
  h.col_order = detail::cluster_order(p.cols, h.col_breaks);
  const auto values = adj.to_dense_values();

  double lo = 0.0, hi = 1.0;
  if (adj.model().kind != ModelKind::bernoulli) {
    std::vector<double> sorted(values);
    const auto k = static_cast<std::size_t>(0.99 * static_cast<double>(sorted.size() - 1));
    std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
    hi = sorted[k];
    lo = *std::min_element(values.begin(), values.end());
    if (hi <= lo) hi = *std::max_element(values.begin(), values.end());
  }
  const std::size_t m = adj.n_cols();
  h.gray.resize(values.size());
  for (std::size_t r = 0; r < h.row_order.size(); ++r) {
    for (std::size_t c = 0; c < m; ++c) {
      const double v = values[h.row_order[r] * m + h.col_order[c]];
      const double t = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0;
      h.gray[r * m + c] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t)));
    }
  }
  return h;
}

namespace detail {

// Pixels per cell: large for tiny matrices, 1 once the matrix reaches 800 cells on a side.
inline int heatmap_cell_size(const HeatmapLayout& h) {
  const auto side = std::max(h.row_order.size(), h.col_order.size());
  return static_cast<int>(std::clamp<std::size_t>(800 / std::max<std::size_t>(side, 1), 1, 20));
}

inline void write_svg(const HeatmapLayout& h, std::ofstream& out) {
  const int s = heatmap_cell_size(h);
  const std::size_t n = h.row_order.size(), m = h.col_order.size();
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << m * s << "\" height=\"" << n * s
      << "\" shape-rendering=\"crispEdges\">\n";
  out << "<rect width=\"" << m * s << "\" height=\"" << n * s << "\" fill=\"#ffffff\"/>\n";
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m;) {
      const auto g = h.at(r, c);
      std::size_t end = c + 1;
      while (end < m && h.at(r, end) == g) ++end;
      if (g != 255) {
        out << "<rect x=\"" << c * s << "\" y=\"" << r * s << "\" width=\"" << (end - c) * s << "\" height=\"" << s
            << "\" fill=\"rgb(" << int(g) << ',' << int(g) << ',' << int(g) << ")\"/>\n";
      }
      c = end;
    }
  }
  for (auto b : h.row_breaks) {
    out << "<line x1=\"0\" y1=\"" << b * s << "\" x2=\"" << m * s << "\" y2=\"" << b * s
        << "\" stroke=\"#d62728\" stroke-width=\"1\"/>\n";
  }
  for (auto b : h.col_breaks) {
    out << "<line x1=\"" << b * s << "\" y1=\"0\" x2=\"" << b * s << "\" y2=\"" << n * s
        << "\" stroke=\"#d62728\" stroke-width=\"1\"/>\n";
  }
  out << "</svg>\n";
}

inline void write_ppm(const HeatmapLayout& h, std::ofstream& out) {
  const std::size_t s = heatmap_cell_size(h);
  const std::size_t n = h.row_order.size(), m = h.col_order.size();
  const std::size_t width = m * s, height = n * s;
  std::vector<std::uint8_t> rgb(width * height * 3);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const auto g = h.at(y / s, x / s);
      std::fill_n(rgb.begin() + (y * width + x) * 3, 3, g);
    }
  }
  const auto red = [&](std::size_t x, std::size_t y) {
    auto* px = &rgb[(y * width + x) * 3];
    px[0] = 214, px[1] = 39, px[2] = 40;
  };
  for (auto b : h.row_breaks) {
    for (std::size_t x = 0; x < width; ++x) red(x, b * s);
  }
  for (auto b : h.col_breaks) {
    for (std::size_t y = 0; y < height; ++y) red(b * s, y);
  }
  out << "P6\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
}

}  // namespace detail

/// Writes the re-ordered matrix with red cluster boundaries: binary PPM when
/// the path ends in ".ppm", SVG otherwise.
inline void render_heatmap(const BipartiteAdjacency& adj, const Partition& p, const std::filesystem::path& path) {
  const auto layout = heatmap_layout(adj, p);
  const bool ppm = path.extension() == ".ppm";
  std::ofstream out(path, ppm ? std::ios::binary : std::ios::out);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  ppm ? detail::write_ppm(layout, out) : detail::write_svg(layout, out);
  if (!out) throw InputError(path.string() + ": write failed");
}

}  // namespace greedy_icl
