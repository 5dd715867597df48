// Apache License, Version 2.0, refer to LICENSE.txt

// Matrix and label file formats.
//
//   dense   comma-separated values, one matrix row per line; a first line
//           with any non-numeric field is taken as a header and skipped.
//   sparse  "N M nnz" then nnz lines "i j v", 1-based, whitespace-separated.
//           Lines starting with '%' are comments, which also admits the
//           MatrixMarket coordinate banner.
//   labels  two lines of space-separated 1-based labels: rows, then columns.

#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adjacency.hpp"

namespace greedy_icl {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

inline std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(" \t\r", pos);
    if (start == std::string_view::npos) break;
    const auto end = std::min(line.find_first_of(" \t\r", start), line.size());
    out.push_back(line.substr(start, end - start));
    pos = end;
  }
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open for reading");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError(path.string() + ": cannot open for writing");
  return out;
}

[[noreturn]] inline void fail_at(const std::filesystem::path& path, std::size_t line, const std::string& msg) {
  throw InputError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

/// Shortest text that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

inline BipartiteAdjacency load_dense(const std::filesystem::path& path, AttributeModel model) {
  auto in = detail::open_input(path);
  std::vector<double> values;
  std::size_t n_rows = 0, n_cols = 0, line_no = 0;
  bool first_line = true;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(line, ',');
    std::vector<double> row(fields.size());
    std::size_t bad = fields.size();
    for (std::size_t f = 0; f < fields.size() && bad == fields.size(); ++f) {
      if (!detail::parse_double(fields[f], row[f])) bad = f;
    }
    if (bad != fields.size()) {
      if (first_line) {
        first_line = false;
        n_cols = fields.size();
        continue;
      }
      detail::fail_at(path, line_no, "malformed cell " + std::to_string(bad + 1) + ": '" +
                                         std::string(detail::trim(fields[bad])) + "'");
    }
    if (n_cols == 0) n_cols = fields.size();
    if (fields.size() != n_cols) {
      detail::fail_at(path, line_no, "row has " + std::to_string(fields.size()) + " fields, expected " +
                                         std::to_string(n_cols));
    }
    first_line = false;
    values.insert(values.end(), row.begin(), row.end());
    ++n_rows;
  }
  if (n_rows == 0) throw InputError(path.string() + ": no data rows");
  try {
    return BipartiteAdjacency::dense(n_rows, n_cols, std::move(values), model);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline BipartiteAdjacency load_sparse(const std::filesystem::path& path, AttributeModel model) {
  auto in = detail::open_input(path);
  std::string line;
  std::size_t line_no = 0, n = 0, m = 0, nnz = 0;
  bool have_header = false, pattern = false;
  std::vector<Triplet> entries;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    if (body.front() == '%') {
      if (line_no == 1 && body.starts_with("%%MatrixMarket")) {
        const auto words = detail::tokens(body);
        if (words.size() < 4 || words[1] != "matrix" || words[2] != "coordinate") {
          detail::fail_at(path, line_no, "only MatrixMarket 'matrix coordinate' files are supported");
        }
        pattern = words[3] == "pattern";
        if (words.size() > 4 && words[4] != "general") {
          detail::fail_at(path, line_no, "only 'general' MatrixMarket symmetry is supported");
        }
      }
      continue;
    }
    const auto fields = detail::tokens(body);
    if (!have_header) {
      if (fields.size() != 3 || !detail::parse_int(fields[0], n) || !detail::parse_int(fields[1], m) ||
          !detail::parse_int(fields[2], nnz)) {
        detail::fail_at(path, line_no, "expected header 'N M nnz'");
      }
      if (n == 0 || m == 0) detail::fail_at(path, line_no, "matrix dimensions must be positive");
      have_header = true;
      entries.reserve(nnz);
      continue;
    }
    std::size_t i = 0, j = 0;
    double v = 1.0;
    const std::size_t expected = pattern ? 2 : 3;
    if (fields.size() != expected || !detail::parse_int(fields[0], i) || !detail::parse_int(fields[1], j) ||
        (!pattern && !detail::parse_double(fields[2], v))) {
      detail::fail_at(path, line_no, pattern ? "expected 'i j'" : "expected 'i j v'");
    }
    if (i < 1 || i > n || j < 1 || j > m) {
      detail::fail_at(path, line_no, "index (" + std::to_string(i) + "," + std::to_string(j) +
                                         ") out of range for " + std::to_string(n) + "x" + std::to_string(m));
    }
    if (v == 0.0) detail::fail_at(path, line_no, "explicit zero; zeros must be implicit");
    if (auto why = domain_violation(model, v); !why.empty()) {
      detail::fail_at(path, line_no, "value " + detail::format_double(v) + " at row " + std::to_string(i) +
                                         ", col " + std::to_string(j) + ": " + why);
    }
    entries.push_back({i - 1, j - 1, v});
  }
  if (!have_header) throw InputError(path.string() + ": missing 'N M nnz' header");
  if (entries.size() != nnz) {
    throw InputError(path.string() + ": header declares " + std::to_string(nnz) + " entries, found " +
                     std::to_string(entries.size()));
  }
  try {
    return BipartiteAdjacency::sparse(n, m, std::move(entries), model);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline BipartiteAdjacency load_matrix(const std::filesystem::path& path, AttributeModel model, bool sparse) {
  return sparse ? load_sparse(path, model) : load_dense(path, model);
}

inline void save_dense(const BipartiteAdjacency& adj, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  const auto values = adj.to_dense_values();
  for (std::size_t i = 0; i < adj.n_rows(); ++i) {
    for (std::size_t j = 0; j < adj.n_cols(); ++j) {
      if (j) out << ',';
      out << detail::format_double(values[i * adj.n_cols() + j]);
    }
    out << '\n';
  }
  if (!out) throw InputError(path.string() + ": write failed");
}

inline void save_sparse(const BipartiteAdjacency& adj, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  const auto entries = adj.to_triplets();
  out << adj.n_rows() << ' ' << adj.n_cols() << ' ' << entries.size() << '\n';
  for (const auto& t : entries) {
    out << t.row + 1 << ' ' << t.col + 1 << ' ' << detail::format_double(t.value) << '\n';
  }
  if (!out) throw InputError(path.string() + ": write failed");
}

inline void save_matrix(const BipartiteAdjacency& adj, const std::filesystem::path& path, bool sparse) {
  sparse ? save_sparse(adj, path) : save_dense(adj, path);
}

/// 0-based row and column labels.
struct LabelPair {
  std::vector<int> rows;
  std::vector<int> cols;
};

inline void save_labels(const LabelPair& labels, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  for (const auto* side : {&labels.rows, &labels.cols}) {
    for (std::size_t i = 0; i < side->size(); ++i) out << (i ? " " : "") << (*side)[i] + 1;
    out << '\n';
  }
  if (!out) throw InputError(path.string() + ": write failed");
}

inline LabelPair load_labels(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  LabelPair labels;
  std::string line;
  std::size_t line_no = 0;
  for (auto* side : {&labels.rows, &labels.cols}) {
    if (!std::getline(in, line)) throw InputError(path.string() + ": expected two label lines");
    ++line_no;
    for (const auto tok : detail::tokens(line)) {
      int v = 0;
      if (!detail::parse_int(tok, v) || v < 1) {
        detail::fail_at(path, line_no, "label '" + std::string(tok) + "' is not a positive integer");
      }
      side->push_back(v - 1);
    }
    if (side->empty()) detail::fail_at(path, line_no, "no labels");
  }
  return labels;
}

/// Block parameters for the general generator, K x G row-major.
struct ThetaGrid {
  int k = 0;
  int g = 0;
  std::vector<std::vector<double>> cells;
};

/// One line per row cluster, one whitespace-separated token per column
/// cluster; a token is a single number or '/'-joined numbers ("0.2/0.8").
/// An optional first line "K G" fixes the expected shape. '#' starts a comment.
inline ThetaGrid load_theta_grid(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  ThetaGrid grid;
  int declared_k = -1, declared_g = -1;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = detail::trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto toks = detail::tokens(body);
    if (first) {
      first = false;
      int a = 0, b = 0;
      if (toks.size() == 2 && toks[0].find_first_of("./eE") == std::string_view::npos &&
          toks[1].find_first_of("./eE") == std::string_view::npos && detail::parse_int(toks[0], a) &&
          detail::parse_int(toks[1], b)) {
        if (a < 1 || b < 1) detail::fail_at(path, line_no, "K and G must be positive");
        declared_k = a;
        declared_g = b;
        continue;
      }
    }
    if (grid.g == 0) grid.g = static_cast<int>(toks.size());
    if (static_cast<int>(toks.size()) != grid.g) {
      detail::fail_at(path, line_no, "row has " + std::to_string(toks.size()) + " blocks, expected " +
                                         std::to_string(grid.g));
    }
    for (const auto tok : toks) {
      std::vector<double> params;
      for (const auto part : detail::split(tok, '/')) {
        double v = 0.0;
        if (!detail::parse_double(part, v)) detail::fail_at(path, line_no, "bad parameter '" + std::string(tok) + "'");
        params.push_back(v);
      }
      grid.cells.push_back(std::move(params));
    }
    ++grid.k;
  }
  if (grid.k == 0) throw InputError(path.string() + ": no block parameters");
  if (declared_k >= 0 && (declared_k != grid.k || declared_g != grid.g)) {
    throw InputError(path.string() + ": declared " + std::to_string(declared_k) + "x" + std::to_string(declared_g) +
                     " grid but found " + std::to_string(grid.k) + "x" + std::to_string(grid.g));
  }
  return grid;
}

}  // namespace greedy_icl
