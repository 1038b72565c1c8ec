#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathsum/errors.hpp"
#include "pathsum/model.hpp"

namespace pathsum {

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Entries assembled from either input format, kept as triplets until the
// symmetry policy is applied.
struct Triplet {
  int row;  // 0-based
  int col;
  double value;
};

inline InformationModel assembleModel(const std::string& path, int n,
                                      const std::vector<Triplet>& entries, bool mirror,
                                      std::optional<Vector> potential) {
  Matrix j = Matrix::Zero(n, n);
  for (const auto& t : entries) {
    j(t.row, t.col) += t.value;
    if (mirror && t.row != t.col) j(t.col, t.row) += t.value;
  }

  if (!mirror) {
    // General input must already be symmetric, within 1e-12 relative.
    const double scale = std::max(1.0, j.cwiseAbs().maxCoeff());
    for (int r = 0; r < n; ++r) {
      for (int c = r + 1; c < n; ++c) {
        if (std::abs(j(r, c) - j(c, r)) > 1e-12 * scale) {
          throw ParseError("asymmetric input: J(" + std::to_string(r + 1) + "," +
                               std::to_string(c + 1) + ")=" + std::to_string(j(r, c)) +
                               " but transpose has " + std::to_string(j(c, r)),
                           path);
        }
        const double sym = 0.5 * (j(r, c) + j(c, r));
        j(r, c) = sym;
        j(c, r) = sym;
      }
    }
  }

  for (int d = 0; d < n; ++d) {
    if (j(d, d) == 0.0) {
      throw SingularityError("zero diagonal entry at index " + std::to_string(d + 1) +
                             " in " + path + "; the model would be singular");
    }
  }
  return InformationModel(std::move(j), std::move(potential));
}

inline InformationModel loadMatrixMarket(const std::string& path, std::ifstream& in) {
  std::string line;
  long lineNo = 0;

  if (!std::getline(in, line)) throw ParseError("empty file", path, 1);
  ++lineNo;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") {
    throw ParseError("missing %%MatrixMarket banner", path, lineNo);
  }
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix" || format != "coordinate") {
    throw ParseError("expected 'matrix coordinate', got '" + object + " " + format + "'", path,
                     lineNo);
  }
  if (field != "real" && field != "integer") {
    throw ParseError("unsupported field type '" + field + "'", path, lineNo);
  }
  if (symmetry != "symmetric" && symmetry != "general") {
    throw ParseError("unsupported symmetry '" + symmetry + "'", path, lineNo);
  }

  int rows = 0, cols = 0;
  long declared = -1;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream sizes(line);
    if (!(sizes >> rows >> cols >> declared)) {
      throw ParseError("malformed size line '" + line + "'", path, lineNo);
    }
    break;
  }
  if (declared < 0) throw ParseError("missing size line", path, lineNo);
  if (rows != cols) {
    throw ParseError("matrix must be square, got " + std::to_string(rows) + "x" +
                         std::to_string(cols),
                     path, lineNo);
  }

  std::vector<detail::Triplet> entries;
  entries.reserve(static_cast<std::size_t>(declared));
  long seen = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    int r = 0, c = 0;
    double v = 0.0;
    if (!(entry >> r >> c >> v)) {
      throw ParseError("malformed entry '" + line + "'", path, lineNo);
    }
    if (r < 1 || r > rows || c < 1 || c > cols) {
      throw ParseError("entry index (" + std::to_string(r) + "," + std::to_string(c) +
                           ") out of range for order " + std::to_string(rows),
                       path, lineNo);
    }
    entries.push_back({r - 1, c - 1, v});
    ++seen;
  }
  if (seen != declared) {
    throw ParseError("size line declared " + std::to_string(declared) + " entries but " +
                         std::to_string(seen) + " were present",
                     path, lineNo);
  }
  return assembleModel(path, rows, entries, symmetry == "symmetric", std::nullopt);
}

inline InformationModel loadJsonModel(const std::string& path, std::ifstream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), path);
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("triplets")) {
    throw ParseError("JSON model requires fields 'n' and 'triplets'", path);
  }
  const int n = doc.at("n").get<int>();
  if (n <= 0) throw ParseError("'n' must be positive", path);

  std::vector<detail::Triplet> entries;
  for (const auto& item : doc.at("triplets")) {
    if (!item.is_array() || item.size() != 3) {
      throw ParseError("each triplet must be [row, col, value]", path);
    }
    const int r = item[0].get<int>();
    const int c = item[1].get<int>();
    const double v = item[2].get<double>();
    if (r < 1 || r > n || c < 1 || c > n) {
      throw ParseError("triplet index (" + std::to_string(r) + "," + std::to_string(c) +
                           ") out of range for order " + std::to_string(n),
                       path);
    }
    entries.push_back({r - 1, c - 1, v});
  }

  std::optional<Vector> potential;
  if (doc.contains("h") && !doc.at("h").is_null()) {
    const auto& h = doc.at("h");
    if (!h.is_array() || static_cast<int>(h.size()) != n) {
      throw ParseError("'h' must be an array of length n", path);
    }
    Vector vec(n);
    for (int i = 0; i < n; ++i) vec(i) = h[static_cast<std::size_t>(i)].get<double>();
    potential = std::move(vec);
  }
  // JSON triplets name each stored entry once; mirror like MM symmetric.
  return assembleModel(path, n, entries, true, std::move(potential));
}

}  // namespace detail

// Reads an information model from Matrix Market coordinate format (.mtx,
// symmetric or general) or from a JSON document {"n":.., "triplets":
// [[row,col,value],..], "h": [..]} with 1-based indices. The result is stored
// canonically symmetric.
inline InformationModel loadMatrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file", path);

  // Sniff the first non-space character: '{' means JSON.
  char first = 0;
  in >> std::ws;
  if (!in.get(first)) throw ParseError("empty file", path);
  in.unget();
  if (first == '{') return detail::loadJsonModel(path, in);
  return detail::loadMatrixMarket(path, in);
}

// Writes J in Matrix Market coordinate symmetric format with round-trippable
// (%.17g) values; reloading reproduces the stored matrix bit-for-bit.
inline void writeMatrixMarket(const InformationModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing", path);
  const Matrix& j = model.matrix();
  const int n = model.size();

  std::vector<std::pair<int, int>> lower;
  for (int c = 0; c < n; ++c) {
    for (int r = c; r < n; ++r) {
      if (j(r, c) != 0.0) lower.emplace_back(r, c);
    }
  }
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << n << " " << n << " " << lower.size() << "\n";
  char buffer[64];
  for (const auto& [r, c] : lower) {
    std::snprintf(buffer, sizeof(buffer), "%d %d %.17g\n", r + 1, c + 1, j(r, c));
    out << buffer;
  }
  if (!out) throw ParseError("write failed", path);
}

}  // namespace pathsum
