#pragma once

// Seeded sampling of Gaussian measurement matrices, k-sparse unit signals,
// and clean sign responses, plus locale-independent CSV matrix round-trips.

#include "onebit/linops.hpp"
#include "onebit/rng.hpp"

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>

namespace onebit {

struct MeasurementMatrix {
  Matrix rows;  // m x n, i.i.d. N(0,1)
  std::uint64_t seed = 0;

  Index m() const { return rows.rows(); }
  Index n() const { return rows.cols(); }
};

// Guard against runaway allocations; the library targets desk-scale sizes.
inline constexpr std::uint64_t kMaxMatrixEntries = 200'000'000ULL;

/// m x n matrix of i.i.d. standard normals, filled from the seeded stream in
/// row-major order.
inline MeasurementMatrix sample_gaussian_matrix(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1)
    throw std::invalid_argument("sample_gaussian_matrix: need m, n >= 1");
  if (static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n) > kMaxMatrixEntries)
    throw std::length_error("sample_gaussian_matrix: matrix exceeds memory budget");
  MeasurementMatrix out;
  out.seed = seed;
  out.rows.resize(m, n);
  GaussianStream stream(seed);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) out.rows(i, j) = stream.normal();
  return out;
}

/// Support uniform among k-subsets of [n], values i.i.d. N(0,1) on the
/// support, then l2-normalized. Exactly k nonzeros with probability 1.
inline SparseUnitVector sample_sparse_unit(Index n, Index k, std::uint64_t seed) {
  if (k < 1 || k > n)
    throw std::invalid_argument("sample_sparse_unit: need 1 <= k <= n");
  GaussianStream stream(seed);
  const IndexSet support = sample_subset(n, k, stream.raw());
  Vector dense = Vector::Zero(n);
  for (Index j : support) dense[j] = stream.normal();
  dense /= dense.norm();
  return SparseUnitVector(std::move(dense));
}

/// y = sgn(Ax) under the sgn(0) = +1 convention.
inline SignVector clean_responses(const MeasurementMatrix& A, const SparseUnitVector& x) {
  if (A.n() != x.dim())
    throw std::invalid_argument("clean_responses: dimension mismatch");
  return SignVector(sign_vector(A.rows * x.dense()));
}

// --- CSV round-trip: one row per line, comma separated, 17 significant
// digits, '.' decimal point regardless of locale. ---

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline void matrix_to_csv(const Matrix& a, std::ostream& os) {
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) os << ',';
      os << format_double(a(i, j));
    }
    os << '\n';
  }
}

struct CsvError : std::runtime_error {
  int line;
  CsvError(int line_number, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + what),
        line(line_number) {}
};

/// Parses a rectangular CSV of doubles. Throws CsvError with the offending
/// 1-based line number on malformed input.
inline Matrix matrix_from_csv(std::istream& is) {
  std::vector<std::vector<double>> data;
  std::string line;
  int line_number = 0;
  while (std::getline(is, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (;;) {
      while (p < end && *p == ' ') ++p;
      double value = 0.0;
      auto res = std::from_chars(p, end, value);
      if (res.ec != std::errc{})
        throw CsvError(line_number, "expected a number");
      row.push_back(value);
      p = res.ptr;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') throw CsvError(line_number, "expected ','");
      ++p;
    }
    if (!data.empty() && row.size() != data.front().size())
      throw CsvError(line_number, "inconsistent column count");
    data.push_back(std::move(row));
  }
  if (data.empty()) throw CsvError(line_number == 0 ? 1 : line_number, "empty input");
  Matrix out(static_cast<Index>(data.size()), static_cast<Index>(data.front().size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      out(i, j) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return out;
}

}  // namespace onebit
