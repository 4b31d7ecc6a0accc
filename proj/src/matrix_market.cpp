#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qostiefel/operator.hpp"

namespace qostiefel {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_real(const std::string& tok, const std::string& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) parse_fail(path, line, "trailing characters in number '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    parse_fail(path, line, "expected a real number, got '" + tok + "'");
  }
}

std::size_t parse_index(const std::string& tok, const std::string& path, std::size_t line) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    parse_fail(path, line, "expected a positive integer, got '" + tok + "'");
  return value;
}

}  // namespace

Operator load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_matrix_market: cannot open '" + path + "'");

  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++lineno;
  const auto header = tokenize(lowercase(line));
  if (header.size() < 4 || header[0] != "%%matrixmarket" || header[1] != "matrix")
    parse_fail(path, lineno, "expected '%%MatrixMarket matrix ...' banner");
  const std::string layout = header[2];
  const std::string field = header[3];
  const std::string symmetry = header.size() > 4 ? header[4] : "general";
  if (field != "real") parse_fail(path, lineno, "only real matrices are supported");

  const bool coordinate = layout == "coordinate";
  if (coordinate) {
    if (symmetry != "symmetric")
      parse_fail(path, lineno, "coordinate layout requires 'symmetric' storage");
  } else if (layout == "array") {
    if (symmetry != "general")
      parse_fail(path, lineno, "array layout requires 'general' storage");
  } else {
    parse_fail(path, lineno, "layout must be 'coordinate' or 'array'");
  }

  auto next_content_line = [&]() -> std::vector<std::string> {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line[0] == '%') continue;  // comment
      const auto toks = tokenize(line);
      if (toks.empty()) continue;  // blank
      return toks;
    }
    return {};
  };

  const auto size_toks = next_content_line();
  if (size_toks.empty()) parse_fail(path, lineno, "missing size line");

  if (coordinate) {
    if (size_toks.size() != 3) parse_fail(path, lineno, "size line must be 'rows cols nnz'");
    const std::size_t rows = parse_index(size_toks[0], path, lineno);
    const std::size_t cols = parse_index(size_toks[1], path, lineno);
    const std::size_t nnz = parse_index(size_toks[2], path, lineno);
    if (rows != cols) parse_fail(path, lineno, "matrix must be square");

    DenseMatrix A(rows, cols);
    for (std::size_t k = 0; k < nnz; ++k) {
      const auto toks = next_content_line();
      if (toks.empty())
        parse_fail(path, lineno, "expected " + std::to_string(nnz) + " entries, got " +
                                     std::to_string(k));
      if (toks.size() != 3) parse_fail(path, lineno, "entry line must be 'i j value'");
      const std::size_t i = parse_index(toks[0], path, lineno);
      const std::size_t j = parse_index(toks[1], path, lineno);
      if (i < 1 || i > rows || j < 1 || j > cols)
        parse_fail(path, lineno, "index out of range");
      const double v = parse_real(toks[2], path, lineno);
      A(i - 1, j - 1) = v;
      A(j - 1, i - 1) = v;
    }
    return operator_from_dense(std::move(A));
  }

  // Dense array layout: column-major values, then a symmetry check.
  if (size_toks.size() != 2) parse_fail(path, lineno, "size line must be 'rows cols'");
  const std::size_t rows = parse_index(size_toks[0], path, lineno);
  const std::size_t cols = parse_index(size_toks[1], path, lineno);
  if (rows != cols) parse_fail(path, lineno, "matrix must be square");

  DenseMatrix A(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < rows; ++i) {
      const auto toks = next_content_line();
      if (toks.empty()) parse_fail(path, lineno, "missing matrix entries");
      if (toks.size() != 1) parse_fail(path, lineno, "array entries must be one value per line");
      A(i, j) = parse_real(toks[0], path, lineno);
    }
  }
  const double scale = A.max_abs();
  if (A.symmetry_defect() > 1e-10 * (scale > 0.0 ? scale : 1.0)) {
    throw ContractError("load_matrix_market: '" + path + "' asymmetric beyond 1e-10 (defect " +
                        std::to_string(A.symmetry_defect()) + ")");
  }
  return operator_from_dense(std::move(A));
}

void write_matrix_market(const DenseMatrix& A, const std::string& path) {
  if (A.rows() != A.cols()) throw ShapeError("write_matrix_market: matrix not square");
  std::ofstream out(path);
  if (!out) throw IoError("write_matrix_market: cannot open '" + path + "' for writing");

  std::size_t nnz = 0;
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (A(i, j) != 0.0) ++nnz;

  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << "% lower triangle, 1-based indices\n";
  out << A.rows() << " " << A.cols() << " " << nnz << "\n";
  char buf[64];
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      if (A(i, j) == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g", A(i, j));
      out << (i + 1) << " " << (j + 1) << " " << buf << "\n";
    }
  }
  if (!out) throw IoError("write_matrix_market: write failed for '" + path + "'");
}

}  // namespace qostiefel
