#include "circuitry/matrix_io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace circuitry {
namespace {

[[noreturn]] void fail(long line, const std::string& msg) {
  throw InputError("line " + std::to_string(line) + ": " + msg);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool next_content_line(std::istream& in, std::string& out, long& line_no) {
  while (std::getline(in, out)) {
    ++line_no;
    const auto first = out.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (out[first] == '%') continue;
    return true;
  }
  return false;
}

// Unlike std::stod this lets subnormals through; only genuine overflow and
// trailing junk get rejected.
bool str_to_double(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) return false;
  if (errno == ERANGE && std::abs(v) == HUGE_VAL) return false;
  out = v;
  return true;
}

double parse_double(const std::string& tok, long line_no) {
  double v = 0.0;
  if (!str_to_double(tok, v)) fail(line_no, "not a number: '" + tok + "'");
  return v;
}

long parse_index(const std::string& tok, long line_no) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    fail(line_no, "not an integer: '" + tok + "'");
  }
  if (used != tok.size()) fail(line_no, "trailing characters after integer: '" + tok + "'");
  return v;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> toks;
  std::istringstream iss(s);
  std::string t;
  while (iss >> t) toks.push_back(t);
  return toks;
}

}  // namespace

Matrix parse_matrix_market(std::istream& in) {
  long line_no = 0;
  std::string line;
  if (!std::getline(in, line)) throw InputError("line 1: empty input");
  ++line_no;
  std::vector<std::string> banner = split_ws(line);
  if (banner.size() != 5 || lower(banner[0]) != "%%matrixmarket" || lower(banner[1]) != "matrix")
    fail(line_no, "expected banner '%%MatrixMarket matrix <format> <field> <symmetry>'");
  const std::string format = lower(banner[2]);
  const std::string field = lower(banner[3]);
  const std::string symmetry = lower(banner[4]);
  if (format != "array" && format != "coordinate")
    fail(line_no, "unsupported format '" + banner[2] + "', expected array or coordinate");
  if (field != "real" && field != "integer")
    fail(line_no, "unsupported field '" + banner[3] + "', only real and integer entries load");
  if (symmetry != "general" && symmetry != "symmetric")
    fail(line_no, "unsupported symmetry '" + banner[4] + "', only general and symmetric load");
  const bool symmetric = symmetry == "symmetric";

  if (!next_content_line(in, line, line_no)) fail(line_no + 1, "missing size line");
  std::vector<std::string> size_toks = split_ws(line);
  const std::size_t expect_sizes = (format == "coordinate") ? 3u : 2u;
  if (size_toks.size() != expect_sizes)
    fail(line_no, "size line needs " + std::to_string(expect_sizes) + " numbers");
  const long rows = parse_index(size_toks[0], line_no);
  const long cols = parse_index(size_toks[1], line_no);
  if (rows < 1 || cols < 1) fail(line_no, "matrix dimensions must be positive");
  if (symmetric && rows != cols) fail(line_no, "symmetric storage needs a square matrix");

  Matrix a = Matrix::Zero(rows, cols);
  if (format == "array") {
    // Column-major scan; symmetric storage lists the lower triangle only.
    long col = 0;
    long row = 0;
    long count = 0;
    const long total = symmetric ? rows * (rows + 1) / 2 : rows * cols;
    while (count < total) {
      if (!next_content_line(in, line, line_no))
        fail(line_no + 1, "expected " + std::to_string(total) + " values, got " +
                              std::to_string(count));
      for (const std::string& tok : split_ws(line)) {
        if (count >= total) fail(line_no, "more values than the size line announced");
        const double v = parse_double(tok, line_no);
        a(row, col) = v;
        if (symmetric) a(col, row) = v;
        ++count;
        ++row;
        if (row == rows) {
          ++col;
          row = symmetric ? col : 0;
        }
      }
    }
    if (next_content_line(in, line, line_no))
      fail(line_no, "more values than the size line announced");
  } else {
    const long nnz = parse_index(size_toks[2], line_no);
    if (nnz < 0) fail(line_no, "entry count must be nonnegative");
    std::set<std::pair<long, long>> seen;
    for (long k = 0; k < nnz; ++k) {
      if (!next_content_line(in, line, line_no))
        fail(line_no + 1,
             "expected " + std::to_string(nnz) + " entries, got " + std::to_string(k));
      std::vector<std::string> toks = split_ws(line);
      if (toks.size() != 3) fail(line_no, "coordinate entries need 'row col value'");
      const long r = parse_index(toks[0], line_no);
      const long c = parse_index(toks[1], line_no);
      const double v = parse_double(toks[2], line_no);
      if (r < 1 || r > rows || c < 1 || c > cols)
        fail(line_no, "entry (" + std::to_string(r) + ", " + std::to_string(c) +
                          ") outside a " + std::to_string(rows) + " x " + std::to_string(cols) +
                          " matrix");
      if (symmetric && r < c)
        fail(line_no, "symmetric storage lists the lower triangle, got (" + std::to_string(r) +
                          ", " + std::to_string(c) + ")");
      if (!seen.emplace(r, c).second)
        fail(line_no,
             "duplicate entry at (" + std::to_string(r) + ", " + std::to_string(c) + ")");
      a(r - 1, c - 1) = v;
      if (symmetric) a(c - 1, r - 1) = v;
    }
    if (next_content_line(in, line, line_no))
      fail(line_no, "more entries than the size line announced");
  }
  return a;
}

Matrix parse_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    long col_no = 0;
    for (;;) {
      ++col_no;
      const std::size_t comma = line.find(',', start);
      std::string tok = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                      : comma - start);
      const auto b = tok.find_first_not_of(" \t");
      const auto e = tok.find_last_not_of(" \t");
      if (b == std::string::npos)
        throw InputError("line " + std::to_string(line_no) + ", column " +
                         std::to_string(col_no) + ": empty field");
      tok = tok.substr(b, e - b + 1);
      double v = 0.0;
      if (!str_to_double(tok, v))
        throw InputError("line " + std::to_string(line_no) + ", column " +
                         std::to_string(col_no) + ": not a number: '" + tok + "'");
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(rows.front().size()) + " fields, got " +
                       std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("empty matrix");
  Matrix a(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return a;
}

Matrix load_matrix(const std::string& path, MatrixFormat format) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  if (format == MatrixFormat::Auto) {
    std::string first;
    std::getline(in, first);
    in.clear();
    in.seekg(0);
    format = (lower(first).rfind("%%matrixmarket", 0) == 0) ? MatrixFormat::MatrixMarket
                                                            : MatrixFormat::Csv;
  }
  try {
    return format == MatrixFormat::MatrixMarket ? parse_matrix_market(in) : parse_csv(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void save_matrix_market(const std::string& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot open for writing");
  out << "%%MatrixMarket matrix array real general\n";
  out << a.rows() << " " << a.cols() << "\n";
  char buf[40];
  for (long j = 0; j < a.cols(); ++j)
    for (long i = 0; i < a.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", a(i, j));
      out << buf << "\n";
    }
  if (!out) throw InputError(path + ": write failed");
}

void save_csv(const std::string& path, const Matrix& a) {
  std::ofstream out(path);
  if (!out) throw InputError(path + ": cannot open for writing");
  char buf[40];
  for (long i = 0; i < a.rows(); ++i) {
    for (long j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", a(i, j));
      out << buf << (j + 1 == a.cols() ? "" : ",");
    }
    out << "\n";
  }
  if (!out) throw InputError(path + ": write failed");
}

}  // namespace circuitry
