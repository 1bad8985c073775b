#include "thinsheet/plate/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "thinsheet/errors.hpp"

namespace thinsheet::plate {

namespace {

std::vector<double> parse_numbers(const std::string& line, std::size_t line_no) {
  std::vector<double> values;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    double v = 0.0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (next < end && *next != ' ' && *next != '\t' && *next != '\r'))
      throw ParseError(line_no, "expected a number");
    values.push_back(v);
    p = next;
  }
  return values;
}

}  // namespace

void write_matrix(std::ostream& out, const Grid<double>& values, double spacing) {
  if (values.rows() != values.cols()) throw ContractError("matrix file holds square fields only");
  const Eigen::Index n = values.rows();
  out << std::setprecision(9) << n << ' ' << spacing << '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j) out << ' ';
      out << values(i, j);
    }
    out << '\n';
  }
}

MatrixFile read_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError(0, "empty matrix file");
  const auto header = parse_numbers(line, line_no);
  if (header.size() != 2 || header[0] < 1 || header[0] != std::floor(header[0]))
    throw ParseError(line_no, "header must be `n spacing`");
  if (!(header[1] > 0.0)) throw ParseError(line_no, "spacing must be positive");

  const auto n = static_cast<Eigen::Index>(header[0]);
  MatrixFile file{Grid<double>(n, n), header[1]};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!next_line()) throw ParseError(line_no, "matrix ends early");
    const auto row = parse_numbers(line, line_no);
    if (static_cast<Eigen::Index>(row.size()) != n) throw ParseError(line_no, "row length differs from n");
    for (Eigen::Index j = 0; j < n; ++j) file.values(i, j) = row[static_cast<std::size_t>(j)];
  }
  if (!file.values.allFinite()) throw ParseError(0, "matrix contains non-finite values");
  return file;
}

void write_matrix_file(const std::filesystem::path& path, const Grid<double>& values, double spacing) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_matrix(out, values, spacing);
}

MatrixFile read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_matrix(in);
}

}  // namespace thinsheet::plate
