#pragma once

#include <filesystem>
#include <iosfwd>

#include "thinsheet/plate/grid.hpp"

namespace thinsheet::plate {

/// Square field on a grid of the given spacing.
struct MatrixFile {
  Grid<double> values;
  double spacing = 0.0;
};

/// Text format: a header line `n spacing`, then n lines of n values (line i
/// holds nodes (i, 0..n-1)), 9 significant digits.
void write_matrix(std::ostream& out, const Grid<double>& values, double spacing);
MatrixFile read_matrix(std::istream& in);

void write_matrix_file(const std::filesystem::path& path, const Grid<double>& values, double spacing);
MatrixFile read_matrix_file(const std::filesystem::path& path);

}  // namespace thinsheet::plate
