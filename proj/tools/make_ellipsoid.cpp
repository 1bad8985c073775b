// Deterministic point cloud on an ellipsoid with a linear modulus ramp in x.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Write a spiral-sampled ellipsoid point cloud as x,y,z,E rows"};
  std::string out;
  long count = 40000;
  double a = 2.5, b = 1.5, c = 1.0, e_min = 50.0, e_max = 250.0;
  app.add_option("--out", out, "output CSV path")->required();
  app.add_option("--count", count, "number of points")->check(CLI::PositiveNumber);
  app.add_option("--a", a, "semi-axis along x (cm)")->check(CLI::PositiveNumber);
  app.add_option("--b", b, "semi-axis along y (cm)")->check(CLI::PositiveNumber);
  app.add_option("--c", c, "semi-axis along z (cm)")->check(CLI::PositiveNumber);
  app.add_option("--e-min", e_min, "modulus at x = -a")->check(CLI::PositiveNumber);
  app.add_option("--e-max", e_max, "modulus at x = +a")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  std::ofstream file(out);
  if (!file) {
    std::cerr << "cannot open " << out << "\n";
    return 1;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  double lo[3] = {INFINITY, INFINITY, INFINITY}, hi[3] = {-INFINITY, -INFINITY, -INFINITY};
  std::string body;
  char line[160];
  for (long k = 0; k < count; ++k) {
    const double s = 1.0 - (2.0 * k + 1.0) / count;  // height on the unit sphere
    const double r = std::sqrt((1.0 - s) * (1.0 + s));
    const double phi = golden * k;
    const double p[3] = {a * r * std::cos(phi), b * r * std::sin(phi), c * s};
    const double e = e_min + (e_max - e_min) * (p[0] + a) / (2.0 * a);
    std::snprintf(line, sizeof line, "%.9g,%.9g,%.9g,%.9g\n", p[0], p[1], p[2], e);
    body += line;
    double q[3];  // extents as written, after rounding
    std::sscanf(line, "%lf,%lf,%lf", &q[0], &q[1], &q[2]);
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], q[d]);
      hi[d] = std::max(hi[d], q[d]);
    }
  }
  std::snprintf(line, sizeof line, "# ellipsoid %.9g %.9g %.9g, %ld points\n", a, b, c, count);
  file << line;
  std::snprintf(line, sizeof line, "# extents %.17g %.17g %.17g %.17g %.17g %.17g\n", lo[0], lo[1], lo[2], hi[0], hi[1],
                hi[2]);
  file << line << body;
  return file ? 0 : 1;
}
