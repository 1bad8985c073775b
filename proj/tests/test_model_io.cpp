#include <cstring>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "support.hpp"
#include "thinsheet/errors.hpp"
#include "thinsheet/material.hpp"
#include "thinsheet/point_cloud.hpp"

using namespace thinsheet;

namespace {

PointCloudModel csv_model(const std::string& text, double voxel = 0.2) {
  std::istringstream in(text);
  return load_model(in, ModelFormat::csv, voxel);
}

std::vector<PointId> scan(const PointCloudModel& m, const Eigen::Vector3d& c, double r) {
  std::vector<PointId> ids;
  for (PointId i = 0; i < m.size(); ++i)
    if ((m[i].position - c).norm() <= r) ids.push_back(i);
  return ids;
}

}  // namespace

TEST(LoadModelTest, single_record) {
  const auto m = csv_model("0,0,0,1.0\n");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].position, Eigen::Vector3d::Zero());
  EXPECT_EQ(m[0].elastic_modulus, 1.0);
}

TEST(LoadModelTest, comments_blank_lines_and_spaces_are_skipped) {
  const auto m = csv_model("# header\n\n 1, 2 ,3,4  \n5,6,7,8 # trailing\n");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[1].position, Eigen::Vector3d(5, 6, 7));
}

TEST(LoadModelTest, negative_modulus_is_a_validation_error) {
  EXPECT_THROW(csv_model("0,0,0,-1\n"), ValidationError);
  EXPECT_THROW(csv_model("0,0,0,0\n"), ValidationError);
  EXPECT_THROW(csv_model("0,inf,0,1\n"), ValidationError);
}

TEST(LoadModelTest, malformed_row_reports_its_line) {
  for (const std::string bad : {"1,2,3\n", "1,2,3,4,5\n", "1,2,x,4\n", "1,,3,4\n"}) {
    try {
      csv_model("0,0,0,1\n# c\n" + bad);
      FAIL() << bad;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 3u) << bad;
      EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
  }
}

TEST(LoadModelTest, empty_input_is_an_empty_model_error) {
  EXPECT_THROW(csv_model(""), EmptyModelError);
  EXPECT_THROW(csv_model("# only comments\n\n"), EmptyModelError);
}

TEST(LoadModelTest, ascii_ply_with_extra_properties_and_faces) {
  const std::string text =
      "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\nproperty float x\nproperty float y\n"
      "property float z\nproperty uchar red\nproperty double stiffness\nelement face 1\n"
      "property list uchar int vertex_indices\nend_header\n0 1 2 255 10.5\n3 4 5 0 20\n3 0 1 1\n";
  std::istringstream in(text);
  const auto m = load_model(in, ModelFormat::ply, 0.2);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].position, Eigen::Vector3d(0, 1, 2));
  EXPECT_EQ(m[0].elastic_modulus, 10.5);
  EXPECT_EQ(m[1].elastic_modulus, 20.0);
}

TEST(LoadModelTest, binary_ply) {
  std::string text =
      "ply\nformat binary_little_endian 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
      "property double z\nproperty float stiffness\nend_header\n";
  auto put = [&](auto v) {
    char b[sizeof v];
    std::memcpy(b, &v, sizeof v);
    text.append(b, sizeof v);
  };
  put(1.25), put(-2.0), put(0.5), put(3.0f);
  put(0.1), put(0.2), put(0.3), put(7.0f);
  std::istringstream in(text);
  const auto m = load_model(in, ModelFormat::ply, 0.2);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].position, Eigen::Vector3d(1.25, -2.0, 0.5));
  EXPECT_EQ(m[1].position, Eigen::Vector3d(0.1, 0.2, 0.3));
  EXPECT_EQ(m[1].elastic_modulus, 7.0);
}

TEST(LoadModelTest, ply_errors) {
  auto load = [](const std::string& s) {
    std::istringstream in(s);
    return load_model(in, ModelFormat::ply, 0.2);
  };
  EXPECT_THROW(load("plx\n"), ParseError);
  EXPECT_THROW(load("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n"),
               ParseError);  // no stiffness
  EXPECT_THROW(load("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n"
                    "property float stiffness\nend_header\n0 0 0\n"),
               ParseError);
  EXPECT_THROW(load("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n"
                    "property float stiffness\nend_header\n0 0 0 -2\n"),
               ValidationError);
  EXPECT_THROW(load("ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\n"
                    "property float stiffness\nend_header\n"),
               EmptyModelError);
}

TEST(LoadModelTest, bundled_ellipsoid_matches_generator_extents) {
  const auto path = test_support::data_dir() / "ellipsoid_40k.csv";
  const auto m = load_model_file(path, 0.2);
  EXPECT_EQ(m.size(), 40000u);

  // The generator records the extents it produced on its second comment line.
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::istringstream words(line);
  std::string hash, tag;
  Eigen::Vector3d lo, hi;
  words >> hash >> tag >> lo.x() >> lo.y() >> lo.z() >> hi.x() >> hi.y() >> hi.z();
  ASSERT_EQ(tag, "extents");
  EXPECT_EQ(m.bounds().min, lo);
  EXPECT_EQ(m.bounds().max, hi);
  for (const auto& p : m.points()) {
    ASSERT_TRUE(m.bounds().contains(p.position));
    const Eigen::Vector3d s = p.position.cwiseQuotient(Eigen::Vector3d(2.5, 1.5, 1.0));
    ASSERT_NEAR(s.norm(), 1.0, 1e-8);
  }
}

TEST(QueryTest, far_center_is_empty_and_tiny_radius_finds_the_point) {
  std::mt19937_64 rng(1);
  std::vector<MaterialPoint> pts;
  for (int k = 0; k < 50; ++k) pts.push_back({test_support::random_unit(rng), 1.0});
  const PointCloudModel m(pts, 0.2);
  EXPECT_TRUE(m.query_neighborhood({100, 0, 0}, 1.0).empty());
  const auto hit = m.query_neighborhood(pts[17].position, 1e-12);
  ASSERT_EQ(hit.size(), 1u);
  EXPECT_EQ(hit[0].id, 17u);
  EXPECT_EQ(hit[0].point.position, pts[17].position);
}

TEST(QueryTest, matches_linear_scan_on_random_clouds) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0), r(0.01, 1.5), voxel(0.05, 1.0);
  for (int cloud = 0; cloud < 20; ++cloud) {
    std::vector<MaterialPoint> pts;
    for (int k = 0; k < 1000; ++k) pts.push_back({{u(rng), u(rng), u(rng)}, 1.0});
    const PointCloudModel m(pts, voxel(rng));
    for (int q = 0; q < 50; ++q) {
      const Eigen::Vector3d c(u(rng), u(rng), u(rng));
      const double radius = q == 0 ? 0.5 : r(rng);
      const auto expected = scan(m, c, radius);
      EXPECT_EQ(m.query_ids(c, radius), expected);
      const auto full = m.query_neighborhood(c, radius);
      ASSERT_EQ(full.size(), expected.size());
      for (std::size_t k = 0; k < full.size(); ++k) EXPECT_EQ(full[k].id, expected[k]);
    }
  }
}

TEST(QueryTest, boundary_distance_is_inclusive) {
  const PointCloudModel m({{{0, 0, 0}, 1.0}, {{0.5, 0, 0}, 1.0}, {{0.25, 0, 0}, 1.0}}, 0.1);
  EXPECT_EQ(m.query_ids({0, 0, 0}, 0.5), (std::vector<PointId>{0, 1, 2}));
  EXPECT_EQ(m.query_ids({0.25, 0, 0}, 0.0), (std::vector<PointId>{2}));
  EXPECT_TRUE(m.query_ids({0, 0, 0}, -1.0).empty());
}

TEST(QueryTest, nearest_matches_scan_with_smallest_id_on_ties) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> grid(-5, 5);
  std::vector<MaterialPoint> pts;
  for (int k = 0; k < 300; ++k) pts.push_back({{grid(rng) * 0.1, grid(rng) * 0.1, grid(rng) * 0.1}, 1.0});
  const PointCloudModel m(pts, 0.2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int q = 0; q < 500; ++q) {
    const Eigen::Vector3d c = q % 2 ? Eigen::Vector3d(u(rng), u(rng), u(rng))
                                    : Eigen::Vector3d(grid(rng) * 0.05, grid(rng) * 0.05, grid(rng) * 0.05);
    PointId best = 0;
    for (PointId i = 1; i < m.size(); ++i)
      if ((m[i].position - c).squaredNorm() < (m[best].position - c).squaredNorm()) best = i;
    EXPECT_EQ(m.nearest(c), best);
  }
}

TEST(SaveModelTest, csv_round_trip_is_bit_exact) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e3, 1e3), e(1e-3, 1e6);
  std::vector<MaterialPoint> pts;
  for (int k = 0; k < 2000; ++k) pts.push_back({{u(rng), u(rng) * 1e-7, u(rng) * 1e5}, e(rng)});
  const PointCloudModel m(pts, 50.0);
  std::stringstream s;
  save_model_csv(s, m);
  const auto back = load_model(s, ModelFormat::csv, 50.0);
  ASSERT_EQ(back.size(), m.size());
  for (PointId i = 0; i < m.size(); ++i) {
    ASSERT_EQ(back[i].position, m[i].position);
    ASSERT_EQ(back[i].elastic_modulus, m[i].elastic_modulus);
  }
}

TEST(RigidityTest, examples) {
  EXPECT_DOUBLE_EQ(flexural_rigidity(12.0, 1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(flexural_rigidity(1.0, 1.0, 0.0), 1.0 / 12.0);
  EXPECT_NEAR(flexural_rigidity(11.52, 1.0, 0.2), 1.0, 1e-15);
  EXPECT_THROW(flexural_rigidity(0.0, 1.0, 0.2), ContractError);
}

TEST(RigidityTest, homogeneous_in_modulus_and_cubic_in_thickness) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> e(0.1, 1e4), h(0.01, 2.0), nu(0.0, 0.29), k(0.1, 10.0);
  for (int t = 0; t < 1000; ++t) {
    const double E = e(rng), H = h(rng), N = nu(rng), K = k(rng);
    const double d = flexural_rigidity(E, H, N);
    EXPECT_NEAR(flexural_rigidity(K * E, H, N), K * d, 1e-13 * K * d);
    EXPECT_NEAR(flexural_rigidity(E, K * H, N), K * K * K * d, 1e-13 * K * K * K * d);
    EXPECT_GT(flexural_rigidity(E * 1.001, H, N), d);
    EXPECT_GT(flexural_rigidity(E, H * 1.001, N), d);
  }
}

TEST(MaterialConfigTest, validation) {
  MaterialConfig c;
  EXPECT_NO_THROW(c.validate());
  c.poisson = 0.3;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.neighborhood_radius = c.proxy_radius;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.thickness = 0.0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.contact_area = -1.0;
  EXPECT_THROW(c.validate(), ValidationError);
}
