#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "thinsheet/errors.hpp"
#include "thinsheet/proxy.hpp"

using namespace thinsheet;

namespace {

MaterialConfig config() {
  MaterialConfig c;
  c.proxy_radius = 0.1;
  return c;
}

PointCloudModel flat_model() { return PointCloudModel(test_support::flat_sheet(1.0, 0.02, 100.0), 0.2); }

constexpr double kDelta = 0.05;  // proxy_offset(config())

}  // namespace

TEST(EstimateNormalTest, examples) {
  const PointCloudModel one({{{0, 0, 0}, 1.0}}, 0.2);
  const auto n = estimate_normal(one, Eigen::Vector3d(0, 0.05, 0), 0.1);
  ASSERT_TRUE(n);
  EXPECT_LT((*n - Eigen::Vector3d(0, 1, 0)).norm(), 1e-15);

  const PointCloudModel pair({{{-0.05, 0, 0}, 1.0}, {{0.05, 0, 0}, 1.0}}, 0.2);
  EXPECT_FALSE(estimate_normal(pair, Eigen::Vector3d::Zero(), 0.1));

  EXPECT_FALSE(estimate_normal(one, Eigen::Vector3d(0, 0.2, 0), 0.1));  // nothing inside
  EXPECT_FALSE(estimate_normal(one, Eigen::Vector3d(0, 0.1, 0), 0.1));  // on the ball surface is outside
  EXPECT_THROW(estimate_normal(one, Eigen::Vector3d::Zero(), 0.0), ContractError);

  // a point at the center is counted as inside but adds no direction
  const PointCloudModel centered({{{0, 0, 0}, 1.0}, {{0, -0.05, 0}, 1.0}}, 0.2);
  const auto m = estimate_normal(centered, Eigen::Vector3d::Zero(), 0.1);
  ASSERT_TRUE(m);
  EXPECT_LT((*m - Eigen::Vector3d(0, 1, 0)).norm(), 1e-15);
  EXPECT_FALSE(estimate_normal(PointCloudModel({{{0, 0, 0}, 1.0}}, 0.2), Eigen::Vector3d::Zero(), 0.1));
}

TEST(EstimateNormalTest, plane_normal_within_five_degrees) {
  const auto model = flat_model();
  std::mt19937_64 rng(30);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Vector3d proxy(t == 0 ? 0.0 : u(rng), t == 0 ? 0.0 : u(rng), 0.05);
    const auto n = estimate_normal(model, proxy, 0.1);
    ASSERT_TRUE(n);
    EXPECT_NEAR(n->norm(), 1.0, 1e-12);
    EXPECT_GT(n->z(), std::cos(5.0 * M_PI / 180.0));
  }
}

TEST(EstimateNormalTest, rotation_equivariance) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int t = 0; t < 200; ++t) {
    std::vector<MaterialPoint> pts;
    for (int k = 0; k < 30; ++k) pts.push_back({{u(rng), u(rng), u(rng) * 0.3}, 1.0});
    const Eigen::Matrix3d rot = test_support::random_rotation(rng);
    const Eigen::Vector3d shift(u(rng), u(rng), u(rng));
    std::vector<MaterialPoint> moved;
    for (const auto& p : pts) moved.push_back({rot * p.position + shift, 1.0});
    const Eigen::Vector3d proxy(u(rng) * 0.2, u(rng) * 0.2, 0.04);
    const auto a = estimate_normal(PointCloudModel(pts, 0.2), proxy, 0.1);
    const auto b = estimate_normal(PointCloudModel(moved, 0.2), rot * proxy + shift, 0.1);
    ASSERT_EQ(a.has_value(), b.has_value());
    if (a) EXPECT_LT((rot * *a - *b).norm(), 1e-9);
  }
}

TEST(CollisionTest, examples) {
  const Eigen::Vector3d up(0, 1, 0);
  EXPECT_TRUE(detect_collision(up, Eigen::Vector3d(0, -1, 0)));
  EXPECT_FALSE(detect_collision(up, Eigen::Vector3d(0, 1, 0)));
  EXPECT_FALSE(detect_collision(up, Eigen::Vector3d(1, 0, 0)));
  EXPECT_FALSE(detect_collision(up, Eigen::Vector3d::Zero()));

  ContactState s = ContactState::free_at({1, 2, 3});
  EXPECT_THROW(detect_collision(s), ContractError);
  s.normal = up;
  s.hip = {1, 1.5, 3};
  EXPECT_TRUE(detect_collision(s));
}

TEST(CollisionTest, positive_scaling_does_not_change_the_verdict) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> k(1e-6, 1e6);
  for (int t = 0; t < 10000; ++t) {
    const Eigen::Vector3d n = test_support::random_unit(rng), v = test_support::random_unit(rng);
    const bool base = detect_collision(n, v);
    EXPECT_EQ(detect_collision(k(rng) * n, v), base);
    EXPECT_EQ(detect_collision(n, k(rng) * v), base);
    EXPECT_EQ(base, n.dot(v) < 0.0);
  }
}

TEST(ContactStateTest, hip_vector_is_exact) {
  ContactState s;
  s.hip = {0.1, 0.2, 0.3};
  s.proxy = {0.7, -0.4, 1e-9};
  EXPECT_EQ(s.hip_vector(), Eigen::Vector3d(0.1 - 0.7, 0.2 + 0.4, 0.3 - 1e-9));
}

TEST(UpdateProxyTest, free_motion_tracks_the_hip) {
  const auto model = flat_model();
  auto s = ContactState::free_at({0, 0, 1});
  for (double z : {0.9, 0.5, 0.3, 0.2}) {
    s = update_proxy(model, s, {0.1, -0.2, z}, config());
    EXPECT_FALSE(s.in_contact);
    EXPECT_EQ(s.proxy, s.hip);
    EXPECT_EQ(s.hip, Eigen::Vector3d(0.1, -0.2, z));
  }
}

TEST(UpdateProxyTest, straight_push_into_plane_keeps_lateral_position) {
  const auto model = flat_model();
  auto s = ContactState::free_at({0.13, -0.07, 0.5});
  for (double z : {0.2, 0.03, -0.05, -0.2}) {
    s = update_proxy(model, s, {0.13, -0.07, z}, config());
    if (z >= kDelta) continue;
    ASSERT_TRUE(s.in_contact) << z;
    EXPECT_NEAR(s.proxy.x(), 0.13, 1e-12);
    EXPECT_NEAR(s.proxy.y(), -0.07, 1e-12);
    EXPECT_NEAR(s.proxy.z(), kDelta, 1e-12);
    ASSERT_TRUE(s.normal);
    EXPECT_NEAR(s.normal->norm(), 1.0, 1e-9);
    EXPECT_GT(s.normal->z(), 0.99);
  }
}

TEST(UpdateProxyTest, fast_move_through_plane_is_caught) {
  const auto model = flat_model();
  const auto s = update_proxy(model, ContactState::free_at({0, 0, 0.6}), {0.02, 0, -0.4}, config());
  ASSERT_TRUE(s.in_contact);
  EXPECT_NEAR(s.proxy.z(), kDelta, 1e-12);
  EXPECT_NEAR(s.proxy.x(), 0.02, 1e-12);
}

TEST(UpdateProxyTest, diagonal_motion_slides_by_tangential_component) {
  const auto model = flat_model();
  auto s = update_proxy(model, ContactState::free_at({0, 0, 0.3}), {0, 0, 0.0}, config());
  ASSERT_TRUE(s.in_contact);
  const Eigen::Vector3d start = s.proxy;
  s = update_proxy(model, s, {0.3, 0.1, -0.05}, config());
  ASSERT_TRUE(s.in_contact);
  EXPECT_NEAR(s.proxy.x(), start.x() + 0.3, 1e-9);
  EXPECT_NEAR(s.proxy.y(), start.y() + 0.1, 1e-9);
  EXPECT_NEAR(s.proxy.z(), kDelta, 1e-12);
}

TEST(UpdateProxyTest, lifting_above_offset_releases_contact) {
  const auto model = flat_model();
  auto s = update_proxy(model, ContactState::free_at({0, 0, 0.3}), {0, 0, -0.02}, config());
  ASSERT_TRUE(s.in_contact);
  s = update_proxy(model, s, {0.01, 0, 0.06}, config());
  EXPECT_FALSE(s.in_contact);
  EXPECT_EQ(s.proxy, s.hip);
}

TEST(UpdateProxyTest, monotone_penetration_never_releases) {
  std::mt19937_64 rng(33);
  const auto plane = flat_model();
  const PointCloudModel ball(test_support::sphere_cloud(Eigen::Vector3d::Zero(), 1.0, 20000, 50.0), 0.2);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int t = 0; t < 20; ++t) {
    const bool use_ball = t % 2;
    const auto& model = use_ball ? ball : plane;
    Eigen::Vector3d start(u(rng), u(rng), use_ball ? 1.4 : 0.4);
    const Eigen::Vector3d dir = (Eigen::Vector3d(u(rng), u(rng), -1.0)).normalized();
    auto s = ContactState::free_at(start);
    bool touched = false;
    for (int k = 1; k <= 60; ++k) {
      s = update_proxy(model, s, start + 0.01 * k * dir, config());
      if (touched) ASSERT_TRUE(s.in_contact) << "trial " << t << " step " << k;
      touched = touched || s.in_contact;
    }
    EXPECT_TRUE(touched);
  }
}

TEST(UpdateProxyTest, sphere_fixture_holds_proxy_at_offset_along_radial) {
  const PointCloudModel ball(test_support::sphere_cloud(Eigen::Vector3d::Zero(), 1.0, 20000, 50.0), 0.2);
  auto s = ContactState::free_at({0.0, 0.0, 1.5});
  s = update_proxy(ball, s, {0.0, 0.0, 0.97}, config());
  ASSERT_TRUE(s.in_contact);
  EXPECT_NEAR(s.proxy.norm(), 1.0 + kDelta, 2e-4);
  // slide around: the proxy stays on the offset sphere, on the HIP's radial
  std::mt19937_64 rng(34);
  for (int k = 0; k < 30; ++k) {
    const double a = 0.01 * k;
    const Eigen::Vector3d hip = 0.96 * Eigen::Vector3d(std::sin(a), 0.0, std::cos(a));
    s = update_proxy(ball, s, hip, config());
    ASSERT_TRUE(s.in_contact);
    EXPECT_NEAR(s.proxy.norm(), 1.0 + kDelta, 2e-4);
    EXPECT_LT((s.proxy.normalized() - hip.normalized()).norm(), 2e-3);
    EXPECT_GT(s.normal->dot(s.proxy.normalized()), 0.99);
  }
}

TEST(LocalSurfaceTest, plane_fallback_and_orientation) {
  const auto model = flat_model();
  const auto surface = fit_local_surface(model, {0.0, 0.0, 0.05}, {0, 0, 1}, 0.3);
  EXPECT_EQ(surface.kind, LocalSurface::Kind::plane);
  EXPECT_NEAR(surface.normal.z(), 1.0, 1e-12);
  EXPECT_NEAR(surface.signed_distance({5, 5, 0.2}), 0.2, 1e-12);
  const auto flipped = fit_local_surface(model, {0.0, 0.0, -0.05}, {0, 0, -1}, 0.3);
  EXPECT_NEAR(flipped.normal.z(), -1.0, 1e-12);

  const PointCloudModel sparse({{{0, 0, 0}, 1.0}}, 0.2);
  const auto anchor_plane = fit_local_surface(sparse, {1, 2, 3}, {0, 2, 0}, 0.3);
  EXPECT_EQ(anchor_plane.kind, LocalSurface::Kind::plane);
  EXPECT_EQ(anchor_plane.point, Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(anchor_plane.normal, Eigen::Vector3d(0, 1, 0));
}

TEST(LocalSurfaceTest, sphere_inside_and_outside) {
  const PointCloudModel ball(test_support::sphere_cloud({1, 0, 0}, 1.0, 20000, 50.0), 0.2);
  const auto outside = fit_local_surface(ball, {1, 0, 1.05}, {0, 0, 1}, 0.3);
  ASSERT_EQ(outside.kind, LocalSurface::Kind::sphere);
  EXPECT_NEAR(outside.sphere.radius, 1.0, 1e-6);
  EXPECT_NEAR(outside.signed_distance({1, 0, 1.2}), 0.2, 1e-6);
  EXPECT_GT(outside.normal_at({1, 0, 1.2}).z(), 0.999);
  // seen from inside (a concave shell) the outward side faces the center
  const auto inside = fit_local_surface(ball, {1, 0, 0.95}, {0, 0, -1}, 0.3);
  ASSERT_EQ(inside.kind, LocalSurface::Kind::sphere);
  EXPECT_NEAR(inside.signed_distance({1, 0, 0.8}), 0.2, 1e-6);
  EXPECT_NEAR((inside.project({1, 0, 0.5}, 0.05) - Eigen::Vector3d(1, 0, 0.95)).norm(), 0.0, 1e-6);
}
