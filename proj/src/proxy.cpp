#include "thinsheet/proxy.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "thinsheet/errors.hpp"

namespace thinsheet {

namespace {

constexpr int kMaxSlideIterations = 200;

double fit_radius(const MaterialConfig& config) { return 3.0 * config.proxy_radius; }

ContactState free_state(const PointCloudModel& model, const Eigen::Vector3d& hip, const MaterialConfig& config) {
  ContactState s = ContactState::free_at(hip);
  s.normal = estimate_normal(model, hip, config.proxy_radius);
  return s;
}

// Moves the proxy along the offset surface toward the point of it nearest the
// HIP, refitting the surface whenever the proxy leaves the fitted region.
Eigen::Vector3d slide(const PointCloudModel& model, Eigen::Vector3d p, const Eigen::Vector3d& hip, LocalSurface surface,
                      const MaterialConfig& config) {
  const double delta = proxy_offset(config);
  const double max_step = 0.5 * config.proxy_radius;
  Eigen::Vector3d fit_center = p;
  for (int it = 0; it < kMaxSlideIterations; ++it) {
    const Eigen::Vector3d n = surface.normal_at(p);
    Eigen::Vector3d t = hip - p;
    const double tn = t.dot(n);
    if (tn < 0.0) t -= tn * n;
    const double len = t.norm();
    if (len > max_step) t *= max_step / len;
    const Eigen::Vector3d q = surface.project(p + t, delta);
    const double moved = (q - p).norm();
    p = q;
    if (moved <= 1e-12 * config.proxy_radius) break;
    if ((p - fit_center).norm() > max_step) {
      surface = fit_local_surface(model, p, surface.normal_at(p), fit_radius(config));
      fit_center = p;
      p = surface.project(p, delta);
    }
  }
  return p;
}

ContactState settle(const PointCloudModel& model, const Eigen::Vector3d& proxy, const Eigen::Vector3d& hip,
                    const LocalSurface& surface, const MaterialConfig& config) {
  ContactState s;
  s.hip = hip;
  s.proxy = slide(model, proxy, hip, surface, config);
  s.normal = estimate_normal(model, s.proxy, config.proxy_radius);
  if (!s.normal) s.normal = surface.normal_at(s.proxy);
  s.in_contact = detect_collision(*s.normal, s.hip_vector());
  if (!s.in_contact) return free_state(model, hip, config);
  return s;
}

}  // namespace

std::optional<Eigen::Vector3d> estimate_normal(const PointCloudModel& model, const Eigen::Vector3d& proxy,
                                               double proxy_radius) {
  if (!(proxy_radius > 0.0)) throw ContractError("proxy radius must be positive");
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  double weight = 0.0;
  bool inside = false;
  for (const auto& nb : model.query_neighborhood(proxy, proxy_radius)) {
    const Eigen::Vector3d d = proxy - nb.point.position;
    const double r = d.norm();
    if (!(r < proxy_radius)) continue;
    inside = true;
    if (r == 0.0) continue;
    n += (proxy_radius - r) / r * d;
    weight += proxy_radius - r;
  }
  if (!inside) return std::nullopt;
  const double len = n.norm();
  if (!(len > 1e-9 * weight) || len == 0.0) return std::nullopt;
  return n / len;
}

bool detect_collision(const ContactState& state) {
  if (!state.normal) throw ContractError("collision test needs a defined normal");
  return detect_collision(*state.normal, state.hip_vector());
}

double LocalSurface::signed_distance(const Eigen::Vector3d& x) const {
  if (kind == Kind::plane) return normal.dot(x - point);
  return orientation * ((x - sphere.center).norm() - sphere.radius);
}

Eigen::Vector3d LocalSurface::normal_at(const Eigen::Vector3d& x) const {
  if (kind == Kind::plane) return normal;
  const Eigen::Vector3d d = x - sphere.center;
  const double len = d.norm();
  if (!(len > 0.0)) throw DomainError("surface normal undefined at the sphere center");
  return orientation * d / len;
}

Eigen::Vector3d LocalSurface::project(const Eigen::Vector3d& x, double offset) const {
  if (kind == Kind::plane) return x - (signed_distance(x) - offset) * normal;
  const Eigen::Vector3d d = x - sphere.center;
  const double len = d.norm();
  if (!(len > 0.0)) throw DomainError("projection undefined at the sphere center");
  const double level = sphere.radius + orientation * offset;
  if (!(level > 0.0)) throw DomainError("offset exceeds the radius of a concave surface");
  return sphere.center + (level / len) * d;
}

LocalSurface fit_local_surface(const PointCloudModel& model, const Eigen::Vector3d& anchor,
                               const Eigen::Vector3d& outward, double radius) {
  LocalSurface surface;
  const auto neighbors = model.query_neighborhood(anchor, radius);
  const Eigen::Vector3d up = outward.normalized();
  if (neighbors.size() < 3) {
    surface.point = anchor;
    surface.normal = up;
    return surface;
  }

  Eigen::Matrix3Xd points(3, static_cast<Eigen::Index>(neighbors.size()));
  for (std::size_t k = 0; k < neighbors.size(); ++k) points.col(static_cast<Eigen::Index>(k)) = neighbors[k].point.position;

  if (neighbors.size() >= 5) {
    try {
      const auto sphere = fit_sphere(points);
      const double side = up.dot(anchor - sphere.center);
      if (sphere.radius < 1e3 * radius && side != 0.0) {
        surface.kind = LocalSurface::Kind::sphere;
        surface.sphere = sphere;
        surface.orientation = side > 0.0 ? 1.0 : -1.0;
        return surface;
      }
    } catch (const DegenerateFitError&) {
    } catch (const NumericalError&) {
    }
  }

  const Eigen::Vector3d centroid = points.rowwise().mean();
  const Eigen::Matrix3Xd centered = points.colwise() - centroid;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(centered * centered.transpose());
  Eigen::Vector3d n = eig.eigenvectors().col(0);
  if (n.dot(up) < 0.0) n = -n;
  surface.point = centroid;
  surface.normal = n.normalized();
  return surface;
}

ContactState update_proxy(const PointCloudModel& model, const ContactState& state, const Eigen::Vector3d& new_hip,
                          const MaterialConfig& config) {
  const double R = config.proxy_radius;
  const double delta = proxy_offset(config);

  if (state.in_contact && state.normal) {
    const LocalSurface surface = fit_local_surface(model, state.proxy, *state.normal, fit_radius(config));
    if (surface.signed_distance(new_hip) >= delta) return free_state(model, new_hip, config);
    return settle(model, surface.project(state.proxy, delta), new_hip, surface, config);
  }

  // Sweep the free proxy toward the HIP and stop where the path meets the
  // offset surface.
  const Eigen::Vector3d from = state.proxy;
  const Eigen::Vector3d seg = new_hip - from;
  const int steps = std::max(1, static_cast<int>(std::ceil(seg.norm() / (0.25 * R))));
  for (int k = 0; k <= steps; ++k) {
    const Eigen::Vector3d p = from + seg * (static_cast<double>(k) / steps);
    const auto n = estimate_normal(model, p, R);
    if (!n || !detect_collision(*n, new_hip - p)) continue;
    const LocalSurface surface = fit_local_surface(model, p, *n, fit_radius(config));
    if (surface.signed_distance(new_hip) >= delta) continue;

    Eigen::Vector3d crossing = p;
    if (surface.signed_distance(p) > delta) {
      Eigen::Vector3d lo = p, hi = new_hip;  // sd(lo) > delta > sd(hi)
      for (int b = 0; b < 80; ++b) {
        const Eigen::Vector3d mid = 0.5 * (lo + hi);
        (surface.signed_distance(mid) > delta ? lo : hi) = mid;
      }
      crossing = hi;
    }
    return settle(model, surface.project(crossing, delta), new_hip, surface, config);
  }
  return free_state(model, new_hip, config);
}

}  // namespace thinsheet
