#include "thinsheet/force.hpp"

#include <cmath>

#include "thinsheet/errors.hpp"

namespace thinsheet {

ForceSample compute_force(const ContactState& state, double local_modulus, const MaterialConfig& config) {
  if (!state.in_contact || !state.normal) throw ContractError("force is only defined in contact");
  if (!(local_modulus > 0.0)) throw ContractError("local modulus must be positive");
  ForceSample f;
  f.magnitude = local_modulus * config.contact_area / config.thickness * state.hip_vector().norm();
  f.direction = state.normal->normalized();
  f.timestamp = std::chrono::steady_clock::now();
  return f;
}

double lookup_local_modulus(const PointCloudModel& model, const Eigen::Vector3d& contact) {
  return model[model.nearest(contact)].elastic_modulus;
}

std::vector<PatchPoint> back_project(std::span<const PatchPoint> patch, std::span<const double> w,
                                     const Eigen::Vector3d& force_direction) {
  if (patch.size() != w.size()) throw ContractError("patch and deflection lists differ in length");
  if (!(std::abs(force_direction.norm() - 1.0) <= 1e-9)) throw ContractError("force direction must be a unit vector");
  std::vector<PatchPoint> out;
  out.reserve(patch.size());
  for (std::size_t k = 0; k < patch.size(); ++k) out.push_back({patch[k].id, patch[k].position + w[k] * force_direction});
  return out;
}

}  // namespace thinsheet
