#include "thinsheet/session.hpp"

#include <charconv>
#include <cmath>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "thinsheet/errors.hpp"
#include "thinsheet/gall_peters.hpp"
#include "thinsheet/plate/grid.hpp"
#include "thinsheet/sphere_fit.hpp"

namespace thinsheet {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_field(std::string_view field, std::size_t line, std::size_t step) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
    throw ParseError(line, "step " + std::to_string(step) + ": bad number '" + std::string(field) + "'");
  return v;
}

nlohmann::ordered_json vec_json(const Eigen::Vector3d& v) { return nlohmann::ordered_json::array({v.x(), v.y(), v.z()}); }

}  // namespace

std::vector<TrajectoryStep> parse_script(std::istream& in) {
  std::vector<TrajectoryStep> steps;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    const std::size_t index = steps.size();
    double v[4];
    int count = 0;
    while (true) {
      const auto comma = s.find(',');
      if (count == 4) throw ParseError(line, "step " + std::to_string(index) + ": expected 4 fields t,x,y,z");
      v[count++] = parse_field(s.substr(0, comma), line, index);
      if (comma == std::string_view::npos) break;
      s.remove_prefix(comma + 1);
    }
    if (count != 4) throw ParseError(line, "step " + std::to_string(index) + ": expected 4 fields t,x,y,z");
    if (!steps.empty() && !(v[0] > steps.back().t))
      throw ParseError(line, "step " + std::to_string(index) + ": time must increase strictly");
    steps.push_back({v[0], Eigen::Vector3d(v[1], v[2], v[3])});
  }
  return steps;
}

std::vector<TrajectoryStep> load_script_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open script " + path.string());
  return parse_script(in);
}

void PipelineSettings::validate() const {
  material.validate();
  solver.validate();
  if (grid_n < 8) throw ValidationError("grid needs at least 8 nodes per side");
}

struct DeformationEngine::Patch {
  Eigen::Vector3d fit_center;
  PatchFrame<double> frame;
  std::vector<PatchPoint> points;
  std::vector<PlanarPoint<double>> planar;
  std::unique_ptr<plate::PlateSolver<double>> solver;
};

DeformationEngine::DeformationEngine(const PointCloudModel& model, PipelineSettings settings)
    : model_(&model), settings_(std::move(settings)) {
  settings_.validate();
}

DeformationEngine::~DeformationEngine() = default;
DeformationEngine::DeformationEngine(DeformationEngine&&) noexcept = default;
DeformationEngine& DeformationEngine::operator=(DeformationEngine&&) noexcept = default;

void DeformationEngine::invalidate() { patch_.reset(); }

void DeformationEngine::rebuild(const DeformationRequest& request) {
  patch_.reset();
  const auto& material = settings_.material;
  const auto neighbors = model_->query_neighborhood(request.surface_contact, material.neighborhood_radius);
  if (neighbors.size() < 5) throw InsufficientDataError("too few points around the contact for a patch fit");

  Eigen::Matrix3Xd positions(3, static_cast<Eigen::Index>(neighbors.size()));
  for (std::size_t k = 0; k < neighbors.size(); ++k)
    positions.col(static_cast<Eigen::Index>(k)) = neighbors[k].point.position;
  const auto sphere = fit_sphere(positions);

  std::vector<std::pair<PointId, Eigen::Vector3d>> projected;
  projected.reserve(neighbors.size());
  for (const auto& nb : neighbors) projected.emplace_back(nb.id, project_to_sphere(nb.point.position, sphere));
  const Eigen::Vector3d proxy_on_sphere = project_to_sphere(request.surface_contact, sphere);
  const auto kept = cull_hemisphere(projected, sphere, proxy_on_sphere);

  auto patch = std::make_unique<Patch>();
  patch->fit_center = request.proxy;
  patch->frame = build_frame(sphere, proxy_on_sphere);
  std::vector<plate::RigiditySample<double>> samples;
  samples.reserve(kept.size());
  for (const auto& [id, on_sphere] : kept) {
    const auto p = to_plane(on_sphere, patch->frame, id);
    patch->planar.push_back(p);
    patch->points.push_back({id, (*model_)[id].position});
    samples.push_back({p, flexural_rigidity((*model_)[id].elastic_modulus, material)});
  }
  const auto spec = plate::fit_grid_to_patch<double>(patch->planar, settings_.grid_n);
  const auto rig = plate::rasterize_rigidity<double>(samples, spec, material.poisson);
  patch->solver = std::make_unique<plate::PlateSolver<double>>(rig, settings_.solver);
  patch_ = std::move(patch);
  ++patch_builds_;
}

DeformationResult DeformationEngine::deform(const DeformationRequest& request, std::stop_token stop) {
  if (!patch_ || (request.proxy - patch_->fit_center).norm() > 0.5 * settings_.material.proxy_radius) rebuild(request);
  const auto& frame = patch_->frame;
  const auto& solver = *patch_->solver;

  const auto contact = to_plane(project_to_sphere(request.surface_contact, frame.sphere), frame);
  const auto load = plate::assemble_load(request.force_magnitude, contact, solver.spec());

  const auto start = std::chrono::steady_clock::now();
  const auto field = solver.solve(load, stop);
  const auto stop_time = std::chrono::steady_clock::now();

  DeformationResult result;
  result.solver = {field.iterations, field.residual,
                   std::chrono::duration<double, std::milli>(stop_time - start).count()};
  std::vector<double> w;
  w.reserve(patch_->planar.size());
  for (const auto& p : patch_->planar) w.push_back(plate::sample_deformation(field, p));
  result.deformed_patch = back_project(patch_->points, w, -request.normal);
  result.max_deflection = field.w.abs().maxCoeff();
  return result;
}

ContactTracker::ContactTracker(const PointCloudModel& model, MaterialConfig config)
    : model_(&model), config_(config) {
  config_.validate();
}

ContactUpdate ContactTracker::update(const Eigen::Vector3d& hip) {
  if (!started_) {
    state_ = ContactState::free_at(hip);
    started_ = true;
  }
  state_ = update_proxy(*model_, state_, hip, config_);
  ContactUpdate out{state_, std::nullopt, std::nullopt};
  if (!state_.in_contact) return out;

  const Eigen::Vector3d normal = *state_.normal;
  const Eigen::Vector3d surface = state_.proxy - proxy_offset(config_) * normal;
  out.force = compute_force(state_, lookup_local_modulus(*model_, surface), config_);
  out.request = DeformationRequest{state_.proxy, surface, normal, out.force->magnitude};
  return out;
}

Pipeline::Pipeline(const PointCloudModel& model, PipelineSettings settings)
    : tracker_(model, settings.material), engine_(model, settings) {}

StepRecord Pipeline::step(double t, const Eigen::Vector3d& hip) {
  StepRecord record;
  record.t = t;
  record.hip = hip;
  ContactUpdate update;
  try {
    update = tracker_.update(hip);
  } catch (const Error& e) {
    tracker_.reset();
    record.proxy = hip;
    record.diagnostic = std::string("proxy: ") + e.what();
    return record;
  }
  record.proxy = update.state.proxy;
  record.in_contact = update.state.in_contact;
  record.force = update.force;
  if (!update.request) return record;
  try {
    auto result = engine_.deform(*update.request);
    record.solver = result.solver;
    record.max_deflection = result.max_deflection;
    record.deformed_patch = std::move(result.deformed_patch);
  } catch (const Error& e) {
    engine_.invalidate();
    record.diagnostic = std::string("deformation: ") + e.what();
  }
  return record;
}

std::vector<StepRecord> run_trajectory(const PointCloudModel& model, std::span<const TrajectoryStep> script,
                                       const PipelineSettings& settings) {
  std::vector<StepRecord> records;
  records.reserve(script.size());
  Pipeline pipeline(model, settings);
  for (std::size_t k = 0; k < script.size(); ++k) {
    if (k > 0 && !(script[k].t > script[k - 1].t))
      throw ContractError("step " + std::to_string(k) + ": time must increase strictly");
    records.push_back(pipeline.step(script[k].t, script[k].hip));
  }
  return records;
}

void write_record(std::ostream& out, const StepRecord& r, bool omit_timing) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["hip"] = vec_json(r.hip);
  j["proxy"] = vec_json(r.proxy);
  j["in_contact"] = r.in_contact;
  j["force_magnitude"] = r.force ? nlohmann::ordered_json(r.force->magnitude) : nullptr;
  j["force_direction"] = r.force ? vec_json(r.force->direction) : nullptr;
  j["solver_iterations"] = r.solver ? nlohmann::ordered_json(r.solver->iterations) : nullptr;
  j["solver_residual"] = r.solver ? nlohmann::ordered_json(r.solver->residual) : nullptr;
  j["solver_ms"] = r.solver && !omit_timing ? nlohmann::ordered_json(r.solver->wall_time_ms) : nullptr;
  j["max_deflection"] = r.max_deflection ? nlohmann::ordered_json(*r.max_deflection) : nullptr;
  j["diagnostic"] = r.diagnostic ? nlohmann::ordered_json(*r.diagnostic) : nullptr;
  out << j.dump() << '\n';
}

}  // namespace thinsheet
