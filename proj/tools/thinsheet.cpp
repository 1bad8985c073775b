// Command-line front end: scripted rendering, live serving, plate solves.
#include <pthread.h>
#include <unistd.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "thinsheet/errors.hpp"
#include "thinsheet/plate/matrix_io.hpp"
#include "thinsheet/plate/solver.hpp"
#include "thinsheet/point_cloud.hpp"
#include "thinsheet/server.hpp"
#include "thinsheet/session.hpp"

namespace {

using namespace thinsheet;

struct NumericFlags {
  long grid_n = 64;
  double tolerance = 1e-6;
  double omega = 0.5;
  long max_iterations = 10000;
  std::string method = "multigrid";
  double poisson = 0.2;
  double thickness = 0.2;
  double proxy_radius = 0.1;
  double contact_area = 0.01;
  double neighborhood_radius = 0.0;  // 0 -> 8 proxy radii

  void add_to(CLI::App& cmd) {
    cmd.add_option("--grid-n", grid_n, "plate grid nodes per side")->capture_default_str();
    cmd.add_option("--tolerance", tolerance, "relative change tolerance of the plate solve")->capture_default_str();
    cmd.add_option("--omega", omega, "Jacobi relaxation in (0, 1]")->capture_default_str();
    cmd.add_option("--max-iterations", max_iterations, "plate solver iteration budget")->capture_default_str();
    cmd.add_option("--method", method, "plate solver: multigrid or jacobi")
        ->check(CLI::IsMember({"multigrid", "jacobi"}))
        ->capture_default_str();
    cmd.add_option("--poisson", poisson, "Poisson ratio")->capture_default_str();
    cmd.add_option("--thickness", thickness, "sheet thickness (cm)")->capture_default_str();
    cmd.add_option("--proxy-radius", proxy_radius, "proxy radius (cm)")->capture_default_str();
    cmd.add_option("--contact-area", contact_area, "contact area A (cm^2)")->capture_default_str();
    cmd.add_option("--neighborhood-radius", neighborhood_radius, "patch radius (cm), default 8 proxy radii");
  }

  plate::SolverSettings solver() const {
    plate::SolverSettings s;
    s.tolerance = tolerance;
    s.relaxation = omega;
    s.max_iterations = max_iterations;
    s.method = method == "jacobi" ? plate::SolverMethod::jacobi : plate::SolverMethod::multigrid;
    return s;
  }

  PipelineSettings pipeline() const {
    PipelineSettings s;
    s.grid_n = grid_n;
    s.solver = solver();
    s.material.poisson = poisson;
    s.material.thickness = thickness;
    s.material.proxy_radius = proxy_radius;
    s.material.contact_area = contact_area;
    s.material.neighborhood_radius = neighborhood_radius > 0.0 ? neighborhood_radius : 8.0 * proxy_radius;
    s.validate();
    return s;
  }
};

int render(const std::string& model_path, const std::string& script_path, const std::string& out_path,
           const NumericFlags& flags, bool omit_timing) {
  const auto settings = flags.pipeline();
  const auto model = load_model_file(model_path, 2.0 * settings.material.proxy_radius);
  const auto script = load_script_file(script_path);
  const auto records = run_trajectory(model, script, settings);
  std::ofstream out(out_path);
  if (!out) throw Error("cannot open " + out_path + " for writing");
  for (const auto& r : records) write_record(out, r, omit_timing);
  return out ? 0 : 1;
}

int serve_model(const std::string& model_path, unsigned short port, const NumericFlags& flags) {
  const auto settings = flags.pipeline();
  const auto model = load_model_file(model_path, 2.0 * settings.material.proxy_radius);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::atomic<bool> failed = false;
  std::jthread server([&](std::stop_token stop) {
    try {
      serve(model, settings, port, stop, [](unsigned short bound) {
        std::cerr << "serving on ws://0.0.0.0:" << bound << "\n";
      });
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      failed = true;
      kill(getpid(), SIGTERM);
    }
  });
  int received = 0;
  sigwait(&signals, &received);
  if (!failed) std::cerr << "shutting down\n";
  server.request_stop();
  server.join();
  return failed ? 1 : 0;
}

int solve_plate(const std::string& rigidity_path, const std::string& load_path, const std::string& out_path,
                const NumericFlags& flags) {
  const auto rigidity = plate::read_matrix_file(rigidity_path);
  const auto load = plate::read_matrix_file(load_path);
  if (rigidity.values.rows() != load.values.rows() || rigidity.spacing != load.spacing)
    throw ValidationError("rigidity and load files must share n and spacing");

  plate::GridSpec<double> spec;
  spec.n = rigidity.values.rows();
  spec.spacing = rigidity.spacing;
  const auto rig = plate::RigidityGrid<double>::from_field(spec, rigidity.values, flags.poisson);
  const plate::LoadField<double> q{spec, load.values};
  const auto field = plate::solve_deformation(rig, q, flags.solver());
  plate::write_matrix_file(out_path, field.w, spec.spacing);
  std::cerr << "iterations " << field.iterations << " residual " << field.residual << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformation and force rendering for variable-stiffness point clouds"};
  app.require_subcommand(1);

  NumericFlags flags;
  std::string model_path, script_path, out_path, rigidity_path, load_path;
  bool omit_timing = false;
  unsigned short port = 8765;

  auto* render_cmd = app.add_subcommand("render", "replay a HIP script and write one JSON record per step");
  render_cmd->add_option("--model", model_path, "point cloud (.csv or .ply)")->required();
  render_cmd->add_option("--script", script_path, "t,x,y,z script")->required();
  render_cmd->add_option("--out", out_path, "JSON Lines output")->required();
  render_cmd->add_flag("--omit-timing", omit_timing, "write solver_ms as null");
  flags.add_to(*render_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "serve probe clients over WebSocket");
  serve_cmd->add_option("--model", model_path, "point cloud (.csv or .ply)")->required();
  serve_cmd->add_option("--port", port, "TCP port")->required();
  flags.add_to(*serve_cmd);

  auto* plate_cmd = app.add_subcommand("solve-plate", "solve the clamped plate for matrix-file inputs");
  plate_cmd->add_option("--rigidity", rigidity_path, "flexural rigidity matrix file")->required();
  plate_cmd->add_option("--load", load_path, "load matrix file")->required();
  plate_cmd->add_option("--out", out_path, "deflection matrix file")->required();
  flags.add_to(*plate_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*render_cmd) return render(model_path, script_path, out_path, flags, omit_timing);
    if (*serve_cmd) return serve_model(model_path, port, flags);
    if (*plate_cmd) return solve_plate(rigidity_path, load_path, out_path, flags);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
