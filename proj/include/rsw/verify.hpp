#pragma once

#include "rsw/core.hpp"

#include <array>
#include <optional>
#include <vector>

namespace rsw {

/// Worker count for grid sweeps: hardware concurrency capped by RSW_THREADS.
unsigned worker_count();

struct ResidualReport {
  std::array<double, 3> max{};  // per equation: two momentum, one mass
  std::array<double, 3> rms{};
  int worst_equation = 0;
  Vec3 worst_point = Vec3::Zero();
  std::size_t samples = 0;
  Frame frame = Frame::cartesian;
  DerivativeMode mode = DerivativeMode::analytic;
  double fd_step = 0;

  double max_residual() const { return std::max({max[0], max[1], max[2]}); }
};

/// Normalized residuals |sum| / max(1, max |term|) of the three equations at one point.
Vec3 residual_point_cartesian(const FlowField& field, const Vec3& p, const FlowParameters& params);
Vec3 residual_point_polar(const FlowField& field, const Vec3& p, const FlowParameters& params);

/// Residual of the Cartesian system over a grid in (t, x, y). Polar fields are viewed in
/// Cartesian form. Throws window_violation if a node lies outside the field's domain.
ResidualReport residual_cartesian(const FlowField& field, const GridSpec& grid,
                                  const FlowParameters& params);
/// Residual of the polar system over a grid in (t, r, theta); r must stay positive.
ResidualReport residual_polar(const FlowField& field, const GridSpec& grid,
                              const FlowParameters& params);
/// Dispatches on the field's frame.
ResidualReport residual(const FlowField& field, const GridSpec& grid, const FlowParameters& params);

struct TrajectoryOptions {
  double tol = 1e-10;
  double initial_step = 1e-2;
  double min_step = 1e-12;
  double r_floor = 1e-8;
  int max_steps = 2000000;
  /// Times at which samples are recorded (must lie in [t0, t1]); empty records every step.
  std::vector<double> output_times;
  /// Times the integrator must land on exactly, e.g. (2n+1) pi / f.
  std::vector<double> events;
  /// End the path quietly where it leaves the domain instead of throwing.
  bool truncate_on_exit = false;
};

struct Trajectory {
  double r0 = 0;
  double theta0 = 0;
  std::vector<PolarPoint> points;  // accumulated theta
  int steps = 0;
  int rejected = 0;
  bool exited = false;  // set when truncate_on_exit cut the path short
};

/// Special times (2n+1) pi / f inside [t0, t1].
std::vector<double> special_times(double t0, double t1, const FlowParameters& params);

/// Adaptive RK4 (step doubling) for dr/dt = U, d theta/dt = V/r.
/// Throws left_domain when the path leaves the field's domain and blow_up on step underflow.
Trajectory integrate_trajectory(const FlowField& field, double r0, double theta0, double t0,
                                double t1, const TrajectoryOptions& opts = {});

struct MaterialCurve {
  std::vector<double> times;
  std::vector<Trajectory> particles;
  std::vector<double> length;         // closed polygon length per time
  std::vector<double> min_spacing;    // smallest neighbour distance per time
};

MaterialCurve evolve_material_curve(const FlowField& field, double cx, double cy, double radius,
                                    int markers, const std::vector<double>& times,
                                    const TrajectoryOptions& opts = {});

/// Largest |Omega(t) - Omega(t0)| / max(|Omega(t0)|, f / h(t0)) along a trajectory.
double potential_vorticity_drift(const FlowField& field, const Trajectory& path,
                                 const FlowParameters& params);

struct FvConfig {
  double half_width = 3.0;            // square [-L, L]^2
  std::vector<int> meshes{100, 200};  // cells per side
  double t0 = 0.0;
  double t1 = 0.25;
  double cfl = 0.45;
  /// When set, the fixed time step is checked against the CFL limit.
  std::optional<double> dt;
  /// Cells whose exact depth is below this are left out of the error.
  double mask_depth = 0.0;
  /// Cells with r above mask_radius(t1) are left out of the error.
  std::function<double(double)> mask_radius;
};

struct FvRun {
  int cells = 0;
  int steps = 0;
  double l1_error = 0;  // depth error, integrated over the unmasked cells
};

struct FvResult {
  std::vector<FvRun> runs;
  std::vector<double> rates;  // log2(e_k / e_{k+1}) scaled by the mesh ratio
  double min_rate() const;
};

/// First-order Rusanov finite volumes for the Cartesian system with explicit
/// Coriolis source; boundary ghost cells carry the exact solution.
FvResult fv_oracle(const FlowField& exact, const FlowParameters& params, const FvConfig& cfg);

}  // namespace rsw
