#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/AutoDiff>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace rsw {

enum class ErrorKind {
  invalid_params,
  origin_singular,
  zero_depth,
  singular_time,
  window_violation,
  no_ring_exists,
  fit_degenerate,
  quadrature_fail,
  left_domain,
  blow_up,
  cfl_violation,
  negative_depth,
  unsupported_family,
  mismatch,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDepthFloor = 1e-12;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
/// Forward-mode dual number carrying d/d(t, a, b) of a field coordinate triple.
using Jet = Eigen::AutoDiffScalar<Eigen::Vector3d>;
using JetVec3 = Eigen::Matrix<Jet, 3, 1>;

template <class S>
using Triple = Eigen::Matrix<S, 3, 1>;

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

/// Builds a scalar of type S with the given value whose derivative is
/// `slope` times the derivative of `x` (chain rule through a black box).
template <class S>
S chain(double value, double slope, const S& x) {
  if constexpr (std::is_same_v<S, double>) {
    (void)slope;
    (void)x;
    return value;
  } else {
    return S(value, slope * x.derivatives());
  }
}

template <class S>
S constant(double value) {
  if constexpr (std::is_same_v<S, double>) {
    return value;
  } else {
    return S(value);  // AutoDiffScalar zeroes fixed-size derivatives
  }
}

/// Seeds a coordinate triple as independent variables.
JetVec3 seed(const Vec3& p);

/// Coriolis parameter and gravity.
struct FlowParameters {
  double f = 1.0;
  double g = 1.0;

  /// Throws ErrorKind::invalid_params unless f > 0 and g > 0.
  static FlowParameters make(double f, double g);
  void validate() const;
};

struct CartesianPoint {
  double t = 0, x = 0, y = 0;
};
struct PolarPoint {
  double t = 0, r = 0, theta = 0;
};
struct CartesianState {
  double u = 0, v = 0, h = 0;
};
struct PolarState {
  double U = 0, V = 0, h = 0;
};

std::pair<CartesianPoint, CartesianState> polar_to_cartesian(const PolarPoint& p,
                                                             const PolarState& s);
/// theta is returned in (-pi, pi]. Throws origin_singular at x = y = 0.
std::pair<PolarPoint, PolarState> cartesian_to_polar(const CartesianPoint& p,
                                                     const CartesianState& s);

enum class Frame { cartesian, polar };
/// Which system the field solves: rotating (Coriolis f) or plain shallow water.
enum class System { rsw, sw };
enum class DerivativeMode { analytic, finite_difference };

const char* to_string(Frame frame);
const char* to_string(System system);
const char* to_string(DerivativeMode mode);

struct TimeWindow {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_closed = false;
  bool hi_closed = false;
  /// Width of the forbidden band inside each open endpoint.
  double guard = 0.0;

  bool contains(double t) const;
};

/// Where a field may be evaluated: a time window and, per time, an allowed
/// radius interval (|(x, y)| for Cartesian fields).
struct Domain {
  TimeWindow time;
  std::function<std::pair<double, double>(double)> radial;

  std::pair<double, double> radial_range(double t) const;
  bool contains(Frame frame, const Vec3& p) const;
};

/// Values and first partials of (u, v, h) or (U, V, h) at a point.
/// grad(i, j) = d state_i / d coordinate_j with coordinates (t, x, y) or (t, r, theta).
struct FieldSample {
  Vec3 value;
  Mat3 grad;
};

/// A flow solution evaluable at (t, x, y) or (t, r, theta). Immutable; copies
/// share the underlying evaluators.
class FlowField {
 public:
  using Evaluator = std::function<Vec3(const Vec3&)>;
  using JetEvaluator = std::function<JetVec3(const JetVec3&)>;

  FlowField() = default;
  FlowField(Frame frame, System system, Domain domain, Evaluator eval,
            JetEvaluator jet_eval, std::string name);

  /// Wraps a functor exposing `template <class S> Triple<S> operator()(const Triple<S>&) const`.
  template <class F>
  static FlowField from_functor(Frame frame, System system, Domain domain, F functor,
                                std::string name) {
    return FlowField(
        frame, system, std::move(domain),
        [functor](const Vec3& p) { return functor(Triple<double>(p)); },
        [functor](const JetVec3& p) { return functor(p); }, std::move(name));
  }

  Frame frame() const { return frame_; }
  System system() const { return system_; }
  const Domain& domain() const { return domain_; }
  const std::string& name() const { return name_; }
  DerivativeMode mode() const { return mode_; }
  double fd_step() const { return fd_step_; }
  bool has_analytic() const { return static_cast<bool>(jet_eval_); }

  FlowField with_mode(DerivativeMode mode, double fd_step = 1e-5) const;
  FlowField with_name(std::string name) const;
  FlowField with_domain(Domain domain) const;

  bool contains(const Vec3& p) const { return domain_.contains(frame_, p); }
  /// Throws window_violation outside the domain.
  Vec3 eval(const Vec3& p) const;
  /// Value plus partial derivatives by the field's derivative mode.
  FieldSample sample(const Vec3& p) const;
  /// Composable evaluation: propagates incoming derivatives. Falls back to the
  /// sampled gradient when no analytic evaluator exists or FD mode is selected.
  JetVec3 eval_jet(const JetVec3& p) const;

  /// Cartesian view of a polar field (identity for Cartesian fields).
  FlowField as_cartesian() const;
  /// Polar view of a Cartesian field (identity for polar fields).
  FlowField as_polar() const;

 private:
  void check(const Vec3& p) const;

  Frame frame_ = Frame::cartesian;
  System system_ = System::rsw;
  Domain domain_;
  Evaluator eval_;
  JetEvaluator jet_eval_;
  std::string name_;
  DerivativeMode mode_ = DerivativeMode::analytic;
  double fd_step_ = 1e-5;
};

/// Inclusive uniform axis `lo:hi:n`.
struct Axis {
  double lo = 0;
  double hi = 1;
  int n = 2;
  double node(int i) const { return n == 1 ? lo : lo + (hi - lo) * i / (n - 1); }
};

/// Sample grid over (t, a, b) where (a, b) is (x, y) or (r, theta). With
/// `radial_fraction` the a-axis is a fraction of the domain's radial range at t.
struct GridSpec {
  Axis t;
  Axis a;
  Axis b;
  bool radial_fraction = false;

  std::size_t size() const {
    return static_cast<std::size_t>(t.n) * static_cast<std::size_t>(a.n) *
           static_cast<std::size_t>(b.n);
  }
  /// Node with flat index t-major, then a, then b.
  Vec3 point(std::size_t index, const Domain& domain) const;
};

/// Central-difference gradient with relative step h * max(1, |coordinate|).
Mat3 fd_gradient(const FlowField::Evaluator& eval, const Vec3& p, double step);

struct Diagnostics {
  double omega = 0;   // potential vorticity
  double froude = 0;  // q / sqrt(g h)
  double speed = 0;   // q
};

/// (v_x - u_y + f) / h; the Coriolis term is dropped for SW fields.
double potential_vorticity(const FlowField& field, const Vec3& p, const FlowParameters& params);
Diagnostics diagnostics(const FlowField& field, const Vec3& p, const FlowParameters& params);

/// Coriolis parameter entering the equations the field solves.
inline double coriolis(const FlowField& field, const FlowParameters& params) {
  return field.system() == System::rsw ? params.f : 0.0;
}

}  // namespace rsw
