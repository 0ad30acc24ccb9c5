#pragma once

#include "rsw/core.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rsw {

/// A point (t, x, y, u, v, h) of the base-plus-fiber space.
template <class S>
using Point6 = Eigen::Matrix<S, 6, 1>;
using JetPoint = Point6<double>;
/// Coefficients (c_t, c_x, c_y, c_u, c_v, c_h) of a vector field at a point.
using TangentVector = Eigen::Matrix<double, 6, 1>;
using Jacobian6 = Eigen::Matrix<double, 6, 6>;

/// X: rotating-frame basis; Y: its canonical recombination; Z: plain shallow-water basis.
enum class GeneratorFamily { x_rsw, y_rsw, z_sw };

struct GeneratorId {
  GeneratorFamily family = GeneratorFamily::y_rsw;
  int index = 1;  // 1..9
};

std::string to_string(const GeneratorId& id);

/// Coefficients of X_k (k = 1..9) at a point, generic in the scalar type.
template <class S>
Point6<S> x_generator(int k, const Point6<S>& p, double f) {
  using std::cos;
  using std::sin;
  const S& t = p(0);
  const S& x = p(1);
  const S& y = p(2);
  const S& u = p(3);
  const S& v = p(4);
  const S& h = p(5);
  const S zero = constant<S>(0.0);
  const S one = constant<S>(1.0);
  const S C = cos(f * t);
  const S Sn = sin(f * t);
  Point6<S> c;
  switch (k) {
    case 1: c << zero, one, zero, zero, zero, zero; break;
    case 2: c << zero, zero, one, zero, zero, zero; break;
    case 3: c << zero, C, -Sn, -f * Sn, -f * C, zero; break;
    case 4: c << zero, Sn, C, f * C, -f * Sn, zero; break;
    case 5: c << zero, -y, x, -v, u, zero; break;
    case 6: c << zero, x, y, u, v, 2.0 * h; break;
    case 7: c << one, zero, zero, zero, zero, zero; break;
    case 8:
      c << C, -0.5 * f * (x * Sn - y * C), -0.5 * f * (x * C + y * Sn),
          0.5 * f * ((u - f * y) * Sn + (v - f * x) * C),
          -0.5 * f * ((u + f * y) * C - (v + f * x) * Sn), f * h * Sn;
      break;
    case 9:
      c << Sn, 0.5 * f * (x * C + y * Sn), -0.5 * f * (x * Sn - y * C),
          -0.5 * f * ((u - f * y) * C - (v - f * x) * Sn),
          -0.5 * f * ((u + f * y) * Sn + (v + f * x) * C), -f * h * C;
      break;
    default: throw Error(ErrorKind::invalid_params, "generator index out of range");
  }
  return c;
}

/// Coefficients of Z_k (k = 1..9), the shallow-water algebra.
template <class S>
Point6<S> z_generator(int k, const Point6<S>& p) {
  const S& t = p(0);
  const S& x = p(1);
  const S& y = p(2);
  const S& u = p(3);
  const S& v = p(4);
  const S& h = p(5);
  const S zero = constant<S>(0.0);
  const S one = constant<S>(1.0);
  Point6<S> c;
  switch (k) {
    case 1: c << zero, one, zero, zero, zero, zero; break;
    case 2: c << zero, zero, one, zero, zero, zero; break;
    case 3: c << zero, t, zero, one, zero, zero; break;
    case 4: c << zero, zero, t, zero, one, zero; break;
    case 5: c << zero, -y, x, -v, u, zero; break;
    case 6: c << zero, x, y, u, v, 2.0 * h; break;
    case 7: c << one, zero, zero, zero, zero, zero; break;
    case 8: c << t * t, t * x, t * y, x - t * u, y - t * v, -2.0 * t * h; break;
    case 9: c << 2.0 * t, x, y, -u, -v, -2.0 * h; break;
    default: throw Error(ErrorKind::invalid_params, "generator index out of range");
  }
  return c;
}

/// Row k-1 holds the X-coordinates of Y_k.
Eigen::Matrix<double, 9, 9> y_from_x(double f);

template <class S>
Point6<S> generator_coeffs(const GeneratorId& id, const Point6<S>& p, double f) {
  if (id.index < 1 || id.index > 9) {
    throw Error(ErrorKind::invalid_params, "generator index out of range");
  }
  switch (id.family) {
    case GeneratorFamily::x_rsw: return x_generator<S>(id.index, p, f);
    case GeneratorFamily::z_sw: return z_generator<S>(id.index, p);
    case GeneratorFamily::y_rsw: {
      const Eigen::Matrix<double, 9, 9> m = y_from_x(f);
      Point6<S> out = Point6<S>::Constant(constant<S>(0.0));
      for (int j = 0; j < 9; ++j) {
        const double w = m(id.index - 1, j);
        if (w != 0.0) out += w * x_generator<S>(j + 1, p, f);
      }
      return out;
    }
  }
  return {};
}

TangentVector generator_eval(const GeneratorId& id, const JetPoint& p, const FlowParameters& params);
/// Hand-derived Jacobian d(coefficients)/d(t, x, y, u, v, h).
Jacobian6 generator_jacobian(const GeneratorId& id, const JetPoint& p,
                             const FlowParameters& params);
/// [A, B] = A(B) - B(A), evaluated pointwise from analytic Jacobians.
TangentVector lie_bracket(const GeneratorId& a, const GeneratorId& b, const JetPoint& p,
                          const FlowParameters& params);

/// A vector field given by its coefficients and their Jacobian.
struct VectorField {
  std::string name;
  std::function<TangentVector(const JetPoint&)> eval;
  std::function<Jacobian6(const JetPoint&)> jacobian;
};
using GeneratorBasis = std::array<VectorField, 9>;

GeneratorBasis make_basis(GeneratorFamily family, const FlowParameters& params);
TangentVector bracket(const VectorField& a, const VectorField& b, const JetPoint& p);

/// Structure constants: coeff[i][j](k) is the Y_{k+1} coordinate of [G_{i+1}, G_{j+1}].
struct StructureTable {
  std::array<std::array<Eigen::Matrix<double, 9, 1>, 9>, 9> coeff{};
  /// Largest normalized least-squares residual over all 81 fits.
  double fit_residual = 0;

  double max_difference(const StructureTable& other) const;
  /// Entry text such as "-2Y7" or "0" using the given symbol.
  std::string entry(int i, int j, char symbol = 'Y') const;
};

/// The commutator table the canonical basis is expected to reproduce.
StructureTable reference_table();

struct FitOptions {
  int points = 16;
  std::uint64_t seed = 20090715;
  double snap_tol = 1e-9;
};

/// Random generic sample points: (x, y, u, v, h) in [-2, 2], t in (0.1, pi/f - 0.1).
std::vector<JetPoint> generic_points(int count, std::uint64_t seed, const FlowParameters& params);

StructureTable structure_constants(const GeneratorBasis& basis, std::span<const JetPoint> points,
                                   double snap_tol = 1e-9);
StructureTable structure_constants(GeneratorFamily family, const FlowParameters& params,
                                   const FitOptions& opts = {});

struct IsomorphismReport {
  bool ok = false;
  bool tables_equal = false;
  bool matches_reference = false;
  bool nilradical_abelian = false;
  bool sl2_closed = false;
  double max_difference = 0;
  StructureTable rsw;
  StructureTable sw;
  std::vector<std::string> mismatches;
};

IsomorphismReport verify_isomorphism(const FlowParameters& params, const FitOptions& opts = {});
/// Same check with a caller-supplied rotating-frame basis (fault injection).
IsomorphismReport verify_isomorphism(const GeneratorBasis& rsw_basis,
                                     const FlowParameters& params, const FitOptions& opts = {});

struct PushforwardReport {
  int index = 0;
  double multiplier = 1;
  double max_error = 0;
  bool ok = false;
};

/// Expected multiplier m_k with Y_k pushed through the equivalence map = m_k Z_k.
double pushforward_multiplier(int k, const FlowParameters& params);
/// Pushes Y_k through the 6-D equivalence map with a central-difference Jacobian.
/// Throws singular_time when a sample sits at t = 2 pi n / f.
PushforwardReport pushforward_check(int k, const FlowParameters& params,
                                    std::span<const JetPoint> sample, double tol = 1e-6);

}  // namespace rsw
