#pragma once

#include "rsw/core.hpp"
#include "rsw/liealg.hpp"

namespace rsw {

enum class MapDirection { rsw_to_sw, sw_to_rsw };

/// The point change of variables taking rotating shallow water to plain
/// shallow water (and back). The forward direction is defined while
/// sin(ft/2) != 0; the inverse lands in t in (0, 2 pi / f).
struct EquivalenceMap {
  FlowParameters params;
  MapDirection direction = MapDirection::rsw_to_sw;
};

/// Forward map on (t, x, y, u, v, h). Throws singular_time at t = 2 pi n / f.
JetPoint equivalence_map6(const JetPoint& p, const FlowParameters& params);
/// Closed-form inverse of equivalence_map6.
JetPoint equivalence_inverse6(const JetPoint& p, const FlowParameters& params);

std::pair<CartesianPoint, CartesianState> equiv_point(const EquivalenceMap& m,
                                                      const CartesianPoint& p,
                                                      const CartesianState& s);

/// Image of a rotating-frame solution as a plain shallow-water field.
FlowField map_field_rsw_to_sw(const FlowField& field, const FlowParameters& params);
/// Image of a plain shallow-water solution as a rotating-frame field on (0, 2 pi / f).
FlowField map_field_sw_to_rsw(const FlowField& field, const FlowParameters& params);

enum class ActionGenerator { y7, y8, y9 };

/// A finite transformation along Y7, Y8 or Y9. For Y9 the parameter is
/// alpha = exp(-2a) > 0; for Y7 and Y8 it is the group parameter a itself.
struct GroupAction {
  ActionGenerator generator = ActionGenerator::y9;
  double parameter = 1.0;

  static GroupAction y7(double a) { return {ActionGenerator::y7, a}; }
  static GroupAction y8(double a) { return {ActionGenerator::y8, a}; }
  static GroupAction y9(double alpha);
};

/// chi(t) = 2 pi k / f with k such that t lies in ((2k-1) pi/f, (2k+1) pi/f).
int branch_index(double t, const FlowParameters& params);
double branch_offset(double t, const FlowParameters& params);
/// chi_1(t) = (2k+1) pi / f with t in (2k pi/f, 2(k+1) pi/f).
double branch_offset_y7(double t, const FlowParameters& params);

/// Applies the finite group action to a polar point and state. Inside the
/// guard band |cos(ft/2)| < 1e-9 (|sin(ft/2)| for Y7) the special-time values
/// are used.
std::pair<PolarPoint, PolarState> finite_transform(const GroupAction& action, const PolarPoint& p,
                                                   const PolarState& s,
                                                   const FlowParameters& params);

/// New solution obtained by carrying a polar solution along Y9 with parameter alpha.
FlowField transport_solution(const FlowField& field, double alpha, const FlowParameters& params);

}  // namespace rsw
