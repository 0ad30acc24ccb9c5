#include "rsw/liealg.hpp"

#include "rsw/transforms.hpp"

#include <random>
#include <sstream>

namespace rsw {

std::string to_string(const GeneratorId& id) {
  const char* sym = id.family == GeneratorFamily::x_rsw   ? "X"
                    : id.family == GeneratorFamily::y_rsw ? "Y"
                                                          : "Z";
  return std::string(sym) + std::to_string(id.index);
}

Eigen::Matrix<double, 9, 9> y_from_x(double f) {
  Eigen::Matrix<double, 9, 9> m = Eigen::Matrix<double, 9, 9>::Zero();
  // Columns are X1..X9.
  m(0, 1) = 1;  m(0, 3) = -1;                 // Y1 = X2 - X4
  m(1, 2) = 1;  m(1, 0) = -1;                 // Y2 = X3 - X1
  m(2, 0) = 1;  m(2, 2) = 1;                  // Y3 = X1 + X3
  m(3, 1) = 1;  m(3, 3) = 1;                  // Y4 = X2 + X4
  m(4, 4) = 1;                                // Y5 = X5
  m(5, 5) = 1;                                // Y6 = X6
  m(6, 6) = 1 / f;  m(6, 4) = -0.5;  m(6, 7) = -1 / f;  // Y7 = (X7 - f/2 X5 - X8)/f
  m(7, 6) = 1 / f;  m(7, 4) = -0.5;  m(7, 7) = 1 / f;   // Y8 = (X7 - f/2 X5 + X8)/f
  m(8, 8) = -2 / f;                           // Y9 = -2/f X9
  return m;
}

namespace {

Jacobian6 x_jacobian(int k, const JetPoint& p, double f) {
  const double t = p(0), x = p(1), y = p(2), u = p(3), v = p(4), h = p(5);
  const double C = std::cos(f * t);
  const double S = std::sin(f * t);
  const double f2 = 0.5 * f * f;
  const double hf = 0.5 * f;
  Jacobian6 J = Jacobian6::Zero();
  switch (k) {
    case 1:
    case 2:
    case 7: break;
    case 3:
      J.col(0) << 0, -f * S, -f * C, -f * f * C, f * f * S, 0;
      break;
    case 4:
      J.col(0) << 0, f * C, -f * S, -f * f * S, -f * f * C, 0;
      break;
    case 5:
      J(1, 2) = -1;
      J(2, 1) = 1;
      J(3, 4) = -1;
      J(4, 3) = 1;
      break;
    case 6:
      J.diagonal() << 0, 1, 1, 1, 1, 2;
      break;
    case 8:
      J(0, 0) = -f * S;
      J.row(1) << -f2 * (x * C + y * S), -hf * S, hf * C, 0, 0, 0;
      J.row(2) << f2 * (x * S - y * C), -hf * C, -hf * S, 0, 0, 0;
      J.row(3) << f2 * ((u - f * y) * C - (v - f * x) * S), -f2 * C, -f2 * S, hf * S, hf * C, 0;
      J.row(4) << f2 * ((u + f * y) * S + (v + f * x) * C), f2 * S, -f2 * C, -hf * C, hf * S, 0;
      J.row(5) << f * f * h * C, 0, 0, 0, 0, f * S;
      break;
    case 9:
      J(0, 0) = f * C;
      J.row(1) << f2 * (-x * S + y * C), hf * C, hf * S, 0, 0, 0;
      J.row(2) << -f2 * (x * C + y * S), -hf * S, hf * C, 0, 0, 0;
      J.row(3) << f2 * ((u - f * y) * S + (v - f * x) * C), -f2 * S, f2 * C, -hf * C, hf * S, 0;
      J.row(4) << -f2 * ((u + f * y) * C - (v + f * x) * S), -f2 * C, -f2 * S, -hf * S, -hf * C, 0;
      J.row(5) << f * f * h * S, 0, 0, 0, 0, -f * C;
      break;
    default: throw Error(ErrorKind::invalid_params, "generator index out of range");
  }
  return J;
}

Jacobian6 z_jacobian(int k, const JetPoint& p) {
  const double t = p(0), x = p(1), y = p(2), u = p(3), v = p(4), h = p(5);
  Jacobian6 J = Jacobian6::Zero();
  switch (k) {
    case 1:
    case 2:
    case 7: break;
    case 3: J(1, 0) = 1; break;
    case 4: J(2, 0) = 1; break;
    case 5:
      J(1, 2) = -1;
      J(2, 1) = 1;
      J(3, 4) = -1;
      J(4, 3) = 1;
      break;
    case 6: J.diagonal() << 0, 1, 1, 1, 1, 2; break;
    case 8:
      J.row(0) << 2 * t, 0, 0, 0, 0, 0;
      J.row(1) << x, t, 0, 0, 0, 0;
      J.row(2) << y, 0, t, 0, 0, 0;
      J.row(3) << -u, 1, 0, -t, 0, 0;
      J.row(4) << -v, 0, 1, 0, -t, 0;
      J.row(5) << -2 * h, 0, 0, 0, 0, -2 * t;
      break;
    case 9: J.diagonal() << 2, 1, 1, -1, -1, -2; break;
    default: throw Error(ErrorKind::invalid_params, "generator index out of range");
  }
  return J;
}

}  // namespace

TangentVector generator_eval(const GeneratorId& id, const JetPoint& p,
                             const FlowParameters& params) {
  return generator_coeffs<double>(id, p, params.f);
}

Jacobian6 generator_jacobian(const GeneratorId& id, const JetPoint& p,
                             const FlowParameters& params) {
  if (id.index < 1 || id.index > 9) {
    throw Error(ErrorKind::invalid_params, "generator index out of range");
  }
  switch (id.family) {
    case GeneratorFamily::x_rsw: return x_jacobian(id.index, p, params.f);
    case GeneratorFamily::z_sw: return z_jacobian(id.index, p);
    case GeneratorFamily::y_rsw: {
      const Eigen::Matrix<double, 9, 9> m = y_from_x(params.f);
      Jacobian6 J = Jacobian6::Zero();
      for (int j = 0; j < 9; ++j) {
        const double w = m(id.index - 1, j);
        if (w != 0.0) J += w * x_jacobian(j + 1, p, params.f);
      }
      return J;
    }
  }
  return Jacobian6::Zero();
}

TangentVector lie_bracket(const GeneratorId& a, const GeneratorId& b, const JetPoint& p,
                          const FlowParameters& params) {
  const TangentVector va = generator_eval(a, p, params);
  const TangentVector vb = generator_eval(b, p, params);
  return generator_jacobian(b, p, params) * va - generator_jacobian(a, p, params) * vb;
}

GeneratorBasis make_basis(GeneratorFamily family, const FlowParameters& params) {
  GeneratorBasis basis;
  for (int k = 1; k <= 9; ++k) {
    const GeneratorId id{family, k};
    basis[k - 1] = VectorField{
        to_string(id),
        [id, params](const JetPoint& p) { return generator_eval(id, p, params); },
        [id, params](const JetPoint& p) { return generator_jacobian(id, p, params); }};
  }
  return basis;
}

TangentVector bracket(const VectorField& a, const VectorField& b, const JetPoint& p) {
  return b.jacobian(p) * a.eval(p) - a.jacobian(p) * b.eval(p);
}

double StructureTable::max_difference(const StructureTable& other) const {
  double m = 0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      m = std::max(m, (coeff[i][j] - other.coeff[i][j]).cwiseAbs().maxCoeff());
  return m;
}

std::string StructureTable::entry(int i, int j, char symbol) const {
  std::ostringstream os;
  bool any = false;
  for (int k = 0; k < 9; ++k) {
    const double c = coeff[i][j](k);
    if (c == 0.0) continue;
    if (c > 0 && any) os << '+';
    if (c == -1.0) {
      os << '-';
    } else if (c != 1.0) {
      os << c;
    }
    os << symbol << (k + 1);
    any = true;
  }
  return any ? os.str() : "0";
}

StructureTable reference_table() {
  // {coefficient, generator index}; index 0 means a zero entry.
  struct E {
    int c, k;
  };
  static constexpr E kTable[9][9] = {
      {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {1, 2}, {1, 1}, {0, 0}, {1, 3}, {1, 1}},
      {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {-1, 1}, {1, 2}, {0, 0}, {1, 4}, {1, 2}},
      {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {1, 4}, {1, 3}, {-1, 1}, {0, 0}, {-1, 3}},
      {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {-1, 3}, {1, 4}, {-1, 2}, {0, 0}, {-1, 4}},
      {{-1, 2}, {1, 1}, {-1, 4}, {1, 3}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
      {{-1, 1}, {-1, 2}, {-1, 3}, {-1, 4}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
      {{0, 0}, {0, 0}, {1, 1}, {1, 2}, {0, 0}, {0, 0}, {0, 0}, {1, 9}, {2, 7}},
      {{-1, 3}, {-1, 4}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {-1, 9}, {0, 0}, {-2, 8}},
      {{-1, 1}, {-1, 2}, {1, 3}, {1, 4}, {0, 0}, {0, 0}, {-2, 7}, {2, 8}, {0, 0}},
  };
  StructureTable t;
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      t.coeff[i][j].setZero();
      if (kTable[i][j].k > 0) t.coeff[i][j](kTable[i][j].k - 1) = kTable[i][j].c;
    }
  }
  return t;
}

std::vector<JetPoint> generic_points(int count, std::uint64_t seed, const FlowParameters& params) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  std::uniform_real_distribution<double> time(0.1, kPi / params.f - 0.1);
  std::vector<JetPoint> pts(count);
  for (auto& p : pts) {
    p(0) = time(rng);
    for (int i = 1; i < 6; ++i) p(i) = box(rng);
  }
  return pts;
}

namespace {

double snap(double c, double tol) {
  const double half = std::round(2.0 * c) / 2.0;
  return std::abs(c - half) <= tol ? half : c;
}

}  // namespace

StructureTable structure_constants(const GeneratorBasis& basis, std::span<const JetPoint> points,
                                   double snap_tol) {
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd frame(6 * n, 9);
  for (int s = 0; s < n; ++s)
    for (int k = 0; k < 9; ++k) frame.block<6, 1>(6 * s, k) = basis[k].eval(points[s]);

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(frame);
  if (qr.rank() < 9) {
    throw Error(ErrorKind::fit_degenerate,
                "generator frame is rank deficient on the sample; regenerate sample points");
  }

  StructureTable table;
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      Eigen::VectorXd rhs(6 * n);
      for (int s = 0; s < n; ++s) rhs.segment<6>(6 * s) = bracket(basis[i], basis[j], points[s]);
      const Eigen::Matrix<double, 9, 1> c = qr.solve(rhs);
      const double resid = (frame * c - rhs).cwiseAbs().maxCoeff() /
                           std::max(1.0, rhs.cwiseAbs().maxCoeff());
      table.fit_residual = std::max(table.fit_residual, resid);
      for (int k = 0; k < 9; ++k) table.coeff[i][j](k) = snap(c(k), snap_tol);
    }
  }
  return table;
}

StructureTable structure_constants(GeneratorFamily family, const FlowParameters& params,
                                   const FitOptions& opts) {
  const auto pts = generic_points(opts.points, opts.seed, params);
  return structure_constants(make_basis(family, params), pts, opts.snap_tol);
}

namespace {

void compare(const StructureTable& a, const StructureTable& b, const char* label, double tol,
             std::vector<std::string>& out) {
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      if ((a.coeff[i][j] - b.coeff[i][j]).cwiseAbs().maxCoeff() > tol) {
        out.push_back(std::string(label) + " [" + std::to_string(i + 1) + "," +
                      std::to_string(j + 1) + "]: " + a.entry(i, j) + " vs " + b.entry(i, j));
      }
    }
  }
}

}  // namespace

IsomorphismReport verify_isomorphism(const GeneratorBasis& rsw_basis,
                                     const FlowParameters& params, const FitOptions& opts) {
  constexpr double tol = 1e-9;
  IsomorphismReport rep;
  const auto pts = generic_points(opts.points, opts.seed, params);
  rep.rsw = structure_constants(rsw_basis, pts, opts.snap_tol);
  rep.sw = structure_constants(make_basis(GeneratorFamily::z_sw, params), pts, opts.snap_tol);
  rep.max_difference = rep.rsw.max_difference(rep.sw);
  rep.tables_equal = rep.max_difference <= tol;
  if (!rep.tables_equal) compare(rep.rsw, rep.sw, "rsw vs sw", tol, rep.mismatches);

  const StructureTable ref = reference_table();
  rep.matches_reference = rep.rsw.max_difference(ref) <= tol && rep.sw.max_difference(ref) <= tol;
  if (!rep.matches_reference) compare(rep.rsw, ref, "rsw vs reference", tol, rep.mismatches);

  rep.nilradical_abelian = true;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (rep.rsw.coeff[i][j].cwiseAbs().maxCoeff() > tol) rep.nilradical_abelian = false;

  rep.sl2_closed = true;
  for (int i = 6; i < 9; ++i)
    for (int j = 6; j < 9; ++j)
      if (rep.rsw.coeff[i][j].head<6>().cwiseAbs().maxCoeff() > tol) rep.sl2_closed = false;

  rep.ok = rep.tables_equal && rep.matches_reference && rep.nilradical_abelian && rep.sl2_closed;
  return rep;
}

IsomorphismReport verify_isomorphism(const FlowParameters& params, const FitOptions& opts) {
  return verify_isomorphism(make_basis(GeneratorFamily::y_rsw, params), params, opts);
}

double pushforward_multiplier(int k, const FlowParameters& params) {
  switch (k) {
    case 3:
    case 4:
    case 8: return params.f;
    case 7: return 1.0 / params.f;
    default: return 1.0;
  }
}

PushforwardReport pushforward_check(int k, const FlowParameters& params,
                                    std::span<const JetPoint> sample, double tol) {
  PushforwardReport rep;
  rep.index = k;
  rep.multiplier = pushforward_multiplier(k, params);
  const GeneratorId yk{GeneratorFamily::y_rsw, k};
  const GeneratorId zk{GeneratorFamily::z_sw, k};
  for (const JetPoint& p : sample) {
    const JetPoint image = equivalence_map6(p, params);  // throws singular_time
    Jacobian6 J;
    for (int j = 0; j < 6; ++j) {
      const double dh = 1e-6 * std::max(1.0, std::abs(p(j)));
      JetPoint plus = p, minus = p;
      plus(j) += dh;
      minus(j) -= dh;
      J.col(j) = (equivalence_map6(plus, params) - equivalence_map6(minus, params)) / (2 * dh);
    }
    const TangentVector pushed = J * generator_eval(yk, p, params);
    const TangentVector expected = rep.multiplier * generator_eval(zk, image, params);
    const double err =
        (pushed - expected).cwiseAbs().maxCoeff() / std::max(1.0, expected.cwiseAbs().maxCoeff());
    rep.max_error = std::max(rep.max_error, err);
  }
  rep.ok = rep.max_error <= tol;
  return rep;
}

}  // namespace rsw
