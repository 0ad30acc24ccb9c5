#include "rsw/liealg.hpp"

#include <doctest.h>

#include <unsupported/Eigen/AutoDiff>

using namespace rsw;

namespace {

using Jet6 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 6, 1>>;

Jacobian6 ad_jacobian(const GeneratorId& id, const JetPoint& p, double f) {
  Point6<Jet6> q;
  for (int i = 0; i < 6; ++i) q(i) = Jet6(p(i), 6, i);
  const Point6<Jet6> c = generator_coeffs<Jet6>(id, q, f);
  Jacobian6 j;
  for (int i = 0; i < 6; ++i) j.row(i) = c(i).derivatives().transpose();
  return j;
}

// The commutator table as printed, row [Y_i, .], column Y_j.
const char* const kPrinted[9][9] = {
    {"0", "0", "0", "0", "Y2", "Y1", "0", "Y3", "Y1"},
    {"0", "0", "0", "0", "-Y1", "Y2", "0", "Y4", "Y2"},
    {"0", "0", "0", "0", "Y4", "Y3", "-Y1", "0", "-Y3"},
    {"0", "0", "0", "0", "-Y3", "Y4", "-Y2", "0", "-Y4"},
    {"-Y2", "Y1", "-Y4", "Y3", "0", "0", "0", "0", "0"},
    {"-Y1", "-Y2", "-Y3", "-Y4", "0", "0", "0", "0", "0"},
    {"0", "0", "Y1", "Y2", "0", "0", "0", "Y9", "2Y7"},
    {"-Y3", "-Y4", "0", "0", "0", "0", "-Y9", "0", "-2Y8"},
    {"-Y1", "-Y2", "Y3", "Y4", "0", "0", "-2Y7", "2Y8", "0"},
};

}  // namespace

TEST_CASE("hand-written generator Jacobians match automatic differentiation") {
  const FlowParameters params{1.7, 1.0};
  const auto pts = generic_points(6, 11, params);
  for (GeneratorFamily fam : {GeneratorFamily::x_rsw, GeneratorFamily::y_rsw, GeneratorFamily::z_sw}) {
    for (int k = 1; k <= 9; ++k) {
      const GeneratorId id{fam, k};
      for (const JetPoint& p : pts) {
        const Jacobian6 hand = generator_jacobian(id, p, params);
        const Jacobian6 ad = ad_jacobian(id, p, params.f);
        CHECK((hand - ad).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("brackets are antisymmetric") {
  const FlowParameters params{0.9, 1.0};
  const auto pts = generic_points(4, 3, params);
  for (int a = 1; a <= 9; ++a) {
    for (int b = 1; b <= 9; ++b) {
      const GeneratorId ga{GeneratorFamily::y_rsw, a}, gb{GeneratorFamily::y_rsw, b};
      for (const JetPoint& p : pts) {
        const TangentVector s = lie_bracket(ga, gb, p, params) + lie_bracket(gb, ga, p, params);
        CHECK(s.cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("reference table spells out the printed commutators") {
  const StructureTable ref = reference_table();
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      CAPTURE(i);
      CAPTURE(j);
      CHECK(ref.entry(i, j, 'Y') == kPrinted[i][j]);
    }
  }
}

TEST_CASE("computed commutator tables are exact and independent of f") {
  for (double f : {0.37, 1.0, 2.0}) {
    const FlowParameters params{f, 1.0};
    const StructureTable y = structure_constants(GeneratorFamily::y_rsw, params);
    CHECK(y.max_difference(reference_table()) == 0.0);
    CHECK(y.fit_residual < 1e-9);
  }
  const StructureTable z = structure_constants(GeneratorFamily::z_sw, FlowParameters{1.0, 1.0});
  CHECK(z.max_difference(reference_table()) == 0.0);
  CHECK(z.entry(6, 8, 'Z') == "2Z7");
}

TEST_CASE("structure constants satisfy the Jacobi identity") {
  const StructureTable t = structure_constants(GeneratorFamily::y_rsw, FlowParameters{0.6, 1.0});
  auto c = [&](int i, int j, int k) { return t.coeff[i][j](k); };
  double worst = 0;
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) {
      for (int k = 0; k < 9; ++k) {
        for (int m = 0; m < 9; ++m) {
          double s = 0;
          for (int l = 0; l < 9; ++l) {
            s += c(i, j, l) * c(l, k, m) + c(j, k, l) * c(l, i, m) + c(k, i, l) * c(l, j, m);
          }
          worst = std::max(worst, std::abs(s));
        }
      }
    }
  }
  CHECK(worst == 0.0);
}

TEST_CASE("rotating and plain algebras are isomorphic") {
  const IsomorphismReport rep = verify_isomorphism(FlowParameters{1.3, 1.0});
  CHECK(rep.ok);
  CHECK(rep.tables_equal);
  CHECK(rep.matches_reference);
  CHECK(rep.nilradical_abelian);
  CHECK(rep.sl2_closed);
  CHECK(rep.mismatches.empty());
}

TEST_CASE("a mis-scaled Y7 breaks the isomorphism check") {
  const FlowParameters params{2.0, 1.0};
  GeneratorBasis basis = make_basis(GeneratorFamily::y_rsw, params);
  const VectorField y7 = basis[6];
  const double f = params.f;
  basis[6].eval = [y7, f](const JetPoint& p) -> TangentVector { return f * y7.eval(p); };
  basis[6].jacobian = [y7, f](const JetPoint& p) -> Jacobian6 { return f * y7.jacobian(p); };
  const IsomorphismReport rep = verify_isomorphism(basis, params);
  CHECK_FALSE(rep.ok);
  CHECK_FALSE(rep.mismatches.empty());
}

TEST_CASE("equivalence map pushes each Y_k to a multiple of Z_k") {
  const FlowParameters params{2.0, 1.0};
  const auto pts = generic_points(8, 7, params);
  const double expected[9] = {1, 1, 2, 2, 1, 1, 0.5, 2, 1};
  for (int k = 1; k <= 9; ++k) {
    const PushforwardReport r = pushforward_check(k, params, pts);
    CAPTURE(k);
    CHECK(r.ok);
    CHECK(r.multiplier == doctest::Approx(expected[k - 1]));
    CHECK(r.max_error < 1e-6);
  }
}
