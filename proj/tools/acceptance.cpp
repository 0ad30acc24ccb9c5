// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// nonzero when any selected criterion fails.

#include "rsw/cli.hpp"
#include "rsw/liealg.hpp"
#include "rsw/reduction.hpp"
#include "rsw/solutions.hpp"
#include "rsw/transforms.hpp"
#include "rsw/verify.hpp"

#include <CLI11.hpp>

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace rsw;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double distance(const PolarPoint& a, double r, double theta) {
  return std::hypot(a.r * std::cos(a.theta) - r * std::cos(theta),
                    a.r * std::sin(a.theta) - r * std::sin(theta));
}

Outcome structure_constants_match() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  double worst = 0;
  for (double f : {0.37, 1.0, 2.0}) {
    const IsomorphismReport rep = verify_isomorphism(FlowParameters::make(f, 1.0));
    worst = std::max(worst, rep.max_difference);
    if (!(rep.matches_reference && rep.tables_equal)) {
      o.pass = false;
      o.detail += "f=" + fmt(f) + " mismatch; ";
    }
  }
  const double secs = seconds_since(start);
  if (secs >= 1.0) o.pass = false;
  o.detail += "Y and Z tables equal the reference for f in {0.37, 1, 2}, max deviation " + fmt(worst) +
              ", " + fmt(secs) + " s";
  return o;
}

Outcome residual_suite() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  double worst = 0;
  for (FamilyId id : kAllFamilies) {
    const FamilyParams fp = default_family_params(id);
    const FlowParameters params = default_flow_parameters(id);
    const GridSpec grid = default_grid(id, fp, params, 10);
    const double r = residual(make_family(id, fp, params), grid, params).max_residual();
    worst = std::max(worst, r);
    if (!(r < 1e-6)) {
      o.pass = false;
      o.detail += std::string(to_string(id)) + " residual " + fmt(r) + "; ";
    }
  }
  const double secs = seconds_since(start);
  if (secs >= 10.0) o.pass = false;
  o.detail += "10 families on 10x10x10 samples, worst " + fmt(worst) + ", " + fmt(secs) + " s";
  return o;
}

Outcome equivalence_images() {
  Outcome o;
  double worst = 0;
  int images = 0;
  for (FamilyId id : kAllFamilies) {
    const FamilyParams fp = default_family_params(id);
    const FlowParameters params = default_flow_parameters(id);
    const FlowField field = make_family(id, fp, params);
    if (field.system() != System::rsw || field.frame() != Frame::cartesian) continue;
    GridSpec g{Axis{-2.5, 2.5, 10}, Axis{-2, 2, 10}, Axis{-2, 2, 10}, false};
    const FlowField image = map_field_rsw_to_sw(field, params);
    if (image.system() != System::sw) o.pass = false;
    const double r = residual(image, g, params).max_residual();
    worst = std::max(worst, r);
    ++images;
    if (!(r < 1e-6)) o.pass = false;
  }
  double trip = 0;
  for (double f : {0.5, 1.0, 2.0}) {
    const FlowParameters params{f, 1.0};
    for (const JetPoint& p : generic_points(200, 3, params)) {
      trip = std::max(trip, (equivalence_inverse6(equivalence_map6(p, params), params) - p).cwiseAbs().maxCoeff());
    }
  }
  if (!(trip < 1e-10) || images == 0) o.pass = false;
  o.detail = std::to_string(images) + " Cartesian images, worst plain-system residual " + fmt(worst) +
             "; round-trip error " + fmt(trip);
  return o;
}

Outcome transport() {
  Outcome o;
  const FlowParameters params{1.0, 1.0};
  const FamilyParams rest;
  const FlowField src = make_family(FamilyId::rest, rest, params);
  double pointwise = 0;
  for (double alpha : {0.5, 2.0, 3.0}) {
    FamilyParams fp = rest;
    fp.alpha = alpha;
    const FlowField cyl = make_family(FamilyId::pulsating_cylinder, fp, params);
    const FlowField moved = transport_solution(src, alpha, params);
    for (int i = 0; i <= 40; ++i) {
      for (double r : {0.05, 0.5, 1.3, 2.9}) {
        const Vec3 p(2 * kPi * i / 40, r, 0.3 * i);
        pointwise = std::max(pointwise, (moved.eval(p) - cyl.eval(p)).cwiseAbs().maxCoeff());
      }
    }
  }
  const double alpha = 2.0;
  const double l = drop_l(alpha, params);
  FamilyParams st;
  st.profile = RadialProfile{RadialProfile::Kind::power, l, 2.0};
  st.h0 = std::pow(params.f, 4) / (12 * params.g * l * l);
  st.alpha = alpha;
  const FlowField moved = make_family(FamilyId::stationary_rot_sym, st, params);
  FamilyParams dp;
  dp.alpha = alpha;
  const FlowField drop = make_family(FamilyId::drop, dp, params);
  GridSpec g{Axis{0.0, 2 * kPi, 10}, Axis{0.05, 0.95 * drop_radius(0.0, alpha, params), 10},
             Axis{-kPi, kPi, 10}, false};
  const double res = residual(moved, g, params).max_residual();
  double agree = 0;
  for (int i = 0; i < 10; ++i) {
    for (int k = 0; k < 10; ++k) {
      const Vec3 p(g.t.node(i), g.a.node(k), 0.7);
      agree = std::max(agree, (moved.eval(p) - drop.eval(p)).cwiseAbs().maxCoeff());
    }
  }
  o.pass = pointwise < 1e-12 && res < 1e-6 && agree < 1e-9;
  o.detail = "rest to cylinder max difference " + fmt(pointwise) + "; transported l r^2 swirl residual " +
             fmt(res) + ", distance to the drop " + fmt(agree);
  return o;
}

Outcome trajectories() {
  Outcome o;
  const FlowParameters params{1.0, 1.0};
  const FlowField cyl = make_family(FamilyId::pulsating_cylinder, default_family_params(FamilyId::pulsating_cylinder), params);
  TrajectoryOptions one;
  one.output_times = {0.0, 2 * kPi};
  one.events = special_times(0, 2 * kPi, params);
  double ret = 0;
  for (double r0 : {0.1, 0.4, 0.9, 1.5, 2.5}) {
    for (double th : {0.0, 2.0, -2.5}) {
      const Trajectory tr = integrate_trajectory(cyl, r0, th, 0.0, 2 * kPi, one);
      ret = std::max(ret, distance(tr.points.back(), r0, th));
    }
  }

  const FamilyParams fp = default_family_params(FamilyId::drop);
  const FlowField drop = make_family(FamilyId::drop, fp, params);
  const double r0 = 1 / std::sqrt(3.0);
  TrajectoryOptions three;
  three.output_times = {0.0, 6 * kPi};
  three.events = special_times(0, 6 * kPi, params);
  const Trajectory tr = integrate_trajectory(drop, r0, 0.0, 0.0, 6 * kPi, three);
  const double closure = distance(tr.points.back(), r0, 0.0);

  const Closure a = closure_condition(fp, params, r0);
  const Closure b = closure_condition(fp, params, 1 / (2 * std::sqrt(3.0)));
  const bool classes = a.closed && a.m == 1 && a.M == 3 && b.closed && b.m == 1 && b.M == 6;
  o.pass = ret < 1e-8 && closure < 1e-6 && classes;
  o.detail = "cylinder return error " + fmt(ret) + "; drop closure at 6 pi " + fmt(closure) +
             "; classes (" + std::to_string(a.m) + "," + std::to_string(a.M) + ") and (" +
             std::to_string(b.m) + "," + std::to_string(b.M) + ")";
  return o;
}

Outcome conservation() {
  Outcome o;
  double worst = 0;
  std::string worst_family;
  int paths = 0;
  for (FamilyId id : kAllFamilies) {
    const FamilyParams fp = default_family_params(id);
    const FlowParameters params = default_flow_parameters(id);
    const FlowField field = make_family(id, fp, params);
    const TimeWindow w = field.domain().time;
    const double period = 2 * kPi / params.f;
    const bool finite_lo = std::isfinite(w.lo), finite_hi = std::isfinite(w.hi);
    const double span = finite_lo && finite_hi ? w.hi - w.lo : period;
    const double t0 = finite_lo ? w.lo + 0.02 * span : 0.0;
    const double t1 = std::min(t0 + period, finite_hi ? w.hi - 0.05 * span : t0 + period);
    TrajectoryOptions opts;
    opts.truncate_on_exit = true;
    opts.events = special_times(t0, t1, params);
    const auto [rlo, rhi] = field.domain().radial_range(t0);
    const double inner = std::max(rlo, 0.0);
    const double outer = std::isfinite(rhi) ? rhi : inner + 3.0;
    double family_worst = 0;
    for (int k = 0; k < 20; ++k) {
      const double r0 = inner + (outer - inner) * (0.05 + 0.9 * k / 19.0);
      const Trajectory tr = integrate_trajectory(field, r0, 0.37 * k, t0, t1, opts);
      // Each window spans at most one period.
      const double d = potential_vorticity_drift(field, tr, params);
      family_worst = std::max(family_worst, d);
      ++paths;
    }
    if (family_worst > worst) {
      worst = family_worst;
      worst_family = std::string(to_string(id));
    }
  }

  FamilyParams fp = default_family_params(FamilyId::pulsating_cylinder);
  const FlowParameters params{1.0, 1.0};
  const FlowField cyl = make_family(FamilyId::pulsating_cylinder, fp, params);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> t(0, 4 * kPi), r(0.01, 4), th(-kPi, kPi);
  double omega = 0;
  for (int i = 0; i < 100; ++i) {
    const double v = potential_vorticity(cyl, Vec3(t(rng), r(rng), th(rng)), params);
    omega = std::max(omega, std::abs(v - params.f / fp.h0));
  }
  o.pass = worst < 1e-5 && omega < 1e-10;
  o.detail = std::to_string(paths) + " paths, worst relative drift " + fmt(worst) + " (" + worst_family +
             "); cylinder |Omega - f/h0| " + fmt(omega);
  return o;
}

// Sign scan with bisection, kept apart from the library's bracketed solver.
std::vector<double> scan_roots(const std::function<double(double)>& g, double lo, double hi, int n) {
  std::vector<double> roots;
  double a = lo, ga = g(a);
  for (int i = 1; i <= n; ++i) {
    const double b = lo + (hi - lo) * i / n, gb = g(b);
    if ((ga < 0) != (gb < 0)) {
      double x0 = a, x1 = b, g0 = ga;
      for (int it = 0; it < 200 && x1 - x0 > 1e-15 * x1; ++it) {
        const double m = 0.5 * (x0 + x1), gm = g(m);
        if ((gm < 0) == (g0 < 0)) {
          x0 = m;
          g0 = gm;
        } else {
          x1 = m;
        }
      }
      roots.push_back(0.5 * (x0 + x1));
    }
    a = b;
    ga = gb;
  }
  return roots;
}

Outcome ring_geometry() {
  Outcome o;
  const RingConstants c{1.0, 1.0, 1.0};
  const FlowParameters params{0.1, 1.0};
  const RingBounds b = ring_bounds(c, params);
  const auto disc = [&](double r) { return ring_discriminant(c, params, r); };
  const std::vector<double> oracle = scan_roots(disc, 0.05, 60.0, 20000);
  const bool oracle_ok = oracle.size() == 2 && std::abs(oracle[0] - b.r_inner) < 1e-8 &&
                         std::abs(oracle[1] - b.r_outer) < 1e-8;
  const double gmax = std::max(std::abs(disc(b.r_inner)), std::abs(disc(b.r_outer)));

  double sonic = 0;
  for (auto [r, hc] : {std::pair{b.r_inner, b.hc_inner}, std::pair{b.r_outer, b.hc_outer}}) {
    const double u = c.c3 / (r * hc);
    sonic = std::max(sonic, std::abs(u * u - params.g * hc) / (params.g * hc));
  }
  const double hs = (2 * c.c1 - c.c2 * params.f) / (3 * params.g);
  const bool below_hs = b.hc_inner <= hs && b.hc_outer <= hs;

  int lower_ok = 0, upper_ok = 0;
  double upper_max_fr = 0, first_bad = 0;
  for (int k = 1; k <= 50; ++k) {
    const double r = b.r_inner + (b.r_outer - b.r_inner) * k / 51.0;
    for (Branch br : {Branch::lower, Branch::upper}) {
      const double h = ring_depth(c, params, r, br);
      const double u = c.c3 / (r * h), v = c.c2 / r - params.f * r / 2;
      const double fr = std::hypot(u, v) / std::sqrt(params.g * h);
      if (br == Branch::lower) {
        lower_ok += fr > 1;
      } else {
        upper_ok += fr < 1;
        if (!(fr < 1) && first_bad == 0) first_bad = r;
        upper_max_fr = std::max(upper_max_fr, fr);
      }
    }
  }
  o.pass = oracle_ok && gmax < 1e-10 && sonic < 1e-8 && below_hs && lower_ok == 50 && upper_ok == 50;
  o.detail = "r_* = " + fmt(b.r_inner) + ", r^* = " + fmt(b.r_outer) + (oracle_ok ? " (scan agrees)" : " (scan disagrees)") +
             "; |G| " + fmt(gmax) + "; |U^2 - gh|/gh " + fmt(sonic) + "; hc " + fmt(b.hc_inner) + ", " +
             fmt(b.hc_outer) + " vs hs " + fmt(hs) + "; lower Fr>1 at " + std::to_string(lower_ok) +
             "/50, upper Fr<1 at " + std::to_string(upper_ok) + "/50";
  if (upper_ok < 50) o.detail += " (upper Fr >= 1 from r = " + fmt(first_bad) + ", max " + fmt(upper_max_fr) + ")";
  return o;
}

Outcome collapse() {
  Outcome o;
  const FlowParameters params{1.0, 1.0};
  double worst = 0;
  bool turn = false, others_monotone = true;
  for (auto [phi0, eta0] : {std::pair{0.0, 1.0}, std::pair{-1.0, 1.0}, std::pair{0.5, 1.0}}) {
    const ImplicitCollapse ic = collapse2_build(phi0, eta0, params);
    const CollapseOdeReport rep = collapse2_verify_ode(ic, 0.9);
    worst = std::max({worst, rep.max_eta_error, rep.max_phi_error});
    if (phi0 > 0) turn = rep.turning_point_seen && rep.eta_monotone_after_turn && ic.t1() > 0;
    else others_monotone = others_monotone && !rep.turning_point_seen;
    o.detail += "(" + fmt(phi0) + "," + fmt(eta0) + ") T* " + fmt(ic.blow_up_time()) + "; ";
  }
  o.pass = worst < 1e-6 && turn && others_monotone;
  o.detail += "max error " + fmt(worst) + (turn ? ", turning point seen" : ", no turning point");
  return o;
}

Outcome finite_volumes() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const FlowParameters params{1.0, 1.0};
  const FlowField cyl = make_family(FamilyId::pulsating_cylinder, default_family_params(FamilyId::pulsating_cylinder), params);
  FvConfig cfg;
  cfg.meshes = {100, 200};
  cfg.t1 = 0.25 * 2 * kPi / params.f;
  const FvResult r = fv_oracle(cyl, params, cfg);
  const double secs = seconds_since(start);
  o.pass = r.min_rate() >= 0.8 && secs < 60;
  o.detail = "L1 errors " + fmt(r.runs[0].l1_error) + ", " + fmt(r.runs[1].l1_error) + ", rate " +
             fmt(r.min_rate()) + ", " + fmt(secs) + " s";
  return o;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"rsw"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli_behaviour() {
  Outcome o;
  int zero = 0;
  for (FamilyId id : kAllFamilies) {
    if (run_cli({"residual", "--family", std::string(to_string(id))}) == 0) ++zero;
  }
  const int corrupt = run_cli({"residual", "--family", "drop", "--corrupt-depth", "1.01"});

  const auto dir = std::filesystem::temp_directory_path() / ("rsw_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  bool same = true;
  const std::vector<std::string> commands = {
      "residual --family ring --format json --random 50",
      "trajectory --family drop --alpha 2 --r0 0.3,0.57735026918962573 --periods 3",
      "field --family collapse-contact --format json",
      "commutators --family Y --format json",
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::string bytes[2];
    for (int run = 0; run < 2; ++run) {
      const auto path = dir / (std::to_string(i) + "_" + std::to_string(run));
      const std::string cmd = std::string(RSW_CLI_PATH) + " " + commands[i] + " --out " + path.string() + " 2>/dev/null";
      if (std::system(cmd.c_str()) != 0) same = false;
      bytes[run] = slurp(path);
    }
    if (bytes[0].empty() || bytes[0] != bytes[1]) same = false;
  }
  std::filesystem::remove_all(dir);
  o.pass = zero == 10 && corrupt == 1 && same;
  o.detail = "residual exit 0 for " + std::to_string(zero) + "/10 families, corrupted fixture exit " +
             std::to_string(corrupt) + ", repeated runs " + (same ? "byte-identical" : "differ");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the rotating shallow water library"};
  std::vector<int> selected;
  app.add_option("--criterion", selected, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) {
    for (int i = 1; i <= 10; ++i) selected.push_back(i);
  }

  const std::vector<std::pair<const char*, Outcome (*)()>> checks = {
      {"structure constants", structure_constants_match},
      {"residual suite", residual_suite},
      {"equivalence map", equivalence_images},
      {"solution transport", transport},
      {"periodicity and trajectories", trajectories},
      {"conservation", conservation},
      {"ring geometry", ring_geometry},
      {"collapse regime", collapse},
      {"finite-volume oracle", finite_volumes},
      {"command line", cli_behaviour},
  };

  int failures = 0;
  for (int n : selected) {
    const auto& [name, check] = checks[n - 1];
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << " " << name << ": " << o.detail
              << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
