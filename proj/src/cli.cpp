#include "rsw/cli.hpp"

#include "rsw/liealg.hpp"
#include "rsw/solutions.hpp"
#include "rsw/transforms.hpp"
#include "rsw/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace rsw::cli {
namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string family;
  std::vector<std::string> params;
  double f = 1, g = 1, h0 = 1, u0 = 1, v0 = 0.5, alpha = 2, phi0 = 0, eta0 = 1, lambda0 = 1;
  std::string branch = "lower";
  std::string t, r, theta, x, y;
  std::string mode = "analytic";
  double fd_step = 1e-5;
  std::string format = "csv";
  std::string out = "-";
  std::uint64_t seed = 20090715;
  double threshold = 0;
  double corrupt = 1;
  int random = 0;
  int n = 10;
  std::string r0 = "0.5";
  double theta0 = 0;
  int periods = 0;
  std::string direction;
  bool transport = false;
};

std::string number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Short form for human-readable summaries.
std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string csv() const {
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + csv_quote(columns[i]);
    s += "\r\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + number(row[i]);
      s += "\r\n";
    }
    return s;
  }
  json rows_json() const {
    json a = json::array();
    for (const auto& row : rows) {
      json r = json::array();
      for (double v : row) r.push_back(std::isnan(v) ? json(nullptr) : json(v));
      a.push_back(std::move(r));
    }
    return a;
  }
};

// Writes to a temporary sibling and renames it into place, so readers never
// see a partial file.
void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    return;
  }
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::invalid_params, "cannot open output file '" + path + "'");
    os << content;
    os.flush();
    if (!os) {
      std::filesystem::remove(tmp);
      throw Error(ErrorKind::invalid_params, "failed writing output file '" + path + "'");
    }
  }
  std::filesystem::rename(tmp, target);
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw UsageError("invalid number '" + s + "' for " + what);
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

bool is_range(const std::string& s) { return s.find(':') != std::string::npos; }

// `lo:hi:count`, both ends included, or a single value.
Axis parse_axis(const std::string& s, const std::string& what) {
  const auto parts = split(s, ':');
  if (parts.size() == 1) {
    const double v = parse_number(parts[0], what);
    return Axis{v, v, 1};
  }
  if (parts.size() != 3) throw UsageError("expected lo:hi:count for " + what + ", got '" + s + "'");
  Axis a;
  a.lo = parse_number(parts[0], what);
  a.hi = parse_number(parts[1], what);
  const double n = parse_number(parts[2], what);
  if (n != std::floor(n) || n < 2) {
    throw UsageError("count must be an integer >= 2 in " + what + " '" + s + "'");
  }
  if (!(a.hi >= a.lo)) throw UsageError("range " + what + " '" + s + "' has hi < lo");
  a.n = static_cast<int>(n);
  return a;
}

// Comma-separated values; an item may itself be a lo:hi:count range.
std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& item : split(s, ',')) {
    if (is_range(item)) {
      const Axis a = parse_axis(item, what);
      for (int i = 0; i < a.n; ++i) out.push_back(a.node(i));
    } else {
      out.push_back(parse_number(item, what));
    }
  }
  if (out.empty()) throw UsageError("empty list for " + what);
  return out;
}

bool given(const CLI::App* app, const std::string& name) { return app->count(name) > 0; }

FamilyId family_of(const Options& o) {
  if (o.family.empty()) throw UsageError("--family is required");
  const auto id = parse_family(o.family);
  if (!id) {
    std::string names;
    for (FamilyId f : kAllFamilies) names += std::string(names.empty() ? "" : ", ") + std::string(to_string(f));
    throw UsageError("unknown family '" + o.family + "' (expected one of " + names + ")");
  }
  return *id;
}

void apply_param(FamilyParams& fp, FamilyId id, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw UsageError("--param expects name=value, got '" + kv + "'");
  const std::string name = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);
  const std::string what = "--param " + name;
  RingConstants& c = id == FamilyId::collapse_contact_cubic ? fp.cubic : fp.ring;
  const std::map<std::string, double*> numeric = {
      {"h0", &fp.h0},
      {"u0", &fp.u0},
      {"v0", &fp.v0},
      {"alpha", &fp.alpha},
      {"profile_c", &fp.profile.c},
      {"profile_p", &fp.profile.p},
      {"c1", &c.c1},
      {"c2", &c.c2},
      {"c3", &c.c3},
      {"psi_c", &fp.psi.c},
      {"lambda0", &fp.lambda0},
      {"eta0", &fp.eta0},
      {"lambda_lo", &fp.lambda_lo},
      {"lambda_hi", &fp.lambda_hi},
      {"phi0", &fp.phi0},
      {"piston_inner", &fp.piston_inner},
      {"piston_outer", &fp.piston_outer},
  };
  if (const auto it = numeric.find(name); it != numeric.end()) {
    *it->second = parse_number(value, what);
  } else if (name == "profile") {
    if (value == "power") fp.profile.kind = RadialProfile::Kind::power;
    else if (value == "gaussian") fp.profile.kind = RadialProfile::Kind::gaussian;
    else throw UsageError("profile must be power or gaussian, got '" + value + "'");
  } else if (name == "psi") {
    if (value == "sine") fp.psi.kind = ContactProfile::Kind::sine;
    else if (value == "constant") fp.psi.kind = ContactProfile::Kind::constant;
    else throw UsageError("psi must be sine or constant, got '" + value + "'");
  } else if (name == "branch") {
    if (value == "lower") fp.branch = Branch::lower;
    else if (value == "upper") fp.branch = Branch::upper;
    else throw UsageError("branch must be lower or upper, got '" + value + "'");
  } else {
    throw UsageError("unknown family parameter '" + name + "'");
  }
}

struct Setup {
  FamilyId id;
  FamilyParams fp;
  FlowParameters params;
  FlowField field;
};

Setup setup(const CLI::App* app, const Options& o, bool build = true) {
  Setup s;
  s.id = family_of(o);
  s.fp = default_family_params(s.id);
  s.params = default_flow_parameters(s.id);
  if (given(app, "--f")) s.params.f = o.f;
  if (given(app, "--g")) s.params.g = o.g;
  s.params.validate();
  if (given(app, "--h0")) s.fp.h0 = o.h0;
  if (given(app, "--u0")) s.fp.u0 = o.u0;
  if (given(app, "--v0")) s.fp.v0 = o.v0;
  if (given(app, "--alpha")) s.fp.alpha = o.alpha;
  if (given(app, "--phi0")) s.fp.phi0 = o.phi0;
  if (given(app, "--eta0")) s.fp.eta0 = o.eta0;
  if (given(app, "--lambda0")) s.fp.lambda0 = o.lambda0;
  if (given(app, "--branch")) apply_param(s.fp, s.id, "branch=" + o.branch);
  for (const std::string& kv : o.params) apply_param(s.fp, s.id, kv);
  if (!build) return s;
  s.field = make_family(s.id, s.fp, s.params);
  if (o.corrupt != 1.0) s.field = scaled_depth(s.field, o.corrupt);
  if (o.mode == "fd") s.field = s.field.with_mode(DerivativeMode::finite_difference, o.fd_step);
  return s;
}

json params_json(const Setup& s) {
  json j;
  j["f"] = s.params.f;
  j["g"] = s.params.g;
  const FamilyParams& p = s.fp;
  switch (s.id) {
    case FamilyId::rest:
    case FamilyId::barochronous_sw: j["h0"] = p.h0; break;
    case FamilyId::constant_sw_image:
      j["h0"] = p.h0;
      j["u0"] = p.u0;
      j["v0"] = p.v0;
      break;
    case FamilyId::stationary_rot_sym:
      j["h0"] = p.h0;
      j["alpha"] = p.alpha;
      j["profile"] = p.profile.kind == RadialProfile::Kind::power ? "power" : "gaussian";
      j["profile_c"] = p.profile.c;
      j["profile_p"] = p.profile.p;
      break;
    case FamilyId::pulsating_cylinder:
      j["h0"] = p.h0;
      j["alpha"] = p.alpha;
      break;
    case FamilyId::drop: j["alpha"] = p.alpha; break;
    case FamilyId::ring:
      j["c1"] = p.ring.c1;
      j["c2"] = p.ring.c2;
      j["c3"] = p.ring.c3;
      j["branch"] = p.branch == Branch::lower ? "lower" : "upper";
      break;
    case FamilyId::collapse_contact:
      j["psi"] = p.psi.kind == ContactProfile::Kind::sine ? "sine" : "constant";
      j["psi_c"] = p.psi.c;
      j["lambda0"] = p.lambda0;
      j["eta0"] = p.eta0;
      j["lambda_lo"] = p.lambda_lo;
      j["lambda_hi"] = p.lambda_hi;
      break;
    case FamilyId::collapse_contact_cubic:
      j["c1"] = p.cubic.c1;
      j["c2"] = p.cubic.c2;
      j["c3"] = p.cubic.c3;
      break;
    case FamilyId::collapse_scaling:
      j["phi0"] = p.phi0;
      j["eta0"] = p.eta0;
      j["piston_inner"] = p.piston_inner;
      j["piston_outer"] = p.piston_outer;
      break;
  }
  return j;
}

// Sample layout for field-type output: times x a-axis x b-axis in one frame.
struct Sampling {
  Frame frame = Frame::polar;
  std::vector<double> times;
  Axis a;
  Axis b;
  bool radial_fraction = false;

  std::vector<Vec3> points(const Domain& domain) const {
    std::vector<Vec3> out;
    for (double t : times) {
      double lo = a.lo, hi = a.hi;
      if (radial_fraction) {
        const auto [rlo, rhi] = domain.radial_range(t);
        lo = rlo + a.lo * (rhi - rlo);
        hi = rlo + a.hi * (rhi - rlo);
      }
      for (int i = 0; i < a.n; ++i) {
        const double av = a.n == 1 ? lo : lo + (hi - lo) * i / (a.n - 1);
        for (int j = 0; j < b.n; ++j) out.emplace_back(t, av, b.node(j));
      }
    }
    return out;
  }
};

Axis single(double v) { return Axis{v, v, 1}; }

// Applies --r/--theta or --x/--y to a sampling whose defaults are in `native` frame.
void spatial_overrides(const Options& o, Frame native, Axis& a, Axis& b, bool& radial_fraction,
                       Frame& frame) {
  const bool polar = !o.r.empty() || !o.theta.empty();
  const bool cart = !o.x.empty() || !o.y.empty();
  if (polar && cart) throw UsageError("use either --r/--theta or --x/--y, not both");
  frame = native;
  if (!polar && !cart) return;
  const Frame want = polar ? Frame::polar : Frame::cartesian;
  const std::string& sa = polar ? o.r : o.x;
  const std::string& sb = polar ? o.theta : o.y;
  const char* na = polar ? "--r" : "--x";
  const char* nb = polar ? "--theta" : "--y";
  if (want != native) {
    // Defaults of the other frame do not carry over.
    a = polar ? Axis{0.1, 2.0, 10} : Axis{-2.0, 2.0, 10};
    b = polar ? Axis{-kPi, kPi, 10} : Axis{-2.0, 2.0, 10};
    radial_fraction = false;
  }
  if (!sa.empty()) {
    a = parse_axis(sa, na);
    radial_fraction = false;
    if (sb.empty()) b = single(0.0);
  }
  if (!sb.empty()) {
    b = parse_axis(sb, nb);
    if (sa.empty() && want != native) a = single(1.0);
  }
  frame = want;
}

Sampling sampling_for(const Options& o, const GridSpec& grid, Frame native) {
  Sampling s;
  s.a = grid.a;
  s.b = grid.b;
  s.radial_fraction = grid.radial_fraction;
  spatial_overrides(o, native, s.a, s.b, s.radial_fraction, s.frame);
  if (!o.t.empty()) {
    s.times = parse_list(o.t, "--t");
  } else {
    for (int i = 0; i < grid.t.n; ++i) s.times.push_back(grid.t.node(i));
  }
  return s;
}

// Default sample for a field without a catalog grid (images under a map).
GridSpec auto_grid(const FlowField& field, int n) {
  const TimeWindow& w = field.domain().time;
  double lo = std::isfinite(w.lo) ? w.lo : (std::isfinite(w.hi) ? w.hi - 6.0 : -3.0);
  double hi = std::isfinite(w.hi) ? w.hi : lo + 6.0;
  const double inset = 0.05 * (hi - lo);
  GridSpec g;
  g.t = Axis{lo + inset, hi - inset, n};
  const auto [rlo, rhi] = field.domain().radial_range(0.5 * (g.t.lo + g.t.hi));
  if (std::isfinite(rhi)) {
    g.a = Axis{0.05, 0.95, n};
    g.radial_fraction = true;
    g.b = Axis{-kPi, kPi, n};
  } else if (field.frame() == Frame::polar) {
    g.a = Axis{std::max(rlo, 0.1), std::max(rlo, 0.1) + 1.9, n};
    g.b = Axis{-kPi, kPi, n};
  } else {
    g.a = Axis{-2, 2, n};
    g.b = Axis{-2, 2, n};
  }
  return g;
}

Table sample_table(const FlowField& field, const Sampling& s, std::vector<Vec3>* pts = nullptr) {
  const FlowField view = s.frame == Frame::polar ? field.as_polar() : field.as_cartesian();
  Table t;
  t.columns = s.frame == Frame::polar ? std::vector<std::string>{"t", "r", "theta", "U", "V", "h"}
                                      : std::vector<std::string>{"t", "x", "y", "u", "v", "h"};
  const std::vector<Vec3> points = s.points(view.domain());
  for (const Vec3& p : points) {
    const Vec3 v = view.eval(p);
    t.rows.push_back({p(0), p(1), p(2), v(0), v(1), v(2)});
  }
  if (pts) *pts = points;
  return t;
}

json header(const std::string& command) {
  json j;
  j["schema"] = 1;
  j["command"] = command;
  return j;
}

void check_format(const Options& o) {
  if (o.format != "csv" && o.format != "json") {
    throw UsageError("--format must be csv or json, got '" + o.format + "'");
  }
}

int cmd_field(const CLI::App* app, const Options& o, std::ostream& out, std::ostream&) {
  check_format(o);
  const FamilyId id = family_of(o);
  if ((id == FamilyId::pulsating_cylinder || id == FamilyId::drop) && !given(app, "--alpha")) {
    throw UsageError("--alpha is required for family " + std::string(to_string(id)));
  }
  const Setup s = setup(app, o);
  const Sampling smp = sampling_for(o, default_grid(s.id, s.fp, s.params, 5), s.field.frame());
  const Table table = sample_table(s.field, smp);
  if (o.format == "csv") {
    write_output(o.out, table.csv(), out);
  } else {
    json j = header("field");
    j["family"] = std::string(to_string(s.id));
    j["parameters"] = params_json(s);
    j["frame"] = to_string(smp.frame);
    j["columns"] = table.columns;
    j["rows"] = table.rows_json();
    write_output(o.out, j.dump(2) + "\n", out);
  }
  return ok;
}

// Algebraic least-squares circle through the points; NaN when degenerate.
struct Circle {
  double a = std::nan(""), b = std::nan(""), r = std::nan("");
};

Circle fit_circle(const std::vector<Eigen::Vector2d>& pts) {
  Circle c;
  if (pts.size() < 3) return c;
  Eigen::MatrixXd A(pts.size(), 3);
  Eigen::VectorXd rhs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    A.row(i) << pts[i](0), pts[i](1), 1.0;
    rhs(i) = -pts[i].squaredNorm();
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < 3) return c;
  const Eigen::Vector3d sol = qr.solve(rhs);
  c.a = -sol(0) / 2;
  c.b = -sol(1) / 2;
  const double r2 = c.a * c.a + c.b * c.b - sol(2);
  c.r = r2 > 0 ? std::sqrt(r2) : std::nan("");
  return c;
}

int cmd_trajectory(const CLI::App* app, const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o);
  const FamilyId id = family_of(o);
  if ((id == FamilyId::pulsating_cylinder || id == FamilyId::drop) && !given(app, "--alpha")) {
    throw UsageError("--alpha is required for family " + std::string(to_string(id)));
  }
  const Setup s = setup(app, o);
  std::vector<double> times;
  const double period = 2 * kPi / s.params.f;
  if (!o.t.empty()) {
    if (given(app, "--periods")) throw UsageError("use either --t or --periods");
    times = parse_list(o.t, "--t");
  } else if (given(app, "--periods")) {
    if (o.periods < 1) throw UsageError("--periods must be >= 1");
    for (int i = 0; i <= 8 * o.periods; ++i) times.push_back(period * i / 8.0);
  } else {
    const GridSpec g = default_grid(s.id, s.fp, s.params, 9);
    for (int i = 0; i < g.t.n; ++i) times.push_back(g.t.node(i));
  }
  if (!std::is_sorted(times.begin(), times.end()) ||
      std::adjacent_find(times.begin(), times.end()) != times.end()) {
    throw UsageError("--t must be strictly increasing for trajectories");
  }
  const std::vector<double> r0s = parse_list(o.r0, "--r0");

  TrajectoryOptions opts;
  opts.output_times = times;
  opts.events = special_times(times.front(), times.back(), s.params);

  Table table;
  table.columns = {"particle", "t", "r", "theta", "x", "y", "circle_residual", "formula_error"};
  json particles = json::array();
  for (std::size_t k = 0; k < r0s.size(); ++k) {
    const double r0 = r0s[k];
    if (!(r0 >= 0)) throw Error(ErrorKind::invalid_params, "--r0 must be >= 0, got " + number(r0));
    const Trajectory tr = integrate_trajectory(s.field, r0, o.theta0, times.front(), times.back(), opts);

    std::optional<TrajectoryFormula> formula;
    if (r0 > 0) {
      try {
        TrajectoryFormula tf = trajectory_formula(s.id, s.fp, s.params, r0, o.theta0);
        const PolarPoint p0 = tf.position(times.front());
        if (std::abs(p0.r - r0) <= 1e-9 * std::max(1.0, r0) && std::abs(p0.theta - o.theta0) <= 1e-9) {
          formula = std::move(tf);
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::unsupported_family) throw;
      }
    }
    std::vector<Eigen::Vector2d> xy;
    for (const PolarPoint& p : tr.points) xy.emplace_back(p.r * std::cos(p.theta), p.r * std::sin(p.theta));
    const Circle circle = r0 > 0 ? fit_circle(xy) : Circle{};
    double circle_max = std::isnan(circle.r) ? std::nan("") : 0.0;
    double formula_max = formula ? 0.0 : std::nan("");
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
      const PolarPoint& p = tr.points[i];
      const double cres = std::isnan(circle.r) ? std::nan("")
                                               : std::abs(std::hypot(xy[i](0) - circle.a, xy[i](1) - circle.b) - circle.r);
      double ferr = std::nan("");
      if (formula) {
        const PolarPoint q = formula->position(p.t);
        ferr = std::hypot(xy[i](0) - q.r * std::cos(q.theta), xy[i](1) - q.r * std::sin(q.theta));
        formula_max = std::max(formula_max, ferr);
      }
      if (!std::isnan(cres)) circle_max = std::max(circle_max, cres);
      table.rows.push_back({static_cast<double>(k), p.t, p.r, p.theta, xy[i](0), xy[i](1), cres, ferr});
    }

    std::string closure = "not classified";
    json jc = nullptr;
    if (s.id == FamilyId::drop && r0 > 0) {
      const Closure c = closure_condition(s.fp, s.params, r0);
      closure = c.closed ? "closed m=" + std::to_string(c.m) + " M=" + std::to_string(c.M) : "quasi-closed";
      jc = json{{"closed", c.closed}, {"m", c.m}, {"M", c.M}};
    }
    err << "particle " << k << " r0=" << brief(r0) << ": " << closure;
    if (!std::isnan(circle.r)) {
      err << "; circle A=" << brief(circle.a) << " B=" << brief(circle.b) << " R=" << brief(circle.r)
          << " max residual " << brief(circle_max);
    }
    if (formula) err << "; formula error " << brief(formula_max);
    err << "\n";

    json jp;
    jp["particle"] = k;
    jp["r0"] = r0;
    jp["theta0"] = o.theta0;
    jp["summary"] = closure;
    jp["closure"] = jc;
    jp["circle"] = std::isnan(circle.r) ? json(nullptr)
                                        : json{{"a", circle.a}, {"b", circle.b}, {"r", circle.r},
                                               {"max_residual", circle_max}};
    jp["formula_max_error"] = formula ? json(formula_max) : json(nullptr);
    jp["steps"] = tr.steps;
    jp["rejected"] = tr.rejected;
    particles.push_back(std::move(jp));
  }

  if (o.format == "csv") {
    write_output(o.out, table.csv(), out);
  } else {
    json j = header("trajectory");
    j["family"] = std::string(to_string(s.id));
    j["parameters"] = params_json(s);
    j["particles"] = particles;
    j["columns"] = table.columns;
    j["rows"] = table.rows_json();
    write_output(o.out, j.dump(2) + "\n", out);
  }
  return ok;
}

int cmd_residual(const CLI::App* app, const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o);
  if (o.mode != "analytic" && o.mode != "fd") throw UsageError("--mode must be analytic or fd");
  if (!(o.fd_step > 0)) throw UsageError("--fd-step must be positive");
  if (o.n < 2) throw UsageError("--n must be >= 2");
  if (o.random < 0) throw UsageError("--random must be >= 0");
  const Setup s = setup(app, o);
  GridSpec grid = default_grid(s.id, s.fp, s.params, o.n);
  if (!o.t.empty()) {
    if (!is_range(o.t) || o.t.find(',') != std::string::npos) {
      throw UsageError("residual --t expects lo:hi:count, got '" + o.t + "'");
    }
    grid.t = parse_axis(o.t, "--t");
  }
  Frame frame = s.field.frame();
  spatial_overrides(o, s.field.frame(), grid.a, grid.b, grid.radial_fraction, frame);

  ResidualReport rep = frame == Frame::polar ? residual_polar(s.field, grid, s.params)
                                             : residual_cartesian(s.field, grid, s.params);
  double random_max = 0;
  if (o.random > 0) {
    // Extra points drawn uniformly inside the same sample box.
    const FlowField view = frame == Frame::polar ? s.field.as_polar() : s.field.as_cartesian();
    std::mt19937_64 rng(o.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < o.random; ++i) {
      const double t = grid.t.lo + unit(rng) * (grid.t.hi - grid.t.lo);
      double a = grid.a.lo + unit(rng) * (grid.a.hi - grid.a.lo);
      const double b = grid.b.lo + unit(rng) * (grid.b.hi - grid.b.lo);
      if (grid.radial_fraction && frame == Frame::polar) {
        const auto [rlo, rhi] = view.domain().radial_range(t);
        a = rlo + a * (rhi - rlo);
      }
      const Vec3 p(t, a, b);
      if (!view.contains(p)) continue;
      if (frame == Frame::polar && !(a > 0)) continue;
      const Vec3 v = frame == Frame::polar ? residual_point_polar(view, p, s.params)
                                           : residual_point_cartesian(view, p, s.params);
      random_max = std::max(random_max, v.maxCoeff());
    }
  }
  const double threshold =
      given(app, "--threshold") ? o.threshold : (o.mode == "fd" ? 1e-4 : 1e-6);
  const double worst = std::max(rep.max_residual(), random_max);
  const bool pass = worst < threshold;

  if (o.format == "json") {
    json j = header("residual");
    j["family"] = std::string(to_string(s.id));
    j["parameters"] = params_json(s);
    j["system"] = to_string(s.field.system());
    j["frame"] = to_string(rep.frame);
    j["mode"] = to_string(rep.mode);
    j["fd_step"] = rep.fd_step;
    j["corrupt_depth"] = o.corrupt;
    j["samples"] = rep.samples;
    j["max"] = rep.max;
    j["rms"] = rep.rms;
    j["worst_equation"] = rep.worst_equation;
    j["worst_point"] = {rep.worst_point(0), rep.worst_point(1), rep.worst_point(2)};
    j["random_samples"] = o.random;
    j["random_seed"] = o.seed;
    j["random_max"] = random_max;
    j["max_residual"] = worst;
    j["threshold"] = threshold;
    j["pass"] = pass;
    write_output(o.out, j.dump(2) + "\n", out);
  } else {
    Table t;
    t.columns = {"equation", "max", "rms"};
    for (int e = 0; e < 3; ++e) t.rows.push_back({static_cast<double>(e), rep.max[e], rep.rms[e]});
    write_output(o.out, t.csv(), out);
  }
  err << "residual " << to_string(s.id) << ": max " << brief(worst) << (pass ? " < " : " >= ")
      << brief(threshold) << (pass ? " pass" : " FAIL") << "\n";
  return pass ? ok : verification_failure;
}

int cmd_commutators(const CLI::App* app, const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o);
  const std::string basis = o.family.empty() ? "Y" : o.family;
  GeneratorFamily fam;
  if (basis == "Y" || basis == "y") fam = GeneratorFamily::y_rsw;
  else if (basis == "Z" || basis == "z") fam = GeneratorFamily::z_sw;
  else throw UsageError("commutators --family must be Y or Z, got '" + basis + "'");
  const FlowParameters params = FlowParameters::make(given(app, "--f") ? o.f : 1.0, 1.0);
  FitOptions fit;
  fit.seed = o.seed;
  const StructureTable table = structure_constants(fam, params, fit);
  const char symbol = fam == GeneratorFamily::y_rsw ? 'Y' : 'Z';
  const bool matches = table.max_difference(reference_table()) <= fit.snap_tol;

  if (o.format == "json") {
    json j = header("commutators");
    j["basis"] = std::string(1, symbol);
    j["f"] = params.f;
    j["seed"] = o.seed;
    j["matches_paper_table"] = matches;
    j["fit_residual"] = table.fit_residual;
    json rows = json::array();
    for (int i = 0; i < 9; ++i) {
      json row = json::array();
      for (int k = 0; k < 9; ++k) row.push_back(table.entry(i, k, symbol));
      rows.push_back(std::move(row));
    }
    j["table"] = std::move(rows);
    write_output(o.out, j.dump(2) + "\n", out);
  } else {
    std::string s = "i,j,commutator\r\n";
    for (int i = 0; i < 9; ++i) {
      for (int k = 0; k < 9; ++k) {
        s += std::to_string(i + 1) + "," + std::to_string(k + 1) + "," + csv_quote(table.entry(i, k, symbol)) + "\r\n";
      }
    }
    write_output(o.out, s, out);
  }
  err << "commutators " << symbol << ": matches_paper_table=" << (matches ? "true" : "false") << "\n";
  return matches ? ok : verification_failure;
}

int cmd_map(const CLI::App* app, const Options& o, std::ostream& out, std::ostream& err) {
  check_format(o);
  const bool has_dir = !o.direction.empty();
  if (has_dir == o.transport) throw UsageError("map needs exactly one of --direction or --transport");
  if (o.transport && !given(app, "--alpha")) throw UsageError("--transport requires --alpha");
  if (o.transport) GroupAction::y9(o.alpha);
  const Setup s = setup(app, o);
  FlowField image;
  std::string what;
  if (o.transport) {
    if (s.field.system() != System::rsw) {
      throw Error(ErrorKind::invalid_params, "transport applies to rotating-frame families only");
    }
    image = transport_solution(s.field, o.alpha, s.params);
    what = "transport alpha=" + number(o.alpha);
  } else if (o.direction == "rsw2sw") {
    if (s.field.system() != System::rsw) {
      throw Error(ErrorKind::invalid_params, "family " + std::string(to_string(s.id)) + " is not a rotating-frame solution");
    }
    image = map_field_rsw_to_sw(s.field, s.params);
    what = "rsw2sw";
  } else if (o.direction == "sw2rsw") {
    if (s.field.system() != System::sw) {
      throw Error(ErrorKind::invalid_params, "family " + std::string(to_string(s.id)) + " is not a plain shallow-water solution");
    }
    image = map_field_sw_to_rsw(s.field, s.params);
    what = "sw2rsw";
  } else {
    throw UsageError("--direction must be rsw2sw or sw2rsw, got '" + o.direction + "'");
  }
  if (o.mode == "fd") image = image.with_mode(DerivativeMode::finite_difference, o.fd_step);

  const GridSpec grid = auto_grid(image, 5);
  Sampling smp = sampling_for(o, grid, grid.radial_fraction ? Frame::polar : image.frame());
  std::vector<Vec3> points;
  const Table table = sample_table(image, smp, &points);

  const FlowField view = smp.frame == Frame::polar ? image.as_polar() : image.as_cartesian();
  double worst = 0;
  for (const Vec3& p : points) {
    if (smp.frame == Frame::polar && !(p(1) > 0)) continue;
    const Vec3 v = smp.frame == Frame::polar ? residual_point_polar(view, p, s.params)
                                             : residual_point_cartesian(view, p, s.params);
    worst = std::max(worst, v.maxCoeff());
  }
  const double threshold = given(app, "--threshold") ? o.threshold : (o.mode == "fd" ? 1e-4 : 1e-6);
  const bool pass = worst < threshold;

  if (o.format == "csv") {
    write_output(o.out, table.csv(), out);
  } else {
    json j = header("map");
    j["family"] = std::string(to_string(s.id));
    j["parameters"] = params_json(s);
    j["map"] = what;
    j["system"] = to_string(image.system());
    j["frame"] = to_string(smp.frame);
    j["columns"] = table.columns;
    j["rows"] = table.rows_json();
    j["residual"] = {{"max", worst}, {"threshold", threshold}, {"pass", pass}};
    write_output(o.out, j.dump(2) + "\n", out);
  }
  err << "map " << what << " of " << to_string(s.id) << ": image residual " << brief(worst)
      << (pass ? " pass" : " FAIL") << "\n";
  return pass ? ok : verification_failure;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_params:
    case ErrorKind::no_ring_exists:
    case ErrorKind::unsupported_family:
    case ErrorKind::cfl_violation: return bad_arguments;
    case ErrorKind::window_violation:
    case ErrorKind::singular_time:
    case ErrorKind::origin_singular:
    case ErrorKind::left_domain:
    case ErrorKind::zero_depth: return window_violation;
    default: return verification_failure;
  }
}

void add_family_options(CLI::App* sub, Options& o) {
  sub->add_option("--family", o.family, "Solution family");
  sub->add_option("--param", o.params, "Family parameter name=value (repeatable)");
  sub->add_option("--f", o.f, "Coriolis parameter");
  sub->add_option("--g", o.g, "Gravity");
  sub->add_option("--h0", o.h0, "Reference depth");
  sub->add_option("--u0", o.u0, "Constant velocity u0");
  sub->add_option("--v0", o.v0, "Constant velocity v0");
  sub->add_option("--alpha", o.alpha, "Transport parameter alpha > 0");
  sub->add_option("--phi0", o.phi0, "Initial radial strain phi0");
  sub->add_option("--eta0", o.eta0, "Initial eta0 > 0");
  sub->add_option("--lambda0", o.lambda0, "Reference lambda0 > 0");
  sub->add_option("--branch", o.branch, "Ring branch: lower or upper");
  sub->add_option("--mode", o.mode, "Derivatives: analytic or fd");
  sub->add_option("--fd-step", o.fd_step, "Relative finite-difference step");
  sub->add_option("--corrupt-depth", o.corrupt, "Scale the depth by this factor (fault fixture)");
}

void add_output_options(CLI::App* sub, Options& o) {
  sub->add_option("--format", o.format, "csv or json");
  sub->add_option("--out", o.out, "Output path, - for stdout");
  sub->add_option("--seed", o.seed, "Seed for random sample points");
}

void add_grid_options(CLI::App* sub, Options& o) {
  sub->add_option("--t", o.t, "Times: comma list, items may be lo:hi:count");
  sub->add_option("--r", o.r, "Radius axis lo:hi:count or a value");
  sub->add_option("--theta", o.theta, "Angle axis lo:hi:count or a value");
  sub->add_option("--x", o.x, "x axis lo:hi:count or a value");
  sub->add_option("--y", o.y, "y axis lo:hi:count or a value");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rotating shallow water: exact solutions, symmetries and verification", "rsw"};
  app.require_subcommand(1);
  Options o;

  CLI::App* field = app.add_subcommand("field", "Sample a solution family on a grid");
  add_family_options(field, o);
  add_grid_options(field, o);
  add_output_options(field, o);

  CLI::App* traj = app.add_subcommand("trajectory", "Integrate particle paths");
  add_family_options(traj, o);
  add_output_options(traj, o);
  traj->add_option("--t", o.t, "Output times, strictly increasing");
  traj->add_option("--periods", o.periods, "Output 8 samples per period over this many periods");
  traj->add_option("--r0", o.r0, "Initial radii (comma list)");
  traj->add_option("--theta0", o.theta0, "Initial angle");

  CLI::App* res = app.add_subcommand("residual", "Residual of the governing equations");
  add_family_options(res, o);
  add_grid_options(res, o);
  add_output_options(res, o);
  res->add_option("--n", o.n, "Nodes per axis of the default grid");
  res->add_option("--threshold", o.threshold, "Pass threshold (1e-6 analytic, 1e-4 fd)");
  res->add_option("--random", o.random, "Extra random sample points");

  CLI::App* comm = app.add_subcommand("commutators", "Commutator table of the symmetry algebra");
  comm->add_option("--family", o.family, "Basis: Y (rotating) or Z (plain)");
  comm->add_option("--f", o.f, "Coriolis parameter");
  add_output_options(comm, o);

  CLI::App* map = app.add_subcommand("map", "Equivalence map or transport of a family");
  add_family_options(map, o);
  add_grid_options(map, o);
  add_output_options(map, o);
  map->add_option("--direction", o.direction, "rsw2sw or sw2rsw");
  map->add_flag("--transport", o.transport, "Transport by the finite Y9 action");
  map->add_option("--threshold", o.threshold, "Residual threshold for the image");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return ok;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return bad_arguments;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub == field) return cmd_field(sub, o, out, err);
    if (sub == traj) return cmd_trajectory(sub, o, out, err);
    if (sub == res) return cmd_residual(sub, o, out, err);
    if (sub == comm) return cmd_commutators(sub, o, out, err);
    return cmd_map(sub, o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return bad_arguments;
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return bad_arguments;
  }
}

}  // namespace rsw::cli
