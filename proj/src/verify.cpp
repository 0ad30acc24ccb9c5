#include "rsw/verify.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <sstream>
#include <thread>

namespace rsw {
namespace {

std::string describe(const Vec3& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << p(0) << ", " << p(1) << ", " << p(2) << ")";
  return os.str();
}

template <std::size_t N>
double normalized(const std::array<double, N>& terms) {
  double sum = 0;
  double scale = 1.0;
  for (double x : terms) {
    sum += x;
    scale = std::max(scale, std::abs(x));
  }
  return std::abs(sum) / scale;
}

// Runs fn(i) for i in [0, n) on the worker pool; rethrows the exception of the
// lowest failing index so failures are reproducible.
template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::size_t> failed_at(workers, n);
  auto body = [&](unsigned w) {
    for (std::size_t i = w; i < n; i += workers) {
      try {
        fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        failed_at[w] = i;
        return;
      }
    }
  };
  if (workers <= 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& th : pool) th.join();
  }
  const auto first = std::min_element(failed_at.begin(), failed_at.end());
  if (*first < n) std::rethrow_exception(errors[first - failed_at.begin()]);
}

ResidualReport sweep(const FlowField& field, const GridSpec& grid, const FlowParameters& params,
                     Frame frame) {
  const std::size_t n = grid.size();
  std::vector<Vec3> values(n);
  std::vector<Vec3> points(n);
  parallel_for(n, [&](std::size_t i) {
    const Vec3 p = grid.point(i, field.domain());
    if (!field.contains(p)) {
      throw Error(ErrorKind::window_violation,
                  "sample point " + describe(p) + " outside the validity window of " + field.name());
    }
    points[i] = p;
    values[i] = frame == Frame::polar ? residual_point_polar(field, p, params)
                                      : residual_point_cartesian(field, p, params);
  });
  ResidualReport rep;
  rep.samples = n;
  rep.frame = frame;
  rep.mode = field.mode();
  rep.fd_step = field.mode() == DerivativeMode::finite_difference ? field.fd_step() : 0.0;
  std::array<double, 3> sq{};
  double worst = -1;
  for (std::size_t i = 0; i < n; ++i) {
    for (int e = 0; e < 3; ++e) {
      const double v = values[i](e);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::window_violation, "non-finite residual at " + describe(points[i]));
      }
      rep.max[e] = std::max(rep.max[e], v);
      sq[e] += v * v;
      if (v > worst) {
        worst = v;
        rep.worst_equation = e;
        rep.worst_point = points[i];
      }
    }
  }
  for (int e = 0; e < 3; ++e) rep.rms[e] = n ? std::sqrt(sq[e] / n) : 0.0;
  return rep;
}

}  // namespace

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RSW_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

Vec3 residual_point_cartesian(const FlowField& field, const Vec3& p, const FlowParameters& params) {
  const FieldSample s = field.sample(p);
  const double f = coriolis(field, params);
  const double g = params.g;
  const double u = s.value(0), v = s.value(1), h = s.value(2);
  const Mat3& d = s.grad;  // rows (u, v, h), columns (t, x, y)
  return {normalized<5>({d(0, 0), u * d(0, 1), v * d(0, 2), -f * v, g * d(2, 1)}),
          normalized<5>({d(1, 0), u * d(1, 1), v * d(1, 2), f * u, g * d(2, 2)}),
          normalized<5>({d(2, 0), h * d(0, 1), u * d(2, 1), h * d(1, 2), v * d(2, 2)})};
}

Vec3 residual_point_polar(const FlowField& field, const Vec3& p, const FlowParameters& params) {
  const double r = p(1);
  if (!(r > 0)) throw Error(ErrorKind::origin_singular, "polar residual needs r > 0");
  const FieldSample s = field.sample(p);
  const double f = coriolis(field, params);
  const double g = params.g;
  const double U = s.value(0), V = s.value(1), h = s.value(2);
  const Mat3& d = s.grad;  // rows (U, V, h), columns (t, r, theta)
  return {normalized<6>({d(0, 0), U * d(0, 1), V / r * d(0, 2), -V * V / r, -f * V, g * d(2, 1)}),
          normalized<6>({d(1, 0), U * d(1, 1), V / r * d(1, 2), U * V / r, f * U, g / r * d(2, 2)}),
          normalized<6>({d(2, 0), U * h / r, d(0, 1) * h, U * d(2, 1), d(1, 2) * h / r,
                         V * d(2, 2) / r})};
}

ResidualReport residual_cartesian(const FlowField& field, const GridSpec& grid,
                                  const FlowParameters& params) {
  GridSpec plain = grid;
  plain.radial_fraction = false;
  return sweep(field.as_cartesian(), plain, params, Frame::cartesian);
}

ResidualReport residual_polar(const FlowField& field, const GridSpec& grid,
                              const FlowParameters& params) {
  return sweep(field.as_polar(), grid, params, Frame::polar);
}

ResidualReport residual(const FlowField& field, const GridSpec& grid, const FlowParameters& params) {
  return field.frame() == Frame::polar ? residual_polar(field, grid, params)
                                       : residual_cartesian(field, grid, params);
}

std::vector<double> special_times(double t0, double t1, const FlowParameters& params) {
  std::vector<double> out;
  const double f = params.f;
  for (long n = static_cast<long>(std::ceil((f * t0 / kPi - 1) / 2)); (2 * n + 1) * kPi / f <= t1;
       ++n) {
    const double t = (2 * n + 1) * kPi / f;
    if (t >= t0) out.push_back(t);
  }
  return out;
}

Trajectory integrate_trajectory(const FlowField& field, double r0, double theta0, double t0,
                                double t1, const TrajectoryOptions& opts) {
  if (!(t1 >= t0)) throw Error(ErrorKind::invalid_params, "trajectory needs t1 >= t0");
  Trajectory out;
  out.r0 = r0;
  out.theta0 = theta0;

  std::vector<double> stops = opts.output_times;
  for (double e : opts.events) {
    if (e > t0 && e < t1) stops.push_back(e);
  }
  stops.push_back(t1);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  const auto is_output = [&](double t) {
    return opts.output_times.empty() ||
           std::find(opts.output_times.begin(), opts.output_times.end(), t) !=
               opts.output_times.end();
  };

  if (r0 < opts.r_floor) {
    // Only a stagnation point at the origin can be followed.
    const Vec3 vel = field.as_cartesian().eval(Vec3(t0, 0.0, 0.0));
    if (std::hypot(vel(0), vel(1)) != 0.0) {
      throw Error(ErrorKind::left_domain, "particle starts at the origin in a moving flow");
    }
    if (is_output(t0)) out.points.push_back({t0, r0, theta0});
    for (double s : stops) {
      if (s > t0 && is_output(s)) out.points.push_back({s, r0, theta0});
    }
    return out;
  }

  const FlowField polar = field.as_polar();
  using Y = Eigen::Vector2d;
  auto rhs = [&](double t, const Y& y) -> Y {
    if (!(y(0) > opts.r_floor)) throw Error(ErrorKind::left_domain, "particle reached r_floor");
    const Vec3 q(t, y(0), y(1));
    if (!polar.contains(q)) {
      throw Error(ErrorKind::left_domain, "particle left the domain at " + describe(q));
    }
    const Vec3 s = polar.eval(q);
    return Y(s(0), s(1) / y(0));
  };
  auto rk4 = [&](double t, const Y& y, double h) -> Y {
    const Y k1 = rhs(t, y);
    const Y k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    const Y k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    const Y k4 = rhs(t + h, y + h * k3);
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  };

  Y y(r0, theta0);
  rhs(t0, y);  // validates the start point
  double t = t0;
  if (is_output(t0)) out.points.push_back({t0, r0, theta0});
  double h = std::min(opts.initial_step, std::max(t1 - t0, opts.min_step));
  std::size_t next = 0;
  while (next < stops.size() && stops[next] <= t0) ++next;
  while (next < stops.size()) {
    if (out.steps + out.rejected > opts.max_steps) {
      throw Error(ErrorKind::blow_up, "trajectory step budget exhausted");
    }
    const double stop = stops[next];
    const bool lands = t + h >= stop;
    const double step = lands ? stop - t : h;
    Y full, fine;
    bool ok = true;
    try {
      full = rk4(t, y, step);
      const Y half = rk4(t, y, 0.5 * step);
      fine = rk4(t + 0.5 * step, half, 0.5 * step);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::left_domain && e.kind() != ErrorKind::window_violation &&
          e.kind() != ErrorKind::zero_depth) {
        throw;
      }
      ok = false;
      if (0.5 * step < opts.min_step) {
        if (!opts.truncate_on_exit) throw Error(ErrorKind::left_domain, e.what());
        out.exited = true;
        break;
      }
    }
    if (!ok) {
      h = 0.5 * step;
      ++out.rejected;
      continue;
    }
    const double err =
        (fine - full).cwiseAbs().maxCoeff() / 15.0 / (opts.tol * std::max(1.0, y.cwiseAbs().maxCoeff()));
    if (err <= 1.0) {
      y = fine + (fine - full) / 15.0;
      t = lands ? stop : t + step;
      ++out.steps;
      if (lands) {
        if (is_output(stop)) out.points.push_back({t, y(0), y(1)});
        ++next;
      } else if (opts.output_times.empty()) {
        out.points.push_back({t, y(0), y(1)});
      }
      const double grow = err > 0 ? 0.9 * std::pow(err, -0.2) : 4.0;
      h = std::max(h, step) * std::clamp(grow, 0.2, 4.0);
    } else {
      ++out.rejected;
      h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      if (h < opts.min_step) {
        throw Error(ErrorKind::blow_up, "trajectory step underflow at t = " + std::to_string(t));
      }
    }
  }
  return out;
}

MaterialCurve evolve_material_curve(const FlowField& field, double cx, double cy, double radius,
                                    int markers, const std::vector<double>& times,
                                    const TrajectoryOptions& opts) {
  if (times.empty()) throw Error(ErrorKind::invalid_params, "material curve needs sample times");
  const int n = radius > 0 ? std::max(markers, 1) : 1;
  MaterialCurve out;
  out.times = times;
  out.particles.resize(n);
  TrajectoryOptions o = opts;
  o.output_times = times;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
    const double a = 2 * kPi * static_cast<double>(k) / n;
    const double x = cx + radius * std::cos(a);
    const double y = cy + radius * std::sin(a);
    out.particles[k] = integrate_trajectory(field, std::hypot(x, y), std::atan2(y, x),
                                            times.front(), times.back(), o);
  });
  for (std::size_t i = 0; i < times.size(); ++i) {
    double length = 0;
    double spacing = n > 1 ? std::numeric_limits<double>::infinity() : 0.0;
    for (int k = 0; k < n && n > 1; ++k) {
      const PolarPoint& a = out.particles[k].points[i];
      const PolarPoint& b = out.particles[(k + 1) % n].points[i];
      const double d = std::hypot(a.r * std::cos(a.theta) - b.r * std::cos(b.theta),
                                  a.r * std::sin(a.theta) - b.r * std::sin(b.theta));
      length += d;
      spacing = std::min(spacing, d);
    }
    out.length.push_back(length);
    out.min_spacing.push_back(spacing);
  }
  return out;
}

double potential_vorticity_drift(const FlowField& field, const Trajectory& path,
                                 const FlowParameters& params) {
  if (path.points.empty()) return 0.0;
  const FlowField polar = field.as_polar();
  auto at = [&](const PolarPoint& p) { return Vec3(p.t, p.r, p.theta); };
  const Vec3 p0 = at(path.points.front());
  const double omega0 = potential_vorticity(polar, p0, params);
  const double scale =
      std::max({std::abs(omega0), coriolis(field, params) / polar.eval(p0)(2), 1e-300});
  double drift = 0;
  for (const PolarPoint& p : path.points) {
    drift = std::max(drift, std::abs(potential_vorticity(polar, at(p), params) - omega0) / scale);
  }
  return drift;
}

double FvResult::min_rate() const {
  return rates.empty() ? 0.0 : *std::min_element(rates.begin(), rates.end());
}

namespace {

struct Cell {
  double h = 0, hu = 0, hv = 0;
};

FvRun fv_run(const FlowField& exact, const FlowParameters& params, const FvConfig& cfg, int n) {
  const double L = cfg.half_width;
  const double dx = 2 * L / n;
  const double g = params.g;
  const double f = coriolis(exact, params);
  const int m = n + 2;
  auto center = [&](int i) { return -L + (i - 0.5) * dx; };  // i in [0, n+1], ghosts at 0 and n+1
  auto at = [&](int i, int j) -> std::size_t { return static_cast<std::size_t>(j) * m + i; };
  auto exact_cell = [&](double t, int i, int j) {
    const Vec3 s = exact.eval(Vec3(t, center(i), center(j)));
    return Cell{s(2), s(2) * s(0), s(2) * s(1)};
  };

  std::vector<Cell> q(static_cast<std::size_t>(m) * m), next(q.size());
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) q[at(i, j)] = exact_cell(cfg.t0, i, j);
  }
  auto fill_ghosts = [&](double t) {
    for (int k = 0; k < m; ++k) {
      q[at(0, k)] = exact_cell(t, 0, k);
      q[at(m - 1, k)] = exact_cell(t, m - 1, k);
      q[at(k, 0)] = exact_cell(t, k, 0);
      q[at(k, m - 1)] = exact_cell(t, k, m - 1);
    }
  };
  auto speed = [&](const Cell& c) {
    const double a = std::sqrt(g * c.h);
    return std::max(std::abs(c.hu / c.h), std::abs(c.hv / c.h)) + a;
  };
  // Rusanov flux across an interface; dir 0 is x, 1 is y.
  auto flux = [&](const Cell& a, const Cell& b, int dir) {
    auto phys = [&](const Cell& c) {
      const double u = c.hu / c.h, v = c.hv / c.h, p = 0.5 * g * c.h * c.h;
      return dir == 0 ? Cell{c.hu, c.hu * u + p, c.hu * v} : Cell{c.hv, c.hv * u, c.hv * v + p};
    };
    const Cell fa = phys(a), fb = phys(b);
    const double ua = (dir == 0 ? a.hu : a.hv) / a.h;
    const double ub = (dir == 0 ? b.hu : b.hv) / b.h;
    const double s = std::max(std::abs(ua) + std::sqrt(g * a.h), std::abs(ub) + std::sqrt(g * b.h));
    return Cell{0.5 * (fa.h + fb.h) - 0.5 * s * (b.h - a.h),
                0.5 * (fa.hu + fb.hu) - 0.5 * s * (b.hu - a.hu),
                0.5 * (fa.hv + fb.hv) - 0.5 * s * (b.hv - a.hv)};
  };

  FvRun run;
  run.cells = n;
  double t = cfg.t0;
  while (t < cfg.t1) {
    fill_ghosts(t);
    double smax = 0;
    for (const Cell& c : q) {
      if (!(c.h > 0)) throw Error(ErrorKind::negative_depth, "finite-volume depth became non-positive");
      smax = std::max(smax, speed(c));
    }
    double dt = cfg.dt ? *cfg.dt : cfg.cfl * dx / smax;
    if (dt * smax / dx > 0.5) {
      throw Error(ErrorKind::cfl_violation,
                  "time step " + std::to_string(dt) + " exceeds the CFL limit " + std::to_string(0.5 * dx / smax));
    }
    dt = std::min(dt, cfg.t1 - t);
    const double k = dt / dx;
    for (int j = 1; j <= n; ++j) {
      for (int i = 1; i <= n; ++i) {
        const Cell& c = q[at(i, j)];
        const Cell fe = flux(c, q[at(i + 1, j)], 0);
        const Cell fw = flux(q[at(i - 1, j)], c, 0);
        const Cell fn = flux(c, q[at(i, j + 1)], 1);
        const Cell fs = flux(q[at(i, j - 1)], c, 1);
        Cell& o = next[at(i, j)];
        o.h = c.h - k * (fe.h - fw.h + fn.h - fs.h);
        o.hu = c.hu - k * (fe.hu - fw.hu + fn.hu - fs.hu) + dt * f * c.hv;
        o.hv = c.hv - k * (fe.hv - fw.hv + fn.hv - fs.hv) - dt * f * c.hu;
      }
    }
    for (int j = 1; j <= n; ++j) {
      for (int i = 1; i <= n; ++i) q[at(i, j)] = next[at(i, j)];
    }
    t += dt;
    ++run.steps;
  }
  const double rmask = cfg.mask_radius ? cfg.mask_radius(cfg.t1) : std::numeric_limits<double>::infinity();
  for (int j = 1; j <= n; ++j) {
    for (int i = 1; i <= n; ++i) {
      if (std::hypot(center(i), center(j)) > rmask) continue;
      const Cell e = exact_cell(cfg.t1, i, j);
      if (e.h < cfg.mask_depth) continue;
      run.l1_error += std::abs(q[at(i, j)].h - e.h) * dx * dx;
    }
  }
  return run;
}

}  // namespace

FvResult fv_oracle(const FlowField& exact, const FlowParameters& params, const FvConfig& cfg) {
  params.validate();
  if (cfg.meshes.empty()) throw Error(ErrorKind::invalid_params, "no meshes given");
  if (!(cfg.t1 > cfg.t0)) throw Error(ErrorKind::invalid_params, "finite volumes need t1 > t0");
  const FlowField cart = exact.as_cartesian();
  FvResult out;
  for (int n : cfg.meshes) {
    if (n < 2) throw Error(ErrorKind::invalid_params, "mesh needs at least 2 cells per side");
    out.runs.push_back(fv_run(cart, params, cfg, n));
  }
  for (std::size_t k = 0; k + 1 < out.runs.size(); ++k) {
    const FvRun& a = out.runs[k];
    const FvRun& b = out.runs[k + 1];
    out.rates.push_back(std::log(a.l1_error / b.l1_error) /
                        std::log(static_cast<double>(b.cells) / a.cells));
  }
  return out;
}

}  // namespace rsw
