#include "crowdmeasure/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace crowdmeasure {

MeshSchedule mesh_schedule(double v_ref, double delta, const std::vector<int>& ks) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ValidationError("schedule exponent delta must lie in (0, 1) so that h = o(dt)");
  }
  if (!(v_ref > 0.0) || !std::isfinite(v_ref)) {
    throw ValidationError("schedule reference speed must be positive");
  }
  if (ks.empty()) throw ValidationError("schedule needs at least one level");
  MeshSchedule s;
  s.delta = delta;
  s.v_ref = v_ref;
  int prev = 0;
  for (int k : ks) {
    if (k <= prev) throw ValidationError("schedule levels must be positive and strictly increasing");
    prev = k;
    const double h = 1.0 / static_cast<double>(k);
    s.levels.push_back({k, h, std::pow(h / v_ref, delta)});
  }
  return s;
}

CflReport cfl_ratio(const VelocityModel& model, double dt, double h) {
  if (!(dt > 0.0) || !(h > 0.0)) throw ValidationError("cfl_ratio needs positive dt and h");
  CflReport r;
  r.alpha = velocity_bound(model) * dt / h;
  r.scatter_targets = std::size_t{1} << model.dim();
  r.reach_cells = std::pow(std::ceil(r.alpha), model.dim());
  return r;
}

std::vector<CellFraction> box_overlap_fractions(const GridSpec& spec, const CellIndex& j,
                                                const Point& w) {
  const int dim = spec.dim();
  // Per axis the shifted interval [j - 1/2, j + 1/2) + s straddles cells
  // j + m and j + m + 1, with s = m + f, 0 <= f < 1.
  std::array<std::int64_t, kMaxDim> base{};
  std::array<double, kMaxDim> upper{};
  for (int l = 0; l < dim; ++l) {
    if (!std::isfinite(w[l])) throw ValidationError("non-finite displacement");
    double s = w[l] / spec.cell_width();
    // Displacements a rounding error away from a whole number of cells would
    // otherwise leave slivers of mass in a neighboring cell.
    if (const double r = std::round(s); std::abs(s - r) <= kIntegerSnap * std::max(1.0, std::abs(r))) s = r;
    const double m = std::floor(s);
    base[l] = j[l] + static_cast<std::int64_t>(m);
    upper[l] = s - m;
  }
  std::vector<CellFraction> out;
  out.reserve(std::size_t{1} << dim);
  for (int code = 0; code < (1 << dim); ++code) {
    CellFraction cf;
    cf.fraction = 1.0;
    for (int l = 0; l < dim; ++l) {
      const bool up = (code >> l) & 1;
      cf.index[l] = base[l] + (up ? 1 : 0);
      cf.fraction *= up ? upper[l] : 1.0 - upper[l];
    }
    if (cf.fraction > 0.0) out.push_back(cf);
  }
  std::sort(out.begin(), out.end(),
            [](const CellFraction& a, const CellFraction& b) { return a.index < b.index; });
  return out;
}

namespace {

template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t k = lo; k < hi; ++k) fn(k);
    });
  }
}

}  // namespace

std::pair<GridMeasure, StepReport> step(const GridMeasure& lambda, const VelocityModel& model,
                                        double dt, const SchemeOptions& options) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  if (lambda.spec().dim() != model.dim()) throw ValidationError("measure and model dimensions differ");
  const GridSpec& spec = lambda.spec();
  const auto cells = lambda.cells();

  std::vector<Point> shift(cells.size());
  {
    const GridVelocitySampler sampler(model, lambda);
    parallel_for(cells.size(), options.threads, [&](std::size_t k) {
      shift[k] = dt * sampler(cell_center(spec, cells[k].index));
    });
  }

  StepReport report;
  std::vector<GridCell> scattered;
  scattered.reserve(cells.size() * 2);
  // Sources in sorted order; the stable sort below keeps that order within
  // each target, so every target sum is reduced deterministically.
  for (std::size_t k = 0; k < cells.size(); ++k) {
    report.max_displacement = std::max(report.max_displacement, norm(shift[k]));
    for (const auto& cf : box_overlap_fractions(spec, cells[k].index, shift[k])) {
      scattered.push_back({cf.index, cells[k].rho * cf.fraction});
    }
  }
  std::stable_sort(scattered.begin(), scattered.end(),
                   [](const GridCell& a, const GridCell& b) { return a.index < b.index; });
  std::vector<GridCell> merged;
  merged.reserve(scattered.size());
  for (const auto& c : scattered) {
    if (!merged.empty() && merged.back().index == c.index) {
      merged.back().rho += c.rho;
    } else {
      merged.push_back(c);
    }
  }
  std::erase_if(merged, [](const GridCell& c) { return c.rho == 0.0; });
  if (merged.size() > options.max_cells) {
    std::ostringstream os;
    os << "support grew to " << merged.size() << " cells, above the limit of " << options.max_cells;
    throw InvariantViolation(os.str());
  }

  GridMeasure next = GridMeasure::from_sorted(spec, std::move(merged));
  report.mass_error = std::abs(total_mass(next) - 1.0);
  report.cfl_alpha = velocity_bound(model) * dt / spec.cell_width();
  report.occupied_cells = next.occupied();
  return {std::move(next), report};
}

std::size_t step_count(double T, double dt) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ValidationError("time horizon T must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");
  const double n = std::round(T / dt);
  return static_cast<std::size_t>(std::max(1.0, n));
}

void run_streaming(const GridMeasure& lambda0, const VelocityModel& model, double T, double dt,
                   const SchemeOptions& options,
                   const std::function<void(std::size_t, const GridMeasure&, const StepReport*)>& on_frame) {
  const std::size_t steps = step_count(T, dt);
  lambda0.validate();
  on_frame(0, lambda0, nullptr);
  GridMeasure current = lambda0;
  for (std::size_t n = 1; n <= steps; ++n) {
    auto [next, report] = step(current, model, dt, options);
    on_frame(n, next, &report);
    current = std::move(next);
  }
}

RunResult run(const GridMeasure& lambda0, const VelocityModel& model, double T, double dt,
              const SchemeOptions& options) {
  RunResult out{GridTrajectory{lambda0.spec(), dt, {}}, {}};
  out.trajectory.frames.reserve(step_count(T, dt) + 1);
  run_streaming(lambda0, model, T, dt, options,
                [&](std::size_t, const GridMeasure& frame, const StepReport* report) {
                  out.trajectory.frames.push_back(frame);
                  if (report) out.reports.push_back(*report);
                });
  return out;
}

GridMeasure sample_at(const GridTrajectory& traj, double t) {
  if (traj.frames.empty()) throw ValidationError("empty trajectory");
  const double T = traj.final_time();
  const double slack = 1e-12 * std::max(1.0, T);
  if (!(t >= -slack && t <= T + slack)) {
    std::ostringstream os;
    os << "sample time " << t << " outside [0, " << T << "]";
    throw ValidationError(os.str());
  }
  if (traj.frames.size() == 1) return traj.frames.front();
  const std::size_t last = traj.frames.size() - 2;
  std::size_t n = t <= 0.0 ? 0 : static_cast<std::size_t>(std::floor(t / traj.dt));
  n = std::min(n, last);
  double theta = (t - static_cast<double>(n) * traj.dt) / traj.dt;
  if (std::abs(theta) < 1e-12) theta = 0.0;
  if (std::abs(theta - 1.0) < 1e-12) theta = 1.0;
  theta = std::clamp(theta, 0.0, 1.0);
  return interpolate(traj.frames[n], traj.frames[n + 1], theta);
}

}  // namespace crowdmeasure
