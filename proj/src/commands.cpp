#include "crowdmeasure/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crowdmeasure/particles.hpp"
#include "crowdmeasure/transport.hpp"

namespace crowdmeasure {

namespace fs = std::filesystem;

ExperimentConfig apply_overrides(ExperimentConfig cfg, const CommandOptions& opts) {
  if (opts.out) cfg.outputs = *opts.out;
  if (opts.seed && cfg.initial.type == "uniform_random") cfg.initial.seed = opts.seed;
  return cfg;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

fs::path level_dir(const ExperimentConfig& cfg, int k) {
  return fs::path(cfg.outputs) / ("level_" + std::to_string(k));
}

GridMeasure initial_grid(const ExperimentConfig& cfg, const MeshLevel& level) {
  const auto x0 = initial_positions(cfg);
  return project_atomic(AtomicMeasure::uniform(cfg.model.dim, x0), GridSpec(cfg.model.dim, level.h));
}

SchemeOptions scheme_options(const ExperimentConfig& cfg, const CommandOptions& opts) {
  SchemeOptions o;
  o.threads = opts.threads;
  o.max_cells = cfg.max_cells;
  return o;
}

void check_step(std::size_t n, const StepReport& r) {
  if (r.mass_error > GridMeasure::kMassTolerance) {
    std::ostringstream os;
    os << "mass error " << r.mass_error << " at step " << n << " exceeds " << GridMeasure::kMassTolerance;
    throw InvariantViolation(os.str());
  }
}

// Feeds Lambda_t for ascending times t as frames stream past. Times beyond the
// last frame are clamped to it.
class TimeSampler {
 public:
  TimeSampler(std::vector<double> times, double dt) : times_(std::move(times)), dt_(dt) {
    std::sort(times_.begin(), times_.end());
  }

  template <class Fn>
  void on_frame(std::size_t n, const GridMeasure& frame, std::size_t last_n, Fn&& emit) {
    const double tn = static_cast<double>(n) * dt_;
    while (next_ < times_.size()) {
      const double t = times_[next_];
      if (n == last_n) {
        emit(t, between(frame, std::min(t, tn), tn));
      } else if (t < tn || (t == tn)) {
        emit(t, between(frame, t, tn));
      } else {
        break;
      }
      ++next_;
    }
    prev_ = frame;
  }

 private:
  GridMeasure between(const GridMeasure& frame, double t, double tn) const {
    if (!prev_ || t >= tn) return frame;
    const double theta = std::clamp(1.0 - (tn - t) / dt_, 0.0, 1.0);
    return interpolate(*prev_, frame, theta);
  }

  std::vector<double> times_;
  double dt_;
  std::size_t next_ = 0;
  std::optional<GridMeasure> prev_;
};

std::string time_tag(double t) { return "t" + format_double(t); }

}  // namespace

ParticlesOutput cmd_particles(const ExperimentConfig& base, const CommandOptions& opts) {
  const ExperimentConfig cfg = apply_overrides(base, opts);
  const VelocityModel model = build_model(cfg.model);
  const double dt = oracle_step(cfg);
  const auto traj = run_particles(cfg.model.dim, initial_positions(cfg), model, cfg.T, dt);

  ParticlesOutput out;
  out.steps = traj.states.size() - 1;
  out.trajectory_csv = fs::path(cfg.outputs) / "particles.csv";
  out.final_json = fs::path(cfg.outputs) / "particles_final.json";
  {
    auto f = open_out(out.trajectory_csv);
    write_particle_csv(f, traj);
  }
  auto f = open_out(out.final_json);
  f << atomic_to_json(to_measure(traj.states.back())) << "\n";
  return out;
}

SimulateOutput cmd_simulate(const ExperimentConfig& base, std::optional<int> level,
                            const CommandOptions& opts) {
  const ExperimentConfig cfg = apply_overrides(base, opts);
  const VelocityModel model = build_model(cfg.model);
  SimulateOutput out;
  out.level = resolve_level(cfg, level);
  const fs::path dir = level_dir(cfg, out.level.k);
  out.steps_jsonl = dir / "steps.jsonl";
  auto steps = open_out(out.steps_jsonl);

  out.steps = step_count(cfg.T, out.level.dt);
  TimeSampler sampler(snapshot_times(cfg), out.level.dt);
  run_streaming(initial_grid(cfg, out.level), model, cfg.T, out.level.dt, scheme_options(cfg, opts),
                [&](std::size_t n, const GridMeasure& frame, const StepReport* report) {
                  if (report) {
                    check_step(n, *report);
                    out.max_mass_error = std::max(out.max_mass_error, report->mass_error);
                    steps << step_report_json(n, *report) << "\n";
                  }
                  sampler.on_frame(n, frame, out.steps, [&](double t, const GridMeasure& snap) {
                    snap.validate();
                    const fs::path path = dir / ("density_" + time_tag(t) + ".csv");
                    auto f = open_out(path);
                    write_density_csv(f, snap);
                    out.snapshots.push_back(path);
                  });
                });
  return out;
}

ConvergeOutput cmd_converge(const ExperimentConfig& base, const CommandOptions& opts) {
  const ExperimentConfig cfg = apply_overrides(base, opts);
  const VelocityModel model = build_model(cfg.model);
  const MeshSchedule schedule = resolve_schedule(cfg);
  auto times = sample_times(cfg);
  std::sort(times.begin(), times.end());

  // Oracle once, on a step that divides T.
  const double odt = oracle_step(cfg);
  const auto x0 = initial_positions(cfg);
  const auto oracle = run_particles(cfg.model.dim, x0, model, cfg.T, odt);
  auto oracle_at = [&](double t) {
    const auto idx = static_cast<std::size_t>(std::lround(t / odt));
    return to_measure(oracle.states[std::min(idx, oracle.states.size() - 1)]);
  };

  ConvergeOutput out;
  for (const auto& level : schedule.levels) {
    const std::size_t n_steps = step_count(cfg.T, level.dt);
    TimeSampler sampler(times, level.dt);
    std::vector<MetricsRow> rows;
    run_streaming(initial_grid(cfg, level), model, cfg.T, level.dt, scheme_options(cfg, opts),
                  [&](std::size_t n, const GridMeasure& frame, const StepReport* report) {
                    if (report) check_step(n, *report);
                    sampler.on_frame(n, frame, n_steps, [&](double t, const GridMeasure& lam) {
                      const W1Result w = w1_grid_atomic(lam, oracle_at(t));
                      rows.push_back({level.k, level.h, level.dt, t, w.distance, w.atomization_bound});
                    });
                  });
    out.final_upper.push_back(rows.back().w1 + rows.back().atomization_bound);
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }
  if (out.final_upper.size() > 1) {
    bool ok = true;
    for (std::size_t k = 1; k < out.final_upper.size(); ++k) ok = ok && out.final_upper[k] < out.final_upper[k - 1];
    out.monotone = ok;
  }

  out.metrics_csv = fs::path(cfg.outputs) / "metrics.csv";
  {
    auto f = open_out(out.metrics_csv);
    write_metrics_csv(f, out.rows);
  }
  nlohmann::json summary = {
      {"criterion", "w1 + atomization_bound strictly decreasing in k at the last sample time"},
      {"t", times.back()},
      {"oracle_dt", odt},
      {"levels", nlohmann::json::array()},
  };
  for (std::size_t k = 0; k < schedule.levels.size(); ++k) {
    summary["levels"].push_back({{"k", schedule.levels[k].k},
                                 {"h", schedule.levels[k].h},
                                 {"dt", schedule.levels[k].dt},
                                 {"w1_upper", out.final_upper[k]}});
  }
  summary["verdict"] = out.monotone ? (*out.monotone ? "pass" : "fail") : "not_applicable";
  out.summary_json = fs::path(cfg.outputs) / "summary.json";
  auto f = open_out(out.summary_json);
  f << summary.dump(2) << "\n";
  return out;
}

ProjectOutput cmd_project(const ExperimentConfig& base, std::optional<int> level,
                          const CommandOptions& opts) {
  const ExperimentConfig cfg = apply_overrides(base, opts);
  ProjectOutput out;
  out.level = resolve_level(cfg, level);
  const auto mu = AtomicMeasure::uniform(cfg.model.dim, initial_positions(cfg));
  const GridMeasure lambda = project_atomic(mu, GridSpec(cfg.model.dim, out.level.h));
  lambda.validate();
  out.projection_error = w1_grid_atomic(lambda, mu);
  out.density_csv = level_dir(cfg, out.level.k) / "density_t0.csv";
  auto f = open_out(out.density_csv);
  write_density_csv(f, lambda);
  return out;
}

}  // namespace crowdmeasure
