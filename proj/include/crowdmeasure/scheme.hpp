#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "crowdmeasure/grid_measure.hpp"
#include "crowdmeasure/velocity.hpp"

namespace crowdmeasure {

struct MeshLevel {
  int k = 0;
  double h = 0.0;
  double dt = 0.0;

  /// h / dt, which must vanish under refinement.
  double beta() const { return h / dt; }
};

struct MeshSchedule {
  std::vector<MeshLevel> levels;
  double delta = 0.9;
  double v_ref = 1.0;
};

/// h_k = 1/k, dt_k = (h_k / v_ref)^delta for each k. Requires 0 < delta < 1
/// and strictly increasing positive ks.
MeshSchedule mesh_schedule(double v_ref, double delta, const std::vector<int>& ks);

struct StepReport {
  double mass_error = 0.0;
  double max_displacement = 0.0;
  double cfl_alpha = 0.0;
  std::size_t occupied_cells = 0;
};

struct CflReport {
  double alpha = 0.0;
  /// Cells one source cell can scatter into, 2^d.
  std::size_t scatter_targets = 0;
  /// ceil(alpha)^d, cells within one step's reach per axis product.
  double reach_cells = 0.0;
};

CflReport cfl_ratio(const VelocityModel& model, double dt, double h);

struct CellFraction {
  CellIndex index;
  double fraction = 0.0;
};

/// Per-axis displacements within this many cells of an integer are snapped to it.
inline constexpr double kIntegerSnap = 1e-12;

/// Share of E_j + w landing in each target cell (at most 2^d, all positive,
/// summing to one).
std::vector<CellFraction> box_overlap_fractions(const GridSpec& spec, const CellIndex& j,
                                                const Point& w);

struct SchemeOptions {
  /// Worker threads for velocity sampling; results do not depend on it.
  int threads = 1;
  /// Abort when the support grows beyond this many cells.
  std::size_t max_cells = 10'000'000;
};

/// One explicit push-forward step.
std::pair<GridMeasure, StepReport> step(const GridMeasure& lambda, const VelocityModel& model,
                                        double dt, const SchemeOptions& options = {});

struct RunResult {
  GridTrajectory trajectory;
  std::vector<StepReport> reports;
};

/// Number of steps round(T / dt); at least one.
std::size_t step_count(double T, double dt);

RunResult run(const GridMeasure& lambda0, const VelocityModel& model, double T, double dt,
              const SchemeOptions& options = {});

/// Streaming variant: calls `on_frame(n, frame, report)` for every frame
/// (report is empty for n = 0) without keeping the trajectory.
void run_streaming(const GridMeasure& lambda0, const VelocityModel& model, double T, double dt,
                   const SchemeOptions& options,
                   const std::function<void(std::size_t, const GridMeasure&, const StepReport*)>& on_frame);

/// Lambda_t, the linear-in-time interpolation between bracketing frames.
GridMeasure sample_at(const GridTrajectory& traj, double t);

}  // namespace crowdmeasure
