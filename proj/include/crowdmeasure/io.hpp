#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "crowdmeasure/grid_measure.hpp"
#include "crowdmeasure/particles.hpp"
#include "crowdmeasure/scheme.hpp"

namespace crowdmeasure {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// `index_0,...,index_{d-1},center_0,...,center_{d-1},rho`, one row per
/// occupied cell in index order.
void write_density_csv(std::ostream& out, const GridMeasure& lambda);
GridMeasure read_density_csv(std::istream& in, double cell_width);

/// `[{"x": [...], "w": ...}, ...]`
std::string atomic_to_json(const AtomicMeasure& mu);
AtomicMeasure atomic_from_json(const std::string& text);

/// `t,particle,x_0,...,x_{d-1}`, rows sorted by (t, particle).
void write_particle_csv(std::ostream& out, const ParticleTrajectory& traj);

struct MetricsRow {
  int k = 0;
  double h = 0.0;
  double dt = 0.0;
  double t = 0.0;
  double w1 = 0.0;
  double atomization_bound = 0.0;
};

/// `k,h,dt,t,w1,atomization_bound`
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

/// `{"n":..., "mass_error":..., "alpha":..., "occupied":...}` without newline.
std::string step_report_json(std::size_t n, const StepReport& report);

}  // namespace crowdmeasure
