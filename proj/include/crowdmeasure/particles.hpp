#pragma once

#include <functional>
#include <vector>

#include "crowdmeasure/grid_measure.hpp"
#include "crowdmeasure/velocity.hpp"

namespace crowdmeasure {

struct ParticleState {
  int dim = 1;
  std::vector<Point> positions;
  double t = 0.0;
};

struct ParticleTrajectory {
  double dt = 0.0;
  std::vector<ParticleState> states;
};

/// (1/N) sum_l delta_{x_l}, coincident particles stacked into one atom.
AtomicMeasure to_measure(const ParticleState& state);

/// Atoms of f#mu: each atom moved by f, weights unchanged.
AtomicMeasure push_forward(const AtomicMeasure& mu, const std::function<Point(const Point&)>& f);

/// Synchronous explicit Euler step x_l += dt v[mu](x_l), with mu the empirical
/// measure of the pre-step positions.
ParticleState euler_step(const ParticleState& state, const VelocityModel& model, double dt);

/// round(T / dt) Euler steps from x0.
ParticleTrajectory run_particles(int dim, const std::vector<Point>& x0, const VelocityModel& model,
                                 double T, double dt);

/// Smallest distance between two particles (infinity for a single particle).
double min_pairwise_gap(const ParticleState& state);

}  // namespace crowdmeasure
