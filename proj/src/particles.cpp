#include "crowdmeasure/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crowdmeasure/scheme.hpp"

namespace crowdmeasure {

AtomicMeasure to_measure(const ParticleState& state) {
  return AtomicMeasure::uniform(state.dim, state.positions).canonical();
}

AtomicMeasure push_forward(const AtomicMeasure& mu, const std::function<Point(const Point&)>& f) {
  std::vector<Atom> moved;
  moved.reserve(mu.size());
  for (const auto& a : mu.atoms()) moved.push_back({f(a.x), a.w});
  return AtomicMeasure::from_masses(mu.dim(), std::move(moved));
}

ParticleState euler_step(const ParticleState& state, const VelocityModel& model, double dt) {
  if (state.positions.empty()) throw ValidationError("particle state is empty");
  if (static_cast<std::size_t>(model.n_agents()) != state.positions.size()) {
    throw ValidationError("model n_agents must equal the particle count");
  }
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  const AtomicMeasure mu = to_measure(state);
  ParticleState next{state.dim, {}, state.t + dt};
  next.positions.reserve(state.positions.size());
  for (const auto& x : state.positions) next.positions.push_back(x + dt * eval_atomic(model, mu, x));
  return next;
}

ParticleTrajectory run_particles(int dim, const std::vector<Point>& x0, const VelocityModel& model,
                                 double T, double dt) {
  const std::size_t steps = step_count(T, dt);
  ParticleTrajectory traj{dt, {}};
  traj.states.reserve(steps + 1);
  traj.states.push_back({dim, x0, 0.0});
  for (std::size_t n = 1; n <= steps; ++n) {
    ParticleState next = euler_step(traj.states.back(), model, dt);
    // Times are n dt, not an accumulated sum.
    next.t = static_cast<double>(n) * dt;
    traj.states.push_back(std::move(next));
  }
  return traj;
}

double min_pairwise_gap(const ParticleState& state) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < state.positions.size(); ++a) {
    for (std::size_t b = a + 1; b < state.positions.size(); ++b) {
      best = std::min(best, norm(state.positions[a] - state.positions[b]));
    }
  }
  return best;
}

}  // namespace crowdmeasure
