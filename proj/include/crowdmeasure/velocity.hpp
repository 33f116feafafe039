#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crowdmeasure/grid_measure.hpp"

namespace crowdmeasure {

// ---------------------------------------------------------------------------
// Interaction kernels F = f r.

/// F(z) = -a z / max(|z|, eps)^2. Bounded by a / eps, Lipschitz with a / eps^2.
struct CaseStudyRepulsion {
  double a = 0.01;
  double eps = 0.025;
};

/// F(z) = z (f = |z|, r = z / |z|), bounded by cap_radius on the ball it is
/// used with.
struct PrototypeAttraction {
  double cap_radius = 1.0;
};

/// Caller-provided kernel with its bound and Lipschitz constant on B_R(0).
struct CustomKernel {
  std::function<Point(const Point&)> F;
  double fmax = 0.0;
  double lip = 0.0;
};

using Kernel = std::variant<CaseStudyRepulsion, PrototypeAttraction, CustomKernel>;

Point kernel_F(const Kernel& kernel, const Point& z);
/// sup |F| over the interaction ball.
double kernel_bound(const Kernel& kernel);
/// Lipschitz constant of F over the interaction ball.
double kernel_lipschitz(const Kernel& kernel);

// ---------------------------------------------------------------------------
// Interaction neighborhoods and their cutoffs.

struct BallShape {
  double R = 0.1;
};

/// Sector of B_R(0) of angular width alpha, symmetric about the +x axis (d=2).
struct SectorShape {
  double R = 0.1;
  double alpha = 3.141592653589793;
};

struct Neighborhood {
  std::variant<BallShape, SectorShape> shape;
  double b = 0.02;  // bump steepness

  double radius() const;
  bool is_ball() const { return std::holds_alternative<BallShape>(shape); }
};

/// sigma_{U_0}(z): exp(-b |z|^2 / (R^2 - |z|^2)) inside the ball, zero on and
/// outside its boundary. Sectors multiply in exp(-b phi^2 / ((alpha/2)^2 - phi^2))
/// where phi is the angle between z and the +x axis.
double cutoff(const Neighborhood& neigh, const Point& z);

/// sup |d/dr exp(-b r^2 / (R^2 - r^2))| over [0, R), the Lipschitz constant of
/// the radial bump.
double bump_lipschitz(double R, double b);

// ---------------------------------------------------------------------------
// Desired velocity.

struct ZeroDesired {};

struct ConstantDesired {
  Point c;
};

/// Lipschitz, bounded field. `min_speed` is a lower bound on |v_d|, required
/// to be positive when a sector is oriented along v_d.
struct CustomDesired {
  std::function<Point(const Point&)> v;
  double vmax = 0.0;
  double lip = 0.0;
  double min_speed = 0.0;
};

using Desired = std::variant<ZeroDesired, ConstantDesired, CustomDesired>;

struct HeadingFromDesired {};
struct HeadingFixedAxis {
  Point axis;
};
using Heading = std::variant<HeadingFromDesired, HeadingFixedAxis>;

/// In-plane rotation R_x = [[cos, -sin], [sin, cos]].
struct Rotation2 {
  double cos_t = 1.0;
  double sin_t = 0.0;

  Point apply(const Point& z) const;
  Point apply_inverse(const Point& z) const;
};

/// v[mu](x) = v_d(x) + N * integral F(y - x) sigma_{U_x}(y) dmu(y).
class VelocityModel {
 public:
  VelocityModel(int dim, int n_agents, Desired desired, Kernel kernel, Neighborhood neighborhood,
                Heading heading = HeadingFromDesired{});

  int dim() const { return dim_; }
  int n_agents() const { return n_agents_; }
  const Desired& desired() const { return desired_; }
  const Kernel& kernel() const { return kernel_; }
  const Neighborhood& neighborhood() const { return neighborhood_; }
  const Heading& heading() const { return heading_; }

  /// Non-empty when construction accepted something questionable, e.g. a
  /// custom kernel with F(0) != 0.
  const std::vector<std::string>& warnings() const { return warnings_; }

  Point desired_at(const Point& x) const;
  double desired_bound() const;
  double desired_lipschitz() const;

  /// N F_max == 0, so the interaction integral vanishes.
  bool interaction_free() const { return interaction_free_; }

 private:
  int dim_;
  int n_agents_;
  Desired desired_;
  Kernel kernel_;
  Neighborhood neighborhood_;
  Heading heading_;
  std::vector<std::string> warnings_;
  bool interaction_free_ = false;
};

Rotation2 rotation_at(const VelocityModel& model, const Point& x);

/// sigma_{U_x}(y) = sigma_{U_0}(R_x^{-1} (y - x)).
double cutoff_at(const VelocityModel& model, const Point& x, const Point& y);

Point eval_atomic(const VelocityModel& model, const AtomicMeasure& mu, const Point& x);

/// Midpoint quadrature over occupied cells whose centers lie within R of x.
/// Scans every cell; use GridVelocitySampler for repeated evaluation.
Point eval_grid(const VelocityModel& model, const GridMeasure& lambda, const Point& x);

/// V = sup|v_d| + N F_max.
double velocity_bound(const VelocityModel& model);

/// Lipschitz constant of z -> F(z) sigma_{B_R}(z) over R^d (ball neighborhoods).
double interaction_lipschitz(const VelocityModel& model);

/// Bins the occupied cells of one grid measure on a coarse lattice of width
/// >= R so that each evaluation only visits nearby cells. Results are
/// bit-identical to eval_grid.
class GridVelocitySampler {
 public:
  GridVelocitySampler(const VelocityModel& model, const GridMeasure& lambda);

  Point operator()(const Point& x) const;

 private:
  const VelocityModel& model_;
  const GridMeasure& lambda_;
  double bin_width_;
  std::vector<Point> centers_;
  // (bin, cell position in lambda) sorted by bin then position.
  std::vector<std::pair<CellIndex, std::size_t>> binned_;
};

}  // namespace crowdmeasure
