#include "crowdmeasure/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crowdmeasure {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double radial_bump(double r2, double R, double b) {
  const double R2 = R * R;
  if (r2 >= R2) return 0.0;
  return std::exp(-b * r2 / (R2 - r2));
}

}  // namespace

Point kernel_F(const Kernel& kernel, const Point& z) {
  return std::visit(
      overloaded{
          [&](const CaseStudyRepulsion& k) {
            const double m = std::max(norm(z), k.eps);
            return (-k.a / (m * m)) * z;
          },
          [&](const PrototypeAttraction&) { return z; },
          [&](const CustomKernel& k) { return k.F(z); },
      },
      kernel);
}

double kernel_bound(const Kernel& kernel) {
  return std::visit(overloaded{
                        [](const CaseStudyRepulsion& k) { return k.a / k.eps; },
                        [](const PrototypeAttraction& k) { return k.cap_radius; },
                        [](const CustomKernel& k) { return k.fmax; },
                    },
                    kernel);
}

double kernel_lipschitz(const Kernel& kernel) {
  return std::visit(overloaded{
                        [](const CaseStudyRepulsion& k) { return k.a / (k.eps * k.eps); },
                        [](const PrototypeAttraction&) { return 1.0; },
                        [](const CustomKernel& k) { return k.lip; },
                    },
                    kernel);
}

double Neighborhood::radius() const {
  return std::visit([](const auto& s) { return s.R; }, shape);
}

double cutoff(const Neighborhood& neigh, const Point& z) {
  const double r2 = norm2(z);
  return std::visit(
      overloaded{
          [&](const BallShape& s) { return radial_bump(r2, s.R, neigh.b); },
          [&](const SectorShape& s) {
            const double radial = radial_bump(r2, s.R, neigh.b);
            if (radial == 0.0 || r2 == 0.0) return radial;
            const double half = 0.5 * s.alpha;
            const double phi = std::atan2(std::abs(z[1]), z[0]);
            if (phi >= half) return 0.0;
            return radial * std::exp(-neigh.b * phi * phi / (half * half - phi * phi));
          },
      },
      neigh.shape);
}

double bump_lipschitz(double R, double b) {
  // With u = r / R the derivative magnitude is
  //   (2 b / R) u / (1 - u^2)^2 exp(-b u^2 / (1 - u^2)),
  // a single interior peak; locate it on a log-spaced scan of 1 - u, then
  // refine by golden section.
  auto log_slope = [b](double u) {
    const double s = 1.0 - u * u;
    return std::log(2.0 * b * u) - 2.0 * std::log(s) - b * u * u / s;
  };
  constexpr int kScan = 4000;
  double best_u = 0.5;
  double best = log_slope(best_u);
  for (int k = 1; k < kScan; ++k) {
    // 1 - u from 1 down to 1e-12
    const double gap = std::pow(10.0, -12.0 * static_cast<double>(k) / kScan);
    const double u = 1.0 - gap;
    if (u <= 0.0) continue;
    const double v = log_slope(u);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  double lo = std::max(1e-300, best_u - 0.5 * (1.0 - best_u) - 1e-3);
  double hi = std::min(1.0 - 1e-15, best_u + 0.5 * (1.0 - best_u));
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double m1 = hi - ratio * (hi - lo);
    const double m2 = lo + ratio * (hi - lo);
    if (log_slope(m1) < log_slope(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  best = std::max(best, log_slope(0.5 * (lo + hi)));
  return std::exp(best) / R;
}

Point Rotation2::apply(const Point& z) const {
  return make_point(cos_t * z[0] - sin_t * z[1], sin_t * z[0] + cos_t * z[1]);
}

Point Rotation2::apply_inverse(const Point& z) const {
  return make_point(cos_t * z[0] + sin_t * z[1], -sin_t * z[0] + cos_t * z[1]);
}

VelocityModel::VelocityModel(int dim, int n_agents, Desired desired, Kernel kernel,
                             Neighborhood neighborhood, Heading heading)
    : dim_(dim),
      n_agents_(n_agents),
      desired_(std::move(desired)),
      kernel_(std::move(kernel)),
      neighborhood_(std::move(neighborhood)),
      heading_(std::move(heading)) {
  check_dim(dim);
  if (n_agents < 1) throw ValidationError("n_agents must be at least 1");
  if (!(neighborhood_.b > 0.0)) throw ValidationError("cutoff steepness b must be positive");
  if (!(neighborhood_.radius() > 0.0)) throw ValidationError("neighborhood radius R must be positive");

  std::visit(overloaded{
                 [](const CaseStudyRepulsion& k) {
                   if (!(k.a > 0.0) || !(k.eps > 0.0)) {
                     throw ValidationError("case-study kernel needs a > 0 and eps > 0");
                   }
                 },
                 [](const PrototypeAttraction& k) {
                   if (!(k.cap_radius > 0.0)) throw ValidationError("attraction cap radius must be positive");
                 },
                 [this](const CustomKernel& k) {
                   if (!k.F) throw ValidationError("custom kernel has no function");
                   if (!(k.fmax >= 0.0) || !(k.lip >= 0.0)) {
                     throw ValidationError("custom kernel bounds must be nonnegative");
                   }
                   if (norm(k.F(Point{})) != 0.0) {
                     warnings_.emplace_back("custom kernel has F(0) != 0; the self-interaction term is kept");
                   }
                 },
             },
             kernel_);

  if (const auto* c = std::get_if<ConstantDesired>(&desired_)) {
    for (int l = dim; l < kMaxDim; ++l) {
      if (c->c[l] != 0.0) throw ValidationError("desired velocity has components beyond the dimension");
    }
  }
  if (const auto* c = std::get_if<CustomDesired>(&desired_)) {
    if (!c->v) throw ValidationError("custom desired velocity has no function");
    if (!(c->vmax >= 0.0) || !(c->lip >= 0.0)) {
      throw ValidationError("custom desired velocity bounds must be nonnegative");
    }
  }

  if (const auto* s = std::get_if<SectorShape>(&neighborhood_.shape)) {
    if (dim != 2) throw ValidationError("sector neighborhoods are only supported in two dimensions");
    if (!(s->alpha > 0.0 && s->alpha <= 2.0 * std::numbers::pi)) {
      throw ValidationError("sector angle alpha must lie in (0, 2 pi]");
    }
    if (std::holds_alternative<HeadingFromDesired>(heading_)) {
      const bool away_from_zero = std::visit(
          overloaded{
              [](const ZeroDesired&) { return false; },
              [](const ConstantDesired& c) { return norm(c.c) > 0.0; },
              [](const CustomDesired& c) { return c.min_speed > 0.0; },
          },
          desired_);
      if (!away_from_zero) {
        throw ValidationError(
            "sector heading follows the desired velocity, which is not bounded away from zero; "
            "use a fixed-axis heading instead");
      }
    }
  }
  if (const auto* f = std::get_if<HeadingFixedAxis>(&heading_)) {
    if (!(norm(f->axis) > 0.0)) throw ValidationError("fixed heading axis must be nonzero");
  }

  interaction_free_ = kernel_bound(kernel_) == 0.0;
}

Point VelocityModel::desired_at(const Point& x) const {
  return std::visit(overloaded{
                        [](const ZeroDesired&) { return Point{}; },
                        [](const ConstantDesired& c) { return c.c; },
                        [&](const CustomDesired& c) { return c.v(x); },
                    },
                    desired_);
}

double VelocityModel::desired_bound() const {
  return std::visit(overloaded{
                        [](const ZeroDesired&) { return 0.0; },
                        [](const ConstantDesired& c) { return norm(c.c); },
                        [](const CustomDesired& c) { return c.vmax; },
                    },
                    desired_);
}

double VelocityModel::desired_lipschitz() const {
  if (const auto* c = std::get_if<CustomDesired>(&desired_)) return c->lip;
  return 0.0;
}

Rotation2 rotation_at(const VelocityModel& model, const Point& x) {
  if (model.dim() != 2) throw ValidationError("rotations are only defined in two dimensions");
  Point u = std::visit(overloaded{
                           [&](const HeadingFromDesired&) { return model.desired_at(x); },
                           [](const HeadingFixedAxis& f) { return f.axis; },
                       },
                       model.heading());
  const double len = std::hypot(u[0], u[1]);
  if (!(len > 0.0)) throw ValidationError("heading vector vanishes; rotation undefined");
  // The reference +x axis is carried onto the heading direction.
  return Rotation2{u[0] / len, u[1] / len};
}

namespace {

// sigma_{U_x} at offset d = y - x, with the rotation already resolved.
double cutoff_offset(const VelocityModel& model, const std::optional<Rotation2>& rot,
                     const Point& d) {
  if (rot) return cutoff(model.neighborhood(), rot->apply_inverse(d));
  return cutoff(model.neighborhood(), d);
}

std::optional<Rotation2> rotation_if_needed(const VelocityModel& model, const Point& x) {
  if (model.neighborhood().is_ball()) return std::nullopt;
  return rotation_at(model, x);
}

}  // namespace

double cutoff_at(const VelocityModel& model, const Point& x, const Point& y) {
  return cutoff_offset(model, rotation_if_needed(model, x), y - x);
}

Point eval_atomic(const VelocityModel& model, const AtomicMeasure& mu, const Point& x) {
  if (mu.dim() != model.dim()) throw ValidationError("measure and model dimensions differ");
  Point v = model.desired_at(x);
  if (model.interaction_free()) return v;
  const auto rot = rotation_if_needed(model, x);
  const double R2 = model.neighborhood().radius() * model.neighborhood().radius();
  const double n = static_cast<double>(model.n_agents());
  Point sum;
  for (const auto& a : mu.atoms()) {
    const Point d = a.x - x;
    if (norm2(d) >= R2) continue;
    sum += (n * a.w * cutoff_offset(model, rot, d)) * kernel_F(model.kernel(), d);
  }
  return v + sum;
}

namespace {

Point grid_contribution(const VelocityModel& model, const std::optional<Rotation2>& rot,
                        double scale, double rho, const Point& d) {
  return (scale * rho * cutoff_offset(model, rot, d)) * kernel_F(model.kernel(), d);
}

}  // namespace

Point eval_grid(const VelocityModel& model, const GridMeasure& lambda, const Point& x) {
  if (lambda.spec().dim() != model.dim()) throw ValidationError("measure and model dimensions differ");
  Point v = model.desired_at(x);
  if (model.interaction_free()) return v;
  const auto rot = rotation_if_needed(model, x);
  const double R2 = model.neighborhood().radius() * model.neighborhood().radius();
  const double scale = static_cast<double>(model.n_agents()) * lambda.spec().cell_volume();
  Point sum;
  for (const auto& c : lambda.cells()) {
    const Point d = cell_center(lambda.spec(), c.index) - x;
    if (norm2(d) >= R2) continue;
    sum += grid_contribution(model, rot, scale, c.rho, d);
  }
  return v + sum;
}

double velocity_bound(const VelocityModel& model) {
  return model.desired_bound() +
         static_cast<double>(model.n_agents()) * kernel_bound(model.kernel());
}

double interaction_lipschitz(const VelocityModel& model) {
  if (!model.neighborhood().is_ball()) {
    throw ValidationError("interaction Lipschitz constant is only assembled for ball neighborhoods");
  }
  const double R = model.neighborhood().radius();
  return kernel_lipschitz(model.kernel()) +
         kernel_bound(model.kernel()) * bump_lipschitz(R, model.neighborhood().b);
}

GridVelocitySampler::GridVelocitySampler(const VelocityModel& model, const GridMeasure& lambda)
    : model_(model), lambda_(lambda), bin_width_(model.neighborhood().radius()) {
  if (lambda.spec().dim() != model.dim()) throw ValidationError("measure and model dimensions differ");
  centers_.reserve(lambda.occupied());
  binned_.reserve(lambda.occupied());
  for (std::size_t k = 0; k < lambda.occupied(); ++k) {
    const Point c = cell_center(lambda.spec(), lambda.cells()[k].index);
    centers_.push_back(c);
    CellIndex bin;
    for (int l = 0; l < model.dim(); ++l) {
      bin[l] = static_cast<std::int64_t>(std::floor(c[l] / bin_width_));
    }
    binned_.emplace_back(bin, k);
  }
  std::sort(binned_.begin(), binned_.end());
}

Point GridVelocitySampler::operator()(const Point& x) const {
  Point v = model_.desired_at(x);
  if (model_.interaction_free()) return v;
  const auto rot = rotation_if_needed(model_, x);
  const double R2 = model_.neighborhood().radius() * model_.neighborhood().radius();
  const double scale = static_cast<double>(model_.n_agents()) * lambda_.spec().cell_volume();
  const int dim = model_.dim();

  CellIndex home;
  for (int l = 0; l < dim; ++l) home[l] = static_cast<std::int64_t>(std::floor(x[l] / bin_width_));

  std::vector<std::size_t> near;
  int combos = 1;
  for (int l = 0; l < dim; ++l) combos *= 3;
  for (int code = 0; code < combos; ++code) {
    CellIndex bin = home;
    int rest = code;
    for (int l = 0; l < dim; ++l) {
      bin[l] += rest % 3 - 1;
      rest /= 3;
    }
    auto lo = std::lower_bound(binned_.begin(), binned_.end(), std::make_pair(bin, std::size_t{0}));
    for (auto it = lo; it != binned_.end() && it->first == bin; ++it) {
      if (norm2(centers_[it->second] - x) < R2) near.push_back(it->second);
    }
  }
  // Same summation order as the full scan.
  std::sort(near.begin(), near.end());
  Point sum;
  for (std::size_t k : near) {
    sum += grid_contribution(model_, rot, scale, lambda_.cells()[k].rho, centers_[k] - x);
  }
  return v + sum;
}

}  // namespace crowdmeasure
