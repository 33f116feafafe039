#include "crowdmeasure/grid_measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace crowdmeasure {

GridSpec::GridSpec(int dim, double cell_width) : dim_(dim), h_(cell_width) {
  check_dim(dim);
  if (!(cell_width > 0.0) || !std::isfinite(cell_width)) {
    throw ValidationError("cell width must be a positive finite number");
  }
  volume_ = std::pow(h_, dim_);
}

double GridSpec::cell_diameter() const { return std::sqrt(static_cast<double>(dim_)) * h_; }

namespace {

void check_point(int dim, const Point& x) {
  for (int l = 0; l < kMaxDim; ++l) {
    if (!std::isfinite(x[l])) throw ValidationError("point has a non-finite coordinate");
    if (l >= dim && x[l] != 0.0) {
      throw ValidationError("point has a nonzero coordinate beyond dimension " +
                            std::to_string(dim));
    }
  }
}

}  // namespace

CellIndex cell_of(const GridSpec& spec, const Point& x) {
  check_point(spec.dim(), x);
  const double h = spec.cell_width();
  CellIndex idx;
  for (int l = 0; l < spec.dim(); ++l) {
    auto i = static_cast<std::int64_t>(std::floor(x[l] / h + 0.5));
    // Rounding in x/h can land one cell off near a face; settle it against the
    // box bounds as they are evaluated everywhere else.
    while (x[l] < (static_cast<double>(i) - 0.5) * h) --i;
    while (x[l] >= (static_cast<double>(i) + 0.5) * h) ++i;
    idx[l] = i;
  }
  return idx;
}

Point cell_center(const GridSpec& spec, const CellIndex& i) {
  Point x;
  for (int l = 0; l < spec.dim(); ++l) x[l] = static_cast<double>(i[l]) * spec.cell_width();
  return x;
}

AtomicMeasure::AtomicMeasure(int dim, std::vector<Atom> atoms) : dim_(dim) {
  check_dim(dim);
  atoms_.reserve(atoms.size());
  double total = 0.0;
  for (const auto& a : atoms) {
    check_point(dim, a.x);
    if (!(a.w >= 0.0) || !std::isfinite(a.w)) {
      throw ValidationError("atom weights must be finite and nonnegative");
    }
    if (a.w == 0.0) continue;
    total += a.w;
    atoms_.push_back(a);
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "atom weights must sum to 1, got " << total;
    throw ValidationError(os.str());
  }
}

AtomicMeasure AtomicMeasure::uniform(int dim, std::span<const Point> positions) {
  if (positions.empty()) throw ValidationError("uniform measure needs at least one position");
  const double w = 1.0 / static_cast<double>(positions.size());
  std::vector<Atom> atoms;
  atoms.reserve(positions.size());
  for (const auto& p : positions) atoms.push_back({p, w});
  return AtomicMeasure(dim, std::move(atoms));
}

AtomicMeasure AtomicMeasure::canonical() const {
  std::vector<Atom> sorted(atoms_.begin(), atoms_.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Atom& a, const Atom& b) { return a.x < b.x; });
  std::vector<Atom> merged;
  merged.reserve(sorted.size());
  for (const auto& a : sorted) {
    if (!merged.empty() && merged.back().x == a.x) {
      merged.back().w += a.w;
    } else {
      merged.push_back(a);
    }
  }
  AtomicMeasure out;
  out.dim_ = dim_;
  out.atoms_ = std::move(merged);
  return out;
}

AtomicMeasure AtomicMeasure::from_masses(int dim, std::vector<Atom> atoms) {
  AtomicMeasure out;
  out.dim_ = dim;
  out.atoms_ = std::move(atoms);
  return out;
}

double AtomicMeasure::total_weight() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.w;
  return s;
}

GridMeasure::GridMeasure(GridSpec spec, std::vector<GridCell> cells) : spec_(spec) {
  for (const auto& c : cells) {
    if (!(c.rho >= 0.0) || !std::isfinite(c.rho)) {
      throw ValidationError("grid densities must be finite and nonnegative");
    }
    for (int l = spec.dim(); l < kMaxDim; ++l) {
      if (c.index[l] != 0) throw ValidationError("cell index has entries beyond the grid dimension");
    }
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const GridCell& a, const GridCell& b) { return a.index < b.index; });
  cells_.reserve(cells.size());
  for (const auto& c : cells) {
    if (!cells_.empty() && cells_.back().index == c.index) {
      cells_.back().rho += c.rho;
    } else {
      cells_.push_back(c);
    }
  }
  std::erase_if(cells_, [](const GridCell& c) { return c.rho == 0.0; });
}

double GridMeasure::density(const CellIndex& i) const {
  auto it = std::lower_bound(cells_.begin(), cells_.end(), i,
                             [](const GridCell& c, const CellIndex& k) { return c.index < k; });
  return (it != cells_.end() && it->index == i) ? it->rho : 0.0;
}

void GridMeasure::validate() const {
  for (const auto& c : cells_) {
    if (!(c.rho >= 0.0)) throw InvariantViolation("negative grid density");
  }
  const double err = std::abs(total_mass(*this) - 1.0);
  if (err > kMassTolerance) {
    std::ostringstream os;
    os.precision(6);
    os << "grid measure mass error " << err << " exceeds " << kMassTolerance;
    throw InvariantViolation(os.str());
  }
}

GridMeasure project_atomic(const AtomicMeasure& mu_bar, const GridSpec& spec) {
  if (mu_bar.dim() != spec.dim()) throw ValidationError("measure and grid dimensions differ");
  std::vector<GridCell> cells;
  cells.reserve(mu_bar.size());
  for (const auto& a : mu_bar.atoms()) cells.push_back({cell_of(spec, a.x), a.w});
  std::stable_sort(cells.begin(), cells.end(),
                   [](const GridCell& a, const GridCell& b) { return a.index < b.index; });
  // Sum cell masses first, then convert to densities.
  std::vector<GridCell> merged;
  for (const auto& c : cells) {
    if (!merged.empty() && merged.back().index == c.index) {
      merged.back().rho += c.rho;
    } else {
      merged.push_back(c);
    }
  }
  for (auto& c : merged) c.rho /= spec.cell_volume();
  return GridMeasure(spec, std::move(merged));
}

double total_mass(const GridMeasure& lambda) {
  // Summed per cell mass so that atomize() carries exactly the same total.
  const double vol = lambda.spec().cell_volume();
  double s = 0.0;
  for (const auto& c : lambda.cells()) s += c.rho * vol;
  return s;
}

namespace {

double power(double r, int p) {
  switch (p) {
    case 1:
      return r;
    case 2:
      return r * r;
    default:
      throw ValidationError("moment order must be 1 or 2, got " + std::to_string(p));
  }
}

}  // namespace

double moment(const AtomicMeasure& mu, int p) {
  power(0.0, p);
  double s = 0.0;
  for (const auto& a : mu.atoms()) s += a.w * power(norm(a.x), p);
  return s;
}

double moment(const GridMeasure& lambda, int p) {
  power(0.0, p);
  double s = 0.0;
  for (const auto& c : lambda.cells()) {
    s += c.rho * power(norm(cell_center(lambda.spec(), c.index)), p);
  }
  return s * lambda.spec().cell_volume();
}

AtomicMeasure atomize(const GridMeasure& lambda) {
  std::vector<Atom> atoms;
  atoms.reserve(lambda.occupied());
  const double vol = lambda.spec().cell_volume();
  for (const auto& c : lambda.cells()) {
    atoms.push_back({cell_center(lambda.spec(), c.index), c.rho * vol});
  }
  return AtomicMeasure::from_masses(lambda.spec().dim(), std::move(atoms));
}

GridMeasure interpolate(const GridMeasure& a, const GridMeasure& b, double theta) {
  if (!(a.spec() == b.spec())) throw ValidationError("interpolation between different grids");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta must lie in [0, 1]");
  if (theta == 0.0) return a;
  if (theta == 1.0) return b;
  const double wa = 1.0 - theta;
  std::vector<GridCell> out;
  out.reserve(a.occupied() + b.occupied());
  auto ia = a.cells().begin();
  auto ib = b.cells().begin();
  while (ia != a.cells().end() || ib != b.cells().end()) {
    if (ib == b.cells().end() || (ia != a.cells().end() && ia->index < ib->index)) {
      out.push_back({ia->index, wa * ia->rho});
      ++ia;
    } else if (ia == a.cells().end() || ib->index < ia->index) {
      out.push_back({ib->index, theta * ib->rho});
      ++ib;
    } else {
      out.push_back({ia->index, wa * ia->rho + theta * ib->rho});
      ++ia;
      ++ib;
    }
  }
  std::erase_if(out, [](const GridCell& c) { return c.rho == 0.0; });
  return GridMeasure(a.spec(), std::move(out), GridMeasure::Sorted{});
}

}  // namespace crowdmeasure
