#pragma once

#include <span>
#include <vector>

#include "crowdmeasure/types.hpp"

namespace crowdmeasure {

/// Regular hypercube lattice of edge length `cell_width` in R^dim. Cell i is
/// the half-open box prod_l [(i_l - 1/2) h, (i_l + 1/2) h).
class GridSpec {
 public:
  GridSpec(int dim, double cell_width);

  int dim() const { return dim_; }
  double cell_width() const { return h_; }
  /// h^d, the Lebesgue measure of one cell.
  double cell_volume() const { return volume_; }
  /// Diameter of one cell, sqrt(d) h.
  double cell_diameter() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int dim_;
  double h_;
  double volume_;
};

CellIndex cell_of(const GridSpec& spec, const Point& x);
Point cell_center(const GridSpec& spec, const CellIndex& i);

struct Atom {
  Point x;
  double w = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite weighted sum of Dirac masses. Weights are strictly positive and sum
/// to one within 1e-12; zero-weight atoms are dropped on construction.
class AtomicMeasure {
 public:
  static constexpr double kWeightTolerance = 1e-12;

  AtomicMeasure(int dim, std::vector<Atom> atoms);

  /// Equal weights 1/N on the given positions (coincident positions are kept
  /// as separate atoms).
  static AtomicMeasure uniform(int dim, std::span<const Point> positions);

  int dim() const { return dim_; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  /// Atoms sorted lexicographically by position with coincident atoms merged.
  AtomicMeasure canonical() const;

  double total_weight() const;

  /// Wraps nonnegative atom masses without the unit-sum check. Used for
  /// atomized grid data, whose total carries the grid's rounding.
  static AtomicMeasure from_masses(int dim, std::vector<Atom> atoms);

 private:
  AtomicMeasure() = default;
  int dim_ = 1;
  std::vector<Atom> atoms_;
};

struct GridCell {
  CellIndex index;
  double rho = 0.0;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Piecewise-constant density on a lattice. Only occupied cells are stored,
/// sorted by index; every reduction runs in that order.
class GridMeasure {
 public:
  static constexpr double kMassTolerance = 1e-10;

  explicit GridMeasure(GridSpec spec) : spec_(spec) {}
  /// Cells may arrive in any order; duplicates are summed and zero densities
  /// dropped. Negative densities are rejected.
  GridMeasure(GridSpec spec, std::vector<GridCell> cells);

  const GridSpec& spec() const { return spec_; }
  std::span<const GridCell> cells() const { return cells_; }
  std::size_t occupied() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  /// Cells already strictly sorted by index with positive densities.
  static GridMeasure from_sorted(GridSpec spec, std::vector<GridCell> cells) {
    return GridMeasure(spec, std::move(cells), Sorted{});
  }

  /// Density at index i (0 when absent).
  double density(const CellIndex& i) const;

  /// Throws InvariantViolation unless this is a probability measure.
  void validate() const;

  friend bool operator==(const GridMeasure&, const GridMeasure&) = default;

 private:
  friend GridMeasure interpolate(const GridMeasure&, const GridMeasure&, double);
  struct Sorted {};
  GridMeasure(GridSpec spec, std::vector<GridCell> cells, Sorted)
      : spec_(spec), cells_(std::move(cells)) {}

  GridSpec spec_;
  std::vector<GridCell> cells_;
};

GridMeasure project_atomic(const AtomicMeasure& mu_bar, const GridSpec& spec);
double total_mass(const GridMeasure& lambda);

double moment(const AtomicMeasure& mu, int p);
/// Cell-center quadrature h^d sum rho_i |x_i|^p.
double moment(const GridMeasure& lambda, int p);

/// One atom per occupied cell, at its center, carrying the cell's mass.
AtomicMeasure atomize(const GridMeasure& lambda);

/// (1 - theta) a + theta b, cell by cell.
GridMeasure interpolate(const GridMeasure& a, const GridMeasure& b, double theta);

/// Time-indexed grid frames at t_n = n dt.
struct GridTrajectory {
  GridSpec spec;
  double dt;
  std::vector<GridMeasure> frames;

  double final_time() const { return dt * static_cast<double>(frames.size() - 1); }
};

}  // namespace crowdmeasure
