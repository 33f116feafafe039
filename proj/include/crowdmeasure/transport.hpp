#pragma once

#include <cstddef>

#include "crowdmeasure/grid_measure.hpp"

namespace crowdmeasure {

inline constexpr std::size_t kDefaultMaxAtoms = 4096;

/// Wasserstein-1 distance between a (possibly atomized) grid measure and an
/// atomic measure. The true distance lies within `atomization_bound` of
/// `distance`.
struct W1Result {
  double distance = 0.0;
  double atomization_bound = 0.0;

  double lower() const { return distance > atomization_bound ? distance - atomization_bound : 0.0; }
  double upper() const { return distance + atomization_bound; }
};

/// Exact W1 on the line: integral of |F_mu - F_nu| by a sweep over the merged
/// atom positions.
double w1_1d(const AtomicMeasure& mu, const AtomicMeasure& nu);

/// Exact discrete Kantorovich W1 in any dimension, solved as a min-cost
/// transportation problem with Euclidean costs. Throws SizeLimitError when
/// either measure has more than `max_atoms` distinct atoms.
double w1_exact(const AtomicMeasure& mu, const AtomicMeasure& nu,
                std::size_t max_atoms = kDefaultMaxAtoms);

/// W1 between atomize(lambda) and mu, with the +-sqrt(d) h / 2 atomization
/// interval. One-dimensional inputs use the exact sweep, so max_atoms only
/// limits d >= 2.
W1Result w1_grid_atomic(const GridMeasure& lambda, const AtomicMeasure& mu,
                        std::size_t max_atoms = kDefaultMaxAtoms);

/// Exact W1 between two piecewise-constant densities on the same 1D grid,
/// integrating |F_a - F_b| with piecewise-linear CDFs. No atomization error.
double w1_grid_1d(const GridMeasure& a, const GridMeasure& b);

}  // namespace crowdmeasure
