#include "crowdmeasure/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace crowdmeasure {

double w1_1d(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw ValidationError("w1_1d needs one-dimensional measures");
  const auto a = mu.canonical();
  const auto b = nu.canonical();
  auto ia = a.atoms().begin();
  auto ib = b.atoms().begin();
  double cdf_gap = 0.0;  // F_mu - F_nu just right of the previous event
  double prev = 0.0;
  bool started = false;
  double total = 0.0;
  while (ia != a.atoms().end() || ib != b.atoms().end()) {
    double x;
    if (ib == b.atoms().end() || (ia != a.atoms().end() && ia->x[0] <= ib->x[0])) {
      x = ia->x[0];
    } else {
      x = ib->x[0];
    }
    if (started) total += std::abs(cdf_gap) * (x - prev);
    while (ia != a.atoms().end() && ia->x[0] == x) cdf_gap += (ia++)->w;
    while (ib != b.atoms().end() && ib->x[0] == x) cdf_gap -= (ib++)->w;
    prev = x;
    started = true;
  }
  return total;
}

namespace {

// Successive shortest augmenting paths on the complete bipartite residual
// graph, with node potentials keeping reduced costs nonnegative (dense
// Dijkstra). Every augmentation exhausts a supply, a demand or a reverse arc.
class Transportation {
 public:
  Transportation(const AtomicMeasure& src, const AtomicMeasure& dst)
      : n_(src.size()), m_(dst.size()), cost_(n_ * m_), supply_(n_), demand_(m_),
        flows_(m_), pot_src_(n_, 0.0), pot_dst_(m_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      supply_[i] = src.atoms()[i].w;
      for (std::size_t j = 0; j < m_; ++j) {
        cost_[i * m_ + j] = norm(src.atoms()[i].x - dst.atoms()[j].x);
      }
    }
    for (std::size_t j = 0; j < m_; ++j) demand_[j] = dst.atoms()[j].w;
  }

  double solve() {
    while (remaining(supply_) && remaining(demand_)) {
      if (!augment()) break;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < m_; ++j) {
      for (const auto& [i, f] : flows_[j]) total += f * cost_[i * m_ + j];
    }
    return total;
  }

 private:
  static constexpr double kZero = 1e-15;
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  static bool remaining(const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return x > kZero; });
  }

  double reduced_forward(std::size_t i, std::size_t j) const {
    return std::max(0.0, cost_[i * m_ + j] + pot_src_[i] - pot_dst_[j]);
  }
  double reduced_backward(std::size_t j, std::size_t i) const {
    return std::max(0.0, -cost_[i * m_ + j] + pot_dst_[j] - pot_src_[i]);
  }

  double flow(std::size_t i, std::size_t j) const {
    for (const auto& [k, f] : flows_[j]) {
      if (k == i) return f;
    }
    return 0.0;
  }

  void add_flow(std::size_t i, std::size_t j, double delta) {
    auto& list = flows_[j];
    for (auto it = list.begin(); it != list.end(); ++it) {
      if (it->first == i) {
        it->second += delta;
        if (it->second <= kZero) list.erase(it);
        return;
      }
    }
    if (delta > kZero) list.emplace_back(i, delta);
  }

  bool augment() {
    // Node ids: sources [0, n), sinks [n, n + m).
    const std::size_t total = n_ + m_;
    std::vector<double> dist(total, kInf);
    std::vector<std::size_t> pred(total, kNone);
    std::vector<char> done(total, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      if (supply_[i] > kZero) dist[i] = 0.0;
    }
    std::size_t target = kNone;
    for (;;) {
      std::size_t u = kNone;
      double best = kInf;
      for (std::size_t v = 0; v < total; ++v) {
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      }
      if (u == kNone) break;
      if (u >= n_ && demand_[u - n_] > kZero) {
        target = u;
        break;
      }
      done[u] = 1;
      if (u < n_) {
        for (std::size_t j = 0; j < m_; ++j) {
          const std::size_t v = n_ + j;
          if (done[v]) continue;
          const double nd = dist[u] + reduced_forward(u, j);
          if (nd < dist[v]) {
            dist[v] = nd;
            pred[v] = u;
          }
        }
      } else {
        const std::size_t j = u - n_;
        for (const auto& [i, f] : flows_[j]) {
          if (done[i]) continue;
          const double nd = dist[u] + reduced_backward(j, i);
          if (nd < dist[i]) {
            dist[i] = nd;
            pred[i] = u;
          }
        }
      }
    }
    if (target == kNone) return false;

    const double reach = dist[target];
    for (std::size_t i = 0; i < n_; ++i) pot_src_[i] += std::min(dist[i], reach);
    for (std::size_t j = 0; j < m_; ++j) pot_dst_[j] += std::min(dist[n_ + j], reach);

    double amount = demand_[target - n_];
    std::size_t v = target;
    while (pred[v] != kNone) {
      const std::size_t u = pred[v];
      if (u >= n_) amount = std::min(amount, flow(v, u - n_));  // reverse arc sink -> source
      v = u;
    }
    const std::size_t root = v;
    amount = std::min(amount, supply_[root]);

    v = target;
    while (pred[v] != kNone) {
      const std::size_t u = pred[v];
      if (u < n_) {
        add_flow(u, v - n_, amount);
      } else {
        add_flow(v, u - n_, -amount);
      }
      v = u;
    }
    supply_[root] -= amount;
    demand_[target - n_] -= amount;
    return true;
  }

  std::size_t n_, m_;
  std::vector<double> cost_;
  std::vector<double> supply_, demand_;
  std::vector<std::vector<std::pair<std::size_t, double>>> flows_;
  std::vector<double> pot_src_, pot_dst_;
};

}  // namespace

double w1_exact(const AtomicMeasure& mu, const AtomicMeasure& nu, std::size_t max_atoms) {
  if (mu.dim() != nu.dim()) throw ValidationError("w1_exact on measures of different dimension");
  const auto a = mu.canonical();
  const auto b = nu.canonical();
  if (a.size() > max_atoms || b.size() > max_atoms) {
    throw SizeLimitError("w1_exact limited to " + std::to_string(max_atoms) + " atoms, got " +
                         std::to_string(std::max(a.size(), b.size())) +
                         "; subsample or use w1_1d for one-dimensional data");
  }
  if (a.size() == 0 || b.size() == 0) return 0.0;
  if (a.size() == 1 || b.size() == 1) {
    // Everything moves to or from the single atom.
    const auto& one = a.size() == 1 ? a : b;
    const auto& many = a.size() == 1 ? b : a;
    double s = 0.0;
    for (const auto& at : many.atoms()) s += at.w * norm(at.x - one.atoms()[0].x);
    return s;
  }
  return Transportation(a, b).solve();
}

W1Result w1_grid_atomic(const GridMeasure& lambda, const AtomicMeasure& mu,
                        std::size_t max_atoms) {
  if (lambda.spec().dim() != mu.dim()) {
    throw ValidationError("grid and atomic measures have different dimensions");
  }
  const auto atoms = atomize(lambda);
  W1Result r;
  r.distance = mu.dim() == 1 ? w1_1d(atoms, mu) : w1_exact(atoms, mu, max_atoms);
  r.atomization_bound = 0.5 * lambda.spec().cell_diameter();
  return r;
}

double w1_grid_1d(const GridMeasure& a, const GridMeasure& b) {
  if (!(a.spec() == b.spec())) throw ValidationError("w1_grid_1d needs measures on the same grid");
  if (a.spec().dim() != 1) throw ValidationError("w1_grid_1d needs one-dimensional grids");
  const double h = a.spec().cell_width();
  auto ia = a.cells().begin();
  auto ib = b.cells().begin();
  double gap = 0.0;  // F_a - F_b at the left face of the current cell
  bool started = false;
  std::int64_t prev = 0;
  double total = 0.0;
  while (ia != a.cells().end() || ib != b.cells().end()) {
    std::int64_t k;
    double da = 0.0;
    double db = 0.0;
    if (ib == b.cells().end() || (ia != a.cells().end() && ia->index[0] <= ib->index[0])) {
      k = ia->index[0];
    } else {
      k = ib->index[0];
    }
    if (ia != a.cells().end() && ia->index[0] == k) da = (ia++)->rho * h;
    if (ib != b.cells().end() && ib->index[0] == k) db = (ib++)->rho * h;
    if (started && k > prev + 1) total += std::abs(gap) * h * static_cast<double>(k - prev - 1);
    const double next = gap + da - db;
    // The CDF difference is linear across the cell.
    if ((gap >= 0.0) == (next >= 0.0)) {
      total += 0.5 * h * (std::abs(gap) + std::abs(next));
    } else {
      total += 0.5 * h * (gap * gap + next * next) / (std::abs(gap) + std::abs(next));
    }
    gap = next;
    prev = k;
    started = true;
  }
  return total;
}

}  // namespace crowdmeasure
