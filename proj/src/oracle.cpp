#include "eot/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "eot/error.hpp"
#include "eot/numeric.hpp"

namespace eot {

namespace {

void require_finite(const CostTensor& cost) {
  if (!cost.all_finite()) {
    throw Error(ErrorCode::InvalidArgument, "exact oracle needs a finite cost");
  }
}

double max_abs(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::fabs(x));
  return m;
}

// Spanning-tree basis of the bipartite transportation graph. Row nodes are
// 0..n-1, column nodes n..n+m-1.
class TransportSimplex {
 public:
  TransportSimplex(const CostMatrix& cost, std::span<const double> supply, std::span<const double> demand)
      : cost_(cost), n_(supply.size()), m_(demand.size()), flow_(n_ * m_, 0.0), basic_(n_ * m_, 0) {
    tol_ = 1e-12 * (1.0 + max_abs(cost.data()));
    northwest_corner(supply, demand);
  }

  std::size_t solve() {
    std::size_t pivots = 0;
    std::size_t degenerate_streak = 0;
    const std::size_t bland_after = n_ + m_;
    for (;;) {
      compute_duals();
      const bool bland = degenerate_streak > bland_after;
      const std::size_t entering = price(bland);
      if (entering == kNone) return pivots;
      const double theta = pivot(entering);
      degenerate_streak = theta > 0.0 ? 0 : degenerate_streak + 1;
      ++pivots;
    }
  }

  const std::vector<double>& flow() const { return flow_; }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void add_basic(std::size_t i, std::size_t j, double x) {
    flow_[i * m_ + j] = x;
    basic_[i * m_ + j] = 1;
    basis_.push_back(i * m_ + j);
  }

  void northwest_corner(std::span<const double> supply, std::span<const double> demand) {
    std::vector<double> a(supply.begin(), supply.end()), b(demand.begin(), demand.end());
    std::size_t i = 0, j = 0;
    while (basis_.size() < n_ + m_ - 1) {
      const double x = std::max(0.0, std::min(a[i], b[j]));
      add_basic(i, j, x);
      a[i] -= x;
      b[j] -= x;
      if (i + 1 == n_) {
        ++j;
      } else if (j + 1 == m_) {
        ++i;
      } else if (a[i] <= b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void build_tree() {
    const std::size_t nodes = n_ + m_;
    adjacency_.assign(nodes, {});
    for (std::size_t cell : basis_) {
      const std::size_t i = cell / m_, j = cell % m_;
      adjacency_[i].push_back(cell);
      adjacency_[n_ + j].push_back(cell);
    }
    parent_edge_.assign(nodes, kNone);
    parent_.assign(nodes, kNone);
    depth_.assign(nodes, 0);
    order_.clear();
    std::vector<char> seen(nodes, 0);
    order_.push_back(0);
    seen[0] = 1;
    for (std::size_t h = 0; h < order_.size(); ++h) {
      const std::size_t node = order_[h];
      for (std::size_t cell : adjacency_[node]) {
        const std::size_t i = cell / m_, j = cell % m_;
        const std::size_t other = node < n_ ? n_ + j : i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_[other] = node;
        parent_edge_[other] = cell;
        depth_[other] = depth_[node] + 1;
        order_.push_back(other);
      }
    }
    if (order_.size() != nodes) throw Error(ErrorCode::InvalidArgument, "transport basis is not a tree");
  }

  void compute_duals() {
    build_tree();
    row_dual_.assign(n_, 0.0);
    col_dual_.assign(m_, 0.0);
    for (std::size_t h = 1; h < order_.size(); ++h) {
      const std::size_t node = order_[h];
      const std::size_t cell = parent_edge_[node];
      const std::size_t i = cell / m_, j = cell % m_;
      if (node >= n_) {
        col_dual_[j] = cost_.at(i, j) - row_dual_[i];
      } else {
        row_dual_[i] = cost_.at(i, j) - col_dual_[j];
      }
    }
  }

  std::size_t price(bool bland) const {
    std::size_t best = kNone;
    double best_rc = -tol_;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) {
        const std::size_t cell = i * m_ + j;
        if (basic_[cell]) continue;
        const double rc = cost_.at(i, j) - row_dual_[i] - col_dual_[j];
        if (rc < best_rc) {
          if (bland) return cell;
          best_rc = rc;
          best = cell;
        }
      }
    }
    return best;
  }

  // Adds `entering` to the basis, pushes flow around the cycle it closes,
  // and removes the blocking cell with the smallest index.
  double pivot(std::size_t entering) {
    const std::size_t ei = entering / m_, ej = entering % m_;
    // Tree path from column node ej to row node ei; its edges alternate -, +, -, ...
    std::vector<std::size_t> up_from_col, up_from_row;
    std::size_t a = n_ + ej, b = ei;
    while (depth_[a] > depth_[b]) {
      up_from_col.push_back(parent_edge_[a]);
      a = parent_[a];
    }
    while (depth_[b] > depth_[a]) {
      up_from_row.push_back(parent_edge_[b]);
      b = parent_[b];
    }
    while (a != b) {
      up_from_col.push_back(parent_edge_[a]);
      a = parent_[a];
      up_from_row.push_back(parent_edge_[b]);
      b = parent_[b];
    }
    std::vector<std::size_t> path = up_from_col;
    path.insert(path.end(), up_from_row.rbegin(), up_from_row.rend());

    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = kNone;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const double x = flow_[path[k]];
      if (x < theta || (x == theta && path[k] < leaving)) {
        theta = x;
        leaving = path[k];
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (k % 2 == 0) {
        flow_[path[k]] -= theta;
      } else {
        flow_[path[k]] += theta;
      }
    }
    flow_[entering] = theta;
    flow_[leaving] = 0.0;
    basic_[entering] = 1;
    basic_[leaving] = 0;
    *std::find(basis_.begin(), basis_.end(), leaving) = entering;
    return theta;
  }

  const CostMatrix& cost_;
  std::size_t n_, m_;
  double tol_;
  std::vector<double> flow_;
  std::vector<char> basic_;
  std::vector<std::size_t> basis_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::size_t> parent_, parent_edge_, depth_, order_;
  std::vector<double> row_dual_, col_dual_;
};

}  // namespace

OracleResult exact_ot_oracle(const CostMatrix& cost, const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu) {
  if (cost.rank() != 2 || cost.extent(0) != mu.size() || cost.extent(1) != nu.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cost shape does not match the measures");
  }
  if (mu.size() * nu.size() > 1'000'000) {
    throw Error(ErrorCode::TooLarge, "exact oracle is limited to n*m <= 1e6");
  }
  require_finite(cost);
  TransportSimplex simplex(cost, mu.weights(), nu.weights());
  OracleResult out;
  out.pivots = simplex.solve();
  out.plan = CouplingPlan{{mu.size(), nu.size()}, simplex.flow()};
  out.value = transport_cost(out.plan, cost);
  return out;
}

OracleResult mm_exact_oracle(const CostTensor& cost, std::span<const DiscreteMeasure> measures) {
  if (cost.rank() != measures.size() || measures.size() < 2) {
    throw Error(ErrorCode::DimensionMismatch, "cost rank differs from number of marginals");
  }
  for (std::size_t a = 0; a < measures.size(); ++a) {
    if (cost.extent(a) != measures[a].size()) {
      throw Error(ErrorCode::DimensionMismatch, "cost extent differs from atom count");
    }
  }
  if (cost.size() > 100'000) throw Error(ErrorCode::TooLarge, "multi-marginal oracle is limited to 1e5 tuples");
  require_finite(cost);

  const std::size_t vars = cost.size();
  std::size_t rows = 0;
  for (const auto& m : measures) rows += m.size();
  // Columns: tuple variables, then one artificial per row, then the rhs.
  const std::size_t cols = vars + rows + 1;
  const std::size_t rhs = cols - 1;
  std::vector<double> tab((rows + 1) * cols, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return tab[r * cols + c]; };

  std::vector<std::size_t> row_offset(measures.size(), 0);
  for (std::size_t a = 1; a < measures.size(); ++a) row_offset[a] = row_offset[a - 1] + measures[a - 1].size();
  std::vector<std::size_t> idx(cost.rank(), 0);
  for (std::size_t t = 0; t < vars; ++t) {
    for (std::size_t a = 0; a < idx.size(); ++a) at(row_offset[a] + idx[a], t) = 1.0;
    for (std::size_t a = idx.size(); a-- > 0;) {
      if (++idx[a] < cost.extent(a)) break;
      idx[a] = 0;
    }
  }
  std::vector<std::size_t> basis(rows);
  for (std::size_t a = 0; a < measures.size(); ++a) {
    for (std::size_t k = 0; k < measures[a].size(); ++k) {
      const std::size_t r = row_offset[a] + k;
      at(r, rhs) = measures[a].weights()[k];
      at(r, vars + r) = 1.0;
      basis[r] = vars + r;
    }
  }
  const double tol = 1e-11;
  const std::size_t obj = rows;

  auto do_pivot = [&](std::size_t pr, std::size_t pc) {
    const double p = at(pr, pc);
    for (std::size_t c = 0; c < cols; ++c) at(pr, c) /= p;
    for (std::size_t r = 0; r <= rows; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < cols; ++c) at(r, c) -= f * at(pr, c);
    }
    basis[pr] = pc;
  };

  std::size_t pivots = 0;
  // Bland's rule: lowest-index improving column, ties in the ratio test to the
  // lowest-index basic variable.
  auto run = [&](std::size_t allowed_cols) {
    for (;;) {
      std::size_t pc = allowed_cols;
      for (std::size_t c = 0; c < allowed_cols; ++c) {
        if (at(obj, c) < -tol) {
          pc = c;
          break;
        }
      }
      if (pc == allowed_cols) return;
      std::size_t pr = rows;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows; ++r) {
        if (at(r, pc) > tol) {
          const double ratio = at(r, rhs) / at(r, pc);
          if (pr == rows || ratio < best - 1e-15 ||
              (std::fabs(ratio - best) <= 1e-15 && basis[r] < basis[pr])) {
            best = ratio;
            pr = r;
          }
        }
      }
      if (pr == rows) throw Error(ErrorCode::InvalidArgument, "transport LP is unbounded");
      do_pivot(pr, pc);
      ++pivots;
    }
  };

  // Phase I: minimize the sum of artificials.
  for (std::size_t c = 0; c < cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += at(r, c);
    at(obj, c) = (c >= vars && c < vars + rows) ? 0.0 : -s;
  }
  run(vars + rows);
  // Drive zero-level artificials out where a structural column allows it.
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < vars) continue;
    for (std::size_t c = 0; c < vars; ++c) {
      if (std::fabs(at(r, c)) > tol) {
        do_pivot(r, c);
        break;
      }
    }
  }
  // Phase II over the structural columns only.
  for (std::size_t c = 0; c < cols; ++c) at(obj, c) = c < vars ? cost[c] : 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] >= vars) continue;
    const double cb = cost[basis[r]];
    for (std::size_t c = 0; c < cols; ++c) at(obj, c) -= cb * at(r, c);
  }
  run(vars);

  OracleResult out;
  out.pivots = pivots;
  out.plan = CouplingPlan{cost.shape(), std::vector<double>(vars, 0.0)};
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < vars) out.plan.weights[basis[r]] = std::max(0.0, at(r, rhs));
  }
  out.value = transport_cost(out.plan, cost);
  return out;
}

}  // namespace eot
