#pragma once

#include <span>

#include "eot/instance.hpp"
#include "eot/primal.hpp"

namespace eot {

struct OracleResult {
  double value = 0.0;
  CouplingPlan plan;
  std::size_t pivots = 0;
};

/// Unregularized optimal transport by the transportation simplex: northwest
/// corner start, Dantzig pricing with ties to the smallest (i, j), and a
/// switch to Bland's rule during long degenerate streaks. Costs must be
/// finite; n * m <= 1e6 (TooLarge otherwise).
OracleResult exact_ot_oracle(const CostMatrix& cost, const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu);

/// Multi-marginal optimal transport as a dense two-phase simplex with
/// Bland's rule over the tuple variables. At most 1e5 tuples.
OracleResult mm_exact_oracle(const CostTensor& cost, std::span<const DiscreteMeasure> measures);

}  // namespace eot
