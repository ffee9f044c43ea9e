#pragma once

#include <memory>
#include <vector>

#include "ctgp/factors.hpp"
#include "ctgp/interpolation.hpp"
#include "ctgp/prior.hpp"

namespace ctgp {

struct SolverSettings {
  int max_iterations = 100;
  double relative_cost_tolerance = 1e-8;
  double step_norm_tolerance = 1e-10;
  double initial_damping = 0.0;
  double damping_growth = 10.0;
  /// Damping beyond which a rejected step ends the solve as non-converged.
  double max_damping = 1e12;
  PriorJacobian prior_jacobian = PriorJacobian::Approximate;

  void validate() const;
};

/// Holds a node's pose and/or bias fixed at its initial value.
struct NodeLock {
  bool pose = false;
  bool bias = false;
};

struct Problem {
  std::vector<StateNode> nodes;
  /// One input profile per adjacent node pair, in local time of that interval.
  std::vector<InputProfile> profiles;
  PriorHyper hyper;
  std::vector<std::shared_ptr<const Factor>> factors;
  std::vector<NodeLock> locks;
  SolverSettings settings;

  void add(std::shared_ptr<const Factor> f) { factors.push_back(std::move(f)); }
  void lock(std::size_t node, bool pose = true, bool bias = false);
};

struct Solution {
  std::vector<StateNode> nodes;
  std::vector<Matrix12> node_covariances;
  /// cov(x_k, x_k+1) for each interval.
  std::vector<Matrix12> cross_covariances;
  std::vector<IntervalBlocks> intervals;
  std::vector<double> cost_history;
  bool converged = false;
  int iterations = 0;

  /// Index of the interval containing t (right-continuous at interior nodes).
  std::size_t interval_of(double t) const;
  QueryResult query(double t, bool with_covariance = false) const;
};

/// One IntervalBlocks per adjacent node pair.
std::vector<IntervalBlocks> precompute_intervals(const Problem& problem);

Solution solve(const Problem& problem);
Solution solve(const Problem& problem, std::vector<IntervalBlocks> intervals);

/// Total cost of all prior and measurement factors at the given nodes.
double total_cost(const Problem& problem, const std::vector<StateNode>& nodes,
                  const std::vector<IntervalBlocks>& intervals);

}  // namespace ctgp
