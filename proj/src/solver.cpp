#include "ctgp/solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ctgp/errors.hpp"

namespace ctgp {

namespace {

struct BlockSystem {
  std::vector<Matrix12> D;  // diagonal blocks
  std::vector<Matrix12> U;  // U[k] couples node k (rows) with node k+1 (columns)
  std::vector<Vector12> g;
  double cost = 0.0;

  explicit BlockSystem(std::size_t K) : D(K, Matrix12::Zero()), U(K - 1, Matrix12::Zero()), g(K, Vector12::Zero()) {}
};

void accumulate(BlockSystem& sys, const FactorEval& f) {
  const Eigen::VectorXd we = f.information * f.error;
  sys.cost += 0.5 * f.error.dot(we);
  for (std::size_t a = 0; a < f.jacobians.size(); ++a) {
    const auto& [ia, Ja] = f.jacobians[a];
    const Eigen::MatrixXd JaW = Ja.transpose() * f.information;
    sys.g[ia] += Ja.transpose() * we;
    for (std::size_t b = 0; b < f.jacobians.size(); ++b) {
      const auto& [ib, Jb] = f.jacobians[b];
      if (ia == ib) {
        sys.D[ia] += JaW * Jb;
      } else if (ib == ia + 1) {
        sys.U[ia] += JaW * Jb;
      } else if (ia != ib + 1) {
        throw WiringError("factor couples non-adjacent nodes");
      }
    }
  }
}

BlockSystem linearize(const Problem& p, const std::vector<StateNode>& nodes,
                      const std::vector<IntervalBlocks>& intervals) {
  BlockSystem sys(nodes.size());
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    FactorEval f = prior_factor_error(nodes[k], nodes[k + 1], intervals[k], p.settings.prior_jacobian);
    f.jacobians[0].first = k;
    f.jacobians[1].first = k + 1;
    accumulate(sys, f);
  }
  for (const auto& factor : p.factors) {
    for (std::size_t i : factor->node_indices())
      if (i >= nodes.size()) throw WiringError("factor references a missing node");
    accumulate(sys, factor->evaluate(nodes, intervals));
  }
  return sys;
}

void apply_locks(BlockSystem& sys, const std::vector<NodeLock>& locks) {
  const std::size_t K = sys.D.size();
  for (std::size_t k = 0; k < std::min(K, locks.size()); ++k) {
    for (int part = 0; part < 2; ++part) {
      if (!(part == 0 ? locks[k].pose : locks[k].bias)) continue;
      const int o = 6 * part;
      sys.D[k].middleRows<6>(o).setZero();
      sys.D[k].middleCols<6>(o).setZero();
      sys.D[k].block<6, 6>(o, o).setIdentity();
      sys.g[k].segment<6>(o).setZero();
      if (k + 1 < K) sys.U[k].middleRows<6>(o).setZero();
      if (k > 0) sys.U[k - 1].middleCols<6>(o).setZero();
    }
  }
}

// Block LDL^T of the tridiagonal system; S holds the Schur complements.
struct Factorization {
  std::vector<Eigen::LLT<Matrix12>> S;
};

Factorization factorize(const BlockSystem& sys, double damping) {
  const std::size_t K = sys.D.size();
  Factorization fz;
  fz.S.reserve(K);
  Matrix12 prev_inv_U;
  for (std::size_t k = 0; k < K; ++k) {
    Matrix12 Dk = sys.D[k];
    if (damping > 0.0) Dk.diagonal() += damping * sys.D[k].diagonal();
    if (k > 0) Dk -= sys.U[k - 1].transpose() * prev_inv_U;
    Dk = 0.5 * (Dk + Dk.transpose());
    fz.S.emplace_back(Dk);
    const auto& llt = fz.S.back();
    const double scale = std::max(Dk.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    const Eigen::VectorXd piv = llt.matrixLLT().diagonal();
    if (llt.info() != Eigen::Success || !piv.allFinite() || piv.cwiseAbs2().minCoeff() < 1e-14 * scale)
      throw GaugeFreedomError("normal equations are singular; add an absolute measurement or lock a node");
    if (k + 1 < K) prev_inv_U = llt.solve(sys.U[k]);
  }
  return fz;
}

std::vector<Vector12> back_substitute(const BlockSystem& sys, const Factorization& fz) {
  const std::size_t K = sys.D.size();
  std::vector<Vector12> y(K);
  for (std::size_t k = 0; k < K; ++k) {
    y[k] = -sys.g[k];
    if (k > 0) y[k] -= sys.U[k - 1].transpose() * fz.S[k - 1].solve(y[k - 1]);
  }
  std::vector<Vector12> x(K);
  for (std::size_t k = K; k-- > 0;) {
    Vector12 r = y[k];
    if (k + 1 < K) r -= sys.U[k] * x[k + 1];
    x[k] = fz.S[k].solve(r);
  }
  return x;
}

void zero_locked(Matrix12& m, const NodeLock& row, const NodeLock& col) {
  if (row.pose) m.topRows<6>().setZero();
  if (row.bias) m.bottomRows<6>().setZero();
  if (col.pose) m.leftCols<6>().setZero();
  if (col.bias) m.rightCols<6>().setZero();
}

void recover_covariances(const BlockSystem& sys, const Factorization& fz, const std::vector<NodeLock>& locks,
                         Solution& sol) {
  const std::size_t K = sys.D.size();
  sol.node_covariances.assign(K, Matrix12::Zero());
  sol.cross_covariances.assign(K - 1, Matrix12::Zero());
  sol.node_covariances[K - 1] = fz.S[K - 1].solve(Matrix12::Identity());
  for (std::size_t k = K - 1; k-- > 0;) {
    const Matrix12 G = fz.S[k].solve(sys.U[k]);
    sol.cross_covariances[k] = -G * sol.node_covariances[k + 1];
    sol.node_covariances[k] = fz.S[k].solve(Matrix12::Identity()) + G * sol.node_covariances[k + 1] * G.transpose();
  }
  const NodeLock none;
  for (std::size_t k = 0; k < K; ++k) {
    const NodeLock& lk = k < locks.size() ? locks[k] : none;
    Matrix12& c = sol.node_covariances[k];
    c = 0.5 * (c + c.transpose());
    zero_locked(c, lk, lk);
    if (k + 1 < K) zero_locked(sol.cross_covariances[k], lk, k + 1 < locks.size() ? locks[k + 1] : none);
  }
}

void validate(const Problem& p) {
  if (p.nodes.size() < 2) throw DomainError("problem needs at least two nodes");
  if (p.profiles.size() != p.nodes.size() - 1) throw WiringError("need one input profile per node interval");
  for (std::size_t k = 1; k < p.nodes.size(); ++k)
    if (!(p.nodes[k].time > p.nodes[k - 1].time)) throw WiringError("node times must be strictly increasing");
  if (p.locks.size() > p.nodes.size()) throw WiringError("more node locks than nodes");
  p.settings.validate();
  p.hyper.validate();
}

}  // namespace

void SolverSettings::validate() const {
  if (max_iterations < 1 || !(relative_cost_tolerance > 0.0) || !(step_norm_tolerance > 0.0) ||
      initial_damping < 0.0 || !(damping_growth > 1.0))
    throw DomainError("invalid solver settings");
}

void Problem::lock(std::size_t node, bool pose, bool bias) {
  if (node >= nodes.size()) throw WiringError("lock references a missing node");
  if (locks.size() < nodes.size()) locks.resize(nodes.size());
  locks[node].pose = locks[node].pose || pose;
  locks[node].bias = locks[node].bias || bias;
}

std::vector<IntervalBlocks> precompute_intervals(const Problem& problem) {
  validate(problem);
  std::vector<IntervalBlocks> out;
  out.reserve(problem.profiles.size());
  for (std::size_t k = 0; k < problem.profiles.size(); ++k)
    out.emplace_back(problem.profiles[k], problem.nodes[k].time, problem.nodes[k + 1].time, problem.hyper);
  return out;
}

double total_cost(const Problem& problem, const std::vector<StateNode>& nodes,
                  const std::vector<IntervalBlocks>& intervals) {
  double c = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k)
    c += prior_factor_error(nodes[k], nodes[k + 1], intervals[k], problem.settings.prior_jacobian).cost();
  for (const auto& f : problem.factors) c += f->evaluate(nodes, intervals).cost();
  return c;
}

Solution solve(const Problem& problem) { return solve(problem, precompute_intervals(problem)); }

Solution solve(const Problem& problem, std::vector<IntervalBlocks> intervals) {
  validate(problem);
  if (intervals.size() != problem.nodes.size() - 1) throw WiringError("interval count does not match nodes");
  const SolverSettings& s = problem.settings;
  Solution sol;
  sol.nodes = problem.nodes;
  sol.intervals = std::move(intervals);

  double damping = s.initial_damping;
  BlockSystem sys = linearize(problem, sol.nodes, sol.intervals);
  apply_locks(sys, problem.locks);
  sol.cost_history.push_back(sys.cost);

  bool done = false;
  while (!done && sol.iterations < s.max_iterations) {
    ++sol.iterations;
    bool accepted = false;
    while (true) {
      const Factorization fz = factorize(sys, damping);
      const std::vector<Vector12> dx = back_substitute(sys, fz);
      double step2 = 0.0;
      for (const auto& d : dx) step2 += d.squaredNorm();
      if (std::sqrt(step2) < s.step_norm_tolerance) {
        sol.converged = true;
        done = true;
        break;
      }
      std::vector<StateNode> candidate = sol.nodes;
      for (std::size_t k = 0; k < candidate.size(); ++k) apply_update(candidate[k], dx[k]);
      double new_cost = std::numeric_limits<double>::infinity();
      try {
        new_cost = total_cost(problem, candidate, sol.intervals);
      } catch (const IllConditionedError&) {
      } catch (const IntervalTooLongError&) {
      }
      const double cost = sol.cost_history.back();
      if (std::isfinite(new_cost) && new_cost < cost) {
        sol.nodes = std::move(candidate);
        sol.cost_history.push_back(new_cost);
        accepted = true;
        damping = damping / s.damping_growth < 1e-12 ? 0.0 : damping / s.damping_growth;
        if (cost - new_cost <= s.relative_cost_tolerance * cost) {
          sol.converged = true;
          done = true;
        }
        break;
      }
      if (std::isfinite(new_cost) && new_cost - cost <= s.relative_cost_tolerance * cost) {
        sol.converged = true;
        done = true;
        break;
      }
      damping = damping == 0.0 ? 1e-6 : damping * s.damping_growth;
      if (damping > s.max_damping) {
        done = true;
        break;
      }
    }
    if (accepted) {
      sys = linearize(problem, sol.nodes, sol.intervals);
      apply_locks(sys, problem.locks);
    }
  }
  recover_covariances(sys, factorize(sys, 0.0), problem.locks, sol);
  return sol;
}

std::size_t Solution::interval_of(double t) const {
  if (nodes.size() < 2) throw DomainError("solution has no intervals");
  const double tol = 1e-12 * std::max(1.0, std::abs(nodes.back().time));
  if (t < nodes.front().time - tol || t > nodes.back().time + tol) throw DomainError("query time outside solution");
  const auto it = std::upper_bound(nodes.begin() + 1, nodes.end() - 1, t,
                                   [](double v, const StateNode& n) { return v < n.time; });
  return static_cast<std::size_t>(it - (nodes.begin() + 1));
}

QueryResult Solution::query(double t, bool with_covariance) const {
  const std::size_t k = interval_of(t);
  const double tau = std::clamp(t, nodes[k].time, nodes[k + 1].time);
  QueryResult q = interpolate_mean(nodes[k], nodes[k + 1], intervals[k], tau);
  if (with_covariance && !node_covariances.empty()) {
    NodePairCovariance c{node_covariances[k], node_covariances[k + 1], cross_covariances[k]};
    bool approx = false;
    q.covariance = interpolate_covariance(nodes[k], nodes[k + 1], c, intervals[k], tau, &approx);
    q.covariance_approximate = approx;
  }
  return q;
}

}  // namespace ctgp
