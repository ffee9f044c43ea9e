#pragma once

#include <utility>
#include <vector>

#include "ctgp/inputs.hpp"
#include "ctgp/liegroup.hpp"

namespace ctgp {

/// Power-spectral density of the white noise driving the velocity bias.
struct PriorHyper {
  Matrix6 Qc = Matrix6::Identity();

  static PriorHyper diagonal(const Vector6& d);
  /// Translational value on the three linear entries, rotational on the angular ones.
  static PriorHyper isotropic(double translational, double rotational);

  /// Throws HyperparameterError unless Qc is symmetric positive-definite.
  void validate() const;
};

/// A(t') = B + C t' on one input segment.
struct SegmentCoeffs {
  Matrix12 B = Matrix12::Zero();
  Matrix12 C = Matrix12::Zero();
  double duration = 0.0;
};

SegmentCoeffs system_matrix_coeffs(const InputProfile& profile, std::size_t segment_index);
SegmentCoeffs system_matrix_coeffs(const InputSegment& segment);

/// Largest step taken by one three-term Magnus exponential; longer spans are
/// composed from equal sub-steps.
constexpr double kMagnusMaxStep = 0.05;
/// Sub-steps are also shortened until step * |A| stays below this bound.
constexpr double kMagnusMaxNormStep = 0.25;

/// Transition Phi(t1, t0) of dPhi/dt' = (B + C t') Phi on local segment time.
Matrix12 magnus_transition(const SegmentCoeffs& coeffs, double t0, double t1, double max_step = kMagnusMaxStep);

/// Single three-term Magnus exponential without sub-stepping.
Matrix12 magnus_step(const SegmentCoeffs& coeffs, double t0, double t1);

Matrix12 expm(const Matrix12& m);

/// Precomputed transition, covariance and input-integral terms of one node
/// interval [t_begin, t_end].
///
/// Per-segment transitions, prefix and suffix products, and the knot values of
/// the input integral and accumulated covariance are cached so that queries at
/// interior times only integrate over the single segment containing them.
class IntervalBlocks {
 public:
  IntervalBlocks(InputProfile profile, double t_begin, double t_end, const PriorHyper& hyper);

  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  double duration() const { return t_end_ - t_begin_; }
  const InputProfile& profile() const { return profile_; }
  const PriorHyper& hyper() const { return hyper_; }

  /// Phi(t_end, t_begin).
  const Matrix12& phi() const { return suffix_.front(); }
  /// Q(t_end - t_begin).
  const Matrix12& Q() const { return knot_Q_.back(); }
  const Matrix12& Q_inv() const { return Q_inv_; }
  /// Integral of Phi(t_end, s) [v_in; a_in] over the interval.
  const Vector12& input_integral() const { return knot_integral_.back(); }

  const std::vector<Matrix12>& segment_transitions() const { return segment_phi_; }

  /// Phi(tau, t_begin).
  Matrix12 phi_from_start(double tau) const;
  /// Phi(t_end, tau).
  Matrix12 phi_to_end(double tau) const;
  /// Integral of Phi(tau, s) [v_in; a_in] over [t_begin, tau].
  Vector12 input_integral(double tau) const;
  /// Q(tau - t_begin).
  Matrix12 Q(double tau) const;

  /// Inputs at absolute time tau (right-continuous).
  InputSample inputs(double tau) const;

 private:
  struct Location {
    std::size_t segment;
    double local;
    bool at_knot;
  };
  Location locate(double tau) const;

  InputProfile profile_;
  double t_begin_;
  double t_end_;
  PriorHyper hyper_;
  std::vector<SegmentCoeffs> coeffs_;
  std::vector<Matrix12> segment_phi_;
  std::vector<Matrix12> prefix_;  // prefix_[n] = Phi(knot n, t_begin)
  std::vector<Matrix12> suffix_;  // suffix_[n] = Phi(t_end, knot n)
  std::vector<Vector12> knot_integral_;
  std::vector<Matrix12> knot_Q_;
  Matrix12 Q_inv_;
};

/// Phi(t_end, t_begin) of a whole profile as the ordered product of segment transitions.
Matrix12 interval_transition(const InputProfile& profile);

/// Integral of Phi(q, s) [v_in; a_in] over local time [0, q].
Vector12 input_integral(const InputProfile& profile, double query_t);

/// Accumulated covariance Q(q) over local time [0, q].
Matrix12 accumulated_Q(const InputProfile& profile, double query_t, const PriorHyper& hyper);

/// Local-state mean gamma(tau) = Phi(tau, t_k) [0; bias_k] + integral.
Vector12 prior_local_mean(const Twist& bias_k, const IntervalBlocks& blocks, double tau);

/// Prior mean pose and velocity bias at tau. Throws IntervalTooLongError when
/// the local pose leaves the chart (rotation angle >= pi).
std::pair<Pose, Twist> prior_mean_propagate(const Pose& T_k, const Twist& bias_k, const IntervalBlocks& blocks,
                                            double tau);
std::pair<Pose, Twist> prior_mean_propagate(const Pose& T_k, const Twist& bias_k, const InputProfile& profile,
                                            double query_t);

/// Converts a local state (xi; psi) to a global pose and bias relative to T_k.
std::pair<Pose, Twist> local_to_global(const Pose& T_k, const Vector12& gamma);

}  // namespace ctgp
