#include "ctgp/prior.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Cholesky>
#include <algorithm>
#include <array>
#include <cmath>

#include "ctgp/errors.hpp"

namespace ctgp {

namespace {

constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                            0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};

Matrix12 bracket(const Matrix12& a, const Matrix12& b) { return a * b - b * a; }

// Integral of Phi(q, s) u(s) and Phi(q, s) L Qc L^T Phi(q, s)^T over [0, q] of one segment.
void segment_integrals(const SegmentCoeffs& c, const InputSegment& seg, double q, const Matrix6& Qc,
                       Vector12* integral, Matrix12* cov) {
  if (integral) integral->setZero();
  if (cov) cov->setZero();
  if (q <= 0.0) return;
  const double half = 0.5 * q;
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    const double s = half * (kGlNodes[i] + 1.0);
    const double w = half * kGlWeights[i];
    const Matrix12 M = magnus_transition(c, s, q);
    if (integral) {
      Vector12 u;
      u << seg.v(s), seg.a(s);
      *integral += w * (M * u);
    }
    if (cov) {
      const Eigen::Matrix<double, 12, 6> ML = M.rightCols<6>();
      *cov += w * (ML * Qc * ML.transpose());
    }
  }
}

Matrix12 symmetrize(const Matrix12& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

PriorHyper PriorHyper::diagonal(const Vector6& d) {
  PriorHyper h;
  h.Qc = d.asDiagonal();
  return h;
}

PriorHyper PriorHyper::isotropic(double translational, double rotational) {
  Vector6 d;
  d << Eigen::Vector3d::Constant(translational), Eigen::Vector3d::Constant(rotational);
  return diagonal(d);
}

void PriorHyper::validate() const {
  if (!Qc.allFinite()) throw HyperparameterError("Qc has non-finite entries");
  if ((Qc - Qc.transpose()).norm() > 1e-12 * std::max(1.0, Qc.norm()))
    throw HyperparameterError("Qc must be symmetric");
  Eigen::LLT<Matrix6> llt(Qc);
  if (llt.info() != Eigen::Success) throw HyperparameterError("Qc must be positive-definite");
}

SegmentCoeffs system_matrix_coeffs(const InputSegment& segment) {
  SegmentCoeffs c;
  c.duration = segment.duration;
  const Matrix6 v0 = 0.5 * curlywedge(segment.v_start);
  const Matrix6 a0 = 0.5 * curlywedge(segment.a_start);
  const Matrix6 vs = 0.5 * curlywedge(segment.v_slope());
  const Matrix6 as = 0.5 * curlywedge(segment.a_slope());
  c.B.topLeftCorner<6, 6>() = v0;
  c.B.topRightCorner<6, 6>() = Matrix6::Identity();
  c.B.bottomLeftCorner<6, 6>() = a0;
  c.B.bottomRightCorner<6, 6>() = -v0;
  c.C.topLeftCorner<6, 6>() = vs;
  c.C.bottomLeftCorner<6, 6>() = as;
  c.C.bottomRightCorner<6, 6>() = -vs;
  return c;
}

SegmentCoeffs system_matrix_coeffs(const InputProfile& profile, std::size_t segment_index) {
  if (segment_index >= profile.size()) throw DomainError("segment index out of range");
  return system_matrix_coeffs(profile.segments()[segment_index]);
}

Matrix12 expm(const Matrix12& m) { return m.exp(); }

Matrix12 magnus_step(const SegmentCoeffs& c, double t0, double t1) {
  const double d = t1 - t0;
  if (d == 0.0) return Matrix12::Identity();
  Matrix12 omega = c.B * d;
  if (!c.C.isZero(0.0)) {
    const Matrix12 cb = bracket(c.C, c.B);
    const double d3 = d * d * d;
    omega += 0.5 * (t1 * t1 - t0 * t0) * c.C + (d3 / 12.0) * cb + (d3 * d * d / 240.0) * bracket(c.C, cb);
  }
  return expm(omega);
}

Matrix12 magnus_transition(const SegmentCoeffs& c, double t0, double t1, double max_step) {
  if (t1 < t0) throw DomainError("magnus_transition requires t0 <= t1");
  const double d = t1 - t0;
  const double norm = std::max((c.B + c.C * t0).norm(), (c.B + c.C * t1).norm());
  const int steps = std::max({1, static_cast<int>(std::ceil(d / max_step - 1e-9)),
                              static_cast<int>(std::ceil(d * norm / kMagnusMaxNormStep - 1e-9))});
  if (steps == 1) return magnus_step(c, t0, t1);
  Matrix12 phi = Matrix12::Identity();
  const double h = d / steps;
  for (int i = 0; i < steps; ++i) {
    const double a = t0 + i * h;
    const double b = (i + 1 == steps) ? t1 : t0 + (i + 1) * h;
    phi = magnus_step(c, a, b) * phi;
  }
  return phi;
}

IntervalBlocks::IntervalBlocks(InputProfile profile, double t_begin, double t_end, const PriorHyper& hyper)
    : profile_(std::move(profile)), t_begin_(t_begin), t_end_(t_end), hyper_(hyper) {
  hyper_.validate();
  if (!(t_end > t_begin)) throw WiringError("node interval must have positive length");
  if (std::abs(profile_.total_duration() - (t_end - t_begin)) > 1e-9 * std::max(1.0, t_end - t_begin))
    throw WiringError("input profile does not tile the node interval");
  const std::size_t N = profile_.size();
  coeffs_.reserve(N);
  segment_phi_.reserve(N);
  prefix_.assign(1, Matrix12::Identity());
  knot_integral_.assign(1, Vector12::Zero());
  knot_Q_.assign(1, Matrix12::Zero());
  for (std::size_t n = 0; n < N; ++n) {
    const InputSegment& seg = profile_.segments()[n];
    coeffs_.push_back(system_matrix_coeffs(seg));
    segment_phi_.push_back(magnus_transition(coeffs_.back(), 0.0, seg.duration));
    const Matrix12& M = segment_phi_.back();
    prefix_.push_back(M * prefix_.back());
    Vector12 I;
    Matrix12 Qs;
    segment_integrals(coeffs_.back(), seg, seg.duration, hyper_.Qc, &I, &Qs);
    knot_integral_.push_back(M * knot_integral_.back() + I);
    knot_Q_.push_back(symmetrize(M * knot_Q_.back() * M.transpose() + Qs));
  }
  suffix_.assign(N + 1, Matrix12::Identity());
  for (std::size_t n = N; n-- > 0;) suffix_[n] = suffix_[n + 1] * segment_phi_[n];
  Q_inv_ = symmetrize(knot_Q_.back().ldlt().solve(Matrix12::Identity()));
}

IntervalBlocks::Location IntervalBlocks::locate(double tau) const {
  const double span = t_end_ - t_begin_;
  const double tol = 1e-12 * std::max(1.0, std::abs(t_end_));
  if (tau < t_begin_ - tol || tau > t_end_ + tol) throw DomainError("query time outside node interval");
  const double t = std::clamp(tau - t_begin_, 0.0, span);
  const std::size_t n = profile_.locate(t);
  const double local = std::clamp(t - profile_.knot(n), 0.0, profile_.segments()[n].duration);
  if (local == 0.0) return {n, 0.0, true};
  if (local >= profile_.segments()[n].duration) return {n + 1, 0.0, true};
  return {n, local, false};
}

Matrix12 IntervalBlocks::phi_from_start(double tau) const {
  const Location l = locate(tau);
  if (l.at_knot) return prefix_[l.segment];
  return magnus_transition(coeffs_[l.segment], 0.0, l.local) * prefix_[l.segment];
}

Matrix12 IntervalBlocks::phi_to_end(double tau) const {
  const Location l = locate(tau);
  if (l.at_knot) return suffix_[l.segment];
  return suffix_[l.segment + 1] *
         magnus_transition(coeffs_[l.segment], l.local, profile_.segments()[l.segment].duration);
}

Vector12 IntervalBlocks::input_integral(double tau) const {
  const Location l = locate(tau);
  if (l.at_knot) return knot_integral_[l.segment];
  Vector12 I;
  segment_integrals(coeffs_[l.segment], profile_.segments()[l.segment], l.local, hyper_.Qc, &I, nullptr);
  return magnus_transition(coeffs_[l.segment], 0.0, l.local) * knot_integral_[l.segment] + I;
}

Matrix12 IntervalBlocks::Q(double tau) const {
  const Location l = locate(tau);
  if (l.at_knot) return knot_Q_[l.segment];
  Matrix12 Qs;
  segment_integrals(coeffs_[l.segment], profile_.segments()[l.segment], l.local, hyper_.Qc, nullptr, &Qs);
  const Matrix12 M = magnus_transition(coeffs_[l.segment], 0.0, l.local);
  return symmetrize(M * knot_Q_[l.segment] * M.transpose() + Qs);
}

InputSample IntervalBlocks::inputs(double tau) const {
  return profile_.evaluate(std::clamp(tau - t_begin_, 0.0, profile_.total_duration()));
}

Matrix12 interval_transition(const InputProfile& profile) {
  Matrix12 phi = Matrix12::Identity();
  for (std::size_t n = 0; n < profile.size(); ++n)
    phi = magnus_transition(system_matrix_coeffs(profile, n), 0.0, profile.segments()[n].duration) * phi;
  return phi;
}

Vector12 input_integral(const InputProfile& profile, double query_t) {
  return IntervalBlocks(profile, 0.0, profile.total_duration(), PriorHyper{}).input_integral(query_t);
}

Matrix12 accumulated_Q(const InputProfile& profile, double query_t, const PriorHyper& hyper) {
  return IntervalBlocks(profile, 0.0, profile.total_duration(), hyper).Q(query_t);
}

Vector12 prior_local_mean(const Twist& bias_k, const IntervalBlocks& blocks, double tau) {
  Vector12 g0 = Vector12::Zero();
  g0.tail<6>() = bias_k;
  return blocks.phi_from_start(tau) * g0 + blocks.input_integral(tau);
}

std::pair<Pose, Twist> local_to_global(const Pose& T_k, const Vector12& gamma) {
  const Twist xi = gamma.head<6>();
  if (xi.tail<3>().norm() >= 3.14159265358979323846)
    throw IntervalTooLongError("local pose exceeds the exponential chart; subdivide the interval");
  return {(exp_map(xi) * T_k).normalized(), left_jacobian(xi) * gamma.tail<6>()};
}

std::pair<Pose, Twist> prior_mean_propagate(const Pose& T_k, const Twist& bias_k, const IntervalBlocks& blocks,
                                            double tau) {
  return local_to_global(T_k, prior_local_mean(bias_k, blocks, tau));
}

std::pair<Pose, Twist> prior_mean_propagate(const Pose& T_k, const Twist& bias_k, const InputProfile& profile,
                                            double query_t) {
  const IntervalBlocks blocks(profile, 0.0, profile.total_duration(), PriorHyper{});
  return prior_mean_propagate(T_k, bias_k, blocks, query_t);
}

}  // namespace ctgp
