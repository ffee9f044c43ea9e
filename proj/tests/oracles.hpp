#pragma once

#include <functional>
#include <random>

#include <Eigen/Core>
#include <Eigen/LU>

#include "ctgp/factors.hpp"
#include "ctgp/liegroup.hpp"
#include "ctgp/prior.hpp"

namespace oracle {

using ctgp::Matrix12;
using ctgp::Matrix6;
using ctgp::Twist;
using ctgp::Vector12;

inline Twist random_twist(std::mt19937_64& rng, double lin, double ang) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Vector3d r(u(rng), u(rng), u(rng));
  Eigen::Vector3d p(u(rng), u(rng), u(rng));
  Twist x;
  x << lin * r, ang * p.normalized() * std::abs(u(rng));
  return x;
}

inline Twist random_ball(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Twist x;
  for (int i = 0; i < 6; ++i) x(i) = u(rng);
  return x.normalized() * radius * std::abs(u(rng));
}

// Truncated Taylor series of a square matrix exponential.
template <typename M>
M taylor_expm(const M& a, int terms = 30) {
  M sum = M::Identity(a.rows(), a.cols());
  M term = M::Identity(a.rows(), a.cols());
  for (int n = 1; n < terms; ++n) {
    term = term * a / static_cast<double>(n);
    sum += term;
  }
  return sum;
}

// exp(a) by halving until small, Taylor, then repeated squaring.
template <typename M>
M scaled_taylor_expm(const M& a) {
  int s = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.125) {
    norm *= 0.5;
    ++s;
  }
  M r = taylor_expm<M>(a / std::ldexp(1.0, s), 25);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

inline Matrix6 jacobian_series(const Twist& x, int terms = 30) {
  const Matrix6 X = ctgp::curlywedge(x);
  Matrix6 sum = Matrix6::Identity();
  Matrix6 term = Matrix6::Identity();
  for (int n = 1; n < terms; ++n) {
    term = term * X / static_cast<double>(n + 1);
    sum += term;
  }
  return sum;
}

inline Eigen::Matrix4d se3_matrix_exp(const Twist& x) {
  return taylor_expm<Eigen::Matrix4d>(ctgp::wedge(x), 30);
}

inline Matrix12 system_matrix(const ctgp::InputSegment& s, double t) {
  Matrix12 A = Matrix12::Zero();
  const Matrix6 v = 0.5 * ctgp::curlywedge(s.v(t));
  A.topLeftCorner<6, 6>() = v;
  A.topRightCorner<6, 6>().setIdentity();
  A.bottomLeftCorner<6, 6>() = 0.5 * ctgp::curlywedge(s.a(t));
  A.bottomRightCorner<6, 6>() = -v;
  return A;
}

// RK4 on dPhi/dt = A(t) Phi, dgamma/dt = A gamma + u, dP/dt = A P + P A^T + L Qc L^T
// from t0 to t1 of one segment, fixed step h.
struct SegmentOde {
  Matrix12 phi = Matrix12::Identity();
  Vector12 gamma = Vector12::Zero();
  Matrix12 P = Matrix12::Zero();
};

inline SegmentOde rk4_segment(const ctgp::InputSegment& s, double t0, double t1, double h, const Matrix6& Qc,
                              SegmentOde x0 = {}) {
  Matrix12 LQL = Matrix12::Zero();
  LQL.bottomRightCorner<6, 6>() = Qc;
  auto f = [&](double t, const SegmentOde& y) {
    const Matrix12 A = system_matrix(s, t);
    Vector12 u;
    u << s.v(t), s.a(t);
    SegmentOde d;
    d.phi = A * y.phi;
    d.gamma = A * y.gamma + u;
    d.P = A * y.P + y.P * A.transpose() + LQL;
    return d;
  };
  auto axpy = [](const SegmentOde& y, double c, const SegmentOde& d) {
    SegmentOde r;
    r.phi = y.phi + c * d.phi;
    r.gamma = y.gamma + c * d.gamma;
    r.P = y.P + c * d.P;
    return r;
  };
  const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / h - 1e-9)));
  const double dt = (t1 - t0) / n;
  SegmentOde y = x0;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * dt;
    const SegmentOde k1 = f(t, y);
    const SegmentOde k2 = f(t + 0.5 * dt, axpy(y, 0.5 * dt, k1));
    const SegmentOde k3 = f(t + 0.5 * dt, axpy(y, 0.5 * dt, k2));
    const SegmentOde k4 = f(t + dt, axpy(y, dt, k3));
    y.phi += dt / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
    y.gamma += dt / 6.0 * (k1.gamma + 2.0 * k2.gamma + 2.0 * k3.gamma + k4.gamma);
    y.P += dt / 6.0 * (k1.P + 2.0 * k2.P + 2.0 * k3.P + k4.P);
  }
  return y;
}

// Same ODE over a whole profile, segment by segment, up to local time q.
inline SegmentOde rk4_profile(const ctgp::InputProfile& p, double q, double h, const Matrix6& Qc) {
  SegmentOde y;
  for (std::size_t n = 0; n < p.size(); ++n) {
    const double a = p.knot(n);
    if (a >= q) break;
    const double b = std::min(p.knot(n + 1), q);
    y = rk4_segment(p.segments()[n], 0.0, b - a, h, Qc, y);
  }
  return y;
}

// Transition only, cheaper.
inline Matrix12 rk4_transition(const ctgp::InputSegment& s, double t0, double t1, double h) {
  const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / h - 1e-9)));
  const double dt = (t1 - t0) / n;
  Matrix12 y = Matrix12::Identity();
  for (int i = 0; i < n; ++i) {
    const double t = t0 + i * dt;
    const Matrix12 A0 = system_matrix(s, t);
    const Matrix12 Am = system_matrix(s, t + 0.5 * dt);
    const Matrix12 A1 = system_matrix(s, t + dt);
    const Matrix12 k1 = A0 * y;
    const Matrix12 k2 = Am * (y + 0.5 * dt * k1);
    const Matrix12 k3 = Am * (y + 0.5 * dt * k2);
    const Matrix12 k4 = A1 * (y + dt * k3);
    y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

// Adaptive Simpson quadrature on a vector-valued integrand.
template <typename V>
V adaptive_simpson(const std::function<V(double)>& f, double a, double b, double tol, int depth = 30) {
  const double m = 0.5 * (a + b);
  const V fa = f(a), fb = f(b), fm = f(m);
  const V whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  std::function<V(double, double, const V&, const V&, const V&, const V&, double, int)> rec =
      [&](double a_, double b_, const V& fa_, const V& fm_, const V& fb_, const V& whole_, double tol_, int d) -> V {
    const double m_ = 0.5 * (a_ + b_);
    const double lm = 0.5 * (a_ + m_), rm = 0.5 * (m_ + b_);
    const V flm = f(lm), frm = f(rm);
    const V left = (m_ - a_) / 6.0 * (fa_ + 4.0 * flm + fm_);
    const V right = (b_ - m_) / 6.0 * (fm_ + 4.0 * frm + fb_);
    const V diff = left + right - whole_;
    if (d <= 0 || diff.cwiseAbs().maxCoeff() <= 15.0 * tol_) return left + right + diff / 15.0;
    return rec(a_, m_, fa_, flm, fm_, left, 0.5 * tol_, d - 1) + rec(m_, b_, fm_, frm, fb_, right, 0.5 * tol_, d - 1);
  };
  return rec(a, b, fa, fm, fb, whole, tol, depth);
}

// Central finite-difference Jacobian of a factor with respect to node perturbations.
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const std::vector<ctgp::StateNode>&)>& err,
                                   const std::vector<ctgp::StateNode>& nodes, std::size_t node, double h = 1e-6) {
  const Eigen::VectorXd e0 = err(nodes);
  Eigen::MatrixXd J(e0.size(), 12);
  for (int i = 0; i < 12; ++i) {
    Vector12 d = Vector12::Zero();
    d(i) = h;
    auto plus = nodes, minus = nodes;
    ctgp::apply_update(plus[node], d);
    ctgp::apply_update(minus[node], -d);
    J.col(i) = (err(plus) - err(minus)) / (2.0 * h);
  }
  return J;
}

inline ctgp::InputProfile random_profile(std::mt19937_64& rng, double duration, int segments, double v_norm,
                                         double a_norm, bool velocity = true, bool accel = true) {
  std::vector<ctgp::InputSegment> segs;
  const double d = duration / segments;
  Twist v = velocity ? random_ball(rng, v_norm) : Twist::Zero();
  Twist a = accel ? random_ball(rng, a_norm) : Twist::Zero();
  for (int i = 0; i < segments; ++i) {
    ctgp::InputSegment s;
    s.duration = d;
    s.v_start = v;
    s.a_start = a;
    v = velocity ? random_ball(rng, v_norm) : Twist::Zero();
    a = accel ? random_ball(rng, a_norm) : Twist::Zero();
    s.v_end = v;
    s.a_end = a;
    segs.push_back(s);
  }
  return ctgp::InputProfile(segs);
}

}  // namespace oracle
