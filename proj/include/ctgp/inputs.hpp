#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ctgp/liegroup.hpp"

namespace ctgp {

/// One linear piece of the velocity and acceleration inputs on local time
/// [0, duration].
struct InputSegment {
  Twist v_start = Twist::Zero();
  Twist v_end = Twist::Zero();
  Twist a_start = Twist::Zero();
  Twist a_end = Twist::Zero();
  double duration = 0.0;

  Twist v(double t) const { return v_start + (t / duration) * (v_end - v_start); }
  Twist a(double t) const { return a_start + (t / duration) * (a_end - a_start); }
  Twist v_slope() const { return (v_end - v_start) / duration; }
  Twist a_slope() const { return (a_end - a_start) / duration; }
};

struct InputSample {
  Twist v = Twist::Zero();
  Twist a = Twist::Zero();
};

/// Piecewise-linear inputs tiling one node interval, expressed in local time.
///
/// Segments longer than `max_segment` are split evenly at construction.
/// Evaluation is right-continuous at interior knots.
class InputProfile {
 public:
  static constexpr double kDefaultMaxSegment = 0.5;

  InputProfile() = default;
  explicit InputProfile(std::vector<InputSegment> segments, double max_segment = kDefaultMaxSegment);

  static InputProfile zero(double duration, double max_segment = kDefaultMaxSegment);
  static InputProfile constant(double duration, const Twist& v, const Twist& a = Twist::Zero(),
                               double max_segment = kDefaultMaxSegment);

  const std::vector<InputSegment>& segments() const { return segments_; }
  std::size_t size() const { return segments_.size(); }
  double total_duration() const { return total_; }
  /// Local start time of segment i; knot(size()) is the total duration.
  double knot(std::size_t i) const { return knots_[i]; }

  /// Index of the segment containing t (right-continuous), with t clamped
  /// to the profile.
  std::size_t locate(double t) const;

  InputSample evaluate(double t) const;
  /// Left limit at t; equals evaluate(t) away from jumps.
  InputSample evaluate_left(double t) const;

  bool is_zero() const;

 private:
  std::vector<InputSegment> segments_;
  std::vector<double> knots_{0.0};
  double total_ = 0.0;
};

/// Time-stamped input samples, e.g. an odometry log.
struct InputLog {
  std::vector<double> times;
  std::vector<Twist> v;
  std::vector<Twist> a;
};

/// Builds the profile over [t0, t1] by linearly interpolating the samples,
/// one segment per overlapping sample gap. An empty `a_samples` reads as zero.
InputProfile from_samples(const std::vector<double>& times, const std::vector<Twist>& v_samples,
                          const std::vector<Twist>& a_samples, double t0, double t1,
                          double max_segment = InputProfile::kDefaultMaxSegment);
InputProfile from_samples(const InputLog& log, double t0, double t1,
                          double max_segment = InputProfile::kDefaultMaxSegment);

/// Reads comma, semicolon, tab or space separated rows of
/// time, 6 velocity entries[, 6 acceleration entries]. Lines starting with '#'
/// or a non-numeric token are skipped.
InputLog read_input_log(const std::string& path);
void write_input_log(const std::string& path, const InputLog& log);

}  // namespace ctgp
