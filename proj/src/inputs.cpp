#include "ctgp/inputs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ctgp/errors.hpp"

namespace ctgp {

InputProfile::InputProfile(std::vector<InputSegment> segments, double max_segment) {
  if (segments.empty()) throw DegenerateInputError("input profile needs at least one segment");
  if (!(max_segment > 0.0)) throw DomainError("max segment duration must be positive");
  for (const auto& s : segments) {
    if (!(s.duration > 0.0) || !std::isfinite(s.duration))
      throw DomainError("input segment duration must be positive");
    if (!s.v_start.allFinite() || !s.v_end.allFinite() || !s.a_start.allFinite() || !s.a_end.allFinite())
      throw DomainError("input segment has non-finite values");
    const int pieces = static_cast<int>(std::ceil(s.duration / max_segment - 1e-9));
    if (pieces <= 1) {
      segments_.push_back(s);
      continue;
    }
    const double d = s.duration / pieces;
    for (int i = 0; i < pieces; ++i) {
      const double t0 = i * d, t1 = (i + 1 == pieces) ? s.duration : (i + 1) * d;
      InputSegment p;
      p.v_start = s.v(t0);
      p.a_start = s.a(t0);
      p.v_end = (i + 1 == pieces) ? s.v_end : s.v(t1);
      p.a_end = (i + 1 == pieces) ? s.a_end : s.a(t1);
      p.duration = t1 - t0;
      segments_.push_back(p);
    }
  }
  knots_.reserve(segments_.size() + 1);
  for (const auto& s : segments_) knots_.push_back(knots_.back() + s.duration);
  total_ = knots_.back();
}

InputProfile InputProfile::zero(double duration, double max_segment) {
  return constant(duration, Twist::Zero(), Twist::Zero(), max_segment);
}

InputProfile InputProfile::constant(double duration, const Twist& v, const Twist& a, double max_segment) {
  InputSegment s{v, v, a, a, duration};
  return InputProfile({s}, max_segment);
}

std::size_t InputProfile::locate(double t) const {
  const auto it = std::upper_bound(knots_.begin() + 1, knots_.end() - 1, t);
  return static_cast<std::size_t>(it - (knots_.begin() + 1));
}

InputSample InputProfile::evaluate(double t) const {
  if (segments_.empty()) throw DomainError("empty input profile");
  if (t < 0.0 || t > total_ + 1e-12 * std::max(1.0, total_)) throw DomainError("query outside input profile");
  const std::size_t i = locate(t);
  const double tl = std::clamp(t - knots_[i], 0.0, segments_[i].duration);
  return {segments_[i].v(tl), segments_[i].a(tl)};
}

InputSample InputProfile::evaluate_left(double t) const {
  const std::size_t i = locate(t);
  if (i > 0 && t == knots_[i]) return {segments_[i - 1].v_end, segments_[i - 1].a_end};
  return evaluate(t);
}

bool InputProfile::is_zero() const {
  return std::all_of(segments_.begin(), segments_.end(), [](const InputSegment& s) {
    return s.v_start.isZero(0.0) && s.v_end.isZero(0.0) && s.a_start.isZero(0.0) && s.a_end.isZero(0.0);
  });
}

namespace {

InputSample sample_at(const std::vector<double>& times, const std::vector<Twist>& v, const std::vector<Twist>& a,
                      std::size_t i, double t) {
  const double w = (t - times[i]) / (times[i + 1] - times[i]);
  InputSample s;
  s.v = (1.0 - w) * v[i] + w * v[i + 1];
  if (!a.empty()) s.a = (1.0 - w) * a[i] + w * a[i + 1];
  if (w == 0.0) {
    s.v = v[i];
    if (!a.empty()) s.a = a[i];
  } else if (w == 1.0) {
    s.v = v[i + 1];
    if (!a.empty()) s.a = a[i + 1];
  }
  return s;
}

}  // namespace

InputProfile from_samples(const std::vector<double>& times, const std::vector<Twist>& v_samples,
                          const std::vector<Twist>& a_samples, double t0, double t1, double max_segment) {
  if (times.size() < 2) throw DegenerateInputError("need at least two input samples");
  if (v_samples.size() != times.size() || (!a_samples.empty() && a_samples.size() != times.size()))
    throw DegenerateInputError("sample count mismatch");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DegenerateInputError("sample times must be strictly increasing");
  if (!(t1 > t0)) throw DomainError("empty input interval");
  if (t0 < times.front() || t1 > times.back()) throw CoverageError("interval not covered by input samples");

  std::size_t i = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t0) - times.begin());
  i = std::min(i, times.size() - 1) - 1;
  std::vector<InputSegment> segs;
  double start = t0;
  while (start < t1) {
    const double end = std::min(times[i + 1], t1);
    if (end > start) {
      const InputSample s0 = sample_at(times, v_samples, a_samples, i, start);
      const InputSample s1 = sample_at(times, v_samples, a_samples, i, end);
      segs.push_back({s0.v, s1.v, s0.a, s1.a, end - start});
    }
    start = end;
    if (i + 2 < times.size()) ++i;
    else break;
  }
  return InputProfile(std::move(segs), max_segment);
}

InputProfile from_samples(const InputLog& log, double t0, double t1, double max_segment) {
  return from_samples(log.times, log.v, log.a, t0, t1, max_segment);
}

InputLog read_input_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open input log: " + path);
  InputLog log;
  std::string line;
  bool has_accel = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace_if(line.begin(), line.end(), [](char c) { return c == ',' || c == ';' || c == '\t'; }, ' ');
    std::istringstream ss(line);
    std::vector<double> vals;
    std::string tok;
    bool numeric = true;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(tok, &used));
        if (used != tok.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
      if (!numeric) break;
    }
    if (!numeric || vals.empty()) continue;
    if (vals.size() != 7 && vals.size() != 13) throw ConfigError("input log row must have 7 or 13 columns");
    log.times.push_back(vals[0]);
    log.v.emplace_back(Eigen::Map<const Twist>(vals.data() + 1));
    if (vals.size() == 13) {
      has_accel = true;
      log.a.emplace_back(Eigen::Map<const Twist>(vals.data() + 7));
    } else {
      log.a.emplace_back(Twist::Zero());
    }
  }
  if (!has_accel) log.a.clear();
  return log;
}

void write_input_log(const std::string& path, const InputLog& log) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write input log: " + path);
  out << "time,v1,v2,v3,v4,v5,v6,a1,a2,a3,a4,a5,a6\n" << std::setprecision(17);
  for (std::size_t i = 0; i < log.times.size(); ++i) {
    out << log.times[i];
    for (int j = 0; j < 6; ++j) out << ',' << log.v[i](j);
    for (int j = 0; j < 6; ++j) out << ',' << (log.a.empty() ? 0.0 : log.a[i](j));
    out << '\n';
  }
}

}  // namespace ctgp
