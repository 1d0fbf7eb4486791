#include "mavi/ptru.hpp"

#include <algorithm>

namespace mavi::ptru {

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quaternion Quaternion::from_axis_angle(double ax, double ay, double az, double angle) {
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), ax * s, ay * s, az * s};
}

Quaternion Quaternion::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize zero quaternion");
  return {w / n, x / n, y / n, z / n};
}

Quaternion Quaternion::canonical() const { return w < 0.0 ? -*this : *this; }

std::array<double, 3> log_map(const Quaternion& q_in) {
  const Quaternion q = q_in.canonical();
  const double vn = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
  if (vn < 1e-300) return {0.0, 0.0, 0.0};
  const double angle = 2.0 * std::atan2(vn, q.w);
  const double k = angle / vn;
  return {q.x * k, q.y * k, q.z * k};
}

Quaternion exp_map(const std::array<double, 3>& v) {
  const double angle = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (angle < 1e-300) return Quaternion::identity();
  return Quaternion::from_axis_angle(v[0] / angle, v[1] / angle, v[2] / angle, angle);
}

std::array<double, 3> rotate(const Quaternion& q, const std::array<double, 3>& v) {
  const Quaternion p{0.0, v[0], v[1], v[2]};
  const Quaternion r = q * p * q.conjugate();
  return {r.x, r.y, r.z};
}

bool PTRUWorkspace::contains(const PTRUAngles& a) const {
  return a.pan_rad >= pan.min && a.pan_rad <= pan.max && a.tilt_rad >= tilt.min &&
         a.tilt_rad <= tilt.max && a.roll_rad >= roll.min && a.roll_rad <= roll.max;
}

// Every term is quadratic in the components, so q and -q evaluate bit-identically.
PTRUAngles ptru_angles_from_quaternion(const Quaternion& q) {
  if (!std::isfinite(q.norm()) || std::abs(q.norm() - 1.0) > kNormTolerance)
    throw InvalidArgument("head quaternion must be unit-norm");
  const double ww = q.w * q.w;
  const double xx = q.x * q.x;
  const double yy = q.y * q.y;
  const double zz = q.z * q.z;

  const double sin_tilt = std::clamp(2.0 * (q.x * q.z + q.w * q.y), -1.0, 1.0);
  PTRUAngles a;
  a.tilt_rad = std::asin(sin_tilt);
  if (std::abs(sin_tilt) > kGimbalLockSin) {
    // Pan and roll share one axis here; pan is pinned to zero.
    a.pan_rad = 0.0;
    a.roll_rad = std::atan2(2.0 * (q.y * q.z + q.w * q.x), ww - xx + yy - zz);
    return a;
  }
  a.pan_rad = std::atan2(-2.0 * (q.x * q.y - q.w * q.z), ww + xx - yy - zz);
  a.roll_rad = std::atan2(-2.0 * (q.y * q.z - q.w * q.x), ww - xx - yy + zz);
  return a;
}

Quaternion quaternion_from_ptru_angles(const PTRUAngles& a) {
  require_finite(a.pan_rad, "pan");
  require_finite(a.tilt_rad, "tilt");
  require_finite(a.roll_rad, "roll");
  const Quaternion roll = Quaternion::from_axis_angle(1.0, 0.0, 0.0, a.roll_rad);
  const Quaternion tilt = Quaternion::from_axis_angle(0.0, 1.0, 0.0, a.tilt_rad);
  const Quaternion pan = Quaternion::from_axis_angle(0.0, 0.0, 1.0, a.pan_rad);
  return (roll * tilt * pan).normalized().canonical();
}

HeadSampleHistory::HeadSampleHistory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw InvalidArgument("head history capacity must be >= 1");
}

void HeadSampleHistory::push(double stamp_s, const Quaternion& q) {
  require_finite(stamp_s, "head sample stamp");
  if (!samples_.empty() && !(stamp_s > samples_.back().stamp_s))
    throw InvalidArgument("head sample stamps must be strictly increasing");
  if (!std::isfinite(q.norm()) || std::abs(q.norm() - 1.0) > kNormTolerance)
    throw InvalidArgument("head sample must be unit-norm");
  samples_.push_back({stamp_s, q.normalized()});
  while (samples_.size() > capacity_) samples_.pop_front();
}

const HeadSample& HeadSampleHistory::latest() const {
  if (samples_.empty()) throw NoData("head sample history is empty");
  return samples_.back();
}

Quaternion predict_head_pose(const HeadSampleHistory& history, double horizon_s) {
  if (history.empty()) throw NoData("head sample history is empty");
  if (!(horizon_s >= 0.0)) throw InvalidArgument("prediction horizon must be >= 0");
  const HeadSample& last = history.latest();
  if (history.size() < 2 || horizon_s == 0.0) return last.orientation;

  const HeadSample& prev = history.at(history.size() - 2);
  const double dt = last.stamp_s - prev.stamp_s;
  // World-frame increment over the last interval, scaled to the horizon.
  const auto delta = log_map(last.orientation * prev.orientation.conjugate());
  const double k = horizon_s / dt;
  const Quaternion step = exp_map({delta[0] * k, delta[1] * k, delta[2] * k});
  return (step * last.orientation).normalized();
}

double StereoBaseline::set_baseline(double target_mm) {
  require_finite(target_mm, "baseline");
  mm_ = std::clamp(target_mm, kBaselineNominalMm - kBaselineAdjustMm,
                   kBaselineNominalMm + kBaselineAdjustMm);
  return mm_;
}

}  // namespace mavi::ptru
