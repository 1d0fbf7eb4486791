#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <stdexcept>

#include "mavi/common.hpp"

namespace mavi::ptru {

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {}; }
  /// Rotation of `angle` about a unit axis.
  static Quaternion from_axis_angle(double ax, double ay, double az, double angle);

  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quaternion normalized() const;
  /// Same rotation with w >= 0.
  Quaternion canonical() const;
  Quaternion conjugate() const { return {w, -x, -y, -z}; }
  Quaternion operator-() const { return {-w, -x, -y, -z}; }

  friend Quaternion operator*(const Quaternion& a, const Quaternion& b);
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

/// Rotation vector (axis * angle) of a unit quaternion, shortest-path branch.
std::array<double, 3> log_map(const Quaternion& q);
Quaternion exp_map(const std::array<double, 3>& rotation_vector);

/// Rotates v by q.
std::array<double, 3> rotate(const Quaternion& q, const std::array<double, 3>& v);

struct PTRUAngles {
  double pan_rad = 0.0;
  double tilt_rad = 0.0;
  double roll_rad = 0.0;

  friend bool operator==(const PTRUAngles&, const PTRUAngles&) = default;
};

struct AxisRange {
  double min = 0.0;
  double max = 0.0;
  double clamp(double v) const { return v < min ? min : (v > max ? max : v); }
};

struct PTRUWorkspace {
  AxisRange pan{-160.0 * kPi / 180.0, 160.0 * kPi / 180.0};
  AxisRange tilt{-60.0 * kPi / 180.0, 60.0 * kPi / 180.0};
  AxisRange roll{-45.0 * kPi / 180.0, 45.0 * kPi / 180.0};

  PTRUAngles clamp(const PTRUAngles& a) const {
    return {pan.clamp(a.pan_rad), tilt.clamp(a.tilt_rad), roll.clamp(a.roll_rad)};
  }
  bool contains(const PTRUAngles& a) const;
};

/// |sin(tilt)| above this is treated as gimbal lock.
inline constexpr double kGimbalLockSin = 1.0 - 1e-9;
inline constexpr double kNormTolerance = 1e-6;

/// Head quaternion to pan/tilt/roll joint angles. q and -q give identical output.
PTRUAngles ptru_angles_from_quaternion(const Quaternion& q);

/// Composition roll(x) * tilt(y) * pan(z); left-inverted by ptru_angles_from_quaternion
/// away from gimbal lock.
Quaternion quaternion_from_ptru_angles(const PTRUAngles& a);

class NoData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HeadSample {
  double stamp_s = 0.0;
  Quaternion orientation;
};

/// Bounded ring of head samples with strictly increasing stamps.
class HeadSampleHistory {
 public:
  explicit HeadSampleHistory(std::size_t capacity = 32);

  /// Throws InvalidArgument if stamp does not advance or q is not unit-norm.
  void push(double stamp_s, const Quaternion& q);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const HeadSample& latest() const;
  const HeadSample& at(std::size_t i) const { return samples_.at(i); }
  void clear() { samples_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<HeadSample> samples_;
};

/// Constant-angular-velocity extrapolation of the latest sample by horizon_s.
Quaternion predict_head_pose(const HeadSampleHistory& history, double horizon_s);

inline constexpr double kBaselineNominalMm = 60.0;
inline constexpr double kBaselineAdjustMm = 10.0;

/// Stereo camera separation, adjustable around the nominal value.
class StereoBaseline {
 public:
  /// Clamps to [50, 70] mm, stores and returns the effective value.
  double set_baseline(double target_mm);
  double mm() const { return mm_; }

 private:
  double mm_ = kBaselineNominalMm;
};

}  // namespace mavi::ptru
