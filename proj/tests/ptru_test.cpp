#include "mavi/ptru.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <random>

using namespace mavi;
using namespace mavi::ptru;

namespace {

Eigen::Matrix3d rotation(const Quaternion& q) {
  return Eigen::Quaterniond(q.w, q.x, q.y, q.z).toRotationMatrix();
}

// Oracle: R = Rx(roll) * Ry(tilt) * Rz(pan) read off the rotation matrix.
PTRUAngles angles_oracle(const Quaternion& q) {
  const Eigen::Matrix3d R = rotation(q);
  return {std::atan2(-R(0, 1), R(0, 0)), std::asin(std::clamp(R(0, 2), -1.0, 1.0)),
          std::atan2(-R(1, 2), R(2, 2))};
}

Eigen::Matrix3d matrix_from_angles(const PTRUAngles& a) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  return (AngleAxisd(a.roll_rad, Vector3d::UnitX()) * AngleAxisd(a.tilt_rad, Vector3d::UnitY()) *
          AngleAxisd(a.pan_rad, Vector3d::UnitZ()))
      .toRotationMatrix();
}

const double kHalf = std::sqrt(0.5);

}  // namespace

TEST(PtruAnglesFromQuaternion, Identity) {
  const PTRUAngles a = ptru_angles_from_quaternion(Quaternion::identity());
  EXPECT_EQ(a.pan_rad, 0.0);
  EXPECT_EQ(a.tilt_rad, 0.0);
  EXPECT_EQ(a.roll_rad, 0.0);
}

TEST(PtruAnglesFromQuaternion, Yaw90) {
  const Quaternion q{kHalf, 0, 0, kHalf};
  const PTRUAngles a = ptru_angles_from_quaternion(q);
  EXPECT_NEAR(a.pan_rad, kPi / 2, 1e-12);
  EXPECT_NEAR(a.tilt_rad, 0.0, 1e-12);
  EXPECT_NEAR(a.roll_rad, 0.0, 1e-12);
  const PTRUAngles o = angles_oracle(q);
  EXPECT_NEAR(o.pan_rad, kPi / 2, 1e-12);
}

TEST(PtruAnglesFromQuaternion, Pitch90GimbalLock) {
  const PTRUAngles a = ptru_angles_from_quaternion({kHalf, 0, kHalf, 0});
  EXPECT_EQ(a.pan_rad, 0.0);
  EXPECT_NEAR(a.tilt_rad, kPi / 2, 1e-12);
  EXPECT_NEAR(a.roll_rad, 0.0, 1e-12);
}

TEST(PtruAnglesFromQuaternion, GimbalLockRollAbsorbsPan) {
  // pan 0.4, tilt +-90, roll 0.3 is the same rotation as roll (0.3 +- 0.4) alone.
  for (double tilt : {kPi / 2, -kPi / 2}) {
    const Quaternion q = quaternion_from_ptru_angles({0.4, tilt, 0.3});
    const PTRUAngles a = ptru_angles_from_quaternion(q);
    EXPECT_EQ(a.pan_rad, 0.0);
    EXPECT_NEAR(a.tilt_rad, tilt, 1e-7);
    EXPECT_TRUE(matrix_from_angles(a).isApprox(rotation(q), 1e-9));
  }
}

TEST(PtruAnglesFromQuaternion, RejectsNonUnit) {
  EXPECT_THROW(ptru_angles_from_quaternion({1.1, 0, 0, 0}), InvalidArgument);
  EXPECT_THROW(ptru_angles_from_quaternion({0, 0, 0, 0}), InvalidArgument);
}

TEST(PtruAnglesFromQuaternion, MatchesRotationMatrixOracle) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n;
  for (int i = 0; i < 2000; ++i) {
    const Quaternion q = Quaternion{n(rng), n(rng), n(rng), n(rng)}.normalized();
    const PTRUAngles a = ptru_angles_from_quaternion(q);
    if (std::abs(std::sin(a.tilt_rad)) > 0.999) continue;
    const PTRUAngles o = angles_oracle(q);
    EXPECT_NEAR(angle_diff(a.pan_rad, o.pan_rad), 0.0, 1e-9);
    EXPECT_NEAR(a.tilt_rad, o.tilt_rad, 1e-9);
    EXPECT_NEAR(angle_diff(a.roll_rad, o.roll_rad), 0.0, 1e-9);
  }
}

TEST(QuaternionFromPtruAngles, Examples) {
  EXPECT_EQ(quaternion_from_ptru_angles({0, 0, 0}), Quaternion::identity());
  const Quaternion q = quaternion_from_ptru_angles({kPi / 2, 0, 0});
  EXPECT_NEAR(q.w, kHalf, 1e-15);
  EXPECT_NEAR(q.x, 0, 1e-15);
  EXPECT_NEAR(q.y, 0, 1e-15);
  EXPECT_NEAR(q.z, kHalf, 1e-15);
}

TEST(QuaternionFromPtruAngles, MatchesMatrixCompositionAndCanonical) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> a(-kPi, kPi), t(-1.48, 1.48);
  for (int i = 0; i < 1000; ++i) {
    const PTRUAngles in{a(rng), t(rng), a(rng)};
    const Quaternion q = quaternion_from_ptru_angles(in);
    EXPECT_GE(q.w, 0.0);
    EXPECT_NEAR(q.norm(), 1.0, 1e-12);
    EXPECT_TRUE(rotation(q).isApprox(matrix_from_angles(in), 1e-12));
    const PTRUAngles back = ptru_angles_from_quaternion(q);
    EXPECT_NEAR(angle_diff(back.pan_rad, in.pan_rad), 0.0, 1e-9);
    EXPECT_NEAR(back.tilt_rad, in.tilt_rad, 1e-9);
    EXPECT_NEAR(angle_diff(back.roll_rad, in.roll_rad), 0.0, 1e-9);
  }
}

TEST(PtruProperties, SignInvarianceAndTiltRange) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> n;
  for (int i = 0; i < 2000; ++i) {
    const Quaternion q = Quaternion{n(rng), n(rng), n(rng), n(rng)}.normalized();
    const PTRUAngles a = ptru_angles_from_quaternion(q);
    const PTRUAngles b = ptru_angles_from_quaternion(-q);
    EXPECT_EQ(a, b);
    EXPECT_GE(a.tilt_rad, -kPi / 2);
    EXPECT_LE(a.tilt_rad, kPi / 2);
  }
}

TEST(LogExpMap, InverseOnShortestBranch) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> c(-1.5, 1.5);
  for (int i = 0; i < 500; ++i) {
    const std::array<double, 3> v{c(rng), c(rng), c(rng)};
    const auto back = log_map(exp_map(v));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(back[k], v[k], 1e-12);
  }
  EXPECT_EQ(log_map(Quaternion::identity()), (std::array<double, 3>{0, 0, 0}));
}

TEST(HeadSampleHistory, EnforcesOrderingAndCapacity) {
  HeadSampleHistory h(3);
  h.push(0.0, Quaternion::identity());
  EXPECT_THROW(h.push(0.0, Quaternion::identity()), InvalidArgument);
  EXPECT_THROW(h.push(-1.0, Quaternion::identity()), InvalidArgument);
  EXPECT_THROW(h.push(1.0, {2, 0, 0, 0}), InvalidArgument);
  for (int i = 1; i <= 5; ++i) h.push(i, Quaternion::identity());
  EXPECT_EQ(h.size(), 3u);
  EXPECT_EQ(h.latest().stamp_s, 5.0);
  EXPECT_EQ(h.at(0).stamp_s, 3.0);
}

TEST(PredictHeadPose, EmptyHistoryIsNoData) {
  EXPECT_THROW(predict_head_pose(HeadSampleHistory{}, 0.1), NoData);
}

TEST(PredictHeadPose, ConstantHistoryReturnsLatest) {
  HeadSampleHistory h;
  const Quaternion q = quaternion_from_ptru_angles({0.3, -0.2, 0.1});
  h.push(0.0, q);
  h.push(0.1, q);
  const Quaternion p = predict_head_pose(h, 0.5);
  EXPECT_NEAR(p.w, q.w, 1e-12);
  EXPECT_NEAR(p.x, q.x, 1e-12);
  EXPECT_NEAR(p.y, q.y, 1e-12);
  EXPECT_NEAR(p.z, q.z, 1e-12);
}

TEST(PredictHeadPose, SingleSampleOrZeroHorizonIsExactLatest) {
  HeadSampleHistory h;
  const Quaternion a = quaternion_from_ptru_angles({0.1, 0, 0});
  const Quaternion b = quaternion_from_ptru_angles({0.2, 0.05, 0});
  h.push(0.0, a);
  EXPECT_EQ(predict_head_pose(h, 0.3), h.latest().orientation);
  h.push(0.1, b);
  EXPECT_EQ(predict_head_pose(h, 0.0), h.latest().orientation);
}

TEST(PredictHeadPose, ExtrapolatesYawRate) {
  HeadSampleHistory h;
  h.push(0.0, quaternion_from_ptru_angles({0.2, 0, 0}));
  h.push(0.1, quaternion_from_ptru_angles({0.3, 0, 0}));
  const Quaternion p = predict_head_pose(h, 0.1);
  const Quaternion expected = quaternion_from_ptru_angles({0.4, 0, 0});
  EXPECT_NEAR(p.w, expected.w, 1e-9);
  EXPECT_NEAR(p.z, expected.z, 1e-9);
  EXPECT_NEAR(ptru_angles_from_quaternion(p).pan_rad, 0.4, 1e-9);
  EXPECT_NEAR(p.norm(), 1.0, 1e-12);
}

TEST(PredictHeadPose, OutputIsUnitNorm) {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> hz(0, 1);
  HeadSampleHistory h(4);
  double t = 0;
  for (int i = 0; i < 500; ++i) {
    t += 0.01 + hz(rng) * 0.05;
    h.push(t, Quaternion{n(rng), n(rng), n(rng), n(rng)}.normalized());
    EXPECT_NEAR(predict_head_pose(h, hz(rng)).norm(), 1.0, 1e-12);
  }
}

TEST(StereoBaseline, ClampsToAdjustmentRange) {
  StereoBaseline b;
  EXPECT_EQ(b.mm(), 60.0);
  EXPECT_EQ(b.set_baseline(60.0), 60.0);
  EXPECT_EQ(b.set_baseline(80.0), 70.0);
  EXPECT_EQ(b.mm(), 70.0);
  EXPECT_EQ(b.set_baseline(40.0), 50.0);
  EXPECT_EQ(b.set_baseline(63.5), 63.5);
  EXPECT_THROW(b.set_baseline(NAN), InvalidArgument);
}
