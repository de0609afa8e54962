#include <random>

#include <gtest/gtest.h>

#include "magstab/attmath.hpp"
#include "test_support.hpp"

namespace magstab {
namespace {

TEST(Skew, ExplicitEntries) {
  Mat3 expected;
  expected << 0, -3, 2,
              3, 0, -1,
              -2, 1, 0;
  EXPECT_EQ(skew(Vec3(1, 2, 3)), expected);
}

TEST(Skew, ActsAsCrossProduct) {
  EXPECT_EQ(skew(Vec3(1, 0, 0)) * Vec3(0, 1, 0), Vec3(0, 0, 1));
  EXPECT_EQ(skew(Vec3::Zero()), Mat3::Zero());
}

TEST(Skew, AntisymmetricExactly) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = testing::random_vec3(rng, 10.0);
    const Vec3 b = testing::random_vec3(rng);
    EXPECT_EQ(skew(a) + skew(a).transpose(), Mat3::Zero());
    EXPECT_NEAR((skew(a) * b - a.cross(b)).norm(), 0.0, 1e-14 * a.norm() * b.norm());
  }
}

TEST(Dcm, TargetAttitudeIsIdentity) {
  EXPECT_EQ(dcm_from_quat(Quaternion::identity()), Mat3::Identity());
}

TEST(Dcm, HalfTurnAboutX) {
  const Mat3 c = dcm_from_quat(Quaternion(1, 0, 0, 0));
  EXPECT_EQ(c, Vec3(1, -1, -1).asDiagonal().toDenseMatrix());
}

TEST(Dcm, RotationMatrixProperties) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Quaternion q = testing::random_unit_quaternion(rng);
    const Mat3 c = dcm_from_quat(q);
    EXPECT_LE((c.transpose() * c - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(c.determinant(), 1.0, 1e-12);
    EXPECT_LE((dcm_from_quat(-q) - c).norm(), 1e-15);
  }
}

TEST(Dcm, RejectsNonUnitQuaternion) {
  EXPECT_THROW(dcm_from_quat(Quaternion(0, 0, 0, 2)), DomainError);
  EXPECT_NO_THROW(dcm_from_quat(Quaternion(0, 0, 0, 1 + 1e-7)));
}

TEST(KinMatrix, AtTargetAttitude) {
  Mat43 expected = Mat43::Zero();
  expected.topRows<3>() = 0.5 * Mat3::Identity();
  EXPECT_EQ(kin_matrix(Quaternion::identity()), expected);
}

TEST(KinMatrix, HandEvaluatedProduct) {
  // 1/2 [e1 x w; -e1' w] with w = e3.
  const Vec4 qdot = kin_matrix(Quaternion(1, 0, 0, 0)) * Vec3(0, 0, 1);
  EXPECT_EQ(qdot, Vec4(0, -0.5, 0, 0));
}

TEST(KinMatrix, PreservesNorm) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Quaternion q = testing::random_unit_quaternion(rng);
    const Vec3 w = testing::random_vec3(rng, 0.1);
    EXPECT_LE(std::abs(q.to_vec4().dot(kin_matrix(q) * w)), 1e-14 * w.norm());
  }
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize(Quaternion(0, 0, 0, 2)), Quaternion::identity());
  const Quaternion half = normalize(Quaternion(1, 1, 1, 1));
  EXPECT_EQ(half.to_vec4(), Vec4::Constant(0.5));

  std::mt19937_64 rng(4);
  const Quaternion q = testing::random_unit_quaternion(rng);
  EXPECT_LE((normalize(q).to_vec4() - q.to_vec4()).norm(), 1e-15);
}

TEST(Normalize, RejectsZero) {
  EXPECT_THROW(normalize(Quaternion(0, 0, 0, 0)), DomainError);
  EXPECT_THROW(normalize(Quaternion(0, 0, 0, 1e-13)), DomainError);
}

}  // namespace
}  // namespace magstab
