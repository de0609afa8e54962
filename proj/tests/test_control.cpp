#include <random>
#include <string>

#include <gtest/gtest.h>

#include "magstab/control.hpp"
#include "test_support.hpp"

namespace magstab {
namespace {

TEST(StateFeedback, ZeroAtEquilibrium) {
  std::mt19937_64 rng(31);
  const Vec3 b = testing::random_vec3(rng);
  EXPECT_EQ(state_fb_dipole(Quaternion::identity(), Vec3::Zero(), b, {2e11, 3e11}, 1e-3),
            Vec3::Zero());
}

TEST(StateFeedback, HandEvaluated) {
  // (e3^x)' e1 = e1 x e3 = -e2.
  const Vec3 m = state_fb_dipole(Quaternion(1, 0, 0, 0), Vec3::Zero(), Vec3(0, 0, 1), {1, 1}, 1.0);
  EXPECT_EQ(m, Vec3(0, -1, 0));
  // eps scales the rate term once and the attitude term twice.
  const Vec3 m2 = state_fb_dipole(Quaternion::identity(), Vec3(1, 0, 0), Vec3(0, 0, 1), {1, 1}, 0.5);
  EXPECT_EQ(m2, Vec3(0, -0.5, 0));
}

TEST(StateFeedback, DipoleAndTorqueOrthogonalToField) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 100; ++i) {
    const Quaternion q = testing::random_unit_quaternion(rng);
    const Vec3 w = testing::random_vec3(rng, 0.05);
    const Vec3 b = testing::random_vec3(rng, 3e-5);
    const Vec3 m = state_fb_dipole(q, w, b, testing::case_study_gains(), 1e-3);
    const Vec3 torque = -b.cross(m);
    EXPECT_LE(std::abs(m.dot(b)), 1e-12 * m.norm() * b.norm());
    EXPECT_LE(std::abs(torque.dot(b)), 1e-12 * torque.norm() * b.norm() + 1e-300);
    EXPECT_EQ(continuous_state_fb(q, w, b, testing::case_study_gains(), 1e-3), m);
  }
}

TEST(StateFeedback, ZeroEpsilonSwitchesOff) {
  std::mt19937_64 rng(33);
  const Vec3 m = state_fb_dipole(testing::random_unit_quaternion(rng), Vec3(1, 2, 3),
                                 Vec3(1, 1, 1), {5, 5}, 0.0);
  EXPECT_EQ(m, Vec3::Zero());
}

TEST(InitialObserver, CancelsFilterError) {
  const Quaternion q(0.1, -0.2, 0.3, std::sqrt(1.0 - 0.14));
  const ObserverState obs = initial_observer(q, 1e-3, 2.0);
  EXPECT_LE((q.to_vec4() - 1e-3 * 2.0 * obs.delta).norm(), 1e-15);
  EXPECT_EQ(initial_observer(q, 0.0, 2.0).delta, Vec4::Zero());
}

TEST(OutputFeedback, ZeroAtEquilibrium) {
  const OutputGains g = testing::case_study_output_gains();
  const double eps = 1e-3;
  const ObserverState obs = initial_observer(Quaternion::identity(), eps, g.lambda);
  const auto step = output_fb_step(obs, Quaternion::identity(), Vec3(1e-5, 2e-5, -3e-5), g, eps, 20.0);
  EXPECT_EQ(step.m, Vec3::Zero());
  EXPECT_LE((step.next.delta - obs.delta).norm(), 1e-12 * obs.delta.norm());
}

TEST(OutputFeedback, HandStepFromZeroObserver) {
  // delta = 0, q = identity: delta+ = T alpha q, and W(q)' q = 0 gives m = 0.
  const OutputGains g{1.0, 1.0, 1.0, 1.0};
  const auto step = output_fb_step({}, Quaternion::identity(), Vec3(0, 0, 1), g, 0.5, 20.0);
  EXPECT_EQ(step.next.delta, Vec4(0, 0, 0, 20));
  EXPECT_EQ(step.m, Vec3::Zero());
}

TEST(OutputFeedback, HandEvaluatedDipole) {
  // q = e1 (half turn), delta = 0: W(q)' q = 0, so only k1 q_v acts.
  const OutputGains g{1.0, 7.0, 3.0, 5.0};
  const Vec3 m = output_fb_dipole({}, Quaternion(1, 0, 0, 0), Vec3(0, 0, 1), g, 1.0);
  EXPECT_EQ(m, Vec3(0, -1, 0));
}

TEST(OutputFeedback, ZeroAlphaFreezesObserver) {
  std::mt19937_64 rng(34);
  const ObserverState obs{Vec4(1, 2, 3, 4)};
  const OutputGains g{1.0, 1.0, 0.0, 1.0};
  const auto step = output_fb_step(obs, testing::random_unit_quaternion(rng), Vec3(1, 0, 0), g, 0.1, 20.0);
  EXPECT_EQ(step.next.delta, obs.delta);
}

TEST(OutputFeedback, StepIsForwardEulerOfContinuousLaw) {
  std::mt19937_64 rng(35);
  const OutputGains g = testing::case_study_output_gains();
  for (int i = 0; i < 20; ++i) {
    const Quaternion q = testing::random_unit_quaternion(rng);
    const ObserverState obs{Vec4::Random() * 100.0};
    const Vec3 b = testing::random_vec3(rng, 3e-5);
    const auto step = output_fb_step(obs, q, b, g, 1e-3, 20.0);
    const auto rate = continuous_output_fb(obs, q, b, g, 1e-3);
    EXPECT_EQ(step.m, rate.m);
    EXPECT_LE((step.next.delta - (obs.delta + 20.0 * rate.delta_dot)).norm(),
              1e-14 * step.next.delta.norm());
    EXPECT_LE(std::abs(step.m.dot(b)), 1e-12 * step.m.norm() * b.norm());
  }
}

TEST(ControllerConfig, Validation) {
  ControllerConfig c;
  c.kind = ControllerKind::zoh_state;
  c.gains = StateGains{1.0, 1.0};
  c.epsilon = 1e-3;
  c.T = 20.0;
  EXPECT_NO_THROW(c.validate());

  auto message = [](const ControllerConfig& cfg) {
    try {
      cfg.validate();
    } catch (const DomainError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  ControllerConfig bad = c;
  bad.gains = StateGains{0.0, 1.0};
  EXPECT_EQ(message(bad), "k1 required and > 0");
  bad = c;
  bad.T = 0.0;
  EXPECT_FALSE(message(bad).empty());
  bad = c;
  bad.epsilon = -1.0;
  EXPECT_FALSE(message(bad).empty());
  bad = c;
  bad.kind = ControllerKind::zoh_output;
  EXPECT_FALSE(message(bad).empty());
  bad.gains = OutputGains{1.0, 1.0, 0.0, 1.0};
  EXPECT_EQ(message(bad), "alpha required and > 0");

  c.kind = ControllerKind::continuous_state;
  c.T = 0.0;
  c.epsilon = 0.0;
  EXPECT_NO_THROW(c.validate());
}

TEST(ControllerKind, Names) {
  EXPECT_EQ(to_string(ControllerKind::zoh_state), "zoh-state");
  EXPECT_EQ(to_string(ControllerKind::continuous_output), "continuous-output");
  EXPECT_TRUE(is_zoh(ControllerKind::zoh_output));
  EXPECT_FALSE(is_zoh(ControllerKind::continuous_state));
  EXPECT_TRUE(is_output_feedback(ControllerKind::continuous_output));
}

}  // namespace
}  // namespace magstab
