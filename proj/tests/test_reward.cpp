#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "inlab/error.hpp"
#include "inlab/reward.hpp"

using namespace inlab;

namespace {

constexpr double kTol = 1e-12;

// Hand forms, component by component.
double o_mimic(const std::vector<double>& th, const std::vector<double>& ref) {
  double err = 0.0;
  for (std::size_t i = 0; i < th.size(); ++i) err += std::fabs(th[i] - ref[i]);
  return 1.2 - err / 50.0;
}
double o_balance(double p, double y, double r) { return -(std::fabs(p) + std::fabs(y) + std::fabs(r)) / 10.0; }
double o_vstep(double f, double l, double v) { return -std::fabs(f) - std::fabs(l) - std::fabs(v); }
double o_vwalk(double f, double l, double v) { return f - std::fabs(l) - std::fabs(v); }
double o_vjump(double f, double l, double v) { return f - std::fabs(l) + std::fabs(v); }
double o_sync(const std::vector<double>& th6) {
  return -(std::fabs(th6[0] - th6[3]) + std::fabs(th6[1] - th6[4]) + std::fabs(th6[2] - th6[5])) / 20.0;
}

struct Draw {
  std::vector<double> theta, ref;
  double p, y, r, vf, vl, vv;
};

Draw draw(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> ang(-90, 90), att(-15, 15), vel(-2, 2);
  Draw d;
  for (int i = 0; i < n; ++i) {
    d.theta.push_back(ang(rng));
    d.ref.push_back(ang(rng));
  }
  d.p = att(rng);
  d.y = att(rng);
  d.r = att(rng);
  d.vf = vel(rng);
  d.vl = vel(rng);
  d.vv = vel(rng);
  return d;
}

RewardInputs inputs(const Draw& d, RobotKind robot) {
  RewardInputs in;
  in.theta = d.theta;
  in.theta_ref = d.ref;
  in.pitch = d.p;
  in.yaw = d.y;
  in.roll = d.r;
  in.v_forward = d.vf;
  in.v_lateral = d.vl;
  in.v_vertical = d.vv;
  in.robot = robot;
  return in;
}

}  // namespace

TEST(Mimic, WorkedValues) {
  const std::vector<double> z{0, 0, 0};
  EXPECT_NEAR(reward_mimic(z, z), 1.2, kTol);
  EXPECT_NEAR(reward_mimic(std::vector<double>{4, -6, 0}, z), 1.0, kTol);
  EXPECT_NEAR(reward_mimic(std::vector<double>{30, 0, -30}, z), 0.0, kTol);
}

TEST(Mimic, RandomCasesBoundedAndMonotone) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> bump(1e-3, 5.0);
  std::uniform_int_distribution<int> pick(0, 7);
  for (int i = 0; i < 1000; ++i) {
    auto d = draw(rng, 8);
    const double r = reward_mimic(d.theta, d.ref);
    ASSERT_NEAR(r, o_mimic(d.theta, d.ref), kTol);
    ASSERT_LT(r, 1.2);
    // Push one joint further from its reference.
    const int j = pick(rng);
    d.theta[j] += (d.theta[j] >= d.ref[j] ? 1.0 : -1.0) * bump(rng);
    ASSERT_LT(reward_mimic(d.theta, d.ref), r);
  }
  const std::vector<double> same{1.5, -3.0};
  EXPECT_EQ(reward_mimic(same, same), 1.2);
}

TEST(Alive, ConstantOne) {
  EXPECT_EQ(reward_alive(), 1.0);
  double sum = 0.0;
  for (int k = 0; k < 1000; ++k) sum += reward_alive();
  EXPECT_EQ(sum, 1000.0);
}

TEST(Balance, WorkedValuesAndSign) {
  EXPECT_EQ(reward_balance(0, 0, 0), 0.0);
  EXPECT_NEAR(reward_balance(5, 0, 0), -0.5, kTol);
  EXPECT_NEAR(reward_balance(2, 0, 3), -0.5, kTol);
  std::mt19937_64 rng(32);
  for (int i = 0; i < 500; ++i) {
    const auto d = draw(rng, 0);
    const double b = reward_balance(d.p, d.y, d.r);
    ASSERT_NEAR(b, o_balance(d.p, d.y, d.r), kTol);
    ASSERT_LE(b, 0.0);
  }
}

TEST(Velocity, WorkedValues) {
  EXPECT_EQ(reward_velocity(0, 0, 0, VelocityVariant::Step), 0.0);
  EXPECT_NEAR(reward_velocity(1.0, 0.1, 0.05, VelocityVariant::Walk), 0.85, kTol);
  EXPECT_NEAR(reward_velocity(0.5, 0.0, 0.4, VelocityVariant::Jump), 0.9, kTol);
}

TEST(Velocity, RandomCasesMatchOracle) {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 500; ++i) {
    const auto d = draw(rng, 0);
    ASSERT_NEAR(reward_velocity(d.vf, d.vl, d.vv, VelocityVariant::Step), o_vstep(d.vf, d.vl, d.vv), kTol);
    ASSERT_NEAR(reward_velocity(d.vf, d.vl, d.vv, VelocityVariant::Walk), o_vwalk(d.vf, d.vl, d.vv), kTol);
    ASSERT_NEAR(reward_velocity(d.vf, d.vl, d.vv, VelocityVariant::Jump), o_vjump(d.vf, d.vl, d.vv), kTol);
  }
}

TEST(Velocity, UnknownVariantThrows) {
  EXPECT_THROW(reward_velocity(0, 0, 0, VelocityVariant::None), ConfigError);
  EXPECT_THROW(velocity_variant_from_string("sideways"), ConfigError);
}

TEST(Sync, WorkedValues) {
  const std::vector<double> l{10, -20, 5};
  EXPECT_EQ(reward_sync(l, l), 0.0);
  EXPECT_NEAR(reward_sync(l, std::vector<double>{20, -10, 5}), -1.0, kTol);
  EXPECT_NEAR(reward_sync(l, std::vector<double>{10, -16, 5}), -0.2, kTol);
}

TEST(Sync, AntisymmetricSwapInvariantNonPositive) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> ang(-90, 90);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> th(6);
    for (double& v : th) v = ang(rng);
    const std::vector<double> l(th.begin(), th.begin() + 3), r(th.begin() + 3, th.end());
    const double s = reward_sync(l, r);
    ASSERT_NEAR(s, o_sync(th), kTol);
    ASSERT_EQ(s, reward_sync(r, l));
    ASSERT_LE(s, 0.0);
    ASSERT_EQ(reward_sync(RobotKind::Biped, th), s);
  }
}

TEST(Sync, QuadrupedThrows) {
  const std::vector<double> th(8, 0.0);
  EXPECT_THROW(reward_sync(RobotKind::Quadruped, th), ConfigError);
  EXPECT_FALSE(RewardConfig::preset(RobotKind::Quadruped, "jump").sync);
  RewardConfig c;
  c.sync = true;
  EXPECT_THROW(c.validate(RobotKind::Quadruped), ConfigError);
}

TEST(LegAngle, WorkedValues) {
  EXPECT_EQ(leg_angle(0, 0), 0.0);
  EXPECT_NEAR(leg_angle(30, -60), 0.0, kTol);
  EXPECT_NEAR(leg_angle(10, 20), 20.0, kTol);
}

TEST(LegAngular, WorkedValuesAndAntisymmetry) {
  const std::vector<double> prev{0, 0, 0, 0};
  const std::vector<double> zero{0, 0, 0, 0};
  const std::vector<bool> flags{true, false, false, true};
  EXPECT_EQ(reward_leg_angular(prev, zero, flags), 0.0);

  const std::vector<double> next{1, -1, -1, 1};
  bool balanced = false;
  EXPECT_NEAR(reward_leg_angular(prev, next, flags, &balanced), 4.0, kTol);
  EXPECT_TRUE(balanced);
  const std::vector<bool> swapped{false, true, true, false};
  EXPECT_NEAR(reward_leg_angular(prev, next, swapped), -4.0, kTol);

  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> a(-60, 60);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> p(4), n(4);
    std::vector<bool> f(4), g(4);
    double want = 0.0;
    for (int k = 0; k < 4; ++k) {
      p[k] = a(rng);
      n[k] = a(rng);
      f[k] = coin(rng);
      g[k] = !f[k];
      want += (f[k] ? 1.0 : -1.0) * (n[k] - p[k]);
    }
    bool bal = true;
    const double r = reward_leg_angular(p, n, f, &bal);
    ASSERT_NEAR(r, want, 1e-12);
    ASSERT_EQ(r, -reward_leg_angular(p, n, g));
    const int stance = static_cast<int>(f[0]) + f[1] + f[2] + f[3];
    ASSERT_EQ(bal, stance == 2);
  }
}

TEST(Presets, WorkedTotals) {
  const std::vector<double> th(8, 10.0);
  Draw d{th, th, 0, 0, 0, 0, 0, 0};
  EXPECT_NEAR(total_reward(RewardConfig::preset(RobotKind::Quadruped, "stepping"), inputs(d, RobotKind::Quadruped)),
              2.2, kTol);
  d.vf = 1.0;
  EXPECT_NEAR(total_reward(RewardConfig::preset(RobotKind::Biped, "walk"), inputs(d, RobotKind::Biped)), 2.0, kTol);
}

TEST(Presets, EveryPresetMatchesHandSum) {
  struct Row {
    RobotKind robot;
    const char* gait;
    bool m, s;
    int vel;  // 0 step, 1 walk, 2 jump
  };
  const Row rows[] = {
      {RobotKind::Quadruped, "stepping", true, false, 0}, {RobotKind::Biped, "stepping", true, false, 0},
      {RobotKind::Biped, "walk", false, false, 1},        {RobotKind::Biped, "level_walk", false, false, 1},
      {RobotKind::Biped, "march_walk", false, false, 1},  {RobotKind::Quadruped, "trot", false, false, 1},
      {RobotKind::Quadruped, "pace", false, false, 1},    {RobotKind::Quadruped, "bound", false, false, 1},
      {RobotKind::Biped, "hop", false, false, 2},         {RobotKind::Quadruped, "pronk", false, false, 2},
      {RobotKind::Biped, "jump", false, true, 2},
  };
  std::mt19937_64 rng(36);
  for (const auto& row : rows) {
    const int n = row.robot == RobotKind::Biped ? 6 : 8;
    const auto cfg = RewardConfig::preset(row.robot, row.gait);
    for (int i = 0; i < 200; ++i) {
      const auto d = draw(rng, n);
      double want = 1.0 + o_balance(d.p, d.y, d.r);
      if (row.m) want += o_mimic(d.theta, d.ref);
      if (row.s) want += o_sync(d.theta);
      want += row.vel == 0 ? o_vstep(d.vf, d.vl, d.vv)
                           : (row.vel == 1 ? o_vwalk(d.vf, d.vl, d.vv) : o_vjump(d.vf, d.vl, d.vv));
      const auto b = evaluate_reward(cfg, inputs(d, row.robot));
      ASSERT_NEAR(b.total, want, kTol) << row.gait;
      ASSERT_EQ(b.total, b.mimic + b.alive + b.balance + b.velocity + b.sync);
    }
  }
}

TEST(Presets, WalkForwardVelocityShiftsTotalExactly) {
  std::mt19937_64 rng(37);
  const auto cfg = RewardConfig::preset(RobotKind::Quadruped, "trot");
  for (int i = 0; i < 200; ++i) {
    auto d = draw(rng, 8);
    const double r0 = total_reward(cfg, inputs(d, RobotKind::Quadruped));
    d.vf += 0.37;
    ASSERT_NEAR(total_reward(cfg, inputs(d, RobotKind::Quadruped)) - r0, 0.37, kTol);
  }
}

TEST(Presets, LegAngularOnlyTerm) {
  const auto cfg = RewardConfig::preset(RobotKind::Quadruped, "leg_angular");
  const std::vector<double> th(8, 0.0), prev{0, 0, 0, 0}, next{1, -1, -1, 1};
  RewardInputs in;
  in.theta = th;
  in.theta_ref = th;
  in.pitch = 5.0;
  in.v_forward = 3.0;
  in.leg_prev = prev;
  in.leg_next = next;
  in.support = {true, false, false, true};
  EXPECT_NEAR(total_reward(cfg, in), 4.0, kTol);
  EXPECT_THROW(RewardConfig::preset(RobotKind::Biped, "leg_angular"), ConfigError);
  EXPECT_THROW(RewardConfig::preset(RobotKind::Biped, "moonwalk"), ConfigError);
}

TEST(Presets, JsonRoundTrip) {
  const auto c = RewardConfig::preset(RobotKind::Biped, "jump");
  const nlohmann::json j = c;
  const auto b = j.get<RewardConfig>();
  EXPECT_EQ(b.mimic, c.mimic);
  EXPECT_EQ(b.sync, c.sync);
  EXPECT_EQ(b.velocity, c.velocity);
}
