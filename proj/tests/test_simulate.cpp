#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "robustify.hpp"
#include "simulate.hpp"
#include "test_support.hpp"

#include <sstream>

using namespace agv;

TEST_CASE("zero-noise simulation reproduces the matrix recursion") {
  Tolerances tol;
  auto [sys, contract] = leader_follower({});
  auto profile = leader_profile({}, 40);
  Vector x0 = leader_follower_initial_state({}, profile);

  auto traj = simulate(sys, contract, profile, NoisePolicy::Zero, x0, 40, 0, tol);
  REQUIRE(traj.x.size() == 41);
  Vector x = x0;
  for (int k = 0; k < 40; ++k) {
    x = sys.a * x + sys.b * profile[k] + sys.w_offset;
    CHECK((traj.x[k + 1] - x).cwiseAbs().maxCoeff() == 0.0);
  }
  for (double r : traj.residuals) CHECK(r <= 1e-12);
  for (const auto& w : traj.omega) CHECK(w.isZero(0.0));
}

TEST_CASE("fixed seed gives identical trajectories byte for byte") {
  Tolerances tol;
  auto [sys, contract] = leader_follower({});
  auto profile = leader_profile({}, 60);
  Vector x0 = leader_follower_initial_state({}, profile);

  auto t1 = simulate(sys, contract, profile, NoisePolicy::UniformRandom, x0, 60, 42, tol);
  auto t2 = simulate(sys, contract, profile, NoisePolicy::UniformRandom, x0, 60, 42, tol);
  auto m1 = monitor(contract, t1, tol);
  auto m2 = monitor(contract, t2, tol);
  CHECK(trajectory_to_csv(t1, m1) == trajectory_to_csv(t2, m2));

  auto t3 = simulate(sys, contract, profile, NoisePolicy::UniformRandom, x0, 60, 43, tol);
  auto m3 = monitor(contract, t3, tol);
  CHECK(trajectory_to_csv(t1, m1) != trajectory_to_csv(t3, m3));
}

TEST_CASE("assumption-violating profiles are rejected with the step index") {
  Tolerances tol;
  auto [sys, contract] = leader_follower({});
  auto profile = leader_profile({}, 20);
  profile[7](1) += 50.0;  // teleporting velocity breaks the acceleration band
  Vector x0 = leader_follower_initial_state({}, profile);
  try {
    simulate(sys, contract, profile, NoisePolicy::Zero, x0, 20, 0, tol);
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("step 7") != std::string::npos);
  }
}

TEST_CASE("infeasible initial states are rejected") {
  Tolerances tol;
  auto [sys, contract] = leader_follower({});
  auto profile = leader_profile({}, 10);
  Vector bad(2);
  bad << profile[0](0), 200.0;  // way too fast: headway margin violated
  CHECK_THROWS_AS(simulate(sys, contract, profile, NoisePolicy::Zero, bad, 10, 0, tol),
                  std::invalid_argument);
}

TEST_CASE("monitor flags a hand-built guarantee violation at the right step") {
  Tolerances tol;
  // band contract on the newest window sample: |y(k)| <= 1
  LtiContract contract;
  contract.m = 1;
  contract.assumption_blocks = {Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  contract.a0 = Vector::Ones(1);
  Matrix g1(2, 2), g0 = Matrix::Zero(2, 2);
  g1 << 0, 1, 0, -1;
  contract.guarantee_blocks = {g0, g1};
  contract.g0 = Vector::Ones(2);

  Trajectory traj;
  traj.horizon = 10;
  for (int k = 0; k <= 10; ++k) {
    traj.d.push_back(Vector::Zero(1));
    Vector y(1);
    y << (k == 7 ? 3.0 : 0.5);  // out of band exactly at k = 7
    traj.y.push_back(y);
    traj.x.push_back(y);
  }
  auto rep = monitor(contract, traj, tol);
  REQUIRE(rep.first_violation.has_value());
  CHECK(*rep.first_violation == 7);
  CHECK_FALSE(rep.guarantee_ok[7 - rep.m]);
  CHECK(rep.guarantee_ok[6 - rep.m]);
  CHECK(rep.guarantee_ok[8 - rep.m]);
  CHECK(rep.margins[7 - rep.m].minCoeff() == doctest::Approx(-2.0));
}

TEST_CASE("monitor checks assumptions independently of guarantees") {
  Tolerances tol;
  auto [sys, contract] = leader_follower({});
  Trajectory traj;
  traj.horizon = 6;
  for (int k = 0; k <= 6; ++k) {
    Vector d(2), y(2);
    d << 0.0, (k == 3 ? 100.0 : 10.0);  // velocity jump violates assumptions
    y << -100.0, 0.0;                   // headway comfortably positive
    traj.d.push_back(d);
    traj.y.push_back(y);
    traj.x.push_back(y);
  }
  auto rep = monitor(contract, traj, tol);
  bool some_assumption_violated = false;
  for (bool ok : rep.assumption_ok) some_assumption_violated |= !ok;
  CHECK(some_assumption_violated);
  for (bool ok : rep.guarantee_ok) CHECK(ok);
  CHECK_FALSE(rep.first_violation.has_value());
}

TEST_CASE("leader-follower headway stays above h under both noise policies") {
  Tolerances tol;
  LeaderFollowerParams prm;
  const int horizon = 300;  // 90 seconds at dt = 0.3
  auto [sys, contract] = leader_follower(prm);
  auto profile = leader_profile(prm, horizon);
  Vector x0 = leader_follower_initial_state(prm, profile);

  for (auto policy : {NoisePolicy::GreedyAdversarial, NoisePolicy::UniformRandom}) {
    auto traj = simulate(sys, contract, profile, policy, x0, horizon, 7, tol);
    auto rep = monitor(contract, traj, tol);
    CHECK_FALSE(rep.first_violation.has_value());
    // time headway (p_l - p_f) / v_f >= h at every step
    for (int k = 0; k <= horizon; ++k) {
      const double gap = traj.d[k](0) - traj.y[k](0);
      const double vf = traj.y[k](1);
      REQUIRE(vf > 0.0);
      CHECK(gap / vf >= prm.h - 1e-9);
    }
  }
}

TEST_CASE("greedy adversarial noise is no kinder than uniform noise") {
  Tolerances tol;
  LeaderFollowerParams prm;
  const int horizon = 120;
  auto [sys, contract] = leader_follower(prm);
  auto profile = leader_profile(prm, horizon);
  Vector x0 = leader_follower_initial_state(prm, profile);

  auto adv = simulate(sys, contract, profile, NoisePolicy::GreedyAdversarial, x0, horizon, 0, tol);
  auto madv = monitor(contract, adv, tol);

  const int windows = static_cast<int>(madv.margins.size());
  std::vector<double> uniform_mean(windows, 0.0);
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    auto traj = simulate(sys, contract, profile, NoisePolicy::UniformRandom, x0, horizon,
                         1000 + s, tol);
    auto rep = monitor(contract, traj, tol);
    for (int k = 0; k < windows; ++k) uniform_mean[k] += rep.margins[k](0) / seeds;
  }
  for (int k = 0; k < windows; ++k) CHECK(madv.margins[k](0) <= uniform_mean[k] + 1e-9);
}

TEST_CASE("perturbation sampling lands inside the sets") {
  Tolerances tol;
  auto g = agvtest::rng(81);

  auto bx = PerturbationSet::box(Vector::Constant(2, -0.5), Vector::Constant(2, 1.5));
  for (int t = 0; t < 200; ++t) {
    Vector z = sample_perturbation(bx, g, tol);
    CHECK((z.array() >= -0.5 - 1e-12).all());
    CHECK((z.array() <= 1.5 + 1e-12).all());
  }

  Matrix root = agvtest::random_matrix(g, 3, 3, 1.0);
  Matrix H = root.transpose() * root + 0.3 * Matrix::Identity(3, 3);
  auto ell = PerturbationSet::ellipsoid(H, 0.8);
  for (int t = 0; t < 200; ++t) {
    Vector z = sample_perturbation(ell, g, tol);
    CHECK(z.dot(H * z) <= 0.64 + 1e-9);
  }

  Matrix F = agvtest::random_matrix(g, 2, 5, 1.0);
  auto vp = PerturbationSet::polytope_v(F);
  for (int t = 0; t < 100; ++t) {
    Vector z = sample_perturbation(vp, g, tol);
    CHECK(inclusion_v(PolyhedronV(z), PolyhedronV(F), tol));  // point in the hull
  }

  Matrix a(4, 2);
  a << 1, 0, -1, 0, 0, 1, 0, -1;
  auto hp = PerturbationSet::polytope_h(PolyhedronH(a, Vector::Ones(4)), tol);
  for (int t = 0; t < 100; ++t)
    CHECK(contains_point(hp.poly, sample_perturbation(hp, g, tol), 1e-9));
}

TEST_CASE("csv trace has the documented shape") {
  Tolerances tol;
  auto [sys, contract] = leader_follower({});
  auto profile = leader_profile({}, 5);
  Vector x0 = leader_follower_initial_state({}, profile);
  auto traj = simulate(sys, contract, profile, NoisePolicy::Zero, x0, 5, 0, tol);
  auto rep = monitor(contract, traj, tol);
  const std::string csv = trajectory_to_csv(traj, rep);

  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  // no measurement-noise columns: the fixture has n_r = 0
  CHECK(header == "k,d[0],d[1],x[0],x[1],y[0],y[1],omega[0],margin[0],residual");
  int lines = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 6);
}
