#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "model_json.hpp"
#include "robustify.hpp"
#include "test_support.hpp"
#include "verify.hpp"

using namespace agv;

TEST_CASE("graphs") {
  CHECK(complete_graph(5).size() == 10);
  CHECK(complete_graph(10).size() == 45);
  CHECK(cycle_variant_graph(30).size() == 30);
  CHECK(cycle_variant_graph(50).size() == 50);
  CHECK(cycle_variant_graph(2).size() == 2);
  CHECK_THROWS_AS(complete_graph(1), std::invalid_argument);

  // cycle variant: two paths meeting only at the first and last node
  auto edges = cycle_variant_graph(30);
  CHECK(edges.front() == std::make_pair(2, 1));
  CHECK(edges.back() == std::make_pair(30, 1));
}

TEST_CASE("leader-follower eigenvalues and indices") {
  Tolerances tol;
  auto [sys, contract] = leader_follower({});
  CHECK(spectral_radius(sys.a) == doctest::Approx(0.85));
  CHECK(observability_index(sys.a, sys.c, tol) == 1);
  CHECK(extendability_check(contract.assumption_blocks, contract.a0, tol));
}

TEST_CASE("formation dimensions match the runtime table") {
  struct Row {
    int n_v;
    bool complete;
    int nx, nd, ny, na, ng;
  };
  // system dim, input dim, output dim, assumption rows, guarantee rows
  const Row rows[] = {
      {5, true, 16, 22, 8, 84, 40},
      {10, true, 36, 92, 18, 364, 180},
      {30, false, 116, 62, 58, 244, 120},
      {50, false, 196, 102, 98, 404, 200},
  };
  for (const auto& row : rows) {
    FormationParams prm;
    prm.graph = row.complete ? complete_graph(row.n_v) : cycle_variant_graph(row.n_v);
    auto [sys, contract] = formation(prm);
    auto rep = validate(sys, contract);
    CHECK(rep.ok);
    CHECK(rep.nx == row.nx);
    CHECK(rep.nd == row.nd);
    CHECK(rep.ny == row.ny);
    CHECK(rep.na == row.na);
    CHECK(rep.ng == row.ng);
  }
  // guarantee count follows 4 D n_E on complete graphs as well
  for (int n_v : {15, 20}) {
    FormationParams prm;
    prm.graph = complete_graph(n_v);
    auto [sys, contract] = formation(prm);
    CHECK(contract.ng() == 4 * static_cast<int>(prm.graph.size()));
  }
}

TEST_CASE("formation consistency rows annihilate realizable displacements") {
  auto g = agvtest::rng(91);
  FormationParams prm;
  prm.graph = complete_graph(5);
  auto [sys, contract] = formation(prm);

  // kernel construction: (P kron I) (incidence' kron I) z = 0
  const int n_v = 5, n_e = 10, dd = 2;
  Matrix incidence = Matrix::Zero(n_v, n_e);
  for (int e = 0; e < n_e; ++e) {
    incidence(prm.graph[e].first - 1, e) += 1.0;
    incidence(prm.graph[e].second - 1, e) -= 1.0;
  }
  // consistency rows live in the newest assumption block, delta columns
  const Matrix proj_rows =
      contract.assumption_blocks[1].block(2 * dd + 2 * dd * n_e, dd, dd * n_e, dd * n_e);
  Matrix et_kron = Matrix::Zero(dd * n_e, dd * n_v);
  for (int e = 0; e < n_e; ++e)
    for (int v = 0; v < n_v; ++v)
      et_kron.block(dd * e, dd * v, dd, dd) = incidence(v, e) * Matrix::Identity(dd, dd);
  for (int t = 0; t < 10; ++t) {
    Vector z = agvtest::random_matrix(g, dd * n_v, 1, 2.0).col(0);
    CHECK((proj_rows * (et_kron * z)).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("formation stability, observability, and extendability") {
  Tolerances tol;
  FormationParams prm;
  prm.graph = complete_graph(5);
  auto [sys, contract] = formation(prm);
  CHECK(spectral_radius(sys.a) < 1.0);
  CHECK(observability_index(sys.a, sys.c, tol) == 2);
  CHECK(extendability_check(contract.assumption_blocks, contract.a0, tol));

  // per-agent noise balls, represented exactly as a product
  CHECK(sys.p.kind == PerturbationKind::Product);
  CHECK(sys.p.dim() == 8);
  CHECK(max_norm(sys.p, tol) == doctest::Approx(prm.omega_max * 2.0));  // sqrt(4 agents)
}

TEST_CASE("formation rejects bad graphs") {
  FormationParams prm;
  prm.graph = {{2, 1}, {4, 3}};  // disconnected
  CHECK_THROWS_AS(formation(prm), std::invalid_argument);

  FormationParams sink;
  sink.graph = {{2, 1}, {2, 3}};  // node 3 has no outgoing edge
  CHECK_THROWS_AS(formation(sink), std::invalid_argument);

  FormationParams wrong;
  wrong.graph = complete_graph(4);
  wrong.mu_err = Vector::Ones(3);  // must be D * n_E = 12
  CHECK_THROWS_AS(formation(wrong), std::invalid_argument);
}

TEST_CASE("fixtures round-trip through the canonical JSON") {
  Tolerances tol;
  {
    auto [sys, contract] = leader_follower({});
    auto j = model_to_json({sys, contract});
    auto back = model_from_json(j, tol);
    CHECK(model_to_json(back).dump() == j.dump());
  }
  {
    FormationParams prm;
    prm.graph = complete_graph(5);
    auto [sys, contract] = formation(prm);
    auto j = model_to_json({sys, contract});
    auto back = model_from_json(j, tol);
    CHECK(model_to_json(back).dump() == j.dump());
    CHECK(back.system.p.kind == PerturbationKind::Product);
  }
}

TEST_CASE("leader profile is assumption-feasible and spans the sway band") {
  LeaderFollowerParams prm;
  auto profile = leader_profile(prm, 300);
  REQUIRE(profile.size() == 301);
  double vmin = 1e9, vmax = -1e9;
  for (int k = 1; k <= 300; ++k) {
    // kinematics row: p(k) = p(k-1) + dt v(k-1)
    CHECK(profile[k](0) ==
          doctest::Approx(profile[k - 1](0) + prm.dt * profile[k - 1](1)).epsilon(1e-12));
    CHECK(std::abs(profile[k](1) - profile[k - 1](1)) <= prm.dt * prm.a_max + 1e-12);
    vmin = std::min(vmin, profile[k](1));
    vmax = std::max(vmax, profile[k](1));
  }
  CHECK(vmax == doctest::Approx(110.0 / 3.6).epsilon(0.05));
  CHECK(vmin <= 30.0 / 3.6 + 0.6);
}
