#include "fixtures.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace agv {

std::pair<PerturbedLtiSystem, LtiContract> leader_follower(const LeaderFollowerParams& prm) {
  if (!(prm.dt > 0 && prm.h > 0 && prm.a_max > 0 && prm.a_min > 0 && prm.phi > 0 &&
        prm.init_margin > 0))
    throw std::invalid_argument("leader_follower: parameters must be positive");
  const double dt = prm.dt, h = prm.h;

  PerturbedLtiSystem sys;
  sys.a = Matrix(2, 2);
  sys.a << 1.0, dt, -1.0 / h, -dt / h;
  sys.b = Matrix(2, 2);
  sys.b << 0.0, 0.0, 1.0 / h, dt / h;
  sys.c = Matrix::Identity(2, 2);
  sys.d = Matrix::Zero(2, 2);
  sys.e = Matrix(2, 1);
  sys.e << 0.0, 1.0;
  sys.f = Matrix(2, 0);
  // constant -1 m/s^2 controller bias, part of the plant
  sys.w_offset = Vector(2);
  sys.w_offset << 0.0, -dt;
  sys.v_offset = Vector::Zero(2);
  // initial headway: p_l(0) - p_f(0) - h v_f(0) >= init_margin over (x0, d0)
  Matrix x0a(1, 4);
  x0a << 1.0, h, -1.0, 0.0;
  Vector x0b(1);
  x0b << -prm.init_margin;
  sys.x0 = PolyhedronH(x0a, x0b);
  sys.p = PerturbationSet::interval(-prm.phi, prm.phi);
  sys.r = PerturbationSet::singleton(Vector(0));

  LtiContract c;
  c.m = 1;
  Matrix a1(4, 2), a0(4, 2);
  a1 << 1, 0, -1, 0, 0, 1, 0, -1;
  a0 << -1, -dt, 1, dt, 0, -1, 0, 1;
  c.assumption_blocks = {a0, a1};
  c.a0 = Vector(4);
  c.a0 << 0.0, 0.0, dt * prm.a_max, dt * prm.a_min;
  Matrix g1 = Matrix::Zero(1, 4);
  Matrix g0(1, 4);
  g0 << -1.0, 0.0, 1.0, h;
  c.guarantee_blocks = {g0, g1};
  c.g0 = Vector::Zero(1);
  return {std::move(sys), std::move(c)};
}

std::vector<std::pair<int, int>> complete_graph(int n) {
  if (n < 2) throw std::invalid_argument("complete_graph: need at least two nodes");
  std::vector<std::pair<int, int>> edges;
  for (int i = 2; i <= n; ++i)
    for (int j = 1; j < i; ++j) edges.emplace_back(i, j);
  return edges;
}

std::vector<std::pair<int, int>> cycle_variant_graph(int n) {
  if (n < 2) throw std::invalid_argument("cycle_variant_graph: need at least two nodes");
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= n / 2; ++i) edges.emplace_back(i + 1, i);
  for (int i = n / 2 + 1; i <= n - 1; ++i) edges.emplace_back(i, i + 1);
  edges.emplace_back(n, 1);
  return edges;
}

namespace {

int num_nodes(const std::vector<std::pair<int, int>>& edges) {
  int n = 0;
  for (const auto& [i, j] : edges) n = std::max({n, i, j});
  return n;
}

bool weakly_connected(const std::vector<std::pair<int, int>>& edges, int n) {
  std::vector<int> parent(n + 1);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  for (const auto& [i, j] : edges) parent[find(i)] = find(j);
  for (int v = 2; v <= n; ++v)
    if (find(v) != find(1)) return false;
  return true;
}

}  // namespace

std::pair<PerturbedLtiSystem, LtiContract> formation(const FormationParams& prm) {
  const auto& edges = prm.graph;
  const int n_v = num_nodes(edges);
  const int n_e = static_cast<int>(edges.size());
  const int dd = prm.dims;
  if (n_v < 2 || n_e < 1) throw std::invalid_argument("formation: graph must have edges");
  if (!(prm.dt > 0 && prm.a_max > 0 && prm.a_min > 0 && prm.mu_diff > 0 && prm.omega_max > 0))
    throw std::invalid_argument("formation: parameters must be positive");
  if (!weakly_connected(edges, n_v))
    throw std::invalid_argument("formation: graph is not weakly connected");
  Vector mu_err = prm.mu_err;
  if (mu_err.size() == 0) mu_err = Vector::Ones(dd * n_e);
  if (mu_err.size() != dd * n_e)
    throw std::invalid_argument("formation: mu_err must have D * n_E entries");

  std::map<int, int> out_degree;
  for (const auto& [i, j] : edges) ++out_degree[i];
  for (int v = 2; v <= n_v; ++v)
    if (!out_degree.count(v))
      throw std::invalid_argument("formation: non-leader node " + std::to_string(v) +
                                  " has no outgoing edge");

  const int n_fol = n_v - 1;
  const int nx = 2 * dd * n_fol;  // (q, u) per non-leader agent
  const int nd = dd + dd * n_e;   // leader acceleration plus displacements
  const int ny = dd * n_fol;
  const double dt = prm.dt;

  auto q_of = [&](int agent) { return dd * (agent - 2); };          // column of q_agent
  auto u_of = [&](int agent) { return dd * n_fol + dd * (agent - 2); };

  PerturbedLtiSystem sys;
  sys.a = Matrix::Zero(nx, nx);
  sys.b = Matrix::Zero(nx, nd);
  sys.e = Matrix::Zero(nx, dd * n_fol);
  for (int i = 2; i <= n_v; ++i) {
    sys.a.block(q_of(i), q_of(i), dd, dd).setIdentity();
    sys.a.block(q_of(i), u_of(i), dd, dd) = dt * Matrix::Identity(dd, dd);
    sys.a.block(u_of(i), u_of(i), dd, dd).setIdentity();
    sys.e.block(u_of(i), q_of(i), dd, dd).setIdentity();
    sys.b.block(u_of(i), 0, dd, dd) = -dt * Matrix::Identity(dd, dd);
    const double coef = 1.0 / out_degree[i];
    for (int e = 0; e < n_e; ++e) {
      const auto& [ei, ej] = edges[e];
      if (ei != i) continue;
      sys.a.block(u_of(i), q_of(i), dd, dd) -= coef / dt * Matrix::Identity(dd, dd);
      sys.a.block(u_of(i), u_of(i), dd, dd) -= 2.0 * coef * Matrix::Identity(dd, dd);
      if (ej != 1) {
        sys.a.block(u_of(i), q_of(ej), dd, dd) += coef / dt * Matrix::Identity(dd, dd);
        sys.a.block(u_of(i), u_of(ej), dd, dd) += 2.0 * coef * Matrix::Identity(dd, dd);
      }
      sys.b.block(u_of(i), dd + dd * e, dd, dd) += coef / dt * Matrix::Identity(dd, dd);
    }
  }
  sys.c = Matrix::Zero(ny, nx);
  sys.c.leftCols(ny).setIdentity();
  sys.d = Matrix::Zero(ny, nd);
  sys.f = Matrix(ny, 0);
  sys.w_offset = Vector::Zero(nx);
  sys.v_offset = Vector::Zero(ny);

  // per-agent norm balls, represented exactly as a product
  std::vector<PerturbationSet> balls;
  for (int i = 0; i < n_fol; ++i)
    balls.push_back(PerturbationSet::ellipsoid(Matrix::Identity(dd, dd), prm.omega_max));
  sys.p = PerturbationSet::product(std::move(balls));
  sys.r = PerturbationSet::singleton(Vector(0));

  // edge-difference map on outputs: row block e gives q_i - q_j
  Matrix dif = Matrix::Zero(dd * n_e, ny);
  for (int e = 0; e < n_e; ++e) {
    const auto& [ei, ej] = edges[e];
    dif.block(dd * e, q_of(ei), dd, dd).setIdentity();
    if (ej != 1) dif.block(dd * e, q_of(ej), dd, dd) -= Matrix::Identity(dd, dd);
  }

  // consistency projector: ker(P) = Im(incidence')
  Matrix incidence = Matrix::Zero(n_v, n_e);
  for (int e = 0; e < n_e; ++e) {
    incidence(edges[e].first - 1, e) += 1.0;
    incidence(edges[e].second - 1, e) -= 1.0;
  }
  Eigen::JacobiSVD<Matrix> svd(incidence.transpose(), Eigen::ComputeFullU);
  Matrix sigma_flag = Matrix::Zero(n_e, n_e);
  const auto& sv = svd.singularValues();
  for (int k = 0; k < n_e; ++k) {
    const double s = k < sv.size() ? sv(k) : 0.0;
    sigma_flag(k, k) = (s < 1e-9) ? 1.0 : 0.0;
  }
  const Matrix proj = sigma_flag * svd.matrixU().transpose();

  // Assumptions (depth 1).  Single-sample rows sit on the newest slot; only
  // this placement is extendable (the newest sample of a feasible window is
  // otherwise unconstrained, and the shifted window then demands a bound on
  // it that the premise never imposed).  Time 0 is covered by the joint
  // initial set below instead.
  const int nde = dd * n_e;
  const int na = 2 * dd + 4 * nde;
  LtiContract c;
  c.m = 1;
  Matrix a0blk = Matrix::Zero(na, nd);
  Matrix a1blk = Matrix::Zero(na, nd);
  c.a0 = Vector::Zero(na);
  int r = 0;
  a1blk.block(r, 0, dd, dd).setIdentity();
  c.a0.segment(r, dd).setConstant(prm.a_max);
  r += dd;
  a1blk.block(r, 0, dd, dd) = -Matrix::Identity(dd, dd);
  c.a0.segment(r, dd).setConstant(prm.a_min);
  r += dd;
  a1blk.block(r, dd, nde, nde).setIdentity();
  a0blk.block(r, dd, nde, nde) = -Matrix::Identity(nde, nde);
  c.a0.segment(r, nde).setConstant(prm.mu_diff);
  r += nde;
  a1blk.block(r, dd, nde, nde) = -Matrix::Identity(nde, nde);
  a0blk.block(r, dd, nde, nde).setIdentity();
  c.a0.segment(r, nde).setConstant(prm.mu_diff);
  r += nde;
  Matrix proj_kron = Matrix::Zero(nde, nde);
  for (int ei = 0; ei < n_e; ++ei)
    for (int ej = 0; ej < n_e; ++ej)
      proj_kron.block(dd * ei, dd * ej, dd, dd) = proj(ei, ej) * Matrix::Identity(dd, dd);
  a1blk.block(r, dd, nde, nde) = proj_kron;
  r += nde;
  a1blk.block(r, dd, nde, nde) = -proj_kron;
  r += nde;
  c.assumption_blocks = {a0blk, a1blk};

  // Guarantees (depth 1, newest slot): |edge-difference of q - delta| <= mu_err.
  const int ng = 2 * nde;
  Matrix g0blk = Matrix::Zero(ng, nd + ny);
  Matrix g1blk = Matrix::Zero(ng, nd + ny);
  c.g0 = Vector(ng);
  g1blk.block(0, nd, nde, ny) = dif;
  g1blk.block(0, dd, nde, nde) = -Matrix::Identity(nde, nde);
  c.g0.head(nde) = mu_err;
  g1blk.block(nde, nd, nde, ny) = -dif;
  g1blk.block(nde, dd, nde, nde).setIdentity();
  c.g0.tail(nde) = mu_err;
  c.guarantee_blocks = {g0blk, g1blk};

  // Initial set over (x0, d0): formation errors within half the band, zero
  // relative speed, and the time-0 input valid (acceleration box, consistent
  // displacements).
  const int x0_rows = 2 * nde + 2 * dd * n_fol + 2 * dd + 2 * nde;
  Matrix x0a = Matrix::Zero(x0_rows, nx + nd);
  Vector x0b = Vector::Zero(x0_rows);
  int xr = 0;
  x0a.block(xr, 0, nde, ny) = dif;
  x0a.block(xr, nx + dd, nde, nde) = -Matrix::Identity(nde, nde);
  x0b.segment(xr, nde) = 0.5 * mu_err;
  xr += nde;
  x0a.block(xr, 0, nde, ny) = -dif;
  x0a.block(xr, nx + dd, nde, nde).setIdentity();
  x0b.segment(xr, nde) = 0.5 * mu_err;
  xr += nde;
  x0a.block(xr, ny, dd * n_fol, dd * n_fol).setIdentity();
  xr += dd * n_fol;
  x0a.block(xr, ny, dd * n_fol, dd * n_fol) = -Matrix::Identity(dd * n_fol, dd * n_fol);
  xr += dd * n_fol;
  x0a.block(xr, nx, dd, dd).setIdentity();
  x0b.segment(xr, dd).setConstant(prm.a_max);
  xr += dd;
  x0a.block(xr, nx, dd, dd) = -Matrix::Identity(dd, dd);
  x0b.segment(xr, dd).setConstant(prm.a_min);
  xr += dd;
  x0a.block(xr, nx + dd, nde, nde) = proj_kron;
  xr += nde;
  x0a.block(xr, nx + dd, nde, nde) = -proj_kron;
  sys.x0 = PolyhedronH(std::move(x0a), std::move(x0b));

  return {std::move(sys), std::move(c)};
}

std::vector<Vector> leader_profile(const LeaderFollowerParams& prm, int horizon) {
  const double dt = prm.dt;
  const double v_cruise = 110.0 / 3.6;
  const double v_low = 25.0 / 3.6;
  const int phase = static_cast<int>(std::round(30.0 / dt));

  std::vector<Vector> d;
  double p = 0.0, v = v_cruise;
  bool braking = true;
  for (int k = 0; k <= horizon; ++k) {
    Vector dk(2);
    dk << p, v;
    d.push_back(dk);
    double a = 0.0;
    if (k >= phase && k < 2 * phase) {
      if (braking && v <= v_low) braking = false;
      if (!braking && v >= v_cruise) braking = true;
      a = braking ? -prm.a_min : prm.a_max;
    }
    p += dt * v;
    v += dt * a;
  }
  return d;
}

Vector leader_follower_initial_state(const LeaderFollowerParams& prm,
                                     const std::vector<Vector>& profile) {
  if (profile.empty()) throw std::invalid_argument("leader_follower_initial_state: empty profile");
  Vector x0(2);
  x0 << profile[0](0) - 46.0, 80.0 / 3.6;
  return x0;
}

}  // namespace agv
