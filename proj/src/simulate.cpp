#include "simulate.hpp"

#include "robustify.hpp"

#include <cmath>
#include <cstdio>

namespace agv {

NoisePolicy noise_policy_from_string(const std::string& name) {
  if (name == "zero") return NoisePolicy::Zero;
  if (name == "uniform") return NoisePolicy::UniformRandom;
  if (name == "adversarial") return NoisePolicy::GreedyAdversarial;
  throw std::invalid_argument("unknown noise policy: " + name);
}

const char* to_string(NoisePolicy p) {
  switch (p) {
    case NoisePolicy::Zero: return "zero";
    case NoisePolicy::UniformRandom: return "uniform";
    case NoisePolicy::GreedyAdversarial: return "adversarial";
  }
  return "unknown";
}

Vector sample_perturbation(const PerturbationSet& set, std::mt19937_64& rng,
                           const Tolerances& tol) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  switch (set.kind) {
    case PerturbationKind::Singleton: return set.point;
    case PerturbationKind::Box: {
      Vector z(set.lo.size());
      for (Eigen::Index j = 0; j < z.size(); ++j)
        z(j) = set.lo(j) + (set.hi(j) - set.lo(j)) * u01(rng);
      return z;
    }
    case PerturbationKind::Ellipsoid: {
      const int d = set.dim();
      std::normal_distribution<double> gauss(0.0, 1.0);
      Vector g(d);
      for (int j = 0; j < d; ++j) g(j) = gauss(rng);
      if (g.norm() == 0) g.setOnes();
      g.normalize();
      const double radius = std::pow(u01(rng), 1.0 / d);
      Eigen::SelfAdjointEigenSolver<Matrix> es(set.shape);
      const Matrix hinv_sqrt = es.eigenvectors() *
                               es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                               es.eigenvectors().transpose();
      return set.gamma * radius * (hinv_sqrt * g);
    }
    case PerturbationKind::PolytopeV: {
      // barycentric sampling over the vertex hull
      const int nv = static_cast<int>(set.vertices.cols());
      std::exponential_distribution<double> expo(1.0);
      Vector w(nv);
      double sum = 0.0;
      for (int j = 0; j < nv; ++j) {
        w(j) = expo(rng);
        sum += w(j);
      }
      return set.vertices * (w / sum);
    }
    case PerturbationKind::PolytopeH: {
      const int d = set.poly.dim();
      Vector lo(d), hi(d);
      for (int j = 0; j < d; ++j) {
        Vector dir = Vector::Zero(d);
        dir(j) = 1.0;
        hi(j) = support(set, dir, tol);
        dir(j) = -1.0;
        lo(j) = -support(set, dir, tol);
      }
      for (int attempt = 0; attempt < 200; ++attempt) {
        Vector z(d);
        for (int j = 0; j < d; ++j) z(j) = lo(j) + (hi(j) - lo(j)) * u01(rng);
        if (contains_point(set.poly, z, tol.lp_tol)) return z;
      }
      const LpOutcome r = maximize_over(set.poly, Vector::Zero(d), tol);
      if (r.status != LpStatus::Optimal) throw SolverError("sample_perturbation: empty H-polytope");
      return r.point;
    }
    case PerturbationKind::Product: {
      Vector z(set.dim());
      int off = 0;
      for (const auto& comp : set.components) {
        z.segment(off, comp.dim()) = sample_perturbation(comp, rng, tol);
        off += comp.dim();
      }
      return z;
    }
  }
  throw std::invalid_argument("sample_perturbation: unknown variant");
}

namespace {

// Sensitivity of guarantee rows (window ending j steps ahead) to the process
// noise injected now: sum_{r >= max(0, m-j+1)} Gy^r C A^{j+r-m-1} E.
Matrix omega_sensitivity(const PerturbedLtiSystem& sys, const LtiContract& c, int j) {
  Matrix s = Matrix::Zero(c.ng(), sys.np());
  for (int r = std::max(0, c.m - j + 1); r <= c.m; ++r)
    s += c.guarantee_y(r) * sys.c * matrix_power(sys.a, j + r - c.m - 1) * sys.e;
  return s;
}

Vector greedy_omega(const PerturbedLtiSystem& sys, const LtiContract& c, const Tolerances& tol) {
  if (sys.np() == 0) return Vector(0);
  for (int j = 1; j <= c.m + 4; ++j) {
    const Matrix s = omega_sensitivity(sys, c, j);
    if (s.isZero(1e-14)) continue;
    int best_row = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < c.ng(); ++i) {
      const double v = support(sys.p, s.row(i).transpose(), tol);
      if (v > best_val) {
        best_val = v;
        best_row = i;
      }
    }
    return support_argmax(sys.p, s.row(best_row).transpose(), tol);
  }
  return support_argmax(sys.p, Vector::Zero(sys.np()), tol);
}

Vector greedy_zeta(const PerturbedLtiSystem& sys, const LtiContract& c, const Tolerances& tol) {
  if (sys.nr() == 0) return Vector(0);
  for (int slot = c.m; slot >= 0; --slot) {
    const Matrix s = c.guarantee_y(slot) * sys.f;
    if (s.isZero(1e-14)) continue;
    int best_row = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < c.ng(); ++i) {
      const double v = support(sys.r, s.row(i).transpose(), tol);
      if (v > best_val) {
        best_val = v;
        best_row = i;
      }
    }
    return support_argmax(sys.r, s.row(best_row).transpose(), tol);
  }
  return support_argmax(sys.r, Vector::Zero(sys.nr()), tol);
}

Vector feasible_initial_state(const PerturbedLtiSystem& sys, const Vector& d0,
                              const Tolerances& tol) {
  const int nx = sys.nx();
  if (sys.x0.rows() == 0) return Vector::Zero(nx);
  LinearProgram lp;
  lp.num_vars = nx;
  lp.objective = Vector::Zero(nx);
  lp.a_ub = sys.x0.a.leftCols(nx);
  lp.b_ub = sys.x0.b - sys.x0.a.rightCols(sys.nd()) * d0;
  lp.a_eq = Matrix(0, nx);
  lp.b_eq = Vector(0);
  const LpOutcome r = lp_solve(lp, tol);
  if (r.status != LpStatus::Optimal)
    throw std::invalid_argument("simulate: no initial state is jointly feasible with d(0)");
  return r.point;
}

}  // namespace

Trajectory simulate(const PerturbedLtiSystem& sys, const LtiContract& contract_in,
                    const std::vector<Vector>& input_profile, NoisePolicy noise,
                    const std::optional<Vector>& x0_choice, int horizon, std::uint64_t seed,
                    const Tolerances& tol) {
  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;
  if (horizon < 0) throw std::invalid_argument("simulate: negative horizon");
  if (static_cast<int>(input_profile.size()) < horizon + 1)
    throw std::invalid_argument("simulate: input profile shorter than horizon + 1");
  for (const auto& d : input_profile)
    if (d.size() != sys.nd()) throw std::invalid_argument("simulate: input dimension mismatch");

  const Vector w_off = sys.w_offset.size() ? sys.w_offset : Vector::Zero(sys.nx());
  const Vector v_off = sys.v_offset.size() ? sys.v_offset : Vector::Zero(sys.ny());

  Trajectory traj;
  traj.horizon = horizon;
  traj.d.assign(input_profile.begin(), input_profile.begin() + horizon + 1);

  // online assumption feasibility of the profile
  for (int k = c.m; k <= horizon; ++k) {
    Vector win = Vector::Zero(c.na());
    for (int r = 0; r <= c.m; ++r) win += c.assumption_blocks[r] * traj.d[k - c.m + r];
    if (((win - c.a0).array() > 1e-7).any())
      throw std::invalid_argument("simulate: input profile violates assumptions at step " +
                                  std::to_string(k));
  }

  Vector x;
  if (x0_choice) {
    x = *x0_choice;
    if (x.size() != sys.nx()) throw std::invalid_argument("simulate: x0 dimension mismatch");
    Vector joint(sys.nx() + sys.nd());
    joint << x, traj.d[0];
    if (!contains_point(sys.x0, joint, 1e-7))
      throw std::invalid_argument("simulate: x0 is not jointly feasible with d(0)");
  } else {
    x = feasible_initial_state(sys, traj.d[0], tol);
  }

  std::mt19937_64 rng(seed);
  // Adversarial directions are time-invariant for LTI data; compute once.
  Vector adv_omega, adv_zeta;
  if (noise == NoisePolicy::GreedyAdversarial) {
    adv_omega = greedy_omega(sys, c, tol);
    adv_zeta = greedy_zeta(sys, c, tol);
  }
  auto draw_omega = [&]() -> Vector {
    switch (noise) {
      case NoisePolicy::Zero: return Vector::Zero(sys.np());
      case NoisePolicy::UniformRandom: return sample_perturbation(sys.p, rng, tol);
      case NoisePolicy::GreedyAdversarial: return adv_omega;
    }
    return Vector::Zero(sys.np());
  };
  auto draw_zeta = [&]() -> Vector {
    switch (noise) {
      case NoisePolicy::Zero: return Vector::Zero(sys.nr());
      case NoisePolicy::UniformRandom: return sample_perturbation(sys.r, rng, tol);
      case NoisePolicy::GreedyAdversarial: return adv_zeta;
    }
    return Vector::Zero(sys.nr());
  };

  for (int k = 0; k <= horizon; ++k) {
    traj.x.push_back(x);
    Vector zeta = draw_zeta();
    Vector y = sys.c * x + sys.d * traj.d[k] + v_off;
    if (sys.nr() > 0) y += sys.f * zeta;
    traj.y.push_back(y);
    traj.zeta.push_back(std::move(zeta));
    if (k < horizon) {
      Vector omega = draw_omega();
      Vector xn = sys.a * x + sys.b * traj.d[k] + w_off;
      if (sys.np() > 0) xn += sys.e * omega;
      traj.omega.push_back(std::move(omega));
      x = std::move(xn);
    }
  }
  // dynamics-consistency of the stored trace
  for (int k = 0; k < horizon; ++k) {
    Vector pred = sys.a * traj.x[k] + sys.b * traj.d[k] + w_off;
    if (sys.np() > 0) pred += sys.e * traj.omega[k];
    traj.residuals.push_back((traj.x[k + 1] - pred).cwiseAbs().maxCoeff());
  }
  return traj;
}

MonitorReport monitor(const LtiContract& contract_in, const Trajectory& traj,
                      const Tolerances& tol) {
  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;
  if (traj.horizon < c.m) throw std::invalid_argument("monitor: trajectory shorter than the depth");
  if (!traj.d.empty() && traj.d[0].size() != c.nd())
    throw std::invalid_argument("monitor: input dimension mismatch");
  if (!traj.y.empty() && traj.y[0].size() != c.ny())
    throw std::invalid_argument("monitor: output dimension mismatch");

  MonitorReport rep;
  rep.m = c.m;
  for (int k = c.m; k <= traj.horizon; ++k) {
    Vector a_win = Vector::Zero(c.na());
    Vector g_win = Vector::Zero(c.ng());
    for (int r = 0; r <= c.m; ++r) {
      const int t = k - c.m + r;
      a_win += c.assumption_blocks[r] * traj.d[t];
      g_win += c.guarantee_d(r) * traj.d[t] + c.guarantee_y(r) * traj.y[t];
    }
    const Vector margin = c.g0 - g_win;
    rep.assumption_ok.push_back(((c.a0 - a_win).array() >= -tol.lp_tol).all());
    const bool g_ok = (margin.array() >= -tol.lp_tol).all();
    rep.guarantee_ok.push_back(g_ok);
    rep.margins.push_back(margin);
    if (!g_ok && !rep.first_violation) rep.first_violation = k;
  }
  return rep;
}

std::string trajectory_to_csv(const Trajectory& traj, const MonitorReport& rep) {
  auto fmt = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  const int nd = traj.d.empty() ? 0 : static_cast<int>(traj.d[0].size());
  const int nx = traj.x.empty() ? 0 : static_cast<int>(traj.x[0].size());
  const int ny = traj.y.empty() ? 0 : static_cast<int>(traj.y[0].size());
  const int np = traj.omega.empty() ? 0 : static_cast<int>(traj.omega[0].size());
  const int nr = traj.zeta.empty() ? 0 : static_cast<int>(traj.zeta[0].size());
  const int ng = rep.margins.empty() ? 0 : static_cast<int>(rep.margins[0].size());

  std::string out = "k";
  auto head = [&](const char* base, int n) {
    for (int j = 0; j < n; ++j) out += "," + std::string(base) + "[" + std::to_string(j) + "]";
  };
  head("d", nd);
  head("x", nx);
  head("y", ny);
  head("omega", np);
  head("zeta", nr);
  head("margin", ng);
  out += ",residual\n";

  for (int k = 0; k <= traj.horizon; ++k) {
    out += std::to_string(k);
    for (int j = 0; j < nd; ++j) out += "," + fmt(traj.d[k](j));
    for (int j = 0; j < nx; ++j) out += "," + fmt(traj.x[k](j));
    for (int j = 0; j < ny; ++j) out += "," + fmt(traj.y[k](j));
    for (int j = 0; j < np; ++j) out += "," + (k < traj.horizon ? fmt(traj.omega[k](j)) : "nan");
    for (int j = 0; j < nr; ++j) out += "," + fmt(traj.zeta[k](j));
    for (int j = 0; j < ng; ++j)
      out += "," + (k >= rep.m ? fmt(rep.margins[k - rep.m](j)) : "nan");
    const double res = (k < static_cast<int>(traj.residuals.size())) ? traj.residuals[k] : 0.0;
    out += "," + fmt(res) + "\n";
  }
  return out;
}

}  // namespace agv
