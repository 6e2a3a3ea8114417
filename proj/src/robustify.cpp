#include "robustify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>

namespace agv {

namespace {

Matrix sqrt_inverse_spd(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::invalid_argument("ellipsoid shape matrix is not positive definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace

double support(const PerturbationSet& set, const Vector& b, const Tolerances& tol) {
  if (b.size() != set.dim()) throw std::invalid_argument("support: direction dimension mismatch");
  switch (set.kind) {
    case PerturbationKind::Singleton: return set.point.size() ? b.dot(set.point) : 0.0;
    case PerturbationKind::Box: {
      double s = 0.0;
      for (Eigen::Index j = 0; j < b.size(); ++j) s += b(j) > 0 ? b(j) * set.hi(j) : b(j) * set.lo(j);
      return s;
    }
    case PerturbationKind::PolytopeV: {
      double best = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < set.vertices.cols(); ++c) best = std::max(best, b.dot(set.vertices.col(c)));
      return best;
    }
    case PerturbationKind::Ellipsoid: return set.gamma * (sqrt_inverse_spd(set.shape) * b).norm();
    case PerturbationKind::PolytopeH: {
      const LpOutcome r = maximize_over(set.poly, b, tol);
      if (r.status == LpStatus::Unbounded)
        throw std::invalid_argument("support: H-polytope is unbounded");
      if (r.status != LpStatus::Optimal) throw SolverError("support: LP did not solve");
      return r.value;
    }
    case PerturbationKind::Product: {
      double s = 0.0;
      int off = 0;
      for (const auto& comp : set.components) {
        s += support(comp, b.segment(off, comp.dim()), tol);
        off += comp.dim();
      }
      return s;
    }
  }
  throw std::invalid_argument("support: unknown variant");
}

Vector support_argmax(const PerturbationSet& set, const Vector& b, const Tolerances& tol) {
  if (b.size() != set.dim())
    throw std::invalid_argument("support_argmax: direction dimension mismatch");
  switch (set.kind) {
    case PerturbationKind::Singleton: return set.point;
    case PerturbationKind::Box: {
      Vector z(b.size());
      for (Eigen::Index j = 0; j < b.size(); ++j) z(j) = b(j) > 0 ? set.hi(j) : set.lo(j);
      return z;
    }
    case PerturbationKind::PolytopeV: {
      int best = 0;
      double bv = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < set.vertices.cols(); ++c) {
        const double v = b.dot(set.vertices.col(c));
        if (v > bv) {
          bv = v;
          best = c;
        }
      }
      return set.vertices.col(best);
    }
    case PerturbationKind::Ellipsoid: {
      const Matrix hinv_sqrt = sqrt_inverse_spd(set.shape);
      const Vector u = hinv_sqrt * b;
      const double n = u.norm();
      if (n == 0.0) return Vector::Zero(b.size());
      return set.gamma * (hinv_sqrt * (u / n));
    }
    case PerturbationKind::PolytopeH: {
      const LpOutcome r = maximize_over(set.poly, b, tol);
      if (r.status != LpStatus::Optimal) throw SolverError("support_argmax: LP did not solve");
      return r.point;
    }
    case PerturbationKind::Product: {
      Vector z(set.dim());
      int off = 0;
      for (const auto& comp : set.components) {
        z.segment(off, comp.dim()) = support_argmax(comp, b.segment(off, comp.dim()), tol);
        off += comp.dim();
      }
      return z;
    }
  }
  throw std::invalid_argument("support_argmax: unknown variant");
}

double max_norm(const PerturbationSet& set, const Tolerances& tol) {
  switch (set.kind) {
    case PerturbationKind::Singleton: return set.point.size() ? set.point.norm() : 0.0;
    case PerturbationKind::Box: {
      double s = 0.0;
      for (Eigen::Index j = 0; j < set.lo.size(); ++j)
        s += std::pow(std::max(std::abs(set.lo(j)), std::abs(set.hi(j))), 2);
      return std::sqrt(s);
    }
    case PerturbationKind::PolytopeV: {
      double best = 0.0;
      for (int c = 0; c < set.vertices.cols(); ++c) best = std::max(best, set.vertices.col(c).norm());
      return best;
    }
    case PerturbationKind::Ellipsoid: return set.gamma * operator_norm(sqrt_inverse_spd(set.shape));
    case PerturbationKind::PolytopeH: {
      // Interval-hull over-approximation; exact max-norm over an H-polytope
      // is nonconvex.  Over-approximating only increases N(eps, i).
      const int d = set.poly.dim();
      double s = 0.0;
      for (int j = 0; j < d; ++j) {
        Vector dir = Vector::Zero(d);
        dir(j) = 1.0;
        const double hi = support(set, dir, tol);
        dir(j) = -1.0;
        const double lo = -support(set, dir, tol);
        s += std::pow(std::max(std::abs(lo), std::abs(hi)), 2);
      }
      return std::sqrt(s);
    }
    case PerturbationKind::Product: {
      double s = 0.0;
      for (const auto& comp : set.components) s += std::pow(max_norm(comp, tol), 2);
      return std::sqrt(s);
    }
  }
  throw std::invalid_argument("max_norm: unknown variant");
}

Matrix t_matrix(const Matrix& a, const Matrix& c_out, const LtiContract& contract_in) {
  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;
  c.check();
  Matrix t = Matrix::Zero(c.ng(), a.rows());
  Matrix apow = Matrix::Identity(a.rows(), a.cols());
  for (int r = 0; r <= c.m; ++r) {
    t += c.guarantee_y(r) * c_out * apow;
    if (r < c.m) apow = apow * a;
  }
  return t;
}

Vector tau_r_vector(const PerturbedLtiSystem& sys, const LtiContract& contract_in,
                    const Tolerances& tol) {
  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;
  Vector tau = Vector::Zero(c.ng());
  if (sys.nr() == 0) return tau;
  for (int ell = 0; ell <= c.m; ++ell) {
    const Matrix gyf = c.guarantee_y(ell) * sys.f;  // n_g x n_r
    for (int i = 0; i < c.ng(); ++i) tau(i) += support(sys.r, gyf.row(i).transpose(), tol);
  }
  return tau;
}

Vector tau_p_entry_vector(const PerturbedLtiSystem& sys, const LtiContract& contract_in,
                          const Tolerances& tol) {
  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;
  Vector tau = Vector::Zero(c.ng());
  if (sys.np() == 0) return tau;
  for (int ell = 0; ell <= c.m - 1; ++ell) {
    Matrix coef = Matrix::Zero(c.ng(), sys.np());
    for (int r = ell + 1; r <= c.m; ++r)
      coef += c.guarantee_y(r) * sys.c * matrix_power(sys.a, r - 1 - ell) * sys.e;
    for (int i = 0; i < c.ng(); ++i) tau(i) += support(sys.p, coef.row(i).transpose(), tol);
  }
  return tau;
}

Vector tau_p_memory_vector(const PerturbedLtiSystem& sys, const LtiContract& contract_in,
                           int varsigma, const Tolerances& tol) {
  if (varsigma < 0) throw std::invalid_argument("tau_p_memory_vector: negative lag");
  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;
  Vector tau = Vector::Zero(c.ng());
  if (sys.np() == 0) return tau;
  const Matrix t = t_matrix(sys.a, sys.c, c);
  const Matrix coef = t * matrix_power(sys.a, varsigma) * sys.e;  // n_g x n_p
  for (int i = 0; i < c.ng(); ++i) tau(i) = support(sys.p, coef.row(i).transpose(), tol);
  return tau;
}

int n_threshold(const PerturbedLtiSystem& sys, const LtiContract& contract_in, double eps,
                int row, int n0, const std::vector<double>& a_norms, const Tolerances& tol) {
  if (!(eps > 0)) throw std::invalid_argument("n_threshold: eps must be > 0");
  if (n0 < 1) throw std::invalid_argument("n_threshold: N0 must be >= 1");
  if (static_cast<int>(a_norms.size()) <= n0)
    throw std::invalid_argument("n_threshold: a_norms must cover 0..N0");
  const double contraction = a_norms[n0];
  if (contraction >= 1.0)
    throw std::invalid_argument("n_threshold: ||A^{N0}|| must be < 1");

  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;
  const Matrix t = t_matrix(sys.a, sys.c, c);
  const double t_row = t.row(row).norm();
  const double e_norm = sys.np() > 0 && sys.e.size() > 0 && !sys.e.isZero(0.0)
                            ? operator_norm(sys.e)
                            : 0.0;
  const double m_p = sys.np() > 0 ? max_norm(sys.p, tol) : 0.0;

  double k_sum = 0.0;
  for (int k = 0; k < n0; ++k) k_sum += a_norms[k];

  const double numerator = t_row * e_norm * k_sum * m_p;
  if (numerator == 0.0 || contraction == 0.0) return n0;  // tail exactly zero
  const double arg = numerator / ((1.0 - contraction) * eps);
  if (arg <= 1.0) return n0;
  const double n_real = n0 * std::log(arg) / std::log(1.0 / contraction);
  return std::max(static_cast<int>(std::ceil(n_real)), n0);
}

int optimal_n_threshold(const PerturbedLtiSystem& sys, const LtiContract& contract, double eps,
                        int row, const Tolerances& tol) {
  const double rho = spectral_radius(sys.a);
  if (rho >= 1.0 - tol.stability_margin)
    throw std::invalid_argument("optimal_n_threshold: A is not strictly stable (spectral radius " +
                                std::to_string(rho) + ")");
  std::vector<double> a_norms = {1.0};
  Matrix apow = Matrix::Identity(sys.a.rows(), sys.a.cols());
  int best = std::numeric_limits<int>::max();
  int n0 = 1;
  while (n0 <= best) {
    apow = apow * sys.a;
    a_norms.push_back(apow.isZero(0.0) ? 0.0 : operator_norm(apow));
    if (a_norms[n0] < 1.0) {
      const int n = n_threshold(sys, contract, eps, row, n0, a_norms, tol);
      best = std::min(best, n);
    }
    ++n0;
    if (n0 > 100000)
      throw SolverError("optimal_n_threshold: no contracting power found within bounds");
  }
  return best;
}

TauTerms build_tau_eps(const PerturbedLtiSystem& sys, const LtiContract& contract_in, double eps,
                       const Tolerances& tol) {
  if (!(eps > 0)) throw std::invalid_argument("build_tau_eps: eps must be > 0");
  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;

  TauTerms tau;
  tau.epsilon = eps;
  tau.t_mat = t_matrix(sys.a, sys.c, c);
  tau.tau_r = tau_r_vector(sys, c, tol);
  tau.tau_p_entry = tau_p_entry_vector(sys, c, tol);
  tau.n_per_row.resize(c.ng());
  for (int i = 0; i < c.ng(); ++i) tau.n_per_row[i] = optimal_n_threshold(sys, c, eps, i, tol);

  const int max_n = *std::max_element(tau.n_per_row.begin(), tau.n_per_row.end());
  tau.tau_p_memory.reserve(max_n);
  if (sys.np() > 0) {
    Matrix apow = Matrix::Identity(sys.a.rows(), sys.a.cols());
    for (int s = 0; s < max_n; ++s) {
      const Matrix coef = tau.t_mat * apow * sys.e;
      Vector v(c.ng());
      for (int i = 0; i < c.ng(); ++i) v(i) = support(sys.p, coef.row(i).transpose(), tol);
      tau.tau_p_memory.push_back(std::move(v));
      apow = apow * sys.a;
    }
  } else {
    for (int s = 0; s < max_n; ++s) tau.tau_p_memory.push_back(Vector::Zero(c.ng()));
  }

  tau.tau_eps = Vector(c.ng());
  for (int i = 0; i < c.ng(); ++i) {
    double acc = tau.tau_r(i) + tau.tau_p_entry(i) + eps;
    for (int s = 0; s < tau.n_per_row[i]; ++s) acc += tau.tau_p_memory[s](i);
    tau.tau_eps(i) = acc;
  }
  return tau;
}

LtiContract robustified_contract(const LtiContract& contract_in, const TauTerms& tau) {
  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;
  if (tau.tau_eps.size() != c.ng())
    throw std::invalid_argument("robustified_contract: tau dimension mismatch");
  LtiContract out = c;
  out.g0 = c.g0 - tau.tau_eps;
  return out;
}

namespace {

// Is w outside the stable eigenspace of A?  Decided on the eigenbasis when A
// is diagonalizable; otherwise falls back to a normalized power test.
bool outside_stable_subspace(const Matrix& a, const Vector& w, double margin) {
  if (w.norm() == 0) return false;
  Eigen::EigenSolver<Matrix> es(a);
  const auto& vals = es.eigenvalues();
  const Eigen::MatrixXcd vecs = es.eigenvectors();
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(vecs);
  if (lu.isInvertible()) {
    const Eigen::VectorXcd alpha = lu.solve(w.cast<std::complex<double>>());
    double unstable_mass = 0.0;
    for (Eigen::Index j = 0; j < vals.size(); ++j)
      if (std::abs(vals(j)) >= 1.0 - margin) unstable_mass += std::abs(alpha(j));
    return unstable_mass > 1e-9 * w.norm();
  }
  // defective matrix: track whether A'^k w decays
  Vector v = w;
  for (int k = 0; k < 256; ++k) v = a.transpose() * v;
  return v.norm() > 1e-9 * w.norm();
}

}  // namespace

UnstableReport unstable_infeasibility_check(const PerturbedLtiSystem& sys,
                                            const LtiContract& contract_in,
                                            const Tolerances& tol) {
  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;
  UnstableReport rep;
  auto fail = [&](const std::string& why) {
    rep.notes.push_back(why);
    rep.verdict = UnstableDiagnosis::Inconclusive;
  };

  bool ok = true;
  if (sys.nr() > 0 && !sys.r.contains_zero(tol)) {
    fail("measurement noise set does not contain 0");
    ok = false;
  }
  if (sys.np() == 0 || sys.p.interior_radius(tol) <= tol.lp_tol) {
    fail("process noise set has no interior around 0");
    ok = false;
  }
  if (sys.np() > 0 && numerical_rank(sys.e, tol) < sys.nx()) {
    fail("E does not have full row rank");
    ok = false;
  }
  const Matrix t = t_matrix(sys.a, sys.c, c);
  bool excitable = false;
  for (int i = 0; i < c.ng() && !excitable; ++i)
    excitable = outside_stable_subspace(sys.a, t.row(i).transpose(), tol.stability_margin);
  if (!excitable) {
    fail("image of T' lies in the stable subspace of A");
    ok = false;
  }

  // Guarantee window set must be output-compact: trivial recession cone of
  // the stacked Gy blocks.
  Matrix gy(c.ng(), (c.m + 1) * c.ny());
  for (int r = 0; r <= c.m; ++r) gy.middleCols(r * c.ny(), c.ny()) = c.guarantee_y(r);
  if (!h_polyhedron_bounded(PolyhedronH(gy, Vector::Zero(c.ng())), tol)) {
    fail("guarantee window set is not output-bounded");
    ok = false;
  }

  // ... and satisfiable for at least one assumption-feasible input window.
  {
    const int wd = (c.m + 1) * c.nd();
    const int wy = (c.m + 1) * c.ny();
    LinearProgram lp;
    lp.num_vars = wd + wy;
    lp.objective = Vector::Zero(lp.num_vars);
    lp.a_ub = Matrix::Zero(c.na() + c.ng(), lp.num_vars);
    lp.b_ub = Vector(c.na() + c.ng());
    for (int r = 0; r <= c.m; ++r) {
      lp.a_ub.block(0, r * c.nd(), c.na(), c.nd()) = c.assumption_blocks[r];
      lp.a_ub.block(c.na(), r * c.nd(), c.ng(), c.nd()) = c.guarantee_d(r);
      lp.a_ub.block(c.na(), wd + r * c.ny(), c.ng(), c.ny()) = c.guarantee_y(r);
    }
    lp.b_ub << c.a0, c.g0;
    lp.a_eq = Matrix(0, lp.num_vars);
    lp.b_eq = Vector(0);
    if (lp_solve(lp, tol).status != LpStatus::Optimal) {
      fail("guarantee window set is empty for every assumption-feasible input window");
      ok = false;
    }
  }

  if (ok) {
    rep.verdict = UnstableDiagnosis::Violated;
    rep.notes.push_back(
        "unstable dynamics with interior process noise and output-compact guarantees: the "
        "contract is violated");
  }
  return rep;
}

VerificationReport verify_perturbed(const PerturbedLtiSystem& sys, const LtiContract& contract_in,
                                    double eps, const Tolerances& tol) {
  const auto t_start = std::chrono::steady_clock::now();
  if (!(eps > 0)) throw std::invalid_argument("verify_perturbed: eps must be > 0");
  const LtiContract c = contract_in.m == 0 ? contract_in.lifted_to(1) : contract_in;
  {
    const DimensionReport dims = validate(sys, c);
    if (!dims.ok) {
      std::string msg = "verify_perturbed: dimension violations:";
      for (const auto& v : dims.violations) msg += " " + v + ";";
      throw std::invalid_argument(msg);
    }
  }

  VerificationReport rep;
  rep.epsilon = eps;

  const double rho = spectral_radius(sys.a);
  if (rho >= 1.0 - tol.stability_margin) {
    const UnstableReport unstable = unstable_infeasibility_check(sys, c, tol);
    rep.verdict =
        unstable.verdict == UnstableDiagnosis::Violated ? Verdict::NotVerified : Verdict::Unknown;
    rep.diagnostics.push_back("A is not strictly stable (spectral radius " + std::to_string(rho) +
                              "); the robustified pipeline does not apply");
    rep.diagnostics.insert(rep.diagnostics.end(), unstable.notes.begin(), unstable.notes.end());
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return rep;
  }

  const auto t_tau = std::chrono::steady_clock::now();
  TauTerms tau;
  try {
    tau = build_tau_eps(sys, c, eps, tol);
  } catch (const SolverError& e) {
    rep.verdict = Verdict::Unknown;
    rep.diagnostics.push_back(std::string("robustification failed: ") + e.what());
    return rep;
  }
  const LtiContract tightened = robustified_contract(c, tau);
  rep.tau_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_tau).count();

  const auto t_lp = std::chrono::steady_clock::now();
  VerificationReport inner = verify(nominal(sys), tightened, tol);
  rep.lp_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_lp).count();

  rep.verdict = inner.verdict;
  rep.iota = inner.iota;
  rep.nu = inner.nu;
  rep.theta_records = std::move(inner.theta_records);
  rep.lp_groups = inner.lp_groups;
  rep.lp_count_rows = inner.lp_count_rows;
  rep.diagnostics.insert(rep.diagnostics.end(), inner.diagnostics.begin(),
                         inner.diagnostics.end());
  rep.n_per_row = tau.n_per_row;
  rep.tau_eps = tau.tau_eps;

  if (rep.verdict == Verdict::NotVerified) {
    // Distinguish a robust failure from a possible epsilon artifact.
    bool beyond_eps = false;
    for (const auto& recd : rep.theta_records)
      if (recd.value > eps) beyond_eps = true;
    rep.diagnostics.push_back(
        beyond_eps ? "robust failure: some theta exceeds epsilon, so the exact robustified "
                     "contract also fails"
                   : "all positive thetas are within epsilon: possibly an approximation "
                     "artifact; retry with a smaller epsilon");
  }
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace agv
