#include "model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

namespace agv {

PerturbationSet PerturbationSet::singleton(Vector v) {
  PerturbationSet s;
  s.kind = PerturbationKind::Singleton;
  s.point = std::move(v);
  return s;
}

PerturbationSet PerturbationSet::box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("PerturbationSet::box: size mismatch");
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (lo(i) > hi(i)) throw std::invalid_argument("PerturbationSet::box: lo > hi");
  PerturbationSet s;
  s.kind = PerturbationKind::Box;
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

PerturbationSet PerturbationSet::interval(double lo, double hi) {
  Vector l(1), h(1);
  l << lo;
  h << hi;
  return box(std::move(l), std::move(h));
}

PerturbationSet PerturbationSet::polytope_v(Matrix vertices) {
  if (vertices.cols() < 1)
    throw std::invalid_argument("PerturbationSet::polytope_v: needs at least one vertex");
  PerturbationSet s;
  s.kind = PerturbationKind::PolytopeV;
  s.vertices = std::move(vertices);
  return s;
}

PerturbationSet PerturbationSet::polytope_h(PolyhedronH p, const Tolerances& tol) {
  if (!h_polyhedron_bounded(p, tol))
    throw std::invalid_argument("PerturbationSet::polytope_h: set is unbounded");
  if (is_empty(p, tol)) throw std::invalid_argument("PerturbationSet::polytope_h: set is empty");
  PerturbationSet s;
  s.kind = PerturbationKind::PolytopeH;
  s.poly = std::move(p);
  return s;
}

PerturbationSet PerturbationSet::ellipsoid(Matrix shape, double gamma) {
  if (shape.rows() != shape.cols())
    throw std::invalid_argument("PerturbationSet::ellipsoid: H not square");
  if (!(gamma > 0)) throw std::invalid_argument("PerturbationSet::ellipsoid: gamma must be > 0");
  if ((shape - shape.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * (1.0 + shape.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("PerturbationSet::ellipsoid: H not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(shape);
  if (es.eigenvalues().minCoeff() <= 0)
    throw std::invalid_argument("PerturbationSet::ellipsoid: H not positive definite");
  PerturbationSet s;
  s.kind = PerturbationKind::Ellipsoid;
  s.shape = std::move(shape);
  s.gamma = gamma;
  return s;
}

PerturbationSet PerturbationSet::product(std::vector<PerturbationSet> components) {
  if (components.empty())
    throw std::invalid_argument("PerturbationSet::product: needs at least one component");
  PerturbationSet s;
  s.kind = PerturbationKind::Product;
  s.components = std::move(components);
  return s;
}

int PerturbationSet::dim() const {
  switch (kind) {
    case PerturbationKind::Singleton: return static_cast<int>(point.size());
    case PerturbationKind::Box: return static_cast<int>(lo.size());
    case PerturbationKind::PolytopeV: return static_cast<int>(vertices.rows());
    case PerturbationKind::PolytopeH: return poly.dim();
    case PerturbationKind::Ellipsoid: return static_cast<int>(shape.rows());
    case PerturbationKind::Product: {
      int d = 0;
      for (const auto& c : components) d += c.dim();
      return d;
    }
  }
  return 0;
}

const Vector& PerturbationSet::singleton_value() const {
  if (!is_singleton())
    throw std::invalid_argument("PerturbationSet: singleton payload requested on a non-singleton");
  return point;
}

bool PerturbationSet::contains_zero(const Tolerances& tol) const {
  const double eps = tol.lp_tol;
  switch (kind) {
    case PerturbationKind::Singleton: return point.size() == 0 || point.cwiseAbs().maxCoeff() <= eps;
    case PerturbationKind::Box:
      return (lo.array() <= eps).all() && (hi.array() >= -eps).all();
    case PerturbationKind::Ellipsoid: return true;  // gamma > 0
    case PerturbationKind::PolytopeH: return contains_point(poly, Vector::Zero(poly.dim()), eps);
    case PerturbationKind::PolytopeV: {
      // is 0 a convex combination of the vertices?
      LinearProgram lp;
      const int nv = static_cast<int>(vertices.cols());
      lp.num_vars = nv;
      lp.objective = Vector::Zero(nv);
      lp.a_ub = Matrix(0, nv);
      lp.b_ub = Vector(0);
      lp.a_eq = Matrix(dim() + 1, nv);
      lp.a_eq.topRows(dim()) = vertices;
      lp.a_eq.row(dim()).setOnes();
      lp.b_eq = Vector::Zero(dim() + 1);
      lp.b_eq(dim()) = 1.0;
      lp.lower.assign(nv, 0.0);
      Tolerances t;
      return lp_solve(lp, t).status == LpStatus::Optimal;
    }
    case PerturbationKind::Product:
      for (const auto& c : components)
        if (!c.contains_zero(tol)) return false;
      return true;
  }
  return false;
}

double PerturbationSet::interior_radius(const Tolerances& tol) const {
  switch (kind) {
    case PerturbationKind::Singleton: return 0.0;
    case PerturbationKind::Box: {
      if (lo.size() == 0) return 0.0;
      double r = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < lo.size(); ++i) r = std::min({r, -lo(i), hi(i)});
      return r;
    }
    case PerturbationKind::Ellipsoid: {
      Eigen::SelfAdjointEigenSolver<Matrix> es(shape);
      return gamma / std::sqrt(es.eigenvalues().maxCoeff());
    }
    case PerturbationKind::PolytopeH: return interior_ball_radius_at_origin(poly);
    case PerturbationKind::PolytopeV: {
      // sampled support lower bound: min over axis and seeded random directions
      const int d = dim();
      std::mt19937_64 g(0x5eed);
      std::normal_distribution<double> nd(0.0, 1.0);
      double r = std::numeric_limits<double>::infinity();
      auto support_dir = [&](const Vector& u) {
        double best = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < vertices.cols(); ++c) best = std::max(best, u.dot(vertices.col(c)));
        return best;
      };
      for (int j = 0; j < d; ++j) {
        Vector u = Vector::Zero(d);
        u(j) = 1;
        r = std::min(r, support_dir(u));
        u(j) = -1;
        r = std::min(r, support_dir(u));
      }
      for (int t = 0; t < 64; ++t) {
        Vector u(d);
        for (int j = 0; j < d; ++j) u(j) = nd(g);
        if (u.norm() == 0) continue;
        u.normalize();
        r = std::min(r, support_dir(u));
      }
      return r;
    }
    case PerturbationKind::Product: {
      double r = std::numeric_limits<double>::infinity();
      for (const auto& c : components) r = std::min(r, c.interior_radius(tol));
      return r;
    }
  }
  return 0.0;
}

void LtiContract::check() const {
  if (m < 0) throw std::invalid_argument("LtiContract: negative depth");
  if (static_cast<int>(assumption_blocks.size()) != m + 1)
    throw std::invalid_argument("LtiContract: expected m+1 assumption blocks");
  if (static_cast<int>(guarantee_blocks.size()) != m + 1)
    throw std::invalid_argument("LtiContract: expected m+1 guarantee blocks");
  for (const auto& blk : assumption_blocks)
    if (blk.rows() != a0.size() || blk.cols() != nd())
      throw std::invalid_argument("LtiContract: inconsistent assumption block shape");
  for (const auto& blk : guarantee_blocks)
    if (blk.rows() != g0.size() || blk.cols() != guarantee_blocks[0].cols())
      throw std::invalid_argument("LtiContract: inconsistent guarantee block shape");
  if (guarantee_blocks[0].cols() < nd())
    throw std::invalid_argument("LtiContract: guarantee blocks narrower than the input dimension");
}

LtiContract LtiContract::lifted_to(int target_m) const {
  check();
  if (target_m < m) throw std::invalid_argument("LtiContract::lifted_to: cannot lower the depth");
  if (target_m == m) return *this;
  LtiContract out = *this;
  out.m = target_m;
  for (int r = m + 1; r <= target_m; ++r) {
    out.assumption_blocks.push_back(Matrix::Zero(na(), nd()));
    out.guarantee_blocks.push_back(Matrix::Zero(ng(), guarantee_blocks[0].cols()));
  }
  return out;
}

namespace {

void check_dim(std::vector<std::string>& out, bool ok, const std::string& msg) {
  if (!ok) out.push_back(msg);
}

DimensionReport validate_common(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d,
                                const PolyhedronH& x0, const LtiContract& contract_in) {
  DimensionReport rep;
  auto& v = rep.violations;
  check_dim(v, a.rows() == a.cols(), "A must be square");
  rep.nx = static_cast<int>(a.rows());
  rep.nd = static_cast<int>(b.cols());
  rep.ny = static_cast<int>(c.rows());
  check_dim(v, b.rows() == a.rows(), "B row count must equal n_x");
  check_dim(v, c.cols() == a.cols(), "C column count must equal n_x");
  check_dim(v, d.rows() == c.rows(), "D row count must equal n_y");
  check_dim(v, d.cols() == b.cols(), "D column count must equal n_d");
  check_dim(v, x0.dim() == rep.nx + rep.nd, "x0 ambient dimension must be n_x + n_d");

  LtiContract contract = contract_in;
  if (contract.m == 0) contract = contract.lifted_to(1);
  rep.m = contract.m;
  rep.na = contract.na();
  rep.ng = contract.ng();
  try {
    contract.check();
  } catch (const std::invalid_argument& e) {
    v.push_back(e.what());
  }
  check_dim(v, contract.nd() == rep.nd, "assumption blocks column count must equal n_d");
  if (!contract.guarantee_blocks.empty())
    check_dim(v, contract.guarantee_blocks[0].cols() == rep.nd + rep.ny,
              "guarantee blocks column count must equal n_d + n_y");
  return rep;
}

}  // namespace

DimensionReport validate(const PerturbedLtiSystem& system, const LtiContract& contract) {
  DimensionReport rep = validate_common(system.a, system.b, system.c, system.d, system.x0, contract);
  rep.np = system.np();
  rep.nr = system.nr();
  auto& v = rep.violations;
  check_dim(v, system.e.rows() == system.a.rows(), "E row count must equal n_x");
  check_dim(v, system.f.rows() == system.c.rows(), "F row count must equal n_y");
  check_dim(v, system.p.dim() == system.np(), "P dimension must equal E column count");
  check_dim(v, system.r.dim() == system.nr(), "R dimension must equal F column count");
  if (system.w_offset.size() != 0)
    check_dim(v, system.w_offset.size() == system.a.rows(), "w offset size must equal n_x");
  if (system.v_offset.size() != 0)
    check_dim(v, system.v_offset.size() == system.c.rows(), "v offset size must equal n_y");
  rep.ok = rep.violations.empty();
  return rep;
}

DimensionReport validate(const UnperturbedLtiSystem& system, const LtiContract& contract) {
  DimensionReport rep = validate_common(system.a, system.b, system.c, system.d, system.x0, contract);
  auto& v = rep.violations;
  check_dim(v, system.w.size() == system.a.rows(), "w size must equal n_x");
  check_dim(v, system.v.size() == system.c.rows(), "v size must equal n_y");
  rep.ok = rep.violations.empty();
  return rep;
}

UnperturbedLtiSystem nominal(const PerturbedLtiSystem& system) {
  UnperturbedLtiSystem out;
  out.a = system.a;
  out.b = system.b;
  out.c = system.c;
  out.d = system.d;
  out.w = system.w_offset.size() ? system.w_offset : Vector::Zero(system.nx());
  out.v = system.v_offset.size() ? system.v_offset : Vector::Zero(system.ny());
  out.x0 = system.x0;
  return out;
}

UnperturbedLtiSystem to_unperturbed(const PerturbedLtiSystem& system) {
  if (!system.p.is_singleton() || !system.r.is_singleton())
    throw std::invalid_argument("to_unperturbed: both perturbation sets must be singletons");
  UnperturbedLtiSystem out = nominal(system);
  if (system.np() > 0) out.w += system.e * system.p.singleton_value();
  if (system.nr() > 0) out.v += system.f * system.r.singleton_value();
  return out;
}

PolyhedronH assumption_window_set(const LtiContract& c) {
  c.check();
  Matrix A(c.na(), (c.m + 1) * c.nd());
  for (int r = 0; r <= c.m; ++r) A.middleCols(r * c.nd(), c.nd()) = c.assumption_blocks[r];
  return PolyhedronH(std::move(A), c.a0);
}

PolyhedronH guarantee_window_set(const LtiContract& c) {
  c.check();
  const int w = c.nd() + c.ny();
  Matrix A(c.ng(), (c.m + 1) * w);
  for (int r = 0; r <= c.m; ++r) A.middleCols(r * w, w) = c.guarantee_blocks[r];
  return PolyhedronH(std::move(A), c.g0);
}

bool refines_stepwise(const LtiContract& c1_in, const LtiContract& c2_in, const Tolerances& tol) {
  LtiContract c1 = c1_in, c2 = c2_in;
  const int depth = std::max({c1.m, c2.m, 1});
  c1 = c1.lifted_to(depth);
  c2 = c2.lifted_to(depth);
  if (c1.nd() != c2.nd() || c1.ny() != c2.ny())
    throw std::invalid_argument("refines_stepwise: signal dimensions differ");

  // Assumptions: D2 subset of D1 per window.
  if (!inclusion_h(assumption_window_set(c2), assumption_window_set(c1), tol)) return false;

  // Guarantees: Omega1 restricted to D2-feasible inputs must land in Omega2.
  const int w = c1.nd() + c1.ny();
  const PolyhedronH g1 = guarantee_window_set(c1);
  const PolyhedronH a2 = assumption_window_set(c2);
  Matrix lift = Matrix::Zero(a2.rows(), (depth + 1) * w);
  for (int r = 0; r <= depth; ++r)
    lift.middleCols(r * w, c1.nd()) = a2.a.middleCols(r * c1.nd(), c1.nd());
  Matrix stacked(g1.rows() + lift.rows(), g1.a.cols());
  stacked << g1.a, lift;
  Vector rhs(g1.rows() + lift.rows());
  rhs << g1.b, a2.b;
  return inclusion_h(PolyhedronH(std::move(stacked), std::move(rhs)), guarantee_window_set(c2),
                     tol);
}

}  // namespace agv
