#include "model_json.hpp"

#include <cmath>

namespace agv {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

static void expect(bool cond, const std::string& field, const std::string& what) {
  if (!cond) throw std::invalid_argument("field '" + field + "': " + what);
}

Matrix matrix_from_json(const json& j, const std::string& field, int rows_hint, int cols_hint) {
  expect(j.is_array(), field, "expected an array of rows");
  const int rows = static_cast<int>(j.size());
  if (rows == 0) {
    expect(rows_hint <= 0, field, "expected " + std::to_string(rows_hint) + " rows, got 0");
    return Matrix(0, std::max(cols_hint, 0));
  }
  expect(j[0].is_array(), field, "expected nested row arrays");
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    expect(j[i].is_array() && static_cast<int>(j[i].size()) == cols, field,
           "ragged rows at row " + std::to_string(i));
    for (int c = 0; c < cols; ++c) {
      expect(j[i][c].is_number(), field, "non-numeric entry");
      m(i, c) = j[i][c].get<double>();
    }
  }
  if (rows_hint >= 0) expect(rows == rows_hint, field, "unexpected row count");
  if (cols_hint >= 0) expect(cols == cols_hint, field, "unexpected column count");
  return m;
}

Vector vector_from_json(const json& j, const std::string& field, int size_hint) {
  expect(j.is_array(), field, "expected an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    expect(j[i].is_number(), field, "non-numeric entry");
    v(i) = j[i].get<double>();
  }
  if (size_hint >= 0) expect(static_cast<int>(v.size()) == size_hint, field, "unexpected size");
  return v;
}

json perturbation_to_json(const PerturbationSet& set) {
  json j;
  switch (set.kind) {
    case PerturbationKind::Singleton:
      j["type"] = "singleton";
      j["v"] = vector_to_json(set.point);
      break;
    case PerturbationKind::Box:
      j["type"] = "box";
      j["lo"] = vector_to_json(set.lo);
      j["hi"] = vector_to_json(set.hi);
      break;
    case PerturbationKind::PolytopeV:
      j["type"] = "polytope_v";
      j["F"] = matrix_to_json(set.vertices);
      break;
    case PerturbationKind::PolytopeH:
      j["type"] = "polytope_h";
      j["A"] = matrix_to_json(set.poly.a);
      j["b"] = vector_to_json(set.poly.b);
      break;
    case PerturbationKind::Ellipsoid:
      j["type"] = "ellipsoid";
      j["H"] = matrix_to_json(set.shape);
      j["gamma"] = set.gamma;
      break;
    case PerturbationKind::Product: {
      j["type"] = "product";
      json comps = json::array();
      for (const auto& c : set.components) comps.push_back(perturbation_to_json(c));
      j["components"] = std::move(comps);
      break;
    }
  }
  return j;
}

PerturbationSet perturbation_from_json(const json& j, const std::string& field, int dim_hint,
                                       const Tolerances& tol) {
  expect(j.is_object() && j.contains("type"), field, "expected a tagged perturbation object");
  const std::string type = j.at("type").get<std::string>();
  if (type == "singleton")
    return PerturbationSet::singleton(vector_from_json(j.at("v"), field + ".v", dim_hint));
  if (type == "box")
    return PerturbationSet::box(vector_from_json(j.at("lo"), field + ".lo", dim_hint),
                                vector_from_json(j.at("hi"), field + ".hi", dim_hint));
  if (type == "polytope_v")
    return PerturbationSet::polytope_v(matrix_from_json(j.at("F"), field + ".F", dim_hint));
  if (type == "polytope_h") {
    Matrix a = matrix_from_json(j.at("A"), field + ".A", -1, dim_hint);
    Vector b = vector_from_json(j.at("b"), field + ".b", static_cast<int>(a.rows()));
    return PerturbationSet::polytope_h(PolyhedronH(std::move(a), std::move(b)), tol);
  }
  if (type == "ellipsoid")
    return PerturbationSet::ellipsoid(
        matrix_from_json(j.at("H"), field + ".H", dim_hint, dim_hint),
        j.at("gamma").get<double>());
  if (type == "product") {
    expect(j.contains("components") && j.at("components").is_array(), field,
           "product needs a components array");
    std::vector<PerturbationSet> comps;
    for (std::size_t i = 0; i < j.at("components").size(); ++i)
      comps.push_back(perturbation_from_json(j.at("components")[i],
                                             field + ".components[" + std::to_string(i) + "]", -1,
                                             tol));
    PerturbationSet s = PerturbationSet::product(std::move(comps));
    if (dim_hint >= 0) expect(s.dim() == dim_hint, field, "product dimension mismatch");
    return s;
  }
  throw std::invalid_argument("field '" + field + "': unknown perturbation type '" + type + "'");
}

json model_to_json(const Model& model) {
  const auto& s = model.system;
  const auto& c = model.contract;
  json sys;
  sys["A"] = matrix_to_json(s.a);
  sys["B"] = matrix_to_json(s.b);
  sys["C"] = matrix_to_json(s.c);
  sys["D"] = matrix_to_json(s.d);
  sys["E"] = matrix_to_json(s.e);
  sys["F"] = matrix_to_json(s.f);
  if (s.w_offset.size() && !s.w_offset.isZero(0.0)) sys["w"] = vector_to_json(s.w_offset);
  if (s.v_offset.size() && !s.v_offset.isZero(0.0)) sys["v"] = vector_to_json(s.v_offset);
  sys["x0"] = {{"A", matrix_to_json(s.x0.a)}, {"b", vector_to_json(s.x0.b)}};
  sys["P"] = perturbation_to_json(s.p);
  sys["R"] = perturbation_to_json(s.r);

  json con;
  con["m"] = c.m;
  json ablocks = json::array(), gblocks = json::array();
  for (const auto& blk : c.assumption_blocks) ablocks.push_back(matrix_to_json(blk));
  for (const auto& blk : c.guarantee_blocks) gblocks.push_back(matrix_to_json(blk));
  con["assumption_blocks"] = std::move(ablocks);
  con["a0"] = vector_to_json(c.a0);
  con["guarantee_blocks"] = std::move(gblocks);
  con["g0"] = vector_to_json(c.g0);

  return json{{"system", std::move(sys)}, {"contract", std::move(con)}};
}

Model model_from_json(const json& j, const Tolerances& tol) {
  expect(j.is_object() && j.contains("system") && j.contains("contract"), "model",
         "expected top-level 'system' and 'contract' objects");
  const json& sys = j.at("system");
  const json& con = j.at("contract");

  Model model;
  auto& s = model.system;
  s.a = matrix_from_json(sys.at("A"), "system.A");
  const int nx = static_cast<int>(s.a.rows());
  expect(s.a.cols() == nx, "system.A", "must be square");
  s.b = matrix_from_json(sys.at("B"), "system.B", nx);
  const int nd = static_cast<int>(s.b.cols());
  s.c = matrix_from_json(sys.at("C"), "system.C", -1, nx);
  const int ny = static_cast<int>(s.c.rows());
  s.d = matrix_from_json(sys.at("D"), "system.D", ny, nd);
  s.e = sys.contains("E") ? matrix_from_json(sys.at("E"), "system.E", nx) : Matrix(nx, 0);
  s.f = sys.contains("F") ? matrix_from_json(sys.at("F"), "system.F", ny) : Matrix(ny, 0);
  s.w_offset = sys.contains("w") ? vector_from_json(sys.at("w"), "system.w", nx) : Vector::Zero(nx);
  s.v_offset = sys.contains("v") ? vector_from_json(sys.at("v"), "system.v", ny) : Vector::Zero(ny);
  expect(sys.contains("x0"), "system.x0", "missing");
  {
    Matrix a = matrix_from_json(sys.at("x0").at("A"), "system.x0.A", -1, nx + nd);
    Vector b = vector_from_json(sys.at("x0").at("b"), "system.x0.b", static_cast<int>(a.rows()));
    if (a.rows() == 0) a = Matrix(0, nx + nd);
    s.x0 = PolyhedronH(std::move(a), std::move(b));
  }
  s.p = perturbation_from_json(sys.at("P"), "system.P", static_cast<int>(s.e.cols()), tol);
  s.r = perturbation_from_json(sys.at("R"), "system.R", static_cast<int>(s.f.cols()), tol);

  auto& c = model.contract;
  c.m = con.at("m").get<int>();
  expect(c.m >= 0, "contract.m", "depth must be nonnegative");
  c.a0 = vector_from_json(con.at("a0"), "contract.a0");
  c.g0 = vector_from_json(con.at("g0"), "contract.g0");
  const json& ab = con.at("assumption_blocks");
  const json& gb = con.at("guarantee_blocks");
  expect(ab.is_array() && static_cast<int>(ab.size()) == c.m + 1, "contract.assumption_blocks",
         "expected m+1 blocks");
  expect(gb.is_array() && static_cast<int>(gb.size()) == c.m + 1, "contract.guarantee_blocks",
         "expected m+1 blocks");
  for (int r = 0; r <= c.m; ++r) {
    c.assumption_blocks.push_back(
        matrix_from_json(ab[r], "contract.assumption_blocks[" + std::to_string(r) + "]",
                         static_cast<int>(c.a0.size()), nd));
    c.guarantee_blocks.push_back(
        matrix_from_json(gb[r], "contract.guarantee_blocks[" + std::to_string(r) + "]",
                         static_cast<int>(c.g0.size()), nd + ny));
  }
  c.check();
  return model;
}

Model model_from_string(const std::string& text, const Tolerances& tol) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("malformed JSON: ") + e.what());
  }
  return model_from_json(j, tol);
}

json report_to_json(const VerificationReport& rep) {
  json j;
  j["verdict"] = to_string(rep.verdict);
  j["iota"] = rep.iota;
  j["nu"] = rep.nu;
  j["lp_groups"] = rep.lp_groups;
  j["lp_count_rows"] = rep.lp_count_rows;
  j["wall_seconds"] = rep.wall_seconds;
  json thetas = json::array();
  for (const auto& rec : rep.theta_records) {
    json t;
    t["n"] = rec.n;
    t["ell"] = rec.ell;
    t["row"] = rec.row;
    if (std::isfinite(rec.value))
      t["value"] = rec.value;
    else
      t["value"] = rec.value > 0 ? "inf" : "-inf";
    t["status"] = to_string(rec.lp_status);
    thetas.push_back(std::move(t));
  }
  j["theta"] = std::move(thetas);
  json groups = json::array();
  for (const auto& [n, ell, val] : rep.group_values()) {
    json grp;
    grp["n"] = n;
    grp["ell"] = ell;
    if (std::isfinite(val))
      grp["theta"] = val;
    else
      grp["theta"] = val > 0 ? "inf" : "-inf";
    groups.push_back(std::move(grp));
  }
  j["theta_by_group"] = std::move(groups);
  j["diagnostics"] = rep.diagnostics;
  if (rep.epsilon > 0) {
    j["epsilon"] = rep.epsilon;
    j["n_per_row"] = rep.n_per_row;
    j["tau_eps"] = vector_to_json(rep.tau_eps);
    j["tau_seconds"] = rep.tau_seconds;
    j["lp_seconds"] = rep.lp_seconds;
  }
  return j;
}

json monitor_to_json(const MonitorReport& rep, const Trajectory& traj) {
  json j;
  j["m"] = rep.m;
  j["horizon"] = traj.horizon;
  j["assumption_ok"] = rep.assumption_ok;
  j["guarantee_ok"] = rep.guarantee_ok;
  if (rep.first_violation)
    j["first_violation"] = *rep.first_violation;
  else
    j["first_violation"] = nullptr;
  double min_margin = std::numeric_limits<double>::infinity();
  for (const auto& m : rep.margins)
    if (m.size()) min_margin = std::min(min_margin, m.minCoeff());
  j["min_margin"] = std::isfinite(min_margin) ? json(min_margin) : json(nullptr);
  double max_residual = 0.0;
  for (double r : traj.residuals) max_residual = std::max(max_residual, r);
  j["max_dynamics_residual"] = max_residual;
  return j;
}

json dimension_report_to_json(const DimensionReport& rep) {
  json j;
  j["ok"] = rep.ok;
  j["nx"] = rep.nx;
  j["nd"] = rep.nd;
  j["ny"] = rep.ny;
  j["na"] = rep.na;
  j["ng"] = rep.ng;
  j["np"] = rep.np;
  j["nr"] = rep.nr;
  j["m"] = rep.m;
  j["violations"] = rep.violations;
  return j;
}

}  // namespace agv
