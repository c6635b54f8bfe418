#include "opfrelax/conic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

namespace opfrelax {

const char* cone_name(ConeKind kind) {
  switch (kind) {
    case ConeKind::Nonneg: return "nonneg";
    case ConeKind::SecondOrder: return "soc";
    case ConeKind::RotatedSecondOrder: return "rsoc";
    case ConeKind::PsdReal: return "psd";
  }
  return "?";
}

namespace {

const char* symbol_kind_name(SymbolKind k) {
  switch (k) {
    case SymbolKind::WDiag: return "WDiag";
    case SymbolKind::WRe: return "WRe";
    case SymbolKind::WIm: return "WIm";
    case SymbolKind::SRe: return "SRe";
    case SymbolKind::SIm: return "SIm";
    case SymbolKind::Ell: return "Ell";
    case SymbolKind::V: return "V";
    case SymbolKind::Epigraph: return "Epigraph";
  }
  return "?";
}

SymbolKind symbol_kind_from(const std::string& s) {
  static const std::map<std::string, SymbolKind> table{
      {"WDiag", SymbolKind::WDiag}, {"WRe", SymbolKind::WRe}, {"WIm", SymbolKind::WIm},
      {"SRe", SymbolKind::SRe},     {"SIm", SymbolKind::SIm}, {"Ell", SymbolKind::Ell},
      {"V", SymbolKind::V},         {"Epigraph", SymbolKind::Epigraph}};
  auto it = table.find(s);
  if (it == table.end()) throw ParseError("unknown symbol kind '" + s + "'");
  return it->second;
}

ConeKind cone_kind_from(const std::string& s) {
  for (ConeKind k : {ConeKind::Nonneg, ConeKind::SecondOrder, ConeKind::RotatedSecondOrder,
                     ConeKind::PsdReal})
    if (s == cone_name(k)) return k;
  throw ParseError("unknown cone kind '" + s + "'");
}

Eigen::SparseMatrix<double> assemble(const std::vector<LinearExpr>& rows, int cols, double sign) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    for (auto [var, coef] : rows[r].terms) trip.emplace_back(r, var, sign * coef);
  Eigen::SparseMatrix<double> m(static_cast<int>(rows.size()), cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

nlohmann::json sparse_to_json(const Eigen::SparseMatrix<double>& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (int col = 0; col < m.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it)
      entries.push_back({it.row(), it.col(), it.value()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

Eigen::SparseMatrix<double> sparse_from_json(const nlohmann::json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& e : j.at("entries")) {
    const int r = e.at(0).get<int>(), c = e.at(1).get<int>();
    if (r < 0 || r >= rows || c < 0 || c >= cols) throw ParseError("sparse entry out of range");
    trip.emplace_back(r, c, e.at(2).get<double>());
  }
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(trip.begin(), trip.end());
  m.makeCompressed();
  return m;
}

nlohmann::json vec_to_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

}  // namespace

std::string to_string(const Symbol& s) {
  return std::string(symbol_kind_name(s.kind)) + "(" + std::to_string(s.i) + "," +
         std::to_string(s.j) + ")";
}

int SymbolTable::add(const Symbol& s) {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(s, -1));
  if (it != sorted_.end() && it->first == s) throw ModelError("duplicate symbol " + to_string(s));
  const int var = size();
  sorted_.insert(it, {s, var});
  symbols_.push_back(s);
  return var;
}

int SymbolTable::find(const Symbol& s) const {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(s, -1));
  if (it != sorted_.end() && it->first == s) return it->second;
  return -1;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  constant += other.constant;
  return *this;
}

LinearExpr LinearExpr::scaled(double a) const {
  LinearExpr out = *this;
  for (auto& t : out.terms) t.second *= a;
  out.constant *= a;
  return out;
}

void LinearExpr::compress() {
  std::stable_sort(terms.begin(), terms.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> merged;
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().first == t.first)
      merged.back().second += t.second;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const auto& t) { return t.second == 0.0; });
  terms = std::move(merged);
}

double LinearExpr::evaluate(const Eigen::VectorXd& x) const {
  double v = constant;
  for (auto [var, coef] : terms) v += coef * x(var);
  return v;
}

int ConicProgram::cone_rows() const {
  int r = 0;
  for (const auto& c : cones) r += c.rows();
  return r;
}

int ConicProgram::count(ConeKind kind) const {
  return static_cast<int>(std::count_if(cones.begin(), cones.end(),
                                        [&](const ConeBlock& c) { return c.kind == kind; }));
}

void ConicProgram::validate() const {
  if (c.size() != num_vars) throw ModelError("objective length differs from variable count");
  if (A.cols() != num_vars || G.cols() != num_vars)
    throw ModelError("constraint matrix width differs from variable count");
  if (A.rows() != b.size()) throw ModelError("equality rows and rhs differ in length");
  if (G.rows() != h.size()) throw ModelError("cone rows and rhs differ in length");
  if (cone_rows() != G.rows()) throw ModelError("cone blocks do not cover the cone rows");
  for (const auto& blk : cones) {
    if (blk.dim < 1) throw ModelError("empty cone block");
    if (blk.kind == ConeKind::SecondOrder && blk.dim < 1) throw ModelError("bad SOC block");
    if (blk.kind == ConeKind::RotatedSecondOrder && blk.dim < 2)
      throw ModelError("rotated cone needs at least 2 rows");
  }
  if (labels.size() != 0 && labels.size() != num_vars)
    throw ModelError("label table does not cover the variables");
}

int ProgramBuilder::add_variable(const Symbol& s) { return labels_.add(s); }

int ProgramBuilder::variable(const Symbol& s) const {
  const int v = labels_.find(s);
  if (v < 0) throw ModelError("no variable for " + to_string(s));
  return v;
}

void ProgramBuilder::add_objective(const LinearExpr& e) { objective_ += e; }

void ProgramBuilder::add_equality(const LinearExpr& e) {
  LinearExpr row = e;
  row.compress();
  equalities_.push_back(std::move(row));
}

void ProgramBuilder::add_cone(ConeKind kind, int dim, const std::vector<LinearExpr>& rows) {
  ConeBlock blk{kind, dim};
  if (static_cast<int>(rows.size()) != blk.rows())
    throw ModelError("cone block row count mismatch");
  for (auto row : rows) {
    row.compress();
    cone_rows_.push_back(std::move(row));
  }
  cones_.push_back(blk);
}

void ProgramBuilder::add_range(const LinearExpr& e, double lo, double hi) {
  if (lo > hi) throw ModelError("empty range");
  if (lo == hi) {
    LinearExpr row = e;
    row.constant -= lo;
    add_equality(row);
    return;
  }
  if (std::isfinite(lo)) {
    LinearExpr row = e;
    row.constant -= lo;
    add_cone(ConeKind::Nonneg, 1, {row});
  }
  if (std::isfinite(hi)) {
    LinearExpr row = e.scaled(-1.0);
    row.constant += hi;
    add_cone(ConeKind::Nonneg, 1, {row});
  }
}

ConicProgram ProgramBuilder::build() const {
  ConicProgram p;
  p.num_vars = labels_.size();
  p.labels = labels_;
  LinearExpr obj = objective_;
  obj.compress();
  p.c = Eigen::VectorXd::Zero(p.num_vars);
  for (auto [var, coef] : obj.terms) p.c(var) += coef;
  p.offset = obj.constant;

  // Equalities: e(x) = 0  ->  A x = -constant.
  p.A = assemble(equalities_, p.num_vars, 1.0);
  p.b.resize(static_cast<int>(equalities_.size()));
  for (int r = 0; r < p.b.size(); ++r) p.b(r) = -equalities_[r].constant;

  // Cone rows: s = e(x) = h - G x  ->  G = -coef, h = constant.
  p.G = assemble(cone_rows_, p.num_vars, -1.0);
  p.h.resize(static_cast<int>(cone_rows_.size()));
  for (int r = 0; r < p.h.size(); ++r) p.h(r) = cone_rows_[r].constant;

  // Merge adjacent single nonneg rows into one block.
  for (const auto& blk : cones_) {
    if (blk.kind == ConeKind::Nonneg && !p.cones.empty() && p.cones.back().kind == ConeKind::Nonneg)
      p.cones.back().dim += blk.dim;
    else
      p.cones.push_back(blk);
  }
  p.validate();
  return p;
}

void SolverSettings::validate() const {
  if (!(tol_gap > 0.0) || !(tol_feas > 0.0)) throw ModelError("solver tolerances must be positive");
  if (!(step_fraction > 0.0 && step_fraction < 1.0))
    throw ModelError("step fraction must lie in (0, 1)");
  if (max_iters < 1) throw ModelError("max_iters must be positive");
}

const char* status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::PrimalInfeasible: return "primal_infeasible";
    case SolveStatus::DualInfeasible: return "dual_infeasible";
    case SolveStatus::IterLimit: return "iteration_limit";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

namespace {

Eigen::MatrixXd svec_to_mat(const Eigen::Ref<const Eigen::VectorXd>& v, int k) {
  Eigen::MatrixXd m(k, k);
  const double r2 = std::sqrt(2.0);
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) {
      const double val = v(svec_index(k, i, j));
      m(i, j) = m(j, i) = i == j ? val : val / r2;
    }
  return m;
}

}  // namespace

double cone_violation(const ConeBlock& block, const Eigen::Ref<const Eigen::VectorXd>& v) {
  switch (block.kind) {
    case ConeKind::Nonneg: return std::max(0.0, -v.minCoeff());
    case ConeKind::SecondOrder: {
      const double t = v(0);
      const double nrm = block.dim > 1 ? v.tail(block.dim - 1).norm() : 0.0;
      return std::max(0.0, nrm - t);
    }
    case ConeKind::RotatedSecondOrder: {
      const double r2 = std::sqrt(2.0);
      const double p = (v(0) + v(1)) / r2, q = (v(0) - v(1)) / r2;
      const double nrm = std::hypot(q, block.dim > 2 ? v.tail(block.dim - 2).norm() : 0.0);
      return std::max(0.0, nrm - p);
    }
    case ConeKind::PsdReal: {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(svec_to_mat(v, block.dim),
                                                        Eigen::EigenvaluesOnly);
      return std::max(0.0, -es.eigenvalues()(0));
    }
  }
  return 0.0;
}

CertificateReport certify(const ConicProgram& prog, const ConicSolution& sol, double tol) {
  if (sol.status != SolveStatus::Optimal)
    throw Error(std::string("nothing to certify: status ") + status_name(sol.status));
  const Eigen::VectorXd& x = sol.x;
  const Eigen::VectorXd& y = sol.y;
  const Eigen::VectorXd& z = sol.z;
  if (x.size() != prog.num_vars || y.size() != prog.b.size() || z.size() != prog.h.size())
    throw Error("solution dimensions do not match the program");

  CertificateReport r;
  const Eigen::VectorXd s = prog.h - prog.G * x;
  const double pr_eq = (prog.A * x - prog.b).norm() / (1.0 + prog.b.norm());
  r.primal_residual = pr_eq;
  r.dual_residual =
      (prog.A.transpose() * y + prog.G.transpose() * z + prog.c).norm() / (1.0 + prog.c.norm());
  const double pobj = prog.c.dot(x);
  const double dobj = -prog.b.dot(y) - prog.h.dot(z);
  r.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

  int row = 0;
  const double hs = 1.0 + prog.h.lpNorm<Eigen::Infinity>();
  for (const auto& blk : prog.cones) {
    const int k = blk.rows();
    r.primal_cone_violation = std::max(r.primal_cone_violation, cone_violation(blk, s.segment(row, k)) / hs);
    r.dual_cone_violation = std::max(r.dual_cone_violation, cone_violation(blk, z.segment(row, k)) / (1.0 + z.lpNorm<Eigen::Infinity>()));
    row += k;
  }
  r.worst = std::max({r.primal_residual, r.dual_residual, r.gap, r.primal_cone_violation,
                      r.dual_cone_violation});
  r.ok = r.worst <= tol;
  return r;
}

void to_json(nlohmann::json& j, const ConicProgram& prog) {
  j = nlohmann::json::object();
  j["format"] = "opfrelax-conic-1";
  j["num_vars"] = prog.num_vars;
  j["c"] = vec_to_json(prog.c);
  j["offset"] = prog.offset;
  j["A"] = sparse_to_json(prog.A);
  j["b"] = vec_to_json(prog.b);
  j["G"] = sparse_to_json(prog.G);
  j["h"] = vec_to_json(prog.h);
  auto cones = nlohmann::json::array();
  for (const auto& c : prog.cones) cones.push_back({{"kind", cone_name(c.kind)}, {"dim", c.dim}});
  j["cones"] = cones;
  auto labels = nlohmann::json::array();
  for (int v = 0; v < prog.labels.size(); ++v) {
    const auto& s = prog.labels.symbol(v);
    labels.push_back({{"kind", symbol_kind_name(s.kind)}, {"i", s.i}, {"j", s.j}});
  }
  j["labels"] = labels;
}

void from_json(const nlohmann::json& j, ConicProgram& prog) {
  prog = ConicProgram{};
  prog.num_vars = j.at("num_vars").get<int>();
  prog.c = vec_from_json(j.at("c"));
  prog.offset = j.value("offset", 0.0);
  prog.A = sparse_from_json(j.at("A"));
  prog.b = vec_from_json(j.at("b"));
  prog.G = sparse_from_json(j.at("G"));
  prog.h = vec_from_json(j.at("h"));
  for (const auto& c : j.at("cones"))
    prog.cones.push_back({cone_kind_from(c.at("kind").get<std::string>()), c.at("dim").get<int>()});
  if (j.contains("labels"))
    for (const auto& l : j.at("labels"))
      prog.labels.add({symbol_kind_from(l.at("kind").get<std::string>()), l.at("i").get<int>(),
                       l.at("j").get<int>()});
  prog.validate();
}

void to_json(nlohmann::json& j, const ConicSolution& sol) {
  j = nlohmann::json::object();
  j["status"] = status_name(sol.status);
  j["objective"] = sol.objective;
  j["dual_objective"] = sol.dual_objective;
  j["iterations"] = sol.iterations;
  j["residuals"] = {{"primal", sol.residuals.primal},
                    {"dual", sol.residuals.dual},
                    {"gap", sol.residuals.gap}};
  j["tau"] = sol.tau;
  j["kappa"] = sol.kappa;
  j["seconds"] = sol.seconds;
  if (!sol.message.empty()) j["message"] = sol.message;
  j["x"] = vec_to_json(sol.x);
  j["y"] = vec_to_json(sol.y);
  j["z"] = vec_to_json(sol.z);
  j["s"] = vec_to_json(sol.s);
}

}  // namespace opfrelax
