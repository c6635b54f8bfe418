// Primal-dual interior-point method on the homogeneous self-dual embedding
//   0 = A'y + G'z + c tau,  0 = -A x + b tau,  s = -G x + h tau,
//   kappa = -c'x - b'y - h'z,  (s, z) in K x K, tau, kappa >= 0,
// with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "opfrelax/conic.hpp"

namespace opfrelax {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInfStep = std::numeric_limits<double>::infinity();

// Internal cones: rotated blocks are rewritten as second-order cones by the
// isometry (a, b, u) -> ((a+b)/sqrt2, (a-b)/sqrt2, u).
struct Block {
  ConeKind kind;
  int off;
  int rows;
  int k;  // PSD order
  bool rotated;
};

struct BlockScaling {
  Eigen::VectorXd d;  // nonneg
  double beta = 1.0;  // soc
  Eigen::VectorXd v;
  Eigen::MatrixXd r, rti;  // psd
};

enum class Op { W, WT, Winv, WinvT };

Eigen::MatrixXd mat(const Eigen::Ref<const Eigen::VectorXd>& v, int k) {
  Eigen::MatrixXd m(k, k);
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i) {
      const double val = v(svec_index(k, i, j));
      m(i, j) = m(j, i) = i == j ? val : val / kSqrt2;
    }
  return m;
}

void svec(const Eigen::MatrixXd& m, Eigen::Ref<Eigen::VectorXd> out) {
  const int k = static_cast<int>(m.rows());
  for (int j = 0; j < k; ++j)
    for (int i = j; i < k; ++i)
      out(svec_index(k, i, j)) = i == j ? m(i, i) : 0.5 * kSqrt2 * (m(i, j) + m(j, i));
}

double jdot(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v) {
  return u(0) * v(0) - u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

class Cones {
 public:
  explicit Cones(const std::vector<Block>& blocks) : blocks_(blocks) {
    for (const auto& b : blocks_) {
      m_ = std::max(m_, b.off + b.rows);
      if (b.kind == ConeKind::Nonneg) degree_ += b.rows;
      else if (b.kind == ConeKind::SecondOrder) degree_ += 1;
      else degree_ += b.k;
    }
    scal_.resize(blocks_.size());
  }

  int degree() const { return degree_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const BlockScaling& scaling(int b) const { return scal_[b]; }

  Eigen::VectorXd identity() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
    for (const auto& b : blocks_) {
      if (b.kind == ConeKind::Nonneg) e.segment(b.off, b.rows).setOnes();
      else if (b.kind == ConeKind::SecondOrder) e(b.off) = 1.0;
      else
        for (int i = 0; i < b.k; ++i) e(b.off + svec_index(b.k, i, i)) = 1.0;
    }
    return e;
  }

  // NT scaling at (s, z); returns lambda = W z = W^{-T} s, or false when a
  // point is not strictly interior.
  bool compute_scaling(const Eigen::VectorXd& s, const Eigen::VectorXd& z, Eigen::VectorXd& lambda) {
    lambda = Eigen::VectorXd::Zero(m_);
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      const Block& b = blocks_[bi];
      BlockScaling& w = scal_[bi];
      auto sb = s.segment(b.off, b.rows);
      auto zb = z.segment(b.off, b.rows);
      if (b.kind == ConeKind::Nonneg) {
        if ((sb.array() <= 0.0).any() || (zb.array() <= 0.0).any()) return false;
        w.d = (sb.array() / zb.array()).sqrt();
        lambda.segment(b.off, b.rows) = (sb.array() * zb.array()).sqrt();
      } else if (b.kind == ConeKind::SecondOrder) {
        const double sjs = jdot(sb, sb), zjz = jdot(zb, zb);
        if (!(sjs > 0.0) || !(zjz > 0.0) || sb(0) <= 0.0 || zb(0) <= 0.0) return false;
        const Eigen::VectorXd sn = sb / std::sqrt(sjs);
        const Eigen::VectorXd zn = zb / std::sqrt(zjz);
        const double gamma = std::sqrt(0.5 * (1.0 + sn.dot(zn)));
        Eigen::VectorXd wbar = sn;
        wbar(0) += zn(0);
        wbar.tail(b.rows - 1) -= zn.tail(b.rows - 1);
        wbar /= 2.0 * gamma;
        w.beta = std::pow(sjs / zjz, 0.25);
        w.v = wbar;
        w.v(0) += 1.0;
        w.v /= std::sqrt(2.0 * (wbar(0) + 1.0));
        Eigen::VectorXd lam = zb;
        apply_block(bi, Op::W, lam);
        lambda.segment(b.off, b.rows) = lam;
      } else {
        Eigen::LLT<Eigen::MatrixXd> ls(mat(sb, b.k)), lz(mat(zb, b.k));
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
        const Eigen::MatrixXd Ls = ls.matrixL();
        const Eigen::MatrixXd Lz = lz.matrixL();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::VectorXd sig = svd.singularValues();
        if (!(sig.minCoeff() > 0.0)) return false;
        const Eigen::VectorXd isq = sig.array().rsqrt();
        w.r = Ls * svd.matrixV() * isq.asDiagonal();
        w.rti = Lz * svd.matrixU() * isq.asDiagonal();
        for (int i = 0; i < b.k; ++i) lambda(b.off + svec_index(b.k, i, i)) = sig(i);
      }
    }
    return true;
  }

  void apply_block(std::size_t bi, Op op, Eigen::Ref<Eigen::VectorXd> x) const {
    const Block& b = blocks_[bi];
    const BlockScaling& w = scal_[bi];
    if (b.kind == ConeKind::Nonneg) {
      if (op == Op::W || op == Op::WT) x.array() *= w.d.array();
      else x.array() /= w.d.array();
    } else if (b.kind == ConeKind::SecondOrder) {
      if (op == Op::W || op == Op::WT) {
        // beta (2 v v' - J) x
        const double vx = w.v.dot(x);
        x(0) = -x(0);
        x += 2.0 * vx * w.v;
        x *= w.beta;
      } else {
        // (1/beta) (2 J v v' J - J) x
        Eigen::VectorXd jv = w.v;
        jv.tail(b.rows - 1) *= -1.0;
        const double vx = jv.dot(x);
        x(0) = -x(0);
        x += 2.0 * vx * jv;
        x /= w.beta;
      }
    } else {
      const Eigen::MatrixXd M = mat(x, b.k);
      Eigen::MatrixXd out;
      switch (op) {
        case Op::W: out = w.r.transpose() * M * w.r; break;
        case Op::WT: out = w.r * M * w.r.transpose(); break;
        case Op::Winv: out = w.rti * M * w.rti.transpose(); break;
        case Op::WinvT: out = w.rti.transpose() * M * w.rti; break;
      }
      svec(out, x);
    }
  }

  Eigen::VectorXd apply(Op op, const Eigen::VectorXd& x) const {
    Eigen::VectorXd out = x;
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi)
      apply_block(bi, op, out.segment(blocks_[bi].off, blocks_[bi].rows));
    return out;
  }

  // Jordan product u o v.
  Eigen::VectorXd product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(m_);
    for (const auto& b : blocks_) {
      auto ub = u.segment(b.off, b.rows);
      auto vb = v.segment(b.off, b.rows);
      auto ob = out.segment(b.off, b.rows);
      if (b.kind == ConeKind::Nonneg) {
        ob = ub.cwiseProduct(vb);
      } else if (b.kind == ConeKind::SecondOrder) {
        ob(0) = ub.dot(vb);
        ob.tail(b.rows - 1) = ub(0) * vb.tail(b.rows - 1) + vb(0) * ub.tail(b.rows - 1);
      } else {
        const Eigen::MatrixXd U = mat(ub, b.k), V = mat(vb, b.k);
        svec(0.5 * (U * V + V * U), ob);
      }
    }
    return out;
  }

  // Solves lambda o u = w for u, lambda being a scaled point (PSD diagonal).
  Eigen::VectorXd divide(const Eigen::VectorXd& lambda, const Eigen::VectorXd& w) const {
    Eigen::VectorXd out(m_);
    for (const auto& b : blocks_) {
      auto lb = lambda.segment(b.off, b.rows);
      auto wb = w.segment(b.off, b.rows);
      auto ob = out.segment(b.off, b.rows);
      if (b.kind == ConeKind::Nonneg) {
        ob = wb.cwiseQuotient(lb);
      } else if (b.kind == ConeKind::SecondOrder) {
        const double l0 = lb(0);
        const auto l1 = lb.tail(b.rows - 1);
        const double u0 = (l0 * wb(0) - l1.dot(wb.tail(b.rows - 1))) / (l0 * l0 - l1.squaredNorm());
        ob(0) = u0;
        ob.tail(b.rows - 1) = (wb.tail(b.rows - 1) - u0 * l1) / l0;
      } else {
        Eigen::VectorXd lam(b.k);
        for (int i = 0; i < b.k; ++i) lam(i) = lb(svec_index(b.k, i, i));
        const Eigen::MatrixXd Wm = mat(wb, b.k);
        Eigen::MatrixXd U(b.k, b.k);
        for (int i = 0; i < b.k; ++i)
          for (int j = 0; j < b.k; ++j) U(i, j) = 2.0 * Wm(i, j) / (lam(i) + lam(j));
        svec(U, ob);
      }
    }
    return out;
  }

  // Largest alpha with lambda + alpha * d in the cone (lambda scaled, interior).
  double max_step(const Eigen::VectorXd& lambda, const Eigen::VectorXd& d) const {
    double alpha = kInfStep;
    for (const auto& b : blocks_) {
      auto lb = lambda.segment(b.off, b.rows);
      auto db = d.segment(b.off, b.rows);
      if (b.kind == ConeKind::Nonneg) {
        for (int i = 0; i < b.rows; ++i)
          if (db(i) < 0.0) alpha = std::min(alpha, -lb(i) / db(i));
      } else if (b.kind == ConeKind::SecondOrder) {
        alpha = std::min(alpha, soc_step(lb, db));
      } else {
        Eigen::VectorXd isq(b.k);
        for (int i = 0; i < b.k; ++i) isq(i) = 1.0 / std::sqrt(lb(svec_index(b.k, i, i)));
        const Eigen::MatrixXd M = isq.asDiagonal() * mat(db, b.k) * isq.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
        const double emin = es.eigenvalues()(0);
        if (emin < 0.0) alpha = std::min(alpha, -1.0 / emin);
      }
    }
    return alpha;
  }

 private:
  static double soc_step(const Eigen::Ref<const Eigen::VectorXd>& l,
                         const Eigen::Ref<const Eigen::VectorXd>& d) {
    // (l + a d)' J (l + a d) = c + 2 b a + q a^2; first positive root.
    const double q = jdot(d, d), bb = jdot(l, d), c = jdot(l, l);
    double alpha = kInfStep;
    if (d(0) < 0.0) alpha = -l(0) / d(0);
    if (q == 0.0) {
      if (bb < 0.0) alpha = std::min(alpha, -c / (2.0 * bb));
      return alpha;
    }
    const double disc = bb * bb - q * c;
    if (disc < 0.0) return alpha;
    const double sq = std::sqrt(disc);
    const double t = -(bb + std::copysign(sq, bb));
    for (double root : {t / q, t != 0.0 ? c / t : kInfStep})
      if (root > 0.0) alpha = std::min(alpha, root);
    return alpha;
  }

  std::vector<Block> blocks_;
  std::vector<BlockScaling> scal_;
  int m_ = 0;
  int degree_ = 0;
};

// Column group of G used when assembling G' W^{-1} W^{-T} G.
struct Group {
  int block;
  int off;
  int rows;
  std::vector<int> cols;
  Eigen::MatrixXd G;     // rows x cols
  Eigen::MatrixXd Ghat;  // W^{-T} G
};

class Kkt {
 public:
  Kkt(const Eigen::SparseMatrix<double>& A, const Eigen::SparseMatrix<double, Eigen::RowMajor>& G,
      const Cones& cones)
      : A_(A), n_(static_cast<int>(G.cols())), p_(static_cast<int>(A.rows())),
        m_(static_cast<int>(G.rows())) {
    for (std::size_t bi = 0; bi < cones.blocks().size(); ++bi) {
      const Block& b = cones.blocks()[bi];
      if (b.kind == ConeKind::Nonneg) {
        for (int r = 0; r < b.rows; ++r) add_group(G, static_cast<int>(bi), b.off + r, 1);
      } else {
        add_group(G, static_cast<int>(bi), b.off, b.rows);
      }
    }
  }

  // Augmented system in (x, y, W z):
  //   [ 0   A'  Ghat' ]
  //   [ A   0   0     ]
  //   [ Ghat 0  -I    ]   with Ghat = W^{-T} G.
  bool factor(const Cones& cones) {
    const int N = n_ + p_ + m_;
    std::vector<Eigen::Triplet<double>> t;
    for (int col = 0; col < A_.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A_, col); it; ++it) {
        t.emplace_back(n_ + it.row(), it.col(), it.value());
        t.emplace_back(it.col(), n_ + it.row(), it.value());
      }
    double scale = 1.0;
    for (auto& g : groups_) {
      g.Ghat = g.G;
      const Block& b = cones.blocks()[g.block];
      for (int c = 0; c < g.Ghat.cols(); ++c) {
        if (b.kind == ConeKind::Nonneg)
          g.Ghat(0, c) /= cones.scaling(g.block).d(g.off - b.off);
        else
          cones.apply_block(g.block, Op::WinvT, g.Ghat.col(c));
      }
      if (!g.Ghat.allFinite()) return false;
      scale = std::max(scale, g.Ghat.cwiseAbs().maxCoeff());
      for (int r = 0; r < g.rows; ++r)
        for (std::size_t c = 0; c < g.cols.size(); ++c) {
          const int row = n_ + p_ + g.off + r;
          t.emplace_back(row, g.cols[c], g.Ghat(r, static_cast<int>(c)));
          t.emplace_back(g.cols[c], row, g.Ghat(r, static_cast<int>(c)));
        }
    }
    for (int i = 0; i < m_; ++i) t.emplace_back(n_ + p_ + i, n_ + p_ + i, -1.0);
    K0_.resize(N, N);
    K0_.setFromTriplets(t.begin(), t.end());
    K0_.makeCompressed();
    const double delta = 1e-14 * scale;
    for (int i = 0; i < n_; ++i) t.emplace_back(i, i, delta);
    for (int i = 0; i < p_; ++i) t.emplace_back(n_ + i, n_ + i, -delta);
    Eigen::SparseMatrix<double> K(N, N);
    K.setFromTriplets(t.begin(), t.end());
    K.makeCompressed();
    lu_.analyzePattern(K);
    lu_.factorize(K);
    return lu_.info() == Eigen::Success;
  }

  // Solves A'uy + G'uz = px, A ux = py, G ux - W'W uz = pz, given
  // pzs = W^{-T} pz. Returns ux, uy and wuz = W uz.
  bool solve(const Eigen::VectorXd& px, const Eigen::VectorXd& py, const Eigen::VectorXd& pzs,
             Eigen::VectorXd& ux, Eigen::VectorXd& uy, Eigen::VectorXd& wuz) {
    Eigen::VectorXd rhs(n_ + p_ + m_);
    rhs << px, py, pzs;
    Eigen::VectorXd sol = lu_.solve(rhs);
    for (int it = 0; it < 5; ++it) {
      const Eigen::VectorXd res = rhs - K0_ * sol;
      if (!res.allFinite()) return false;
      if (res.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
      sol += lu_.solve(res);
    }
    if (!sol.allFinite()) return false;
    ux = sol.head(n_);
    uy = sol.segment(n_, p_);
    wuz = sol.tail(m_);
    return true;
  }

 private:
  void add_group(const Eigen::SparseMatrix<double, Eigen::RowMajor>& G, int block, int off, int rows) {
    Group g{block, off, rows, {}, {}, {}};
    for (int r = off; r < off + rows; ++r)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(G, r); it; ++it)
        g.cols.push_back(static_cast<int>(it.col()));
    std::sort(g.cols.begin(), g.cols.end());
    g.cols.erase(std::unique(g.cols.begin(), g.cols.end()), g.cols.end());
    g.G = Eigen::MatrixXd::Zero(rows, static_cast<int>(g.cols.size()));
    for (int r = off; r < off + rows; ++r)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(G, r); it; ++it) {
        const int c = static_cast<int>(
            std::lower_bound(g.cols.begin(), g.cols.end(), static_cast<int>(it.col())) - g.cols.begin());
        g.G(r - off, c) += it.value();
      }
    groups_.push_back(std::move(g));
  }

  const Eigen::SparseMatrix<double>& A_;
  int n_, p_, m_;
  std::vector<Group> groups_;
  Eigen::SparseMatrix<double> K0_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

// Maps rotated-cone rows to second-order rows (the map is its own inverse).
Eigen::SparseMatrix<double> rotation(const std::vector<Block>& blocks, int m) {
  std::vector<Eigen::Triplet<double>> t;
  for (const auto& b : blocks) {
    for (int r = 0; r < b.rows; ++r) {
      if (b.rotated && r < 2) continue;
      t.emplace_back(b.off + r, b.off + r, 1.0);
    }
    if (b.rotated) {
      const double a = 1.0 / kSqrt2;
      t.emplace_back(b.off, b.off, a);
      t.emplace_back(b.off, b.off + 1, a);
      t.emplace_back(b.off + 1, b.off, a);
      t.emplace_back(b.off + 1, b.off + 1, -a);
    }
  }
  Eigen::SparseMatrix<double> T(m, m);
  T.setFromTriplets(t.begin(), t.end());
  return T;
}

}  // namespace

ConicSolution solve(const ConicProgram& prog, const SolverSettings& settings) {
  prog.validate();
  settings.validate();
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<Block> blocks;
  int off = 0;
  for (const auto& c : prog.cones) {
    Block b{c.kind, off, c.rows(), c.kind == ConeKind::PsdReal ? c.dim : 0, false};
    if (c.kind == ConeKind::RotatedSecondOrder) {
      b.kind = ConeKind::SecondOrder;
      b.rotated = true;
    }
    blocks.push_back(b);
    off += b.rows;
  }
  const int n = prog.num_vars;
  const int p = static_cast<int>(prog.b.size());
  const int m = off;

  const Eigen::SparseMatrix<double> T = rotation(blocks, m);
  const Eigen::SparseMatrix<double> Gc = T * prog.G;
  const Eigen::SparseMatrix<double, Eigen::RowMajor> Gr = Gc;
  const Eigen::VectorXd h = T * prog.h;
  const Eigen::SparseMatrix<double>& A = prog.A;
  const Eigen::VectorXd& b = prog.b;
  const Eigen::VectorXd& c = prog.c;

  Cones cones(blocks);
  Kkt kkt(A, Gr, cones);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), y = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd s = cones.identity(), z = cones.identity();
  double tau = 1.0, kappa = 1.0;
  const Eigen::VectorXd e = cones.identity();
  const double nu = cones.degree();

  const double resx0 = std::max(1.0, c.norm());
  const double resy0 = std::max(1.0, b.norm());
  const double resz0 = std::max(1.0, h.norm());

  ConicSolution sol;
  sol.status = SolveStatus::IterLimit;

  auto finish = [&](SolveStatus status, const std::string& msg) {
    sol.status = status;
    sol.message = msg;
    sol.tau = tau;
    sol.kappa = kappa;
    if (status == SolveStatus::PrimalInfeasible) {
      const double scale = -(b.dot(y) + h.dot(z));
      sol.x = Eigen::VectorXd::Zero(n);
      sol.y = y / scale;
      sol.z = T * (z / scale);
      sol.s = Eigen::VectorXd::Zero(m);
    } else if (status == SolveStatus::DualInfeasible) {
      const double scale = -c.dot(x);
      sol.x = x / scale;
      sol.s = T * (s / scale);
      sol.y = Eigen::VectorXd::Zero(p);
      sol.z = Eigen::VectorXd::Zero(m);
    } else {
      sol.x = x / tau;
      sol.y = y / tau;
      sol.z = T * (z / tau);
      sol.s = T * (s / tau);
    }
    sol.objective = c.dot(sol.x) + prog.offset;
    sol.dual_objective = -b.dot(sol.y) - prog.h.dot(sol.z) + prog.offset;
    sol.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sol;
  };

  double last_step = 0.0, last_sigma = 0.0;
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd hrx = A.transpose() * y + Gc.transpose() * z;
    const Eigen::VectorXd hry = A * x;
    const Eigen::VectorXd hrz = s + Gc * x;
    const Eigen::VectorXd rx = hrx + c * tau;
    const Eigen::VectorXd ry = -hry + b * tau;
    const Eigen::VectorXd rz = hrz - h * tau;
    const double cx = c.dot(x), by = b.dot(y), hz = h.dot(z);
    const double rt = kappa + cx + by + hz;
    const double gap = s.dot(z);
    const double mu = (gap + tau * kappa) / (nu + 1.0);

    const double pcost = cx / tau, dcost = -(by + hz) / tau;
    const double pres = std::max(ry.norm() / tau / resy0, rz.norm() / tau / resz0);
    const double dres = rx.norm() / tau / resx0;
    const double gapres = std::max(gap / (tau * tau), std::abs(pcost - dcost)) / (1.0 + std::abs(pcost));
    sol.residuals = {pres, dres, gapres};
    sol.iterations = iter;
    if (settings.keep_log)
      sol.log.push_back({iter, pcost + prog.offset, dcost + prog.offset, gapres, pres, dres, tau,
                         kappa, last_step, last_sigma});

    if (!std::isfinite(pres + dres + gapres)) return finish(SolveStatus::NumericalFailure, "non-finite iterate");
    if (pres <= settings.tol_feas && dres <= settings.tol_feas && gapres <= settings.tol_gap)
      return finish(SolveStatus::Optimal, "");
    if (by + hz < 0.0) {
      const double pinf = hrx.norm() / resx0 / -(by + hz);
      if (pinf <= settings.tol_feas) return finish(SolveStatus::PrimalInfeasible, "primal infeasibility certificate");
    }
    if (cx < 0.0) {
      const double dinf = std::max(hry.norm() / resy0, hrz.norm() / resz0) / -cx;
      if (dinf <= settings.tol_feas) return finish(SolveStatus::DualInfeasible, "dual infeasibility certificate");
    }
    if (iter >= settings.max_iters) return finish(SolveStatus::IterLimit, "iteration limit reached");

    Eigen::VectorXd lambda;
    if (!cones.compute_scaling(s, z, lambda))
      return finish(SolveStatus::NumericalFailure, "iterate left the cone interior");
    if (!kkt.factor(cones)) return finish(SolveStatus::NumericalFailure, "KKT factorization failed");

    const Eigen::VectorXd hs = cones.apply(Op::WinvT, h);
    Eigen::VectorXd x1, y1, wz1;
    if (!kkt.solve(-c, b, hs, x1, y1, wz1)) return finish(SolveStatus::NumericalFailure, "KKT solve failed");
    const double den = -wz1.squaredNorm() - kappa / tau;
    const Eigen::VectorXd rzs = cones.apply(Op::WinvT, rz);
    const Eigen::VectorXd ll = cones.product(lambda, lambda);

    Eigen::VectorXd dsa, dza;
    double dtaua = 0.0, dkappaa = 0.0, sigma = 0.0;
    Eigen::VectorXd dx, dy, dz, ds;
    double dtau = 0.0, dkappa = 0.0, alpha = 0.0;
    for (int phase = 0; phase < 2; ++phase) {
      const double eta = phase == 0 ? 1.0 : 1.0 - sigma;
      Eigen::VectorXd dsr = -ll;
      double dk = -tau * kappa;
      if (phase == 1) {
        dsr += sigma * mu * e - cones.product(dsa, dza);
        dk += sigma * mu - dtaua * dkappaa;
      }
      const Eigen::VectorXd us = cones.divide(lambda, dsr);
      Eigen::VectorXd x2, y2, wz2;
      if (!kkt.solve(-eta * rx, eta * ry, -eta * rzs - us, x2, y2, wz2))
        return finish(SolveStatus::NumericalFailure, "KKT solve failed");
      const double num = -eta * rt - dk / tau - c.dot(x2) - b.dot(y2) - hs.dot(wz2);
      dtau = num / den;
      dx = x2 + dtau * x1;
      dy = y2 + dtau * y1;
      const Eigen::VectorXd wdz = wz2 + dtau * wz1;
      const Eigen::VectorXd dss = us - wdz;
      dkappa = (dk - kappa * dtau) / tau;

      double amax = std::min(cones.max_step(lambda, dss), cones.max_step(lambda, wdz));
      if (dtau < 0.0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0.0) amax = std::min(amax, -kappa / dkappa);
      if (phase == 0) {
        const double aff = std::min(1.0, amax);
        sigma = std::pow(1.0 - aff, 3);
        dsa = dss;
        dza = wdz;
        dtaua = dtau;
        dkappaa = dkappa;
      } else {
        alpha = std::min(1.0, settings.step_fraction * amax);
        dz = cones.apply(Op::Winv, wdz);
        // Taken from the linearised residual equation so that rz shrinks
        // exactly by (1 - alpha eta); equal to W' dss in exact arithmetic.
        ds = -eta * rz - Gc * dx + h * dtau;
      }
    }
    if (!(alpha > 0.0)) return finish(SolveStatus::NumericalFailure, "zero step length");
    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    last_step = alpha;
    last_sigma = sigma;
  }
}

}  // namespace opfrelax
