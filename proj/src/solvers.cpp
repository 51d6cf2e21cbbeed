#include "tdnns/solvers.hpp"

#include "tdnns/transform.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tdnns {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SaddlePointSolver::Impl {
  VectorXd scale;  // A_s = diag(scale) A diag(scale)
  SpMat As;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
};

SaddlePointSolver::SaddlePointSolver(const SpMat& A) : impl_(std::make_unique<Impl>()), A_(&A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("matrix must be square");
  const int n = static_cast<int>(A.rows());
  impl_->scale = VectorXd::Ones(n);
  SpMat As = A;
  As.makeCompressed();
  for (int it = 0; it < 20; ++it) {
    VectorXd m = VectorXd::Zero(n);
    for (int k = 0; k < As.outerSize(); ++k)
      for (SpMat::InnerIterator i(As, k); i; ++i) m[i.row()] = std::max(m[i.row()], std::abs(i.value()));
    double dev = 0.0;
    for (int i = 0; i < n; ++i) {
      if (m[i] == 0.0) throw std::runtime_error("saddle-point system singular (empty row " + std::to_string(i) + ")");
      m[i] = 1.0 / std::sqrt(m[i]);
      dev = std::max(dev, std::abs(1.0 - m[i]));
    }
    for (int k = 0; k < As.outerSize(); ++k)
      for (SpMat::InnerIterator i(As, k); i; ++i) i.valueRef() *= m[i.row()] * m[i.col()];
    impl_->scale.array() *= m.array();
    if (dev < 1e-3) break;
  }
  impl_->As = As;
  impl_->lu.compute(impl_->As);
  if (impl_->lu.info() != Eigen::Success)
    throw std::runtime_error("saddle-point system singular (check for under-constrained boundary conditions)");
}

SaddlePointSolver::~SaddlePointSolver() = default;

VectorXd SaddlePointSolver::solve(const VectorXd& b) const {
  const VectorXd& s = impl_->scale;
  const double bn = b.norm();
  VectorXd x = VectorXd::Zero(b.size());
  if (bn == 0.0) {
    residual_ = 0.0;
    return x;
  }
  VectorXd r = b;
  for (int it = 0; it < 4; ++it) {
    const VectorXd ys = impl_->lu.solve(VectorXd(s.asDiagonal() * r));
    x += s.asDiagonal() * ys;
    r = b - (*A_) * x;
    residual_ = r.norm() / bn;
    if (!std::isfinite(residual_)) throw std::runtime_error("saddle-point system singular (non-finite solution)");
    if (residual_ < 1e-14) break;
  }
  return x;
}

namespace {

// A constant potential on all free phi dofs lies in the kernel when no
// electrode fixes the potential level.
void check_potential_gauge(const BlockSystem& sys) {
  const int np = sys.n_free[2];
  if (np == 0) return;
  VectorXd c = VectorXd::Zero(sys.size());
  c.tail(np).setOnes();
  const VectorXd ac = sys.A * c;
  const VectorXd aabs = sys.A.cwiseAbs() * c;
  if (aabs.norm() > 0.0 && ac.norm() <= 1e-12 * aabs.norm())
    throw std::runtime_error("saddle-point system singular (potential fixed only up to a constant: no grounded electrode)");
}

}  // namespace

StaticResult solve_static(const BlockSystem& sys, double tol) {
  StaticResult out;
  check_potential_gauge(sys);
  VectorXd x = VectorXd::Zero(sys.size());
  if (sys.b.norm() > 0.0) {
    SaddlePointSolver solver(sys.A);
    x = solver.solve(sys.b);
    out.residual = solver.last_residual();
    if (!(out.residual <= tol))
      {
      std::ostringstream os;
      os << "static solve residual " << std::scientific << out.residual << " above tolerance " << tol;
      throw std::runtime_error(os.str());
    }
  }
  out.solution = expand_solution(sys, x);
  return out;
}

double frequency_from_lambda(double lambda) { return std::sqrt(lambda) / (2.0 * std::numbers::pi); }

namespace {

double mdot(const SpMat& M, const VectorXd& a, const VectorXd& b) { return a.dot(M * b); }

void orthogonalize(const SpMat& M, VectorXd& q, const std::vector<VectorXd>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& v : basis) q -= mdot(M, v, q) * v;
}

}  // namespace

EigenPair inverse_iteration(const SpMat& A, const SpMat& M, const SaddlePointSolver& solver, VectorXd q,
                            double tol, double residual_tol, int max_it, const std::vector<VectorXd>& deflate) {
  orthogonalize(M, q, deflate);
  double mn = mdot(M, q, q);
  if (!(mn > 0.0)) throw std::invalid_argument("start vector has no mass content");
  q /= std::sqrt(mn);
  EigenPair ep;
  double lambda = 0.0;
  for (int it = 1; it <= max_it; ++it) {
    VectorXd y = solver.solve(M * q);
    orthogonalize(M, y, deflate);
    mn = mdot(M, y, y);
    if (!(mn > 0.0)) throw std::runtime_error("inverse iteration lost mass content");
    q = y / std::sqrt(mn);
    const VectorXd Aq = A * q;
    const double lambda_new = q.dot(Aq);  // q^T M q = 1
    ep.history.push_back(lambda_new);
    const double change = std::abs(lambda_new - lambda) / std::abs(lambda_new);
    lambda = lambda_new;
    ep.iterations = it;
    const double an = Aq.norm();
    ep.residual = an > 0.0 ? (Aq - lambda * (M * q)).norm() / an : 0.0;
    if (it > 1 && change <= tol && ep.residual <= residual_tol) {
      ep.converged = true;
      break;
    }
  }
  ep.lambda = lambda;
  ep.frequency = lambda > 0.0 ? frequency_from_lambda(lambda) : 0.0;
  ep.q = q;
  return ep;
}

EigenResult eigen_smallest_k(const SpMat& A, const SpMat& M, const EigenOptions& opt) {
  if (opt.k < 1) throw std::invalid_argument("number of eigenpairs must be at least 1");
  const int n = static_cast<int>(A.rows());
  const int m = std::min(n, std::max(2 * opt.k, opt.k + 4));
  SaddlePointSolver solver(A);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  MatrixXd Q(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) Q(i, j) = unif(rng);
  {
    const MatrixXd G = Q.transpose() * (M * Q);
    Eigen::LLT<MatrixXd> l(0.5 * (G + G.transpose()));
    if (l.info() != Eigen::Success) throw std::invalid_argument("start vector has no mass content");
    Q = l.matrixU().solve<Eigen::OnTheRight>(Q);
  }
  EigenResult res;
  res.pairs.resize(opt.k);
  VectorXd prev = VectorXd::Zero(m);
  std::vector<bool> done(opt.k, false);
  for (int it = 1; it <= opt.max_it; ++it) {
    const MatrixXd MQ = M * Q;
    MatrixXd Y(n, m);
    for (int j = 0; j < m; ++j) Y.col(j) = solver.solve(MQ.col(j));
    // Rayleigh-Ritz on span(Y): Y^T A Y = (MQ)^T A^-1 (MQ) is positive definite
    MatrixXd Ah = Y.transpose() * (A * Y), Mh = Y.transpose() * (M * Y);
    Ah = 0.5 * (Ah + Ah.transpose()).eval();
    Mh = 0.5 * (Mh + Mh.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ge(Ah, Mh);
    if (ge.info() != Eigen::Success) throw std::runtime_error("inverse iteration lost mass content");
    Q = Y * ge.eigenvectors();
    const VectorXd theta = ge.eigenvalues();
    bool all = true;
    for (int j = 0; j < opt.k; ++j) {
      EigenPair& ep = res.pairs[j];
      if (done[j]) continue;
      const VectorXd q = Q.col(j);
      const VectorXd Aq = A * q;
      const double lambda = theta[j];
      ep.history.push_back(lambda);
      ep.iterations = it;
      const double an = Aq.norm();
      ep.residual = an > 0.0 ? (Aq - lambda * (M * q)).norm() / an : 0.0;
      ep.lambda = lambda;
      ep.q = q;
      const double change = std::abs(lambda - prev[j]) / std::abs(lambda);
      if (it > 1 && change <= opt.tol && ep.residual <= opt.residual_tol) {
        ep.converged = true;
        done[j] = true;
      }
      all = all && done[j];
    }
    prev = theta;
    if (all) break;
  }
  res.all_converged = true;
  for (auto& ep : res.pairs) {
    ep.frequency = ep.lambda > 0.0 ? frequency_from_lambda(ep.lambda) : 0.0;
    res.all_converged = res.all_converged && ep.converged;
  }
  return res;
}

EigenResult eigen_smallest_k(const BlockSystem& sys, const EigenOptions& opt) {
  return eigen_smallest_k(sys.A, sys.M, opt);
}

DenseReduction dense_reduction_check(const BlockSystem& sys, int limit) {
  if (sys.dofs.condensed && sys.dofs.s.local_only > 0)
    throw std::invalid_argument("dense reduction requires an uncondensed system");
  if (sys.size() > limit) throw std::invalid_argument("system too large for the dense reduction");
  const int nu = sys.n_free[0], ns = sys.n_free[1], np = sys.n_free[2];
  const MatrixXd A = MatrixXd(sys.A);
  const MatrixXd Mu = MatrixXd(sys.M).topLeftCorner(nu, nu);
  const MatrixXd B = A.block(nu, 0, ns, nu);
  const MatrixXd C = -A.block(nu, nu, ns, ns);
  MatrixXd Cbar = C;
  if (np > 0) {
    const MatrixXd D = A.block(nu + ns, nu, np, ns);
    const MatrixXd E = -A.block(nu + ns, nu + ns, np, np);
    Eigen::LLT<MatrixXd> le(E);
    if (le.info() != Eigen::Success) throw std::runtime_error("permittivity block not positive definite");
    Cbar -= D.transpose() * le.solve(D);
  }
  Cbar = 0.5 * (Cbar + Cbar.transpose()).eval();
  DenseReduction out;
  Eigen::SelfAdjointEigenSolver<MatrixXd> ce(Cbar, Eigen::EigenvaluesOnly);
  out.cbar_min_eigenvalue = ce.eigenvalues()[0];
  out.cbar_max_eigenvalue = ce.eigenvalues()[ns - 1];
  Eigen::LLT<MatrixXd> lc(Cbar);
  if (lc.info() != Eigen::Success || !(out.cbar_min_eigenvalue > 0.0))
    throw std::runtime_error("reduced compliance is not positive definite");
  MatrixXd K = B.transpose() * lc.solve(B);
  K = 0.5 * (K + K.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ge(K, Mu, Eigen::EigenvaluesOnly);
  if (ge.info() != Eigen::Success) throw std::runtime_error("dense generalized eigenproblem failed");
  out.eigenvalues = ge.eigenvalues();
  return out;
}

FieldValues eval_field(const Solution& s, int e, const Vec3& xh) {
  const BlockSystem& sys = *s.system;
  const Mesh& mesh = *sys.mesh;
  const Element& el = mesh.elements[e];
  const PointGeometry pg = point_geometry(mesh.map(e).eval(xh));
  FieldValues fv;
  fv.x = pg.mp.x;
  std::vector<Dual3> v;
  const VectorXd au = local_coefficients(s, FieldKind::vector, e);
  const auto& cu = catalog(FieldKind::vector, el.kind, sys.dofs.p);
  cu.evaluate(xh, v);
  for (int i = 0; i < cu.size(); ++i) fv.u += au[i] * push_displacement(pg, vector_value(&v[3 * i]));
  const VectorXd as = local_coefficients(s, FieldKind::tensor, e);
  const auto& cs = catalog(FieldKind::tensor, el.kind, sys.dofs.p);
  cs.evaluate(xh, v);
  Mat3 sh = Mat3::Zero();
  for (int i = 0; i < cs.size(); ++i) sh += as[i] * tensor_value(&v[6 * i]);
  fv.sigma = push_stress(pg, sh);
  Vec3 grad = Vec3::Zero();
  const VectorXd ap = local_coefficients(s, FieldKind::scalar, e);
  if (ap.size() > 0) {
    const auto& cp = catalog(FieldKind::scalar, el.kind, sys.dofs.p_phi);
    cp.evaluate(xh, v);
    Vec3 gh = Vec3::Zero();
    for (int i = 0; i < cp.size(); ++i) {
      fv.phi += ap[i] * v[i].v;
      gh += ap[i] * scalar_gradient(&v[i]);
    }
    grad = push_gradient(pg, gh);
  }
  fv.E = -grad;
  MaterialLawCompliance m = sys.materials.at(el.material);
  const Frame& fr = mesh.frames.at(el.frame);
  if (fr.kind != Frame::Kind::global) m = rotate_material(m, fr.rotation(pg.mp.x));
  const Vec6 eps = m.S * stress_voigt(fv.sigma) + m.d.transpose() * fv.E;
  fv.strain = from_strain_voigt(eps).to_matrix();
  return fv;
}

Vec3 displacement_at(const Solution& s, const Vec3& x) {
  const Mesh& mesh = *s.system->mesh;
  double scale = 0.0;
  for (const auto& v : mesh.vertices) scale = std::max(scale, v.norm());
  const auto hits = mesh.locate_all(x, 1e-9 * std::max(scale, 1e-300));
  if (hits.empty()) throw std::invalid_argument("point is outside the mesh");
  Vec3 u = Vec3::Zero();
  for (const auto& [e, xh] : hits) u += eval_field(s, e, xh).u;
  return u / static_cast<double>(hits.size());
}

}  // namespace tdnns
