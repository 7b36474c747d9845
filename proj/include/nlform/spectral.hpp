#pragma once

// Best constant of the discrete weighted Poincare inequality as the largest
// eigenvalue of the pencil (centered weighted mass, form matrix) on the
// orthogonal complement of constants. A dense congruence eigensolve is the
// oracle; shifted inverse iteration provides the independent second route.

#include <Eigen/Dense>

#include "nlform/discretization.hpp"

namespace nlform {

struct SingularForm : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class GapMethod { DenseOracle, InverseIteration };

inline const char* to_string(GapMethod m) {
  return m == GapMethod::DenseOracle ? "dense" : "inverse_iteration";
}

struct GapResult {
  double bestConstant = 0.0;
  Eigen::VectorXd extremizer;
  double residual = 0.0;
  GapMethod method = GapMethod::DenseOracle;
};

namespace detail {

// orthonormal basis of the Euclidean complement of constants (Householder
// reflector mapping e_1 to 1/sqrt(n), columns 2..n)
inline Eigen::MatrixXd constants_complement(int n) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  v[0] -= 1.0;
  v.normalize();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) - 2.0 * v * v.transpose();
  return H.rightCols(n - 1);
}

// centered weighted mass matrix P^T W P with P f = f - (mu-mean of f)
inline Eigen::MatrixXd centered_weight_matrix(const DiscreteForm& form) {
  const Eigen::VectorXd& m = form.massV;
  const Eigen::VectorXd& wm = form.massWeighted;
  int n = m.size();
  Eigen::VectorXd p = m / m.sum();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) -
                      Eigen::VectorXd::Ones(n) * p.transpose();
  return P.transpose() * wm.asDiagonal() * P;
}

}  // namespace detail

struct GapOptions {
  GapMethod method = GapMethod::DenseOracle;
  int maxIterations = 400;
  double tolerance = 1e-12;
};

inline GapResult best_constant(const DiscreteForm& form, const GapOptions& opt = {}) {
  const int n = form.A.rows();
  if ((form.massWeighted.array() < 0.0).any())
    throw BadParameter("best_constant: weighted mass must be nonnegative");
  Eigen::MatrixXd Q = detail::constants_complement(n);
  Eigen::MatrixXd Ar = Q.transpose() * form.A * Q;
  Eigen::MatrixXd Vt = detail::centered_weight_matrix(form);
  Eigen::MatrixXd Vr = Q.transpose() * Vt * Q;
  Ar = 0.5 * (Ar + Ar.transpose());
  Vr = 0.5 * (Vr + Vr.transpose());

  double normA = form.A.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> aEig(Ar, Eigen::EigenvaluesOnly);
  if (aEig.eigenvalues().minCoeff() < 1e-12 * normA)
    throw SingularForm("form matrix is singular on the mean-zero subspace (disconnected proxy)");

  GapResult out;
  out.method = opt.method;
  Eigen::VectorXd xr;
  if (opt.method == GapMethod::DenseOracle) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Vr, Ar);
    int last = n - 2;
    out.bestConstant = ges.eigenvalues()[last];
    xr = ges.eigenvectors().col(last);
  } else {
    // Lanczos (full reorthogonalization) on L^{-1} Vr L^{-T} with Ar = L L^T
    // locates the top of the pencil; Rayleigh-shifted inverse iteration
    // polishes the Ritz pair.
    Eigen::LLT<Eigen::MatrixXd> llt(Ar);
    const int m = n - 1;
    const int steps = std::min(m, 140);
    Eigen::MatrixXd basis(m, steps);
    Eigen::VectorXd alpha(steps), beta(steps);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) v[i] = 1.0 + 0.1 * (i % 7);
    v.normalize();
    int built = 0;
    for (int j = 0; j < steps; ++j) {
      basis.col(j) = v;
      // w = L^{-1} Vr L^{-T} v
      Eigen::VectorXd w = llt.matrixU().solve(v);
      w = Vr * w;
      w = llt.matrixL().solve(w);
      alpha[j] = v.dot(w);
      w -= alpha[j] * v;
      if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
      for (int r2 = 0; r2 <= j; ++r2) w -= basis.col(r2).dot(w) * basis.col(r2);
      beta[j] = w.norm();
      built = j + 1;
      if (beta[j] < 1e-14) break;
      v = w / beta[j];
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(built, built);
    for (int j = 0; j < built; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < built) {
        T(j, j + 1) = beta[j];
        T(j + 1, j) = beta[j];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tEig(T);
    double lambda = tEig.eigenvalues()[built - 1];
    Eigen::VectorXd y = basis.leftCols(built) * tEig.eigenvectors().col(built - 1);
    xr = llt.matrixU().solve(y);  // back to pencil coordinates
    double nx = std::sqrt(xr.dot(Ar * xr));
    if (nx > 0) xr /= nx;
    lambda = xr.dot(Vr * xr) / xr.dot(Ar * xr);
    for (int it = 0; it < opt.maxIterations; ++it) {
      double shift = lambda * (1.0 + 1e-10) + 1e-300;
      Eigen::MatrixXd S = Vr - shift * Ar;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
      Eigen::VectorXd z = lu.solve(Ar * xr);
      double nz = z.norm();
      if (!std::isfinite(nz) || nz == 0.0) break;
      xr = z / nz;
      double next = xr.dot(Vr * xr) / xr.dot(Ar * xr);
      bool done = std::abs(next - lambda) <= opt.tolerance * std::abs(next);
      lambda = next;
      if (done) break;
    }
    out.bestConstant = lambda;
  }

  Eigen::VectorXd f = Q * xr;
  // shifting by constants changes neither quadratic form; recenter to the
  // mu-mean so the extremizer certificate is canonical
  f.array() -= form.massV.dot(f) / form.massV.sum();
  double fv = f.dot(form.A * f);
  if (fv > 0) f /= std::sqrt(fv);
  out.extremizer = f;
  Eigen::VectorXd r = detail::centered_weight_matrix(form) * f - out.bestConstant * (form.A * f);
  out.residual = r.norm() / std::max(1e-300, out.bestConstant * (form.A * f).norm());
  return out;
}

enum class SweepVerdict { Stable, Diverging, Inconclusive };

inline const char* to_string(SweepVerdict v) {
  switch (v) {
    case SweepVerdict::Stable: return "stable";
    case SweepVerdict::Diverging: return "diverging";
    default: return "inconclusive";
  }
}

struct StabilitySweep {
  std::vector<double> radii;
  std::vector<double> constants;
  SweepVerdict verdict = SweepVerdict::Inconclusive;
};

// best_constant on grids of fixed spacing and growing radius; the paper's
// hold/fail dichotomy becomes a numeric trend. Stable: last three values
// within 10%. Diverging: overall growth factor >= 1.3.
inline StabilitySweep constant_stability_sweep(const PotentialSpec& V,
                                               const KernelProfile& kernel,
                                               const WeightFunction& weight,
                                               const std::vector<double>& radii,
                                               KernelKind kind = KernelKind::RhoForm,
                                               double spacing = 0.25,
                                               const AssemblyOptions& opt = {}) {
  if (radii.size() < 2) throw BadParameter("stability sweep needs at least two radii");
  for (size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw BadParameter("sweep radii must increase");
  StabilitySweep sweep;
  for (double R : radii) {
    int npa = static_cast<int>(std::lround(2.0 * R / spacing)) + 1;
    Grid g = make_grid(V.dimension(), R, npa);
    DiscreteForm form = assemble(V, kernel, weight, g, kind, opt);
    GapResult gap = best_constant(form);
    sweep.radii.push_back(R);
    sweep.constants.push_back(gap.bestConstant);
  }
  size_t m = sweep.constants.size();
  double lastHi = 0.0, lastLo = quad::kInf;
  for (size_t i = m - std::min<size_t>(3, m); i < m; ++i) {
    lastHi = std::max(lastHi, sweep.constants[i]);
    lastLo = std::min(lastLo, sweep.constants[i]);
  }
  if (lastHi <= 1.10 * lastLo)
    sweep.verdict = SweepVerdict::Stable;
  else if (sweep.constants.back() >= 1.3 * sweep.constants.front())
    sweep.verdict = SweepVerdict::Diverging;
  return sweep;
}

}  // namespace nlform
