#pragma once

// Finite-dimensional proxy of the nonlocal forms: a uniform grid on
// [-R, R]^d (d = 1 or 2), symmetrized pair weights with near-diagonal
// kernel cell-averaging, a small-ball gradient term standing in for the
// excluded diagonal, and the weighted mass matrices. The assembled matrix A
// is an exact graph Laplacian: symmetric, annihilates constants, PSD.

#include <Eigen/Dense>
#include <atomic>
#include <map>
#include <ostream>
#include <thread>
#include <vector>

#include "nlform/model.hpp"
#include "nlform/quadrature.hpp"

namespace nlform {

struct GridTooCoarse : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Grid {
  int dimension = 1;
  double radius = 0.0;
  int pointsPerAxis = 0;
  std::vector<Point> nodes;
  double cellVolume = 0.0;

  double spacing() const { return 2.0 * radius / (pointsPerAxis - 1); }
  int size() const { return static_cast<int>(nodes.size()); }
};

inline Grid make_grid(int dimension, double radius, int pointsPerAxis) {
  if (dimension < 1 || dimension > 2) throw BadParameter("grid dimension must be 1 or 2");
  if (pointsPerAxis < 3) throw BadParameter("grid needs at least 3 points per axis");
  if (!(radius > 0)) throw BadParameter("grid radius must be positive");
  Grid g;
  g.dimension = dimension;
  g.radius = radius;
  g.pointsPerAxis = pointsPerAxis;
  double h = g.spacing();
  g.cellVolume = dimension == 1 ? h : h * h;
  if (dimension == 1) {
    g.nodes.reserve(pointsPerAxis);
    for (int i = 0; i < pointsPerAxis; ++i) g.nodes.push_back({-radius + i * h, 0.0});
  } else {
    g.nodes.reserve(static_cast<size_t>(pointsPerAxis) * pointsPerAxis);
    for (int iy = 0; iy < pointsPerAxis; ++iy)
      for (int ix = 0; ix < pointsPerAxis; ++ix)
        g.nodes.push_back({-radius + ix * h, -radius + iy * h});
  }
  return g;
}

enum class KernelKind { RhoForm, PsiForm };

inline const char* to_string(KernelKind k) {
  return k == KernelKind::RhoForm ? "rho" : "psi";
}

namespace detail {

inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2 * threads) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

// Average of rho over the annulus [max(0,|D|-h/2), |D|+h/2]; pointwise
// evaluation of r^{-(d+alpha)} at a single near-diagonal node would
// overweight the singularity by orders of magnitude.
inline double kernel_cell_average(const KernelProfile& k, double dist, double h) {
  int d = k.dimension();
  double a = std::max(0.0, dist - 0.5 * h), b = dist + 0.5 * h;
  auto logNum = [&k, d](double r) { return k.log_rho(r) + (d - 1) * std::log(r); };
  double logN = quad::log_gauss_panel(logNum, a, b);
  double den = d == 1 ? (b - a) : 0.5 * (b * b - a * a);  // integral of r^{d-1}
  return std::exp(logN - std::log(den));
}

// average of rho over the ball |z| < h/2 (the excluded self cell);
// +infinity for kernels with a non-integrable origin singularity
inline double kernel_self_average(const KernelProfile& k, double h) {
  int d = k.dimension();
  auto logf = [&k, d](double r) { return k.log_rho(r) + (d - 1) * std::log(r); };
  quad::LogIntegral li = quad::integrate_singular_log(logf, {0.5 * h, 1e-8, 48});
  if (li.verdict != Verdict::Convergent) return quad::kInf;
  double ballLog = d == 1 ? std::log(0.5 * h) : std::log(0.125 * h * h);  // int r^{d-1}
  return std::exp(li.logValue - ballLog);
}

}  // namespace detail

struct DiscreteForm {
  Grid grid;
  Eigen::MatrixXd A;             // symmetric, A 1 = 0, PSD
  Eigen::VectorXd massV;         // reference-measure cell masses (mu_V or mu_2V)
  Eigen::VectorXd massWeighted;  // omega_i * massV_i
  Eigen::VectorXd selfInvPairMass;  // m_i^2 / w_ii for the local Poincare diagonal
  KernelKind kernelKind = KernelKind::RhoForm;
  double normalizer = 1.0;  // C_V (rho form) or C_2V (psi form)
};

struct AssemblyOptions {
  double quadTol = 1e-8;
  int threads = 1;
};

inline DiscreteForm assemble(const PotentialSpec& V, const KernelProfile& kernel,
                             const WeightFunction& weight, const Grid& grid, KernelKind kind,
                             const AssemblyOptions& opt = {}) {
  const double h = grid.spacing();
  if (h >= 1.0) throw GridTooCoarse("grid spacing must satisfy h < 1");
  IntegralVerdict levy = levy_integral(kernel, opt.quadTol);
  if (levy.verdict == Verdict::Divergent)
    throw NonIntegrable("assemble: kernel fails Levy integrability");

  const int d = grid.dimension;
  const int n = grid.size();
  DiscreteForm form;
  form.grid = grid;
  form.kernelKind = kind;
  form.normalizer = normalizer(V, kind == KernelKind::RhoForm ? MeasureScale::V
                                                              : MeasureScale::TwoV,
                               opt.quadTol);

  // cell masses, pair-weight factors (x side carries the reference cell
  // mass, y side the Lebesgue / e^{-V} cell mass) and the bare y-density
  // entering the intra-cell gradient term
  Eigen::VectorXd mass(n), xSide(n), ySide(n), yDensity(n);
  for (int i = 0; i < n; ++i) {
    double r = norm(grid.nodes[i], d);
    double vi = V.value(r);
    if (kind == KernelKind::RhoForm) {
      mass[i] = form.normalizer * std::exp(-vi) * grid.cellVolume;
      xSide[i] = mass[i];
      ySide[i] = grid.cellVolume;
      yDensity[i] = 1.0;
    } else {
      mass[i] = form.normalizer * std::exp(-2.0 * vi) * grid.cellVolume;
      xSide[i] = std::exp(-vi) * grid.cellVolume;
      ySide[i] = std::exp(-vi) * grid.cellVolume;
      yDensity[i] = std::exp(-vi);
    }
  }
  form.massV = mass;
  form.massWeighted.resize(n);
  for (int i = 0; i < n; ++i) {
    double r = norm(grid.nodes[i], d);
    double lw = weight.log_value(r);
    if (!std::isfinite(lw) && lw != quad::kNegInf)
      throw BadParameter("weight not finite at a grid node");
    form.massWeighted[i] = std::exp(lw + std::log(mass[i]));
  }

  // kernel values by quantized distance; near-diagonal distances get the
  // annulus cell-average. The table is filled up front (node 0 sees every
  // distinct displacement on a uniform grid) so the assembly loop only reads.
  std::map<long long, double> rhoByDist;
  auto quantize = [h](double dist) { return llround(dist / h * 1024.0); };
  auto rho_compute = [&](double dist) {
    return dist < 2.0 * h ? detail::kernel_cell_average(kernel, dist, h)
                          : std::exp(kernel.log_rho(dist));
  };
  if (d == 1) {
    for (int k2 = 1; k2 < n; ++k2) rhoByDist[quantize(k2 * h)] = rho_compute(k2 * h);
  } else {
    for (int j = 1; j < n; ++j) {
      double dist = norm({grid.nodes[0][0] - grid.nodes[j][0],
                          grid.nodes[0][1] - grid.nodes[j][1]}, d);
      rhoByDist.try_emplace(quantize(dist), rho_compute(dist));
    }
  }
  auto rho_bar = [&](double dist) {
    auto it = rhoByDist.find(quantize(dist));
    return it != rhoByDist.end() ? it->second : rho_compute(dist);
  };

  form.A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd& A = form.A;
  detail::parallel_for(n, opt.threads, [&](int i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double dist = norm({grid.nodes[i][0] - grid.nodes[j][0],
                          grid.nodes[i][1] - grid.nodes[j][1]}, d);
      double rb = rho_bar(dist);
      double w = 0.5 * rb * (xSide[i] * ySide[j] + xSide[j] * ySide[i]);
      A(i, j) = -w;
    }
  });
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) s -= A(i, j);
    A(i, i) = s;
  }

  // Excluded-diagonal energy: the small-ball integral S = int_{|z|<h/2}
  // |z|^2 rho(|z|) dz against a central-difference gradient keeps the
  // alpha -> 2 limit sane.
  auto logBall = [&kernel, d](double r) {
    return kernel.log_rho(r) + (d + 1) * std::log(r);
  };
  quad::LogIntegral sb = quad::integrate_singular_log(logBall, {0.5 * h, opt.quadTol, 48});
  double smallBall = sb.verdict == Verdict::Convergent
                         ? std::exp(sb.logValue + std::log(sphere_area(d)))
                         : 0.0;
  auto addPair = [&A](int p, int q, double u) {
    A(p, p) += u;
    A(q, q) += u;
    A(p, q) -= u;
    A(q, p) -= u;
  };
  const int npa = grid.pointsPerAxis;
  for (int i = 0; i < n; ++i) {
    double gcoef = 0.5 * xSide[i] * yDensity[i] * smallBall / d;
    for (int axis = 0; axis < d; ++axis) {
      int stride = axis == 0 ? 1 : npa;
      int coord = axis == 0 ? i % npa : i / npa;
      bool hasPrev = coord > 0, hasNext = coord < npa - 1;
      if (hasPrev && hasNext)
        addPair(i - stride, i + stride, gcoef / (4.0 * h * h));
      else if (hasNext)
        addPair(i, i + stride, gcoef / (h * h));
      else if (hasPrev)
        addPair(i, i - stride, gcoef / (h * h));
    }
  }

  // diagonal term of the inverse-kernel integral in kappa_r: zero for
  // singular kernels, m_i^2 / (rho_self * pairFactor) otherwise
  form.selfInvPairMass.resize(n);
  double rhoSelf = detail::kernel_self_average(kernel, h);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(rhoSelf) || rhoSelf <= 0.0) {
      form.selfInvPairMass[i] = std::isfinite(rhoSelf) ? quad::kInf : 0.0;
      continue;
    }
    double wSelf = rhoSelf * xSide[i] * ySide[i];
    form.selfInvPairMass[i] = mass[i] * mass[i] / wSelf;
  }
  return form;
}

inline double form_value(const DiscreteForm& form, const Eigen::VectorXd& f) {
  if (f.size() != form.A.rows()) throw DimensionMismatch("form_value: |f| != |nodes|");
  return f.dot(form.A * f);
}

// weighted variance with the mu-renormalized mean
inline double weighted_variance(const DiscreteForm& form, const Eigen::VectorXd& f) {
  if (f.size() != form.massV.size()) throw DimensionMismatch("weighted_variance: |f| != |nodes|");
  double M = form.massV.sum();
  double mean = form.massV.dot(f) / M;
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    double c = f[i] - mean;
    acc += form.massWeighted[i] * c * c;
  }
  return acc;
}

// kappa_r of the local Poincare inequality: grid max over x in B(0,r) of the
// inverse-pair-weight integral over B(0,r), divided by the ball mass squared.
// Returns +infinity when a needed pair weight vanishes (truncated kernels).
inline double kappa_r(const DiscreteForm& form, double r) {
  const Grid& g = form.grid;
  std::vector<int> ball;
  for (int i = 0; i < g.size(); ++i)
    if (norm(g.nodes[i], g.dimension) < r) ball.push_back(i);
  if (ball.empty()) throw BadParameter("kappa_r: ball contains no grid nodes");
  double M = 0.0;
  for (int i : ball) M += form.massV[i];
  double worst = 0.0;
  // I(x_i) = sum_j (1/j(x_i,x_j)) m_j with j = w_ij / (m_i m_j); the
  // diagonal cell contributes m_i^3 / w_ii (zero for singular kernels).
  // A(i,j) also carries the gradient-proxy insertions; they only increase
  // the weights, consistently with the form the inequality is tested against.
  for (int i : ball) {
    double acc = form.selfInvPairMass[i] * form.massV[i];
    for (int j : ball) {
      if (j == i) continue;
      double w = -form.A(i, j);
      if (w <= 0.0) return quad::kInf;
      acc += form.massV[i] * form.massV[j] * form.massV[j] / w;
    }
    worst = std::max(worst, acc);
    if (!std::isfinite(worst)) return quad::kInf;
  }
  return worst / (M * M);
}

inline double local_poincare_constant(const PotentialSpec& V, const KernelProfile& kernel,
                                      double r, const Grid& grid,
                                      KernelKind kind = KernelKind::RhoForm,
                                      const AssemblyOptions& opt = {}) {
  if (r > grid.radius) throw BadParameter("local_poincare_constant: r exceeds grid radius");
  DiscreteForm form = assemble(V, kernel, WeightFunction::constant(), grid, kind, opt);
  return kappa_r(form, r);
}

// Both sides of the local Poincare inequality
//   int_{B(0,r)} f^2 dmu <= kappa_r D(f,f) + mu(B)^{-1} (int_B f dmu)^2
struct LocalPoincareSides {
  double lhs;
  double rhs;
};

inline LocalPoincareSides local_poincare_check(const DiscreteForm& form, double r,
                                               const Eigen::VectorXd& f) {
  if (f.size() != form.massV.size()) throw DimensionMismatch("local_poincare_check: size");
  const Grid& g = form.grid;
  double lhs = 0.0, meanAcc = 0.0, M = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    if (norm(g.nodes[i], g.dimension) >= r) continue;
    lhs += form.massV[i] * f[i] * f[i];
    meanAcc += form.massV[i] * f[i];
    M += form.massV[i];
  }
  double kr = kappa_r(form, r);
  double rhs = kr * form_value(form, f) + meanAcc * meanAcc / M;
  return {lhs, rhs};
}

// three-column text dump (i, j, value) of A followed by the diagonal masses
inline void dump_form(const DiscreteForm& form, std::ostream& os) {
  os << "# A (i, j, value)\n";
  for (int i = 0; i < form.A.rows(); ++i)
    for (int j = 0; j < form.A.cols(); ++j)
      if (form.A(i, j) != 0.0) os << i << ' ' << j << ' ' << form.A(i, j) << '\n';
  os << "# mass (i, i, value)\n";
  for (int i = 0; i < form.massV.size(); ++i)
    os << i << ' ' << i << ' ' << form.massV[i] << '\n';
}

}  // namespace nlform
