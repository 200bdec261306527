#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace wavebal {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using VecFn = std::function<Vec(const Vec&)>;
using MatFn = std::function<Mat(const Vec&)>;
using ScalarFn = std::function<double(const Vec&)>;

inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline double sqr(double x) { return x * x; }

inline double minmod(double a, double b) {
  if (a > 0.0 && b > 0.0) return std::min(a, b);
  if (a < 0.0 && b < 0.0) return std::max(a, b);
  return 0.0;
}

// Central-difference step sizes. First derivatives use the standard
// h ~ eps^(1/3) rule, second derivatives h ~ eps^(1/4).
inline double fd_step1(double scale) {
  static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * std::max(1.0, std::abs(scale));
}

inline double fd_step2(double scale) {
  static const double h0 =
      std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  return h0 * std::max(1.0, std::abs(scale));
}

// Jacobian of a vector map by central differences, column j = dF/du_j.
inline Mat fd_jacobian(const VecFn& f, const Vec& u) {
  const int n = static_cast<int>(u.size());
  Vec f0 = f(u);
  Mat jac(f0.size(), n);
  for (int j = 0; j < n; ++j) {
    const double h = fd_step1(u[j]);
    Vec up = u, um = u;
    up[j] += h;
    um[j] -= h;
    jac.col(j) = (f(up) - f(um)) / (2.0 * h);
  }
  return jac;
}

inline Vec fd_gradient(const ScalarFn& f, const Vec& u) {
  const int n = static_cast<int>(u.size());
  Vec g(n);
  for (int j = 0; j < n; ++j) {
    const double h = fd_step1(u[j]);
    Vec up = u, um = u;
    up[j] += h;
    um[j] -= h;
    g[j] = (f(up) - f(um)) / (2.0 * h);
  }
  return g;
}

inline Mat fd_hessian(const ScalarFn& f, const Vec& u) {
  const int n = static_cast<int>(u.size());
  Mat hess(n, n);
  const double f0 = f(u);
  for (int i = 0; i < n; ++i) {
    const double hi = fd_step2(u[i]);
    for (int j = i; j < n; ++j) {
      const double hj = fd_step2(u[j]);
      if (i == j) {
        Vec up = u, um = u;
        up[i] += hi;
        um[i] -= hi;
        hess(i, i) = (f(up) - 2.0 * f0 + f(um)) / (hi * hi);
      } else {
        Vec upp = u, upm = u, ump = u, umm = u;
        upp[i] += hi; upp[j] += hj;
        upm[i] += hi; upm[j] -= hj;
        ump[i] -= hi; ump[j] += hj;
        umm[i] -= hi; umm[j] -= hj;
        hess(i, j) = (f(upp) - f(upm) - f(ump) + f(umm)) / (4.0 * hi * hj);
        hess(j, i) = hess(i, j);
      }
    }
  }
  return hess;
}

// Eigenvalues of a symmetric matrix, ascending.
inline Vec sym_eigenvalues(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

// 3-point Gauss-Legendre rule on [0,1].
struct Gauss3 {
  static constexpr double node(int i) {
    constexpr double r = 0.3872983346207417;  // sqrt(3/5)/2
    return i == 0 ? 0.5 - r : (i == 1 ? 0.5 : 0.5 + r);
  }
  static constexpr double weight(int i) {
    return i == 1 ? 4.0 / 9.0 : 5.0 / 18.0;
  }
};

}  // namespace wavebal
