#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "emsa/disorder.hpp"
#include "emsa/geometry.hpp"

// Full eigendecomposition of dense symmetric matrices: Householder reduction
// to tridiagonal form followed by implicit-shift QL with accumulated
// transformations.  Localization certificates quantify over every eigenpair,
// so partial/iterative solvers are not an option here.

namespace emsa {

namespace detail {

// Householder reduction of z (in place) to tridiagonal (d, e), after the
// Algol procedures tred2 (Bowdler, Martin, Reinsch, Wilkinson) as ported in
// JAMA/EISPACK.  When accumulate is false the back-accumulation pass is
// skipped, z's strict upper triangle is left scrambled, and the tridiagonal
// diagonal is read off z's diagonal instead.
inline void tred2(Matrix& z, std::vector<double>& d, std::vector<double>& e, bool accumulate) {
  const int n = static_cast<int>(z.n);
  d.assign(z.n, 0.0);
  e.assign(z.n, 0.0);
  if (n == 0) return;
  for (int j = 0; j < n; ++j) d[j] = z.at(n - 1, j);

  for (int i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (int k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (int j = 0; j < i; ++j) {
        d[j] = z.at(i - 1, j);
        z.at(i, j) = 0.0;
        z.at(j, i) = 0.0;
      }
    } else {
      for (int k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (int j = 0; j < i; ++j) e[j] = 0.0;

      for (int j = 0; j < i; ++j) {
        f = d[j];
        z.at(j, i) = f;
        g = e[j] + z.at(j, j) * f;
        for (int k = j + 1; k <= i - 1; ++k) {
          g += z.at(k, j) * d[k];
          e[k] += z.at(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (int j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      double hh = f / (h + h);
      for (int j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (int j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (int k = j; k <= i - 1; ++k) z.at(k, j) -= f * e[k] + g * d[k];
        d[j] = z.at(i - 1, j);
        z.at(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  if (accumulate) {
    for (int i = 0; i < n - 1; ++i) {
      z.at(n - 1, i) = z.at(i, i);
      z.at(i, i) = 1.0;
      double h = d[i + 1];
      if (h != 0.0) {
        for (int k = 0; k <= i; ++k) d[k] = z.at(k, i + 1) / h;
        for (int j = 0; j <= i; ++j) {
          double g = 0.0;
          for (int k = 0; k <= i; ++k) g += z.at(k, i + 1) * z.at(k, j);
          for (int k = 0; k <= i; ++k) z.at(k, j) -= g * d[k];
        }
      }
      for (int k = 0; k <= i; ++k) z.at(k, i + 1) = 0.0;
    }
    for (int j = 0; j < n; ++j) {
      d[j] = z.at(n - 1, j);
      z.at(n - 1, j) = 0.0;
    }
    z.at(n - 1, n - 1) = 1.0;
  } else {
    // The similarity transforms only touch the leading blocks, so the
    // tridiagonal diagonal survives on z's diagonal.
    for (int j = 0; j < n; ++j) d[j] = z.at(j, j);
  }
  e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e), after the Algol procedure
// tql2 as ported in JAMA/EISPACK; when accumulate, z picks up the rotations
// so its columns become eigenvectors.
inline void tql2(std::vector<double>& d, std::vector<double>& e, Matrix& z, bool accumulate) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    int m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > 64)
          throw std::runtime_error(
              "tql2: no convergence after 64 iterations; offending residual |e[" +
              std::to_string(l) + "]| = " + std::to_string(std::abs(e[l])));

        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        double dl1 = d[l + 1];
        double h = g - d[l];
        for (int i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (int i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          if (accumulate) {
            for (int k = 0; k < n; ++k) {
              h = z.at(k, i + 1);
              z.at(k, i + 1) = s * z.at(k, i) + c * h;
              z.at(k, i) = c * z.at(k, i) - s * h;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace detail

// Eigenvalues only, ascending with multiplicity.
inline std::vector<double> eigenvalues(const Matrix& h) {
  if (h.n == 0) return {};
  Matrix z = h;
  std::vector<double> d, e;
  detail::tred2(z, d, e, /*accumulate=*/false);
  detail::tql2(d, e, z, /*accumulate=*/false);
  std::sort(d.begin(), d.end());
  return d;
}

// Complete orthonormal eigensystem of a finite-volume operator, ascending in
// the eigenvalue with multiplicity; vector k is column k of `vectors`.
struct Eigensystem {
  Region region;
  std::vector<double> values;
  Matrix vectors;

  std::size_t size() const { return values.size(); }
  double component(std::size_t k, std::size_t i) const { return vectors.at(i, k); }
  std::vector<double> vector(std::size_t k) const {
    std::vector<double> v(values.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = vectors.at(i, k);
    return v;
  }
};

inline Eigensystem eigensystem(const Matrix& h, const Region& region) {
  if (h.n != region.size()) throw std::invalid_argument("eigensystem: size mismatch");
  for (std::size_t i = 0; i < h.n; ++i)
    for (std::size_t j = i + 1; j < h.n; ++j)
      if (h.at(i, j) != h.at(j, i))
        throw std::invalid_argument("eigensystem: matrix not symmetric");

  Eigensystem es;
  es.region = region;
  if (h.n == 0) return es;

  Matrix z = h;
  std::vector<double> d, e;
  detail::tred2(z, d, e, /*accumulate=*/true);
  detail::tql2(d, e, z, /*accumulate=*/true);

  // Ascending order, then a sign convention (first nonzero component
  // positive) for reproducible output files.
  std::vector<std::size_t> perm(h.n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  es.values.resize(h.n);
  es.vectors = Matrix(h.n);
  for (std::size_t k = 0; k < h.n; ++k) {
    std::size_t src = perm[k];
    es.values[k] = d[src];
    double sign = 1.0;
    for (std::size_t i = 0; i < h.n; ++i) {
      if (z.at(i, src) != 0.0) {
        sign = z.at(i, src) > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < h.n; ++i) es.vectors.at(i, k) = sign * z.at(i, src);
  }
  return es;
}

// min |lambda - nu| over the list; +inf for an empty list.
inline double spectral_dist(double lambda, const std::vector<double>& values) {
  double d = kInf;
  for (double v : values) d = std::min(d, std::abs(lambda - v));
  return d;
}

// Values strictly inside the open interval (lo, hi), multiplicity preserved.
inline std::vector<double> sigma_in(const std::vector<double>& values, double lo, double hi) {
  std::vector<double> out;
  for (double v : values)
    if (v > lo && v < hi) out.push_back(v);
  return out;
}

}  // namespace emsa
