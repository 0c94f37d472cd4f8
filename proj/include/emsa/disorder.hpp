#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "emsa/geometry.hpp"
#include "emsa/rng.hpp"

// Single-site disorder distributions with Holder-continuity data, potential
// sampling, and finite-volume Anderson Hamiltonians H = -Delta + V.

namespace emsa {

inline constexpr std::size_t kMaxDenseSites = 4096;

// A single-site distribution mu with concentration function
// S_mu(t) = sup_a mu[a, a+t] <= K t^alpha on [0,1].  Sampling is by inverse
// CDF from the counter-based stream.  Discrete distributions are rejected:
// they are not Holder continuous of any positive order.
class DisorderSpec {
 public:
  enum class Family { Uniform, PowerAlpha, TableCdf };

  static DisorderSpec uniform(double a, double b) {
    if (!(a < b)) throw std::invalid_argument("uniform: need a < b");
    DisorderSpec d;
    d.family_ = Family::Uniform;
    d.a_ = a;
    d.b_ = b;
    d.alpha_ = 1.0;
    d.holder_k_ = 1.0 / (b - a);
    return d;
  }

  // CDF F(t) = (t/scale)^alpha on [0, scale]; S_mu(t) = min((t/scale)^alpha, 1).
  static DisorderSpec power_alpha(double alpha, double scale) {
    if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("power_alpha: alpha in (0,1]");
    if (!(scale > 0)) throw std::invalid_argument("power_alpha: scale must be positive");
    DisorderSpec d;
    d.family_ = Family::PowerAlpha;
    d.a_ = 0;
    d.b_ = scale;
    d.alpha_ = alpha;
    d.holder_k_ = std::pow(scale, -alpha);
    return d;
  }

  // Piecewise-linear CDF through (values[i], cdf[i]); caller supplies the
  // Holder data (alpha, K) for the tabulated measure.  A flat-in-value jump
  // (repeated value with increasing cdf) would make the measure discrete and
  // is rejected.
  static DisorderSpec table_cdf(std::vector<double> values, std::vector<double> cdf,
                                double alpha, double holder_k) {
    if (values.size() != cdf.size() || values.size() < 2)
      throw std::invalid_argument("table_cdf: need matching tables of size >= 2");
    if (cdf.front() != 0.0 || cdf.back() != 1.0)
      throw std::invalid_argument("table_cdf: cdf must run from 0 to 1");
    for (std::size_t i = 1; i < values.size(); ++i) {
      if (!(values[i] > values[i - 1]))
        throw std::invalid_argument(
            "table_cdf: values must be strictly increasing (atoms violate Holder continuity)");
      if (cdf[i] < cdf[i - 1]) throw std::invalid_argument("table_cdf: cdf must be nondecreasing");
    }
    if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("table_cdf: alpha in (0,1]");
    if (!(holder_k > 0)) throw std::invalid_argument("table_cdf: K must be positive");
    DisorderSpec d;
    d.family_ = Family::TableCdf;
    d.a_ = values.front();
    d.b_ = values.back();
    d.alpha_ = alpha;
    d.holder_k_ = holder_k;
    d.values_ = std::move(values);
    d.cdf_ = std::move(cdf);
    return d;
  }

  Family family() const { return family_; }
  double alpha() const { return alpha_; }
  double holder_k() const { return holder_k_; }
  double support_lo() const { return a_; }
  double support_hi() const { return b_; }
  const std::vector<double>& table_values() const { return values_; }
  const std::vector<double>& table_cdf_points() const { return cdf_; }

  // Wegner constant: K~ = 2K when alpha = 1, K~ = 8 * 2^alpha * K otherwise.
  double wegner_k() const {
    return alpha_ == 1.0 ? 2 * holder_k_ : 8 * std::pow(2.0, alpha_) * holder_k_;
  }

  double quantile(double u) const {
    switch (family_) {
      case Family::Uniform:
        return a_ + (b_ - a_) * u;
      case Family::PowerAlpha:
        return b_ * std::pow(u, 1.0 / alpha_);
      case Family::TableCdf: {
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.begin()) return values_.front();
        if (it == cdf_.end()) return values_.back();
        std::size_t i = it - cdf_.begin();
        double c0 = cdf_[i - 1], c1 = cdf_[i];
        if (c1 == c0) return values_[i];
        double w = (u - c0) / (c1 - c0);
        return values_[i - 1] + w * (values_[i] - values_[i - 1]);
      }
    }
    return 0;
  }

 private:
  DisorderSpec() = default;
  Family family_ = Family::Uniform;
  double a_ = 0, b_ = 1, alpha_ = 1, holder_k_ = 1;
  std::vector<double> values_, cdf_;
};

struct PotentialSample {
  Region region;
  std::vector<double> values;  // indexed by the region's site ordering
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
};

inline PotentialSample sample_potential(const Region& r, const DisorderSpec& d,
                                        std::uint64_t seed, std::uint64_t index) {
  PotentialSample s;
  s.region = r;
  s.seed = seed;
  s.sample_index = index;
  s.values.reserve(r.size());
  for (const auto& site : r.sites()) s.values.push_back(d.quantile(unit_uniform(seed, index, site)));
  return s;
}

// Dense symmetric matrix, row-major.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> a;

  Matrix() = default;
  explicit Matrix(std::size_t size) : n(size), a(size * size, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  double max_abs() const {
    double m = 0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  }
};

// H_Theta in the region's site ordering: -1 on nearest-neighbor pairs inside
// Theta, V on the diagonal (centered Laplacian, no 2d diagonal shift).
inline Matrix hamiltonian(const Region& r, const PotentialSample& v) {
  if (!(v.region == r)) throw std::invalid_argument("hamiltonian: potential region mismatch");
  if (r.size() > kMaxDenseSites)
    throw std::invalid_argument("hamiltonian: region exceeds dense size cap of " +
                                std::to_string(kMaxDenseSites) + " sites");
  Matrix h(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    h.at(i, i) = v.values[i];
    Site s = r.site(i);
    for (int c = 0; c < r.dim(); ++c) {
      for (int step : {-1, 1}) {
        s[c] += step;
        long j = r.index_of(s);
        s[c] -= step;
        if (j >= 0) h.at(i, static_cast<std::size_t>(j)) = -1.0;
      }
    }
  }
  return h;
}

// Restriction of a potential sample to a subregion.  The counter-based stream
// keys on sites, so this equals sampling the subregion directly.
inline PotentialSample restrict_potential(const PotentialSample& v, const Region& sub) {
  PotentialSample out;
  out.region = sub;
  out.seed = v.seed;
  out.sample_index = v.sample_index;
  out.values.reserve(sub.size());
  for (const auto& s : sub.sites()) {
    long j = v.region.index_of(s);
    if (j < 0) throw std::invalid_argument("restrict_potential: site outside sampled region");
    out.values.push_back(v.values[static_cast<std::size_t>(j)]);
  }
  return out;
}

// Max-abs entrywise difference between H_Theta and
// H_Phi (+) H_{Theta\Phi} + Gamma_{boundary}; exactly zero by construction.
inline double decompose_check(const Region& theta, const Region& phi, const PotentialSample& v) {
  if (!phi.subset_of(theta)) throw std::invalid_argument("decompose_check: phi not in theta");
  Matrix h_theta = hamiltonian(theta, v);

  Region rest = theta.difference(phi);
  Matrix h_phi = hamiltonian(phi, restrict_potential(v, phi));
  Matrix h_rest = hamiltonian(rest, restrict_potential(v, rest));
  BoundaryData bd = boundary(phi, theta);

  Matrix sum(theta.size());
  auto embed = [&](const Region& sub, const Matrix& m) {
    std::vector<std::size_t> map(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i)
      map[i] = static_cast<std::size_t>(theta.index_of(sub.site(i)));
    for (std::size_t i = 0; i < sub.size(); ++i)
      for (std::size_t j = 0; j < sub.size(); ++j) sum.at(map[i], map[j]) += m.at(i, j);
  };
  embed(phi, h_phi);
  embed(rest, h_rest);
  for (const auto& [u, w] : bd.edge_pairs) {
    std::size_t i = static_cast<std::size_t>(theta.index_of(u));
    std::size_t j = static_cast<std::size_t>(theta.index_of(w));
    sum.at(i, j) += -1.0;
    sum.at(j, i) += -1.0;
  }

  double diff = 0;
  for (std::size_t i = 0; i < h_theta.a.size(); ++i)
    diff = std::max(diff, std::abs(h_theta.a[i] - sum.a[i]));
  return diff;
}

}  // namespace emsa
