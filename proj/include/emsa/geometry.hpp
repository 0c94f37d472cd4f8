#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Lattice geometry on Z^d: boxes with real centers and sides, general finite
// regions, relative boundaries, interiors, and suitable ell-covers of a box.
// All distances between sites are sup-norm unless noted otherwise; adjacency
// (|u-v|_2 = 1) means a unit step along one coordinate axis.

namespace emsa {

using Site = std::vector<int>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative tolerance for real-box membership tests.  Cover centers are sums
// of a handful of products, so accumulated error stays far below this.
inline double geom_tol(double scale) {
  return 1e-9 * std::max(1.0, std::abs(scale));
}

inline double sup_dist(const Site& a, const Site& b) {
  int m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return static_cast<double>(m);
}

inline double sup_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Box Lambda_L(x), side L > 0, center x in R^d.  Site set is
// { y in Z^d : ||y - x||_inf <= L/2 }.
struct BoxSpec {
  std::vector<double> center;
  double side = 0;

  BoxSpec() = default;
  BoxSpec(std::vector<double> c, double L) : center(std::move(c)), side(L) {
    if (side <= 0) throw std::invalid_argument("BoxSpec: side must be positive");
    if (center.empty()) throw std::invalid_argument("BoxSpec: empty center");
  }
  int dim() const { return static_cast<int>(center.size()); }

  // Real-box membership of a point (with tolerance).
  bool contains_real(const std::vector<double>& y) const {
    double tol = geom_tol(side);
    for (int i = 0; i < dim(); ++i)
      if (std::abs(y[i] - center[i]) > side / 2 + tol) return false;
    return true;
  }
  bool contains_site(const Site& y) const {
    double tol = geom_tol(side);
    for (int i = 0; i < dim(); ++i)
      if (std::abs(static_cast<double>(y[i]) - center[i]) > side / 2 + tol) return false;
    return true;
  }
};

// Finite subset of Z^d with a fixed lexicographic site ordering.  The ordering
// is the index map used by every matrix assembled on the region.
class Region {
 public:
  Region() = default;
  Region(int dim, std::vector<Site> sites) : dim_(dim), sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
    for (const auto& s : sites_)
      if (static_cast<int>(s.size()) != dim_)
        throw std::invalid_argument("Region: site dimension mismatch");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& site(std::size_t i) const { return sites_[i]; }

  bool contains(const Site& y) const {
    return std::binary_search(sites_.begin(), sites_.end(), y);
  }
  // Index of y in the lexicographic ordering; -1 if absent.
  long index_of(const Site& y) const {
    auto it = std::lower_bound(sites_.begin(), sites_.end(), y);
    if (it == sites_.end() || *it != y) return -1;
    return it - sites_.begin();
  }
  bool subset_of(const Region& other) const {
    for (const auto& s : sites_)
      if (!other.contains(s)) return false;
    return true;
  }

  // Sites of this region not in `other`.
  Region difference(const Region& other) const {
    std::vector<Site> out;
    for (const auto& s : sites_)
      if (!other.contains(s)) out.push_back(s);
    return Region(dim_, std::move(out));
  }

  Region unite(const Region& other) const {
    std::vector<Site> out = sites_;
    out.insert(out.end(), other.sites_.begin(), other.sites_.end());
    return Region(dim_, std::move(out));
  }

  bool intersects(const Region& other) const {
    const Region& small = size() <= other.size() ? *this : other;
    const Region& big = size() <= other.size() ? other : *this;
    for (const auto& s : small.sites())
      if (big.contains(s)) return true;
    return false;
  }

  bool operator==(const Region& o) const { return dim_ == o.dim_ && sites_ == o.sites_; }

  // Connectivity in Z^d (unit steps along axes).
  bool connected() const {
    if (sites_.size() <= 1) return true;
    std::vector<char> seen(sites_.size(), 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      std::size_t i = stack.back();
      stack.pop_back();
      Site s = sites_[i];
      for (int c = 0; c < dim_; ++c) {
        for (int step : {-1, 1}) {
          s[c] += step;
          long j = index_of(s);
          s[c] -= step;
          if (j >= 0 && !seen[j]) {
            seen[j] = 1;
            ++count;
            stack.push_back(static_cast<std::size_t>(j));
          }
        }
      }
    }
    return count == sites_.size();
  }

  double diameter() const {
    double d = 0;
    for (std::size_t i = 0; i < sites_.size(); ++i)
      for (std::size_t j = i + 1; j < sites_.size(); ++j)
        d = std::max(d, sup_dist(sites_[i], sites_[j]));
    return d;
  }

 private:
  int dim_ = 0;
  std::vector<Site> sites_;
};

// Lambda_L(x) = Lambda^R_L(x) intersected with Z^d, lexicographically ordered.
inline Region box_sites(const BoxSpec& b) {
  int d = b.dim();
  double tol = geom_tol(b.side);
  std::vector<int> lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = static_cast<int>(std::ceil(b.center[i] - b.side / 2 - tol));
    hi[i] = static_cast<int>(std::floor(b.center[i] + b.side / 2 + tol));
    if (lo[i] > hi[i]) return Region(d, {});
  }
  std::vector<Site> sites;
  Site cur(lo.begin(), lo.end());
  while (true) {
    sites.push_back(cur);
    int c = d - 1;
    while (c >= 0) {
      if (++cur[c] <= hi[c]) break;
      cur[c] = lo[c];
      --c;
    }
    if (c < 0) break;
  }
  return Region(d, std::move(sites));
}

// Boundary of Phi relative to Theta: edge pairs (u,v) with u in Phi,
// v in Theta \ Phi, |u-v|_2 = 1, plus the exterior and interior vertex sets.
struct BoundaryData {
  std::vector<std::pair<Site, Site>> edge_pairs;
  Region exterior;
  Region interior;
};

inline BoundaryData boundary(const Region& phi, const Region& theta) {
  if (!phi.subset_of(theta)) throw std::invalid_argument("boundary: phi not a subset of theta");
  BoundaryData out;
  std::vector<Site> ext, in;
  for (const auto& u : phi.sites()) {
    bool is_inner = false;
    Site v = u;
    for (int c = 0; c < phi.dim(); ++c) {
      for (int step : {-1, 1}) {
        v[c] += step;
        if (theta.contains(v) && !phi.contains(v)) {
          out.edge_pairs.emplace_back(u, v);
          ext.push_back(v);
          is_inner = true;
        }
        v[c] -= step;
      }
    }
    if (is_inner) in.push_back(u);
  }
  out.exterior = Region(phi.dim(), std::move(ext));
  out.interior = Region(phi.dim(), std::move(in));
  return out;
}

// Sup-norm distance from y to a finite set; dist(y, empty) = +inf.
inline double dist_to(const Site& y, const Region& set) {
  if (set.empty()) return kInf;
  double d = kInf;
  for (const auto& s : set.sites()) d = std::min(d, sup_dist(y, s));
  return d;
}

// Phi^{Theta,t} = { y in Phi : dist(y, Theta \ Phi) > floor(t) }.
inline Region interior_region(const Region& phi, const Region& theta, double t) {
  if (!phi.subset_of(theta)) throw std::invalid_argument("interior: phi not a subset of theta");
  if (t < 0) throw std::invalid_argument("interior: t must be nonnegative");
  Region complement = theta.difference(phi);
  double ft = std::floor(t);
  std::vector<Site> out;
  for (const auto& y : phi.sites())
    if (dist_to(y, complement) > ft) out.push_back(y);
  return Region(phi.dim(), std::move(out));
}

// Thin interior boundary Phi \ Phi^{Theta,t}.
inline Region thin_boundary(const Region& phi, const Region& theta, double t) {
  return phi.difference(interior_region(phi, theta, t));
}

// R_Theta(y) = dist(y, interior boundary of Phi in Theta); +inf when the
// interior boundary is empty (Phi = Theta).
inline double depth(const Site& y, const Region& phi, const Region& theta) {
  if (!phi.contains(y)) throw std::invalid_argument("depth: y not in phi");
  return dist_to(y, boundary(phi, theta).interior);
}

// Suitable ell-cover of a parent box: centers on the grid
// x0 + rho*ell^varsigma * Z^d restricted so every child box stays inside the
// parent, with rho the largest value of (L-ell)/(2 ell^varsigma k) in [1/2,1].
struct Cover {
  BoxSpec parent;
  double child_side = 0;  // ell
  double varsigma = 0;
  double rho = 0;
  int k = 0;       // k realizing rho
  int k_ell = 0;   // disjointness multiplier, floor(ell^(1-varsigma)/rho) + 1
  std::vector<std::vector<double>> centers;  // Xi_{L,ell}, lexicographic

  double spacing() const { return rho * std::pow(child_side, varsigma); }
  double disjoint_threshold() const { return k_ell * spacing(); }
  BoxSpec child_box(std::size_t i) const { return BoxSpec(centers[i], child_side); }
};

inline Cover suitable_cover(const BoxSpec& parent, double ell, double varsigma) {
  const double L = parent.side;
  if (!(ell > 0) || !(ell < L)) throw std::invalid_argument("suitable_cover: need 0 < ell < L");
  if (!(varsigma > 0 && varsigma < 1))
    throw std::invalid_argument("suitable_cover: varsigma must be in (0,1)");

  const double step0 = std::pow(ell, varsigma);
  // Candidates (L-ell)/(2 ell^varsigma k) decrease in k; the first one that
  // drops to <= 1 is the maximum of the admissible set, if it is >= 1/2.
  double rho = 0;
  int k_sel = 0;
  std::vector<double> examined;
  for (int k = 1;; ++k) {
    double cand = (L - ell) / (2 * step0 * k);
    examined.push_back(cand);
    if (cand > 1 + 1e-12) continue;
    if (cand >= 0.5 - 1e-12) {
      rho = cand;
      k_sel = k;
    }
    break;
  }
  if (k_sel == 0) {
    std::string msg = "suitable_cover: no admissible rho in [1/2,1]; examined {";
    for (std::size_t i = 0; i < examined.size(); ++i)
      msg += (i ? "," : "") + std::to_string(examined[i]);
    throw std::invalid_argument(msg + "}");
  }

  Cover c;
  c.parent = parent;
  c.child_side = ell;
  c.varsigma = varsigma;
  c.rho = rho;
  c.k = k_sel;
  c.k_ell = static_cast<int>(std::floor(std::pow(ell, 1 - varsigma) / rho * (1 + 1e-13))) + 1;

  // Per axis the admissible grid offsets are n*spacing with |n| <= k_sel,
  // since k_sel*spacing = (L-ell)/2 exactly.
  const double spacing = rho * step0;
  const int d = parent.dim();
  std::vector<int> idx(d, -k_sel);
  while (true) {
    std::vector<double> center(d);
    for (int i = 0; i < d; ++i) center[i] = parent.center[i] + idx[i] * spacing;
    c.centers.push_back(std::move(center));
    int ax = d - 1;
    while (ax >= 0) {
      if (++idx[ax] <= k_sel) break;
      idx[ax] = -k_sel;
      --ax;
    }
    if (ax < 0) break;
  }
  return c;
}

// Disjointness of two child real boxes of a cover:
// Lambda^R(a) and Lambda^R(b) are disjoint iff ||a-b||_inf >= k_ell rho ell^varsigma.
inline bool cover_disjoint(const std::vector<double>& a, const std::vector<double>& b,
                           const Cover& c) {
  return sup_dist(a, b) >= c.disjoint_threshold() - geom_tol(c.parent.side);
}

}  // namespace emsa
