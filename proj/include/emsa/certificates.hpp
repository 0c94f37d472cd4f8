#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "emsa/disorder.hpp"
#include "emsa/exponents.hpp"
#include "emsa/geometry.hpp"
#include "emsa/spectral.hpp"

// Localization certificates: the modulating function h_I, interval
// shrink/expand, per-eigenpair decay checks, localizing-box certification,
// spectral separation, buffered subsets, and numerical verification of the
// deterministic decay estimates.

namespace emsa {

// Open interval I(E,A) = (E-A, E+A).
struct EnergyInterval {
  double center = 0;  // E
  double radius = 1;  // A

  EnergyInterval() = default;
  EnergyInterval(double E, double A) : center(E), radius(A) {
    if (!(A > 0)) throw std::invalid_argument("EnergyInterval: radius must be positive");
  }
  double lo() const { return center - radius; }
  double hi() const { return center + radius; }
  bool contains(double t) const { return t > lo() && t < hi(); }
};

// h_I(t) = 1 - ((t-E)/A)^2 on I, 0 outside; positive exactly on I.
inline double h_eval(const EnergyInterval& I, double t) {
  double s = (t - I.center) / I.radius;
  double v = 1 - s * s;
  return v > 0 ? v : 0.0;
}

struct IntervalPair {
  EnergyInterval shrunk;    // I_L, radius A(1 - L^-kappa)
  EnergyInterval expanded;  // I^L, radius A(1 - L^-kappa)^-1
};

inline IntervalPair shrink_expand(const EnergyInterval& I, double L, double kappa) {
  if (!(L > 1)) throw std::invalid_argument("shrink_expand: L must be > 1");
  double f = 1 - std::pow(L, -kappa);
  if (!(f > 0)) throw std::invalid_argument("shrink_expand: nonpositive shrink factor");
  return {EnergyInterval(I.center, I.radius * f), EnergyInterval(I.center, I.radius / f)};
}

struct LocalizedCheck {
  bool pass = true;
  // min over tested y of (-log|phi(y)| - rate*||y-x||); +inf when no y tested
  // or every tested value is zero.
  double margin = kInf;
};

// Checks |phi(y)| <= e^{-m ||y-x||} for all y in the region with
// ||y-x|| >= L_tau = floor(L^tau).
inline LocalizedCheck is_localized(const std::vector<double>& phi, const Region& r,
                                   const Site& x, double m, double L, double tau) {
  if (phi.size() != r.size()) throw std::invalid_argument("is_localized: size mismatch");
  double norm2 = 0;
  for (double v : phi) norm2 += v * v;
  if (std::abs(std::sqrt(norm2) - 1) > 1e-8)
    throw std::invalid_argument("is_localized: vector not normalized");

  const double l_tau = static_cast<double>(floor_pow(L, tau));
  LocalizedCheck out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    double dist = sup_dist(r.site(i), x);
    if (dist < l_tau) continue;
    double a = std::abs(phi[i]);
    if (a == 0) continue;
    out.margin = std::min(out.margin, -std::log(a) - m * dist);
  }
  out.pass = out.margin >= 0;
  return out;
}

struct EigenpairCertificate {
  std::size_t index = 0;
  double value = 0;    // nu
  double h_value = 0;  // chi_J(nu) * h_I(nu)
  double rate = 0;     // m * h_value
  Site center;         // x_nu
  double margin = 0;
  bool pass = false;
};

struct BoxCertificate {
  bool pass = false;
  std::string reason;  // "rate-bounds" when m falls outside its window
  double m = 0;
  double m_lo = 0, m_hi = 0;  // admissible window for m
  std::vector<EigenpairCertificate> pairs;
};

// Certifies a box (m,I)-localizing, or (m,J,I)-localizing when J is given
// (J must share I's center and sit inside I; the m upper bound then uses J's
// radius).  Center search per eigenpair: argmax |phi| first, then exhaustive.
inline BoxCertificate certify_box(const Eigensystem& es, const BoxSpec& box,
                                  const EnergyInterval& I, double m, const ExponentSet& exps,
                                  const std::optional<EnergyInterval>& J = std::nullopt) {
  if (J) {
    if (J->center != I.center || J->radius > I.radius)
      throw std::invalid_argument("certify_box: J must share I's center and lie inside I");
  }
  const double L = box.side;
  const int d = box.dim();
  const double B = J ? J->radius : I.radius;

  BoxCertificate cert;
  cert.m = m;
  cert.m_lo = std::pow(L, -exps.kappa_prime);
  cert.m_hi = 0.5 * std::log(1 + B / (4.0 * d));
  if (!(m >= cert.m_lo && m <= cert.m_hi)) {
    cert.reason = "rate-bounds";
    return cert;
  }

  const Region& r = es.region;
  bool all = true;
  for (std::size_t k = 0; k < es.size(); ++k) {
    EigenpairCertificate pc;
    pc.index = k;
    pc.value = es.values[k];
    double chi = J ? (J->contains(pc.value) ? 1.0 : 0.0) : 1.0;
    pc.h_value = chi * h_eval(I, pc.value);
    pc.rate = m * pc.h_value;

    std::vector<double> phi = es.vector(k);
    // Fast path: the max-modulus site.
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.size(); ++i)
      if (std::abs(phi[i]) > std::abs(phi[best])) best = i;
    pc.center = r.site(best);
    LocalizedCheck chk = is_localized(phi, r, pc.center, pc.rate, L, exps.tau);
    if (!chk.pass) {
      // Exhaustive search realizes the existential quantifier exactly.
      for (std::size_t i = 0; i < r.size(); ++i) {
        LocalizedCheck alt = is_localized(phi, r, r.site(i), pc.rate, L, exps.tau);
        if (alt.margin > chk.margin) {
          chk = alt;
          pc.center = r.site(i);
        }
        if (chk.pass) break;
      }
    }
    pc.margin = chk.margin;
    pc.pass = chk.pass;
    all = all && pc.pass;
    cert.pairs.push_back(std::move(pc));
  }
  cert.pass = all;
  return cert;
}

// Largest m on a grid of resolution 1e-4 inside the admissible window for
// which certify_box passes; 0 when none does.
inline double max_localizing_m(const Eigensystem& es, const BoxSpec& box, const EnergyInterval& I,
                               const ExponentSet& exps,
                               const std::optional<EnergyInterval>& J = std::nullopt) {
  const double step = 1e-4;
  const double lo = std::pow(box.side, -exps.kappa_prime);
  const double B = J ? J->radius : I.radius;
  const double hi = 0.5 * std::log(1 + B / (4.0 * box.dim()));
  if (lo > hi) return 0;
  auto passes = [&](double m) { return certify_box(es, box, I, m, exps, J).pass; };
  if (!passes(lo)) return 0;
  // Within the window, passing is monotone decreasing in m.
  long a = 0, b = static_cast<long>(std::floor((hi - lo) / step));
  while (a < b) {
    long mid = a + (b - a + 1) / 2;
    if (passes(lo + mid * step))
      a = mid;
    else
      b = mid - 1;
  }
  return lo + a * step;
}

// dist(sigma_A, sigma_B) >= e^{-R^beta}; vacuously true on empty input.
inline bool r_separated(const std::vector<double>& vals_a, const std::vector<double>& vals_b,
                        double R, double beta) {
  const double thr = std::exp(-std::pow(R, beta));
  for (double a : vals_a)
    for (double b : vals_b)
      if (std::abs(a - b) < thr) return false;
  return true;
}

struct FamilySeparation {
  bool pass = true;
  long violating_i = -1, violating_j = -1;
};

// Pairwise R-separation over DISJOINT members only.
inline FamilySeparation family_r_separated(const std::vector<Region>& regions,
                                           const std::vector<std::vector<double>>& spectra,
                                           double R, double beta) {
  if (regions.size() != spectra.size())
    throw std::invalid_argument("family_r_separated: size mismatch");
  FamilySeparation out;
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      if (regions[i].intersects(regions[j])) continue;
      if (!r_separated(spectra[i], spectra[j], R, beta)) {
        out.pass = false;
        out.violating_i = static_cast<long>(i);
        out.violating_j = static_cast<long>(j);
        return out;
      }
    }
  return out;
}

struct BufferedSubset {
  std::vector<std::vector<double>> component;       // Phi_r, bad centers
  std::vector<std::vector<double>> padded;          // Phi~_r
  std::vector<std::vector<double>> buffer_centers;  // G_Ups, exterior G1 boundary of Phi~_r
  Region ups;                                       // union of child boxes over Phi~_r
};

namespace detail {

inline double set_dist(const std::vector<double>& a,
                       const std::vector<std::vector<double>>& set) {
  double d = kInf;
  for (const auto& s : set) d = std::min(d, sup_dist(a, s));
  return d;
}

}  // namespace detail

// Buffered subsets around disjoint bad cover boxes: G2-connected components
// of the bad set, padded by one disjointness radius, with the padded set's
// G1 exterior boundary as buffer centers.
inline std::vector<BufferedSubset> build_buffered(
    const std::vector<std::vector<double>>& bad_centers, const Cover& cover) {
  const double tol = geom_tol(cover.parent.side);
  const double spacing = cover.spacing();
  const double ell = cover.child_side;
  const double g2_hi = (3 * cover.k_ell - 1) * spacing;
  const double pad = cover.k_ell * spacing;

  for (const auto& b : bad_centers) {
    if (detail::set_dist(b, cover.centers) > tol)
      throw std::invalid_argument("build_buffered: bad center not in the cover");
  }
  for (std::size_t i = 0; i < bad_centers.size(); ++i)
    for (std::size_t j = i + 1; j < bad_centers.size(); ++j)
      if (!cover_disjoint(bad_centers[i], bad_centers[j], cover))
        throw std::invalid_argument("build_buffered: bad centers not pairwise disjoint");

  // G2-connected components of the bad set.
  std::vector<int> comp(bad_centers.size(), -1);
  int n_comp = 0;
  for (std::size_t i = 0; i < bad_centers.size(); ++i) {
    if (comp[i] >= 0) continue;
    std::vector<std::size_t> stack{i};
    comp[i] = n_comp;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < bad_centers.size(); ++v) {
        if (comp[v] >= 0) continue;
        double dd = sup_dist(bad_centers[u], bad_centers[v]);
        if (dd <= g2_hi + tol) {
          comp[v] = n_comp;
          stack.push_back(v);
        }
      }
    }
    ++n_comp;
  }

  std::vector<BufferedSubset> out(n_comp);
  for (std::size_t i = 0; i < bad_centers.size(); ++i)
    out[comp[i]].component.push_back(bad_centers[i]);

  for (auto& bs : out) {
    for (const auto& a : cover.centers) {
      double dd = detail::set_dist(a, bs.component);
      if (dd <= pad + tol) bs.padded.push_back(a);
    }
    for (const auto& a : cover.centers) {
      if (detail::set_dist(a, bs.padded) <= tol) continue;  // inside padded set
      if (detail::set_dist(a, bs.padded) <= (cover.k_ell - 1) * spacing + tol)
        bs.buffer_centers.push_back(a);
    }
    Region u(cover.parent.dim(), {});
    for (const auto& a : bs.padded) u = u.unite(box_sites(BoxSpec(a, ell)));
    bs.ups = std::move(u);
    double diam = bs.ups.diameter();
    if (diam > 6 * ell * static_cast<double>(bs.component.size()) + tol)
      throw std::runtime_error("build_buffered: diameter bound violated");
  }
  for (std::size_t r = 0; r < out.size(); ++r)
    for (std::size_t s = r + 1; s < out.size(); ++s)
      for (const auto& a : out[r].padded)
        if (detail::set_dist(a, out[s].padded) < pad - tol)
          throw std::runtime_error("build_buffered: padded components too close");
  return out;
}

struct BufferedInvariants {
  bool connected = false;
  bool buffers_inside = false;   // each buffer box sits inside the parent box
  bool boundary_shielded = false;  // interior boundary covered by buffer interiors
  bool pass = false;
};

// Direct enumeration of the structural buffered-subset invariants, with
// interior depth t = floor(ell^tau_tilde).
inline BufferedInvariants check_buffered_invariants(const BufferedSubset& bs, const Cover& cover,
                                                    const ExponentSet& exps) {
  BufferedInvariants inv;
  const Region parent = box_sites(cover.parent);
  const double ell = cover.child_side;
  const double l_tt = static_cast<double>(floor_pow(ell, exps.tau_tilde()));

  inv.connected = bs.ups.connected();

  inv.buffers_inside = true;
  for (const auto& a : bs.buffer_centers)
    if (!box_sites(BoxSpec(a, ell)).subset_of(parent)) inv.buffers_inside = false;

  std::vector<Region> buffer_interiors;
  for (const auto& a : bs.buffer_centers)
    buffer_interiors.push_back(
        interior_region(box_sites(BoxSpec(a, ell)), parent, std::max(1.0, l_tt)));
  inv.boundary_shielded = true;
  BoundaryData ups_bd = boundary(bs.ups, parent);
  for (const auto& y : ups_bd.interior.sites()) {
    bool covered = false;
    for (const auto& bi : buffer_interiors)
      if (bi.contains(y)) {
        covered = true;
        break;
      }
    if (!covered) inv.boundary_shielded = false;
  }
  inv.pass = inv.connected && inv.buffers_inside && inv.boundary_shielded;
  return inv;
}

struct OutbadResult {
  bool skipped = false;
  std::string skip_reason;
  bool pass = false;
  double bound = 0;       // 2d/eta * |ext boundary|^(1/2) * max boundary value
  double worst_ratio = 0; // max over y in phi of |psi(y)| / bound
  Site witness;           // y realizing the worst ratio
};

// Exact eigenfunction bound deep inside a subregion whose spectrum avoids
// lambda: for every y in phi,
// |psi(y)| <= 2d/eta * |ext|^(1/2) * max over the exterior boundary of |psi|.
inline OutbadResult verify_outbad(const std::vector<double>& psi, double lambda,
                                  const Region& phi, const Region& theta, double eta,
                                  const Matrix& h_theta) {
  if (psi.size() != theta.size() || h_theta.n != theta.size())
    throw std::invalid_argument("verify_outbad: size mismatch");
  if (!phi.subset_of(theta)) throw std::invalid_argument("verify_outbad: phi not in theta");

  OutbadResult out;
  BoundaryData bd = boundary(phi, theta);
  if (bd.exterior.empty()) {
    out.skipped = true;
    out.skip_reason = "empty-exterior-boundary";
    return out;
  }

  // Re-verify the spectral-distance hypothesis on the restriction H_phi.
  Matrix h_phi(phi.size());
  std::vector<std::size_t> map(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i)
    map[i] = static_cast<std::size_t>(theta.index_of(phi.site(i)));
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (std::size_t j = 0; j < phi.size(); ++j) h_phi.at(i, j) = h_theta.at(map[i], map[j]);
  if (spectral_dist(lambda, eigenvalues(h_phi)) < eta) {
    out.skipped = true;
    out.skip_reason = "spectral-distance-below-eta";
    return out;
  }

  const int d = theta.dim();
  double boundary_max = 0;
  for (const auto& v : bd.exterior.sites())
    boundary_max = std::max(boundary_max,
                            std::abs(psi[static_cast<std::size_t>(theta.index_of(v))]));
  out.bound = (2.0 * d / eta) * std::sqrt(static_cast<double>(bd.exterior.size())) * boundary_max;

  out.pass = true;
  for (const auto& y : phi.sites()) {
    double a = std::abs(psi[static_cast<std::size_t>(theta.index_of(y))]);
    double ratio = a == 0 ? 0 : (out.bound == 0 ? kInf : a / out.bound);
    if (ratio > out.worst_ratio) {
      out.worst_ratio = ratio;
      out.witness = y;
    }
  }
  if (out.worst_ratio > 1 + 1e-8) out.pass = false;
  return out;
}

struct DecayReport {
  bool skipped = false;
  std::vector<std::string> skip_reasons;
  double m3 = 0;
  double c_d = 1.0;
  double h_lambda = 0;
  double max_ratio = 0;   // <= 1 means the asymptotic bound held at this scale
  std::size_t n_points = 0;
};

// Monitoring check of the interior decay estimate: an eigenpair (psi,lambda)
// of H_theta with lambda in I_ell, measured against a localizing box Lambda_ell
// inside theta.  The bound is asymptotic in ell, so the result is a ratio
// report, not an assertion.
inline DecayReport verify_decay_lemma(const std::vector<double>& psi, double lambda,
                                      const BoxSpec& box, const Region& theta,
                                      const Eigensystem& es_box, const EnergyInterval& I,
                                      double m, const ExponentSet& exps, double c_d = 1.0) {
  if (psi.size() != theta.size()) throw std::invalid_argument("verify_decay_lemma: size mismatch");
  const double ell = box.side;
  const double L = std::pow(ell, exps.gamma);

  DecayReport rep;
  rep.c_d = c_d;
  rep.m3 = m * (1 - c_d * std::pow(ell, -(1 - exps.tau) / 2));
  rep.h_lambda = h_eval(I, lambda);

  EnergyInterval i_ell = shrink_expand(I, ell, exps.kappa).shrunk;
  if (!i_ell.contains(lambda)) rep.skip_reasons.push_back("lambda-outside-shrunk-interval");
  std::vector<double> sigma_box = sigma_in(es_box.values, I.lo(), I.hi());
  if (spectral_dist(lambda, sigma_box) < 0.5 * std::exp(-std::pow(L, exps.beta)))
    rep.skip_reasons.push_back("lambda-too-close-to-box-spectrum");
  if (!rep.skip_reasons.empty()) {
    rep.skipped = true;
    return rep;
  }

  const Region box_region = box_sites(box);
  if (!box_region.subset_of(theta))
    throw std::invalid_argument("verify_decay_lemma: box not inside theta");
  const double l_tt = static_cast<double>(floor_pow(ell, exps.tau_tilde()));
  const Region deep = interior_region(box_region, theta, std::max(1.0, l_tt));
  const Region inner_bd = boundary(box_region, theta).interior;
  const Region ext_bd = boundary(box_region, theta).exterior;

  double boundary_max = 0;
  for (const auto& v : ext_bd.sites())
    boundary_max = std::max(boundary_max,
                            std::abs(psi[static_cast<std::size_t>(theta.index_of(v))]));

  for (const auto& y : deep.sites()) {
    double depth_y = dist_to(y, inner_bd);
    double bound = std::exp(-rep.m3 * rep.h_lambda * depth_y) * boundary_max;
    double a = std::abs(psi[static_cast<std::size_t>(theta.index_of(y))]);
    double ratio = a == 0 ? 0 : (bound == 0 ? kInf : a / bound);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.n_points;
  }
  return rep;
}

// Monitoring check of the buffered-subset bound: an eigenpair of H over the
// parent box, measured on a buffered subset whose spectrum (and every buffer
// box's spectrum) avoids lambda.  Threshold e^{-(m3/2) h_I(lambda) ell_tt}
// against the best witness on the buffer boxes' exterior boundaries.
inline DecayReport verify_buffer_lemma(const std::vector<double>& psi, double lambda,
                                       const BufferedSubset& bs, const Cover& cover,
                                       const Region& parent,
                                       const std::vector<double>& ups_values,
                                       const std::vector<std::vector<double>>& buffer_values,
                                       const EnergyInterval& I, double m,
                                       const ExponentSet& exps, double c_d = 1.0) {
  if (psi.size() != parent.size())
    throw std::invalid_argument("verify_buffer_lemma: size mismatch");
  if (buffer_values.size() != bs.buffer_centers.size())
    throw std::invalid_argument("verify_buffer_lemma: buffer spectra count mismatch");
  const double ell = cover.child_side;
  const double L = cover.parent.side;
  const double thr_dist = 0.5 * std::exp(-std::pow(L, exps.beta));

  DecayReport rep;
  rep.c_d = c_d;
  rep.m3 = m * (1 - c_d * std::pow(ell, -(1 - exps.tau) / 2));
  rep.h_lambda = h_eval(I, lambda);

  EnergyInterval i_ell = shrink_expand(I, ell, exps.kappa).shrunk;
  if (!i_ell.contains(lambda)) rep.skip_reasons.push_back("lambda-outside-shrunk-interval");
  if (bs.ups.size() >= parent.size()) rep.skip_reasons.push_back("ups-not-proper-subset");
  if (spectral_dist(lambda, sigma_in(ups_values, I.lo(), I.hi())) < thr_dist)
    rep.skip_reasons.push_back("lambda-too-close-to-ups-spectrum");
  for (const auto& bv : buffer_values)
    if (spectral_dist(lambda, sigma_in(bv, I.lo(), I.hi())) < thr_dist) {
      rep.skip_reasons.push_back("lambda-too-close-to-buffer-spectrum");
      break;
    }
  if (bs.buffer_centers.empty()) rep.skip_reasons.push_back("empty-buffer-set");
  if (!rep.skip_reasons.empty()) {
    rep.skipped = true;
    return rep;
  }

  const double l_tt = static_cast<double>(floor_pow(ell, exps.tau_tilde()));
  double witness_max = 0;
  for (const auto& a : bs.buffer_centers) {
    Region box_region = box_sites(BoxSpec(a, ell));
    BoundaryData box_bd = boundary(box_region, parent);
    for (const auto& v : box_bd.exterior.sites())
      witness_max = std::max(witness_max,
                             std::abs(psi[static_cast<std::size_t>(parent.index_of(v))]));
  }
  double bound = std::exp(-(rep.m3 / 2) * rep.h_lambda * l_tt) * witness_max;
  for (const auto& y : bs.ups.sites()) {
    double a = std::abs(psi[static_cast<std::size_t>(parent.index_of(y))]);
    double ratio = a == 0 ? 0 : (bound == 0 ? kInf : a / bound);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.n_points;
  }
  return rep;
}

}  // namespace emsa
