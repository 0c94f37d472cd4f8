#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "emsa/certificates.hpp"
#include "emsa/disorder.hpp"
#include "emsa/exponents.hpp"
#include "emsa/geometry.hpp"
#include "emsa/parallel.hpp"
#include "emsa/spectral.hpp"

// Monte Carlo estimators for the probabilistic bounds, the one-step
// scale-induction experiment, and the infinite-scale recursion for the
// interval radius and decay rate.

namespace emsa {

struct McReport {
  std::uint64_t n_samples = 0;
  std::uint64_t n_hits = 0;
  std::uint64_t n_skipped = 0;
  double empirical_p = 0;
  double bound_p = 0;  // theoretical comparison column
  double sigma3 = 0;   // 3 * binomial standard error of empirical_p

  void finalize() {
    empirical_p = n_samples ? static_cast<double>(n_hits) / n_samples : 0;
    sigma3 = n_samples ? 3 * std::sqrt(empirical_p * (1 - empirical_p) / n_samples) : 0;
  }
};

// P{ dist(E, sigma(H_region)) <= eta } vs  K~ eta^alpha |region|.
inline McReport wegner_mc(const Region& region, double E, double eta, const DisorderSpec& d,
                          std::uint64_t n, std::uint64_t seed, int n_threads = 1) {
  if (!(eta > 0)) throw std::invalid_argument("wegner_mc: eta must be positive");
  std::vector<char> hits(n, 0);
  parallel_for(n, n_threads, [&](std::uint64_t i) {
    PotentialSample v = sample_potential(region, d, seed, i);
    std::vector<double> vals = eigenvalues(hamiltonian(region, v));
    hits[i] = spectral_dist(E, vals) <= eta ? 1 : 0;
  });
  McReport rep;
  rep.n_samples = n;
  for (char h : hits) rep.n_hits += h;
  rep.bound_p = d.wegner_k() * std::pow(eta, d.alpha()) * static_cast<double>(region.size());
  rep.finalize();
  return rep;
}

// P{ the two spectra fail R-separation } vs K~ e^{-alpha R^beta} |A||B|.
inline McReport separation_mc(const Region& region_a, const Region& region_b, double R,
                              double beta, const DisorderSpec& d, std::uint64_t n,
                              std::uint64_t seed, int n_threads = 1) {
  if (region_a.intersects(region_b))
    throw std::invalid_argument("separation_mc: regions must be disjoint");
  Region joint = region_a.unite(region_b);
  std::vector<char> hits(n, 0);
  parallel_for(n, n_threads, [&](std::uint64_t i) {
    PotentialSample v = sample_potential(joint, d, seed, i);
    std::vector<double> va = eigenvalues(hamiltonian(region_a, restrict_potential(v, region_a)));
    std::vector<double> vb = eigenvalues(hamiltonian(region_b, restrict_potential(v, region_b)));
    hits[i] = r_separated(va, vb, R, beta) ? 0 : 1;
  });
  McReport rep;
  rep.n_samples = n;
  for (char h : hits) rep.n_hits += h;
  rep.bound_p = d.wegner_k() * std::exp(-d.alpha() * std::pow(R, beta)) *
                static_cast<double>(region_a.size()) * static_cast<double>(region_b.size());
  rep.finalize();
  return rep;
}

// Empirical probability that a sampled box certifies localizing, with the
// target column 1 - e^{-L^zeta}.
inline McReport p_localizing_mc(const BoxSpec& box, const EnergyInterval& I, double m,
                                const ExponentSet& exps, const DisorderSpec& d, std::uint64_t n,
                                std::uint64_t seed, int n_threads = 1,
                                const std::optional<EnergyInterval>& J = std::nullopt) {
  Region region = box_sites(box);
  std::vector<char> hits(n, 0);
  parallel_for(n, n_threads, [&](std::uint64_t i) {
    PotentialSample v = sample_potential(region, d, seed, i);
    Eigensystem es = eigensystem(hamiltonian(region, v), region);
    hits[i] = certify_box(es, box, I, m, exps, J).pass ? 1 : 0;
  });
  McReport rep;
  rep.n_samples = n;
  for (char h : hits) rep.n_hits += h;
  rep.bound_p = 1 - std::exp(-std::pow(box.side, exps.zeta));
  rep.finalize();
  return rep;
}

struct MaxDisjoint {
  int count = 0;
  bool exact = true;
  std::vector<std::size_t> chosen;  // indices into cover.centers
};

namespace detail {

// Maximum independent set on <= 64 vertices, branch and bound with the
// popcount bound.
inline void mis_bb(const std::vector<std::uint64_t>& adj, std::uint64_t cand, int size,
                   std::uint64_t cur, int& best, std::uint64_t& best_set) {
  if (size + std::popcount(cand) <= best) return;
  if (!cand) {
    best = size;
    best_set = cur;
    return;
  }
  int v = std::countr_zero(cand);
  std::uint64_t bit = std::uint64_t{1} << v;
  mis_bb(adj, cand & ~adj[v] & ~bit, size + 1, cur | bit, best, best_set);
  mis_bb(adj, cand & ~bit, size, cur, best, best_set);
}

// Brute-force oracle over all subsets; for <= 20 vertices.
inline int mis_brute(const std::vector<std::uint64_t>& adj) {
  int k = static_cast<int>(adj.size());
  if (k > 20) throw std::invalid_argument("mis_brute: too many vertices");
  int best = 0;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << k); ++s) {
    bool ok = true;
    for (int v = 0; v < k && ok; ++v)
      if ((s >> v) & 1)
        if (adj[v] & s) ok = false;
    if (ok) best = std::max(best, std::popcount(s));
  }
  return best;
}

}  // namespace detail

// Maximum number of pairwise-disjoint bad boxes; exact (branch and bound) up
// to 64 bad boxes, greedy with exact=false beyond.
inline MaxDisjoint max_disjoint_bad(const std::vector<char>& bad_flags, const Cover& cover) {
  if (bad_flags.size() != cover.centers.size())
    throw std::invalid_argument("max_disjoint_bad: flag count mismatch");
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < bad_flags.size(); ++i)
    if (bad_flags[i]) bad.push_back(i);

  MaxDisjoint out;
  if (bad.empty()) return out;
  if (bad.size() <= 64) {
    std::vector<std::uint64_t> adj(bad.size(), 0);
    for (std::size_t i = 0; i < bad.size(); ++i)
      for (std::size_t j = 0; j < bad.size(); ++j)
        if (i != j && !cover_disjoint(cover.centers[bad[i]], cover.centers[bad[j]], cover))
          adj[i] |= std::uint64_t{1} << j;
    int best = 0;
    std::uint64_t best_set = 0;
    std::uint64_t all = bad.size() == 64 ? ~std::uint64_t{0}
                                         : (std::uint64_t{1} << bad.size()) - 1;
    detail::mis_bb(adj, all, 0, 0, best, best_set);
    out.count = best;
    for (std::size_t i = 0; i < bad.size(); ++i)
      if ((best_set >> i) & 1) out.chosen.push_back(bad[i]);
  } else {
    out.exact = false;
    for (std::size_t i : bad) {
      bool ok = true;
      for (std::size_t j : out.chosen)
        if (!cover_disjoint(cover.centers[i], cover.centers[j], cover)) ok = false;
      if (ok) out.chosen.push_back(i);
    }
    out.count = static_cast<int>(out.chosen.size());
  }
  return out;
}

struct StepSampleRow {
  int n_bad = 0;
  int max_disjoint = 0;
  bool disjoint_exact = true;
  bool event_bn = false;  // at most N disjoint bad boxes
  int n_buffered = 0;
  int buffer_invariant_violations = 0;
  bool family_separated = false;   // realized family L-separated
  bool exhaustive_evaluated = false;
  bool exhaustive_separated = false;  // all candidate families L-separated (N <= 2 only)
  bool conclusion = false;  // parent box certified (M, I_ell, I)-localizing
};

struct StepReport {
  double ell = 0, L = 0;
  double m = 0, M = 0, c_d = 1;
  long long N = 0;
  std::size_t n_centers = 0;
  std::uint64_t n_samples = 0;
  std::uint64_t n_bn = 0;
  std::uint64_t n_family_separated = 0;
  std::uint64_t n_conclusion = 0;
  std::uint64_t n_bn_and_separated = 0;
  std::uint64_t n_all_joint = 0;  // bn & separated & conclusion
  std::uint64_t n_conclusion_given_events = 0;
  std::uint64_t n_exhaustive_evaluated = 0;
  std::uint64_t n_exhaustive_separated = 0;
  std::uint64_t total_bad = 0;
  std::uint64_t total_buffered = 0;
  std::uint64_t total_buffer_violations = 0;
  std::vector<StepSampleRow> rows;
};

// One induction step at scale ell: cover the L = ell^gamma box, certify every
// cover box, bound the disjoint bad boxes, buffer the bad clusters, test
// L-separation of the realized family, and certify the parent box at the
// degraded rate M = m(1 - C_d ell^-varrho) on the shrunk interval.
inline StepReport induction_step(double ell, int dim, const EnergyInterval& I, double m,
                                 const ExponentSet& exps, const DisorderSpec& d, std::uint64_t n,
                                 std::uint64_t seed, int n_threads = 1, double c_d = 1.0) {
  ValidationReport vr = validate(exps);
  if (!vr.pass) throw std::invalid_argument("induction_step: exponent set fails validation");

  const double L = std::pow(ell, exps.gamma);
  const BoxSpec parent_box(std::vector<double>(dim, 0.0), L);
  const Region parent = box_sites(parent_box);
  if (parent.size() > kMaxDenseSites)
    throw std::invalid_argument("induction_step: parent box exceeds dense size cap");
  const Cover cover = suitable_cover(parent_box, ell, exps.varsigma);

  StepReport rep;
  rep.ell = ell;
  rep.L = L;
  rep.m = m;
  rep.c_d = c_d;
  rep.M = m * (1 - c_d * std::pow(ell, -exps.varrho()));
  rep.N = floor_pow(ell, (exps.gamma - 1) * exps.zeta_tilde());
  rep.n_centers = cover.centers.size();
  rep.n_samples = n;
  rep.rows.resize(n);

  const EnergyInterval i_ell = shrink_expand(I, ell, exps.kappa).shrunk;

  std::vector<Region> box_regions;
  for (const auto& a : cover.centers) box_regions.push_back(box_sites(BoxSpec(a, ell)));

  // Candidate bad-cluster families for the exhaustive separation event; only
  // enumerated when N <= 2 and the cover is small.
  std::vector<std::vector<std::vector<double>>> candidate_families;
  bool exhaustive = rep.N <= 2 && cover.centers.size() <= 40;
  if (exhaustive) {
    for (std::size_t i = 0; i < cover.centers.size(); ++i)
      candidate_families.push_back({cover.centers[i]});
    if (rep.N >= 2) {
      const double g2_hi = (3 * cover.k_ell - 1) * cover.spacing();
      const double tol = geom_tol(L);
      for (std::size_t i = 0; i < cover.centers.size(); ++i)
        for (std::size_t j = i + 1; j < cover.centers.size(); ++j) {
          double dd = sup_dist(cover.centers[i], cover.centers[j]);
          if (cover_disjoint(cover.centers[i], cover.centers[j], cover) && dd <= g2_hi + tol)
            candidate_families.push_back({cover.centers[i], cover.centers[j]});
        }
    }
    if (candidate_families.size() > 64) exhaustive = false;
  }

  parallel_for(n, n_threads, [&](std::uint64_t s) {
    StepSampleRow row;
    PotentialSample v = sample_potential(parent, d, seed, s);

    std::vector<char> bad(cover.centers.size(), 0);
    std::vector<std::vector<double>> box_values(cover.centers.size());
    for (std::size_t i = 0; i < cover.centers.size(); ++i) {
      Eigensystem es = eigensystem(
          hamiltonian(box_regions[i], restrict_potential(v, box_regions[i])), box_regions[i]);
      box_values[i] = es.values;
      bad[i] = certify_box(es, cover.child_box(i), I, m, exps).pass ? 0 : 1;
      if (bad[i]) ++row.n_bad;
    }

    MaxDisjoint md = max_disjoint_bad(bad, cover);
    row.max_disjoint = md.count;
    row.disjoint_exact = md.exact;
    row.event_bn = md.count <= rep.N;

    std::vector<std::vector<double>> a_n;
    for (std::size_t i : md.chosen) a_n.push_back(cover.centers[i]);
    std::vector<BufferedSubset> buffered = build_buffered(a_n, cover);
    row.n_buffered = static_cast<int>(buffered.size());
    for (const auto& bs : buffered)
      if (!check_buffered_invariants(bs, cover, exps).pass) ++row.buffer_invariant_violations;

    // Realized family: good boxes (outside every padded cluster) plus the
    // buffered subsets.
    std::vector<Region> family;
    std::vector<std::vector<double>> spectra;
    for (std::size_t i = 0; i < cover.centers.size(); ++i) {
      bool good = true;
      for (const auto& bs : buffered)
        if (detail::set_dist(cover.centers[i], bs.padded) <= geom_tol(L)) good = false;
      if (good) {
        family.push_back(box_regions[i]);
        spectra.push_back(box_values[i]);
      }
    }
    for (const auto& bs : buffered) {
      family.push_back(bs.ups);
      spectra.push_back(eigenvalues(hamiltonian(bs.ups, restrict_potential(v, bs.ups))));
    }
    row.family_separated = family_r_separated(family, spectra, L, exps.beta).pass;

    if (exhaustive) {
      row.exhaustive_evaluated = true;
      std::vector<Region> fam;
      std::vector<std::vector<double>> spec;
      for (std::size_t i = 0; i < cover.centers.size(); ++i) {
        fam.push_back(box_regions[i]);
        spec.push_back(box_values[i]);
      }
      for (const auto& phi : candidate_families) {
        BufferedSubset bs = build_buffered(phi, cover).front();
        fam.push_back(bs.ups);
        spec.push_back(eigenvalues(hamiltonian(bs.ups, restrict_potential(v, bs.ups))));
      }
      row.exhaustive_separated = family_r_separated(fam, spec, L, exps.beta).pass;
    }

    Eigensystem es_l = eigensystem(hamiltonian(parent, v), parent);
    row.conclusion = certify_box(es_l, parent_box, I, rep.M, exps, i_ell).pass;
    rep.rows[s] = row;
  });

  for (const auto& row : rep.rows) {
    rep.n_bn += row.event_bn;
    rep.n_family_separated += row.family_separated;
    rep.n_conclusion += row.conclusion;
    rep.n_bn_and_separated += row.event_bn && row.family_separated;
    rep.n_all_joint += row.event_bn && row.family_separated && row.conclusion;
    rep.n_conclusion_given_events += row.event_bn && row.family_separated &&
                                     row.buffer_invariant_violations == 0 && row.conclusion;
    rep.n_exhaustive_evaluated += row.exhaustive_evaluated;
    rep.n_exhaustive_separated += row.exhaustive_evaluated && row.exhaustive_separated;
    rep.total_bad += static_cast<std::uint64_t>(row.n_bad);
    rep.total_buffered += static_cast<std::uint64_t>(row.n_buffered);
    rep.total_buffer_violations += static_cast<std::uint64_t>(row.buffer_invariant_violations);
  }
  return rep;
}

struct RecursionState {
  int k = 0;
  double L = 0;
  double A = 0;  // interval radius, I_k = I(E, A_k)
  double m = 0;  // decay rate m_k
};

struct RecursionResult {
  std::vector<RecursionState> states;
  double A_inf = 0, m_inf = 0;
  double a_tail_bound = 0, m_tail_bound = 0;  // relative truncation error bounds
  bool sandwich_lower = false;  // L0^{-gamma kappa'} <= m_inf
  bool sandwich_upper = false;  // m_inf < (1/2) log(1 + A_inf / 4d)
  bool overflowed = false;
};

// Scale recursion L_{k+1} = L_k^gamma with A_{k+1} = A_k (1 - L_k^-kappa) and
// m_{k+1} = m_k (1 - C_d L_k^-varrho); infinite products truncated when the
// next factor is within tol of 1, with a geometric tail bound.
inline RecursionResult recursion(double L0, double A0, double m0, int dim,
                                 const ExponentSet& exps, double c_d, int k_max, double tol) {
  if (!(L0 > 1)) throw std::invalid_argument("recursion: L0 must be > 1");
  if (!(A0 > 0 && m0 > 0)) throw std::invalid_argument("recursion: A0, m0 must be positive");
  if (!(tol > 0 && tol < 1)) throw std::invalid_argument("recursion: tol in (0,1)");
  const double rho = exps.varrho();
  if (c_d * std::pow(L0, -rho) >= 1)
    throw std::invalid_argument("recursion: decay factor 1 - C_d L0^-varrho is not positive");

  RecursionResult out;
  double L = L0, A = A0, m = m0;
  for (int k = 0; k <= k_max; ++k) {
    out.states.push_back({k, L, A, m});
    double a_factor = 1 - std::pow(L, -exps.kappa);
    double m_factor = 1 - c_d * std::pow(L, -rho);
    A *= a_factor;
    m *= m_factor;
    double next = std::pow(L, exps.gamma);
    if (next > 1e300) {
      out.overflowed = true;
      break;
    }
    L = next;
  }

  // Infinite products: run until the deviation from 1 drops below tol, then
  // bound the tail.  t_{k+1} = t_k^gamma, so past truncation the terms decay
  // faster than geometrically with ratio t_K^(gamma-1).
  auto truncated_product = [&](double coeff, double expo, double& tail_bound) {
    double prod = 1, lk = L0;
    for (int k = 0; k < 100000; ++k) {
      double t = coeff * std::pow(lk, -expo);
      if (!(t < 1)) throw std::invalid_argument("recursion: product factor not positive");
      if (t < tol) {
        double q = std::pow(t, exps.gamma - 1);
        tail_bound = t / (1 - q);
        break;
      }
      prod *= 1 - t;
      double next = std::pow(lk, exps.gamma);
      if (next > 1e300) {
        tail_bound = coeff * std::pow(next, -expo);
        break;
      }
      lk = next;
    }
    return prod;
  };
  out.A_inf = A0 * truncated_product(1.0, exps.kappa, out.a_tail_bound);
  if (c_d == 0) {
    out.m_inf = m0;
    out.m_tail_bound = 0;
  } else {
    out.m_inf = m0 * truncated_product(c_d, rho, out.m_tail_bound);
  }

  out.sandwich_lower = std::pow(L0, -exps.gamma * exps.kappa_prime) <= out.m_inf;
  out.sandwich_upper = out.m_inf < 0.5 * std::log(1 + out.A_inf / (4.0 * dim));
  return out;
}

// Localization probe at an off-schedule scale L in [L_k, L_{k+1}), using the
// scale-k targets (m_k, I_k, I_{k-1}).
inline McReport between_scales(double L, int k, const RecursionResult& rec, double E,
                               const std::vector<double>& x, const ExponentSet& exps,
                               const DisorderSpec& d, std::uint64_t n, std::uint64_t seed,
                               int n_threads = 1) {
  if (k < 0 || static_cast<std::size_t>(k) >= rec.states.size())
    throw std::invalid_argument("between_scales: k out of range");
  double lk = rec.states[k].L;
  double lk1 = static_cast<std::size_t>(k + 1) < rec.states.size() ? rec.states[k + 1].L
                                                                   : std::pow(lk, exps.gamma);
  if (!(L >= lk && L < lk1))
    throw std::invalid_argument("between_scales: L outside [L_k, L_{k+1})");
  EnergyInterval outer(E, rec.states[k > 0 ? k - 1 : 0].A);
  EnergyInterval inner(E, rec.states[k].A);
  return p_localizing_mc(BoxSpec(x, L), outer, rec.states[k].m, exps, d, n, seed, n_threads,
                         inner);
}

}  // namespace emsa
