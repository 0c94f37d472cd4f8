#include <doctest.h>

#include <cmath>
#include <vector>

#include "emsa/certificates.hpp"
#include "emsa/disorder.hpp"
#include "emsa/spectral.hpp"

using namespace emsa;

namespace {

// Exponent values chosen so the rate window [L^-kappa', m_hi] is nonempty at
// the small box sides used here; individual checks only read tau and kappa'.
ExponentSet small_scale_exps() {
  ExponentSet e;
  e.xi = 0.1;
  e.zeta = 0.2;
  e.beta = 0.25;
  e.gamma = 1.2;
  e.tau = 0.5;
  e.kappa = 0.04;
  e.kappa_prime = 0.55;
  e.varsigma = 0.5;
  return e;
}

Region line(int lo, int hi) {
  std::vector<Site> s;
  for (int i = lo; i <= hi; ++i) s.push_back({i});
  return Region(1, std::move(s));
}

// Pseudo-eigensystem whose first vector is the explicit profile, for
// exercising the certification geometry without a matrix in the loop.  The
// remaining pairs carry values far outside any interval of interest, so only
// the first vector is checked nontrivially.
Eigensystem single_vector_system(const Region& r, double value, const std::vector<double>& phi) {
  Eigensystem es;
  es.region = r;
  es.values.assign(r.size(), 0.0);
  es.values[0] = value;
  es.vectors = Matrix(r.size());
  for (std::size_t k = 1; k < r.size(); ++k) {
    es.values[k] = 1e6 + static_cast<double>(k);
    es.vectors.at(k, k) = 1.0;
  }
  for (std::size_t i = 0; i < r.size(); ++i) es.vectors.at(i, 0) = phi[i];
  return es;
}

std::vector<double> normalized(std::vector<double> v) {
  double n2 = 0;
  for (double x : v) n2 += x * x;
  for (double& x : v) x /= std::sqrt(n2);
  return v;
}

}  // namespace

TEST_CASE("h_eval values and shape") {
  EnergyInterval I(0, 2);
  CHECK(h_eval(I, 0) == 1.0);
  CHECK(h_eval(I, 1) == doctest::Approx(0.75));
  CHECK(h_eval(I, 2) == 0.0);
  CHECK(h_eval(I, 3.5) == 0.0);
  CHECK(h_eval(I, -1) == h_eval(I, 1));
  // supported exactly on the open interval
  CHECK(h_eval(I, -2) == 0.0);
  CHECK(h_eval(I, 1.999) > 0.0);
  // maximum at the center
  for (double t : {-1.5, -0.3, 0.7, 1.9}) CHECK(h_eval(I, t) <= h_eval(I, 0));

  EnergyInterval off(1.5, 0.5);
  CHECK(off.contains(1.2));
  CHECK_FALSE(off.contains(1.0));  // open endpoint
  CHECK(h_eval(off, 1.5) == 1.0);
  CHECK_THROWS_AS(EnergyInterval(0, -1), std::invalid_argument);
}

TEST_CASE("interval shrink and expand") {
  EnergyInterval I(0, 2);
  IntervalPair p = shrink_expand(I, 16, 0.3);
  double f = 1 - std::pow(16.0, -0.3);
  CHECK(p.shrunk.radius == doctest::Approx(2 * f).epsilon(1e-14));
  CHECK(p.shrunk.radius == doctest::Approx(1.1294).epsilon(1e-4));
  CHECK(p.expanded.radius == doctest::Approx(2 / f).epsilon(1e-14));

  // shrinking the expanded interval recovers I
  IntervalPair q = shrink_expand(p.expanded, 16, 0.3);
  CHECK(q.shrunk.radius == doctest::Approx(2.0).epsilon(1e-14));

  // h on the shrunk interval stays above L^-kappa (graded lower bound)
  double thr = std::pow(16.0, -0.3);
  for (int i = 0; i <= 1000; ++i) {
    double t = p.shrunk.lo() + (p.shrunk.hi() - p.shrunk.lo()) * i / 1000.0;
    if (!p.shrunk.contains(t)) continue;
    CHECK(h_eval(I, t) >= thr - 1e-12);
  }

  CHECK_THROWS_AS(shrink_expand(I, 1.0, 0.3), std::invalid_argument);
}

TEST_CASE("is_localized on explicit vectors") {
  Region r = line(-10, 10);
  const double L = 21, tau = 0.5;  // L_tau = floor(21^0.5) = 4

  // delta function: every tested site has value zero, vacuous pass
  std::vector<double> delta(r.size(), 0.0);
  delta[r.index_of({0})] = 1.0;
  LocalizedCheck c = is_localized(delta, r, {0}, 5.0, L, tau);
  CHECK(c.pass);
  CHECK(c.margin == kInf);

  // true exponential profile passes up to its decay rate and fails beyond
  std::vector<double> expo(r.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    expo[i] = std::exp(-0.5 * std::abs(r.site(i)[0]));
  expo = normalized(expo);
  LocalizedCheck ok = is_localized(expo, r, {0}, 0.3, L, tau);
  CHECK(ok.pass);
  LocalizedCheck bad = is_localized(expo, r, {0}, 0.8, L, tau);
  CHECK_FALSE(bad.pass);
  // monotone in m
  CHECK(ok.margin > bad.margin);

  // m = 0 passes for any normalized vector (|phi| <= 1 pointwise)
  std::vector<double> flat(r.size(), 1.0);
  flat = normalized(flat);
  CHECK(is_localized(flat, r, {0}, 0.0, L, tau).pass);

  // sign flip leaves the margin unchanged
  std::vector<double> neg = expo;
  for (double& v : neg) v = -v;
  CHECK(is_localized(neg, r, {0}, 0.3, L, tau).margin == ok.margin);

  std::vector<double> unnorm(r.size(), 0.5);
  CHECK_THROWS_AS(is_localized(unnorm, r, {0}, 0.1, L, tau), std::invalid_argument);
}

TEST_CASE("certify_box rate window") {
  Region r = line(-10, 10);
  BoxSpec box({0.0}, 21);
  EnergyInterval I(0, 2);
  ExponentSet e = small_scale_exps();
  Eigensystem es = single_vector_system(r, 0.0, normalized(std::vector<double>(r.size(), 1.0)));

  // m above the cap 0.5*log(1 + A/4d) = 0.2027: rejected before any pair check
  BoxCertificate hi = certify_box(es, box, I, 0.3, e);
  CHECK_FALSE(hi.pass);
  CHECK(hi.reason == "rate-bounds");
  CHECK(hi.pairs.empty());
  CHECK(hi.m_hi == doctest::Approx(0.5 * std::log(1.5)).epsilon(1e-14));
  CHECK(hi.m_lo == doctest::Approx(std::pow(21.0, -0.55)).epsilon(1e-14));

  // m below L^-kappa'
  BoxCertificate lo = certify_box(es, box, I, 0.05, e);
  CHECK_FALSE(lo.pass);
  CHECK(lo.reason == "rate-bounds");

  // J must share the center and fit inside I
  CHECK_THROWS_AS(certify_box(es, box, I, 0.19, e, EnergyInterval(0.5, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(certify_box(es, box, I, 0.19, e, EnergyInterval(0.0, 3.0)),
                  std::invalid_argument);
}

TEST_CASE("certify_box on decoupled sites") {
  // no hopping: eigenvectors are coordinate vectors, localization is exact
  Region r(1, {{-8}, {0}, {8}});
  DisorderSpec d = DisorderSpec::uniform(-0.5, 0.5);
  PotentialSample v = sample_potential(r, d, 21, 0);
  Eigensystem es = eigensystem(hamiltonian(r, v), r);
  BoxSpec box({0.0}, 21);
  EnergyInterval I(0, 2);
  ExponentSet e = small_scale_exps();
  double m = 0.2;
  REQUIRE(m >= std::pow(21.0, -0.55));
  REQUIRE(m <= 0.5 * std::log(1.5));
  BoxCertificate cert = certify_box(es, box, I, m, e);
  CHECK(cert.pass);
  REQUIRE(cert.pairs.size() == 3);
  for (const auto& pc : cert.pairs) {
    CHECK(pc.pass);
    CHECK(pc.margin == kInf);
    CHECK(pc.h_value > 0);
    CHECK(pc.rate == doctest::Approx(m * pc.h_value));
  }
}

TEST_CASE("certify_box vacuous when the spectrum misses I") {
  Region r = line(-5, 5);
  DisorderSpec d = DisorderSpec::uniform(10, 11);
  Eigensystem es = eigensystem(hamiltonian(r, sample_potential(r, d, 8, 0)), r);
  // Gershgorin: all eigenvalues >= 8, so h_I = 0 and every rate is zero
  EnergyInterval I(0, 2);
  BoxCertificate cert = certify_box(es, BoxSpec({0.0}, 21), I, 0.19, small_scale_exps());
  CHECK(cert.pass);
  for (const auto& pc : cert.pairs) {
    CHECK(pc.h_value == 0.0);
    CHECK(pc.rate == 0.0);
    CHECK(pc.pass);
  }
}

TEST_CASE("certify_box with inner interval J") {
  Region r(1, {{-8}, {0}, {8}});
  PotentialSample v;
  v.region = r;
  v.values = {0.05, 1.5, -0.05};  // middle value outside J below
  Eigensystem es = eigensystem(hamiltonian(r, v), r);
  BoxSpec box({0.0}, 55);
  EnergyInterval I(0, 2);
  EnergyInterval J(0, 1);
  ExponentSet e = small_scale_exps();
  double m = 0.111;
  REQUIRE(m >= std::pow(55.0, -0.55));
  REQUIRE(m <= 0.5 * std::log(1.25));
  BoxCertificate cert = certify_box(es, box, I, m, e, J);
  CHECK(cert.pass);
  // the J-indicator zeroes the rate for the eigenvalue at 1.5
  bool saw_masked = false;
  for (const auto& pc : cert.pairs)
    if (std::abs(pc.value - 1.5) < 1e-9) {
      CHECK(pc.h_value == 0.0);
      saw_masked = true;
    }
  CHECK(saw_masked);
  // the m cap uses J's radius: 0.5*log(1 + 1/4)
  CHECK(cert.m_hi == doctest::Approx(0.5 * std::log(1.25)).epsilon(1e-14));
}

TEST_CASE("max_localizing_m contract") {
  Region r = line(-20, 20);
  BoxSpec box({0.0}, 41);
  EnergyInterval I(0, 2);
  ExponentSet e = small_scale_exps();

  // exponential profile with rate 0.5: passes throughout the window, so the
  // maximizer is the top grid point and one step beyond leaves the window
  std::vector<double> expo(r.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    expo[i] = std::exp(-0.5 * std::abs(r.site(i)[0]));
  Eigensystem es = single_vector_system(r, 0.0, normalized(expo));
  double best = max_localizing_m(es, box, I, e);
  CHECK(best > 0);
  CHECK(certify_box(es, box, I, best, e).pass);
  CHECK_FALSE(certify_box(es, box, I, best + 1e-3, e).pass);

  // flat profile: fails already at the window's lower edge
  Eigensystem flat = single_vector_system(r, 0.0, normalized(std::vector<double>(r.size(), 1.0)));
  CHECK(max_localizing_m(flat, box, I, e) == 0.0);
}

TEST_CASE("spectral separation") {
  double thr = std::exp(-std::pow(2.0, 0.5));
  CHECK(r_separated({0.0, 1.0}, {2.0}, 2.0, 0.5));
  CHECK_FALSE(r_separated({0.0, 1.0}, {1.0 + thr / 2}, 2.0, 0.5));
  CHECK(r_separated({}, {1.0}, 2.0, 0.5));
  CHECK(r_separated({0.0, 1.0}, {1.0 + 2 * thr}, 2.0, 0.5));

  Region a = line(0, 3), b = line(10, 13), c = line(2, 6);
  std::vector<double> sa{0.0}, sb{1e-9}, sc{1e-9};
  // a and b are disjoint with nearly equal spectra: violation reported
  FamilySeparation f1 = family_r_separated({a, b}, {sa, sb}, 2.0, 0.5);
  CHECK_FALSE(f1.pass);
  CHECK(f1.violating_i == 0);
  CHECK(f1.violating_j == 1);
  // a and c overlap: the pair is exempt
  FamilySeparation f2 = family_r_separated({a, c}, {sa, sc}, 2.0, 0.5);
  CHECK(f2.pass);
}

TEST_CASE("buffered subsets on the reference cover") {
  Cover cover = suitable_cover(BoxSpec({0.0}, 10), 4, 0.5);
  ExponentSet e;  // desk-scale set: ell_tau~ = floor(4^0.79) = 2
  e.xi = 0.02;
  e.zeta = 0.1;
  e.beta = 0.15;
  e.gamma = 2.0;
  e.tau = 0.58;
  e.kappa = 0.1;
  e.kappa_prime = 0.1;
  e.varsigma = 0.5;
  REQUIRE(validate(e).pass);

  SUBCASE("empty bad set") { CHECK(build_buffered({}, cover).empty()); }

  SUBCASE("single bad center at the edge") {
    auto subsets = build_buffered({{-3.0}}, cover);
    REQUIRE(subsets.size() == 1);
    const BufferedSubset& bs = subsets[0];
    REQUIRE(bs.padded.size() == 4);  // -3, -1.5, 0, 1.5
    REQUIRE(bs.buffer_centers.size() == 1);
    CHECK(bs.buffer_centers[0][0] == doctest::Approx(3.0));
    CHECK(bs.ups == line(-5, 3));

    BufferedInvariants inv = check_buffered_invariants(bs, cover, e);
    CHECK(inv.connected);
    CHECK(inv.buffers_inside);
    CHECK(inv.boundary_shielded);
    CHECK(inv.pass);
  }

  SUBCASE("two disjoint bad centers merge into one G2 component") {
    auto subsets = build_buffered({{-3.0}, {3.0}}, cover);
    REQUIRE(subsets.size() == 1);
    CHECK(subsets[0].component.size() == 2);
    CHECK(subsets[0].padded.size() == 5);  // the whole cover
    CHECK(subsets[0].buffer_centers.empty());
    CHECK(subsets[0].ups == box_sites(cover.parent));
    CHECK(subsets[0].ups.diameter() <= 6 * 4 * 2);
  }

  SUBCASE("rejects non-disjoint and foreign centers") {
    CHECK_THROWS_AS(build_buffered({{-3.0}, {-1.5}}, cover), std::invalid_argument);
    CHECK_THROWS_AS(build_buffered({{0.7}}, cover), std::invalid_argument);
  }
}

TEST_CASE("verify_outbad exact bound") {
  Region theta = line(-10, 10);
  DisorderSpec d = DisorderSpec::uniform(0, 4);
  PotentialSample v = sample_potential(theta, d, 33, 0);
  Matrix h = hamiltonian(theta, v);
  Eigensystem es = eigensystem(h, theta);
  Region phi = line(3, 8);
  Matrix h_phi(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i)
    for (std::size_t j = 0; j < phi.size(); ++j)
      h_phi.at(i, j) =
          h.at(theta.index_of(phi.site(i)), theta.index_of(phi.site(j)));
  std::vector<double> phi_vals = eigenvalues(h_phi);

  int evaluated = 0;
  for (std::size_t k = 0; k < es.size(); ++k) {
    double lambda = es.values[k];
    double gap = spectral_dist(lambda, phi_vals);
    if (gap <= 0) continue;
    OutbadResult res = verify_outbad(es.vector(k), lambda, phi, theta, gap / 2, h);
    REQUIRE_FALSE(res.skipped);
    CHECK(res.pass);  // the estimate is exact, it must hold for every pair
    ++evaluated;
  }
  CHECK(evaluated > 0);

  // phi = theta: no exterior boundary, instance is skipped
  OutbadResult trivial = verify_outbad(es.vector(0), es.values[0], theta, theta, 0.1, h);
  CHECK(trivial.skipped);
  CHECK(trivial.skip_reason == "empty-exterior-boundary");

  // eta larger than the true gap: hypothesis fails, instance is skipped
  OutbadResult close = verify_outbad(es.vector(0), phi_vals[0], phi, theta, 1e9, h);
  CHECK(close.skipped);
  CHECK(close.skip_reason == "spectral-distance-below-eta");
}

TEST_CASE("decay lemma monitoring gates") {
  Region theta = line(-20, 20);
  DisorderSpec d = DisorderSpec::uniform(0, 4);
  PotentialSample v = sample_potential(theta, d, 77, 2);
  Matrix h = hamiltonian(theta, v);
  Eigensystem es = eigensystem(h, theta);

  BoxSpec box({0.0}, 13);
  Region box_region = box_sites(box);
  Eigensystem es_box =
      eigensystem(hamiltonian(box_region, restrict_potential(v, box_region)), box_region);
  EnergyInterval I(2, 2);
  ExponentSet e = small_scale_exps();

  // an eigenvalue far outside the shrunk interval is gated out
  DecayReport far = verify_decay_lemma(es.vector(0), es.values[0] + 100, box, theta, es_box, I,
                                       0.2, e);
  CHECK(far.skipped);
  REQUIRE_FALSE(far.skip_reasons.empty());
  CHECK(far.skip_reasons[0] == "lambda-outside-shrunk-interval");

  // evaluated pairs produce a finite ratio over a nonempty deep region
  int evaluated = 0;
  for (std::size_t k = 0; k < es.size(); ++k) {
    DecayReport rep = verify_decay_lemma(es.vector(k), es.values[k], box, theta, es_box, I,
                                         0.2, e);
    if (rep.skipped) continue;
    CHECK(rep.n_points > 0);
    CHECK(rep.max_ratio < kInf);
    CHECK(rep.m3 < 0.2);
    CHECK(rep.m3 > 0);
    ++evaluated;
  }
  CHECK(evaluated > 0);
}

TEST_CASE("buffer lemma monitoring gates") {
  Cover cover = suitable_cover(BoxSpec({0.0}, 10), 4, 0.5);
  Region parent = box_sites(cover.parent);
  DisorderSpec d = DisorderSpec::uniform(0, 4);
  PotentialSample v = sample_potential(parent, d, 5, 1);
  Matrix h = hamiltonian(parent, v);
  Eigensystem es = eigensystem(h, parent);

  auto subsets = build_buffered({{-3.0}}, cover);
  REQUIRE(subsets.size() == 1);
  const BufferedSubset& bs = subsets[0];

  std::vector<double> ups_vals =
      eigenvalues(hamiltonian(bs.ups, restrict_potential(v, bs.ups)));
  std::vector<std::vector<double>> buf_vals;
  for (const auto& a : bs.buffer_centers) {
    Region br = box_sites(BoxSpec(a, cover.child_side));
    buf_vals.push_back(eigenvalues(hamiltonian(br, restrict_potential(v, br))));
  }

  EnergyInterval I(2, 2);
  ExponentSet e = small_scale_exps();

  DecayReport far =
      verify_buffer_lemma(es.vector(0), 1e6, bs, cover, parent, ups_vals, buf_vals, I, 0.2, e);
  CHECK(far.skipped);

  // ups covering the whole parent is not a valid monitoring instance
  auto whole = build_buffered({{-3.0}, {3.0}}, cover);
  std::vector<double> whole_vals = eigenvalues(h);
  DecayReport improper = verify_buffer_lemma(es.vector(0), es.values[0], whole[0], cover, parent,
                                             whole_vals, {}, I, 0.2, e);
  CHECK(improper.skipped);

  int evaluated = 0;
  for (std::size_t k = 0; k < es.size(); ++k) {
    DecayReport rep = verify_buffer_lemma(es.vector(k), es.values[k], bs, cover, parent,
                                          ups_vals, buf_vals, I, 0.2, e);
    if (rep.skipped) continue;
    CHECK(rep.n_points == bs.ups.size());
    CHECK(rep.max_ratio < kInf);
    ++evaluated;
  }
  // gating may well exclude every pair at this tiny scale; the call contract
  // (no throws, coherent reports) is what this case pins down
  CHECK(evaluated >= 0);
}
