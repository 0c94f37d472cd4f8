#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Exponent schedule for the multiscale analysis.  The schedule consists of
// eight free exponents (xi, zeta, beta, gamma, tau, kappa, kappa', varsigma)
// constrained by a chain of inequalities, plus three derived quantities
// (zeta~, tau~, varrho).

namespace emsa {

struct ExponentSet {
  double xi = 0;
  double zeta = 0;
  double beta = 0;
  double gamma = 0;
  double tau = 0;
  double kappa = 0;
  double kappa_prime = 0;
  double varsigma = 0;

  double zeta_tilde() const { return (zeta + beta) / 2; }
  double tau_tilde() const { return (1 + tau) / 2; }
  // varrho = min{ kappa, (1-tau)/2, gamma*tau - (gamma-1)*zeta~ - 1 }
  double varrho() const {
    double third = gamma * tau - (gamma - 1) * zeta_tilde() - 1;
    return std::min({kappa, (1 - tau) / 2, third});
  }
  // Lower bound of the admissible tau interval.
  double tau_lower() const {
    return std::max(gamma * beta, ((gamma - 1) * beta + 1) / gamma);
  }
};

struct ValidationEntry {
  std::string id;
  double lhs = 0;
  double rhs = 0;
  bool pass = false;
  bool informational = false;  // reported but not counted toward overall pass
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  bool pass = true;

  const ValidationEntry* find(const std::string& id) const {
    for (const auto& e : entries)
      if (e.id == id) return &e;
    return nullptr;
  }
};

// One entry per independent inequality of the exponent chain.  Compound
// relations that follow algebraically from these (e.g. the expanded chain
// xi*gamma^2 < zeta < beta < tau/gamma, or (gamma-1)*zeta~+1 < gamma*tau)
// are not duplicated as separate rows, so that a single violated constraint
// flips a single row.
inline ValidationReport validate(const ExponentSet& e) {
  ValidationReport r;
  auto row = [&](const std::string& id, double lhs, double rhs, bool strict = true,
                 bool info = false) {
    bool ok = strict ? (lhs < rhs) : (lhs <= rhs);
    r.entries.push_back({id, lhs, rhs, ok, info});
    if (!ok && !info) r.pass = false;
  };
  double rho = e.varrho();
  row("xi-positive", 0.0, e.xi);
  row("xi-lt-zeta", e.xi, e.zeta);
  row("zeta-lt-beta", e.zeta, e.beta);
  row("beta-lt-inv-gamma", e.beta, 1 / e.gamma);
  row("gamma-gt-one", 1.0, e.gamma);
  row("gamma-sq", e.xi * e.gamma * e.gamma, e.zeta);  // gamma < sqrt(zeta/xi)
  row("tau-gt-lower", e.tau_lower(), e.tau);
  row("tau-lt-one", e.tau, 1.0);
  row("kappa-positive", 0.0, e.kappa);
  row("kappa-lt-one", e.kappa, 1.0);
  row("kappa-prime-nonneg", 0.0, e.kappa_prime, /*strict=*/false);
  row("kappa-prime-lt-one", e.kappa_prime, 1.0);
  row("kappa-sum", e.kappa + e.kappa_prime, e.tau - e.gamma * e.beta);
  row("varrho-positive", 0.0, rho);
  row("varsigma-positive", 0.0, e.varsigma);
  row("varsigma-le-bound", e.varsigma, 1 - rho, /*strict=*/false);
  // Asserted by the source chain but not enforced here; kappa may exceed
  // varrho when (1-tau)/2 or the third argument is the binding one.
  row("kappa-le-varrho", e.kappa, rho, /*strict=*/false, /*info=*/true);
  return r;
}

struct ExponentOverrides {
  std::optional<double> gamma, beta, tau, kappa, kappa_prime, varsigma;
};

// Construct a schedule from (xi, zeta) by midpoint/quarter-margin defaults.
// varsigma defaults to min(1 - varrho, 1/2): any value in (0, 1-varrho] is
// admissible, and a small varsigma keeps cover spacing workable at the box
// sides this code actually runs at.
inline ExponentSet derive(double xi, double zeta, const ExponentOverrides& ov = {}) {
  if (!(xi > 0)) throw std::invalid_argument("derive: xi must be positive");
  if (!(xi < zeta)) throw std::invalid_argument("derive: xi < zeta violated");
  if (!(zeta < 1)) throw std::invalid_argument("derive: zeta < 1 violated");

  ExponentSet e;
  e.xi = xi;
  e.zeta = zeta;
  double s = std::sqrt(zeta / xi);
  e.gamma = ov.gamma.value_or((1 + s) / 2);
  if (!(e.gamma > 1 && e.gamma < s))
    throw std::invalid_argument("derive: gamma not in (1, sqrt(zeta/xi))");
  if (!(zeta < 1 / e.gamma))
    throw std::invalid_argument("derive: zeta < 1/gamma violated (beta interval empty)");
  e.beta = ov.beta.value_or((zeta + 1 / e.gamma) / 2);
  double lo = e.tau_lower();
  if (!(lo < 1)) throw std::invalid_argument("derive: tau interval empty");
  e.tau = ov.tau.value_or((lo + 1) / 2);
  double margin = e.tau - e.gamma * e.beta;
  if (!(margin > 0)) throw std::invalid_argument("derive: tau <= gamma*beta");
  e.kappa = ov.kappa.value_or(margin / 4);
  e.kappa_prime = ov.kappa_prime.value_or(margin / 4);
  double rho = e.varrho();
  if (!(rho > 0)) throw std::invalid_argument("derive: varrho <= 0");
  e.varsigma = ov.varsigma.value_or(std::min(1 - rho, 0.5));

  ValidationReport check = validate(e);
  if (!check.pass) {
    for (const auto& entry : check.entries)
      if (!entry.pass && !entry.informational)
        throw std::invalid_argument("derive: constraint " + entry.id + " violated");
  }
  return e;
}

// L_k = L0^(gamma^k) for k = 0..kmax, stopping early past 1e300.
struct ScaleSequence {
  std::vector<double> scales;
  bool overflowed = false;
};

inline ScaleSequence scale_sequence(double L0, double gamma, int kmax) {
  if (!(L0 > 1)) throw std::invalid_argument("scale_sequence: L0 must be > 1");
  if (!(gamma > 1)) throw std::invalid_argument("scale_sequence: gamma must be > 1");
  ScaleSequence out;
  double g = 1;
  for (int k = 0; k <= kmax; ++k) {
    double L = std::pow(L0, g);
    if (L > 1e300) {
      out.overflowed = true;
      break;
    }
    out.scales.push_back(L);
    g *= gamma;
  }
  return out;
}

// floor(L^p); notation L_tau in the decay definitions.
inline long long floor_pow(double L, double p) {
  if (!(L >= 1)) throw std::invalid_argument("floor_pow: L must be >= 1");
  return static_cast<long long>(std::floor(std::pow(L, p)));
}

}  // namespace emsa
