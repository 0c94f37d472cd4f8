#pragma once

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "emsa/certificates.hpp"
#include "emsa/exponents.hpp"
#include "emsa/geometry.hpp"
#include "emsa/msa.hpp"

// JSON/CSV serialization.  JSON objects carry sorted keys (nlohmann default)
// and CSV floats are printed with 17 significant digits, '.' decimal, no
// locale, so identical runs produce identical bytes.

namespace emsa {

inline std::string format_float(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline void to_json(nlohmann::json& j, const ExponentSet& e) {
  j = nlohmann::json{{"xi", e.xi},
                     {"zeta", e.zeta},
                     {"beta", e.beta},
                     {"gamma", e.gamma},
                     {"tau", e.tau},
                     {"kappa", e.kappa},
                     {"kappa_prime", e.kappa_prime},
                     {"varsigma", e.varsigma},
                     {"zeta_tilde", e.zeta_tilde()},
                     {"tau_tilde", e.tau_tilde()},
                     {"varrho", e.varrho()}};
}

inline void from_json(const nlohmann::json& j, ExponentSet& e) {
  e.xi = j.at("xi").get<double>();
  e.zeta = j.at("zeta").get<double>();
  e.beta = j.at("beta").get<double>();
  e.gamma = j.at("gamma").get<double>();
  e.tau = j.at("tau").get<double>();
  e.kappa = j.at("kappa").get<double>();
  e.kappa_prime = j.at("kappa_prime").get<double>();
  e.varsigma = j.at("varsigma").get<double>();
}

inline void to_json(nlohmann::json& j, const ValidationEntry& v) {
  j = nlohmann::json{
      {"id", v.id}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"pass", v.pass},
      {"informational", v.informational}};
}

inline void to_json(nlohmann::json& j, const ValidationReport& r) {
  j = nlohmann::json{{"entries", r.entries}, {"pass", r.pass}};
}

inline void to_json(nlohmann::json& j, const Region& r) {
  j = nlohmann::json{{"dim", r.dim()}, {"sites", r.sites()}};
}

inline void to_json(nlohmann::json& j, const Cover& c) {
  j = nlohmann::json{{"parent_center", c.parent.center},
                     {"parent_side", c.parent.side},
                     {"child_side", c.child_side},
                     {"varsigma", c.varsigma},
                     {"rho", c.rho},
                     {"k", c.k},
                     {"k_ell", c.k_ell},
                     {"centers", c.centers}};
}

inline void to_json(nlohmann::json& j, const EnergyInterval& I) {
  j = nlohmann::json{{"center", I.center}, {"radius", I.radius}};
}

inline void to_json(nlohmann::json& j, const McReport& r) {
  j = nlohmann::json{{"n_samples", r.n_samples}, {"n_hits", r.n_hits},
                     {"n_skipped", r.n_skipped}, {"empirical_p", r.empirical_p},
                     {"bound_p", r.bound_p},     {"sigma3", r.sigma3}};
}

inline void to_json(nlohmann::json& j, const StepSampleRow& r) {
  j = nlohmann::json{{"n_bad", r.n_bad},
                     {"max_disjoint", r.max_disjoint},
                     {"disjoint_exact", r.disjoint_exact},
                     {"event_bn", r.event_bn},
                     {"n_buffered", r.n_buffered},
                     {"buffer_invariant_violations", r.buffer_invariant_violations},
                     {"family_separated", r.family_separated},
                     {"exhaustive_evaluated", r.exhaustive_evaluated},
                     {"exhaustive_separated", r.exhaustive_separated},
                     {"conclusion", r.conclusion}};
}

inline void to_json(nlohmann::json& j, const StepReport& r) {
  j = nlohmann::json{{"ell", r.ell},
                     {"L", r.L},
                     {"m", r.m},
                     {"M", r.M},
                     {"c_d", r.c_d},
                     {"N", r.N},
                     {"n_centers", r.n_centers},
                     {"n_samples", r.n_samples},
                     {"n_bn", r.n_bn},
                     {"n_family_separated", r.n_family_separated},
                     {"n_conclusion", r.n_conclusion},
                     {"n_bn_and_separated", r.n_bn_and_separated},
                     {"n_all_joint", r.n_all_joint},
                     {"n_conclusion_given_events", r.n_conclusion_given_events},
                     {"n_exhaustive_evaluated", r.n_exhaustive_evaluated},
                     {"n_exhaustive_separated", r.n_exhaustive_separated},
                     {"total_bad", r.total_bad},
                     {"total_buffered", r.total_buffered},
                     {"total_buffer_violations", r.total_buffer_violations},
                     {"rows", r.rows}};
}

inline void to_json(nlohmann::json& j, const RecursionState& s) {
  j = nlohmann::json{{"k", s.k}, {"L", s.L}, {"A", s.A}, {"m", s.m}};
}

inline void to_json(nlohmann::json& j, const RecursionResult& r) {
  j = nlohmann::json{{"states", r.states},
                     {"A_inf", r.A_inf},
                     {"m_inf", r.m_inf},
                     {"a_tail_bound", r.a_tail_bound},
                     {"m_tail_bound", r.m_tail_bound},
                     {"sandwich_lower", r.sandwich_lower},
                     {"sandwich_upper", r.sandwich_upper},
                     {"overflowed", r.overflowed}};
}

// DisorderSpec config: {"family":"uniform","a":0,"b":1},
// {"family":"power","alpha":0.5,"scale":1}, or
// {"family":"table","values":[...],"cdf":[...],"alpha":a,"K":k}.
inline DisorderSpec disorder_from_json(const nlohmann::json& j) {
  std::string family = j.at("family").get<std::string>();
  if (family == "uniform")
    return DisorderSpec::uniform(j.at("a").get<double>(), j.at("b").get<double>());
  if (family == "power")
    return DisorderSpec::power_alpha(j.at("alpha").get<double>(), j.at("scale").get<double>());
  if (family == "table")
    return DisorderSpec::table_cdf(j.at("values").get<std::vector<double>>(),
                                   j.at("cdf").get<std::vector<double>>(),
                                   j.at("alpha").get<double>(), j.at("K").get<double>());
  throw std::invalid_argument("disorder: unknown family '" + family + "'");
}

inline nlohmann::json disorder_to_json(const DisorderSpec& d) {
  switch (d.family()) {
    case DisorderSpec::Family::Uniform:
      return {{"family", "uniform"}, {"a", d.support_lo()}, {"b", d.support_hi()}};
    case DisorderSpec::Family::PowerAlpha:
      return {{"family", "power"}, {"alpha", d.alpha()}, {"scale", d.support_hi()}};
    case DisorderSpec::Family::TableCdf:
      return {{"family", "table"},
              {"values", d.table_values()},
              {"cdf", d.table_cdf_points()},
              {"alpha", d.alpha()},
              {"K", d.holder_k()}};
  }
  return {};
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("csv: cannot open " + path);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace emsa
