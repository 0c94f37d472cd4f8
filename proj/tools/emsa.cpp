// Batch experiment front end: JSON config plus flags (flags take precedence),
// JSON report and CSV table outputs, deterministic for fixed (config, seed).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emsa/certificates.hpp"
#include "emsa/exponents.hpp"
#include "emsa/geometry.hpp"
#include "emsa/msa.hpp"
#include "emsa/parallel.hpp"
#include "emsa/serialize.hpp"
#include "emsa/spectral.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 1;
  std::uint64_t samples = 1000;
  int threads = emsa::default_threads();

  CLI::Option* seed_opt = nullptr;
  CLI::Option* samples_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file; flags override config values");
    cmd->add_option("--out", out, "output path prefix; writes <out>.json and <out>.csv");
    seed_opt = cmd->add_option("--seed", seed, "RNG seed");
    samples_opt = cmd->add_option("--samples", samples, "Monte Carlo sample count");
    threads_opt = cmd->add_option("--threads", threads, "worker thread count");
  }

  json load_config() const {
    if (config_path.empty()) return json::object();
    std::ifstream in(config_path);
    if (!in) throw std::invalid_argument("config: cannot open " + config_path);
    json j;
    in >> j;
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    return j;
  }

  void merge(const json& cfg) {
    if (seed_opt->count() == 0 && cfg.contains("seed")) seed = cfg.at("seed").get<std::uint64_t>();
    if (samples_opt->count() == 0 && cfg.contains("samples"))
      samples = cfg.at("samples").get<std::uint64_t>();
    if (threads_opt->count() == 0 && cfg.contains("threads"))
      threads = cfg.at("threads").get<int>();
  }
};

// Scalar option with config fallback under the same key.
template <typename T>
struct CfgValue {
  T value{};
  CLI::Option* opt = nullptr;
  std::string key;

  void merge(const json& cfg) {
    if (opt->count() == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
  }
};

// Binds in place: CLI11 keeps a pointer to v.value, so v must already live at
// its final address.
template <typename T>
void add_cfg(CLI::App* cmd, CfgValue<T>& v, const std::string& flag, const std::string& key,
             T def, const std::string& desc) {
  v.value = def;
  v.key = key;
  v.opt = cmd->add_option(flag, v.value, desc);
}

struct DisorderOpts {
  CfgValue<std::string> family;
  CfgValue<double> a, b, alpha, scale;

  void attach(CLI::App* cmd) {
    add_cfg<std::string>(cmd, family, "--family", "family", "uniform",
                         "disorder family: uniform | power");
    add_cfg(cmd, a, "--a", "a", 0.0, "uniform support lower end");
    add_cfg(cmd, b, "--b", "b", 1.0, "uniform support upper end");
    add_cfg(cmd, alpha, "--alpha", "alpha", 1.0, "power family Holder order");
    add_cfg(cmd, scale, "--scale", "scale", 1.0, "power family support scale");
  }

  emsa::DisorderSpec build(const json& cfg) {
    json dj = cfg.contains("disorder") ? cfg.at("disorder") : json::object();
    family.merge(dj);
    a.merge(dj);
    b.merge(dj);
    alpha.merge(dj);
    scale.merge(dj);
    if (dj.contains("family") && dj.at("family") == "table" && family.opt->count() == 0)
      return emsa::disorder_from_json(dj);
    if (family.value == "uniform") return emsa::DisorderSpec::uniform(a.value, b.value);
    if (family.value == "power")
      return emsa::DisorderSpec::power_alpha(alpha.value, scale.value);
    throw std::invalid_argument("disorder: unknown family '" + family.value + "'");
  }
};

struct ExponentOpts {
  CfgValue<double> xi, zeta;
  CfgValue<double> gamma, beta, tau, kappa, kappa_prime, varsigma;

  void attach(CLI::App* cmd) {
    add_cfg(cmd, xi, "--xi", "xi", 0.1, "exponent xi");
    add_cfg(cmd, zeta, "--zeta", "zeta", 0.2, "exponent zeta");
    add_cfg(cmd, gamma, "--gamma", "gamma", 0.0, "override gamma");
    add_cfg(cmd, beta, "--beta", "beta", 0.0, "override beta");
    add_cfg(cmd, tau, "--tau", "tau", 0.0, "override tau");
    add_cfg(cmd, kappa, "--kappa", "kappa", 0.0, "override kappa");
    add_cfg(cmd, kappa_prime, "--kappa-prime", "kappa_prime", 0.0, "override kappa'");
    add_cfg(cmd, varsigma, "--varsigma", "varsigma", 0.0, "override varsigma");
  }

  emsa::ExponentSet build(const json& cfg) {
    json ej = cfg.contains("exponents") ? cfg.at("exponents") : json::object();
    xi.merge(ej);
    zeta.merge(ej);
    emsa::ExponentOverrides ov;
    auto pick = [&](CfgValue<double>& v) -> std::optional<double> {
      v.merge(ej);
      if (v.opt->count() > 0 || ej.contains(v.key)) return v.value;
      return std::nullopt;
    };
    ov.gamma = pick(gamma);
    ov.beta = pick(beta);
    ov.tau = pick(tau);
    ov.kappa = pick(kappa);
    ov.kappa_prime = pick(kappa_prime);
    ov.varsigma = pick(varsigma);
    return emsa::derive(xi.value, zeta.value, ov);
  }
};

void emit(const json& report, const std::string& out) {
  if (out.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream f(out + ".json");
    if (!f) throw std::runtime_error("cannot open " + out + ".json");
    f << report.dump(2) << "\n";
  }
}

void emit_csv(const std::string& out, const std::vector<std::vector<std::string>>& rows) {
  if (out.empty()) return;
  emsa::CsvWriter csv(out + ".csv");
  for (const auto& r : rows) csv.row(r);
}

std::string fmt(double v) { return emsa::format_float(v); }

int run(int argc, char** argv) {
  CLI::App app{"Anderson-model localization experiments"};
  app.require_subcommand(1);

  // exponents
  auto* cmd_exp = app.add_subcommand("exponents", "derive and validate an exponent schedule");
  CommonOpts exp_common;
  exp_common.attach(cmd_exp);
  ExponentOpts exp_exps;
  exp_exps.attach(cmd_exp);

  // spectrum
  auto* cmd_spec = app.add_subcommand("spectrum", "eigenvalues of one sampled box Hamiltonian");
  CommonOpts spec_common;
  spec_common.attach(cmd_spec);
  DisorderOpts spec_dis;
  spec_dis.attach(cmd_spec);
  CfgValue<int> spec_dim;
  add_cfg(cmd_spec, spec_dim, "--dim", "dim", int(1), "lattice dimension");
  CfgValue<double> spec_l;
  add_cfg(cmd_spec, spec_l, "--L", "L", double(20.0), "box side");
  CfgValue<std::uint64_t> spec_index;
  add_cfg(cmd_spec, spec_index, "--index", "index", std::uint64_t(0), "sample index");

  // wegner
  auto* cmd_weg = app.add_subcommand("wegner", "Monte Carlo spectral-proximity estimate");
  CommonOpts weg_common;
  weg_common.attach(cmd_weg);
  DisorderOpts weg_dis;
  weg_dis.attach(cmd_weg);
  CfgValue<int> weg_dim;
  add_cfg(cmd_weg, weg_dim, "--dim", "dim", int(1), "lattice dimension");
  CfgValue<double> weg_l;
  add_cfg(cmd_weg, weg_l, "--L", "L", double(49.0), "box side");
  CfgValue<double> weg_e;
  add_cfg(cmd_weg, weg_e, "--E", "E", double(0.5), "target energy");
  CfgValue<double> weg_eta;
  add_cfg(cmd_weg, weg_eta, "--eta", "eta", double(1e-3), "spectral proximity eta");

  // localize
  auto* cmd_loc = app.add_subcommand("localize", "Monte Carlo localizing-box probability");
  CommonOpts loc_common;
  loc_common.attach(cmd_loc);
  DisorderOpts loc_dis;
  loc_dis.attach(cmd_loc);
  ExponentOpts loc_exps;
  loc_exps.attach(cmd_loc);
  CfgValue<int> loc_dim;
  add_cfg(cmd_loc, loc_dim, "--dim", "dim", int(1), "lattice dimension");
  CfgValue<double> loc_l;
  add_cfg(cmd_loc, loc_l, "--L", "L", double(64.0), "box side");
  CfgValue<double> loc_e;
  add_cfg(cmd_loc, loc_e, "--E", "E", double(0.0), "interval center");
  CfgValue<double> loc_a;
  add_cfg(cmd_loc, loc_a, "--A", "A", double(1.0), "interval radius");
  CfgValue<double> loc_b2;
  add_cfg(cmd_loc, loc_b2, "--B", "B", double(0.0), "inner interval radius (0 = none)");
  CfgValue<double> loc_m;
  add_cfg(cmd_loc, loc_m, "--m", "m", double(0.1), "decay rate m");

  // msa-step
  auto* cmd_step = app.add_subcommand("msa-step", "one scale-induction experiment");
  CommonOpts step_common;
  step_common.attach(cmd_step);
  DisorderOpts step_dis;
  step_dis.attach(cmd_step);
  ExponentOpts step_exps;
  step_exps.attach(cmd_step);
  CfgValue<int> step_dim;
  add_cfg(cmd_step, step_dim, "--dim", "dim", int(1), "lattice dimension");
  CfgValue<double> step_ell;
  add_cfg(cmd_step, step_ell, "--ell", "ell", double(20.0), "input scale ell");
  CfgValue<double> step_e;
  add_cfg(cmd_step, step_e, "--E", "E", double(0.0), "interval center");
  CfgValue<double> step_a;
  add_cfg(cmd_step, step_a, "--A", "A", double(1.0), "interval radius");
  CfgValue<double> step_m;
  add_cfg(cmd_step, step_m, "--m", "m", double(0.1), "input decay rate m");
  CfgValue<double> step_cd;
  add_cfg(cmd_step, step_cd, "--Cd", "Cd", double(1.0), "decay degradation constant C_d");

  // recursion
  auto* cmd_rec = app.add_subcommand("recursion", "scale recursion for A_k and m_k");
  CommonOpts rec_common;
  rec_common.attach(cmd_rec);
  ExponentOpts rec_exps;
  rec_exps.attach(cmd_rec);
  CfgValue<int> rec_dim;
  add_cfg(cmd_rec, rec_dim, "--dim", "dim", int(1), "lattice dimension");
  CfgValue<double> rec_l0;
  add_cfg(cmd_rec, rec_l0, "--L0", "L0", double(10.0), "initial scale");
  CfgValue<double> rec_a0;
  add_cfg(cmd_rec, rec_a0, "--A0", "A0", double(1.0), "initial interval radius");
  CfgValue<double> rec_m0;
  add_cfg(cmd_rec, rec_m0, "--m0", "m0", double(0.1), "initial decay rate");
  CfgValue<double> rec_cd;
  add_cfg(cmd_rec, rec_cd, "--Cd", "Cd", double(1.0), "decay degradation constant C_d");
  CfgValue<int> rec_kmax;
  add_cfg(cmd_rec, rec_kmax, "--kmax", "kmax", int(8), "number of recursion steps");
  CfgValue<double> rec_tol;
  add_cfg(cmd_rec, rec_tol, "--tol", "tol", double(1e-12), "product truncation tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (cmd_exp->parsed()) {
    json cfg = exp_common.load_config();
    exp_common.merge(cfg);
    emsa::ExponentSet e = exp_exps.build(cfg);
    emsa::ValidationReport rep = emsa::validate(e);
    json out{{"exponents", e}, {"validation", rep}};
    emit(out, exp_common.out);
    std::vector<std::vector<std::string>> rows{{"id", "lhs", "rhs", "pass", "informational"}};
    for (const auto& en : rep.entries)
      rows.push_back({en.id, fmt(en.lhs), fmt(en.rhs), en.pass ? "1" : "0",
                      en.informational ? "1" : "0"});
    emit_csv(exp_common.out, rows);
    return 0;
  }

  if (cmd_spec->parsed()) {
    json cfg = spec_common.load_config();
    spec_common.merge(cfg);
    spec_dim.merge(cfg);
    spec_l.merge(cfg);
    spec_index.merge(cfg);
    emsa::DisorderSpec d = spec_dis.build(cfg);
    emsa::BoxSpec box(std::vector<double>(spec_dim.value, 0.0), spec_l.value);
    emsa::Region region = emsa::box_sites(box);
    emsa::PotentialSample v =
        emsa::sample_potential(region, d, spec_common.seed, spec_index.value);
    std::vector<double> vals = emsa::eigenvalues(emsa::hamiltonian(region, v));
    json out{{"dim", spec_dim.value},      {"L", spec_l.value},
             {"seed", spec_common.seed},   {"index", spec_index.value},
             {"disorder", emsa::disorder_to_json(d)}, {"n_sites", region.size()},
             {"values", vals}};
    emit(out, spec_common.out);
    std::vector<std::vector<std::string>> rows{{"index", "value"}};
    for (std::size_t i = 0; i < vals.size(); ++i) rows.push_back({std::to_string(i), fmt(vals[i])});
    emit_csv(spec_common.out, rows);
    return 0;
  }

  if (cmd_weg->parsed()) {
    json cfg = weg_common.load_config();
    weg_common.merge(cfg);
    weg_dim.merge(cfg);
    weg_l.merge(cfg);
    weg_e.merge(cfg);
    weg_eta.merge(cfg);
    emsa::DisorderSpec d = weg_dis.build(cfg);
    emsa::Region region =
        emsa::box_sites(emsa::BoxSpec(std::vector<double>(weg_dim.value, 0.0), weg_l.value));
    emsa::McReport rep = emsa::wegner_mc(region, weg_e.value, weg_eta.value, d,
                                         weg_common.samples, weg_common.seed, weg_common.threads);
    json out{{"dim", weg_dim.value}, {"L", weg_l.value},     {"E", weg_e.value},
             {"eta", weg_eta.value}, {"seed", weg_common.seed},
             {"disorder", emsa::disorder_to_json(d)}, {"report", rep}};
    emit(out, weg_common.out);
    emit_csv(weg_common.out,
             {{"n_samples", "n_hits", "empirical_p", "bound_p", "sigma3"},
              {std::to_string(rep.n_samples), std::to_string(rep.n_hits), fmt(rep.empirical_p),
               fmt(rep.bound_p), fmt(rep.sigma3)}});
    return 0;
  }

  if (cmd_loc->parsed()) {
    json cfg = loc_common.load_config();
    loc_common.merge(cfg);
    loc_dim.merge(cfg);
    loc_l.merge(cfg);
    loc_e.merge(cfg);
    loc_a.merge(cfg);
    loc_b2.merge(cfg);
    loc_m.merge(cfg);
    emsa::DisorderSpec d = loc_dis.build(cfg);
    emsa::ExponentSet exps = loc_exps.build(cfg);
    emsa::EnergyInterval I(loc_e.value, loc_a.value);
    std::optional<emsa::EnergyInterval> J;
    if (loc_b2.value > 0) J = emsa::EnergyInterval(loc_e.value, loc_b2.value);
    emsa::BoxSpec box(std::vector<double>(loc_dim.value, 0.0), loc_l.value);
    emsa::McReport rep = emsa::p_localizing_mc(box, I, loc_m.value, exps, d, loc_common.samples,
                                               loc_common.seed, loc_common.threads, J);
    json out{{"dim", loc_dim.value}, {"L", loc_l.value},  {"interval", I},
             {"m", loc_m.value},     {"exponents", exps}, {"seed", loc_common.seed},
             {"disorder", emsa::disorder_to_json(d)}, {"report", rep}};
    if (J) out["inner_interval"] = *J;
    emit(out, loc_common.out);
    emit_csv(loc_common.out,
             {{"n_samples", "n_hits", "empirical_p", "bound_p", "sigma3"},
              {std::to_string(rep.n_samples), std::to_string(rep.n_hits), fmt(rep.empirical_p),
               fmt(rep.bound_p), fmt(rep.sigma3)}});
    return 0;
  }

  if (cmd_step->parsed()) {
    json cfg = step_common.load_config();
    step_common.merge(cfg);
    step_dim.merge(cfg);
    step_ell.merge(cfg);
    step_e.merge(cfg);
    step_a.merge(cfg);
    step_m.merge(cfg);
    step_cd.merge(cfg);
    emsa::DisorderSpec d = step_dis.build(cfg);
    emsa::ExponentSet exps = step_exps.build(cfg);
    emsa::EnergyInterval I(step_e.value, step_a.value);
    emsa::StepReport rep =
        emsa::induction_step(step_ell.value, step_dim.value, I, step_m.value, exps, d,
                             step_common.samples, step_common.seed, step_common.threads,
                             step_cd.value);
    json out{{"interval", I},      {"exponents", exps}, {"seed", step_common.seed},
             {"disorder", emsa::disorder_to_json(d)}, {"report", rep}};
    emit(out, step_common.out);
    std::vector<std::vector<std::string>> rows{
        {"sample", "n_bad", "max_disjoint", "event_bn", "n_buffered",
         "buffer_invariant_violations", "family_separated", "conclusion"}};
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const auto& r = rep.rows[i];
      rows.push_back({std::to_string(i), std::to_string(r.n_bad),
                      std::to_string(r.max_disjoint), r.event_bn ? "1" : "0",
                      std::to_string(r.n_buffered),
                      std::to_string(r.buffer_invariant_violations),
                      r.family_separated ? "1" : "0", r.conclusion ? "1" : "0"});
    }
    emit_csv(step_common.out, rows);
    return 0;
  }

  if (cmd_rec->parsed()) {
    json cfg = rec_common.load_config();
    rec_common.merge(cfg);
    rec_dim.merge(cfg);
    rec_l0.merge(cfg);
    rec_a0.merge(cfg);
    rec_m0.merge(cfg);
    rec_cd.merge(cfg);
    rec_kmax.merge(cfg);
    rec_tol.merge(cfg);
    emsa::ExponentSet exps = rec_exps.build(cfg);
    emsa::RecursionResult rep =
        emsa::recursion(rec_l0.value, rec_a0.value, rec_m0.value, rec_dim.value, exps,
                        rec_cd.value, rec_kmax.value, rec_tol.value);
    json out{{"L0", rec_l0.value}, {"A0", rec_a0.value}, {"m0", rec_m0.value},
             {"Cd", rec_cd.value}, {"exponents", exps},  {"result", rep}};
    emit(out, rec_common.out);
    std::vector<std::vector<std::string>> rows{{"k", "L", "A", "m"}};
    for (const auto& s : rep.states)
      rows.push_back({std::to_string(s.k), fmt(s.L), fmt(s.A), fmt(s.m)});
    emit_csv(rec_common.out, rows);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
