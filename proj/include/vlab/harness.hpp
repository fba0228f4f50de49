// Copyright 2026 The vlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Run configuration, experiment suites, constant tables and the b.a.u.
// convergence probe.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vlab/cz.hpp"
#include "vlab/kernel_bounds.hpp"
#include "vlab/random.hpp"
#include "vlab/serialize.hpp"
#include "vlab/sunouchi.hpp"
#include "vlab/transference.hpp"

namespace vlab {

/// Raised when a run would exceed the configured size budget.
class BudgetError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct RunConfig {
  std::string radix = "2";
  int depth = 3;
  Index fiber_dim = 2;
  std::string system = "vilenkin-characters";
  int lambda_count = 8;
  double lambda_span = std::pow(2.0, 3.5);
  /// "default" for n_k = M_{k-1}, or a comma list of increasing integers.
  std::string lacunary = "default";
  int trials = 10;
  std::uint64_t seed = 1;
  std::string out = "vlab-out";
  std::uint64_t budget = 8192;

  /// The radix list extended or truncated to the configured depth.
  RadixSequence radix_sequence() const { return RadixSequence::parse(radix).extended(depth); }
  RadixSequence radix_at(int n) const { return RadixSequence::parse(radix).extended(n); }

  /// Rough memory of one depth-N run: kernel tables plus working fields.
  static double memory_estimate_bytes(std::uint64_t M, Index d, int N) {
    const double m = static_cast<double>(M);
    return 16.0 * m * m * (N + 2) + 16.0 * m * static_cast<double>(d * d) * (4.0 * N + 8.0);
  }

  void validate() const {
    if (depth < 1) throw PreconditionError("config: depth must be >= 1");
    if (fiber_dim < 1) throw PreconditionError("config: fiber_dim must be >= 1");
    if (trials < 1) throw PreconditionError("config: trials must be >= 1");
    if (lambda_count < 1) throw PreconditionError("config: lambda_count must be >= 1");
    if (!(lambda_span >= 1.0)) throw PreconditionError("config: lambda_span must be >= 1");
    bool known = false;
    for (const auto& n : system_names()) known = known || n == system;
    if (!known && system != "vilenkin") throw PreconditionError("config: unknown system '" + system + "'");
    const RadixSequence R = radix_sequence();
    const std::uint64_t M = R.size();
    const double load = static_cast<double>(M) * static_cast<double>(fiber_dim);
    if (load > static_cast<double>(budget)) {
      throw BudgetError("budget exceeded: M_N * d = " + std::to_string(M) + " * " + std::to_string(fiber_dim) +
                        " = " + format_real(load) + " > " + std::to_string(budget) + "; estimated memory " +
                        format_real(memory_estimate_bytes(M, fiber_dim, depth) / 1048576.0) + " MiB");
    }
  }
};

/// Sets one configuration field from its text form.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  auto as_int = [&]() {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw PreconditionError("config: '" + key + "' expects an integer");
    return v;
  };
  try {
    if (key == "radix") c.radix = value;
    else if (key == "depth") c.depth = static_cast<int>(as_int());
    else if (key == "fiber_dim" || key == "fiber-dim") c.fiber_dim = static_cast<Index>(as_int());
    else if (key == "system") c.system = value;
    else if (key == "lambda_count") c.lambda_count = static_cast<int>(as_int());
    else if (key == "lambda_span") c.lambda_span = std::stod(value);
    else if (key == "lacunary") c.lacunary = value;
    else if (key == "trials") c.trials = static_cast<int>(as_int());
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(as_int());
    else if (key == "out") c.out = value;
    else if (key == "budget") c.budget = static_cast<std::uint64_t>(as_int());
    else throw PreconditionError("config: unknown key '" + key + "'");
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const PreconditionError*>(&e)) throw;
    throw PreconditionError("config: bad value '" + value + "' for '" + key + "'");
  }
}

/// Flat "key = value" lines; '#' starts a comment.
inline void load_config(std::istream& is, RunConfig& c) {
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw PreconditionError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void load_config_file(const std::string& path, RunConfig& c) {
  std::ifstream is(path);
  if (!is) throw PreconditionError("cannot open config file '" + path + "'");
  load_config(is, c);
}

/// Fitted constants of one claim at depths N and N+1.
struct ConstantRow {
  std::string claim;
  double c_n = 0.0;
  double c_n1 = 0.0;
  std::size_t trials = 0;
  std::uint64_t worst_seed = 0;

  double ratio() const {
    const double hi = std::max(c_n, c_n1), lo = std::min(c_n, c_n1);
    if (hi == 0.0) return 1.0;
    return lo > 0.0 ? hi / lo : INFINITY;
  }
  bool stable() const { return ratio() <= 2.0; }

  static std::string csv_header() { return "claim,c_depth_n,c_depth_n1,stability_ratio,stable,trials,worst_seed"; }
  std::string csv_row() const {
    return BoundReport::quote(claim) + ',' + format_real(c_n) + ',' + format_real(c_n1) + ',' +
           format_real(ratio()) + ',' + (stable() ? "yes" : "no") + ',' + std::to_string(trials) + ',' +
           std::to_string(worst_seed);
  }
};

/// Running maxima per claim; slot 0 is depth N, slot 1 depth N+1.
class ConstantTable {
 public:
  void add(const std::string& claim, int slot, double value, std::uint64_t seed) {
    auto it = index_.find(claim);
    if (it == index_.end()) {
      index_[claim] = rows_.size();
      rows_.push_back({claim, 0.0, 0.0, 0, seed});
      it = index_.find(claim);
    }
    ConstantRow& r = rows_[it->second];
    double& slot_value = slot == 0 ? r.c_n : r.c_n1;
    if (value > slot_value || (!std::isfinite(value) && std::isfinite(slot_value))) {
      slot_value = value;
      if (value >= std::max(r.c_n, r.c_n1)) r.worst_seed = seed;
    }
    if (slot == 0) ++r.trials;
  }
  void merge(const ConstantTable& o) {
    for (const auto& r : o.rows_) {
      index_[r.claim] = rows_.size();
      rows_.push_back(r);
    }
  }
  const std::vector<ConstantRow>& rows() const { return rows_; }
  const ConstantRow* find(const std::string& claim) const {
    auto it = index_.find(claim);
    return it == index_.end() ? nullptr : &rows_[it->second];
  }
  void write_csv(std::ostream& os) const {
    os << ConstantRow::csv_header() << '\n';
    for (const auto& r : rows_) os << r.csv_row() << '\n';
  }

 private:
  std::vector<ConstantRow> rows_;
  std::map<std::string, std::size_t> index_;
};

struct SuiteResult {
  std::string suite;
  bool passed = true;
  std::vector<std::string> failures;
  std::vector<std::string> files;
  ConstantTable constants;

  void fail(const std::string& msg) {
    passed = false;
    failures.push_back(msg);
  }
};

namespace detail {

class ReportWriter {
 public:
  ReportWriter(const RunConfig& cfg, SuiteResult& res) : dir_(cfg.out), res_(res) {
    std::filesystem::create_directories(dir_);
  }
  std::ofstream open(const std::string& name) {
    const auto path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PreconditionError("cannot write '" + path.string() + "'");
    os.imbue(std::locale::classic());
    res_.files.push_back(path.string());
    return os;
  }
  void json(const std::string& name, const Json& j) { open(name) << j.dump(2) << '\n'; }

 private:
  std::filesystem::path dir_;
  SuiteResult& res_;
};

inline std::string csv_join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + BoundReport::quote(cells[i]);
  return out;
}

inline std::string fr(double v) { return format_real(v); }

/// The configured system at a depth, validated; failure aborts the suite.
inline std::optional<VilenkinLikeSystem> system_at(const RunConfig& cfg, int depth, SuiteResult& res) {
  auto sys = make_system(cfg.system, cfg.radix_at(depth));
  const auto rep = validate_system(sys);
  if (!rep.passed) {
    res.fail(rep.message);
    return std::nullopt;
  }
  sys.delta_max = rep.delta_max;
  return sys;
}

inline std::vector<double> wide_lambda_grid(const OperatorField& f, int count) {
  const double l1 = norm(f, NormSpec::lp(1.0));
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(l1 * std::ldexp(1.0, i - 3));
  return g;
}

inline std::vector<LacunarySelection> selections(const RunConfig& cfg, const RadixSequence& R) {
  if (cfg.lacunary == "default") return {LacunarySelection::standard(R)};
  std::vector<std::uint64_t> seq;
  std::stringstream ss(cfg.lacunary);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const long long v = std::stoll(tok);
    if (v < 0) throw PreconditionError("lacunary: negative term");
    if (static_cast<std::uint64_t>(v) < R.size()) seq.push_back(static_cast<std::uint64_t>(v));
  }
  return split_lacunary(seq, R);
}

}  // namespace detail

/// Assumption checks of the configured system at depth N.
inline SuiteResult run_validate_system(const RunConfig& cfg) {
  SuiteResult res{"validate-system"};
  detail::ReportWriter w(cfg, res);
  const RadixSequence R = cfg.radix_sequence();
  const auto rep = validate_system(make_system(cfg.system, R));
  auto os = w.open("validate_system.csv");
  os << "system,radix,depth,status,failed_check,k,n,l,point,residual,delta_max,message\n";
  os << detail::csv_join({cfg.system, R.to_string(), std::to_string(R.depth()), rep.passed ? "PASS" : "FAIL",
                          rep.failed_check, std::to_string(rep.k), std::to_string(rep.n), std::to_string(rep.l),
                          std::to_string(rep.point), detail::fr(rep.residual), detail::fr(rep.delta_max), rep.message})
     << '\n';
  if (!rep.passed) res.fail(rep.message);
  return res;
}

/// Kernel lemma sweeps at depths N and N+1 plus the exact kernel identities.
inline SuiteResult run_kernels(const RunConfig& cfg) {
  SuiteResult res{"kernels"};
  detail::ReportWriter w(cfg, res);
  std::vector<BoundReport> rows;
  for (int slot = 0; slot < 2; ++slot) {
    const auto sys = detail::system_at(cfg, cfg.depth + slot, res);
    if (!sys) return res;
    const PsiTable psi(*sys);
    const KernelLab lab(*sys, psi);
    const auto& R = psi.radix();
    for (KernelLemma l : all_kernel_lemmas()) {
      BoundReport r = lab.verify(l);
      if (!r.passed) res.fail(r.claim + " failed at depth " + std::to_string(R.depth()));
      res.constants.add(r.claim, slot, r.fitted_c, cfg.seed);
      rows.push_back(std::move(r));
    }
    BoundReport lkl;
    lkl.claim = "lKl";
    lkl.depth = R.depth();
    lkl.system = sys->name;
    lkl.delta = lab.delta();
    double bare = 0.0;
    for (std::uint64_t l = 1; l < R.size(); ++l) {
      lkl.lhs = std::max(lkl.lhs, lkl_identity_residual(lab.all_series(), R, l));
      bare = std::max(bare, lkl_identity_residual(lab.all_series(), R, l, false) / static_cast<double>(l));
      ++lkl.samples;
    }
    lkl.params = "l=1..M_N-1";
    lkl.note = "residual with the D_l term; without it the residual divided by l is " + detail::fr(bare);
    lkl.passed = lkl.lhs < 1e-9;
    if (!lkl.passed) res.fail("lKl identity residual " + detail::fr(lkl.lhs));
    rows.push_back(lkl);

    BoundReport e5;
    e5.claim = "dirichlet-indicator";
    e5.depth = R.depth();
    e5.system = sys->name;
    e5.params = "n=0..N";
    for (int n = 0; n <= R.depth(); ++n) {
      e5.lhs = std::max(e5.lhs, dirichlet_indicator_residual(psi, n));
      ++e5.samples;
    }
    e5.passed = e5.lhs < 1e-9;
    if (!e5.passed) res.fail("Dirichlet indicator residual " + detail::fr(e5.lhs));
    rows.push_back(e5);

    BoundReport fm;
    fm.claim = "fejer-multiplier";
    fm.depth = R.depth();
    fm.system = sys->name;
    fm.params = "n=1..M_N;j<M_N";
    for (std::uint64_t n = 1; n <= R.size(); ++n) {
      for (std::uint64_t j = 0; j < R.size(); ++j) {
        try {
          fm.lhs = std::max(fm.lhs, kernel_coefficients(KernelSpec::fejer(n), j, psi).residual);
        } catch (const VerificationError& e) {
          fm.lhs = INFINITY;
          fm.note = e.what();
        }
        ++fm.samples;
      }
    }
    fm.passed = fm.lhs < 1e-9;
    if (!fm.passed) res.fail("Fejer multiplier residual " + detail::fr(fm.lhs));
    rows.push_back(fm);
  }
  auto os = w.open("kernels.csv");
  write_bound_csv(os, rows);
  return res;
}

/// Cuculescu projections over trials and a lambda grid.
inline SuiteResult run_cuculescu(const RunConfig& cfg) {
  SuiteResult res{"cuculescu"};
  detail::ReportWriter w(cfg, res);
  const RadixSequence R = cfg.radix_sequence();
  auto os = w.open("cuculescu.csv");
  os << "trial,seed,lambda,tail,decreasing,commutator,level_excess,weak_lower,weak_upper,telescoping,disjointness,"
        "status,message\n";
  for (int i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, "cuculescu", static_cast<std::uint64_t>(i));
    Rng rng(seed);
    const OperatorField f = random_positive_field(rng, R, cfg.fiber_dim);
    double prev_tail = INFINITY;
    for (double lambda : detail::wide_lambda_grid(f, cfg.lambda_count)) {
      std::vector<std::string> cells{std::to_string(i), std::to_string(seed), detail::fr(lambda)};
      try {
        const auto q = cuculescu(f, lambda);
        const double tail = 1.0 - q.terminal().trace().real();
        const auto& c = q.checks;
        std::string msg;
        if (tail > prev_tail + 1e-12) msg = "tail increased with lambda";
        prev_tail = tail;
        for (double v : {tail, c.decreasing, c.commutator, c.level_excess, c.weak_lower, c.weak_upper, c.telescoping,
                         c.disjointness}) {
          cells.push_back(detail::fr(v));
        }
        cells.push_back(msg.empty() ? "PASS" : "FAIL");
        cells.push_back(msg);
        if (!msg.empty()) res.fail("cuculescu trial " + std::to_string(i) + ": " + msg);
      } catch (const VerificationError& e) {
        cells.resize(11, "");
        cells.push_back("FAIL");
        cells.push_back(e.what());
        res.fail(e.what());
      }
      os << detail::csv_join(cells) << '\n';
    }
  }
  return res;
}

/// Calderon-Zygmund decompositions and off-diagonal L1 ratios.
inline SuiteResult run_cz(const RunConfig& cfg) {
  SuiteResult res{"cz"};
  detail::ReportWriter w(cfg, res);
  auto os = w.open("cz.csv");
  os << "depth,trial,seed,lambda,reconstruction,g_l1_excess,g_inf_excess,g_inf_applicable,diagonal_l1_excess,"
        "piece_mean,diagonal_vanishing,akq_ratio,status,message\n";
  for (int slot = 0; slot < 2; ++slot) {
    const auto sys = detail::system_at(cfg, cfg.depth + slot, res);
    if (!sys) return res;
    const PsiTable psi(*sys);
    const SupKernelBank bank(psi);
    const auto& R = psi.radix();
    for (int i = 0; i < cfg.trials; ++i) {
      const std::uint64_t seed = derive_seed(cfg.seed, "cz", static_cast<std::uint64_t>(i));
      Rng rng(seed);
      const OperatorField f = random_positive_field(rng, R, cfg.fiber_dim);
      for (double lambda : lambda_grid(f, cfg.lambda_count, cfg.lambda_span)) {
        std::vector<std::string> cells{std::to_string(R.depth()), std::to_string(i), std::to_string(seed),
                                       detail::fr(lambda)};
        try {
          const auto cz = cz_decompose(f, lambda);
          const double van = diagonal_vanishing_residual(cz, bank);
          double akq = 0.0;
          for (const auto& piece : cz.pieces) {
            const auto rep = verify_offdiag_l1(cz, bank, piece.k, piece.cube);
            if (!rep.degenerate) akq = std::max(akq, rep.fitted_c);
          }
          res.constants.add("AkQ", slot, akq, seed);
          const auto& c = cz.checks;
          std::string msg;
          if (van > 1e-9) msg = "diagonal vanishing residual " + detail::fr(van);
          for (double v : {c.reconstruction, c.g_l1_excess, c.g_inf_excess}) cells.push_back(detail::fr(v));
          cells.push_back(c.g_inf_applicable ? "yes" : "no");
          for (double v : {c.diagonal_l1_excess, c.piece_mean, van, akq}) cells.push_back(detail::fr(v));
          cells.push_back(msg.empty() ? "PASS" : "FAIL");
          cells.push_back(msg);
          if (!msg.empty()) res.fail(msg);
        } catch (const VerificationError& e) {
          cells.resize(12, "");
          cells.push_back("FAIL");
          cells.push_back(e.what());
          res.fail(e.what());
        }
        os << detail::csv_join(cells) << '\n';
      }
    }
  }
  return res;
}

/// Weak type (1,1) certificates at depths N and N+1.
inline SuiteResult run_weak11(const RunConfig& cfg) {
  SuiteResult res{"weak11"};
  detail::ReportWriter w(cfg, res);
  Json certs = Json::array();
  for (int slot = 0; slot < 2; ++slot) {
    const auto sys = detail::system_at(cfg, cfg.depth + slot, res);
    if (!sys) return res;
    const PsiTable psi(*sys);
    const SupKernelBank bank(psi);
    const auto& R = psi.radix();
    for (int i = 0; i < cfg.trials; ++i) {
      const std::uint64_t seed = derive_seed(cfg.seed, "weak11", static_cast<std::uint64_t>(i));
      Rng rng(seed);
      const OperatorField f = random_positive_field(rng, R, cfg.fiber_dim);
      for (double lambda : lambda_grid(f, cfg.lambda_count, cfg.lambda_span)) {
        try {
          const auto c = weak11_certificate(f, lambda, bank);
          Json j = to_json(c);
          j["trial"] = i;
          j["seed"] = seed;
          j["fitted_c_inf"] = c.fitted_c_inf;
          j["passed"] = c.passed;
          if (!c.passed) {
            j["message"] = c.message;
            res.fail("weak11 depth " + std::to_string(R.depth()) + " trial " + std::to_string(i) + ": " + c.message);
          }
          certs.push_back(j);
          res.constants.add("weak11-total", slot, c.fitted_c_total, seed);
          res.constants.add("weak11-inf", slot, c.fitted_c_inf, seed);
          res.constants.add("weak11-bd", slot, c.fitted_c_bd, seed);
          res.constants.add("weak11-boff", slot, c.fitted_c_boff, seed);
        } catch (const VerificationError& e) {
          res.fail(e.what());
        }
      }
    }
  }
  w.json("weak11_certificates.json", certs);
  return res;
}

/// Transference identities on the factor built from the configured radix.
inline SuiteResult run_transference(const RunConfig& cfg) {
  SuiteResult res{"transference"};
  detail::ReportWriter w(cfg, res);
  const RadixSequence R = cfg.radix_sequence();
  const double load = static_cast<double>(R.size()) * static_cast<double>(R.size()) * static_cast<double>(R.size());
  if (load > static_cast<double>(cfg.budget)) {
    throw BudgetError("budget exceeded: transference needs M_{2N} * D = " + format_real(load) + " > " +
                      std::to_string(cfg.budget) + "; estimated memory " +
                      format_real(16.0 * load * static_cast<double>(R.size()) / 1048576.0) + " MiB");
  }
  const Transference tr(R);
  const Index D = tr.context().dim();
  Json reports = Json::array();
  for (int i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, "transference", static_cast<std::uint64_t>(i));
    Rng rng(seed);
    const Operator x = random_operator(rng, D);
    const Operator y = random_operator(rng, D);
    const auto rep = tr.verify(x, y);
    const auto tw = tr.intertwine_sweep(x);
    Json j;
    j["trial"] = i;
    j["seed"] = seed;
    j["transference"] = to_json(rep);
    j["intertwine"] = to_json(tw);
    reports.push_back(j);
    if (!rep.passed) res.fail("transference trial " + std::to_string(i) + ": " + rep.message);
    if (!tw.passed) res.fail("intertwining trial " + std::to_string(i) + ": " + tw.message);
  }
  Json out;
  out["radix"] = R.to_string();
  out["depth"] = R.depth();
  out["factor_dim"] = D;
  out["reports"] = reports;
  w.json("transference.json", out);
  return res;
}

/// Sunouchi operators on both sides at depths N and N+1.
inline SuiteResult run_sunouchi(const RunConfig& cfg) {
  SuiteResult res{"sunouchi"};
  detail::ReportWriter w(cfg, res);
  std::vector<BoundReport> rows;
  for (int slot = 0; slot < 2; ++slot) {
    const auto sys = detail::system_at(cfg, cfg.depth + slot, res);
    if (!sys) return res;
    const PsiTable psi(*sys);
    const auto& R = psi.radix();
    for (const auto& sel : detail::selections(cfg, R)) {
      const Sunouchi su(psi, sel);
      BoundReport ms;
      ms.claim = "multiplier-sup";
      ms.params = "selection=" + sel.to_string();
      ms.depth = R.depth();
      ms.system = sys->name;
      ms.lhs = su.multiplier_bound();
      ms.rhs_unit = 1.0;
      ms.fitted_c = ms.lhs;
      ms.samples = R.size();
      rows.push_back(ms);
      res.constants.add("multiplier-sup", slot, ms.lhs, cfg.seed);
      for (int i = 0; i < cfg.trials; ++i) {
        const std::uint64_t seed = derive_seed(cfg.seed, "sunouchi", static_cast<std::uint64_t>(i));
        Rng rng(seed);
        const OperatorField f = random_field(rng, R, cfg.fiber_dim);
        const auto data = su.apply_U(f);
        if (!data.passed) res.fail("Sunouchi L2 check failed, multiplier residual " + detail::fr(data.multiplier_residual));
        res.constants.add("T22-L2", slot, data.l2_ratio, seed);
        for (double p : {1.0, 2.0}) {
          auto r = su.so1_ratio(f, p);
          r.system = sys->name;
          res.constants.add("SO-1 p=" + format_real(p), slot, r.fitted_c, seed);
          rows.push_back(r);
        }
        auto asym = su.asym_maximal_report(f, 1.0);
        asym.system = sys->name;
        res.constants.add("main-asy-op p=1", slot, asym.fitted_c, seed);
        rows.push_back(asym);
        if (R.depth() >= 2) {
          const SimpleAtom atom = random_atom(rng, R, cfg.fiber_dim);
          const double van = su.vanishing_residual(atom);
          if (van > 1e-10) res.fail("kn0 residual " + detail::fr(van));
          auto ar = su.atom_numerator(atom);
          ar.system = sys->name;
          ar.note = "kn0 residual " + detail::fr(van);
          res.constants.add("lem-atom", slot, ar.fitted_c, seed);
          rows.push_back(ar);
        }
        const auto fr = fit_full_range(f, psi);
        res.constants.add("full-rng", slot, fr.c_hat, seed);
        if (fr.finite && full_range_gap(f, psi, fr.c_hat) < -1e-8) res.fail("full-range domination re-check failed");
      }
    }
  }
  const RadixSequence R = cfg.radix_sequence();
  const double load = static_cast<double>(R.size()) * static_cast<double>(R.size()) * static_cast<double>(R.size());
  Json factor = Json::array();
  if (load <= static_cast<double>(cfg.budget)) {
    const Transference tr(R);
    const auto sel = LacunarySelection::standard(tr.context().doubled(), 2);
    for (int i = 0; i < cfg.trials; ++i) {
      const std::uint64_t seed = derive_seed(cfg.seed, "sunouchi-factor", static_cast<std::uint64_t>(i));
      Rng rng(seed);
      const Operator x = random_operator(rng, tr.context().dim());
      for (double p : {1.0, 2.0}) {
        try {
          const auto r = nc_sunouchi_ratio(x, p, sel, tr);
          Json j = to_json(r);
          j["trial"] = i;
          j["p"] = p;
          factor.push_back(j);
          if (!r.passed) res.fail("factor Sunouchi: " + r.message);
        } catch (const VerificationError& e) {
          res.fail(e.what());
        }
      }
    }
  }
  auto os = w.open("sunouchi.csv");
  write_bound_csv(os, rows);
  w.json("sunouchi_factor.json", factor);
  return res;
}

/// One row of a b.a.u. decay table.
struct DecayRow {
  double epsilon = 0.0;
  std::uint64_t n0 = 0;
  double value = 0.0;
  double witness_measure = 0.0;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  bool nonincreasing = true;
  double terminal = 0.0;
};

/// For residuals r_n = sigma_n x - x, 1 <= n < M, and the exact tail
/// r_n = -Y / n for n >= M, tabulates sup_{n >= n0} ||e r_n e|| where e cuts the
/// largest eigenvalues of sum |r_n|^2 + |Y|^2 keeping phi(1 - e) < epsilon.
/// n0 runs over powers of 2 up to M, then over M 4^j until the value drops
/// below `floor`.
template <class Elem>
DecayTable decay_table(const std::vector<Elem>& residuals, const Elem& Y, std::uint64_t M,
                       const std::vector<double>& epsilons, double floor = 1e-9) {
  DecayTable t;
  std::vector<Elem> all = residuals;
  all.push_back(Y);
  const Elem S2 = ops::sum_squares(all, false);
  std::vector<double> ev = ops::eigenvalues(S2);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  const double count = static_cast<double>(ev.size());
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw PreconditionError("decay_table: epsilon must be positive");
    const std::size_t cut = static_cast<std::size_t>(std::max(0.0, std::ceil(eps * count) - 1.0));
    Elem e = ops::identity_like(Y);
    if (cut > 0 && cut < ev.size()) {
      e = ops::spectral(S2, Interval::closed(-INFINITY, ev[cut]));
    }
    const double measure = 1.0 - ops::phi(e);
    std::vector<double> vals;
    for (const auto& r : residuals) vals.push_back(ops::sup_norm(ops::mul(ops::mul(e, r), e)));
    const double ytail = ops::sup_norm(ops::mul(ops::mul(e, Y), e));
    std::vector<double> suffix(vals.size() + 1, 0.0);
    for (std::size_t i = vals.size(); i-- > 0;) suffix[i] = std::max(suffix[i + 1], vals[i]);
    auto value_at = [&](std::uint64_t n0) {
      const double tail = ytail / static_cast<double>(std::max(n0, M));
      if (n0 >= M) return tail;
      return std::max(suffix[static_cast<std::size_t>(n0 - 1)], tail);
    };
    std::vector<std::uint64_t> grid;
    for (std::uint64_t n0 = 1; n0 < M; n0 *= 2) grid.push_back(n0);
    grid.push_back(M);
    std::uint64_t n0 = M;
    for (int j = 0; j < 60 && value_at(n0) >= floor; ++j) {
      if (n0 > std::numeric_limits<std::uint64_t>::max() / 4) break;
      n0 *= 4;
      grid.push_back(n0);
    }
    double prev = INFINITY;
    for (std::uint64_t g : grid) {
      const double v = value_at(g);
      if (v > prev) t.nonincreasing = false;
      prev = v;
      t.rows.push_back({eps, g, v, measure});
    }
    t.terminal = std::max(t.terminal, prev);
  }
  return t;
}

inline std::vector<double> default_epsilons() { return {0.5, 0.25, 0.125, 0.0625}; }

/// Decay table for x in R_N under the factor Cesaro means.
inline DecayTable bau_probe(const Operator& x, const FactorBasis& basis,
                            const std::vector<double>& epsilons = default_epsilons()) {
  const std::uint64_t M = basis.size();
  std::vector<Operator> res;
  for (std::uint64_t n = 1; n < M; ++n) res.push_back(basis.cesaro(x, n) - x);
  RealVector k(static_cast<Index>(M));
  for (std::uint64_t j = 0; j < M; ++j) k(static_cast<Index>(j)) = static_cast<double>(j);
  return decay_table(res, basis.synthesize(basis.fourier_all(x), k), M, epsilons);
}

/// Decay table for an operator field under the Cesaro means of a system.
inline DecayTable bau_probe(const OperatorField& f, const PsiTable& psi,
                            const std::vector<double>& epsilons = default_epsilons()) {
  const std::uint64_t M = psi.size();
  std::vector<OperatorField> res;
  for (std::uint64_t n = 1; n < M; ++n) res.push_back(cesaro(f, n, psi) - f);
  RealVector k(static_cast<Index>(M));
  for (std::uint64_t j = 0; j < M; ++j) k(static_cast<Index>(j)) = static_cast<double>(j);
  return decay_table(res, apply_multiplier(f, k, psi), M, epsilons);
}

inline SuiteResult run_bau_probe(const RunConfig& cfg) {
  SuiteResult res{"bau-probe"};
  detail::ReportWriter w(cfg, res);
  const RadixSequence R = cfg.radix_sequence();
  const double load = static_cast<double>(R.size()) * static_cast<double>(R.size()) * static_cast<double>(R.size());
  if (load > static_cast<double>(cfg.budget)) {
    throw BudgetError("budget exceeded: the factor probe needs M_{2N} * D = " + format_real(load) + " > " +
                      std::to_string(cfg.budget));
  }
  const FactorBasis basis{FactorContext(R)};
  auto os = w.open("bau_probe.csv");
  os << "input,seed,epsilon,n0,value,witness_measure\n";
  const Operator& w1 = basis.W(1);
  double w1_gap = 0.0;
  for (std::uint64_t n = 2; n <= basis.size(); ++n) {
    w1_gap = std::max(w1_gap, std::abs(opnorm(basis.cesaro(w1, n) - w1) - 1.0 / static_cast<double>(n)));
  }
  if (w1_gap > 1e-12) res.fail("W_1 deficit differs from 1/n by " + detail::fr(w1_gap));
  auto emit = [&](const std::string& name, std::uint64_t seed, const DecayTable& t) {
    for (const auto& r : t.rows) {
      os << detail::csv_join({name, std::to_string(seed), detail::fr(r.epsilon), std::to_string(r.n0),
                              detail::fr(r.value), detail::fr(r.witness_measure)})
         << '\n';
    }
    if (!t.nonincreasing) res.fail(name + ": decay table increases");
    if (!(t.terminal < 1e-9)) res.fail(name + ": terminal value " + detail::fr(t.terminal));
  };
  emit("W_1", 0, bau_probe(w1, basis));
  emit("identity", 0, bau_probe(Operator::identity(basis.context().dim()), basis));
  for (int i = 0; i < cfg.trials; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, "bau-probe", static_cast<std::uint64_t>(i));
    Rng rng(seed);
    emit("random", seed, bau_probe(random_operator(rng, basis.context().dim()), basis));
  }
  return res;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"validate-system", "kernels",  "cuculescu", "cz",      "weak11",
                                              "transference",    "sunouchi", "bau-probe", "all"};
  return names;
}

/// Runs one suite, or every suite for "all" with a constant table and summary.
inline std::vector<SuiteResult> run_suite(const RunConfig& cfg, const std::string& suite) {
  cfg.validate();
  using Runner = std::function<SuiteResult(const RunConfig&)>;
  const std::vector<std::pair<std::string, Runner>> runners{
      {"validate-system", run_validate_system}, {"kernels", run_kernels},
      {"cuculescu", run_cuculescu},             {"cz", run_cz},
      {"weak11", run_weak11},                   {"transference", run_transference},
      {"sunouchi", run_sunouchi},               {"bau-probe", run_bau_probe}};
  std::vector<SuiteResult> out;
  for (const auto& [name, run] : runners) {
    if (suite != "all" && suite != name) continue;
    out.push_back(run(cfg));
    if (suite == "all" && name == "validate-system" && !out.back().passed) break;
  }
  if (out.empty()) throw PreconditionError("unknown suite '" + suite + "'");
  if (suite == "all") {
    SuiteResult summary{"summary"};
    detail::ReportWriter w(cfg, summary);
    ConstantTable table;
    for (const auto& r : out) table.merge(r.constants);
    {
      auto os = w.open("constant_table.csv");
      table.write_csv(os);
    }
    Json j;
    j["radix"] = cfg.radix_sequence().to_string();
    j["depth"] = cfg.depth;
    j["fiber_dim"] = cfg.fiber_dim;
    j["system"] = cfg.system;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    Json suites = Json::array();
    for (const auto& r : out) suites.push_back({{"suite", r.suite}, {"passed", r.passed}, {"failures", r.failures}});
    j["suites"] = suites;
    Json consts = Json::array();
    for (const auto& r : table.rows()) {
      consts.push_back({{"claim", r.claim},
                        {"c_depth_n", r.c_n},
                        {"c_depth_n1", r.c_n1},
                        {"stability_ratio", r.ratio()},
                        {"stable", r.stable()},
                        {"trials", r.trials},
                        {"worst_seed", r.worst_seed}});
    }
    j["constants"] = consts;
    w.json("summary.json", j);
    summary.constants = table;
    out.push_back(std::move(summary));
  }
  return out;
}

}  // namespace vlab
