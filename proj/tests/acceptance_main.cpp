// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// pass. Tolerances and parameter grids are pinned here; the Monte-Carlo
// criteria run through the same experiment harness the CLI uses.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "core/band_model.hpp"
#include "core/circulant.hpp"
#include "core/diagnostics.hpp"
#include "core/experiment.hpp"
#include "core/loops.hpp"
#include "core/noncrossing.hpp"
#include "core/primitive.hpp"
#include "core/report_io.hpp"
#include "core/spectral.hpp"

using namespace bandloop;

namespace {

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Outcome> outcomes;

// Configs exercised by the determinism criterion, with their first payload.
std::vector<std::pair<ExperimentConfig, std::string>> determinism_pool;

int threads_primary() {
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 4u : hw, 8u));
}

int threads_secondary() {
  const int a = threads_primary();
  return a > 1 ? std::max(1, a / 2) : 2;
}

ExperimentReport run_pooled(const ExperimentConfig& cfg) {
  RunOptions opt;
  opt.threads = threads_primary();
  ExperimentReport report = run_experiment(cfg, opt);
  determinism_pool.emplace_back(cfg, report_payload_json(report));
  return report;
}

void record(int id, const std::string& name, bool pass, const std::string& detail) {
  outcomes.push_back({id, name, pass, detail});
  std::printf("%s  criterion %2d (%s): %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

bool check_named(const ExperimentReport& report, const std::string& name, double* value = nullptr) {
  for (const auto& c : report.checks) {
    if (c.name == name) {
      if (value) *value = c.value;
      return c.passed;
    }
  }
  return false;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// ---- criterion 1: exact identity suite -----------------------------------

void criterion_1() {
  double worst_detail[5] = {0, 0, 0, 0, 0};
  bool pass = true;

  // (a) resolvent Ward identity at N = 128.
  {
    BandModel model(16, 8);
    const double t = 0.7;
    const ResolventCache cache(model, scale_to_time(sample_hamiltonian(model, 2024, 0), t));
    const SpectralPoint point = flow_to_z(0.0, t, 8);
    const auto G = cache.resolvent(point.z);
    const Eigen::MatrixXcd ward =
        (*G) * G->adjoint() - ((*G) - G->adjoint()) / Complex(0.0, 2.0 * point.eta);
    worst_detail[0] = ward.cwiseAbs().maxCoeff();
    pass = pass && worst_detail[0] < 1e-9;
  }

  // (b) loop Ward identity, n = 2, 3, per sample.
  {
    ExperimentConfig cfg = ExperimentConfig::from_text(
        "kind = ward\ntarget = loop\nW = 16\nL = 8\nE = 0\nt = 0.7\nn = 2, 3\n"
        "samples = 3\nseed = 2024\ntol = 1e-9\n");
    const ExperimentReport report = run_pooled(cfg);
    double v = 0.0;
    pass = pass && check_named(report, "ward_loop_max_residual", &v);
    worst_detail[1] = v;
  }

  // (c) Ward identity for the deterministic loops.
  {
    ExperimentConfig cfg = ExperimentConfig::from_text(
        "kind = ward\ntarget = k\nW = 4\nL = 6, 8\nE = 0\nt = 0.3, 0.7\nn = 2, 3, 4\n"
        "tol = 1e-10\ntol_n2_sum = 1e-12\n");
    const ExperimentReport report = run_pooled(cfg);
    double v = 0.0;
    pass = pass && check_named(report, "ward_k_max_residual", &v);
    pass = pass && check_named(report, "ward_k_n2_sum_error");
    worst_detail[2] = v;
  }

  // (d) circulant identities.
  {
    double worst = 0.0;
    for (int L : {8, 16, 32}) {
      const Eigen::MatrixXcd S = block_profile_kernel(L).dense();
      const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(L, L);
      for (const Complex xi : {Complex(0.7, 0.0), Complex(0.4, 0.35), Complex(-0.8, 0.1)}) {
        const Eigen::MatrixXcd T = theta_kernel(xi, L).dense();
        worst = std::max(worst, ((I - xi * S) * T - I).cwiseAbs().maxCoeff());
        const Eigen::MatrixXcd T2 = theta_kernel(xi * 0.5, L).dense();
        worst = std::max(worst, (T * T2 - T2 * T).cwiseAbs().maxCoeff());
        const Eigen::MatrixXcd a = evolution_factor(0.1, 0.4, xi, L).dense();
        const Eigen::MatrixXcd b = evolution_factor(0.4, 0.9, xi, L).dense();
        const Eigen::MatrixXcd c = evolution_factor(0.1, 0.9, xi, L).dense();
        worst = std::max(worst, (a * b - c).cwiseAbs().maxCoeff());
      }
    }
    worst_detail[3] = worst;
    pass = pass && worst < 1e-12;
  }

  // (e) the zero-mode projector annihilates total mass.
  {
    std::mt19937_64 eng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int n : {2, 3}) {
      BlockTensor A(n, 8);
      for (std::size_t i = 0; i < A.flat_size(); ++i) A.flat(i) = Complex(u(eng), u(eng));
      const SumZeroTensor q = remove_zero_mode(0.4, A);
      worst = std::max(worst, q.max_residual);
    }
    worst_detail[4] = worst;
    pass = pass && worst < 1e-10;
  }

  record(1, "exact-identities", pass,
         fmt("resolvent ward %.2e, loop ward %.2e, K ward %.2e", worst_detail[0], worst_detail[1],
             worst_detail[2]) +
             fmt(", circulant %.2e, zero-mode %.2e", worst_detail[3], worst_detail[4]));
}

// ---- criterion 2: oracle equivalence --------------------------------------

void criterion_2() {
  ExperimentConfig cfg = ExperimentConfig::from_text(
      "kind = oracle\nW = 4\nL = 6\nE = 0\nt = 0.3, 0.5, 0.8\nn_max = 4\nstep = 0.001\n"
      "tol_n2 = 1e-6\ntol_n3 = 1e-6\ntol_n4 = 1e-5\nconv_tol = 1e-6\n");
  const ExperimentReport report = run_pooled(cfg);
  double n2 = 0, n3 = 0, n4 = 0, gap = 0;
  bool pass = check_named(report, "oracle_n2_vs_closed", &n2);
  pass = check_named(report, "oracle_n3_vs_closed", &n3) && pass;
  pass = check_named(report, "oracle_n4_vs_treesum", &n4) && pass;
  pass = check_named(report, "oracle_step_halving_gap", &gap) && pass;
  record(2, "oracle-equivalence", pass,
         fmt("rel diff n2 %.2e n3 %.2e n4 %.2e", n2, n3, n4) + fmt(", halving gap %.2e", gap));
}

// ---- criterion 3: sum zero -------------------------------------------------

void criterion_3() {
  ExperimentConfig cfg = ExperimentConfig::from_text(
      "kind = sumzero\nL = 16\nE = 0, 1\nt = 0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9\n"
      "tol_closed = 1e-12\nbound_factor = 2\n");
  const ExperimentReport report = run_pooled(cfg);
  double err = 0.0;
  bool pass = check_named(report, "sumzero_closed_form_error", &err);
  pass = check_named(report, "sumzero_eta_bound") && pass;
  record(3, "sum-zero", pass, fmt("closed-form error %.2e, eta bound held", err));
}

// ---- criterion 4: non-crossing combinatorics -------------------------------

void criterion_4() {
  const std::size_t c3 = enumerate_noncrossing(3).size();
  const std::size_t c4 = enumerate_noncrossing(4).size();
  const std::size_t c5 = enumerate_noncrossing(5).size();

  // Brute force at n = 5 over all subsets of the admissible chords.
  const auto pool = admissible_chords(5);
  long brute = 0;
  for (unsigned mask = 0; mask < (1u << pool.size()); ++mask) {
    ChordSet set;
    for (std::size_t p = 0; p < pool.size(); ++p)
      if ((mask >> p) & 1u) set.push_back(pool[p]);
    if (is_noncrossing(set)) ++brute;
  }
  const bool pass = c3 == 1 && c4 == 3 && c5 == 11 && brute == 11;
  record(4, "non-crossing-counts", pass,
         fmt("n=3: %g, n=4: %g, n=5: %g (brute force 11)", double(c3), double(c4), double(c5)));
}

// ---- criterion 5: local law scaling ----------------------------------------

void criterion_5() {
  ExperimentConfig cfg = ExperimentConfig::from_text(
      "kind = locallaw\nW = 16, 32, 64\nL = 8\nE = 0\neta = 0.2\nsamples = 100\nseed = 11\n"
      "entry_slope_min = -0.75\nentry_slope_max = -0.3\n"
      "trace_slope_min = -1.4\ntrace_slope_max = -0.7\n");
  const ExperimentReport report = run_pooled(cfg);
  double entry = 0, trace = 0;
  for (const auto& [k, v] : report.summary) {
    if (k == "entry_slope") entry = v;
    if (k == "trace_slope") trace = v;
  }
  const bool pass = report.passed();
  record(5, "local-law-scaling", pass,
         fmt("entry slope %.3f (window [-0.75,-0.3]), trace slope %.3f (window [-1.4,-0.7])",
             entry, trace));
}

// ---- criterion 6: loop-error scaling ---------------------------------------

void criterion_6() {
  ExperimentConfig cfg = ExperimentConfig::from_text(
      "kind = scaling\nW = 16, 32, 64\nL = 8\nE = 0\neta = 0.2\nsamples = 100\nseed = 12\n"
      "ratio_low = 0.05\nratio_high = 20\ndoubling_low = 2.8\ndoubling_high = 5.7\n");
  const ExperimentReport report = run_pooled(cfg);
  double slope = 0;
  for (const auto& [k, v] : report.summary)
    if (k == "loglog_slope") slope = v;
  record(6, "loop-error-scaling", report.passed(),
         fmt("ratios within [0.05, 20], doubling within [2.8, 5.7], slope %.3f", slope));
}

// ---- criterion 7: quantum diffusion ----------------------------------------

void criterion_7() {
  ExperimentConfig cfg = ExperimentConfig::from_text(
      "kind = diffusion\nW = 32\nL = 16\nE = 0\neta = 0.2\nsamples = 100\nseed = 13\n"
      "ratio_max = 10\nshrink_low = 0.6667\nshrink_high = 6\n");
  const ExperimentReport report = run_pooled(cfg);
  double ratio = 0, shrink = 0;
  check_named(report, "diffusion_residual_ratio", &ratio);
  check_named(report, "diffusion_mc_shrink_low", &shrink);
  record(7, "quantum-diffusion", report.passed(),
         fmt("max residual / scale %.3f (<= 10), quarter/full residual %.3f in [0.67, 6]", ratio,
             shrink));
}

// ---- criteria 8 and 9: spectrum --------------------------------------------

void criteria_8_9() {
  ExperimentConfig cfg = ExperimentConfig::from_text(
      "kind = spectrum\nW = 16, 32, 64\nL = 8\nE = 0\nsamples = 20\nseed = 14\nkappa = 0.1\n"
      "deloc_max_factor = 25\ndeloc_median_factor = 8\n");
  const ExperimentReport report = run_pooled(cfg);

  double max64 = 0, med64 = 0;
  const bool pass8 =
      check_named(report, "deloc_max_W64", &max64) && check_named(report, "deloc_median_W64", &med64);
  const double logN = std::log(512.0);
  record(8, "delocalization-proxy", pass8,
         fmt("W=64: max N|psi|_inf^2 %.2f (<= %.2f), median %.2f", max64, 25.0 * logN, med64) +
             fmt(" (<= %.2f)", 8.0 * logN));

  double decrease = 0;
  const bool pass9 = check_named(report, "que_variance_strict_decrease", &decrease);
  record(9, "que-proxy", pass9,
         fmt("block-mass variance medians strictly decreasing over W (last/first %.3f)", decrease));
}

// ---- criterion 10: determinism ---------------------------------------------

void criterion_10() {
  RunOptions alt;
  alt.threads = threads_secondary();
  bool pass = true;
  std::size_t compared = 0;
  for (const auto& [cfg, payload] : determinism_pool) {
    const ExperimentReport rerun = run_experiment(cfg, alt);
    if (report_payload_json(rerun) != payload) {
      pass = false;
      std::printf("  determinism mismatch for kind '%s'\n", cfg.kind().c_str());
    }
    ++compared;
  }
  record(10, "determinism", pass,
         fmt("%g suite payloads byte-identical at %g vs %g threads", double(compared),
             double(threads_primary()), double(alt.threads)));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criteria_8_9();
  criterion_10();

  int failed = 0;
  for (const auto& o : outcomes)
    if (!o.pass) ++failed;
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s: %zu criteria checked, %d failed (%.1f s)\n", failed == 0 ? "OK" : "FAILED",
              outcomes.size(), failed, elapsed);
  return failed == 0 ? 0 : 1;
}
