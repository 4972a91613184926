// Acceptance run: one PASS/FAIL line per criterion, followed by the numbers
// behind it. Exit status is nonzero if any criterion fails.
//
// Tolerances and sizes are pinned below; nothing is tuned per run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lcc/lcc.hpp"

using namespace lcc;

namespace {

constexpr double kRelTol = 1e-12;           // AC2
constexpr double kCsdSlope = 14.5;          // AC5, dB per digit
constexpr double kCsdSlopeTol = 1.5;
constexpr double kBinarySlope = 6.0;        // AC5, dB per bit
constexpr double kBinarySlopeTol = 1.0;
constexpr double kGridFraction = 0.8;       // AC6, AC7
constexpr double kRunTargetDb = 80.0;       // run target for AC6/AC7 sweeps
constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double rel_err(double a, double b) {
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

double rel_vec(const Row& a, const Row& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

ComputationDag random_dag(std::mt19937_64& rng, std::size_t k, std::size_t internal, int s_min,
                          int s_max, ExponentBounds b, bool nonzero) {
  ComputationDag d(k, b);
  std::uniform_int_distribution<int> ex(b.min, b.max);
  std::uniform_int_distribution<int> fan(s_min, s_max);
  while (d.num_internal() < internal) {
    WiringVector w;
    const int s = fan(rng);
    for (int j = 0; j < s; ++j)
      w.push_back({rng() % d.size(), ShiftCoefficient(rng() % 2 ? 1 : -1, ex(rng))});
    ComputationDag next = d;
    if (nonzero && next.squared_norm(next.add_vertex(w)) == 0.0) continue;
    if (!nonzero) next.add_vertex(w);
    d = std::move(next);
  }
  return d;
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  std::mt19937_64 rng(kSeed);
  std::normal_distribution<double> g;
  const ExponentBounds b{-4, 4};
  std::size_t rs_mismatch = 0, dmp_below = 0;
  for (int i = 0; i < 500; ++i) {
    const std::size_t k = 1 + rng() % 3;
    const std::size_t total = k + rng() % (6 - k + 1);
    ComputationDag d = random_dag(rng, k, total - k, 2, 2, b, true);
    const int s = 1 + static_cast<int>(rng() % 2);
    Row t(k);
    for (double& x : t) x = 3.0 * g(rng);
    const double brute = brute_force_wiring(t, d, s).error;
    const int q = static_cast<int>(brute_force_count(d.size(), b, s));
    if (rs_wiring(t, d, s, q).error != brute) ++rs_mismatch;
    if (dmp_wiring(t, d, s).error < brute) ++dmp_below;
  }
  return {rs_mismatch == 0 && dmp_below == 0,
          "500 instances: rs!=brute " + std::to_string(rs_mismatch) + ", dmp<brute " +
              std::to_string(dmp_below)};
}

Outcome ac2() {
  double worst_res = 0.0, worst_eval = 0.0;
  std::mt19937_64 rng(kSeed);
  std::normal_distribution<double> g;
  std::size_t runs = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TargetMatrix t = gen_gaussian_matrix(16, 8, trial_seed(kSeed, seed));
    std::vector<DecomposeConfig> cfgs{DecomposeConfig::fs_default(), DecomposeConfig::fp_default(),
                                      DecomposeConfig::fp_default(WiringSolver::rs),
                                      DecomposeConfig::ma_default(0), DecomposeConfig::ma_default(2)};
    DecomposeConfig sl;
    sl.algorithm = Algorithm::sliced;
    sl.slice_width = 4;
    cfgs.push_back(sl);
    sl.inner = Algorithm::ma;
    sl.delta_mu_max = 1;
    cfgs.push_back(sl);
    for (const DecomposeConfig& cfg : cfgs) {
      DecompositionResult r = decompose(t, cfg);
      ++runs;
      // residuals from unit-input probes
      std::vector<Row> cols;
      for (std::size_t k = 0; k < t.cols(); ++k) {
        Row e(t.cols(), 0.0);
        e[k] = 1.0;
        cols.push_back(evaluate_dag(r.dag, e));
      }
      for (std::size_t n = 0; n < t.rows(); ++n) {
        double err = 0.0;
        for (std::size_t k = 0; k < t.cols(); ++k) err += (t(n, k) - cols[k][n]) * (t(n, k) - cols[k][n]);
        worst_res = std::max(worst_res, rel_err(err, r.row_errors[n]));
      }
      for (int i = 0; i < 100; ++i) {
        Row x(t.cols());
        for (double& v : x) v = g(rng);
        Row product(t.rows(), 0.0);
        for (std::size_t n = 0; n < t.rows(); ++n)
          for (std::size_t k = 0; k < t.cols(); ++k) product[n] += cols[k][n] * x[k];
        worst_eval = std::max(worst_eval, rel_vec(evaluate_dag(r.dag, x), product));
      }
    }
  }
  return {worst_res <= kRelTol && worst_eval <= kRelTol,
          std::to_string(runs) + " decompositions: max rel residual diff " + fmt("%.2e", worst_res) +
              ", max rel eval diff " + fmt("%.2e", worst_eval) + " (tol 1e-12)"};
}

Outcome ac3() {
  std::mt19937_64 rng(kSeed);
  std::size_t sum_bad = 0, fan_bad = 0, delay_bad = 0;
  for (int i = 0; i < 200; ++i) {
    const bool constant_fan = i % 2 == 0;
    const int s = 1 + static_cast<int>(rng() % 4);
    ComputationDag d = random_dag(rng, 1 + rng() % 4, rng() % 40, constant_fan ? s : 1,
                                  constant_fan ? s : 4, {-8, 8}, false);
    std::size_t expect = 0;
    for (VertexId v = d.num_inputs(); v < d.size(); ++v) expect += d.terms(v).size() - 1;
    const std::size_t n_add = count_additions(d);
    if (n_add != expect) ++sum_bad;
    if (constant_fan && n_add != d.num_internal() * static_cast<std::size_t>(s - 1)) ++fan_bad;
    if (count_delays(d) < n_add) ++delay_bad;
  }
  std::size_t ma_bad = 0, ma_aligned = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TargetMatrix t = gen_gaussian_matrix(16, 4, trial_seed(kSeed, seed));
    DecomposeConfig cfg = DecomposeConfig::ma_default(0);
    cfg.schedule = {SchedulePhase{2, WiringSolver::dmp, 16}};  // full budget: every vertex S = 2
    DecompositionResult r = ma_decompose(t, cfg);
    const DepthTable dt = compute_depths(r.dag);
    const int top = *std::max_element(dt.vertex.begin(), dt.vertex.end());
    const bool aligned = std::all_of(dt.output.begin(), dt.output.end(), [&](int x) { return x == top; });
    if (count_delays(r.dag) != count_additions(r.dag)) ++ma_bad;
    if (aligned) {
      ++ma_aligned;
      if (count_delays(r.dag, DelayOptions{true}) != count_additions(r.dag)) ++ma_bad;
    }
  }
  return {sum_bad + fan_bad + delay_bad + ma_bad == 0,
          "200 DAGs: sum(indeg-1) mismatches " + std::to_string(sum_bad) + ", (|C|-K)(S-1) mismatches " +
              std::to_string(fan_bad) + ", N_delay<N_add " + std::to_string(delay_bad) +
              "; 20 MA(0) DAGs: N_delay!=N_add " + std::to_string(ma_bad) + " (" +
              std::to_string(ma_aligned) + " with all outputs at final depth)"};
}

Outcome ac4() {
  std::size_t span_bad = 0, layer_bad = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    TargetMatrix t = gen_gaussian_matrix(16, 4, trial_seed(kSeed, seed));
    for (int delta : {0, 1, 2}) {
      DecompositionResult r = ma_decompose(t, DecomposeConfig::ma_default(delta));
      const DepthTable dt = compute_depths(r.dag);
      for (VertexId v = r.dag.num_inputs(); v < r.dag.size(); ++v) {
        int lo = 1 << 30, hi = -1;
        for (const WiringTerm& term : r.dag.terms(v).terms()) {
          lo = std::min(lo, dt.vertex[term.source]);
          hi = std::max(hi, dt.vertex[term.source]);
        }
        if (hi - lo > delta) ++span_bad;
      }
    }
    DecompositionResult f = fp_decompose(t, DecomposeConfig::fp_default());
    const DepthTable dt = compute_depths(f.dag);
    for (VertexId v = f.dag.num_inputs(); v < f.dag.size(); ++v)
      for (const WiringTerm& term : f.dag.terms(v).terms())
        if (dt.vertex[term.source] + 1 != dt.vertex[v]) ++layer_bad;
  }
  return {span_bad + layer_bad == 0, "50 targets: MA span violations " + std::to_string(span_bad) +
                                         ", FP layering violations " + std::to_string(layer_bad)};
}

Outcome ac5() {
  GaussianSource g(trial_seed(kSeed, 5));
  std::vector<double> xs(20000);
  for (double& x : xs) x = g();
  double signal = 0.0;
  for (double x : xs) signal += x * x;
  auto sqnr = [&](const std::function<double(double)>& q) {
    double noise = 0.0;
    for (double x : xs) noise += (x - q(x)) * (x - q(x));
    return 10.0 * std::log10(signal / noise);
  };
  std::vector<double> csd, bin;
  for (int d = 1; d <= 6; ++d) csd.push_back(sqnr([d](double x) { return reconstruct(csd_quantize(x, d)); }));
  for (int b = 1; b <= 8; ++b) bin.push_back(sqnr([b](double x) { return binary_quantize(x, b); }));
  const double csd_slope = (csd.back() - csd.front()) / static_cast<double>(csd.size() - 1);
  const double bin_slope = (bin.back() - bin.front()) / static_cast<double>(bin.size() - 1);
  std::string per;
  for (double s : csd) per += fmt(" %.2f", s);
  return {std::fabs(csd_slope - kCsdSlope) <= kCsdSlopeTol &&
              std::fabs(bin_slope - kBinarySlope) <= kBinarySlopeTol,
          "20000 normals: CSD " + fmt("%.2f", csd_slope) + " dB/digit (14.5 +- 1.5; digits 1..6:" + per +
              "), binary " + fmt("%.2f", bin_slope) + " dB/bit (6 +- 1; bits 1..8)"};
}

// Mean-SQNR table for a sweep, one line per grid point.
void print_table(const SweepResult& r) {
  std::printf("      %-10s", to_string(r.spec.grid_kind));
  for (const SweepConfig& c : r.spec.configs) std::printf(" %9s", c.label.c_str());
  std::printf("\n");
  for (std::size_t g = 0; g < r.spec.grid.size(); ++g) {
    std::printf("      %-10g", r.spec.grid[g]);
    for (std::size_t c = 0; c < r.spec.configs.size(); ++c) std::printf(" %9.2f", r.aggregate(c, g).sqnr_db);
    std::printf("\n");
  }
}

std::size_t count_points(const SweepResult& r, const std::function<bool(std::size_t)>& ok) {
  std::size_t n = 0;
  for (std::size_t g = 0; g < r.spec.grid.size(); ++g) n += ok(g);
  return n;
}

std::vector<double> steps(double from, double to, double by) {
  std::vector<double> v;
  for (double x = from; x <= to + 1e-9; x += by) v.push_back(x);
  return v;
}

SweepConfig labelled(const std::string& label, DecomposeConfig c) {
  c.target_sqnr_db = kRunTargetDb;
  return {label, c};
}

Outcome ac6(std::vector<SweepResult>& tables) {
  ExperimentSpec spec;
  spec.rows = 16;
  spec.cols = 4;
  spec.trials = 100;
  spec.seed = kSeed;
  spec.configs = {labelled("ma0", DecomposeConfig::ma_default(0)),
                  labelled("ma1", DecomposeConfig::ma_default(1)),
                  labelled("ma2", DecomposeConfig::ma_default(2)),
                  labelled("mainf", DecomposeConfig::ma_default(std::nullopt)),
                  labelled("fp", DecomposeConfig::fp_default())};
  spec.grid_kind = GridKind::adder_budget;
  spec.grid = steps(400, 2400, 400);
  auto pts = collect_points(spec);
  SweepResult adders = tabulate(spec, pts);
  spec.grid_kind = GridKind::cost_budget;
  spec.grid = steps(1000, 8000, 1000);
  SweepResult total = tabulate(spec, pts);

  auto a = [&](const SweepResult& r, std::size_t c, std::size_t g) { return r.aggregate(c, g).sqnr_db; };
  const std::size_t mono = count_points(adders, [&](std::size_t g) {
    return a(adders, 0, g) <= a(adders, 1, g) && a(adders, 1, g) <= a(adders, 3, g);
  });
  const std::size_t best = count_points(total, [&](std::size_t g) {
    return a(total, 0, g) >= a(total, 1, g) && a(total, 0, g) >= a(total, 2, g) &&
           a(total, 0, g) >= a(total, 4, g);
  });
  const std::size_t na = adders.spec.grid.size(), nt = total.spec.grid.size();
  const bool pa = mono >= kGridFraction * na, pb = best >= kGridFraction * nt;
  tables.push_back(adders);
  tables.push_back(total);
  return {pa && pb, "(a) nondecreasing in dmax over {0,1,inf}: " + std::to_string(mono) + "/" +
                        std::to_string(na) + (pa ? " ok" : " FAIL") + "; (b) ma0 >= ma1, ma2, fp: " +
                        std::to_string(best) + "/" + std::to_string(nt) + (pb ? " ok" : " FAIL") +
                        " (need 80%)"};
}

Outcome ac7(std::vector<SweepResult>& tables) {
  ExperimentSpec spec;
  spec.rows = 64;
  spec.cols = 4;
  spec.trials = 30;
  spec.seed = kSeed;
  spec.configs = {labelled("fs", DecomposeConfig::fs_default()),
                  labelled("fp", DecomposeConfig::fp_default()),
                  labelled("ma0", DecomposeConfig::ma_default(0))};
  spec.grid_kind = GridKind::adder_budget;
  spec.grid = steps(1000, 8000, 1000);
  auto pts = collect_points(spec);
  SweepResult adders = tabulate(spec, pts);
  spec.grid_kind = GridKind::cost_budget;
  spec.grid = steps(2000, 20000, 2000);
  SweepResult total = tabulate(spec, pts);

  auto a = [&](const SweepResult& r, std::size_t c, std::size_t g) { return r.aggregate(c, g).sqnr_db; };
  const std::size_t fs_top = count_points(adders, [&](std::size_t g) {
    return a(adders, 0, g) >= a(adders, 1, g) && a(adders, 0, g) >= a(adders, 2, g);
  });
  const std::size_t dominated = count_points(total, [&](std::size_t g) { return a(total, 2, g) >= a(total, 0, g); });
  const std::size_t ma_fp = count_points(total, [&](std::size_t g) { return a(total, 2, g) >= a(total, 1, g); });
  const std::size_t na = adders.spec.grid.size(), nt = total.spec.grid.size();
  const bool p1 = fs_top == na, p2 = dominated == nt, p3 = ma_fp >= kGridFraction * nt;
  tables.push_back(adders);
  tables.push_back(total);
  return {p1 && p2 && p3,
          "adders-only fs highest: " + std::to_string(fs_top) + "/" + std::to_string(na) +
              (p1 ? " ok" : " FAIL") + "; total-cost ma0 >= fs: " + std::to_string(dominated) + "/" +
              std::to_string(nt) + (p2 ? " ok" : " FAIL") + "; ma0 >= fp: " + std::to_string(ma_fp) + "/" +
              std::to_string(nt) + (p3 ? " ok" : " FAIL") + " (need 80%)"};
}

Outcome ac8() {
  std::size_t differ = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TargetMatrix t = gen_gaussian_matrix(16, 4, trial_seed(kSeed, seed));
    DecomposeConfig m = DecomposeConfig::ma_default(std::nullopt);
    m.depth_penalty = false;
    DecomposeConfig f = m;
    f.algorithm = Algorithm::fs;
    DecompositionResult a = ma_decompose(t, m), b = fs_decompose(t, f);
    bool same = a.dag.size() == b.dag.size();
    for (VertexId v = a.dag.num_inputs(); same && v < a.dag.size(); ++v) same = a.dag.terms(v) == b.dag.terms(v);
    differ += !same;
  }
  return {differ == 0, "20 instances: differing vertex sequences " + std::to_string(differ)};
}

Outcome ac9() {
  std::mt19937_64 rng(kSeed);
  std::normal_distribution<double> g;
  std::size_t bad = 0;
  for (int i = 0; i < 100; ++i) {
    ComputationDag d = random_dag(rng, 1 + rng() % 4, rng() % 30, 1, 3, {-63, 63}, false);
    d.set_num_outputs(1 + rng() % 4);
    for (std::size_t o = 0; o < d.num_outputs(); ++o)
      d.assign_output(o, rng() % 6 == 0 ? OutputSlot::zero()
                                        : OutputSlot::to(rng() % d.size(), ShiftCoefficient(rng() % 2 ? 1 : -1, 0)));
    ComputationDag back = import_dag(export_json(d));
    bool ok = back.size() == d.size() && export_json(back) == export_json(d);
    for (int j = 0; ok && j < 10; ++j) {
      Row x(d.num_inputs());
      for (double& v : x) v = g(rng);
      ok = evaluate_dag(back, x) == evaluate_dag(d, x);
    }
    bad += !ok;
  }
  ExperimentSpec spec;
  spec.rows = 16;
  spec.cols = 4;
  spec.trials = 4;
  spec.seed = kSeed;
  spec.grid_kind = GridKind::cost_budget;
  spec.grid = {1000, 3000};
  spec.configs = {labelled("ma0", DecomposeConfig::ma_default(0)), labelled("fs", DecomposeConfig::fs_default())};
  for (SweepConfig& c : spec.configs) c.config.target_sqnr_db = 40;
  const std::string first = run_sweep(spec).to_csv();
  const std::string second = run_sweep(spec).to_csv();
  spec.threads = 4;
  const std::string threaded = run_sweep(spec).to_csv();
  const bool same = first == second && first == threaded;
  return {bad == 0 && same, "100 DAGs: round-trip failures " + std::to_string(bad) +
                                "; sweep CSV byte-identical across runs/threads: " + (same ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;  // 0: no runtime limit
    std::function<Outcome()> run;
  };
  std::vector<SweepResult> tables;
  const std::vector<Criterion> criteria{
      {"AC1 wiring oracle equivalence", 60, ac1},
      {"AC2 DAG ground truth", 0, ac2},
      {"AC3 cost formulas", 0, ac3},
      {"AC4 depth constraints", 0, ac4},
      {"AC5 CSD / binary slopes", 60, ac5},
      {"AC6 16x4 sweep (dmax ordering, total cost)", 600, [&] { return ac6(tables); }},
      {"AC7 64x4 sweep (fs / fp / ma0)", 1200, [&] { return ac7(tables); }},
      {"AC8 MA reduces to FS", 0, ac8},
      {"AC9 serialization and determinism", 0, ac9},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.1f s", secs);
    if (c.limit_s > 0) {
      timing += fmt(" / limit %.0f s", c.limit_s);
      if (secs >= c.limit_s) {
        o.pass = false;
        timing += " EXCEEDED";
      }
    }
    std::printf("%s %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
    failed += !o.pass;
    for (const SweepResult& r : tables) print_table(r);
    tables.clear();
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
