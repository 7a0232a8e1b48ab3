// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. `--update-golden` rewrites the golden files from the
// current build instead of comparing against them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "clafr/bench.hpp"
#include "clafr/io.hpp"
#include "clafr/metrics.hpp"
#include "clafr/subspace.hpp"
#include "clafr/svd.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace clafr;

namespace {

bool g_update_golden = false;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Removes the trailing ns_per_sample column so only deterministic fields remain.
std::string strip_timing(const std::string& csv) {
  std::string out, line;
  for (char ch : csv) {
    if (ch != '\n') {
      line += ch;
      continue;
    }
    out += line.substr(0, line.rfind(',')) + "\n";
    line.clear();
  }
  return out;
}

Outcome compare_golden(const std::string& name, const std::string& content) {
  const fs::path path = fs::path(CLAFR_GOLDEN_DIR) / name;
  if (g_update_golden) {
    io::write_file_atomic(path, content);
    return {true, "golden rewritten: " + path.string()};
  }
  if (!fs::exists(path)) return {false, "missing golden file " + path.string()};
  if (io::read_text_file(path) != content) return {false, "output differs from " + path.string()};
  return {true, "matches " + name};
}

// 1. e(x) = -sqrt(|z|^2 - S(x)^2) on 10^4 random (z, W, alpha).
Outcome identity_check() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  double worst = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t d = oracle::uniform_int(rng, 2, 128);
    // C < D keeps z off span(U_M); when U_M spans all of R^D the square-root
    // form cancels catastrophically.
    const std::size_t c = oracle::uniform_int(rng, 1, std::min<std::size_t>(32, d - 1));
    SubspaceConfig cfg;
    cfg.alpha = 1.0 - rng.uniform();
    cfg.normalize_features = t % 2 == 0;
    const Subspace s = build_subspace(oracle::random_matrix(rng, d, c), cfg);
    const auto z = oracle::random_vector(rng, d);
    const double zn = cfg.normalize_features ? 1.0 : oracle::naive_norm(z);
    const double score = clafr_score(z, s, cfg);
    const double e = reconstruction_error(z, s, cfg);
    worst = std::max(worst, std::abs(e + std::sqrt(std::max(0.0, zn * zn - score * score))));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 10.0, "max |delta| = " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

// 2. SVD contract on 10^3 random matrices.
Outcome svd_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2002);
  double worst_recon = 0, worst_ortho = 0, worst_eig = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = oracle::uniform_int(rng, 2, 64);
    const std::size_t c = oracle::uniform_int(rng, 1, d);
    const Matrix w = oracle::random_matrix(rng, d, c);
    const SvdFactors f = svd(w);
    worst_recon = std::max(worst_recon, frobenius_distance(reconstruct(f), w) / frobenius_norm(w));
    worst_ortho = std::max({worst_ortho, orthonormality_defect(f.u), orthonormality_defect(f.v)});
    const auto ev = oracle::gram_eigenvalues(w);
    for (std::size_t i = 0; i < ev.size(); ++i) {
      worst_eig = std::max(worst_eig, std::abs(f.sigma[i] * f.sigma[i] - ev[i]) / ev[i]);
    }
  }
  const double secs = seconds_since(t0);
  const bool ok = worst_recon <= 1e-10 && worst_ortho <= 1e-10 && worst_eig <= 1e-8 && secs < 60.0;
  return {ok, "recon " + fmt("%.3g", worst_recon) + ", ortho " + fmt("%.3g", worst_ortho) + ", eig rel " +
                  fmt("%.3g", worst_eig) + ", " + fmt("%.2f", secs) + " s"};
}

// 3. select_m against the scan oracle.
Outcome select_m_check() {
  struct Fixture {
    std::vector<double> sigma;
    double alpha;
    std::size_t m;
  };
  const std::vector<Fixture> fixtures{{{1, 1}, 0.9, 2}, {{9, 1}, 0.9, 2}, {{5, 3, 2}, 0.5, 2}, {{10, 0.1, 0.1}, 0.9, 1}};
  std::size_t mismatches = 0;
  for (const auto& f : fixtures) {
    const std::size_t got = select_m(Vector(f.sigma), f.alpha);
    if (got != f.m || got != oracle::scan_select_m(f.sigma, f.alpha)) ++mismatches;
  }
  Rng rng(3003);
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> s(oracle::uniform_int(rng, 1, 64));
    for (double& x : s) {
      // Mix of continuous values and small integers so ties and exact
      // boundary hits occur.
      x = t % 3 == 0 ? static_cast<double>(rng.next_u64() % 5) : std::abs(rng.normal());
    }
    s[0] += 1.0;
    std::sort(s.begin(), s.end(), std::greater<>());
    const double alpha = t % 7 == 0 ? 1.0 : (t % 3 == 0 ? 0.05 * static_cast<double>(1 + rng.next_u64() % 20)
                                                         : 1.0 - rng.uniform());
    if (select_m(Vector(s), alpha) != oracle::scan_select_m(s, alpha)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 10004 cases"};
}

// 4. AUROC and FPR@95 against brute-force oracles.
Outcome metric_oracles() {
  Rng rng(4004);
  std::size_t auroc_bad = 0, fpr_bad = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n_id = oracle::uniform_int(rng, 1, 1000);
    const std::size_t n_ood = oracle::uniform_int(rng, 1, 1000);
    std::vector<double> id(n_id), ood(n_ood);
    const bool discrete = t % 2 == 0;
    for (double& x : id) x = discrete ? static_cast<double>(rng.next_u64() % 50) : rng.normal() + 0.5;
    for (double& x : ood) x = discrete ? static_cast<double>(rng.next_u64() % 40) : rng.normal();
    if (auroc(id, ood) != oracle::pairwise_auroc(id, ood)) ++auroc_bad;
    const FprAtTpr got = fpr_at_tpr(id, ood, 0.95);
    const auto want = oracle::threshold_scan(id, ood, 0.95);
    if (got.fpr != want.fpr || got.tau != want.tau) ++fpr_bad;
  }
  return {auroc_bad == 0 && fpr_bad == 0,
          std::to_string(auroc_bad) + " AUROC and " + std::to_string(fpr_bad) + " FPR mismatches over 500 pairs"};
}

// 5. Scores depend only on span(U_M), and span(U_M) is unchanged by W -> W Q.
Outcome invariance_check() {
  Rng rng(5005);
  double worst_basis = 0, worst_class = 0, worst_proj = 0;
  SubspaceConfig raw;
  raw.normalize_features = false;
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = oracle::uniform_int(rng, 2, 64);
    const std::size_t c = oracle::uniform_int(rng, 1, std::min<std::size_t>(d, 32));
    const Subspace s = build_subspace(oracle::random_matrix(rng, d, c), SubspaceConfig{});
    const Subspace rotated(matmul(s.basis(), oracle::random_orthogonal(rng, s.m())), s.alpha_used(), s.sigma(),
                           s.weight_fingerprint());
    for (int i = 0; i < 10; ++i) {
      const auto z = oracle::random_vector(rng, d);
      worst_basis = std::max(worst_basis, std::abs(clafr_score(z, s, raw) - clafr_score(z, rotated, raw)));
    }
  }
  int trials = 0;
  while (trials < 100) {
    const std::size_t d = oracle::uniform_int(rng, 3, 64);
    const std::size_t c = oracle::uniform_int(rng, 2, std::min<std::size_t>(d, 32));
    const Matrix w = oracle::random_matrix(rng, d, c);
    SubspaceConfig cfg;
    cfg.alpha = 0.6 + 0.35 * rng.uniform();
    const Subspace s = build_subspace(w, cfg);
    // Only non-degenerate cuts: a clear gap after sigma_m (or m = full rank).
    if (s.m() < c && s.sigma()[s.m() - 1] - s.sigma()[s.m()] < 1e-3 * s.sigma()[0]) continue;
    ++trials;
    const Subspace sq = build_subspace(matmul(w, oracle::random_orthogonal(rng, c)), cfg);
    if (sq.m() != s.m()) {
      worst_proj = INFINITY;
      continue;
    }
    worst_proj = std::max(worst_proj, oracle::projector_distance(s.basis(), sq.basis()));
    for (int i = 0; i < 10; ++i) {
      const auto z = oracle::random_vector(rng, d);
      worst_class = std::max(worst_class, std::abs(clafr_score(z, s, cfg) - clafr_score(z, sq, cfg)));
    }
  }
  const bool ok = worst_basis <= 1e-8 && worst_class <= 1e-8 && worst_proj <= 1e-8;
  return {ok, "basis " + fmt("%.3g", worst_basis) + ", class-rotation score " + fmt("%.3g", worst_class) +
                  ", projector " + fmt("%.3g", worst_proj)};
}

// 6. Golden report for the default seeded benchmark, plus the file-based
// route reproducing it.
Outcome golden_report() {
  const auto methods = parse_method_list("all");
  const std::string first = strip_timing(render_report_csv(run_benchmark(synthetic_inputs(SynthConfig{}), methods)));
  const std::string second = strip_timing(render_report_csv(run_benchmark(synthetic_inputs(SynthConfig{}), methods)));
  if (first != second) return {false, "re-run differs"};

  // Export the same data as TensorFiles and load it back through a manifest.
  const fs::path dir = fs::temp_directory_path() / "clafr_acceptance_export";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const BenchmarkInputs in = synthetic_inputs(SynthConfig{});
  io::write_tensor(io::Tensor(in.weights), io::DType::kF64, dir / "w.ctf");
  io::write_tensor(io::Tensor(in.id_features), io::DType::kF64, dir / "id.ctf");
  io::write_tensor(io::Tensor(in.ood_features.front().second), io::DType::kF64, dir / "ood.ctf");
  io::write_tensor(io::Tensor(*in.bank), io::DType::kF64, dir / "bank.ctf");
  io::write_file_atomic(dir / "manifest.txt",
                        "weights = w.ctf\nid_features = id.ctf\nood.synthetic = ood.ctf\nbank = bank.ctf\n");
  const std::string via_files =
      strip_timing(render_report_csv(run_benchmark(dataset_inputs(io::load_manifest(dir / "manifest.txt")), methods)));
  fs::remove_all(dir);
  if (via_files != first) return {false, "manifest route differs from in-memory route"};

  Outcome g = compare_golden("synth_default_report.csv", first);
  const auto clafr_line = first.substr(first.find("clafr,"), first.find('\n', first.find("clafr,")) - first.find("clafr,"));
  g.detail += " (" + clafr_line + ")";
  return g;
}

// 7. ClaFR per-sample time flat in N_tr, KNN time growing with it.
Outcome complexity_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t ntr[] = {1000, 10000, 100000};
  const Method methods[] = {Method::kClafr, Method::kKnn};
  TimingOptions opt;
  opt.queries = 200;
  opt.repetitions = 7;
  opt.min_pass_ns = 5e7;
  const auto rows = time_vs_bank_size(SynthConfig{}, ntr, methods, opt);
  std::vector<double> clafr_t, knn_t;
  for (const auto& r : rows) (r.method == "clafr" ? clafr_t : knn_t).push_back(r.ns_per_sample);
  const double clafr_spread = *std::max_element(clafr_t.begin(), clafr_t.end()) /
                              *std::min_element(clafr_t.begin(), clafr_t.end());
  const double knn_growth = knn_t.back() / knn_t.front();
  const double secs = seconds_since(t0);
  std::string detail = "clafr ns/sample";
  for (double x : clafr_t) detail += " " + fmt("%.0f", x);
  detail += " (spread " + fmt("%.2f", clafr_spread) + "x), knn";
  for (double x : knn_t) detail += " " + fmt("%.0f", x);
  detail += " (growth " + fmt("%.1f", knn_growth) + "x), " + fmt("%.1f", secs) + " s";
  return {clafr_spread <= 2.0 && knn_growth >= 10.0 && secs < 300.0, detail};
}

// 8. Alpha sweep on the default seeded config.
Outcome ablation_check() {
  const std::vector<double> alphas{0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99};
  const AblationSweep a = ablate_alpha(SynthConfig{}, alphas);
  const AblationSweep b = ablate_alpha(SynthConfig{}, alphas);
  const std::string csv = render_ablation_csv(a);
  if (csv != render_ablation_csv(b)) return {false, "re-run differs"};
  for (std::size_t i = 1; i < a.points.size(); ++i) {
    if (a.points[i].m < a.points[i - 1].m) return {false, "m decreases at alpha " + fmt("%.2f", a.points[i].alpha)};
  }
  Outcome g = compare_golden("ablation_default.csv", csv);
  g.detail += " (m " + std::to_string(a.points.front().m) + " -> " + std::to_string(a.points.back().m) + ")";
  return g;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--update-golden") g_update_golden = true;
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1 reconstruction-error / projection-norm identity", identity_check},
      {"AC2 SVD contract suite", svd_suite},
      {"AC3 select_m vs scan oracle", select_m_check},
      {"AC4 AUROC / FPR@95 vs brute-force oracles", metric_oracles},
      {"AC5 basis and class-rotation invariance", invariance_check},
      {"AC6 golden synthetic benchmark report", golden_report},
      {"AC7 constant vs linear per-sample cost", complexity_check},
      {"AC8 alpha ablation sweep", ablation_check},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o{false, ""};
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
