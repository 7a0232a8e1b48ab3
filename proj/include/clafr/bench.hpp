#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clafr/io.hpp"
#include "clafr/metrics.hpp"
#include "clafr/subspace.hpp"
#include "clafr/synth.hpp"

namespace clafr {

enum class Method { kClafr, kMsp, kEnergy, kMaxLogit, kKnn };

std::string method_name(Method m);
/// Throws ConfigError for an unknown name.
Method parse_method(const std::string& name);
/// Comma-separated names; "all" expands to every method.
std::vector<Method> parse_method_list(const std::string& list);

/// Everything a benchmark run scores. Logits are derived from features·W
/// when not supplied.
struct BenchmarkInputs {
  Matrix weights;
  Matrix id_features;
  std::vector<std::pair<std::string, Matrix>> ood_features;
  std::optional<Matrix> id_logits;
  std::map<std::string, Matrix> ood_logits;
  std::optional<Matrix> bank;
  std::size_t k = 10;
  SubspaceConfig subspace;
};

/// Seeded synthetic data, the nearest-class-mean W, and the training
/// features as KNN bank. The OOD set is named "synthetic".
BenchmarkInputs synthetic_inputs(const SynthConfig& cfg, const SubspaceConfig& subspace = {});
BenchmarkInputs dataset_inputs(const io::DatasetManifest& manifest);

/// One EvalReport per (method, OOD set), in method-major order. Timing is
/// the median per-sample time over `repetitions` (≥ 3) scoring passes.
/// Throws ConfigError when KNN is requested without a bank.
std::vector<EvalReport> run_benchmark(const BenchmarkInputs& in, std::span<const Method> methods,
                                      int repetitions = 3);

struct AblationPoint {
  double alpha = 0.0;
  std::size_t m = 0;
  EvalReport report;
};

struct AblationSweep {
  std::vector<double> alphas;
  std::vector<AblationPoint> points;  // alpha-major, then OOD set
};

/// ClaFR evaluated at every alpha with a single SVD of W. Alphas must be
/// strictly increasing and inside (0, 1].
AblationSweep ablate_alpha(const BenchmarkInputs& in, std::span<const double> alphas);
AblationSweep ablate_alpha(const SynthConfig& cfg, std::span<const double> alphas);

inline constexpr const char* kAblationCsvHeader = "alpha,m,method,ood_set,auroc,fpr95,tau,n_id,n_ood";
/// Carries no timing, so equal inputs give byte-identical output.
std::string render_ablation_csv(const AblationSweep& sweep);

struct TimingRow {
  std::string method;
  std::size_t n_tr = 0;
  double ns_per_sample = 0.0;
};

struct TimingOptions {
  std::size_t queries = 100;
  int repetitions = 5;
  /// Each repetition re-scores the queries until at least this much time passes.
  double min_pass_ns = 2e7;
};

/// Per-sample scoring time of each method as the training set (and so the
/// KNN bank) grows. The base config's n_train is replaced by each n_tr.
std::vector<TimingRow> time_vs_bank_size(const SynthConfig& base, std::span<const std::size_t> n_tr_values,
                                         std::span<const Method> methods, const TimingOptions& opt = {});

inline constexpr const char* kTimingCsvHeader = "method,n_tr,ns_per_sample";
std::string render_timing_csv(std::span<const TimingRow> rows);

}  // namespace clafr
