#include "clafr/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "clafr/baselines.hpp"
#include "clafr/error.hpp"

namespace clafr {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

LogitMethod as_logit_method(Method m) {
  switch (m) {
    case Method::kMsp:
      return LogitMethod::kMsp;
    case Method::kEnergy:
      return LogitMethod::kEnergy;
    default:
      return LogitMethod::kMaxLogit;
  }
}

// Scores one feature matrix (or its logits) with a prepared method.
using BatchScorer = std::function<ScoredBatch(const Matrix& features, const Matrix* logits)>;

BatchScorer make_scorer(Method method, const BenchmarkInputs& in, std::optional<Subspace>& subspace,
                        std::optional<FeatureBank>& bank) {
  switch (method) {
    case Method::kClafr:
      if (!subspace) subspace.emplace(build_subspace(in.weights, in.subspace));
      return [&in, &subspace](const Matrix& z, const Matrix*) { return score_batch(z, *subspace, in.subspace); };
    case Method::kKnn:
      if (!in.bank) throw ConfigError("knn requested without a feature bank");
      if (!bank) bank.emplace(*in.bank, "bank");
      return [&in, &bank](const Matrix& z, const Matrix*) { return score_knn(z, *bank, in.k); };
    default: {
      const LogitMethod lm = as_logit_method(method);
      return [&in, lm](const Matrix& z, const Matrix* logits) {
        if (logits) return score_logits(*logits, lm);
        return score_logits(logits_from_features(z, in.weights), lm);
      };
    }
  }
}

std::string fixed(double x, const char* fmt) {
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, x);
  return buf;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::kClafr:
      return "clafr";
    case Method::kMsp:
      return "msp";
    case Method::kEnergy:
      return "energy";
    case Method::kMaxLogit:
      return "maxlogit";
    case Method::kKnn:
      return "knn";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::kClafr, Method::kMsp, Method::kEnergy, Method::kMaxLogit, Method::kKnn}) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown method '" + name + "' (expected clafr, msp, energy, maxlogit or knn)");
}

std::vector<Method> parse_method_list(const std::string& list) {
  std::vector<Method> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "all") {
      out.insert(out.end(), {Method::kClafr, Method::kMsp, Method::kEnergy, Method::kMaxLogit, Method::kKnn});
    } else {
      out.push_back(parse_method(item));
    }
  }
  if (out.empty()) throw ConfigError("empty method list");
  return out;
}

BenchmarkInputs synthetic_inputs(const SynthConfig& cfg, const SubspaceConfig& subspace) {
  SynthData data = generate(cfg);
  BenchmarkInputs in;
  in.weights = fit_linear_classifier(data.train_features, data.train_labels, cfg.c);
  in.id_features = std::move(data.id_test);
  in.ood_features.emplace_back("synthetic", std::move(data.ood_test));
  in.bank = std::move(data.train_features);
  in.k = std::min<std::size_t>(10, cfg.n_train);
  in.subspace = subspace;
  return in;
}

BenchmarkInputs dataset_inputs(const io::DatasetManifest& manifest) {
  io::DatasetTensors t = io::load_dataset(manifest);
  BenchmarkInputs in;
  in.weights = std::move(t.weights);
  in.id_features = std::move(t.id_features);
  in.ood_features = std::move(t.ood_features);
  in.id_logits = std::move(t.id_logits);
  in.ood_logits = std::move(t.ood_logits);
  in.bank = std::move(t.bank);
  in.k = manifest.k;
  in.subspace.alpha = manifest.alpha;
  in.subspace.normalize_features = manifest.normalize;
  return in;
}

std::vector<EvalReport> run_benchmark(const BenchmarkInputs& in, std::span<const Method> methods,
                                      int repetitions) {
  repetitions = std::max(repetitions, 3);
  for (Method m : methods) {
    if (m == Method::kKnn && !in.bank) throw ConfigError("knn requested without a feature bank");
  }
  // Supplied logits are used only when every set has them; otherwise all
  // logits come from features·W.
  bool use_logits = in.id_logits.has_value();
  for (const auto& [name, _] : in.ood_features) use_logits = use_logits && in.ood_logits.contains(name);

  std::optional<Subspace> subspace;
  std::optional<FeatureBank> bank;
  std::vector<EvalReport> reports;
  for (Method method : methods) {
    BatchScorer scorer = make_scorer(method, in, subspace, bank);
    auto timed = [&](const Matrix& z, const Matrix* logits) {
      ScoredBatch first = scorer(z, logits);
      std::vector<double> elapsed{first.elapsed_ns};
      for (int r = 1; r < repetitions; ++r) elapsed.push_back(scorer(z, logits).elapsed_ns);
      first.elapsed_ns = median(std::move(elapsed));
      return first;
    };

    const ScoredBatch id = timed(in.id_features, use_logits ? &*in.id_logits : nullptr);
    for (const auto& [name, ood_z] : in.ood_features) {
      const ScoredBatch ood = timed(ood_z, use_logits ? &in.ood_logits.at(name) : nullptr);
      reports.push_back(evaluate(id, ood, name));
    }
  }
  return reports;
}

AblationSweep ablate_alpha(const BenchmarkInputs& in, std::span<const double> alphas) {
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] <= 1.0)) throw ConfigError("ablation alphas must lie in (0, 1]");
    if (i > 0 && !(alphas[i] > alphas[i - 1])) throw ConfigError("ablation alphas must be strictly increasing");
  }
  const SvdFactors factors = svd(in.weights);
  const std::uint64_t fingerprint = content_hash(in.weights);
  AblationSweep sweep;
  sweep.alphas.assign(alphas.begin(), alphas.end());
  for (double alpha : alphas) {
    SubspaceConfig cfg = in.subspace;
    cfg.alpha = alpha;
    cfg.m_override.reset();
    const Subspace s = build_subspace(factors, fingerprint, cfg);
    const ScoredBatch id = score_batch(in.id_features, s, cfg);
    for (const auto& [name, ood_z] : in.ood_features) {
      AblationPoint p{alpha, s.m(), evaluate(id, score_batch(ood_z, s, cfg), name)};
      sweep.points.push_back(std::move(p));
    }
  }
  return sweep;
}

AblationSweep ablate_alpha(const SynthConfig& cfg, std::span<const double> alphas) {
  return ablate_alpha(synthetic_inputs(cfg), alphas);
}

std::string render_ablation_csv(const AblationSweep& sweep) {
  std::string out = std::string(kAblationCsvHeader) + "\n";
  for (const auto& p : sweep.points) {
    const EvalReport& r = p.report;
    out += fixed(p.alpha, "%.4g") + "," + std::to_string(p.m) + "," + r.method + "," + r.ood_set + "," +
           percent(r.auroc) + "," + percent(r.fpr) + "," + fixed(r.tau, "%.6g") + "," +
           std::to_string(r.n_id) + "," + std::to_string(r.n_ood) + "\n";
  }
  return out;
}

std::vector<TimingRow> time_vs_bank_size(const SynthConfig& base, std::span<const std::size_t> n_tr_values,
                                         std::span<const Method> methods, const TimingOptions& opt) {
  std::vector<TimingRow> rows;
  for (std::size_t n_tr : n_tr_values) {
    SynthConfig cfg = base;
    cfg.n_train = n_tr;
    cfg.n_id_test = opt.queries;
    cfg.n_ood_test = 0;
    const BenchmarkInputs in = synthetic_inputs(cfg);
    std::optional<Subspace> subspace;
    std::optional<FeatureBank> bank;
    for (Method method : methods) {
      BatchScorer scorer = make_scorer(method, in, subspace, bank);
      std::vector<double> per_sample;
      for (int r = 0; r < std::max(opt.repetitions, 3); ++r) {
        double elapsed = 0.0;
        std::size_t passes = 0;
        do {
          elapsed += scorer(in.id_features, nullptr).elapsed_ns;
          ++passes;
        } while (elapsed < opt.min_pass_ns);
        per_sample.push_back(elapsed / static_cast<double>(passes * in.id_features.rows()));
      }
      rows.push_back(TimingRow{method_name(method), n_tr, median(std::move(per_sample))});
    }
  }
  return rows;
}

std::string render_timing_csv(std::span<const TimingRow> rows) {
  std::string out = std::string(kTimingCsvHeader) + "\n";
  for (const auto& r : rows) {
    out += r.method + "," + std::to_string(r.n_tr) + "," + fixed(r.ns_per_sample, "%.1f") + "\n";
  }
  return out;
}

}  // namespace clafr
