// clafr: class-known subspace OOD scoring from the command line.
//
// Exit codes: 0 success, 2 input/format/usage, 3 numerical, 4 misuse
// (fingerprint mismatch).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clafr/baselines.hpp"
#include "clafr/bench.hpp"
#include "clafr/error.hpp"
#include "clafr/io.hpp"
#include "clafr/metrics.hpp"
#include "clafr/subspace.hpp"
#include "clafr/synth.hpp"

namespace fs = std::filesystem;
using namespace clafr;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitMisuse = 4;

fs::path meta_path(const fs::path& p) {
  fs::path m = p;
  m += ".meta";
  return m;
}

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::istringstream cell(item);
    T v{};
    if (!(cell >> v) || !cell.eof()) throw ConfigError("bad list element '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::string join_doubles(std::span<const double> v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : ",") + io::format_double(x);
  return out;
}

void add_synth_flags(CLI::App* cmd, SynthConfig& cfg) {
  cmd->add_option("--d", cfg.d, "Feature dimension")->capture_default_str();
  cmd->add_option("--c", cfg.c, "Number of classes")->capture_default_str();
  cmd->add_option("--n-train", cfg.n_train, "Training samples")->capture_default_str();
  cmd->add_option("--n-id", cfg.n_id_test, "ID test samples")->capture_default_str();
  cmd->add_option("--n-ood", cfg.n_ood_test, "OOD test samples")->capture_default_str();
  cmd->add_option("--class-sep", cfg.class_sep, "Distance between class means")->capture_default_str();
  cmd->add_option("--ood-shift", cfg.ood_shift, "Offset of the OOD cluster")->capture_default_str();
  cmd->add_option("--noise", cfg.noise_sigma, "Isotropic noise std")->capture_default_str();
}

// Sidecar of a subspace file.
void write_subspace(const Subspace& s, const fs::path& out) {
  io::KeyValues kv{{"alpha", io::format_double(s.alpha_used())},
                   {"m", std::to_string(s.m())},
                   {"dim", std::to_string(s.dim())},
                   {"sigma", join_doubles(s.sigma().values())},
                   {"weight_hash", hash_hex(s.weight_fingerprint())}};
  const std::string meta = io::render_key_values(kv);
  io::write_tensor(io::Tensor(s.basis()), io::DType::kF64, out);
  io::write_file_atomic(meta_path(out), meta);
}

Subspace read_subspace(const fs::path& path) {
  Matrix basis = io::read_matrix(path);
  const io::KeyValues kv = io::parse_key_values(io::read_text_file(meta_path(path)));
  std::optional<double> alpha;
  std::optional<std::vector<double>> sigma;
  std::optional<std::uint64_t> hash;
  for (const auto& [k, v] : kv) {
    if (k == "alpha") alpha = parse_list<double>(v).front();
    if (k == "sigma") sigma = parse_list<double>(v);
    if (k == "weight_hash") hash = std::stoull(v, nullptr, 16);
  }
  if (!alpha || !sigma || !hash) throw ConfigError(meta_path(path).string() + ": incomplete subspace sidecar");
  return Subspace(std::move(basis), *alpha, Vector(std::move(*sigma)), *hash);
}

void write_scores(const ScoredBatch& b, const fs::path& out) {
  io::KeyValues kv = b.fingerprint.to_key_values();
  kv.emplace_back("n", std::to_string(b.size()));
  kv.emplace_back("elapsed_ns", io::format_double(b.elapsed_ns));
  const std::string meta = io::render_key_values(kv);
  io::write_tensor(io::Tensor(b.scores), io::DType::kF64, out);
  io::write_file_atomic(meta_path(out), meta);
}

ScoredBatch read_scores(const fs::path& path) {
  ScoredBatch b{io::read_vector(path), Fingerprint{"external", {}, {}, {}, {}, {}}, 0.0};
  const fs::path meta = meta_path(path);
  if (fs::exists(meta)) {
    const io::KeyValues kv = io::parse_key_values(io::read_text_file(meta));
    b.fingerprint = Fingerprint::from_key_values(kv);
    for (const auto& [k, v] : kv) {
      if (k == "elapsed_ns") b.elapsed_ns = parse_list<double>(v).front();
    }
  }
  return b;
}

// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string weights, out;
  double alpha = kDefaultAlpha;
  std::optional<std::size_t> m;
};

int run_decompose(const DecomposeArgs& a) {
  SubspaceConfig cfg;
  cfg.alpha = a.alpha;
  cfg.m_override = a.m;
  cfg.validate();
  const Matrix w = io::read_matrix(a.weights);
  const Subspace s = build_subspace(w, cfg);
  write_subspace(s, a.out);
  std::cout << "m = " << s.m() << " of " << s.sigma().size() << " (D = " << s.dim() << ")\n";
  return 0;
}

struct ScoreArgs {
  std::string features, subspace, weights, logits, bank, out;
  std::string method = "clafr";
  double alpha = kDefaultAlpha;
  std::optional<std::size_t> m;
  bool no_normalize = false;
  std::size_t k = kDefaultKnnK;
};

int run_score(const ScoreArgs& a) {
  const Method method = parse_method(a.method);
  switch (method) {
    case Method::kClafr:
      if (a.features.empty()) throw ConfigError("clafr needs --features");
      if (a.subspace.empty() == a.weights.empty()) throw ConfigError("clafr needs exactly one of --subspace or --weights");
      break;
    case Method::kKnn:
      if (a.bank.empty()) throw ConfigError("knn needs --bank");
      if (a.features.empty()) throw ConfigError("knn needs --features");
      break;
    default:
      if (a.logits.empty() && (a.features.empty() || a.weights.empty())) {
        throw ConfigError(a.method + " needs --logits, or --features with --weights");
      }
  }
  SubspaceConfig cfg;
  cfg.alpha = a.alpha;
  cfg.m_override = a.m;
  cfg.normalize_features = !a.no_normalize;
  cfg.validate();

  ScoredBatch batch;
  switch (method) {
    case Method::kClafr: {
      const Matrix z = io::read_matrix(a.features);
      const Subspace s = a.subspace.empty() ? build_subspace(io::read_matrix(a.weights), cfg)
                                            : read_subspace(a.subspace);
      if (z.cols() != s.dim()) {
        throw ShapeError("features have D = " + std::to_string(z.cols()) + ", expected " + std::to_string(s.dim()));
      }
      batch = score_batch(z, s, cfg);
      break;
    }
    case Method::kKnn: {
      const Matrix z = io::read_matrix(a.features);
      const FeatureBank bank(io::read_matrix(a.bank), a.bank);
      if (z.cols() != bank.dim()) {
        throw ShapeError("features have D = " + std::to_string(z.cols()) + ", bank has " + std::to_string(bank.dim()));
      }
      batch = score_knn(z, bank, a.k);
      break;
    }
    default: {
      const LogitMethod lm = method == Method::kMsp      ? LogitMethod::kMsp
                             : method == Method::kEnergy ? LogitMethod::kEnergy
                                                         : LogitMethod::kMaxLogit;
      Matrix logits;
      if (!a.logits.empty()) {
        logits = io::read_matrix(a.logits);
      } else {
        const Matrix z = io::read_matrix(a.features);
        const Matrix w = io::read_matrix(a.weights);
        if (z.cols() != w.rows()) {
          throw ShapeError("features have D = " + std::to_string(z.cols()) + ", weights expect " +
                           std::to_string(w.rows()));
        }
        logits = logits_from_features(z, w);
      }
      batch = score_logits(logits, lm);
    }
  }
  write_scores(batch, a.out);
  return 0;
}

struct EvalArgs {
  std::string id_scores, out;
  std::vector<std::string> ood_scores;
  double tpr = kDefaultTpr;
};

int run_eval(const EvalArgs& a) {
  if (!(a.tpr > 0.0 && a.tpr <= 1.0)) throw ConfigError("--tpr must lie in (0, 1]");
  const ScoredBatch id = read_scores(a.id_scores);
  std::vector<EvalReport> rows;
  for (const auto& path : a.ood_scores) {
    const ScoredBatch ood = read_scores(path);
    rows.push_back(evaluate(id, ood, fs::path(path).stem().string(), a.tpr));
  }
  if (rows.size() > 1) rows.push_back(average_row(rows));
  const std::string csv = render_report_csv(rows);
  if (!a.out.empty()) io::write_file_atomic(a.out, csv);
  std::cout << render_report_table(rows);
  return 0;
}

BenchmarkInputs inputs_for(const std::optional<std::uint64_t>& seed, const std::string& manifest,
                           SynthConfig cfg, const SubspaceConfig& sub) {
  if (!manifest.empty()) {
    BenchmarkInputs in = dataset_inputs(io::load_manifest(manifest));
    in.subspace.m_override = sub.m_override;
    return in;
  }
  cfg.seed = *seed;
  return synthetic_inputs(cfg, sub);
}

struct AblateArgs {
  std::optional<std::uint64_t> seed;
  std::string manifest, out;
  std::string alphas = "0.70,0.75,0.80,0.85,0.90,0.95,0.99";
  bool no_normalize = false;
  SynthConfig synth;
};

int run_ablate(const AblateArgs& a) {
  if (!a.seed && a.manifest.empty()) throw ConfigError("ablate needs --seed or --manifest");
  const std::vector<double> alphas = parse_list<double>(a.alphas);
  SubspaceConfig sub;
  sub.normalize_features = !a.no_normalize;
  BenchmarkInputs in = inputs_for(a.seed, a.manifest, a.synth, sub);
  if (a.manifest.empty()) in.subspace.normalize_features = !a.no_normalize;
  const std::string csv = render_ablation_csv(ablate_alpha(in, alphas));
  if (!a.out.empty()) io::write_file_atomic(a.out, csv);
  std::cout << csv;
  return 0;
}

struct BenchArgs {
  std::optional<std::uint64_t> seed;
  std::string manifest, out, ntr;
  std::string methods = "all";
  double alpha = kDefaultAlpha;
  bool no_normalize = false;
  int reps = 3;
  std::size_t queries = 100;
  SynthConfig synth;
};

int run_bench(const BenchArgs& a) {
  if (!a.seed && a.manifest.empty()) throw ConfigError("bench needs --seed (or --manifest)");
  const std::vector<Method> methods = parse_method_list(a.methods);
  SubspaceConfig sub;
  sub.alpha = a.alpha;
  sub.normalize_features = !a.no_normalize;
  sub.validate();
  std::string csv;
  if (!a.ntr.empty()) {
    if (!a.seed) throw ConfigError("--ntr timing runs need --seed");
    SynthConfig cfg = a.synth;
    cfg.seed = *a.seed;
    TimingOptions opt;
    opt.queries = a.queries;
    opt.repetitions = std::max(a.reps, 3);
    const auto rows = time_vs_bank_size(cfg, parse_list<std::size_t>(a.ntr), methods, opt);
    csv = render_timing_csv(rows);
    std::cout << csv;
  } else {
    const BenchmarkInputs in = inputs_for(a.seed, a.manifest, a.synth, sub);
    const auto reports = run_benchmark(in, methods, a.reps);
    csv = render_report_csv(reports);
    std::cout << render_report_table(reports);
  }
  if (!a.out.empty()) io::write_file_atomic(a.out, csv);
  return 0;
}

struct GenArgs {
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  SynthConfig synth;
};

int run_gen(const GenArgs& a) {
  SynthConfig cfg = a.synth;
  cfg.seed = *a.seed;
  cfg.validate();
  const SynthData data = generate(cfg);
  const Matrix w = fit_linear_classifier(data.train_features, data.train_labels, cfg.c);
  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  std::vector<double> labels(data.train_labels.begin(), data.train_labels.end());
  io::write_tensor(io::Tensor(data.train_features), io::DType::kF64, dir / "train_features.ctf");
  io::write_tensor(io::Tensor(Vector(std::move(labels))), io::DType::kF64, dir / "train_labels.ctf");
  io::write_tensor(io::Tensor(data.id_test), io::DType::kF64, dir / "id_features.ctf");
  io::write_tensor(io::Tensor(data.ood_test), io::DType::kF64, dir / "ood_features.ctf");
  io::write_tensor(io::Tensor(w), io::DType::kF64, dir / "weights.ctf");
  const io::KeyValues manifest{{"weights", "weights.ctf"},
                               {"id_features", "id_features.ctf"},
                               {"ood.synthetic", "ood_features.ctf"},
                               {"bank", "train_features.ctf"},
                               {"alpha", "0.9"},
                               {"normalize", "true"}};
  io::write_file_atomic(dir / "manifest.txt",
                        "# synthetic fixture, seed " + std::to_string(cfg.seed) + "\n" + io::render_key_values(manifest));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Class-known subspace OOD scoring"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "Build the class-known subspace from classifier weights");
  c_dec->add_option("--weights", dec.weights, "D x C weight tensor")->required();
  c_dec->add_option("--alpha", dec.alpha, "Cumulative singular-value ratio")->capture_default_str();
  c_dec->add_option("--m", dec.m, "Fixed subspace dimension (overrides --alpha)");
  c_dec->add_option("--out", dec.out, "Output subspace tensor (sidecar written to OUT.meta)")->required();

  ScoreArgs sc;
  auto* c_score = app.add_subcommand("score", "Score a feature batch");
  c_score->add_option("--features", sc.features, "N x D feature tensor");
  c_score->add_option("--subspace", sc.subspace, "Subspace from 'decompose'");
  c_score->add_option("--weights", sc.weights, "D x C weight tensor");
  c_score->add_option("--alpha", sc.alpha, "Cumulative singular-value ratio")->capture_default_str();
  c_score->add_option("--m", sc.m, "Fixed subspace dimension");
  c_score->add_flag("--no-normalize", sc.no_normalize, "Project raw features");
  c_score->add_option("--method", sc.method, "clafr, msp, energy, maxlogit or knn")->capture_default_str();
  c_score->add_option("--logits", sc.logits, "N x C logit tensor for logit methods");
  c_score->add_option("--bank", sc.bank, "Training feature bank for knn");
  c_score->add_option("--k", sc.k, "Neighbour rank for knn")->capture_default_str();
  c_score->add_option("--out", sc.out, "Output score tensor (fingerprint in OUT.meta)")->required();

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "AUROC and FPR@TPR for ID vs OOD score files");
  c_eval->add_option("--id-scores", ev.id_scores, "ID score tensor")->required();
  c_eval->add_option("--ood-scores", ev.ood_scores, "One or more OOD score tensors")->required();
  c_eval->add_option("--tpr", ev.tpr, "TPR operating point")->capture_default_str();
  c_eval->add_option("--out", ev.out, "Report CSV");

  AblateArgs ab;
  auto* c_ab = app.add_subcommand("ablate", "Sweep alpha on synthetic or manifest data");
  c_ab->add_option("--seed", ab.seed, "Synthetic seed");
  c_ab->add_option("--manifest", ab.manifest, "Dataset manifest instead of synthetic data");
  c_ab->add_option("--alphas", ab.alphas, "Comma-separated, strictly increasing")->capture_default_str();
  c_ab->add_flag("--no-normalize", ab.no_normalize, "Project raw features");
  c_ab->add_option("--out", ab.out, "Ablation CSV");
  add_synth_flags(c_ab, ab.synth);

  BenchArgs be;
  auto* c_be = app.add_subcommand("bench", "Evaluate methods, or time them against bank size with --ntr");
  c_be->add_option("--seed", be.seed, "Synthetic seed");
  c_be->add_option("--manifest", be.manifest, "Dataset manifest instead of synthetic data");
  c_be->add_option("--methods", be.methods, "Comma-separated methods or 'all'")->capture_default_str();
  c_be->add_option("--alpha", be.alpha, "Cumulative singular-value ratio")->capture_default_str();
  c_be->add_flag("--no-normalize", be.no_normalize, "Project raw features");
  c_be->add_option("--ntr", be.ntr, "Comma-separated training-set sizes for the timing sweep");
  c_be->add_option("--queries", be.queries, "Query samples per timing pass")->capture_default_str();
  c_be->add_option("--reps", be.reps, "Timing repetitions (median reported, >= 3)")->capture_default_str();
  c_be->add_option("--out", be.out, "Report or timing CSV");
  add_synth_flags(c_be, be.synth);

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen-synth", "Write a seeded synthetic fixture directory");
  c_gen->add_option("--seed", gen.seed, "Generator seed")->required();
  c_gen->add_option("--out-dir", gen.out_dir, "Destination directory")->required();
  add_synth_flags(c_gen, gen.synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*c_dec) return run_decompose(dec);
    if (*c_score) return run_score(sc);
    if (*c_eval) return run_eval(ev);
    if (*c_ab) return run_ablate(ab);
    if (*c_be) return run_bench(be);
    if (*c_gen) return run_gen(gen);
  } catch (const MisuseError& e) {
    std::cerr << "clafr: " << e.what() << "\n";
    return kExitMisuse;
  } catch (const NumericalError& e) {
    std::cerr << "clafr: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "clafr: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
