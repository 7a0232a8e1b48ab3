#include "clafr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "clafr/error.hpp"

namespace clafr {

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
  if (id_scores.empty() || ood_scores.empty()) throw MetricError("auroc needs non-empty ID and OOD sets");
  std::vector<double> ood(ood_scores.begin(), ood_scores.end());
  std::sort(ood.begin(), ood.end());
  // Integer counts keep the result identical to a pairwise count.
  std::uint64_t wins = 0, ties = 0;
  for (double s : id_scores) {
    const auto lo = std::lower_bound(ood.begin(), ood.end(), s);
    const auto hi = std::upper_bound(lo, ood.end(), s);
    wins += static_cast<std::uint64_t>(lo - ood.begin());
    ties += static_cast<std::uint64_t>(hi - lo);
  }
  const double pairs = static_cast<double>(id_scores.size()) * static_cast<double>(ood_scores.size());
  return (static_cast<double>(2 * wins + ties)) / (2.0 * pairs);
}

FprAtTpr fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores,
                    double tpr_target) {
  if (id_scores.empty()) throw MetricError("fpr_at_tpr needs a non-empty ID set");
  if (!(tpr_target > 0.0 && tpr_target <= 1.0)) throw MetricError("TPR target must lie in (0, 1]");
  std::vector<double> id(id_scores.begin(), id_scores.end());
  std::sort(id.begin(), id.end(), std::greater<>());
  const std::size_t n = id.size();
  const double nd = static_cast<double>(n);

  // Smallest accepted-count k with k/n ≥ target, found with the same
  // floating-point comparison a threshold scan would use.
  std::size_t k = static_cast<std::size_t>(std::ceil(tpr_target * nd));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && static_cast<double>(k - 1) / nd >= tpr_target) --k;
  while (k < n && !(static_cast<double>(k) / nd >= tpr_target)) ++k;

  FprAtTpr out;
  out.tau = id[k - 1];
  const auto accepted_id = std::count_if(id.begin(), id.end(), [&](double s) { return s >= out.tau; });
  out.tpr = static_cast<double>(accepted_id) / nd;
  if (!ood_scores.empty()) {
    const auto accepted_ood =
        std::count_if(ood_scores.begin(), ood_scores.end(), [&](double s) { return s >= out.tau; });
    out.fpr = static_cast<double>(accepted_ood) / static_cast<double>(ood_scores.size());
  }
  return out;
}

EvalReport evaluate(const ScoredBatch& id, const ScoredBatch& ood, const std::string& ood_set,
                    double tpr_target) {
  if (!(id.fingerprint == ood.fingerprint)) {
    throw MisuseError("fingerprint mismatch: '" + id.fingerprint.canonical() + "' vs '" +
                      ood.fingerprint.canonical() + "'");
  }
  EvalReport r;
  r.method = id.fingerprint.method;
  r.ood_set = ood_set;
  r.auroc = auroc(id.scores.values(), ood.scores.values());
  const FprAtTpr op = fpr_at_tpr(id.scores.values(), ood.scores.values(), tpr_target);
  r.fpr = op.fpr;
  r.tau = op.tau;
  r.tpr = op.tpr;
  r.n_id = id.size();
  r.n_ood = ood.size();
  const double n = static_cast<double>(r.n_id + r.n_ood);
  r.ns_per_sample = n > 0 ? (id.elapsed_ns + ood.elapsed_ns) / n : 0.0;
  return r;
}

EvalReport average_row(std::span<const EvalReport> rows) {
  if (rows.empty()) throw MetricError("average of zero reports");
  EvalReport a;
  a.method = rows.front().method;
  a.ood_set = "Average";
  a.n_id = rows.front().n_id;
  for (const auto& r : rows) {
    a.auroc += r.auroc;
    a.fpr += r.fpr;
    a.tpr += r.tpr;
    a.ns_per_sample += r.ns_per_sample;
    a.n_ood += r.n_ood;
  }
  const double n = static_cast<double>(rows.size());
  a.auroc /= n;
  a.fpr /= n;
  a.tpr /= n;
  a.ns_per_sample /= n;
  a.tau = std::nan("");
  return a;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction + 0.0);
  return buf;
}

namespace {

std::string tau_text(double tau) {
  if (std::isnan(tau)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", tau);
  return buf;
}

std::string ns_text(double ns) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", ns);
  return buf;
}

std::vector<std::string> cells(const EvalReport& r) {
  return {r.method,
          r.ood_set,
          percent(r.auroc),
          percent(r.fpr),
          tau_text(r.tau),
          std::to_string(r.n_id),
          std::to_string(r.n_ood),
          ns_text(r.ns_per_sample)};
}

}  // namespace

std::string report_csv_row(const EvalReport& r) {
  std::string out;
  for (const auto& c : cells(r)) out += (out.empty() ? "" : ",") + c;
  return out;
}

std::string render_report_csv(std::span<const EvalReport> rows) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& r : rows) out += report_csv_row(r) + "\n";
  return out;
}

std::string render_report_table(std::span<const EvalReport> rows) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"Method", "OOD set", "AUROC", "FPR95", "tau", "n_id", "n_ood", "ns/sample"});
  for (const auto& r : rows) grid.push_back(cells(r));
  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& row : grid)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t c = 0; c < grid[i].size(); ++c) {
      const std::string& s = grid[i][c];
      const std::string pad(width[c] - s.size(), ' ');
      // Text columns left-aligned, numbers right-aligned.
      out += c < 2 ? s + pad : pad + s;
      out += c + 1 < grid[i].size() ? "  " : "\n";
    }
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  return out;
}

}  // namespace clafr
