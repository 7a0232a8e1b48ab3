#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clafr/scored_batch.hpp"

namespace clafr {

enum class Decision { kId, kOod };

/// Threshold detector: ID iff score ≥ tau.
constexpr Decision detect(double score, double tau) noexcept {
  return score >= tau ? Decision::kId : Decision::kOod;
}

/// Mann–Whitney AUROC with half credit for ties; ID is the positive class.
/// Throws MetricError if either set is empty.
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);

struct FprAtTpr {
  double fpr = 0.0;
  double tau = 0.0;
  /// TPR actually reached at tau; can exceed the target when ties or the
  /// sample count prevent hitting it exactly.
  double tpr = 0.0;
};

inline constexpr double kDefaultTpr = 0.95;

/// tau = the largest threshold whose TPR (fraction of ID ≥ tau) reaches
/// `tpr_target`; fpr = fraction of OOD ≥ tau (0 for an empty OOD set).
/// Throws MetricError for an empty ID set or a target outside (0, 1].
FprAtTpr fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores,
                    double tpr_target = kDefaultTpr);

struct EvalReport {
  std::string method;
  std::string ood_set;
  double auroc = 0.0;
  double fpr = 0.0;
  double tau = 0.0;
  double tpr = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  double ns_per_sample = 0.0;
};

/// Both metrics for one (ID, OOD) pair. Throws MisuseError when the
/// fingerprints differ.
EvalReport evaluate(const ScoredBatch& id, const ScoredBatch& ood, const std::string& ood_set = "ood",
                    double tpr_target = kDefaultTpr);

/// Mean of auroc / fpr / timing over a method's rows, labelled "Average".
EvalReport average_row(std::span<const EvalReport> rows);

/// Fraction in [0, 1] rendered as a percentage with two decimals ("89.32").
std::string percent(double fraction);

inline constexpr const char* kReportCsvHeader = "method,ood_set,auroc,fpr95,tau,n_id,n_ood,ns_per_sample";

/// One CSV line per report (no header, no trailing newline).
std::string report_csv_row(const EvalReport& r);
/// Header plus rows, newline-terminated.
std::string render_report_csv(std::span<const EvalReport> rows);
/// Column-aligned plain-text table of the same content.
std::string render_report_table(std::span<const EvalReport> rows);

}  // namespace clafr
