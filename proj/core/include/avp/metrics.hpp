#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "avp/seqio.hpp"

namespace avp {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
};

// Undefined ratios are NaN with the matching flag cleared. MCC with a zero
// denominator is reported as 0 and flagged.
struct BinaryMetrics {
  double acc = 0.0;
  double sn = 0.0;
  double sp = 0.0;
  double mcc = 0.0;
  double gmean = 0.0;
  double f1 = 0.0;
  bool sn_defined = true;
  bool sp_defined = true;
  bool f1_defined = true;
  bool mcc_zero_denominator = false;
};

// Throws EmptyError when every count is zero.
BinaryMetrics binary_metrics(const ConfusionCounts& c);

// Counts at a probability threshold: predicted positive when score >= threshold.
ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

// labels: 1 positive, 0 negative. Area under the ROC path, tie groups taken
// as single diagonal steps; equals the pairwise concordance with half credit
// for ties. Throws SingleClassError unless both classes occur.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Step-wise average precision sum_k (R_k - R_{k-1}) P_k over descending
// distinct scores. Throws SingleClassError when there is no positive.
double auprc(std::span<const double> scores, std::span<const int> labels);

struct CurvePoint {
  double threshold;
  double fpr;
  double tpr;
  double precision;
  double recall;
};

// One point per distinct score, descending, preceded by the (0, 0) origin
// at threshold +inf.
std::vector<CurvePoint> roc_pr_curve(std::span<const double> scores, std::span<const int> labels);
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);

// confusion[t][p]: count of true class t predicted as p.
using ConfusionMatrix = std::vector<std::vector<std::uint64_t>>;

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, std::size_t class_count);

struct MacroMetrics {
  double macro_p = 0.0;
  double macro_r = 0.0;
  double macro_f = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::string> warnings;
};

// Per-class precision / recall / F1 averaged over classes. A zero
// denominator gives 0 for that ratio; a class absent from both truth and
// prediction scores 0 everywhere and adds a warning. Throws ConfigError
// when class_count < 2.
MacroMetrics macro_metrics(const ConfusionMatrix& confusion);
MacroMetrics macro_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t class_count);

// Multi-class correlation coefficient (Gorodkin's R_K); 0 when undefined.
// For two classes it equals the binary MCC.
double multiclass_mcc(const ConfusionMatrix& confusion);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_value = 1.0;  // two-sided
};

// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
// freedom. Throws VarianceError when a group has fewer than 2 observations.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b) by continued fraction.
double incomplete_beta(double a, double b, double x);
// Two-sided tail probability of Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

std::string significance_stars(double p);  // "***", "**", "*", or "ns"

struct CompositionRow {
  char residue;
  double mean_a;
  double mean_b;
  double log2_fold_change;  // log2((mean_a + 1e-6) / (mean_b + 1e-6))
  double t_statistic;
  double df;
  double p_value;
  std::string stars;
};

// Per-residue AAC means of two groups with Welch tests, in alphabet order.
std::vector<CompositionRow> composition_analysis(const std::vector<PeptideSequence>& group_a,
                                                 const std::vector<PeptideSequence>& group_b);
void write_composition_csv(std::ostream& out, const std::vector<CompositionRow>& rows);

}  // namespace avp
