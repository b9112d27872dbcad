#include "avp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "avp/descriptors.hpp"
#include "avp/errors.hpp"
#include "avp/format.hpp"
#include "avp/tables.hpp"

namespace avp {

namespace {

constexpr const char* kModule = "metrics";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_scores(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError(kModule, "scores and labels differ in length");
  for (int l : labels) {
    if (l != 0 && l != 1) throw LabelError(kModule, "binary labels must be 0 or 1");
  }
}

// Indices sorted by descending score.
std::vector<std::size_t> descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

BinaryMetrics binary_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw EmptyError(kModule, "confusion counts are all zero");
  const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
  BinaryMetrics m;
  m.acc = (tp + tn) / (tp + tn + fp + fn);
  m.sn_defined = c.tp + c.fn > 0;
  m.sp_defined = c.tn + c.fp > 0;
  m.sn = m.sn_defined ? tp / (tp + fn) : kNaN;
  m.sp = m.sp_defined ? tn / (tn + fp) : kNaN;
  m.gmean = std::sqrt(m.sn * m.sp);
  m.f1_defined = 2 * c.tp + c.fp + c.fn > 0;
  m.f1 = m.f1_defined ? 2.0 * tp / (2.0 * tp + fp + fn) : kNaN;
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  m.mcc_zero_denominator = denom == 0.0;
  m.mcc = denom == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(denom);
  return m;
}

ConfusionCounts confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_scores(scores, labels);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) {
      (pred ? c.tp : c.fn)++;
    } else {
      (pred ? c.fp : c.tn)++;
    }
  }
  return c;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_scores(scores, labels);
  const auto order = descending(scores);
  const std::uint64_t P = static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), 1));
  const std::uint64_t N = labels.size() - P;
  if (P == 0 || N == 0) throw SingleClassError(kModule, "AUROC needs both classes");
  // Tie groups from high to low score. A group's positives beat every
  // negative in later groups and tie with its own negatives, so each group
  // adds pos_g * (2 * neg_below + neg_g) in units of 1 / (2 P N); this is
  // twice the trapezoid the group contributes to the ROC area.
  std::uint64_t twice = 0;
  std::uint64_t neg_below = N;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pg = 0, ng = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pg : ng)++;
      ++j;
    }
    neg_below -= ng;
    twice += pg * (2 * neg_below + ng);
    i = j;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(P) * static_cast<double>(N));
}

double auprc(std::span<const double> scores, std::span<const int> labels) {
  check_scores(scores, labels);
  const auto order = descending(scores);
  const std::uint64_t P = static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), 1));
  if (P == 0) throw SingleClassError(kModule, "AUPRC needs at least one positive");
  double ap = 0.0;
  std::uint64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t dtp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? dtp : fp)++;
      ++j;
    }
    tp += dtp;
    if (dtp > 0) {
      const double dr = static_cast<double>(dtp) / static_cast<double>(P);
      const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      ap += dr * precision;
    }
    i = j;
  }
  return ap;
}

std::vector<CurvePoint> roc_pr_curve(std::span<const double> scores, std::span<const int> labels) {
  check_scores(scores, labels);
  const auto order = descending(scores);
  const double P = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double N = static_cast<double>(labels.size()) - P;
  if (P == 0 || N == 0) throw SingleClassError(kModule, "curves need both classes");
  std::vector<CurvePoint> out{{std::numeric_limits<double>::infinity(), 0.0, 0.0, 1.0, 0.0}};
  double tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) += 1.0;
      ++j;
    }
    out.push_back({scores[order[i]], fp / N, tp / P, tp / (tp + fp), tp / P});
    i = j;
  }
  return out;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "threshold,fpr,tpr,precision,recall\n";
  for (const auto& p : curve) {
    out << format_g9(p.threshold) << ',' << format_g9(p.fpr) << ',' << format_g9(p.tpr) << ','
        << format_g9(p.precision) << ',' << format_g9(p.recall) << '\n';
  }
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted, std::size_t class_count) {
  if (truth.size() != predicted.size()) throw ShapeError(kModule, "truth and predictions differ in length");
  ConfusionMatrix m(class_count, std::vector<std::uint64_t>(class_count, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predicted[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= class_count || static_cast<std::size_t>(p) >= class_count) {
      throw LabelError(kModule, "label outside " + std::to_string(class_count) + " classes");
    }
    ++m[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }
  return m;
}

MacroMetrics macro_metrics(const ConfusionMatrix& confusion) {
  const std::size_t C = confusion.size();
  if (C < 2) throw ConfigError(kModule, "macro metrics need at least 2 classes");
  for (const auto& row : confusion) {
    if (row.size() != C) throw ShapeError(kModule, "confusion matrix is not square");
  }
  MacroMetrics m;
  m.precision.assign(C, 0.0);
  m.recall.assign(C, 0.0);
  m.f1.assign(C, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    std::uint64_t tp = confusion[c][c], pred = 0, truth = 0;
    for (std::size_t k = 0; k < C; ++k) {
      pred += confusion[k][c];
      truth += confusion[c][k];
    }
    if (pred == 0 && truth == 0) {
      m.warnings.push_back("class " + std::to_string(c) + " absent from truth and predictions");
      continue;
    }
    const double p = pred ? static_cast<double>(tp) / static_cast<double>(pred) : 0.0;
    const double r = truth ? static_cast<double>(tp) / static_cast<double>(truth) : 0.0;
    m.precision[c] = p;
    m.recall[c] = r;
    m.f1[c] = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  const double n = static_cast<double>(C);
  m.macro_p = std::accumulate(m.precision.begin(), m.precision.end(), 0.0) / n;
  m.macro_r = std::accumulate(m.recall.begin(), m.recall.end(), 0.0) / n;
  m.macro_f = std::accumulate(m.f1.begin(), m.f1.end(), 0.0) / n;
  return m;
}

MacroMetrics macro_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t class_count) {
  if (class_count < 2) throw ConfigError(kModule, "macro metrics need at least 2 classes");
  return macro_metrics(confusion_matrix(truth, predicted, class_count));
}

double multiclass_mcc(const ConfusionMatrix& confusion) {
  const std::size_t C = confusion.size();
  double s = 0, c = 0, pt = 0, pp = 0, tt = 0;
  std::vector<double> t(C, 0.0), p(C, 0.0);
  for (std::size_t i = 0; i < C; ++i) {
    for (std::size_t j = 0; j < C; ++j) {
      const double v = static_cast<double>(confusion[i][j]);
      t[i] += v;
      p[j] += v;
      s += v;
    }
    c += static_cast<double>(confusion[i][i]);
  }
  for (std::size_t k = 0; k < C; ++k) {
    pt += p[k] * t[k];
    pp += p[k] * p[k];
    tt += t[k] * t[k];
  }
  const double denom = (s * s - pp) * (s * s - tt);
  return denom <= 0.0 ? 0.0 : (c * s - pt) / std::sqrt(denom);
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // Continued fraction converges fast for x < (a+1)/(a+b+2); use symmetry otherwise.
  if (x > (a + 1.0) / (a + b + 2.0)) return 1.0 - incomplete_beta(b, a, 1.0 - x);
  const double lnfront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  constexpr double kTiny = 1e-300;
  double f = 1.0, C = 1.0, D = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const int m = i / 2;
    double num;
    if (i == 0) {
      num = 1.0;
    } else if (i % 2 == 0) {
      num = (m * (b - m) * x) / ((a + 2.0 * m - 1.0) * (a + 2.0 * m));
    } else {
      num = -((a + m) * (a + b + m) * x) / ((a + 2.0 * m) * (a + 2.0 * m + 1.0));
    }
    D = 1.0 + num * D;
    if (std::abs(D) < kTiny) D = kTiny;
    D = 1.0 / D;
    C = 1.0 + num / C;
    if (std::abs(C) < kTiny) C = kTiny;
    const double cd = C * D;
    f *= cd;
    if (std::abs(1.0 - cd) < 1e-15) break;
  }
  return std::exp(lnfront) * (f - 1.0) / a;
}

double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  if (!(df > 0.0)) throw DomainError(kModule, "degrees of freedom must be positive");
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw VarianceError(kModule, "each group needs at least 2 observations");
  auto moments = [](std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::pair{m, ss / (n - 1.0)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double qa = va / na, qb = vb / nb;
  const double se2 = qa + qb;
  WelchResult r;
  if (se2 == 0.0) {
    r.df = na + nb - 2.0;
    if (ma == mb) {
      r.t = 0.0;
      r.p_value = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), ma - mb);
      r.p_value = 0.0;
    }
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  r.p_value = student_t_two_sided(r.t, r.df);
  return r;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "ns";
}

std::vector<CompositionRow> composition_analysis(const std::vector<PeptideSequence>& group_a,
                                                 const std::vector<PeptideSequence>& group_b) {
  if (group_a.size() < 2 || group_b.size() < 2) {
    throw VarianceError(kModule, "composition analysis needs at least 2 sequences per group");
  }
  auto aac = [](const std::vector<PeptideSequence>& g) {
    std::vector<std::vector<double>> cols(20);
    for (const auto& s : g) {
      const auto f = compute_descriptor(DescriptorKind::kAAC, s.residues, DescriptorConfig{});
      for (std::size_t r = 0; r < 20; ++r) cols[r].push_back(f[r]);
    }
    return cols;
  };
  const auto ca = aac(group_a);
  const auto cb = aac(group_b);
  std::vector<CompositionRow> rows;
  for (std::size_t r = 0; r < 20; ++r) {
    CompositionRow row;
    row.residue = kAlphabet[r];
    row.mean_a = std::accumulate(ca[r].begin(), ca[r].end(), 0.0) / static_cast<double>(ca[r].size());
    row.mean_b = std::accumulate(cb[r].begin(), cb[r].end(), 0.0) / static_cast<double>(cb[r].size());
    row.log2_fold_change = std::log2((row.mean_a + 1e-6) / (row.mean_b + 1e-6));
    const auto w = welch_t_test(ca[r], cb[r]);
    row.t_statistic = w.t;
    row.df = w.df;
    row.p_value = w.p_value;
    row.stars = significance_stars(w.p_value);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_composition_csv(std::ostream& out, const std::vector<CompositionRow>& rows) {
  out << "residue,mean_a,mean_b,log2_fold_change,t_statistic,df,p_value,significance\n";
  for (const auto& r : rows) {
    out << r.residue << ',' << format_g9(r.mean_a) << ',' << format_g9(r.mean_b) << ','
        << format_g9(r.log2_fold_change) << ',' << format_g9(r.t_statistic) << ',' << format_g9(r.df) << ','
        << format_g9(r.p_value) << ',' << r.stars << '\n';
  }
}

}  // namespace avp
