#include "riskstrat/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "parallel.hpp"
#include "riskstrat/error.hpp"

namespace riskstrat {

namespace {

// Records sorted by ascending score with cumulative case/control weights, so
// any cutpoint is a binary search away from its 2x2 table.
class ThresholdIndex {
 public:
  explicit ThresholdIndex(const RiskDataset& data)
      : effective_n_(data.effective_n()) {
    std::vector<Record> sorted = data.records();
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Record& l, const Record& r) {
                       return l.score < r.score;
                     });
    const std::size_t n = sorted.size();
    scores_.resize(n);
    case_below_.assign(n + 1, 0.0);
    control_below_.assign(n + 1, 0.0);
    case_above_.assign(n + 1, 0.0);
    control_above_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      scores_[i] = sorted[i].score;
      const double wc = sorted[i].outcome ? sorted[i].weight : 0.0;
      const double wn = sorted[i].outcome ? 0.0 : sorted[i].weight;
      case_below_[i + 1] = case_below_[i] + wc;
      control_below_[i + 1] = control_below_[i] + wn;
    }
    for (std::size_t i = n; i-- > 0;) {
      const double wc = sorted[i].outcome ? sorted[i].weight : 0.0;
      const double wn = sorted[i].outcome ? 0.0 : sorted[i].weight;
      case_above_[i] = case_above_[i + 1] + wc;
      control_above_[i] = control_above_[i + 1] + wn;
    }
  }

  JointTable table_at(double threshold) const {
    const auto it = std::lower_bound(scores_.begin(), scores_.end(), threshold);
    const auto i = static_cast<std::size_t>(it - scores_.begin());
    return JointTable::from_counts(case_above_[i], case_below_[i],
                                   control_above_[i], control_below_[i])
        .with_n(effective_n_);
  }

 private:
  double effective_n_;
  std::vector<double> scores_;
  // *_below_[i]: weight of records 0..i-1 (score < scores_[i]);
  // *_above_[i]: weight of records i..n-1.
  std::vector<double> case_below_, control_below_, case_above_, control_above_;
};

void require_grid(std::span<const double> grid) {
  if (grid.empty()) throw DomainError("threshold grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw DomainError("threshold grid has a non-finite value");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw DomainError("threshold grid must be strictly increasing");
    }
  }
}

CurvePoint make_point(double threshold, const JointTable& t,
                      std::optional<double> risk, double level) {
  const double p = t.positivity();
  const bool any_pos = t.a() + t.c() > 0.0;
  const bool any_neg = t.b() + t.d() > 0.0;
  CurvePoint pt{
      .threshold = threshold,
      .table = t,
      .positivity = p,
      .sensitivity = sensitivity(t),
      .specificity = specificity(t),
      .ppv = any_pos ? std::optional(ppv(t)) : std::nullopt,
      .cnpv = any_neg ? std::optional(cnpv(t)) : std::nullopt,
      .risk_difference = std::nullopt,
      .mrs = mrs(t),
      .youden = youden(t),
      .auc_dichotomized = auc_dichotomized(t),
      .mrs_estimate = std::nullopt,
      .decision = std::nullopt,
      .degenerate = !(any_pos && any_neg),
  };
  if (pt.ppv && pt.cnpv) pt.risk_difference = *pt.ppv - *pt.cnpv;
  if (std::abs(pt.mrs) < 0.5) pt.mrs_estimate = estimate_mrs(t, level);
  if (risk && *risk > 0.0 && *risk < 1.0) {
    const RiskThreshold r(*risk);
    const double pi = t.prevalence();
    pt.decision = DecisionMetrics{
        .risk_threshold = *risk,
        .nbi = nbi(pt.mrs, r),
        .nb = net_benefit(t, r),
        .nb_all_positive = nb_all_positive(pi, r),
        .nb_random = nb_random(p, pi, r),
        .nb_gain = net_benefit_gain(t, r),
    };
  }
  return pt;
}

}  // namespace

JointTable dichotomize(const RiskDataset& data, double threshold) {
  return ThresholdIndex(data).table_at(threshold);
}

ThresholdCurve::ThresholdCurve(std::vector<CurvePoint> points)
    : points_(std::move(points)) {
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i].threshold > points_[i - 1].threshold)) {
      throw DomainError("curve thresholds must be strictly increasing");
    }
  }
}

std::vector<double> default_grid(const RiskDataset& data,
                                 std::size_t max_points) {
  std::vector<double> scores;
  scores.reserve(data.size());
  for (const Record& r : data.records()) scores.push_back(r.score);
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

  std::vector<double> grid;
  grid.reserve(2 * scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i > 0) {
      const double mid = scores[i - 1] + (scores[i] - scores[i - 1]) / 2.0;
      if (mid > scores[i - 1] && mid < scores[i]) grid.push_back(mid);
    }
    grid.push_back(scores[i]);
  }
  if (max_points == 0 || grid.size() <= max_points) return grid;
  if (max_points == 1) return {grid.front()};

  std::vector<double> sub;
  sub.reserve(max_points);
  const double step = static_cast<double>(grid.size() - 1) /
                      static_cast<double>(max_points - 1);
  for (std::size_t k = 0; k < max_points; ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(k * step));
    if (sub.empty() || grid[idx] > sub.back()) sub.push_back(grid[idx]);
  }
  return sub;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  if (count == 0 || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw DomainError("uniform grid needs count >= 1 and lo <= hi");
  }
  if (count == 1) return {lo};
  if (!(hi > lo)) throw DomainError("uniform grid with several points needs lo < hi");
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = lo + (hi - lo) * static_cast<double>(i) /
                       static_cast<double>(count - 1);
  }
  grid.back() = hi;
  return grid;
}

ThresholdCurve sweep(const RiskDataset& data, std::span<const double> grid,
                     const SweepOptions& options) {
  require_grid(grid);
  const ThresholdIndex index(data);
  std::vector<std::optional<CurvePoint>> slots(grid.size());
  detail::parallel_for(grid.size(), options.workers, [&](std::size_t i) {
    const double m0 = grid[i];
    std::optional<double> risk;
    if (options.risk_of_threshold) {
      risk = options.risk_of_threshold(m0);
    } else if (data.is_risk_scale()) {
      risk = m0;
    }
    slots[i] = make_point(m0, index.table_at(m0), risk, options.level);
  });
  std::vector<CurvePoint> points;
  points.reserve(slots.size());
  for (auto& s : slots) points.push_back(std::move(*s));
  return ThresholdCurve(std::move(points));
}

OptimalThreshold optimal_threshold(const ThresholdCurve& curve) {
  if (curve.empty()) throw DomainError("curve is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].mrs > curve[best].mrs) best = i;
  }
  return {curve[best].threshold, curve[best].mrs, best};
}

SweetSpot sweetspot(const ThresholdCurve& curve, double retention) {
  if (!(retention > 0.0 && retention <= 1.0)) {
    throw DomainError("sweetspot retention must be in (0,1]");
  }
  const OptimalThreshold peak = optimal_threshold(curve);
  const double floor = retention * peak.mrs;
  std::size_t lo = peak.index;
  std::size_t hi = peak.index;
  while (lo > 0 && curve[lo - 1].mrs >= floor) --lo;
  while (hi + 1 < curve.size() && curve[hi + 1].mrs >= floor) ++hi;
  return {curve[lo].threshold, curve[hi].threshold, peak.threshold, peak.mrs,
          retention,           lo,                  hi,  peak.mrs <= 0.0};
}

std::vector<RocPoint> roc(const RiskDataset& data) {
  std::vector<Record> sorted = data.records();
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Record& l, const Record& r) {
                     return l.score > r.score;
                   });
  double tp = 0.0, fp = 0.0;
  std::vector<std::pair<double, std::pair<double, double>>> raw;
  for (std::size_t i = 0; i < sorted.size();) {
    const double s = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == s; ++i) {
      (sorted[i].outcome ? tp : fp) += sorted[i].weight;
    }
    raw.push_back({s, {fp, tp}});
  }
  // The last accumulated values are the totals, so the curve ends at (1,1).
  std::vector<RocPoint> out;
  out.reserve(raw.size() + 1);
  out.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (const auto& [s, ft] : raw) {
    out.push_back({s, ft.first / fp, ft.second / tp});
  }
  return out;
}

double auc_continuous(const RiskDataset& data) {
  const std::vector<RocPoint> pts = roc(data);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  }
  return area;
}

std::vector<LorenzPoint> lorenz(const RiskDataset& data) {
  std::vector<Record> sorted = data.records();
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Record& l, const Record& r) {
                     return l.score > r.score;
                   });
  double pop = 0.0, cases = 0.0;
  std::vector<std::pair<double, std::pair<double, double>>> raw;
  for (std::size_t i = 0; i < sorted.size();) {
    const double s = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == s; ++i) {
      pop += sorted[i].weight;
      if (sorted[i].outcome) cases += sorted[i].weight;
    }
    raw.push_back({s, {pop, cases}});
  }
  std::vector<LorenzPoint> out;
  out.reserve(raw.size() + 1);
  out.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  for (const auto& [s, pc] : raw) {
    out.push_back({s, pc.first / pop, pc.second / cases});
  }
  return out;
}

double total_gain(const RiskDataset& data) {
  if (!data.is_risk_scale()) {
    throw DomainError("total gain requires calibrated risk scores");
  }
  return std::abs(mrs(dichotomize(data, data.prevalence())));
}

std::vector<FrocPoint> froc_curve(const RiskDataset& data,
                                  std::span<const double> grid) {
  require_grid(grid);
  const ThresholdIndex index(data);
  std::vector<FrocPoint> out;
  out.reserve(grid.size());
  for (double m0 : grid) {
    const JointTable t = index.table_at(m0);
    out.push_back({m0, t.c(), t.a(), froc_areas(t)});
  }
  return out;
}

std::vector<FrocPoint> froc_curve(const RiskDataset& data) {
  const std::vector<double> grid = default_grid(data);
  return froc_curve(data, grid);
}

}  // namespace riskstrat
