#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "riskstrat/dataset.hpp"
#include "riskstrat/inference.hpp"
#include "riskstrat/joint_table.hpp"
#include "riskstrat/metrics.hpp"

// Threshold sweeps over a RiskDataset and the curves built from them. A
// subject is test-positive at cutpoint m0 when score >= m0.

namespace riskstrat {

// Weighted joint table of the dataset dichotomized at `threshold`. The table
// carries the dataset's effective sample size.
JointTable dichotomize(const RiskDataset& data, double threshold);

// Decision-theoretic metrics at one cutpoint, evaluated at risk threshold R.
struct DecisionMetrics {
  double risk_threshold;
  double nbi;
  double nb;
  double nb_all_positive;
  double nb_random;
  double nb_gain;
};

struct CurvePoint {
  double threshold;
  JointTable table;
  double positivity;
  double sensitivity;
  double specificity;
  std::optional<double> ppv;   // undefined when nobody tests positive
  std::optional<double> cnpv;  // undefined when nobody tests negative
  std::optional<double> risk_difference;
  double mrs;
  double youden;
  double auc_dichotomized;
  // Pointwise logit interval for MRS; absent when |MRS| = 0.5.
  std::optional<Estimate> mrs_estimate;
  // Present when the cutpoint maps to a risk threshold in (0,1).
  std::optional<DecisionMetrics> decision;
  // Positivity is exactly 0 or 1, so the cutpoint does not split the data.
  bool degenerate;
};

// Curve points ordered by strictly increasing threshold.
class ThresholdCurve {
 public:
  explicit ThresholdCurve(std::vector<CurvePoint> points);

  const std::vector<CurvePoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const CurvePoint& operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<CurvePoint> points_;
};

struct SweepOptions {
  // Maps a cutpoint to the risk threshold used for NB/NBI. When empty,
  // risk-scale data use R = m0 and other data get no decision metrics.
  std::function<double(double)> risk_of_threshold;
  double level = 0.95;
  // 0 means one worker per hardware thread. Results do not depend on it.
  unsigned workers = 1;
};

// Sorted distinct scores plus the midpoints between consecutive ones. When
// that exceeds max_points (> 1), it is subsampled evenly in rank keeping both
// ends; max_points == 0 disables subsampling.
std::vector<double> default_grid(const RiskDataset& data,
                                 std::size_t max_points = 512);
// `count` evenly spaced points from lo to hi inclusive.
std::vector<double> uniform_grid(double lo, double hi, std::size_t count);

// Throws DomainError if the grid is empty or not strictly increasing.
ThresholdCurve sweep(const RiskDataset& data, std::span<const double> grid,
                     const SweepOptions& options = {});

struct OptimalThreshold {
  double threshold;
  double mrs;
  std::size_t index;
};

// Argmax of MRS; ties go to the smallest threshold. Throws DomainError on an
// empty curve.
OptimalThreshold optimal_threshold(const ThresholdCurve& curve);

struct SweetSpot {
  double lo;
  double hi;
  double peak_threshold;
  double peak_mrs;
  double retention;
  std::size_t lo_index;
  std::size_t hi_index;
  // Peak MRS <= 0: the marker is uninformative on this grid.
  bool degenerate;
};

// Largest contiguous run of thresholds around the MRS argmax whose MRS is at
// least retention * peak. retention must be in (0,1].
SweetSpot sweetspot(const ThresholdCurve& curve, double retention = 0.95);

struct RocPoint {
  double threshold;  // +inf for the (0,0) corner
  double fpr;        // 1 - Spec
  double tpr;        // Sens
};

// Empirical ROC from (0,0) to (1,1), one vertex per distinct score.
std::vector<RocPoint> roc(const RiskDataset& data);
// Trapezoidal area under roc(data); equals the weighted probability that a
// case outscores a control, ties counting one half.
double auc_continuous(const RiskDataset& data);

struct LorenzPoint {
  double threshold;
  double population_fraction;
  double case_fraction;
};

// Concentration curve: cumulative share of the population (ranked by
// descending score) against the cumulative share of cases it contains.
std::vector<LorenzPoint> lorenz(const RiskDataset& data);

// |MRS| with the calibrated risk dichotomized at the prevalence. Throws
// DomainError unless data.is_risk_scale().
double total_gain(const RiskDataset& data);

struct FrocPoint {
  double threshold;
  double x;  // P(D-, M+)
  double y;  // P(D+, M+)
  FrocAreas areas;
};

std::vector<FrocPoint> froc_curve(const RiskDataset& data,
                                  std::span<const double> grid);
std::vector<FrocPoint> froc_curve(const RiskDataset& data);

}  // namespace riskstrat
