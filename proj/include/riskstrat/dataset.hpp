#pragma once

#include <cstddef>
#include <vector>

namespace riskstrat {

struct Record {
  double score;
  bool outcome;
  double weight = 1.0;

  friend bool operator==(const Record&, const Record&) = default;
};

// Per-subject scores and binary outcomes, with positive weights.
//
// Invariants, checked on construction (DataError naming the offending row):
//   - at least one case and one control,
//   - every weight finite and > 0,
//   - finite scores, and scores in [0,1] when is_risk_scale.
class RiskDataset {
 public:
  RiskDataset(std::vector<Record> records, bool is_risk_scale);

  const std::vector<Record>& records() const noexcept { return records_; }
  bool is_risk_scale() const noexcept { return is_risk_scale_; }
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t case_count() const noexcept { return case_count_; }

  double total_weight() const noexcept { return total_weight_; }
  double case_weight() const noexcept { return case_weight_; }
  // Weighted P(D+).
  double prevalence() const noexcept { return case_weight_ / total_weight_; }
  // Kish effective sample size (sum w)^2 / sum w^2; equals size() for unit
  // weights.
  double effective_n() const noexcept;

  friend bool operator==(const RiskDataset&, const RiskDataset&) = default;

 private:
  std::vector<Record> records_;
  bool is_risk_scale_;
  std::size_t case_count_ = 0;
  double total_weight_ = 0.0;
  double case_weight_ = 0.0;
  double weight_sq_ = 0.0;
};

}  // namespace riskstrat
