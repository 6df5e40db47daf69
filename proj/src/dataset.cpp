#include "riskstrat/dataset.hpp"

#include <cmath>

#include "riskstrat/error.hpp"

namespace riskstrat {

RiskDataset::RiskDataset(std::vector<Record> records, bool is_risk_scale)
    : records_(std::move(records)), is_risk_scale_(is_risk_scale) {
  std::size_t row = 0;
  for (const Record& r : records_) {
    ++row;
    if (!std::isfinite(r.score)) throw DataError("score is not finite", row);
    if (is_risk_scale_ && (r.score < 0.0 || r.score > 1.0)) {
      throw DataError("risk score outside [0,1]", row);
    }
    if (!(std::isfinite(r.weight) && r.weight > 0.0)) {
      throw DataError("weight must be positive", row);
    }
    total_weight_ += r.weight;
    weight_sq_ += r.weight * r.weight;
    if (r.outcome) {
      ++case_count_;
      case_weight_ += r.weight;
    }
  }
  if (records_.empty()) throw DataError("dataset is empty");
  if (case_count_ == 0) throw DataError("dataset has no cases (outcome = 1)");
  if (case_count_ == records_.size()) {
    throw DataError("dataset has no controls (outcome = 0)");
  }
}

double RiskDataset::effective_n() const noexcept {
  return total_weight_ * total_weight_ / weight_sq_;
}

}  // namespace riskstrat
