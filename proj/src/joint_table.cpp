#include "riskstrat/joint_table.hpp"

#include <cmath>
#include <sstream>

#include "riskstrat/error.hpp"

namespace riskstrat {

namespace {

std::string describe(const std::array<double, 4>& v) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << v[0] << ", " << v[1] << ", " << v[2] << ", " << v[3] << "]";
  return os.str();
}

}  // namespace

JointTable JointTable::from_probabilities(double a, double b, double c,
                                          double d, std::optional<double> n) {
  const std::array<double, 4> cells{a, b, c, d};
  for (double v : cells) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw DegenerateTableError("cell probabilities must lie in [0,1]: " +
                                 describe(cells));
    }
  }
  if (std::abs(a + b + c + d - 1.0) > kSumTolerance) {
    throw DegenerateTableError("cell probabilities must sum to 1: " +
                               describe(cells));
  }
  if (n && !(std::isfinite(*n) && *n > 0.0)) {
    throw DegenerateTableError("sample size must be positive");
  }
  return JointTable(cells, n);
}

JointTable JointTable::from_counts(double a_count, double b_count,
                                   double c_count, double d_count) {
  const std::array<double, 4> counts{a_count, b_count, c_count, d_count};
  for (double v : counts) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DegenerateTableError("counts must be finite and nonnegative: " +
                                 describe(counts));
    }
  }
  const double total = a_count + b_count + c_count + d_count;
  if (total <= 0.0) {
    throw DegenerateTableError("all counts are zero");
  }
  return JointTable({a_count / total, b_count / total, c_count / total,
                     d_count / total},
                    total);
}

double JointTable::require_n() const {
  if (!n_) throw MissingSampleSizeError("table has no sample size");
  return *n_;
}

JointTable JointTable::with_n(std::optional<double> n) const {
  if (n && !(std::isfinite(*n) && *n > 0.0)) {
    throw DegenerateTableError("sample size must be positive");
  }
  return JointTable(cells_, n);
}

JointTable JointTable::swapped_test() const {
  return JointTable({cells_[1], cells_[0], cells_[3], cells_[2]}, n_);
}

TestCharacteristics TestCharacteristics::of(const JointTable& t) {
  const double pi = t.prevalence();
  const double p = t.positivity();
  if (pi <= 0.0 || t.c() + t.d() <= 0.0) {
    throw UndefinedMarginError("prevalence must be in (0,1) for test characteristics");
  }
  if (p <= 0.0 || t.b() + t.d() <= 0.0) {
    throw UndefinedMarginError("positivity must be in (0,1) for test characteristics");
  }
  return {pi,
          p,
          t.a() / pi,
          t.d() / (t.c() + t.d()),
          t.a() / p,
          t.b() / (t.b() + t.d())};
}

RiskThreshold::RiskThreshold(double r) : r_(r) {
  if (!(r > 0.0 && r < 1.0)) {
    std::ostringstream os;
    os << "risk threshold must be in the open interval (0,1), got " << r;
    throw DomainError(os.str());
  }
}

RiskThreshold RiskThreshold::from_benefit_cost(double benefit, double cost) {
  if (!(benefit > 0.0) || !(cost > 0.0)) {
    throw DomainError("benefit and cost must both be positive");
  }
  return RiskThreshold(1.0 / (1.0 + benefit / cost));
}

}  // namespace riskstrat
