#pragma once

#include <array>
#include <optional>

namespace riskstrat {

// Joint distribution of disease D and dichotomized test M in a 2x2 table:
//
//             M+   M-
//     D+      a    b
//     D-      c    d
//
// Cells are probabilities summing to one. A table built from counts also
// carries the total as its sample size, which inference requires.
class JointTable {
 public:
  static constexpr double kSumTolerance = 1e-12;

  // Throws DegenerateTableError unless every cell is in [0,1] and the cells
  // sum to one within kSumTolerance. `n`, when given, must be positive.
  static JointTable from_probabilities(double a, double b, double c, double d,
                                       std::optional<double> n = std::nullopt);

  // Counts may be fractional (expected or weighted counts). The sample size
  // becomes the total. Throws DegenerateTableError for negative, non-finite
  // or all-zero counts.
  static JointTable from_counts(double a_count, double b_count,
                                double c_count, double d_count);

  double a() const noexcept { return cells_[0]; }
  double b() const noexcept { return cells_[1]; }
  double c() const noexcept { return cells_[2]; }
  double d() const noexcept { return cells_[3]; }
  const std::array<double, 4>& cells() const noexcept { return cells_; }

  std::optional<double> n() const noexcept { return n_; }
  // Throws MissingSampleSizeError when the table has no sample size.
  double require_n() const;

  // P(D+) = a + b
  double prevalence() const noexcept { return cells_[0] + cells_[1]; }
  // P(M+) = a + c
  double positivity() const noexcept { return cells_[0] + cells_[2]; }

  JointTable with_n(std::optional<double> n) const;
  // Interchanges M+ and M- (a<->b, c<->d).
  JointTable swapped_test() const;

 private:
  JointTable(std::array<double, 4> cells, std::optional<double> n)
      : cells_(cells), n_(n) {}

  std::array<double, 4> cells_;
  std::optional<double> n_;
};

// Marginal and conditional summaries of a JointTable. Construction throws
// UndefinedMarginError when any denominator is zero; use the free functions in
// metrics.hpp to get individual fields with their own margin requirements.
struct TestCharacteristics {
  double prevalence;
  double positivity;
  double sensitivity;
  double specificity;
  double ppv;
  double cnpv;  // P(D+ | M-), the complement of NPV

  static TestCharacteristics of(const JointTable& table);
};

// Risk threshold for action, strictly inside (0,1). Encodes the benefit/cost
// ratio through R = 1 / (1 + B/C).
class RiskThreshold {
 public:
  // Throws DomainError unless 0 < r < 1.
  explicit RiskThreshold(double r);

  // Throws DomainError unless benefit and cost are both positive.
  static RiskThreshold from_benefit_cost(double benefit, double cost);

  double value() const noexcept { return r_; }
  // R / (1 - R): false positives accepted per true positive.
  double odds() const noexcept { return r_ / (1.0 - r_); }

 private:
  double r_;
};

}  // namespace riskstrat
