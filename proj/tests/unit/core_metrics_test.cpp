#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "riskstrat/error.hpp"
#include "riskstrat/metrics.hpp"
#include "test_util.hpp"

namespace riskstrat {
namespace {

using testing::kCells078;
using testing::kCells10;
using testing::kCells30;
using testing::random_table;
using testing::table_of;

constexpr double kIdentityTol = 1e-12;

// The reference Youden values carry five significant digits and were
// computed from unrounded counts; the published cells are rounded to 0.01,
// which moves J by up to ~4e-5.
constexpr double kRoundedCellTol = 5e-5;

// Weighted average of the risk changes among positives and negatives, used as
// an oracle.
double mrs_weighted_average(const JointTable& t) {
  const double pi = t.prevalence();
  const double p = t.positivity();
  const double pv = t.a() / p;
  const double cn = t.b() / (1.0 - p);
  return (pv - pi) * p + (pi - cn) * (1.0 - p);
}

TEST(TableFromCounts, ReferenceCells) {
  const JointTable t = table_of(kCells078);
  EXPECT_NEAR(t.a(), 0.018462, 5e-7);
  ASSERT_TRUE(t.n().has_value());
  EXPECT_DOUBLE_EQ(*t.n(), 4589.0);
  EXPECT_EQ(t.a(), 84.72 / 4589.0);
  EXPECT_NEAR(t.a() + t.b() + t.c() + t.d(), 1.0, kIdentityTol);
}

TEST(TableFromCounts, PerfectAndIndependent) {
  const JointTable perfect = JointTable::from_counts(1, 0, 0, 1);
  EXPECT_EQ(perfect.a(), 0.5);
  EXPECT_EQ(perfect.d(), 0.5);
  EXPECT_EQ(perfect.b(), 0.0);
  EXPECT_EQ(perfect.c(), 0.0);

  const JointTable indep = JointTable::from_counts(25, 25, 25, 25);
  for (double v : indep.cells()) EXPECT_EQ(v, 0.25);
}

TEST(TableFromCounts, RejectsDegenerateInput) {
  EXPECT_THROW(JointTable::from_counts(0, 0, 0, 0), DegenerateTableError);
  EXPECT_THROW(JointTable::from_counts(-1, 2, 3, 4), DegenerateTableError);
  EXPECT_THROW(JointTable::from_counts(NAN, 2, 3, 4), DegenerateTableError);
}

TEST(TableFromProbabilities, ValidatesSum) {
  EXPECT_NO_THROW(JointTable::from_probabilities(0.1, 0.2, 0.3, 0.4));
  EXPECT_THROW(JointTable::from_probabilities(0.1, 0.2, 0.3, 0.5),
               DegenerateTableError);
  EXPECT_THROW(JointTable::from_probabilities(1.2, -0.2, 0.0, 0.0),
               DegenerateTableError);
  EXPECT_THROW(JointTable::from_probabilities(0.25, 0.25, 0.25, 0.25, 0.0),
               DegenerateTableError);
}

TEST(TestCharacteristics, MarginIdentities) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const JointTable t = random_table(rng, 1e-3);
    const auto tc = TestCharacteristics::of(t);
    EXPECT_NEAR(tc.prevalence,
                tc.ppv * tc.positivity + tc.cnpv * (1.0 - tc.positivity),
                kIdentityTol);
    EXPECT_NEAR(tc.positivity,
                tc.sensitivity * tc.prevalence +
                    (1.0 - tc.specificity) * (1.0 - tc.prevalence),
                kIdentityTol);
    for (double v : {tc.prevalence, tc.positivity, tc.sensitivity,
                     tc.specificity, tc.ppv, tc.cnpv}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(TestCharacteristics, EmptyMarginsAreErrors) {
  const JointTable no_cases = JointTable::from_counts(0, 0, 3, 7);
  EXPECT_THROW(TestCharacteristics::of(no_cases), UndefinedMarginError);
  EXPECT_THROW(sensitivity(no_cases), UndefinedMarginError);
  EXPECT_NO_THROW(specificity(no_cases));
  const JointTable all_pos = JointTable::from_counts(4, 0, 6, 0);
  EXPECT_THROW(cnpv(all_pos), UndefinedMarginError);
  EXPECT_NO_THROW(ppv(all_pos));
  EXPECT_THROW(risk_difference(all_pos), UndefinedMarginError);
}

TEST(Mrs, ReferenceValues) {
  EXPECT_NEAR(mrs(table_of(kCells078)), 0.016721, 5e-6);
  EXPECT_NEAR(mrs(table_of(kCells10)), 0.010857, 5e-6);
  EXPECT_NEAR(mrs(table_of(kCells30)), 0.007947, 5e-6);
  EXPECT_EQ(mrs(JointTable::from_counts(25, 25, 25, 25)), 0.0);
}

TEST(Youden, ReferenceValues) {
  EXPECT_NEAR(youden(table_of(kCells078)), 0.37587, kRoundedCellTol);
  EXPECT_NEAR(youden(table_of(kCells10)), 0.24422, kRoundedCellTol);
  EXPECT_NEAR(youden(table_of(kCells30)), 0.17878, kRoundedCellTol);
  EXPECT_EQ(youden(JointTable::from_counts(1, 0, 0, 1)), 1.0);
}

TEST(Youden, RescaledByPrevalenceGivesMrs) {
  for (const auto& cells : {kCells078, kCells10, kCells30}) {
    const JointTable t = table_of(cells);
    const double pi = t.prevalence();
    EXPECT_NEAR(mrs(t), 2.0 * pi * (1.0 - pi) * youden(t), kIdentityTol);
  }
}

TEST(Youden, EmptyMarginIsError) {
  EXPECT_THROW(youden(JointTable::from_counts(0, 0, 1, 1)),
               UndefinedMarginError);
  EXPECT_THROW(youden(JointTable::from_counts(1, 1, 0, 0)),
               UndefinedMarginError);
  EXPECT_THROW(auc_dichotomized(JointTable::from_counts(1, 1, 0, 0)),
               UndefinedMarginError);
}

TEST(AucDichotomized, Values) {
  // (J + 1) / 2 with J from the reference cells.
  const JointTable t078 = table_of(kCells078);
  EXPECT_NEAR(auc_dichotomized(t078), (youden(t078) + 1.0) / 2.0, kIdentityTol);
  EXPECT_NEAR(auc_dichotomized(t078), 0.688, 5e-4);
  EXPECT_NEAR(auc_dichotomized(table_of(kCells30)), 0.589, 5e-4);
  EXPECT_EQ(auc_dichotomized(JointTable::from_counts(25, 25, 25, 25)), 0.5);
}

TEST(MrsAlternativeRoutes, AgreeWithTable) {
  const JointTable t = table_of(kCells078);
  const double pi = (84.72 + 19.73) / 4589.0;
  EXPECT_NEAR(mrs_from_youden(youden(t), pi), mrs(t), kIdentityTol);
  EXPECT_NEAR(mrs_from_youden(0.37587, 0.0227609), 0.016721, 5e-6);
  EXPECT_NEAR(mrs_from_auc(auc_dichotomized(t), pi), mrs(t), kIdentityTol);
  EXPECT_NEAR(mrs_from_risk_difference(risk_difference(t), t.positivity()),
              mrs(t), kIdentityTol);
}

TEST(MrsAlternativeRoutes, Extremes) {
  for (double pi : {0.01, 0.023, 0.3, 0.5}) {
    EXPECT_DOUBLE_EQ(mrs_from_auc(1.0, pi), 2.0 * pi * (1.0 - pi));
  }
  EXPECT_DOUBLE_EQ(mrs_from_risk_difference(1.0, 0.5), 0.5);
}

TEST(MrsAlternativeRoutes, RangeErrors) {
  EXPECT_THROW(mrs_from_youden(1.1, 0.5), DomainError);
  EXPECT_THROW(mrs_from_youden(0.5, 0.0), DomainError);
  EXPECT_THROW(mrs_from_auc(-0.1, 0.5), DomainError);
  EXPECT_THROW(mrs_from_auc(0.5, 1.0), DomainError);
  EXPECT_THROW(mrs_from_risk_difference(-1.5, 0.5), DomainError);
  EXPECT_THROW(mrs_from_risk_difference(0.5, 1.0), DomainError);
}

TEST(MaxMetrics, Values) {
  EXPECT_NEAR(max_mrs(0.023), 2.0 * 0.023 * 0.977, 1e-15);
  EXPECT_NEAR(max_mrs(0.023), 0.04495, 1e-5);
  EXPECT_EQ(max_mrs(0.5), 0.5);
  EXPECT_EQ(max_nbi(0.023), 0.023);
  EXPECT_THROW(max_mrs(0.0), DomainError);
  EXPECT_THROW(max_nbi(1.0), DomainError);
}

TEST(MaxMetrics, FractionOfMaxIsYouden) {
  const JointTable t = table_of(kCells078);
  EXPECT_EQ(fraction_of_max(t), youden(t));
  EXPECT_NEAR(fraction_of_max(t), mrs(t) / max_mrs(t.prevalence()),
              kIdentityTol);
  EXPECT_NEAR(fraction_of_max(t), 0.37587, kRoundedCellTol);
}

TEST(RiskThresholdType, OpenInterval) {
  EXPECT_THROW(RiskThreshold(0.0), DomainError);
  EXPECT_THROW(RiskThreshold(1.0), DomainError);
  EXPECT_THROW(RiskThreshold(-0.2), DomainError);
  EXPECT_THROW(RiskThreshold(NAN), DomainError);
  EXPECT_DOUBLE_EQ(RiskThreshold(0.1).odds(), 0.1 / 0.9);
  // 9 false positives accepted per true positive at 10%.
  EXPECT_DOUBLE_EQ(RiskThreshold::from_benefit_cost(9.0, 1.0).value(), 0.1);
  EXPECT_THROW(RiskThreshold::from_benefit_cost(0.0, 1.0), DomainError);
}

TEST(Nbi, Values) {
  // Direct formula (MRS/2)/(1-R).
  EXPECT_NEAR(nbi(0.016721, RiskThreshold(0.0078)),
              0.016721 / 2.0 / (1.0 - 0.0078), 1e-15);
  EXPECT_NEAR(nbi(0.016721, RiskThreshold(0.0078)), 0.00843, 5e-6);
  EXPECT_EQ(nbi(0.0, RiskThreshold(0.37)), 0.0);
  // Small R: close to half the MRS.
  EXPECT_NEAR(nbi(0.02, RiskThreshold(1e-4)), 0.01, 2e-6);
}

TEST(Nbi, PerfectTest) {
  // Substituting max MRS into (MRS/2)/(1-R) gives pi (1-pi)/(1-R), which
  // depends on R and equals pi only at R = pi.
  for (double pi : {0.0026, 0.023, 0.2, 0.5}) {
    for (double r : {0.001, 0.01, 0.1, 0.3, 0.5, 0.9}) {
      EXPECT_NEAR(nbi(max_mrs(pi), RiskThreshold(r)),
                  pi * (1.0 - pi) / (1.0 - r), 1e-15);
      EXPECT_EQ(max_nbi(pi, RiskThreshold(r)), nbi(max_mrs(pi), RiskThreshold(r)));
    }
    EXPECT_NEAR(nbi(max_mrs(pi), RiskThreshold(pi)), pi, 1e-15);
  }
}

TEST(Nbi, FractionOfMaxIsYouden) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const JointTable t = random_table(rng, 1e-3);
    const RiskThreshold r(0.05 + 0.9 * (i / 1000.0));
    EXPECT_NEAR(nbi(mrs(t), r) / max_nbi(t.prevalence(), r), youden(t),
                kIdentityTol);
  }
}

TEST(NetBenefit, ReferenceCellsAtTenPercent) {
  const JointTable t = table_of(kCells10);
  // Textbook form from the raw counts.
  const double a = 29.63, b = 74.75, c = 177.70, d = 4306.92;
  const double n = a + b + c + d;
  const double pi = (a + b) / n;
  const double sens = a / (a + b);
  const double spec = d / (c + d);
  const double oracle =
      pi * sens - (0.1 / 0.9) * (1.0 - spec) * (1.0 - pi);
  EXPECT_NEAR(net_benefit(t, RiskThreshold(0.10)), oracle, kIdentityTol);
  EXPECT_NEAR(net_benefit(t, RiskThreshold(0.10)), 0.00215, 5e-6);
}

TEST(NetBenefit, EqualsYoudenTimesPrevalenceAtRIsPi) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const JointTable t = random_table(rng, 1e-3);
    const RiskThreshold r(t.prevalence());
    EXPECT_NEAR(net_benefit(t, r) - youden(t) * t.prevalence(), 0.0,
                kIdentityTol);
    EXPECT_NEAR(nbi(mrs(t), r), youden(t) * t.prevalence(), kIdentityTol);
  }
}

TEST(NetBenefit, PerfectTestNearZeroThreshold) {
  const JointTable t = JointTable::from_counts(23, 0, 0, 977);
  EXPECT_NEAR(net_benefit(t, RiskThreshold(1e-12)), t.prevalence(), 1e-12);
  EXPECT_EQ(nb_all_positive(0.5, RiskThreshold(0.5)), 0.0);
  EXPECT_NEAR(nb_random(0.3, 0.2, RiskThreshold(0.2)), 0.0, 1e-16);
}

TEST(NetBenefitGain, Values) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const JointTable t = random_table(rng, 1e-3);
    const RiskThreshold r(t.prevalence());
    EXPECT_NEAR(nb_all_positive(t.prevalence(), r), 0.0, 1e-15);
    EXPECT_NEAR(net_benefit_gain(t, r), net_benefit(t, r), 1e-15);
  }
  // Brute force over a grid: an uninformative test never beats treat-all or
  // treat-none.
  const JointTable indep = JointTable::from_counts(6, 14, 24, 56);
  for (int k = 1; k < 1000; ++k) {
    const RiskThreshold r(k / 1000.0);
    EXPECT_LE(net_benefit_gain(indep, r), 1e-15) << "R=" << r.value();
  }
  const JointTable perfect = JointTable::from_counts(20, 0, 0, 80);
  EXPECT_NEAR(net_benefit_gain(perfect, RiskThreshold(0.2)),
              youden(perfect) * 0.2, 1e-15);
}

TEST(NetBenefitFromNbi, ErrorsAtUndefinedPpv) {
  EXPECT_THROW(net_benefit_from_nbi(JointTable::from_counts(0, 3, 0, 7),
                                    RiskThreshold(0.1)),
               UndefinedMarginError);
  EXPECT_THROW(net_benefit_from_nbi(JointTable::from_counts(1, 1, 1, 1),
                                    RiskThreshold(0.1)),
               DomainError);
}

TEST(Froc, Areas) {
  const FrocAreas indep = froc_areas(JointTable::from_counts(25, 25, 25, 25));
  EXPECT_DOUBLE_EQ(indep.ratio, 0.5);
  EXPECT_NEAR(indep.area, indep.chance_area, 1e-15);
  EXPECT_NEAR(indep.difference, 0.0, 1e-15);

  const JointTable t = table_of(kCells078);
  EXPECT_NEAR(froc_areas(t).difference, mrs(t) / 4.0, kIdentityTol);
  EXPECT_NEAR(froc_areas(t).ratio, auc_dichotomized(t), kIdentityTol);

  const double pi = 0.3;
  const FrocAreas perfect = froc_areas(JointTable::from_counts(3, 0, 0, 7));
  EXPECT_NEAR(perfect.area, pi * (1 - pi) / 2 + (1 - pi) * pi / 2, 1e-15);
  EXPECT_NEAR(perfect.ratio, 1.0, 1e-15);
  EXPECT_NEAR(perfect.difference, pi * (1 - pi) / 2, 1e-15);

  EXPECT_THROW(froc_areas(JointTable::from_counts(0, 0, 1, 1)),
               UndefinedMarginError);
}

// Property checks over random tables.

TEST(MrsProperties, FourJointProbabilityIdentities) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const JointTable t = random_table(rng);
    const double half = mrs(t) / 2.0;
    const double pi = t.prevalence(), p = t.positivity();
    EXPECT_NEAR(half, t.a() - p * pi, kIdentityTol);
    EXPECT_NEAR(half, pi * (1.0 - p) - t.b(), kIdentityTol);
    EXPECT_NEAR(half, t.d() - (1.0 - p) * (1.0 - pi), kIdentityTol);
    EXPECT_NEAR(half, p * (1.0 - pi) - t.c(), kIdentityTol);
  }
}

TEST(MrsProperties, SwapNegatesAndBounds) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10000; ++i) {
    const JointTable t = random_table(rng);
    EXPECT_EQ(mrs(t.swapped_test()), -mrs(t));
    const double pi = t.prevalence();
    EXPECT_LE(std::abs(mrs(t)), 2.0 * pi * (1.0 - pi) + 1e-15);
    EXPECT_LE(2.0 * pi * (1.0 - pi), 0.5);
  }
}

TEST(MrsProperties, FormulaConcordance) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const JointTable t = random_table(rng, 1e-3);
    const double m = mrs(t);
    const double pi = t.prevalence(), p = t.positivity();
    EXPECT_NEAR(m, mrs_weighted_average(t), kIdentityTol);
    EXPECT_NEAR(m, 2.0 * (t.a() - pi * p), kIdentityTol);
    EXPECT_NEAR(m, mrs_from_youden(youden(t), pi), kIdentityTol);
    EXPECT_NEAR(m, mrs_from_auc(auc_dichotomized(t), pi), kIdentityTol);
    EXPECT_NEAR(m, mrs_from_risk_difference(risk_difference(t), p),
                kIdentityTol);
  }
}

TEST(DecisionBridge, NbiIsNbMinusRandomSelection) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ur(0.001, 0.999);
  for (int i = 0; i < 10000; ++i) {
    const JointTable t = random_table(rng, 1e-3);
    const RiskThreshold r(ur(rng));
    const double pi = t.prevalence(), p = t.positivity();
    const double nb = net_benefit(t, r);
    const double info = nbi(mrs(t), r);
    EXPECT_NEAR(info, nb - nb_random(p, pi, r), kIdentityTol);
    if (std::abs(ppv(t) - pi) > 1e-3) {
      EXPECT_NEAR(nb, net_benefit_from_nbi(t, r), 1e-10);
    }
    // NB - NBI = p (pi - R) / (1 - R): the test beats NBI on net benefit
    // exactly when the threshold is below prevalence.
    const double gap = p * (pi - r.value()) / (1.0 - r.value());
    EXPECT_NEAR(nb - info, gap, kIdentityTol);
    if (r.value() < pi - 1e-9) {
      EXPECT_LT(info, nb);
    } else if (r.value() > pi + 1e-9) {
      EXPECT_GT(info, nb);
    }
  }
}

// Expected utility straight from the four outcome utilities; the test cost
// cancels but is included to show that.
struct Utilities {
  double tp, fn, tn, fp, test;
};

double expected_utility(const JointTable& t, const Utilities& u) {
  return u.tp * t.a() + u.fn * t.b() + u.tn * t.d() + u.fp * t.c() + u.test;
}

double random_selection_utility(const JointTable& t, const Utilities& u) {
  const double pi = t.prevalence(), p = t.positivity();
  return u.tp * pi * p + u.fn * pi * (1.0 - p) + u.tn * (1.0 - p) * (1.0 - pi) +
         u.fp * (1.0 - pi) * p + u.test;
}

TEST(DecisionBridge, UtilityOracle) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> base(-5.0, 5.0), gap(0.05, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const JointTable t = random_table(rng);
    Utilities u{};
    u.fn = base(rng);
    u.tp = u.fn + gap(rng);
    u.fp = base(rng);
    u.tn = u.fp + gap(rng);
    u.test = base(rng);
    const double benefit = u.tp - u.fn, cost = u.tn - u.fp;
    const RiskThreshold r = RiskThreshold::from_benefit_cost(benefit, cost);
    const double oracle =
        (expected_utility(t, u) - random_selection_utility(t, u)) / benefit;
    EXPECT_NEAR(oracle, nbi(mrs(t), r), 1e-10);
  }
}

}  // namespace
}  // namespace riskstrat
