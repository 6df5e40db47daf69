#pragma once

#include "riskstrat/joint_table.hpp"

// Closed-form risk-stratification and decision-theoretic metrics of a
// dichotomized test. All functions are pure.
//
// Notation: pi = prevalence P(D+), p = positivity P(M+), R = risk threshold.

namespace riskstrat {

// Conditional fields. Each throws UndefinedMarginError when its own
// denominator is zero.
double sensitivity(const JointTable& t);
double specificity(const JointTable& t);
double ppv(const JointTable& t);
double cnpv(const JointTable& t);
// PPV - cNPV. Needs 0 < p < 1.
double risk_difference(const JointTable& t);

// Mean risk stratification, 2(ad - bc). In [-0.5, 0.5]. Never throws.
double mrs(const JointTable& t);

// Sens + Spec - 1. Throws UndefinedMarginError if a+b == 0 or c+d == 0.
double youden(const JointTable& t);
// (J + 1) / 2, the AUC of the single-point ROC curve.
double auc_dichotomized(const JointTable& t);

// Alternative routes to MRS from summary quantities. Throw DomainError when
// arguments leave their ranges (J, t in [-1,1]; AUC in [0,1]; pi, p in (0,1)).
double mrs_from_youden(double youden_index, double prevalence);
double mrs_from_auc(double auc, double prevalence);
double mrs_from_risk_difference(double risk_diff, double positivity);

// Largest attainable MRS at this prevalence, 2 pi (1 - pi).
double max_mrs(double prevalence);
// NBI of a perfect test at R = pi, which is pi.
double max_nbi(double prevalence);
// NBI of a perfect test at threshold R: pi (1 - pi) / (1 - R). NBI divided by
// this is Youden's index.
double max_nbi(double prevalence, RiskThreshold r);
// MRS / max_mrs(pi). Equal to Youden's index.
double fraction_of_max(const JointTable& t);

// Net benefit of information, (MRS/2) / (1 - R).
double nbi(double mrs_value, RiskThreshold r);

// Net benefit of the test versus treating no one:
//   pi Sens - R/(1-R) (1 - Spec)(1 - pi)  ==  a - R/(1-R) c
double net_benefit(const JointTable& t, RiskThreshold r);
// Net benefit of treating everyone.
double nb_all_positive(double prevalence, RiskThreshold r);
// Net benefit of random selection at positivity p.
double nb_random(double positivity, double prevalence, RiskThreshold r);
// NB - max(NB_P, 0): gain over the better of treat-all and treat-none.
double net_benefit_gain(const JointTable& t, RiskThreshold r);
// NB recovered from NBI via NB = NBI (PPV - R) / (PPV - pi).
// Throws UndefinedMarginError when p == 0 and DomainError when PPV == pi.
double net_benefit_from_nbi(const JointTable& t, RiskThreshold r);

// Areas of the frequency-scaled ROC, which lives in a (1-pi) x pi rectangle
// with x = P(D-,M+) and y = P(D+,M+).
struct FrocAreas {
  double area;         // a (1-pi)/2 + d pi/2
  double chance_area;  // pi (1-pi)/2
  // area / (pi (1-pi)), the area as a fraction of the rectangle. Equals the
  // dichotomized AUC; area / chance_area is twice that.
  double ratio;
  double difference;   // area - chance_area, equal to MRS/4
};

// Throws UndefinedMarginError when pi is 0 or 1 (zero chance area).
FrocAreas froc_areas(const JointTable& t);

}  // namespace riskstrat
