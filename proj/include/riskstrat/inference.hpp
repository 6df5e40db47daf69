#pragma once

#include <array>
#include <string_view>

#include "riskstrat/joint_table.hpp"

// Delta-method inference for MRS and Youden's index under the quadrinomial
// model of a 2x2 table with n subjects.

namespace riskstrat {

struct Estimate {
  double value;
  double se;
  double ci_low;
  double ci_high;
  double level;
};

enum class TestMethod { youden_ratio, mrs_difference };
enum class Alternative { two_sided, greater, less };

std::string_view to_string(TestMethod m);
std::string_view to_string(Alternative a);

struct TestResult {
  double statistic;  // z-score
  double p_value;
  TestMethod method;
  Alternative alternative;
};

// Gradients with respect to (a, b, c, d).
std::array<double, 4> mrs_gradient(const JointTable& t);
// Throws UndefinedMarginError when a D margin is empty.
std::array<double, 4> youden_gradient(const JointTable& t);

// g' V g with V the quadrinomial covariance of the cell proportions,
// V_ij = (p_i [i==j] - p_i p_j) / n. Requires a sample size.
double quadrinomial_variance(const JointTable& t,
                             const std::array<double, 4>& gradient);

// 4 {ad(a+d) + bc(b+c) - MRS^2} / n.
double var_mrs(const JointTable& t);
double var_youden(const JointTable& t);

// Interval built on the logit(0.5 + MRS) scale and mapped back with
// x -> e^x/(1+e^x) - 1/2, so both endpoints stay inside (-0.5, 0.5).
// Throws BoundaryError when |MRS| >= 0.5.
Estimate ci_mrs(double mrs_value, double variance, double level = 0.95);

// Point estimate plus logit interval from a sampled table.
Estimate estimate_mrs(const JointTable& t, double level = 0.95);
// Wald interval J +- z se, clipped to [-1, 1].
Estimate estimate_youden(const JointTable& t, double level = 0.95);

// Two-sample comparison of MRS within one population through the ratio of
// Youden's indices: z = log(J1/J2) / sqrt(V_J1/J1^2 + V_J2/J2^2). The tables
// are treated as independent. Throws DomainError unless J1, J2 > 0.
TestResult test_mrs_ratio(const JointTable& t1, const JointTable& t2,
                          Alternative alt = Alternative::two_sided);

// z = (MRS1 - MRS2) / sqrt(Var(MRS1) + Var(MRS2)).
TestResult test_mrs_difference(const JointTable& t1, const JointTable& t2,
                               Alternative alt = Alternative::two_sided);

TestResult compare_mrs(const JointTable& t1, const JointTable& t2,
                       TestMethod method,
                       Alternative alt = Alternative::two_sided);

// p-value of a z statistic under the given alternative.
double p_value(double z, Alternative alt);

}  // namespace riskstrat
