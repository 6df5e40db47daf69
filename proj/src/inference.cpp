#include "riskstrat/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskstrat/error.hpp"
#include "riskstrat/metrics.hpp"
#include "riskstrat/normal.hpp"

namespace riskstrat {

std::string_view to_string(TestMethod m) {
  switch (m) {
    case TestMethod::youden_ratio:
      return "youden_ratio";
    case TestMethod::mrs_difference:
      return "mrs_difference";
  }
  return "unknown";
}

std::string_view to_string(Alternative a) {
  switch (a) {
    case Alternative::two_sided:
      return "two_sided";
    case Alternative::greater:
      return "greater";
    case Alternative::less:
      return "less";
  }
  return "unknown";
}

std::array<double, 4> mrs_gradient(const JointTable& t) {
  return {2.0 * t.d(), -2.0 * t.c(), -2.0 * t.b(), 2.0 * t.a()};
}

std::array<double, 4> youden_gradient(const JointTable& t) {
  const double cases = t.a() + t.b();
  const double controls = t.c() + t.d();
  if (cases <= 0.0 || controls <= 0.0) {
    throw UndefinedMarginError(
        "Youden gradient undefined: table has no cases or no controls");
  }
  const double cases2 = cases * cases;
  const double controls2 = controls * controls;
  return {t.b() / cases2, -t.a() / cases2, -t.d() / controls2,
          t.c() / controls2};
}

double quadrinomial_variance(const JointTable& t,
                             const std::array<double, 4>& g) {
  const double n = t.require_n();
  const auto& p = t.cells();
  // g'Vg = sum_i g_i^2 p_i - (sum_i g_i p_i)^2
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    mean += g[i] * p[i];
    second += g[i] * g[i] * p[i];
  }
  return std::max(second - mean * mean, 0.0) / n;
}

double var_mrs(const JointTable& t) {
  const double n = t.require_n();
  const double a = t.a(), b = t.b(), c = t.c(), d = t.d();
  const double m = mrs(t);
  const double v = 4.0 * (a * d * (a + d) + b * c * (b + c) - m * m) / n;
  return std::max(v, 0.0);
}

double var_youden(const JointTable& t) {
  return quadrinomial_variance(t, youden_gradient(t));
}

Estimate ci_mrs(double mrs_value, double variance, double level) {
  if (!(std::abs(mrs_value) < 0.5)) {
    throw BoundaryError("logit interval undefined at |MRS| = 0.5");
  }
  if (!(variance >= 0.0)) {
    throw DomainError("variance must be nonnegative");
  }
  const double z = normal::critical_value(level);
  const double hi_part = 0.5 + mrs_value;
  const double lo_part = 0.5 - mrs_value;
  const double centre = std::log(hi_part / lo_part);
  const double se_logit = std::sqrt(variance) / (hi_part * lo_part);
  auto back = [](double x) { return 1.0 / (1.0 + std::exp(-x)) - 0.5; };
  double lo = back(centre - z * se_logit);
  double hi = back(centre + z * se_logit);
  // The back-transform of the centre reproduces mrs_value only up to
  // rounding; keep the interval ordered around the point estimate.
  lo = std::min(lo, mrs_value);
  hi = std::max(hi, mrs_value);
  return {mrs_value, std::sqrt(variance), lo, hi, level};
}

Estimate estimate_mrs(const JointTable& t, double level) {
  return ci_mrs(mrs(t), var_mrs(t), level);
}

Estimate estimate_youden(const JointTable& t, double level) {
  const double j = youden(t);
  const double se = std::sqrt(var_youden(t));
  const double z = normal::critical_value(level);
  return {j, se, std::max(j - z * se, -1.0), std::min(j + z * se, 1.0), level};
}

double p_value(double z, Alternative alt) {
  if (std::isnan(z)) throw DomainError("test statistic is NaN");
  switch (alt) {
    case Alternative::two_sided:
      return std::min(1.0, 2.0 * normal::sf(std::abs(z)));
    case Alternative::greater:
      return normal::sf(z);
    case Alternative::less:
      return normal::cdf(z);
  }
  return 1.0;
}

namespace {

// z = num / sqrt(var), with the conventions 0/0 -> 0 and x/0 -> +-inf.
double z_score(double num, double var) {
  if (var > 0.0) return num / std::sqrt(var);
  if (num == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), num);
}

}  // namespace

TestResult test_mrs_ratio(const JointTable& t1, const JointTable& t2,
                          Alternative alt) {
  const double j1 = youden(t1);
  const double j2 = youden(t2);
  if (!(j1 > 0.0) || !(j2 > 0.0)) {
    throw DomainError(
        "ratio test requires both Youden's indices to be positive");
  }
  const double v12 = var_youden(t1) / (j1 * j1) + var_youden(t2) / (j2 * j2);
  const double z = z_score(std::log(j1 / j2), v12);
  return {z, p_value(z, alt), TestMethod::youden_ratio, alt};
}

TestResult test_mrs_difference(const JointTable& t1, const JointTable& t2,
                               Alternative alt) {
  const double z = z_score(mrs(t1) - mrs(t2), var_mrs(t1) + var_mrs(t2));
  return {z, p_value(z, alt), TestMethod::mrs_difference, alt};
}

TestResult compare_mrs(const JointTable& t1, const JointTable& t2,
                       TestMethod method, Alternative alt) {
  switch (method) {
    case TestMethod::youden_ratio:
      return test_mrs_ratio(t1, t2, alt);
    case TestMethod::mrs_difference:
      return test_mrs_difference(t1, t2, alt);
  }
  throw DomainError("unknown test method");
}

}  // namespace riskstrat
