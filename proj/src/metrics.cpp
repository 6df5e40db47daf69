#include "riskstrat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "riskstrat/error.hpp"

namespace riskstrat {

namespace {

double ratio_or_throw(double num, double den, const char* what) {
  if (den <= 0.0) {
    throw UndefinedMarginError(std::string(what) + " undefined: empty margin");
  }
  return num / den;
}

void require_in(double v, double lo, double hi, const char* what) {
  if (!(v >= lo && v <= hi)) {
    throw DomainError(std::string(what) + " out of range [" +
                      std::to_string(lo) + ", " + std::to_string(hi) +
                      "]: " + std::to_string(v));
  }
}

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw DomainError(std::string(what) + " must be in (0,1): " +
                      std::to_string(v));
  }
}

}  // namespace

double sensitivity(const JointTable& t) {
  return ratio_or_throw(t.a(), t.a() + t.b(), "sensitivity");
}

double specificity(const JointTable& t) {
  return ratio_or_throw(t.d(), t.c() + t.d(), "specificity");
}

double ppv(const JointTable& t) {
  return ratio_or_throw(t.a(), t.a() + t.c(), "PPV");
}

double cnpv(const JointTable& t) {
  return ratio_or_throw(t.b(), t.b() + t.d(), "cNPV");
}

double risk_difference(const JointTable& t) { return ppv(t) - cnpv(t); }

double mrs(const JointTable& t) {
  return 2.0 * (t.a() * t.d() - t.b() * t.c());
}

double youden(const JointTable& t) {
  return sensitivity(t) + specificity(t) - 1.0;
}

double auc_dichotomized(const JointTable& t) { return (youden(t) + 1.0) / 2.0; }

double mrs_from_youden(double youden_index, double prevalence) {
  require_in(youden_index, -1.0, 1.0, "Youden's index");
  require_open_unit(prevalence, "prevalence");
  return 2.0 * youden_index * prevalence * (1.0 - prevalence);
}

double mrs_from_auc(double auc, double prevalence) {
  require_in(auc, 0.0, 1.0, "AUC");
  require_open_unit(prevalence, "prevalence");
  return 4.0 * (auc - 0.5) * prevalence * (1.0 - prevalence);
}

double mrs_from_risk_difference(double risk_diff, double positivity) {
  require_in(risk_diff, -1.0, 1.0, "risk difference");
  require_open_unit(positivity, "positivity");
  return 2.0 * risk_diff * positivity * (1.0 - positivity);
}

double max_mrs(double prevalence) {
  require_open_unit(prevalence, "prevalence");
  return 2.0 * prevalence * (1.0 - prevalence);
}

double max_nbi(double prevalence) {
  require_open_unit(prevalence, "prevalence");
  return prevalence;
}

double max_nbi(double prevalence, RiskThreshold r) {
  return nbi(max_mrs(prevalence), r);
}

double fraction_of_max(const JointTable& t) { return youden(t); }

double nbi(double mrs_value, RiskThreshold r) {
  return (mrs_value / 2.0) / (1.0 - r.value());
}

double net_benefit(const JointTable& t, RiskThreshold r) {
  return t.a() - r.odds() * t.c();
}

double nb_all_positive(double prevalence, RiskThreshold r) {
  require_in(prevalence, 0.0, 1.0, "prevalence");
  return prevalence - r.odds() * (1.0 - prevalence);
}

double nb_random(double positivity, double prevalence, RiskThreshold r) {
  require_in(positivity, 0.0, 1.0, "positivity");
  require_in(prevalence, 0.0, 1.0, "prevalence");
  return prevalence * positivity -
         r.odds() * positivity * (1.0 - prevalence);
}

double net_benefit_gain(const JointTable& t, RiskThreshold r) {
  return net_benefit(t, r) -
         std::max(nb_all_positive(t.prevalence(), r), 0.0);
}

double net_benefit_from_nbi(const JointTable& t, RiskThreshold r) {
  const double pv = ppv(t);
  const double pi = t.prevalence();
  if (pv == pi) {
    throw DomainError("PPV equals prevalence; NB/NBI ratio undefined");
  }
  return nbi(mrs(t), r) * (pv - r.value()) / (pv - pi);
}

FrocAreas froc_areas(const JointTable& t) {
  const double pi = t.prevalence();
  const double chance = pi * (1.0 - pi) / 2.0;
  if (chance <= 0.0) {
    throw UndefinedMarginError("fROC undefined: prevalence is 0 or 1");
  }
  const double area = t.a() * (1.0 - pi) / 2.0 + t.d() * pi / 2.0;
  return {area, chance, area / (2.0 * chance), area - chance};
}

}  // namespace riskstrat
