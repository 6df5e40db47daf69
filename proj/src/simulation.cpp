#include "riskstrat/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>

#include "parallel.hpp"
#include "riskstrat/error.hpp"
#include "riskstrat/format.hpp"
#include "riskstrat/metrics.hpp"
#include "summation.hpp"

namespace riskstrat {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 replicate_engine(std::uint64_t seed, std::size_t index,
                                 std::uint64_t stream) {
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ static_cast<std::uint64_t>(index));
  key = splitmix64(key ^ (stream * 0xD1B54A32D192ED03ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(key),
                    static_cast<std::uint32_t>(key >> 32)};
  return std::mt19937_64(seq);
}

struct Replicate {
  bool degenerate = true;
  double mrs = 0, mrs_se = 0;
  bool mrs_covered = false;
  double youden = 0, youden_se = 0;
  bool youden_covered = false;
};

MetricSummary summarize(const std::vector<Replicate>& reps, std::size_t used,
                        double truth, double Replicate::*value,
                        double Replicate::*se, bool Replicate::*covered) {
  detail::CompensatedSum sum, se_sum;
  std::size_t hits = 0;
  for (const Replicate& r : reps) {
    if (r.degenerate) continue;
    sum.add(r.*value);
    se_sum.add(r.*se);
    if (r.*covered) ++hits;
  }
  const double count = static_cast<double>(used);
  const double mean = sum.value() / count;
  detail::CompensatedSum sq;
  for (const Replicate& r : reps) {
    if (r.degenerate) continue;
    const double dev = r.*value - mean;
    sq.add(dev * dev);
  }
  const double sd = used > 1 ? std::sqrt(sq.value() / (count - 1.0)) : 0.0;
  return {truth, mean, sd, se_sum.value() / count,
          100.0 * static_cast<double>(hits) / count};
}

}  // namespace

void SimConfig::validate() const {
  double sum = 0.0;
  for (double c : expected_cells) {
    if (!std::isfinite(c) || c < 0.0) {
      throw DomainError("expected cell counts must be nonnegative");
    }
    sum += c;
  }
  if (n < 1) throw DomainError("sample size n must be at least 1");
  if (!(sum > 0.0)) throw DomainError("expected cell counts are all zero");
  if (std::abs(sum - static_cast<double>(n)) > 0.5) {
    throw DomainError("expected cell counts sum to " + format_sig(sum) +
                      ", not n = " + std::to_string(n));
  }
  if (replicates < 1) throw DomainError("replicates must be at least 1");
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("confidence level must be in (0,1)");
  }
}

JointTable SimConfig::true_table() const {
  validate();
  const auto& e = expected_cells;
  return JointTable::from_counts(e[0], e[1], e[2], e[3])
      .with_n(static_cast<double>(n));
}

std::vector<LabeledConfig> reference_configs() {
  auto make = [](std::array<double, 4> cells) {
    SimConfig c;
    c.expected_cells = cells;
    c.n = 4589;
    return c;
  };
  return {
      {"0.78%", make({84.72, 19.73, 1951.88, 2532.67})},
      {"10%", make({29.63, 74.75, 177.70, 4306.92})},
      {"30%", make({19.74, 84.62, 46.52, 4438.11})},
  };
}

JointTable sample_table(const SimConfig& config, std::size_t replicate_index,
                        std::uint64_t stream) {
  const JointTable truth = config.true_table();
  std::mt19937_64 engine =
      replicate_engine(config.seed, replicate_index, stream);
  std::array<std::int64_t, 4> counts{};
  std::int64_t remaining = config.n;
  double mass = 1.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double p = truth.cells()[i];
    if (remaining == 0 || p <= 0.0) {
      mass -= p;
      continue;
    }
    const double conditional = std::clamp(p / mass, 0.0, 1.0);
    if (conditional >= 1.0) {
      counts[i] = remaining;
    } else {
      std::binomial_distribution<std::int64_t> draw(remaining, conditional);
      counts[i] = draw(engine);
    }
    remaining -= counts[i];
    mass -= p;
  }
  counts[3] = remaining;
  return JointTable::from_counts(static_cast<double>(counts[0]),
                                 static_cast<double>(counts[1]),
                                 static_cast<double>(counts[2]),
                                 static_cast<double>(counts[3]));
}

SimReport run_coverage(const SimConfig& config, unsigned workers) {
  const JointTable truth = config.true_table();
  if (truth.a() + truth.b() <= 0.0 || truth.c() + truth.d() <= 0.0) {
    throw DegenerateTableError(
        "simulation configuration has no cases or no controls");
  }
  const double true_mrs = mrs(truth);
  const double true_youden = youden(truth);

  std::vector<Replicate> reps(config.replicates);
  detail::parallel_for(reps.size(), workers, [&](std::size_t i) {
    const JointTable t = sample_table(config, i);
    Replicate r;
    if (t.a() + t.b() <= 0.0 || t.c() + t.d() <= 0.0 ||
        !(std::abs(mrs(t)) < 0.5)) {
      reps[i] = r;
      return;
    }
    const Estimate m = estimate_mrs(t, config.level);
    const Estimate j = estimate_youden(t, config.level);
    r.degenerate = false;
    r.mrs = m.value;
    r.mrs_se = m.se;
    r.mrs_covered = m.ci_low <= true_mrs && true_mrs <= m.ci_high;
    r.youden = j.value;
    r.youden_se = j.se;
    r.youden_covered = j.ci_low <= true_youden && true_youden <= j.ci_high;
    reps[i] = r;
  });

  const auto degenerate = static_cast<std::size_t>(
      std::count_if(reps.begin(), reps.end(),
                    [](const Replicate& r) { return r.degenerate; }));
  const std::size_t used = reps.size() - degenerate;
  if (used == 0) {
    throw DegenerateTableError("every simulated table was degenerate");
  }
  return {config,
          used,
          degenerate,
          summarize(reps, used, true_mrs, &Replicate::mrs, &Replicate::mrs_se,
                    &Replicate::mrs_covered),
          summarize(reps, used, true_youden, &Replicate::youden,
                    &Replicate::youden_se, &Replicate::youden_covered)};
}

PowerReport run_power(const SimConfig& config1, const SimConfig& config2,
                      TestMethod method, double alpha, Alternative alternative,
                      unsigned workers) {
  config1.validate();
  config2.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must be in (0,1)");
  }
  if (method != TestMethod::youden_ratio &&
      method != TestMethod::mrs_difference) {
    throw DomainError("unknown test method");
  }
  // 0 = skipped, 1 = not rejected, 2 = rejected
  std::vector<unsigned char> outcome(config1.replicates, 0);
  detail::parallel_for(outcome.size(), workers, [&](std::size_t i) {
    const JointTable t1 = sample_table(config1, i, 1);
    const JointTable t2 = sample_table(config2, i, 2);
    try {
      const TestResult r = compare_mrs(t1, t2, method, alternative);
      outcome[i] = r.p_value < alpha ? 2 : 1;
    } catch (const DomainError&) {
      outcome[i] = 0;
    } catch (const UndefinedMarginError&) {
      outcome[i] = 0;
    }
  });
  PowerReport rep{method, alternative, alpha, outcome.size(), 0, 0, 0.0, 0.0};
  for (unsigned char o : outcome) {
    if (o == 0) ++rep.skipped;
    if (o == 2) ++rep.rejections;
  }
  const std::size_t evaluated = rep.replicates - rep.skipped;
  if (evaluated == 0) {
    throw DegenerateTableError("test was undefined in every replicate");
  }
  const double rate =
      static_cast<double>(rep.rejections) / static_cast<double>(evaluated);
  rep.rejection_rate = rate;
  rep.mc_se = std::sqrt(rate * (1.0 - rate) / static_cast<double>(evaluated));
  return rep;
}

nlohmann::ordered_json to_json(const SimConfig& config) {
  return {{"expected_cells", config.expected_cells},
          {"n", config.n},
          {"replicates", config.replicates},
          {"seed", config.seed},
          {"level", config.level}};
}

namespace {

nlohmann::ordered_json to_json(const MetricSummary& s) {
  return {{"true_value", s.true_value},
          {"mean_estimate", s.mean_estimate},
          {"empirical_se", s.empirical_se},
          {"mean_estimated_se", s.mean_estimated_se},
          {"coverage_pct", s.coverage_pct}};
}

}  // namespace

nlohmann::ordered_json to_json(const SimReport& report) {
  return {{"config", to_json(report.config)},
          {"replicates_used", report.replicates_used},
          {"degenerate_replicates", report.degenerate},
          {"youden", to_json(report.youden)},
          {"mrs", to_json(report.mrs)}};
}

nlohmann::ordered_json to_json(const PowerReport& report) {
  return {{"method", to_string(report.method)},
          {"alternative", to_string(report.alternative)},
          {"alpha", report.alpha},
          {"replicates", report.replicates},
          {"skipped", report.skipped},
          {"rejections", report.rejections},
          {"rejection_rate", report.rejection_rate},
          {"mc_se", report.mc_se}};
}

std::string format_report_table(std::span<const LabeledReport> reports) {
  constexpr int kLabelWidth = 16;
  constexpr int kCellWidth = 12;
  std::ostringstream os;
  os << std::left << std::setw(kLabelWidth) << "";
  for (const LabeledReport& r : reports) {
    os << std::right << std::setw(2 * kCellWidth) << (r.label + " threshold");
  }
  os << '\n' << std::left << std::setw(kLabelWidth) << "";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    os << std::right << std::setw(kCellWidth) << "Youden"
       << std::setw(kCellWidth) << "MRS";
  }
  os << '\n';
  auto row = [&](const std::string& name, auto field) {
    os << std::left << std::setw(kLabelWidth) << name;
    for (const LabeledReport& r : reports) {
      os << std::right << std::setw(kCellWidth)
         << format_sig(field(r.report.youden)) << std::setw(kCellWidth)
         << format_sig(field(r.report.mrs));
    }
    os << '\n';
  };
  row("true parameter", [](const MetricSummary& s) { return s.true_value; });
  row("mean estimate", [](const MetricSummary& s) { return s.mean_estimate; });
  row("empirical se", [](const MetricSummary& s) { return s.empirical_se; });
  row("estimated se",
      [](const MetricSummary& s) { return s.mean_estimated_se; });
  const double level = reports.empty() ? 0.95 : reports.front().report.config.level;
  row(format_sig(100.0 * level) + "% CI",
      [](const MetricSummary& s) { return s.coverage_pct; });
  return os.str();
}

}  // namespace riskstrat
