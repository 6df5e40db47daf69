#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskstrat/inference.hpp"
#include "riskstrat/joint_table.hpp"

// Quadrinomial Monte Carlo for the sampling behaviour of the MRS and Youden
// estimators and of the two-sample tests.
//
// Every replicate draws from its own generator, keyed by (seed, replicate
// index, stream), and results are reduced in replicate order. Reports are
// therefore bit-identical for any worker count.

namespace riskstrat {

inline constexpr std::uint64_t kDefaultSeed = 20180501;
inline constexpr std::size_t kDefaultReplicates = 100000;

struct SimConfig {
  // Expected [a, b, c, d] counts; probabilities are cells / sum(cells).
  std::array<double, 4> expected_cells{};
  std::int64_t n = 0;
  std::size_t replicates = kDefaultReplicates;
  std::uint64_t seed = kDefaultSeed;
  double level = 0.95;

  // Throws DomainError unless cells are nonnegative with a positive sum that
  // rounds to n (|sum - n| <= 0.5), n >= 1, replicates >= 1 and the level is
  // in (0,1).
  void validate() const;
  // The table the sampler draws from, carrying sample size n.
  JointTable true_table() const;
};

struct LabeledConfig {
  std::string label;
  SimConfig config;
};

// Expected cell counts at the 0.78%, 10% and 30% risk thresholds of a
// 4589-subject cohort (102 carriers), labelled "0.78%", "10%", "30%".
std::vector<LabeledConfig> reference_configs();

// One quadrinomial draw of n subjects. Deterministic in (seed, index,
// stream).
JointTable sample_table(const SimConfig& config, std::size_t replicate_index,
                        std::uint64_t stream = 0);

struct MetricSummary {
  double true_value;
  double mean_estimate;
  double empirical_se;       // SD of the estimates across replicates
  double mean_estimated_se;  // average delta-method se
  double coverage_pct;       // % of intervals containing true_value
};

struct SimReport {
  SimConfig config;
  std::size_t replicates_used;
  // Replicates with an empty D margin (or |MRS| = 0.5), excluded from the
  // summaries.
  std::size_t degenerate;
  MetricSummary mrs;     // logit interval
  MetricSummary youden;  // Wald interval
};

// Throws DegenerateTableError when the configuration itself has an empty D
// margin or every replicate is degenerate. workers == 0 uses all cores.
SimReport run_coverage(const SimConfig& config, unsigned workers = 0);

struct PowerReport {
  TestMethod method;
  Alternative alternative;
  double alpha;
  std::size_t replicates;
  // Replicates where the test was undefined (empty margin, J <= 0 for the
  // ratio test); excluded from the rate.
  std::size_t skipped;
  std::size_t rejections;
  double rejection_rate;
  double mc_se;  // binomial standard error of rejection_rate
};

// Draws replicate i of table 1 from config1 (stream 1) and of table 2 from
// config2 (stream 2), runs the test, and reports the fraction of p < alpha.
// Uses config1.replicates.
PowerReport run_power(const SimConfig& config1, const SimConfig& config2,
                      TestMethod method, double alpha = 0.05,
                      Alternative alternative = Alternative::two_sided,
                      unsigned workers = 0);

nlohmann::ordered_json to_json(const SimConfig& config);
nlohmann::ordered_json to_json(const SimReport& report);
nlohmann::ordered_json to_json(const PowerReport& report);

struct LabeledReport {
  std::string label;
  SimReport report;
};

// Aligned text table: one Youden and one MRS column per configuration, rows
// true parameter / mean estimate / empirical se / estimated se / CI coverage.
// Numbers carry 6 significant digits.
std::string format_report_table(std::span<const LabeledReport> reports);

}  // namespace riskstrat
