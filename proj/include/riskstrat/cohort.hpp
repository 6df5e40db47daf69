#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskstrat/dataset.hpp"

namespace riskstrat {

// A population characterized by its disease prevalence.
class PopulationSpec {
 public:
  // Throws DomainError unless 0 < prevalence < 1.
  PopulationSpec(double prevalence, std::string label = "");

  double prevalence() const noexcept { return prevalence_; }
  const std::string& label() const noexcept { return label_; }

 private:
  double prevalence_;
  std::string label_;
};

struct CsvSchema {
  std::string score_column = "score";
  std::string outcome_column = "outcome";
  // Used when present in the header; a missing weight column means unit
  // weights. Set require_weight to make it mandatory.
  std::string weight_column = "weight";
  bool require_weight = false;
  bool is_risk_scale = true;
};

// Reads a header-first, comma-separated file. Lines starting with '#' before
// the header are skipped, as are blank lines anywhere. Outcomes must be 0 or 1
// and weights positive. Errors are DataError; row numbers count data rows
// from 1, excluding comments and the header.
RiskDataset load_csv(const std::filesystem::path& path,
                     const CsvSchema& schema = {});
RiskDataset read_csv(std::istream& in, const CsvSchema& schema = {});

// Writes score,outcome,weight with round-trip precision.
void write_csv(std::ostream& out, const RiskDataset& data);
void save_csv(const std::filesystem::path& path, const RiskDataset& data);

// {"schema_version": 1, "records": [...], "population": {...}}
inline constexpr int kJsonSchemaVersion = 1;
std::string to_json(const RiskDataset& data,
                    const std::optional<PopulationSpec>& population);
struct JsonImport {
  RiskDataset data;
  std::optional<PopulationSpec> population;
};
// The dataset is taken as risk scale unless the document says otherwise.
JsonImport from_json(const std::string& text);

enum class WeightRounding { exact, nearest_integer };

// Multiplier for control weights that moves the weighted prevalence from
// `source` to `target`: source (1 - target) / (target (1 - source)).
double control_weight_factor(double source_prevalence,
                             double target_prevalence);

struct Reweighting {
  RiskDataset data;
  double exact_factor;
  double applied_factor;
};

// Multiplies every control weight by control_weight_factor(prevalence of
// `data`, target). With WeightRounding::nearest_integer the factor is rounded
// (at least 1), and the resulting prevalence only approximates the target.
Reweighting reweight_to_prevalence(
    const RiskDataset& data, const PopulationSpec& target,
    WeightRounding rounding = WeightRounding::exact);

// Moves a calibrated risk from one population prior to another, holding the
// Bayes factor fixed: posterior odds = [r/(1-r)] / [old/(1-old)] * new/(1-new).
// Throws BoundaryError for risks of exactly 0 or 1 and DomainError for priors
// outside (0,1).
double rescale_risk_prior(double risk, double old_prior, double new_prior);
std::vector<double> rescale_risk_prior(std::span<const double> risks,
                                       double old_prior, double new_prior);
// Applies rescale_risk_prior to every score of a risk-scale dataset.
RiskDataset rescale_risk_prior(const RiskDataset& data, double old_prior,
                               double new_prior);

}  // namespace riskstrat
