#include "riskstrat/cohort.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "riskstrat/error.hpp"

namespace riskstrat {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits one CSV line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

double parse_number(std::string_view text, std::string_view column,
                    std::size_t row) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw DataError("column '" + std::string(column) +
                        "': not a number: '" + std::string(text) + "'",
                    row);
  }
  return value;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) {
    std::ostringstream os;
    os << what << " must be in (0,1), got " << v;
    throw DomainError(os.str());
  }
}

}  // namespace

PopulationSpec::PopulationSpec(double prevalence, std::string label)
    : prevalence_(prevalence), label_(std::move(label)) {
  require_open_unit(prevalence, "population prevalence");
}

RiskDataset read_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  std::vector<std::string> header;
  bool have_header = false;
  while (std::getline(in, line)) {
    std::string_view view = line;
    if (!have_header && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    const std::string_view t = trim(view);
    if (t.empty() || t.front() == '#') continue;
    header = split_csv_line(t);
    have_header = true;
    break;
  }
  if (!have_header) throw DataError("file is empty: no header row");

  const auto score_col = find_column(header, schema.score_column);
  const auto outcome_col = find_column(header, schema.outcome_column);
  const auto weight_col = find_column(header, schema.weight_column);
  if (!score_col) throw DataError("missing column '" + schema.score_column + "'");
  if (!outcome_col) {
    throw DataError("missing column '" + schema.outcome_column + "'");
  }
  if (schema.require_weight && !weight_col) {
    throw DataError("missing column '" + schema.weight_column + "'");
  }

  std::vector<Record> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    ++row;
    const std::vector<std::string> fields = split_csv_line(t);
    if (fields.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) +
                          " fields, found " + std::to_string(fields.size()),
                      row);
    }
    Record rec{};
    rec.score = parse_number(fields[*score_col], schema.score_column, row);
    const double outcome =
        parse_number(fields[*outcome_col], schema.outcome_column, row);
    if (outcome != 0.0 && outcome != 1.0) {
      throw DataError("outcome must be 0 or 1, found '" +
                          fields[*outcome_col] + "'",
                      row);
    }
    rec.outcome = outcome == 1.0;
    rec.weight = 1.0;
    if (weight_col) {
      rec.weight = parse_number(fields[*weight_col], schema.weight_column, row);
      if (!(rec.weight > 0.0) || !std::isfinite(rec.weight)) {
        throw DataError("weight must be positive, found '" +
                            fields[*weight_col] + "'",
                        row);
      }
    }
    if (!std::isfinite(rec.score)) throw DataError("score is not finite", row);
    if (schema.is_risk_scale && (rec.score < 0.0 || rec.score > 1.0)) {
      throw DataError("risk score outside [0,1]: '" + fields[*score_col] + "'",
                      row);
    }
    records.push_back(rec);
  }
  if (records.empty()) throw DataError("file has a header but no data rows");
  return RiskDataset(std::move(records), schema.is_risk_scale);
}

RiskDataset load_csv(const std::filesystem::path& path,
                     const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_csv(in, schema);
}

void write_csv(std::ostream& out, const RiskDataset& data) {
  char buf[64];
  out << "score,outcome,weight\n";
  for (const Record& r : data.records()) {
    auto res = std::to_chars(buf, buf + sizeof buf, r.score);
    out.write(buf, res.ptr - buf);
    out << ',' << (r.outcome ? '1' : '0') << ',';
    res = std::to_chars(buf, buf + sizeof buf, r.weight);
    out.write(buf, res.ptr - buf);
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const RiskDataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(out, data);
}

std::string to_json(const RiskDataset& data,
                    const std::optional<PopulationSpec>& population) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kJsonSchemaVersion;
  doc["is_risk_scale"] = data.is_risk_scale();
  auto& recs = doc["records"] = nlohmann::ordered_json::array();
  for (const Record& r : data.records()) {
    recs.push_back({{"score", r.score},
                    {"outcome", r.outcome ? 1 : 0},
                    {"weight", r.weight}});
  }
  if (population) {
    doc["population"] = {{"label", population->label()},
                         {"prevalence", population->prevalence()}};
  } else {
    doc["population"] = nullptr;
  }
  return doc.dump(2);
}

JsonImport from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (doc.at("schema_version").get<int>() != kJsonSchemaVersion) {
      throw DataError("unsupported schema_version");
    }
    const bool risk_scale = doc.value("is_risk_scale", true);
    std::vector<Record> records;
    std::size_t row = 0;
    for (const auto& r : doc.at("records")) {
      ++row;
      const int outcome = r.at("outcome").get<int>();
      if (outcome != 0 && outcome != 1) {
        throw DataError("outcome must be 0 or 1", row);
      }
      records.push_back({r.at("score").get<double>(), outcome == 1,
                         r.value("weight", 1.0)});
    }
    std::optional<PopulationSpec> population;
    if (doc.contains("population") && !doc["population"].is_null()) {
      const auto& p = doc["population"];
      population.emplace(p.at("prevalence").get<double>(),
                         p.value("label", std::string()));
    }
    return {RiskDataset(std::move(records), risk_scale), population};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed dataset JSON: ") + e.what());
  }
}

double control_weight_factor(double source_prevalence,
                             double target_prevalence) {
  require_open_unit(source_prevalence, "source prevalence");
  require_open_unit(target_prevalence, "target prevalence");
  return source_prevalence * (1.0 - target_prevalence) /
         (target_prevalence * (1.0 - source_prevalence));
}

Reweighting reweight_to_prevalence(const RiskDataset& data,
                                   const PopulationSpec& target,
                                   WeightRounding rounding) {
  const double exact =
      control_weight_factor(data.prevalence(), target.prevalence());
  double applied = exact;
  if (rounding == WeightRounding::nearest_integer) {
    applied = std::max(1.0, std::round(exact));
  }
  std::vector<Record> records = data.records();
  for (Record& r : records) {
    if (!r.outcome) r.weight *= applied;
  }
  return {RiskDataset(std::move(records), data.is_risk_scale()), exact,
          applied};
}

double rescale_risk_prior(double risk, double old_prior, double new_prior) {
  require_open_unit(old_prior, "old prior");
  require_open_unit(new_prior, "new prior");
  if (!(risk > 0.0 && risk < 1.0)) {
    std::ostringstream os;
    os << "risk must be strictly inside (0,1) to rescale, got " << risk;
    throw BoundaryError(os.str());
  }
  if (new_prior == old_prior) return risk;
  // odds' = odds * [new/(1-new)] / [old/(1-old)], grouped to limit rounding.
  const double odds = (risk / (1.0 - risk)) *
                      ((new_prior * (1.0 - old_prior)) /
                       (old_prior * (1.0 - new_prior)));
  return odds / (1.0 + odds);
}

std::vector<double> rescale_risk_prior(std::span<const double> risks,
                                       double old_prior, double new_prior) {
  std::vector<double> out;
  out.reserve(risks.size());
  for (double r : risks) out.push_back(rescale_risk_prior(r, old_prior, new_prior));
  return out;
}

RiskDataset rescale_risk_prior(const RiskDataset& data, double old_prior,
                               double new_prior) {
  if (!data.is_risk_scale()) {
    throw DomainError("prior rescaling requires calibrated risk scores");
  }
  std::vector<Record> records = data.records();
  std::size_t row = 0;
  for (Record& r : records) {
    ++row;
    try {
      r.score = rescale_risk_prior(r.score, old_prior, new_prior);
    } catch (const BoundaryError& e) {
      throw BoundaryError("row " + std::to_string(row) + ": " + e.what());
    }
  }
  return RiskDataset(std::move(records), true);
}

}  // namespace riskstrat
