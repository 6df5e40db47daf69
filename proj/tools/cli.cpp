#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskstrat/cohort.hpp"
#include "riskstrat/curves.hpp"
#include "riskstrat/error.hpp"
#include "riskstrat/format.hpp"
#include "riskstrat/inference.hpp"
#include "riskstrat/metrics.hpp"
#include "riskstrat/simulation.hpp"

namespace riskstrat::cli {

namespace {

using Json = nlohmann::ordered_json;

// Flag values that parse but do not make sense together or are out of range.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double parse_number(std::string_view text, const std::string& what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double v = 0.0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(v)) {
    throw UsageError(what + ": '" + std::string(text) + "' is not a finite number");
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    values.push_back(parse_number(
        std::string_view(text).substr(start, comma == std::string::npos
                                                 ? std::string::npos
                                                 : comma - start),
        what));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

std::array<double, 4> parse_cells(const std::string& text, const std::string& flag) {
  const std::vector<double> v = parse_list(text, flag);
  if (v.size() != 4) {
    throw UsageError(flag + " needs four comma-separated counts a,b,c,d, got " +
                     std::to_string(v.size()));
  }
  double total = 0.0;
  for (double x : v) {
    if (x < 0.0) throw UsageError(flag + ": counts must be nonnegative");
    total += x;
  }
  if (!(total > 0.0)) throw UsageError(flag + ": counts sum to zero");
  return {v[0], v[1], v[2], v[3]};
}

JointTable table_from(const std::array<double, 4>& cells, std::optional<double> n,
                      const std::string& flag) {
  JointTable t = JointTable::from_counts(cells[0], cells[1], cells[2], cells[3]);
  if (n) {
    if (!(*n > 0.0) || !std::isfinite(*n)) {
      throw UsageError(flag + " must be a positive sample size");
    }
    t = t.with_n(*n);
  }
  return t;
}

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw UsageError("--level must be in (0,1)");
  }
}

std::string csv_field(std::optional<double> v) {
  return v ? format_sig(*v) : std::string();
}

Json json_number(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

Json estimate_json(const Estimate& e) {
  return {{"value", e.value},   {"se", e.se},       {"ci_low", e.ci_low},
          {"ci_high", e.ci_high}, {"level", e.level}};
}

// Computes f(), or records a warning and yields nothing when the quantity is
// undefined for this input.
template <typename F>
auto try_compute(F&& f, const std::string& name, Json& warnings)
    -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const Error& e) {
    warnings.push_back(name + ": " + e.what());
    return std::nullopt;
  }
}

// Destination for a report: the --output file when given, else stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw DataError("cannot write '" + path + "'");
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

void emit_json(std::ostream& os, const Json& doc) { os << doc.dump(2) << '\n'; }

void emit_config_comment(std::ostream& os, const std::string& command,
                         const Json& config) {
  os << "# riskstrat " << command << " config=" << config.dump() << '\n';
}

struct TextTable {
  std::vector<std::pair<std::string, std::string>> rows;

  void add(const std::string& key, std::optional<double> v) {
    rows.emplace_back(key, v ? format_sig(*v) : std::string("undefined"));
  }
  void add(const std::string& key, const std::string& v) {
    rows.emplace_back(key, v);
  }
  void write(std::ostream& os) const {
    std::size_t width = 0;
    for (const auto& [k, v] : rows) width = std::max(width, k.size());
    for (const auto& [k, v] : rows) {
      os << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
    }
  }
};

// ---------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string cells;
  std::optional<double> n;
  std::string r;
  double level = 0.95;
  std::string format = "json";
  std::string output;
};

int cmd_metrics(const MetricsArgs& args, std::ostream& out) {
  const std::array<double, 4> cells = parse_cells(args.cells, "--cells");
  require_level(args.level);
  std::vector<double> risks;
  if (!args.r.empty()) {
    risks = parse_list(args.r, "--r");
    for (double r : risks) {
      if (!(r > 0.0 && r < 1.0)) throw UsageError("--r values must be in (0,1)");
    }
  }
  const JointTable t = table_from(cells, args.n, "--n");
  const double pi = t.prevalence();

  Json warnings = Json::array();
  const auto sens = try_compute([&] { return sensitivity(t); }, "sensitivity", warnings);
  const auto spec = try_compute([&] { return specificity(t); }, "specificity", warnings);
  const auto pv = try_compute([&] { return ppv(t); }, "ppv", warnings);
  const auto cn = try_compute([&] { return cnpv(t); }, "cnpv", warnings);
  const auto rd = (pv && cn) ? std::optional(*pv - *cn) : std::nullopt;
  const double m = mrs(t);
  const auto j = (sens && spec) ? std::optional(youden(t)) : std::nullopt;
  const auto auc = j ? std::optional(auc_dichotomized(t)) : std::nullopt;
  const auto mmax = try_compute([&] { return max_mrs(pi); }, "max_mrs", warnings);
  const auto mrs_est =
      try_compute([&] { return estimate_mrs(t, args.level); }, "mrs_estimate", warnings);
  const auto j_est = j ? try_compute([&] { return estimate_youden(t, args.level); },
                                     "youden_estimate", warnings)
                       : std::nullopt;
  const auto froc = try_compute([&] { return froc_areas(t); }, "froc", warnings);

  Json config = {{"cells", cells},
                 {"n", t.require_n()},
                 {"r", risks},
                 {"level", args.level}};
  Sink sink(args.output, out);
  std::ostream& os = sink.stream();

  if (args.format == "text") {
    emit_config_comment(os, "metrics", config);
    TextTable tt;
    tt.add("prevalence", pi);
    tt.add("positivity", t.positivity());
    tt.add("sensitivity", sens);
    tt.add("specificity", spec);
    tt.add("ppv", pv);
    tt.add("cnpv", cn);
    tt.add("risk_difference", rd);
    tt.add("mrs", m);
    tt.add("mrs_se", mrs_est ? std::optional(mrs_est->se) : std::nullopt);
    tt.add("mrs_ci_low", mrs_est ? std::optional(mrs_est->ci_low) : std::nullopt);
    tt.add("mrs_ci_high", mrs_est ? std::optional(mrs_est->ci_high) : std::nullopt);
    tt.add("youden", j);
    tt.add("youden_se", j_est ? std::optional(j_est->se) : std::nullopt);
    tt.add("youden_ci_low", j_est ? std::optional(j_est->ci_low) : std::nullopt);
    tt.add("youden_ci_high", j_est ? std::optional(j_est->ci_high) : std::nullopt);
    tt.add("auc_dichotomized", auc);
    tt.add("max_mrs", mmax);
    tt.add("fraction_of_max", j);
    tt.add("froc_area", froc ? std::optional(froc->area) : std::nullopt);
    tt.add("froc_ratio", froc ? std::optional(froc->ratio) : std::nullopt);
    tt.add("froc_difference", froc ? std::optional(froc->difference) : std::nullopt);
    for (double r : risks) {
      const RiskThreshold rt(r);
      const std::string s = "[R=" + format_sig(r) + "] ";
      tt.add(s + "nbi", nbi(m, rt));
      tt.add(s + "nb", net_benefit(t, rt));
      tt.add(s + "nb_all_positive", nb_all_positive(pi, rt));
      tt.add(s + "nb_random", nb_random(t.positivity(), pi, rt));
      tt.add(s + "nb_gain", net_benefit_gain(t, rt));
    }
    tt.write(os);
    for (const auto& w : warnings) os << "# warning: " << w.get<std::string>() << '\n';
    return kOk;
  }

  Json doc;
  doc["command"] = "metrics";
  doc["config"] = config;
  doc["table"] = {{"a", t.a()}, {"b", t.b()}, {"c", t.c()}, {"d", t.d()},
                  {"n", t.require_n()}};
  doc["prevalence"] = pi;
  doc["positivity"] = t.positivity();
  doc["sensitivity"] = json_number(sens);
  doc["specificity"] = json_number(spec);
  doc["ppv"] = json_number(pv);
  doc["cnpv"] = json_number(cn);
  doc["risk_difference"] = json_number(rd);
  doc["mrs"] = m;
  doc["youden"] = json_number(j);
  doc["auc_dichotomized"] = json_number(auc);
  doc["max_mrs"] = json_number(mmax);
  doc["fraction_of_max"] = json_number(j);
  doc["mrs_estimate"] = mrs_est ? estimate_json(*mrs_est) : Json(nullptr);
  doc["youden_estimate"] = j_est ? estimate_json(*j_est) : Json(nullptr);
  doc["froc"] = froc ? Json{{"area", froc->area},
                            {"chance_area", froc->chance_area},
                            {"ratio", froc->ratio},
                            {"difference", froc->difference}}
                     : Json(nullptr);
  Json decision = Json::array();
  for (double r : risks) {
    const RiskThreshold rt(r);
    decision.push_back({{"risk_threshold", r},
                        {"nbi", nbi(m, rt)},
                        {"nb", net_benefit(t, rt)},
                        {"nb_all_positive", nb_all_positive(pi, rt)},
                        {"nb_random", nb_random(t.positivity(), pi, rt)},
                        {"nb_gain", net_benefit_gain(t, rt)}});
  }
  doc["decision"] = decision;
  doc["warnings"] = warnings;
  emit_json(os, doc);
  return kOk;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::string cells1, cells2;
  std::optional<double> n1, n2;
  std::string method = "ratio";
  std::string alternative = "two_sided";
  std::string format = "json";
  std::string output;
};

Alternative parse_alternative(const std::string& s) {
  if (s == "greater") return Alternative::greater;
  if (s == "less") return Alternative::less;
  return Alternative::two_sided;
}

Json table_summary(const JointTable& t, Json& warnings, const std::string& name) {
  const auto j = try_compute([&] { return youden(t); }, name + " youden", warnings);
  const auto vj = j ? try_compute([&] { return var_youden(t); }, name + " youden se",
                                  warnings)
                    : std::nullopt;
  return {{"n", t.require_n()},
          {"prevalence", t.prevalence()},
          {"mrs", mrs(t)},
          {"mrs_se", std::sqrt(var_mrs(t))},
          {"youden", json_number(j)},
          {"youden_se", vj ? Json(std::sqrt(*vj)) : Json(nullptr)}};
}

int cmd_compare(const CompareArgs& args, std::ostream& out) {
  const JointTable t1 = table_from(parse_cells(args.cells1, "--cells1"), args.n1, "--n1");
  const JointTable t2 = table_from(parse_cells(args.cells2, "--cells2"), args.n2, "--n2");
  const Alternative alt = parse_alternative(args.alternative);

  Json warnings = Json::array();
  std::vector<TestResult> results;
  if (args.method == "ratio") {
    results.push_back(test_mrs_ratio(t1, t2, alt));
  } else if (args.method == "difference") {
    results.push_back(test_mrs_difference(t1, t2, alt));
  } else {
    if (auto r = try_compute([&] { return test_mrs_ratio(t1, t2, alt); },
                             "youden_ratio", warnings)) {
      results.push_back(*r);
    }
    results.push_back(test_mrs_difference(t1, t2, alt));
  }

  Json config = {{"cells1", parse_cells(args.cells1, "--cells1")},
                 {"cells2", parse_cells(args.cells2, "--cells2")},
                 {"n1", t1.require_n()},
                 {"n2", t2.require_n()},
                 {"method", args.method},
                 {"alternative", args.alternative}};
  Sink sink(args.output, out);
  std::ostream& os = sink.stream();
  const Json s1 = table_summary(t1, warnings, "table1");
  const Json s2 = table_summary(t2, warnings, "table2");

  if (args.format == "text") {
    emit_config_comment(os, "compare", config);
    TextTable tt;
    tt.add("table1 mrs", s1["mrs"].get<double>());
    tt.add("table2 mrs", s2["mrs"].get<double>());
    for (const TestResult& r : results) {
      const std::string m(to_string(r.method));
      tt.add(m + " statistic", r.statistic);
      tt.add(m + " p_value", r.p_value);
    }
    tt.write(os);
    for (const auto& w : warnings) os << "# warning: " << w.get<std::string>() << '\n';
    return kOk;
  }

  Json tests = Json::array();
  for (const TestResult& r : results) {
    tests.push_back({{"method", to_string(r.method)},
                     {"alternative", to_string(r.alternative)},
                     {"statistic", json_number(r.statistic)},
                     {"p_value", r.p_value}});
  }
  Json doc;
  doc["command"] = "compare";
  doc["config"] = config;
  doc["table1"] = s1;
  doc["table2"] = s2;
  doc["tests"] = tests;
  doc["warnings"] = warnings;
  emit_json(os, doc);
  return kOk;
}

// ---------------------------------------------------------------- data input

struct DataArgs {
  std::string input;
  CsvSchema schema;
  bool raw_marker = false;
};

void add_data_options(CLI::App* sub, DataArgs& d) {
  sub->add_option("--input,-i", d.input, "Cohort CSV (score, outcome, optional weight)")
      ->required();
  sub->add_option("--score-column", d.schema.score_column, "Score column name")
      ->capture_default_str();
  sub->add_option("--outcome-column", d.schema.outcome_column,
                  "Outcome column name (values 0/1)")
      ->capture_default_str();
  sub->add_option("--weight-column", d.schema.weight_column,
                  "Weight column name (optional in the file)")
      ->capture_default_str();
  sub->add_flag("--require-weight", d.schema.require_weight,
                "Fail if the weight column is missing");
  sub->add_flag("--raw-marker", d.raw_marker,
                "Scores are a raw marker, not calibrated risks in [0,1]");
}

RiskDataset load(const DataArgs& d) {
  CsvSchema s = d.schema;
  s.is_risk_scale = !d.raw_marker;
  return load_csv(d.input, s);
}

Json data_config(const DataArgs& d) {
  return {{"input", d.input},
          {"score_column", d.schema.score_column},
          {"outcome_column", d.schema.outcome_column},
          {"weight_column", d.schema.weight_column},
          {"require_weight", d.schema.require_weight},
          {"risk_scale", !d.raw_marker}};
}

Json data_summary(const RiskDataset& data) {
  return {{"records", data.size()},
          {"cases", data.case_count()},
          {"total_weight", data.total_weight()},
          {"prevalence", data.prevalence()},
          {"effective_n", data.effective_n()},
          {"is_risk_scale", data.is_risk_scale()}};
}

// ---------------------------------------------------------------- curve

struct CurveArgs {
  DataArgs data;
  std::string grid = "default";
  std::size_t max_points = 512;
  double retention = 0.95;
  double level = 0.95;
  unsigned workers = 1;
  std::string kind = "threshold";
  std::string format = "csv";
  std::string output;
};

// "default", "lo:hi:step" or an explicit comma-separated list.
std::vector<double> resolve_grid(const std::string& spec, const RiskDataset& data,
                                 std::size_t max_points) {
  if (spec == "default") return default_grid(data, max_points);
  if (spec.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t colon = spec.find(':', start);
      parts.push_back(parse_number(
          std::string_view(spec).substr(
              start, colon == std::string::npos ? std::string::npos : colon - start),
          "--grid"));
      if (colon == std::string::npos) break;
      start = colon + 1;
    }
    if (parts.size() != 3) throw UsageError("--grid range must be lo:hi:step");
    const double lo = parts[0], hi = parts[1], step = parts[2];
    if (!(step > 0.0) || !(hi > lo)) {
      throw UsageError("--grid range needs lo < hi and step > 0");
    }
    const double steps = (hi - lo) / step;
    const double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps)) {
      throw UsageError("--grid step must divide hi - lo");
    }
    if (rounded > 1e7) throw UsageError("--grid has too many points");
    return uniform_grid(lo, hi, static_cast<std::size_t>(rounded) + 1);
  }
  std::vector<double> grid = parse_list(spec, "--grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw UsageError("--grid values must be strictly increasing");
    }
  }
  return grid;
}

Json inf_as_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

int cmd_curve(const CurveArgs& args, std::ostream& out) {
  require_level(args.level);
  if (!(args.retention > 0.0 && args.retention <= 1.0)) {
    throw UsageError("--retention must be in (0,1]");
  }
  const RiskDataset data = load(args.data);

  Json config = data_config(args.data);
  config["kind"] = args.kind;
  config["grid"] = args.grid;
  config["max_points"] = args.max_points;
  config["retention"] = args.retention;
  config["level"] = args.level;

  Json summary;
  summary["auc_continuous"] = auc_continuous(data);
  summary["total_gain"] =
      data.is_risk_scale() ? Json(total_gain(data)) : Json(nullptr);

  Sink sink(args.output, out);
  std::ostream& os = sink.stream();
  const bool csv = args.format == "csv";
  auto header = [&](const Json& extra) {
    emit_config_comment(os, "curve", config);
    os << "# data=" << data_summary(data).dump() << '\n';
    os << "# summary=" << extra.dump() << '\n';
  };
  Json doc;
  doc["command"] = "curve";
  doc["config"] = config;
  doc["data"] = data_summary(data);

  if (args.kind == "roc" || args.kind == "lorenz") {
    Json points = Json::array();
    if (csv) header(summary);
    if (args.kind == "roc") {
      if (csv) os << "threshold,fpr,tpr\n";
      for (const RocPoint& p : roc(data)) {
        if (csv) {
          os << format_sig(p.threshold) << ',' << format_sig(p.fpr) << ','
             << format_sig(p.tpr) << '\n';
        } else {
          points.push_back({{"threshold", inf_as_null(p.threshold)},
                            {"fpr", p.fpr},
                            {"tpr", p.tpr}});
        }
      }
    } else {
      if (csv) os << "threshold,population_fraction,case_fraction\n";
      for (const LorenzPoint& p : lorenz(data)) {
        if (csv) {
          os << format_sig(p.threshold) << ',' << format_sig(p.population_fraction)
             << ',' << format_sig(p.case_fraction) << '\n';
        } else {
          points.push_back({{"threshold", inf_as_null(p.threshold)},
                            {"population_fraction", p.population_fraction},
                            {"case_fraction", p.case_fraction}});
        }
      }
    }
    if (!csv) {
      doc["summary"] = summary;
      doc["points"] = points;
      emit_json(os, doc);
    }
    return kOk;
  }

  const std::vector<double> grid = resolve_grid(args.grid, data, args.max_points);

  if (args.kind == "froc") {
    const std::vector<FrocPoint> pts = froc_curve(data, grid);
    if (csv) {
      header(summary);
      os << "threshold,x,y,area,chance_area,ratio,difference\n";
      for (const FrocPoint& p : pts) {
        os << format_sig(p.threshold) << ',' << format_sig(p.x) << ','
           << format_sig(p.y) << ',' << format_sig(p.areas.area) << ','
           << format_sig(p.areas.chance_area) << ',' << format_sig(p.areas.ratio)
           << ',' << format_sig(p.areas.difference) << '\n';
      }
      return kOk;
    }
    Json points = Json::array();
    for (const FrocPoint& p : pts) {
      points.push_back({{"threshold", p.threshold},
                        {"x", p.x},
                        {"y", p.y},
                        {"area", p.areas.area},
                        {"chance_area", p.areas.chance_area},
                        {"ratio", p.areas.ratio},
                        {"difference", p.areas.difference}});
    }
    doc["summary"] = summary;
    doc["points"] = points;
    emit_json(os, doc);
    return kOk;
  }

  SweepOptions opts;
  opts.level = args.level;
  opts.workers = args.workers;
  const ThresholdCurve curve = sweep(data, grid, opts);
  const OptimalThreshold best = optimal_threshold(curve);
  const SweetSpot spot = sweetspot(curve, args.retention);
  summary["optimal"] = {{"threshold", best.threshold}, {"mrs", best.mrs}};
  summary["sweetspot"] = {{"lo", spot.lo},
                          {"hi", spot.hi},
                          {"peak_threshold", spot.peak_threshold},
                          {"peak_mrs", spot.peak_mrs},
                          {"retention", spot.retention},
                          {"degenerate", spot.degenerate}};

  if (csv) {
    header(summary);
    os << "threshold,positivity,sensitivity,specificity,ppv,cnpv,risk_difference,"
          "mrs,mrs_se,mrs_ci_low,mrs_ci_high,youden,auc_dichotomized,"
          "risk_threshold,nbi,nb,nb_all_positive,nb_random,nb_gain,degenerate\n";
    for (const CurvePoint& p : curve.points()) {
      const auto& e = p.mrs_estimate;
      const auto& d = p.decision;
      os << format_sig(p.threshold) << ',' << format_sig(p.positivity) << ','
         << format_sig(p.sensitivity) << ',' << format_sig(p.specificity) << ','
         << csv_field(p.ppv) << ',' << csv_field(p.cnpv) << ','
         << csv_field(p.risk_difference) << ',' << format_sig(p.mrs) << ','
         << csv_field(e ? std::optional(e->se) : std::nullopt) << ','
         << csv_field(e ? std::optional(e->ci_low) : std::nullopt) << ','
         << csv_field(e ? std::optional(e->ci_high) : std::nullopt) << ','
         << format_sig(p.youden) << ',' << format_sig(p.auc_dichotomized) << ','
         << csv_field(d ? std::optional(d->risk_threshold) : std::nullopt) << ','
         << csv_field(d ? std::optional(d->nbi) : std::nullopt) << ','
         << csv_field(d ? std::optional(d->nb) : std::nullopt) << ','
         << csv_field(d ? std::optional(d->nb_all_positive) : std::nullopt) << ','
         << csv_field(d ? std::optional(d->nb_random) : std::nullopt) << ','
         << csv_field(d ? std::optional(d->nb_gain) : std::nullopt) << ','
         << (p.degenerate ? 1 : 0) << '\n';
    }
    return kOk;
  }

  Json points = Json::array();
  for (const CurvePoint& p : curve.points()) {
    Json pt;
    pt["threshold"] = p.threshold;
    pt["positivity"] = p.positivity;
    pt["sensitivity"] = p.sensitivity;
    pt["specificity"] = p.specificity;
    pt["ppv"] = json_number(p.ppv);
    pt["cnpv"] = json_number(p.cnpv);
    pt["risk_difference"] = json_number(p.risk_difference);
    pt["mrs"] = p.mrs;
    pt["mrs_estimate"] = p.mrs_estimate ? estimate_json(*p.mrs_estimate) : Json(nullptr);
    pt["youden"] = p.youden;
    pt["auc_dichotomized"] = p.auc_dichotomized;
    if (p.decision) {
      pt["decision"] = {{"risk_threshold", p.decision->risk_threshold},
                        {"nbi", p.decision->nbi},
                        {"nb", p.decision->nb},
                        {"nb_all_positive", p.decision->nb_all_positive},
                        {"nb_random", p.decision->nb_random},
                        {"nb_gain", p.decision->nb_gain}};
    } else {
      pt["decision"] = nullptr;
    }
    pt["degenerate"] = p.degenerate;
    points.push_back(pt);
  }
  doc["summary"] = summary;
  doc["points"] = points;
  emit_json(os, doc);
  return kOk;
}

// ---------------------------------------------------------------- reweight

struct ReweightArgs {
  DataArgs data;
  double target = 0.0;
  std::string label;
  bool integer_factor = false;
  bool rescale_risk = false;
  std::optional<double> source_prior;
  std::string format = "csv";
  std::string output;
};

int cmd_reweight(const ReweightArgs& args, std::ostream& out) {
  if (!(args.target > 0.0 && args.target < 1.0)) {
    throw UsageError("--target must be a prevalence in (0,1)");
  }
  if (args.rescale_risk && args.data.raw_marker) {
    throw UsageError("--rescale-risk needs calibrated risk scores, not --raw-marker");
  }
  if (args.source_prior && !args.rescale_risk) {
    throw UsageError("--source-prior only applies with --rescale-risk");
  }
  if (args.source_prior && !(*args.source_prior > 0.0 && *args.source_prior < 1.0)) {
    throw UsageError("--source-prior must be in (0,1)");
  }
  const RiskDataset data = load(args.data);
  const PopulationSpec target(args.target, args.label);
  Reweighting rw = reweight_to_prevalence(
      data, target,
      args.integer_factor ? WeightRounding::nearest_integer : WeightRounding::exact);
  const double prior = args.source_prior.value_or(data.prevalence());
  RiskDataset result = args.rescale_risk
                           ? rescale_risk_prior(rw.data, prior, args.target)
                           : rw.data;

  Json config = data_config(args.data);
  config["target"] = args.target;
  config["label"] = args.label;
  config["integer_factor"] = args.integer_factor;
  config["rescale_risk"] = args.rescale_risk;
  config["source_prior"] = args.rescale_risk ? Json(prior) : Json(nullptr);
  Json info = {{"source_prevalence", data.prevalence()},
               {"target_prevalence", args.target},
               {"exact_factor", rw.exact_factor},
               {"applied_factor", rw.applied_factor},
               {"achieved_prevalence", result.prevalence()}};

  Sink sink(args.output, out);
  std::ostream& os = sink.stream();
  if (args.format == "csv") {
    emit_config_comment(os, "reweight", config);
    os << "# reweighting=" << info.dump() << '\n';
    write_csv(os, result);
    return kOk;
  }
  const Json dataset = Json::parse(to_json(result, target));
  Json doc;
  doc["command"] = "reweight";
  doc["config"] = config;
  doc["reweighting"] = info;
  for (const auto& [key, value] : dataset.items()) doc[key] = value;
  emit_json(os, doc);
  return kOk;
}

// ---------------------------------------------------------------- simulate / power

std::vector<LabeledConfig> preset_configs(const std::string& preset) {
  std::vector<LabeledConfig> all = reference_configs();
  if (preset == "all") return all;
  for (const LabeledConfig& c : all) {
    if (c.label == preset + "%") return {c};
  }
  throw UsageError("unknown preset '" + preset + "'");
}

// A config from either --preset or --cells/--n.
SimConfig one_config(const std::string& preset, const std::string& cells,
                     std::optional<std::int64_t> n, const std::string& flag) {
  if (!cells.empty()) {
    const auto c = parse_cells(cells, "--cells" + flag);
    SimConfig cfg;
    cfg.expected_cells = c;
    cfg.n = n ? *n : static_cast<std::int64_t>(std::llround(c[0] + c[1] + c[2] + c[3]));
    return cfg;
  }
  if (n) throw UsageError("--n" + flag + " only applies with --cells" + flag);
  const std::vector<LabeledConfig> p = preset_configs(preset.empty() ? "10" : preset);
  if (p.size() != 1) throw UsageError("--preset" + flag + " must name one configuration");
  return p.front().config;
}

void apply_run_settings(SimConfig& cfg, std::size_t replicates, std::uint64_t seed,
                        double level) {
  cfg.replicates = replicates;
  cfg.seed = seed;
  cfg.level = level;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

struct SimulateArgs {
  std::string preset;
  std::string cells;
  std::optional<std::int64_t> n;
  std::size_t replicates = kDefaultReplicates;
  std::uint64_t seed = kDefaultSeed;
  double level = 0.95;
  unsigned workers = 0;
  std::string format = "json";
  std::string output;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  require_level(args.level);
  std::vector<LabeledConfig> configs;
  if (!args.cells.empty()) {
    configs.push_back({"custom", one_config("", args.cells, args.n, "")});
  } else {
    if (args.n) throw UsageError("--n only applies with --cells");
    configs = preset_configs(args.preset.empty() ? "all" : args.preset);
  }
  for (LabeledConfig& c : configs) {
    apply_run_settings(c.config, args.replicates, args.seed, args.level);
  }
  std::vector<LabeledReport> reports;
  for (const LabeledConfig& c : configs) {
    reports.push_back({c.label, run_coverage(c.config, args.workers)});
  }

  Json config = {{"preset", args.cells.empty()
                                ? Json(args.preset.empty() ? "all" : args.preset)
                                : Json(nullptr)},
                 {"cells", args.cells.empty() ? Json(nullptr)
                                              : Json(configs.front().config.expected_cells)},
                 {"n", args.cells.empty() ? Json(nullptr)
                                          : Json(configs.front().config.n)},
                 {"replicates", args.replicates},
                 {"seed", args.seed},
                 {"level", args.level}};
  Sink sink(args.output, out);
  std::ostream& os = sink.stream();
  if (args.format == "text") {
    emit_config_comment(os, "simulate", config);
    os << format_report_table(reports);
    for (const LabeledReport& r : reports) {
      os << "# " << r.label << ": " << r.report.replicates_used
         << " replicates used, " << r.report.degenerate << " degenerate\n";
    }
    return kOk;
  }
  Json list = Json::array();
  for (const LabeledReport& r : reports) {
    Json entry = {{"label", r.label}};
    const Json body = to_json(r.report);
    for (const auto& [key, value] : body.items()) entry[key] = value;
    list.push_back(entry);
  }
  Json doc;
  doc["command"] = "simulate";
  doc["config"] = config;
  doc["reports"] = list;
  emit_json(os, doc);
  return kOk;
}

struct PowerArgs {
  std::string preset1, preset2;
  std::string cells1, cells2;
  std::optional<std::int64_t> n1, n2;
  std::string method = "both";
  double alpha = 0.05;
  std::string alternative = "two_sided";
  std::size_t replicates = 10000;
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 0;
  std::string format = "json";
  std::string output;
};

int cmd_power(const PowerArgs& args, std::ostream& out) {
  if (!(args.alpha > 0.0 && args.alpha < 1.0)) {
    throw UsageError("--alpha must be in (0,1)");
  }
  SimConfig c1 = one_config(args.preset1, args.cells1, args.n1, "1");
  SimConfig c2 = one_config(args.preset2, args.cells2, args.n2, "2");
  apply_run_settings(c1, args.replicates, args.seed, 0.95);
  apply_run_settings(c2, args.replicates, args.seed, 0.95);
  const Alternative alt = parse_alternative(args.alternative);
  std::vector<PowerReport> reports;
  if (args.method != "difference") {
    reports.push_back(run_power(c1, c2, TestMethod::youden_ratio, args.alpha, alt,
                                args.workers));
  }
  if (args.method != "ratio") {
    reports.push_back(run_power(c1, c2, TestMethod::mrs_difference, args.alpha, alt,
                                args.workers));
  }

  Json config = {{"config1", to_json(c1)},
                 {"config2", to_json(c2)},
                 {"method", args.method},
                 {"alpha", args.alpha},
                 {"alternative", args.alternative}};
  Sink sink(args.output, out);
  std::ostream& os = sink.stream();
  if (args.format == "text") {
    emit_config_comment(os, "power", config);
    TextTable tt;
    for (const PowerReport& r : reports) {
      const std::string m(to_string(r.method));
      tt.add(m + " rejection_rate", r.rejection_rate);
      tt.add(m + " mc_se", r.mc_se);
      tt.add(m + " skipped", std::to_string(r.skipped));
    }
    tt.write(os);
    return kOk;
  }
  Json list = Json::array();
  for (const PowerReport& r : reports) list.push_back(to_json(r));
  Json doc;
  doc["command"] = "power";
  doc["config"] = config;
  doc["reports"] = list;
  emit_json(os, doc);
  return kOk;
}

void add_output_options(CLI::App* sub, std::string& format, std::string& output,
                        std::vector<std::string> formats) {
  sub->add_option("--format", format, "Output format")
      ->check(CLI::IsMember(formats))
      ->capture_default_str();
  sub->add_option("--output,-o", output, "Write the report here instead of stdout");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk stratification metrics, decision curves and simulations",
               "riskstrat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "riskstrat 1.0.0");

  MetricsArgs metrics;
  auto* m = app.add_subcommand("metrics", "Metrics of a 2x2 table given as counts");
  m->add_option("--cells", metrics.cells, "Counts a,b,c,d (D+M+, D+M-, D-M+, D-M-)")
      ->required();
  m->add_option("--n", metrics.n, "Sample size for inference (default: sum of counts)");
  m->add_option("--r", metrics.r, "Comma-separated risk thresholds in (0,1)");
  m->add_option("--level", metrics.level, "Confidence level")->capture_default_str();
  add_output_options(m, metrics.format, metrics.output, {"json", "text"});

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "Two-sample comparison of MRS");
  c->add_option("--cells1", compare.cells1, "Counts of table 1")->required();
  c->add_option("--cells2", compare.cells2, "Counts of table 2")->required();
  c->add_option("--n1", compare.n1, "Sample size of table 1");
  c->add_option("--n2", compare.n2, "Sample size of table 2");
  c->add_option("--method", compare.method, "Test")
      ->check(CLI::IsMember({"ratio", "difference", "both"}))
      ->capture_default_str();
  c->add_option("--alternative", compare.alternative, "Alternative hypothesis")
      ->check(CLI::IsMember({"two_sided", "greater", "less"}))
      ->capture_default_str();
  add_output_options(c, compare.format, compare.output, {"json", "text"});

  CurveArgs curve;
  auto* cu = app.add_subcommand("curve", "Threshold sweep, ROC, Lorenz or fROC curve");
  add_data_options(cu, curve.data);
  cu->add_option("--kind", curve.kind, "Curve type")
      ->check(CLI::IsMember({"threshold", "roc", "lorenz", "froc"}))
      ->capture_default_str();
  cu->add_option("--grid", curve.grid,
                 "Thresholds: 'default', 'lo:hi:step' or 'v1,v2,...'")
      ->capture_default_str();
  cu->add_option("--max-points", curve.max_points,
                 "Cap on the default grid size (0 for no cap)")
      ->capture_default_str();
  cu->add_option("--retention", curve.retention,
                 "Fraction of peak MRS kept inside the sweetspot")
      ->capture_default_str();
  cu->add_option("--level", curve.level, "Confidence level")->capture_default_str();
  cu->add_option("--workers", curve.workers, "Worker threads (0 = all cores)")
      ->capture_default_str();
  add_output_options(cu, curve.format, curve.output, {"csv", "json"});

  ReweightArgs reweight;
  auto* rw = app.add_subcommand("reweight", "Reweight controls to a target prevalence");
  add_data_options(rw, reweight.data);
  rw->add_option("--target", reweight.target, "Target prevalence in (0,1)")->required();
  rw->add_option("--label", reweight.label, "Name of the target population");
  rw->add_flag("--integer-factor", reweight.integer_factor,
               "Round the control weight factor to an integer");
  rw->add_flag("--rescale-risk", reweight.rescale_risk,
               "Also move the risk scores to the target prior");
  rw->add_option("--source-prior", reweight.source_prior,
                 "Prior the scores were computed under (default: data prevalence)");
  add_output_options(rw, reweight.format, reweight.output, {"csv", "json"});

  SimulateArgs simulate;
  auto* s = app.add_subcommand("simulate", "Monte Carlo coverage study");
  auto* preset = s->add_option("--preset", simulate.preset,
                               "Reference configuration: 0.78, 10, 30 or all")
                     ->check(CLI::IsMember({"0.78", "10", "30", "all"}));
  s->add_option("--cells", simulate.cells, "Expected counts a,b,c,d")->excludes(preset);
  s->add_option("--n", simulate.n, "Sample size (default: rounded sum of --cells)");
  s->add_option("--replicates", simulate.replicates, "Replicates")->capture_default_str();
  s->add_option("--seed", simulate.seed, "Random seed")
      ->envname("RISKSTRAT_SEED")
      ->capture_default_str();
  s->add_option("--level", simulate.level, "Confidence level")->capture_default_str();
  s->add_option("--workers", simulate.workers, "Worker threads (0 = all cores)")
      ->capture_default_str();
  add_output_options(s, simulate.format, simulate.output, {"json", "text"});

  PowerArgs power;
  auto* p = app.add_subcommand("power", "Monte Carlo power of the two-sample tests");
  auto* p1 = p->add_option("--preset1", power.preset1, "Reference configuration 1")
                 ->check(CLI::IsMember({"0.78", "10", "30"}));
  auto* p2 = p->add_option("--preset2", power.preset2, "Reference configuration 2")
                 ->check(CLI::IsMember({"0.78", "10", "30"}));
  p->add_option("--cells1", power.cells1, "Expected counts of table 1")->excludes(p1);
  p->add_option("--cells2", power.cells2, "Expected counts of table 2")->excludes(p2);
  p->add_option("--n1", power.n1, "Sample size of table 1");
  p->add_option("--n2", power.n2, "Sample size of table 2");
  p->add_option("--method", power.method, "Test")
      ->check(CLI::IsMember({"ratio", "difference", "both"}))
      ->capture_default_str();
  p->add_option("--alpha", power.alpha, "Significance level")->capture_default_str();
  p->add_option("--alternative", power.alternative, "Alternative hypothesis")
      ->check(CLI::IsMember({"two_sided", "greater", "less"}))
      ->capture_default_str();
  p->add_option("--replicates", power.replicates, "Replicates")->capture_default_str();
  p->add_option("--seed", power.seed, "Random seed")
      ->envname("RISKSTRAT_SEED")
      ->capture_default_str();
  p->add_option("--workers", power.workers, "Worker threads (0 = all cores)")
      ->capture_default_str();
  add_output_options(p, power.format, power.output, {"json", "text"});

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "riskstrat: error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (m->parsed()) return cmd_metrics(metrics, out);
    if (c->parsed()) return cmd_compare(compare, out);
    if (cu->parsed()) return cmd_curve(curve, out);
    if (rw->parsed()) return cmd_reweight(reweight, out);
    if (s->parsed()) return cmd_simulate(simulate, out);
    if (p->parsed()) return cmd_power(power, out);
  } catch (const UsageError& e) {
    err << "riskstrat: error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "riskstrat: data error: " << e.what() << '\n';
    return kData;
  } catch (const Error& e) {
    err << "riskstrat: numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "riskstrat: internal error: " << e.what() << '\n';
    return kInternal;
  }
  err << "riskstrat: error: no subcommand\n";
  return kUsage;
}

}  // namespace riskstrat::cli
