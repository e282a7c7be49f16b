#include "plancal/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "plancal/errors.hpp"

namespace plancal {

using json = nlohmann::json;

namespace {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (const char ch : text) {
    if (ch == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  if (!current.empty()) {
    if (current.back() == '\r') current.pop_back();
    lines.push_back(std::move(current));
  }
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (const char ch : line) {
    if (ch == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

double parse_number(const std::string& field, const std::string& source,
                    std::size_t line_no, const std::string& column) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE ||
      !std::isfinite(value)) {
    throw ParseError(source + ": line " + std::to_string(line_no) +
                     ", column " + column + ": '" + field +
                     "' is not a finite number");
  }
  return value;
}

void require_header(const std::vector<std::string>& fields,
                    const std::vector<std::string>& expected,
                    const std::string& source) {
  if (fields != expected) {
    std::string want;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) want += ',';
      want += expected[i];
    }
    throw ParseError(source + ": line 1: expected header '" + want + "'");
  }
}

std::vector<std::string> joint_header(int n) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) names.push_back("q_" + std::to_string(i));
  return names;
}

// Rows of joint angles (deg in the file) from CSV body lines; `extra` columns
// follow the joints.
Eigen::MatrixXd parse_angle_rows(const std::vector<std::string>& lines, int n,
                                 int extra, const std::string& source,
                                 std::vector<std::vector<double>>* extras) {
  const std::size_t rows = lines.size() - 1;
  if (rows == 0) {
    throw ParseError(source + ": no data rows");
  }
  Eigen::MatrixXd q(static_cast<Eigen::Index>(rows), n);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::vector<std::string> fields = split_fields(lines[r]);
    if (static_cast<int>(fields.size()) != n + extra) {
      throw ParseError(source + ": line " + std::to_string(r + 1) + ": has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(n + extra));
    }
    for (int c = 0; c < n; ++c) {
      q(static_cast<Eigen::Index>(r - 1), c) = deg_to_rad(parse_number(
          fields[static_cast<std::size_t>(c)], source, r + 1,
          "q_" + std::to_string(c + 1)));
    }
    if (extras != nullptr) {
      std::vector<double> row;
      for (int c = n; c < n + extra; ++c) {
        row.push_back(parse_number(fields[static_cast<std::size_t>(c)], source,
                                   r + 1, c == n ? "x" : "y"));
      }
      extras->push_back(std::move(row));
    }
  }
  return q;
}

const json& require_key(const json& node, const std::string& key,
                        const std::string& where) {
  if (!node.contains(key)) {
    throw ConfigError("config: missing required key '" + where + key + "'");
  }
  return node.at(key);
}

double number_or_throw(const json& node, const std::string& where) {
  if (!node.is_number()) {
    throw ConfigError("config: '" + where + "' must be a number");
  }
  return node.get<double>();
}

Eigen::VectorXd number_array(const json& node, const std::string& where) {
  if (!node.is_array() || node.empty()) {
    throw ConfigError("config: '" + where + "' must be a non-empty array of "
                      "numbers");
  }
  Eigen::VectorXd values(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    values(static_cast<Eigen::Index>(i)) =
        number_or_throw(node[i], where + "[" + std::to_string(i) + "]");
  }
  return values;
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write " + tmp.string());
    }
    out << content;
    out.flush();
    if (!out.good()) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("failed while writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " +
                ec.message());
  }
}

// --- plans -------------------------------------------------------------------

std::string plan_to_csv(const CalibrationPlan& plan) {
  const int n = plan.num_joints();
  std::string out;
  for (int i = 1; i <= n; ++i) {
    if (i > 1) out += ',';
    out += "q_" + std::to_string(i);
  }
  out += '\n';
  for (const JointConfiguration& config : plan.configs) {
    for (int c = 0; c < n; ++c) {
      if (c > 0) out += ',';
      out += format_double(rad_to_deg(config.q(c)));
    }
    out += '\n';
  }
  return out;
}

CalibrationPlan plan_from_csv(const std::string& text,
                              const std::string& source_name) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) {
    throw ParseError(source_name + ": empty file");
  }
  const std::vector<std::string> header = split_fields(lines[0]);
  const int n = static_cast<int>(header.size());
  require_header(header, joint_header(n), source_name);
  return CalibrationPlan::from_matrix(
      parse_angle_rows(lines, n, 0, source_name, nullptr));
}

std::string plan_to_json(const CalibrationPlan& plan) {
  json doc;
  doc["m"] = plan.num_experiments();
  doc["n"] = plan.num_joints();
  json rows = json::array();
  for (const JointConfiguration& config : plan.configs) {
    json row = json::array();
    for (Eigen::Index c = 0; c < config.q.size(); ++c) {
      row.push_back(rad_to_deg(config.q(c)));
    }
    rows.push_back(std::move(row));
  }
  doc["configs_deg"] = std::move(rows);
  return doc.dump(2) + "\n";
}

CalibrationPlan plan_from_json(const std::string& text,
                               const std::string& source_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(source_name + ": " + e.what());
  }
  if (!doc.contains("configs_deg") || !doc["configs_deg"].is_array() ||
      doc["configs_deg"].empty()) {
    throw ParseError(source_name + ": missing non-empty 'configs_deg' array");
  }
  const json& rows = doc["configs_deg"];
  const std::size_t n = rows[0].is_array() ? rows[0].size() : 0;
  if (n == 0) {
    throw ParseError(source_name + ": 'configs_deg' rows must be non-empty "
                     "arrays");
  }
  Eigen::MatrixXd q(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != n) {
      throw ParseError(source_name + ": 'configs_deg' row " +
                       std::to_string(r + 1) + " has the wrong length");
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (!rows[r][c].is_number()) {
        throw ParseError(source_name + ": 'configs_deg' row " +
                         std::to_string(r + 1) + ", entry " +
                         std::to_string(c + 1) + " is not a number");
      }
      q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          deg_to_rad(rows[r][c].get<double>());
    }
  }
  return CalibrationPlan::from_matrix(q);
}

CalibrationPlan read_plan_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (path.extension() == ".json") {
    return plan_from_json(text, path.string());
  }
  return plan_from_csv(text, path.string());
}

void write_plan_file(const std::filesystem::path& path,
                     const CalibrationPlan& plan, const std::string& format) {
  atomic_write_file(path,
                    format == "json" ? plan_to_json(plan) : plan_to_csv(plan));
}

// --- measurements --------------------------------------------------------------

std::string measurements_to_csv(const CalibrationPlan& plan,
                                const MeasurementSet& measurements) {
  if (plan.num_experiments() != measurements.size()) {
    throw DimensionMismatch("plan rows and measurement rows differ");
  }
  const int n = plan.num_joints();
  std::string out;
  for (int i = 1; i <= n; ++i) out += "q_" + std::to_string(i) + ",";
  out += "x,y\n";
  for (int r = 0; r < plan.num_experiments(); ++r) {
    const JointConfiguration& config = plan.configs[static_cast<std::size_t>(r)];
    for (int c = 0; c < n; ++c) {
      out += format_double(rad_to_deg(config.q(c)));
      out += ',';
    }
    const PlanarPosition& p = measurements.positions[static_cast<std::size_t>(r)];
    out += format_double(p.x);
    out += ',';
    out += format_double(p.y);
    out += '\n';
  }
  return out;
}

MeasurementData measurements_from_csv(const std::string& text,
                                      const std::string& source_name) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) {
    throw ParseError(source_name + ": empty file");
  }
  const std::vector<std::string> header = split_fields(lines[0]);
  if (header.size() < 3) {
    throw ParseError(source_name + ": line 1: expected header q_1..q_n,x,y");
  }
  const int n = static_cast<int>(header.size()) - 2;
  std::vector<std::string> expected = joint_header(n);
  expected.push_back("x");
  expected.push_back("y");
  require_header(header, expected, source_name);

  std::vector<std::vector<double>> positions;
  const Eigen::MatrixXd q =
      parse_angle_rows(lines, n, 2, source_name, &positions);

  MeasurementData data;
  data.plan = CalibrationPlan::from_matrix(q);
  data.measurements.positions.reserve(positions.size());
  for (const std::vector<double>& row : positions) {
    data.measurements.positions.push_back(PlanarPosition{row[0], row[1]});
  }
  return data;
}

MeasurementData read_measurements_file(const std::filesystem::path& path) {
  return measurements_from_csv(read_text_file(path), path.string());
}

void write_measurements_file(const std::filesystem::path& path,
                             const CalibrationPlan& plan,
                             const MeasurementSet& measurements) {
  atomic_write_file(path, measurements_to_csv(plan, measurements));
}

// --- reports -------------------------------------------------------------------

std::vector<std::string> parameter_labels(int n) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(2 * n));
  for (int i = 1; i <= n; ++i) {
    labels.push_back("dtheta_" + std::to_string(i) + "_deg");
  }
  for (int i = 1; i <= n; ++i) {
    labels.push_back("dl_" + std::to_string(i) + "_mm");
  }
  return labels;
}

Eigen::VectorXd packed_to_report_units(const Eigen::VectorXd& packed) {
  const Eigen::Index n = packed.size() / 2;
  Eigen::VectorXd out(packed.size());
  for (Eigen::Index i = 0; i < n; ++i) out(i) = rad_to_deg(packed(i));
  out.tail(n) = packed.tail(n);
  return out;
}

std::string score_report_csv(const PlanScore& score) {
  std::string out = "metric,value\n";
  out += "det_c," + format_double(score.det_c) + "\n";
  out += "det_s," + format_double(score.det_s) + "\n";
  out += "det_d," + format_double(score.det_d) + "\n";
  out += "condition_residual," + format_double(score.condition_residual) + "\n";
  return out;
}

nlohmann::json score_report_json(const PlanScore& score) {
  return json{{"det_c", score.det_c},
              {"det_s", score.det_s},
              {"det_d", score.det_d},
              {"condition_residual", score.condition_residual}};
}

std::string evaluate_report_csv(const EvaluateReport& report) {
  const int n = static_cast<int>(report.accuracy.sigma_q.size());
  const std::vector<std::string> labels = parameter_labels(n);
  Eigen::VectorXd stddev(2 * n);
  stddev << report.accuracy.sigma_q, report.accuracy.sigma_l;
  Eigen::VectorXd bound(2 * n);
  bound << report.optimal_bound.sigma_q, report.optimal_bound.sigma_l;
  const Eigen::VectorXd stddev_units = packed_to_report_units(stddev);
  const Eigen::VectorXd bound_units = packed_to_report_units(bound);

  std::string out = "section,key,value\n";
  out += "plan,m," + std::to_string(report.m) + "\n";
  out += "score,det_c," + format_double(report.score.det_c) + "\n";
  out += "score,det_s," + format_double(report.score.det_s) + "\n";
  out += "score,det_d," + format_double(report.score.det_d) + "\n";
  out += "score,condition_residual," +
         format_double(report.score.condition_residual) + "\n";
  for (int i = 0; i < 2 * n; ++i) {
    out += "stddev," + labels[static_cast<std::size_t>(i)] + "," +
           format_double(stddev_units(i)) + "\n";
  }
  for (int i = 0; i < 2 * n; ++i) {
    out += "optimal_bound," + labels[static_cast<std::size_t>(i)] + "," +
           format_double(bound_units(i)) + "\n";
  }
  return out;
}

nlohmann::json evaluate_report_json(const EvaluateReport& report) {
  const int n = static_cast<int>(report.accuracy.sigma_q.size());
  const std::vector<std::string> labels = parameter_labels(n);
  Eigen::VectorXd stddev(2 * n);
  stddev << report.accuracy.sigma_q, report.accuracy.sigma_l;
  Eigen::VectorXd bound(2 * n);
  bound << report.optimal_bound.sigma_q, report.optimal_bound.sigma_l;
  const Eigen::VectorXd stddev_units = packed_to_report_units(stddev);
  const Eigen::VectorXd bound_units = packed_to_report_units(bound);

  json stddev_obj = json::object();
  json bound_obj = json::object();
  for (int i = 0; i < 2 * n; ++i) {
    stddev_obj[labels[static_cast<std::size_t>(i)]] = stddev_units(i);
    bound_obj[labels[static_cast<std::size_t>(i)]] = bound_units(i);
  }
  return json{{"m", report.m},
              {"score", score_report_json(report.score)},
              {"stddev", std::move(stddev_obj)},
              {"optimal_bound", std::move(bound_obj)}};
}

std::string identify_report_csv(const IdentificationResult& result) {
  const int n = result.deviation.size();
  const Eigen::VectorXd dq = joint_from_cumulative(result.deviation.dtheta);
  std::string out = "section,key,value\n";
  for (int i = 0; i < n; ++i) {
    out += "deviation,dl_" + std::to_string(i + 1) + "_mm," +
           format_double(result.deviation.dl(i)) + "\n";
  }
  for (int i = 0; i < n; ++i) {
    out += "deviation,dtheta_" + std::to_string(i + 1) + "_deg," +
           format_double(rad_to_deg(result.deviation.dtheta(i))) + "\n";
  }
  for (int i = 0; i < n; ++i) {
    out += "deviation,dq_" + std::to_string(i + 1) + "_deg," +
           format_double(rad_to_deg(dq(i))) + "\n";
  }
  out += "result,iterations," + std::to_string(result.iterations) + "\n";
  out += "result,final_residual_norm_mm," +
         format_double(result.final_residual_norm) + "\n";
  out += std::string("result,converged,") +
         (result.converged ? "true" : "false") + "\n";
  if (!result.converged) {
    out += "result,warning,identification did not converge within the "
           "iteration limit\n";
  }
  return out;
}

nlohmann::json identify_report_json(const IdentificationResult& result) {
  const int n = result.deviation.size();
  const Eigen::VectorXd dq = joint_from_cumulative(result.deviation.dtheta);
  json dl = json::array();
  json dtheta = json::array();
  json dq_arr = json::array();
  for (int i = 0; i < n; ++i) {
    dl.push_back(result.deviation.dl(i));
    dtheta.push_back(rad_to_deg(result.deviation.dtheta(i)));
    dq_arr.push_back(rad_to_deg(dq(i)));
  }
  json doc{{"deviation",
            {{"dl_mm", std::move(dl)},
             {"dtheta_deg", std::move(dtheta)},
             {"dq_deg", std::move(dq_arr)}}},
           {"iterations", result.iterations},
           {"final_residual_norm_mm", result.final_residual_norm},
           {"converged", result.converged}};
  if (!result.converged) {
    doc["warning"] =
        "identification did not converge within the iteration limit";
  }
  return doc;
}

namespace {

void append_trial_rows(std::string& out, int m, const TrialStatistics& stats) {
  const int params = static_cast<int>(stats.empirical_stddev.size());
  const std::vector<std::string> labels = parameter_labels(params / 2);
  const Eigen::VectorXd emp = packed_to_report_units(stats.empirical_stddev);
  const Eigen::VectorXd ana = packed_to_report_units(stats.analytic_stddev);
  const Eigen::VectorXd mean = packed_to_report_units(stats.mean_error);
  for (int i = 0; i < params; ++i) {
    const double gap = ana(i) > 0.0 ? (emp(i) - ana(i)) / ana(i) : 0.0;
    out += std::to_string(m) + "," + labels[static_cast<std::size_t>(i)] + "," +
           format_double(emp(i)) + "," + format_double(ana(i)) + "," +
           format_double(gap) + "," + format_double(mean(i)) + "," +
           std::to_string(stats.trials) + "," + std::to_string(stats.excluded) +
           "\n";
  }
}

json trial_stats_json(const TrialStatistics& stats) {
  const int params = static_cast<int>(stats.empirical_stddev.size());
  const std::vector<std::string> labels = parameter_labels(params / 2);
  const Eigen::VectorXd emp = packed_to_report_units(stats.empirical_stddev);
  const Eigen::VectorXd ana = packed_to_report_units(stats.analytic_stddev);
  const Eigen::VectorXd mean = packed_to_report_units(stats.mean_error);
  json rows = json::array();
  for (int i = 0; i < params; ++i) {
    rows.push_back(json{
        {"parameter", labels[static_cast<std::size_t>(i)]},
        {"empirical_stddev", emp(i)},
        {"analytic_stddev", ana(i)},
        {"relative_gap", ana(i) > 0.0 ? (emp(i) - ana(i)) / ana(i) : 0.0},
        {"mean_error", mean(i)}});
  }
  return json{{"trials", stats.trials},
              {"excluded", stats.excluded},
              {"exclusion_alarm", stats.exclusion_alarm},
              {"parameters", std::move(rows)}};
}

}  // namespace

std::string trials_report_csv(
    const std::vector<std::pair<int, TrialStatistics>>& rows_by_m) {
  std::string out =
      "m,parameter,empirical_stddev,analytic_stddev,relative_gap,mean_error,"
      "trials,excluded\n";
  for (const auto& [m, stats] : rows_by_m) append_trial_rows(out, m, stats);
  return out;
}

nlohmann::json trials_report_json(
    const std::vector<std::pair<int, TrialStatistics>>& rows_by_m) {
  json runs = json::array();
  for (const auto& [m, stats] : rows_by_m) {
    json entry = trial_stats_json(stats);
    entry["m"] = m;
    runs.push_back(std::move(entry));
  }
  return json{{"runs", std::move(runs)}};
}

std::string compare_report_csv(const std::vector<PlanComparison>& ranking,
                               int n) {
  const std::vector<std::string> labels = parameter_labels(n);
  std::string out =
      "rank,plan,det_c,det_s,det_d,condition_residual,worst_ratio,parameter,"
      "empirical_stddev,analytic_stddev,trials,excluded\n";
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    const PlanComparison& entry = ranking[r];
    const Eigen::VectorXd emp =
        packed_to_report_units(entry.stats.empirical_stddev);
    const Eigen::VectorXd ana =
        packed_to_report_units(entry.stats.analytic_stddev);
    for (int i = 0; i < 2 * n; ++i) {
      out += std::to_string(r + 1) + "," + std::to_string(entry.plan_index) +
             "," + format_double(entry.score.det_c) + "," +
             format_double(entry.score.det_s) + "," +
             format_double(entry.score.det_d) + "," +
             format_double(entry.score.condition_residual) + "," +
             format_double(entry.worst_ratio) + "," +
             labels[static_cast<std::size_t>(i)] + "," +
             format_double(emp(i)) + "," + format_double(ana(i)) + "," +
             std::to_string(entry.stats.trials) + "," +
             std::to_string(entry.stats.excluded) + "\n";
    }
  }
  return out;
}

nlohmann::json compare_report_json(const std::vector<PlanComparison>& ranking,
                                   int n) {
  (void)n;
  json plans = json::array();
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    const PlanComparison& entry = ranking[r];
    plans.push_back(json{{"rank", r + 1},
                         {"plan", entry.plan_index},
                         {"score", score_report_json(entry.score)},
                         {"worst_ratio", entry.worst_ratio},
                         {"stats", trial_stats_json(entry.stats)}});
  }
  return json{{"plans", std::move(plans)}};
}

// --- run configuration -----------------------------------------------------------

namespace {

RunConfig extract_config(const json& doc);

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config " + path.string() + ": top level must be an "
                      "object");
  }
  try {
    return extract_config(doc);
  } catch (const json::exception& e) {
    // Wrong JSON types surface here (e.g. a number where a string belongs).
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

namespace {

RunConfig extract_config(const json& doc) {
  RunConfig config;

  const json& manipulator = require_key(doc, "manipulator", "");
  config.link_lengths = number_array(
      require_key(manipulator, "link_lengths_mm", "manipulator."),
      "manipulator.link_lengths_mm");
  for (Eigen::Index i = 0; i < config.link_lengths.size(); ++i) {
    if (!(config.link_lengths(i) > 0.0)) {
      throw ConfigError("config: manipulator.link_lengths_mm[" +
                        std::to_string(i) + "] must be positive");
    }
  }
  const int n = static_cast<int>(config.link_lengths.size());
  config.true_deviation = ParameterDeviation::zero(n);

  if (doc.contains("plan")) {
    const json& plan = doc["plan"];
    const std::string source =
        plan.contains("source") ? plan["source"].get<std::string>()
                                : "generated";
    if (source == "generated") {
      config.plan_source = PlanSource::kGenerated;
      const json& m = require_key(plan, "m", "plan.");
      if (!m.is_number_integer() || m.get<long>() < 1) {
        throw ConfigError("config: 'plan.m' must be a positive integer");
      }
      config.plan_m = m.get<int>();
      if (plan.contains("q1_policy")) {
        const std::string policy = plan["q1_policy"].get<std::string>();
        if (policy == "spread") {
          config.plan_options.q1_policy = Q1Policy::kSpread;
        } else if (policy == "fixed") {
          config.plan_options.q1_policy = Q1Policy::kFixed;
        } else {
          throw ConfigError("config: 'plan.q1_policy' must be 'spread' or "
                            "'fixed', got '" + policy + "'");
        }
      }
      if (plan.contains("q1_fixed_deg")) {
        config.plan_options.q1_fixed = deg_to_rad(
            number_or_throw(plan["q1_fixed_deg"], "plan.q1_fixed_deg"));
      }
      if (plan.contains("phase_offsets_deg")) {
        Eigen::VectorXd phases = number_array(plan["phase_offsets_deg"],
                                              "plan.phase_offsets_deg");
        if (phases.size() != n) {
          throw ConfigError(
              "config: 'plan.phase_offsets_deg' must list all " +
              std::to_string(n) + " joints");
        }
        config.plan_options.phase_offsets = phases.unaryExpr(&deg_to_rad);
      }
    } else if (source == "file") {
      config.plan_source = PlanSource::kFile;
      config.plan_path =
          require_key(plan, "path", "plan.").get<std::string>();
    } else {
      throw ConfigError("config: 'plan.source' must be 'generated' or "
                        "'file', got '" + source + "'");
    }
  }

  if (doc.contains("noise")) {
    config.sigma = number_or_throw(
        require_key(doc["noise"], "sigma_mm", "noise."), "noise.sigma_mm");
    if (config.sigma < 0.0) {
      throw ConfigError("config: 'noise.sigma_mm' must be nonnegative");
    }
  }

  if (doc.contains("trials")) {
    if (!doc["trials"].is_number_integer() || doc["trials"].get<long>() < 1) {
      throw ConfigError("config: 'trials' must be an integer >= 1");
    }
    config.trials = doc["trials"].get<long>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) {
      throw ConfigError("config: 'seed' must be an integer");
    }
    config.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("workers")) {
    if (!doc["workers"].is_number_integer() || doc["workers"].get<int>() < 0) {
      throw ConfigError("config: 'workers' must be an integer >= 0");
    }
    config.workers = doc["workers"].get<int>();
  }

  if (doc.contains("joint_limits_deg")) {
    const json& limits = doc["joint_limits_deg"];
    if (!limits.is_array() || static_cast<int>(limits.size()) != n) {
      throw ConfigError("config: 'joint_limits_deg' must list all " +
                        std::to_string(n) + " joints as [lo, hi] pairs");
    }
    JointLimits parsed;
    parsed.lower.resize(n);
    parsed.upper.resize(n);
    for (int j = 0; j < n; ++j) {
      const json& pair = limits[static_cast<std::size_t>(j)];
      if (!pair.is_array() || pair.size() != 2) {
        throw ConfigError("config: 'joint_limits_deg[" + std::to_string(j) +
                          "]' must be a [lo, hi] pair");
      }
      parsed.lower(j) = deg_to_rad(number_or_throw(
          pair[0], "joint_limits_deg[" + std::to_string(j) + "][0]"));
      parsed.upper(j) = deg_to_rad(number_or_throw(
          pair[1], "joint_limits_deg[" + std::to_string(j) + "][1]"));
    }
    config.joint_limits = std::move(parsed);
  }

  if (doc.contains("true_deviation")) {
    const json& dev = doc["true_deviation"];
    Eigen::VectorXd dl = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd dtheta = Eigen::VectorXd::Zero(n);
    if (dev.contains("dl_mm")) {
      dl = number_array(dev["dl_mm"], "true_deviation.dl_mm");
    }
    if (dev.contains("dq_deg") && dev.contains("dtheta_deg")) {
      throw ConfigError("config: give either 'true_deviation.dq_deg' or "
                        "'true_deviation.dtheta_deg', not both");
    }
    if (dev.contains("dq_deg")) {
      dtheta = cumulative_from_joint(
          number_array(dev["dq_deg"], "true_deviation.dq_deg")
              .unaryExpr(&deg_to_rad));
    } else if (dev.contains("dtheta_deg")) {
      dtheta = number_array(dev["dtheta_deg"], "true_deviation.dtheta_deg")
                   .unaryExpr(&deg_to_rad);
    }
    if (dl.size() != n || dtheta.size() != n) {
      throw ConfigError("config: 'true_deviation' vectors must list all " +
                        std::to_string(n) + " links");
    }
    config.true_deviation = ParameterDeviation(std::move(dtheta), std::move(dl));
  }

  if (doc.contains("sweep_m")) {
    const json& sweep = doc["sweep_m"];
    if (!sweep.is_array() || sweep.empty()) {
      throw ConfigError("config: 'sweep_m' must be a non-empty array of "
                        "integers");
    }
    for (const json& value : sweep) {
      if (!value.is_number_integer() || value.get<long>() < 1) {
        throw ConfigError("config: 'sweep_m' entries must be integers >= 1");
      }
      config.sweep_m.push_back(value.get<int>());
    }
  }

  if (doc.contains("compare")) {
    const json& compare = doc["compare"];
    if (compare.contains("plans")) {
      for (const json& entry : compare["plans"]) {
        if (!entry.is_string()) {
          throw ConfigError("config: 'compare.plans' entries must be file "
                            "paths");
        }
        config.compare_plan_paths.push_back(entry.get<std::string>());
      }
    }
    if (compare.contains("random_plans")) {
      if (!compare["random_plans"].is_number_integer() ||
          compare["random_plans"].get<int>() < 0) {
        throw ConfigError("config: 'compare.random_plans' must be an integer "
                          ">= 0");
      }
      config.compare_random_plans = compare["random_plans"].get<int>();
    }
  }

  if (doc.contains("output")) {
    const json& output = doc["output"];
    if (output.contains("format")) {
      config.output_format = output["format"].get<std::string>();
    }
  }
  if (config.output_format != "csv" && config.output_format != "json") {
    throw ConfigError("config: 'output.format' must be 'csv' or 'json', got '" +
                      config.output_format + "'");
  }

  return config;
}

}  // namespace

}  // namespace plancal
