/**
 * @file io.hpp
 * @brief File formats and report serialization.
 *
 * Angles cross these boundaries in degrees and positions in millimetres;
 * everything is radians/mm internally. CSV files are comma-separated with a
 * header row, '.' decimals, LF line endings, UTF-8. Numbers are written with
 * 17 significant digits so round-trips are lossless.
 */

#ifndef PLANCAL_IO_HPP_
#define PLANCAL_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "plancal/accuracy.hpp"
#include "plancal/design.hpp"
#include "plancal/identification.hpp"
#include "plancal/kinematics.hpp"
#include "plancal/montecarlo.hpp"

namespace plancal {

/// Shortest lossless decimal form of a double (17 significant digits).
std::string format_double(double value);

/// Write `content` to `path` through a temporary file and an atomic rename;
/// the target is never left partially written.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& content);

// --- plans -----------------------------------------------------------------

/// Plan CSV: header q_1..q_n, one row per configuration, angles in degrees.
std::string plan_to_csv(const CalibrationPlan& plan);
CalibrationPlan plan_from_csv(const std::string& text,
                              const std::string& source_name);

std::string plan_to_json(const CalibrationPlan& plan);
CalibrationPlan plan_from_json(const std::string& text,
                               const std::string& source_name);

/// Reads a plan file, choosing the format by extension (.json vs CSV).
CalibrationPlan read_plan_file(const std::filesystem::path& path);
void write_plan_file(const std::filesystem::path& path,
                     const CalibrationPlan& plan, const std::string& format);

// --- measurements ------------------------------------------------------------

struct MeasurementData {
  CalibrationPlan plan;
  MeasurementSet measurements;
};

/// Measurements CSV: header q_1..q_n,x,y; angles in degrees, positions in mm.
std::string measurements_to_csv(const CalibrationPlan& plan,
                                const MeasurementSet& measurements);
MeasurementData measurements_from_csv(const std::string& text,
                                      const std::string& source_name);
MeasurementData read_measurements_file(const std::filesystem::path& path);
void write_measurements_file(const std::filesystem::path& path,
                             const CalibrationPlan& plan,
                             const MeasurementSet& measurements);

// --- reports -----------------------------------------------------------------

/// Labels for the packed parameter vector: dtheta_i_deg then dl_i_mm.
std::vector<std::string> parameter_labels(int n);

/// Converts a packed (dtheta rad | dl mm) vector to reporting units
/// (deg | mm).
Eigen::VectorXd packed_to_report_units(const Eigen::VectorXd& packed);

std::string score_report_csv(const PlanScore& score);
nlohmann::json score_report_json(const PlanScore& score);

struct EvaluateReport {
  PlanScore score;
  AccuracyReport accuracy;
  AccuracyReport optimal_bound;
  int m = 0;
};
std::string evaluate_report_csv(const EvaluateReport& report);
nlohmann::json evaluate_report_json(const EvaluateReport& report);

std::string identify_report_csv(const IdentificationResult& result);
nlohmann::json identify_report_json(const IdentificationResult& result);

/// One row per parameter: empirical vs analytic stddev and their gap.
std::string trials_report_csv(const std::vector<std::pair<int, TrialStatistics>>&
                                  rows_by_m);
nlohmann::json trials_report_json(
    const std::vector<std::pair<int, TrialStatistics>>& rows_by_m);

std::string compare_report_csv(const std::vector<PlanComparison>& ranking,
                               int n);
nlohmann::json compare_report_json(const std::vector<PlanComparison>& ranking,
                                   int n);

// --- run configuration --------------------------------------------------------

enum class PlanSource { kGenerated, kFile };

/// Parsed CLI configuration (JSON document). Angles are converted to radians
/// on load.
struct RunConfig {
  Eigen::VectorXd link_lengths;  // mm
  PlanSource plan_source = PlanSource::kGenerated;
  int plan_m = 0;
  std::string plan_path;
  PlanOptions plan_options;
  std::optional<JointLimits> joint_limits;
  double sigma = 0.0;
  long trials = 1;
  std::uint64_t seed = 0;
  int workers = 0;
  ParameterDeviation true_deviation;  // zero when not configured
  std::vector<int> sweep_m;
  std::vector<std::string> compare_plan_paths;
  int compare_random_plans = 0;
  std::string output_format = "csv";
};

RunConfig load_config(const std::filesystem::path& path);

}  // namespace plancal

#endif  // PLANCAL_IO_HPP_
