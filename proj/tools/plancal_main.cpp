// plancal: design, evaluate, and validate calibration experiments for
// n-link planar manipulators.
//
// Subcommands:
//   design    generate a calibration plan and report its criteria
//   evaluate  score an existing plan file and predict parameter accuracy
//   identify  estimate geometric deviations from a measurement file
//   simulate  Monte Carlo validation of the accuracy predictions

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "plancal/accuracy.hpp"
#include "plancal/design.hpp"
#include "plancal/errors.hpp"
#include "plancal/identification.hpp"
#include "plancal/io.hpp"
#include "plancal/kinematics.hpp"
#include "plancal/montecarlo.hpp"

namespace {

using json = nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitPlanInfeasible = 3;
constexpr int kExitUnidentifiable = 4;

struct CommonArgs {
  std::string config_path;
  std::string plan_path;
  std::string measurements_path;
  std::string out_path;
  std::string format;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

plancal::RunConfig load_and_override(const CommonArgs& args) {
  plancal::RunConfig config = plancal::load_config(args.config_path);
  if (args.seed) config.seed = *args.seed;
  if (args.workers) config.workers = *args.workers;
  if (!args.format.empty()) {
    if (args.format != "csv" && args.format != "json") {
      throw plancal::ConfigError("--format must be 'csv' or 'json', got '" +
                                 args.format + "'");
    }
    config.output_format = args.format;
  }
  return config;
}

void emit_report(const std::string& csv, const json& doc,
                 const plancal::RunConfig& config, const std::string& out_path) {
  const std::string text =
      config.output_format == "json" ? doc.dump(2) + "\n" : csv;
  std::cout << text;
  if (!out_path.empty()) {
    plancal::atomic_write_file(out_path, text);
  }
}

// Plan for codepaths that accept either a generated plan or a plan file.
plancal::CalibrationPlan resolve_plan(const plancal::ManipulatorModel& model,
                                      const plancal::RunConfig& config,
                                      const std::string& plan_flag) {
  if (!plan_flag.empty()) {
    return plancal::read_plan_file(plan_flag);
  }
  if (config.plan_source == plancal::PlanSource::kFile) {
    return plancal::read_plan_file(config.plan_path);
  }
  if (config.plan_m < 1) {
    throw plancal::ConfigError("config: 'plan.m' is required to generate a "
                               "plan");
  }
  if (config.joint_limits) {
    plancal::OptimizeOptions opts;
    opts.seed = config.seed;
    return plancal::optimize_plan_numeric(model, config.plan_m,
                                          config.joint_limits, opts)
        .plan;
  }
  return plancal::generate_optimal_plan(model, config.plan_m,
                                        config.plan_options);
}

void check_joint_count(const plancal::ManipulatorModel& model,
                       const plancal::CalibrationPlan& plan,
                       const std::string& what) {
  if (plan.num_joints() != model.num_links()) {
    throw plancal::ConfigError(
        what + " has " + std::to_string(plan.num_joints()) +
        " joint columns but the manipulator has " +
        std::to_string(model.num_links()) + " links");
  }
}

int cmd_design(const CommonArgs& args) {
  const plancal::RunConfig config = load_and_override(args);
  const plancal::ManipulatorModel model(config.link_lengths);
  if (config.plan_m < 1) {
    throw plancal::ConfigError("config: 'plan.m' is required for design");
  }

  plancal::CalibrationPlan plan;
  std::string method;
  if (config.joint_limits) {
    plancal::OptimizeOptions opts;
    opts.seed = config.seed;
    plan = plancal::optimize_plan_numeric(model, config.plan_m,
                                          config.joint_limits, opts)
               .plan;
    method = "optimized";
  } else {
    plan = plancal::generate_optimal_plan(model, config.plan_m,
                                          config.plan_options);
    method = "generated";
  }

  // The plan file format follows the --out extension; --format governs the
  // report on stdout.
  const std::string plan_format =
      std::filesystem::path(args.out_path).extension() == ".json" ? "json"
                                                                  : "csv";
  plancal::write_plan_file(args.out_path, plan, plan_format);
  // Score the plan exactly as the file represents it, so a later evaluate of
  // the same file reproduces the reported numbers bit for bit.
  const plancal::PlanScore score =
      plancal::score_plan(model, plancal::read_plan_file(args.out_path));

  std::string csv = plancal::score_report_csv(score);
  csv += "method," + method + "\n";
  json doc = plancal::score_report_json(score);
  doc = json{{"method", method}, {"score", std::move(doc)}};
  const std::string text =
      config.output_format == "json" ? doc.dump(2) + "\n" : csv;
  std::cout << text;
  return 0;
}

int cmd_evaluate(const CommonArgs& args) {
  const plancal::RunConfig config = load_and_override(args);
  const plancal::ManipulatorModel model(config.link_lengths);
  if (args.plan_path.empty()) {
    throw plancal::ConfigError("evaluate requires --plan <file>");
  }
  const plancal::CalibrationPlan plan = plancal::read_plan_file(args.plan_path);
  check_joint_count(model, plan, "plan file " + args.plan_path);

  plancal::EvaluateReport report;
  report.m = plan.num_experiments();
  report.score = plancal::score_plan(model, plan);
  report.accuracy = plancal::covariance(model, plan, config.sigma);
  report.optimal_bound =
      plancal::analytic_optimal_stddev(model, report.m, config.sigma);

  emit_report(plancal::evaluate_report_csv(report),
              plancal::evaluate_report_json(report), config, args.out_path);
  return 0;
}

int cmd_identify(const CommonArgs& args) {
  const plancal::RunConfig config = load_and_override(args);
  const plancal::ManipulatorModel model(config.link_lengths);
  if (args.measurements_path.empty()) {
    throw plancal::ConfigError("identify requires --measurements <file>");
  }
  plancal::MeasurementData data =
      plancal::read_measurements_file(args.measurements_path);

  plancal::CalibrationPlan plan = std::move(data.plan);
  if (!args.plan_path.empty()) {
    plancal::CalibrationPlan plan_file =
        plancal::read_plan_file(args.plan_path);
    if (plan_file.num_experiments() != plan.num_experiments()) {
      throw plancal::ConfigError(
          "row counts differ: plan file " + args.plan_path + " has " +
          std::to_string(plan_file.num_experiments()) + " rows, measurements " +
          args.measurements_path + " has " +
          std::to_string(plan.num_experiments()));
    }
    check_joint_count(model, plan_file, "plan file " + args.plan_path);
    if (plan_file.num_joints() != plan.num_joints()) {
      throw plancal::ConfigError(
          "joint counts differ: plan file " + args.plan_path + " has " +
          std::to_string(plan_file.num_joints()) + " columns, measurements " +
          args.measurements_path + " has " + std::to_string(plan.num_joints()));
    }
    const double disagreement =
        (plan_file.as_matrix() - plan.as_matrix()).cwiseAbs().maxCoeff();
    if (disagreement > 1e-9) {
      throw plancal::ConfigError(
          "joint coordinates in " + args.plan_path + " and " +
          args.measurements_path + " disagree by up to " +
          plancal::format_double(plancal::rad_to_deg(disagreement)) + " deg");
    }
    plan = std::move(plan_file);
  }
  check_joint_count(model, plan, "measurements file " + args.measurements_path);

  const plancal::IdentificationResult result =
      plancal::identify(model, plan, data.measurements);
  if (!result.converged) {
    std::cerr << "warning: identification did not converge within the "
                 "iteration limit\n";
  }
  emit_report(plancal::identify_report_csv(result),
              plancal::identify_report_json(result), config, args.out_path);
  return 0;
}

int cmd_simulate(const CommonArgs& args) {
  const plancal::RunConfig config = load_and_override(args);
  const plancal::ManipulatorModel model(config.link_lengths);

  plancal::NoiseSpec noise;
  noise.sigma = config.sigma;
  noise.seed = config.seed;
  plancal::TrialOptions trial_opts;
  trial_opts.workers = config.workers;

  if (!config.sweep_m.empty()) {
    std::vector<std::pair<int, plancal::TrialStatistics>> rows;
    for (const int m : config.sweep_m) {
      const plancal::CalibrationPlan plan =
          config.joint_limits
              ? plancal::optimize_plan_numeric(model, m, config.joint_limits,
                                               {.seed = config.seed})
                    .plan
              : plancal::generate_optimal_plan(model, m, config.plan_options);
      rows.emplace_back(m, plancal::run_trials(model, config.true_deviation,
                                               plan, noise, config.trials,
                                               trial_opts));
    }
    emit_report(plancal::trials_report_csv(rows),
                plancal::trials_report_json(rows), config, args.out_path);
    return 0;
  }

  const plancal::CalibrationPlan base_plan =
      resolve_plan(model, config, args.plan_path);
  check_joint_count(model, base_plan, "plan");

  if (!config.compare_plan_paths.empty() || config.compare_random_plans > 0) {
    std::vector<plancal::CalibrationPlan> plans;
    plans.push_back(base_plan);
    for (const std::string& path : config.compare_plan_paths) {
      plancal::CalibrationPlan plan = plancal::read_plan_file(path);
      check_joint_count(model, plan, "plan file " + path);
      plans.push_back(std::move(plan));
    }
    for (int i = 0; i < config.compare_random_plans; ++i) {
      plans.push_back(plancal::random_plan(
          model.num_links(), base_plan.num_experiments(),
          plancal::derive_seed(config.seed,
                               0x9E370000ULL + static_cast<std::uint64_t>(i))));
    }
    const std::vector<plancal::PlanComparison> ranking = plancal::compare_plans(
        model, config.true_deviation, plans, noise, config.trials, trial_opts);
    emit_report(plancal::compare_report_csv(ranking, model.num_links()),
                plancal::compare_report_json(ranking, model.num_links()),
                config, args.out_path);
    return 0;
  }

  std::vector<std::pair<int, plancal::TrialStatistics>> rows;
  rows.emplace_back(base_plan.num_experiments(),
                    plancal::run_trials(model, config.true_deviation, base_plan,
                                        noise, config.trials, trial_opts));
  emit_report(plancal::trials_report_csv(rows),
              plancal::trials_report_json(rows), config, args.out_path);
  return 0;
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const plancal::InsufficientPoints*>(&error) != nullptr ||
      dynamic_cast<const plancal::Infeasible*>(&error) != nullptr) {
    return kExitPlanInfeasible;
  }
  if (dynamic_cast<const plancal::RankDeficient*>(&error) != nullptr ||
      dynamic_cast<const plancal::SingularInformation*>(&error) != nullptr) {
    return kExitUnidentifiable;
  }
  if (dynamic_cast<const plancal::ParseError*>(&error) != nullptr ||
      dynamic_cast<const plancal::ConfigError*>(&error) != nullptr ||
      dynamic_cast<const plancal::DimensionMismatch*>(&error) != nullptr) {
    return kExitUsage;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration experiment design and identification for n-link "
               "planar manipulators"};
  app.require_subcommand(1);

  CommonArgs args;
  int (*handler)(const CommonArgs&) = nullptr;

  const auto add_common = [&](CLI::App* cmd, bool wants_out_plan) {
    cmd->add_option("--config", args.config_path, "JSON run configuration")
        ->required();
    cmd->add_option("--format", args.format, "Report format: csv or json");
    cmd->add_option("--seed", args.seed, "Random seed override");
    cmd->add_option("--workers", args.workers,
                    "Worker threads for simulation (0 = all cores)");
    auto* out = cmd->add_option("--out", args.out_path,
                                wants_out_plan ? "Output plan file"
                                               : "Also write the report here");
    if (wants_out_plan) out->required();
  };

  CLI::App* design = app.add_subcommand("design", "Generate a calibration plan");
  add_common(design, true);
  design->callback([&] { handler = cmd_design; });

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Score a plan file and predict accuracy");
  add_common(evaluate, false);
  evaluate->add_option("--plan", args.plan_path, "Plan file (CSV or JSON)")
      ->required();
  evaluate->callback([&] { handler = cmd_evaluate; });

  CLI::App* identify =
      app.add_subcommand("identify", "Identify deviations from measurements");
  add_common(identify, false);
  identify
      ->add_option("--measurements", args.measurements_path,
                   "Measurement CSV (q_1..q_n,x,y)")
      ->required();
  identify->add_option("--plan", args.plan_path,
                       "Plan file cross-checked against the measurements");
  identify->callback([&] { handler = cmd_identify; });

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo validation runs");
  add_common(simulate, false);
  simulate->add_option("--plan", args.plan_path,
                       "Plan file overriding the configured plan source");
  simulate->callback([&] { handler = cmd_simulate; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return handler(args);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return exit_code_for(error);
  }
}
