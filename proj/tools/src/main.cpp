#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "rlakit/combination.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "rlakit: two-stratum risk-limiting audit of a plurality contest.\n"
      "One stratum is audited by ballot-level comparison against its cast\n"
      "vote records, the other by ballot polling; evidence is combined over\n"
      "every admissible split of the tolerable overstatement."};
  app.require_subcommand(1);

  std::string config;
  long long round = 0;
  long long trials = 0;
  int grid = 0;
  std::string seed_override;
  bool paranoid = false;
  std::string stratum;
  long long margin = 0;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Path to audit.conf")->required();
  };

  CLI::App* init = app.add_subcommand(
      "init", "Validate the configuration and emit the margin tables");
  add_config(init);

  CLI::App* plan = app.add_subcommand(
      "plan", "Estimate next-round sample sizes and write the parameter file");
  add_config(plan);
  plan->add_option("--round", round, "Round to plan (default: next)");
  plan->add_option("--trials", trials,
                   "Monte Carlo trials behind the polling estimate (default 1000)");

  CLI::App* draw = app.add_subcommand(
      "draw", "Draw the planned samples and write per-stratum plan transcripts");
  add_config(draw);
  draw->add_option("--round", round, "Round to draw (default: next)");
  draw->add_option("--seed-override", seed_override,
                   "Replace the configured seed; refused once draws exist");
  draw->add_flag("--paranoid", paranoid,
                 "Re-derive and cross-check every transcript before writing");

  CLI::App* record = app.add_subcommand(
      "record", "Validate a round's audit data and append it to the decision log");
  add_config(record);
  record->add_option("--round", round, "Round to record (default: next)");

  CLI::App* assess = app.add_subcommand(
      "assess", "Compute stratum and combined p-values and the stop/continue decision");
  add_config(assess);
  assess->add_option("--round", round, "Assess through this round (default: last recorded)");
  assess->add_option("--grid", grid, "Lambda grid points in the emitted curve");

  CLI::App* escalate =
      app.add_subcommand("escalate", "Apply an escalation event to the decision log");
  escalate->require_subcommand(1);
  CLI::App* reject = escalate->add_subcommand(
      "reject", "Mark a stratum's null rejected at its current threshold");
  add_config(reject);
  reject->add_option("--stratum", stratum, "Stratum id")->required();
  CLI::App* full_count = escalate->add_subcommand(
      "full-count", "Record the actual margin from a completed full hand count");
  add_config(full_count);
  full_count->add_option("--stratum", stratum, "Stratum id")->required();
  full_count->add_option("--margin", margin, "Hand-counted margin, winner minus loser")
      ->required();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Estimate the audit workload under the reported tallies");
  add_config(simulate);
  simulate->add_option("--trials", trials, "Monte Carlo trials (default 10000)");

  CLI::App* report =
      app.add_subcommand("report", "Summarize the audit's progress and state");
  add_config(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    using namespace rla::tools;
    if (init->parsed()) return cmd_init(config);
    if (plan->parsed()) return cmd_plan(config, round, trials);
    if (draw->parsed()) return cmd_draw(config, round, seed_override, paranoid);
    if (record->parsed()) return cmd_record(config, round);
    if (assess->parsed()) return cmd_assess(config, round, grid);
    if (reject->parsed()) return cmd_escalate_reject(config, stratum);
    if (full_count->parsed()) return cmd_escalate_full_count(config, stratum, margin);
    if (simulate->parsed()) return cmd_simulate(config, trials);
    if (report->parsed()) return cmd_report(config);
  } catch (const rla::AuditStateError& e) {
    std::cerr << "state error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
