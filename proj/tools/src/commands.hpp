#pragma once

#include <string>

namespace rla::tools {

// Subcommand bodies behind the rlakit CLI. Each takes the audit.conf path,
// prints a human summary to stdout, writes artifacts under the audit
// directory, and returns the process exit code. Validation problems throw
// std::invalid_argument (exit 2); workflow conflicts such as a held lock,
// an already-drawn round, or a refused seed override throw AuditStateError
// (exit 3). A `round` of 0 means "the next one" (or, for assess, "the last
// recorded one").

int cmd_init(const std::string& config_path);
int cmd_plan(const std::string& config_path, long long round, long long trials);
int cmd_draw(const std::string& config_path, long long round,
             const std::string& seed_override, bool paranoid);
int cmd_record(const std::string& config_path, long long round);
int cmd_assess(const std::string& config_path, long long round, int grid);
int cmd_escalate_reject(const std::string& config_path, const std::string& stratum);
int cmd_escalate_full_count(const std::string& config_path,
                            const std::string& stratum, long long actual_margin);
int cmd_simulate(const std::string& config_path, long long trials);
int cmd_report(const std::string& config_path);

}  // namespace rla::tools
