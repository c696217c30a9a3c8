#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rlakit/audit_io.hpp"
#include "rlakit/combination.hpp"
#include "rlakit/contest.hpp"
#include "rlakit/sampling.hpp"

namespace rla::tools {

// An audit directory, rooted where the config file lives:
//
//   audit.conf                  flat key=value configuration
//   contest.csv                 reported results (path set in the config)
//   manifest-<id>.csv           per comparison stratum (paths set in the config)
//   plans/round-<r>-<id>.csv    draw transcripts, one per stratum and round
//   rounds/round-<r>-<id>.csv   audited interpretations matching a plan
//   events.csv                  append-only decision log
//   events.lock                 held while events.csv is being rewritten
//   out/                        emitted artifacts (margins, parameters, ...)
//
// Relative paths in the config resolve against the config file's directory.
struct AuditDir {
  std::filesystem::path root;
  std::filesystem::path config_path;
  AuditConfig config;
  ContestSpec contest;
  std::map<std::string, StratumManifest> manifests;  // comparison strata only

  static AuditDir open(const std::string& config_file);

  std::filesystem::path plan_path(long long round, const std::string& stratum) const;
  std::filesystem::path round_path(long long round, const std::string& stratum) const;
  std::filesystem::path events_path() const { return root / "events.csv"; }
  std::filesystem::path out_path(const std::string& name) const;

  // Decision log contents; an absent file is an empty log.
  std::vector<AuditEvent> events() const;
  // Highest round number among round-recorded events, 0 when none.
  long long recorded_rounds() const;
  bool any_plans() const;

  // Concatenated plan rows for rounds 1..round of one stratum, in draw
  // order. Rounds without a plan file contribute nothing.
  std::vector<Draw> plans_through(long long round, const std::string& stratum) const;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

// Rewrites events.csv with `add` appended, holding events.lock for the
// duration. A held lock raises AuditStateError naming the lock file.
void append_events(const AuditDir& dir, const std::vector<AuditEvent>& add);

}  // namespace rla::tools
