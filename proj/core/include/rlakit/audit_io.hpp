#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rlakit/combination.hpp"
#include "rlakit/comparison.hpp"
#include "rlakit/contest.hpp"
#include "rlakit/polling.hpp"
#include "rlakit/ratio.hpp"
#include "rlakit/sampling.hpp"

// File formats for audit artifacts. Every CSV here is headed by a
// "schema:<name>.v1" line followed by a fixed column-name line; fields are
// comma-separated with no quoting, so ids must not contain commas or
// newlines (emitters enforce this). Numbers are plain decimal strings.
// Parsers throw ParseError with file:line context; emitters are the inverse
// of their parsers, so parse(emit(x)) == x.

namespace rla {

class ParseError : public std::invalid_argument {
 public:
  ParseError(std::string file, long long line, const std::string& message);

  const std::string& file() const { return file_; }
  long long line() const { return line_; }

 private:
  std::string file_;
  long long line_;
};

struct StratumConfig {
  StratumKind kind = StratumKind::comparison;
  std::string manifest;  // path, comparison strata only
};

// Flat key=value audit configuration ('#' comments allowed):
//   contest, seed, alpha, alpha.comparison, alpha.polling,
//   lambda.comparison, rule = adjust-threshold | full-count,
//   stratum.<id>.kind = comparison | polling, stratum.<id>.manifest,
//   comparison.test = kaplan-markov | kaplan-wald, comparison.gamma,
//   comparison.bound = simple | sharp, comparison.inflation,
//   polling.method = tri | conditional, polling.depth = standard | exhaustive,
//   grid.
struct AuditConfig {
  std::string contest;  // path to the contest file, relative to the config
  std::string seed;
  RiskAllocation allocation;
  std::map<std::string, StratumConfig> strata;
  bool use_kaplan_wald = false;
  double kaplan_wald_gamma = kDefaultKaplanWaldGamma;
  BoundMode bound_mode = BoundMode::simple;
  Ratio bound_inflation = Ratio(1);
  PollingMethod polling_method = PollingMethod::tri_hypergeometric;
  SearchDepth search_depth = SearchDepth::standard;
  int grid_points = 100;
};

AuditConfig parse_config(const std::string& text, const std::string& filename);
std::string emit_config(const AuditConfig& config);

// contest.v1: record,stratum,candidate,value with records
//   role (candidate -> winner|loser|neither),
//   ballots (stratum -> count), votes (stratum,candidate -> count).
ContestSpec parse_contest(const std::string& text, const std::string& filename);
std::string emit_contest(const ContestSpec& spec);

// manifest.v1: batch,ballots,<candidate>... — one row per batch, candidate
// columns taken from the header. Stratum id and kind come from the config;
// the stratum ballot count is the sum over batches.
StratumManifest parse_manifest(const std::string& text, const std::string& filename,
                               const std::string& stratum_id, StratumKind kind);
std::string emit_manifest(const StratumManifest& manifest);

// plan.v1: draw_index,digest_hex,selected_id.
std::vector<Draw> parse_plan(const std::string& text, const std::string& filename);
std::string emit_plan(const std::vector<Draw>& plan);

// round.comparison.v1: record,unit,candidate,value with records
//   audited (batch,candidate -> hand count) and optional meta recorded_at.
struct ComparisonRound {
  // batch id -> candidate -> audited votes
  std::map<std::string, std::map<std::string, long long>> audited;
  std::string recorded_at;
};

ComparisonRound parse_comparison_round(const std::string& text,
                                       const std::string& filename);
std::string emit_comparison_round(const ComparisonRound& round);

// round.polling.v1: record,unit,candidate,value with one mark row per drawn
// ballot (candidate empty when the ballot shows no vote in the contest) and
// optional meta recorded_at.
struct BallotMark {
  long long position = 0;
  std::string candidate;
};

struct PollingRound {
  std::vector<BallotMark> marks;
  std::string recorded_at;
};

PollingRound parse_polling_round(const std::string& text, const std::string& filename);
std::string emit_polling_round(const PollingRound& round);

// events.v1: event,stratum,value — the append-only decision log.
std::vector<AuditEvent> parse_events(const std::string& text,
                                     const std::string& filename);
std::string emit_events(const std::vector<AuditEvent>& events);

// parameters.v1: stratum,next_round_size — the per-round hand-off file for
// external sample-pulling tooling.
std::string emit_parameters(
    const std::vector<std::pair<std::string, long long>>& next_sizes);
std::vector<std::pair<std::string, long long>> parse_parameters(
    const std::string& text, const std::string& filename);

// assessment.v1: metric,value — flat emit-only summary of an assess run.
struct AssessmentLine {
  std::string metric;
  std::string value;
};

std::string emit_assessment(const std::vector<AssessmentLine>& lines);

// margins.v1: winner,loser,scope,value — overall and per-stratum reported
// margins plus the diluted overall margin per candidate pair.
std::string emit_margins(const MarginTable& margins);

std::string format_double(double x);  // %.12g, shared by all emitters
// Canonical exact form "num/den".
std::string format_ratio(const Ratio& r);
// Accepts "num/den" or a plain decimal string ("0.5" -> 1/2), exactly.
Ratio parse_ratio(const std::string& field, const std::string& file, long long line);
long long parse_integer(const std::string& field, const std::string& file,
                        long long line);
double parse_double(const std::string& field, const std::string& file,
                    long long line);

}  // namespace rla
