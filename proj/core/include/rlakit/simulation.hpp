#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rlakit/comparison.hpp"
#include "rlakit/polling.hpp"

namespace rla {

// Sample sizes at which a simulated audit checks its stopping condition.
// Sizes are strictly increasing and start at 1 or above.
struct Schedule {
  std::vector<long long> sizes;

  static Schedule arithmetic(long long first, long long last, long long step);
  // `points` sizes log-evenly spaced over [first, last], deduplicated after
  // rounding to integers.
  static Schedule geometric(double first, double last, int points);
};

struct CoveragePoint {
  long long size = 0;
  double fraction = 0.0;  // trials stopping at or before this checkpoint
};

struct WorkloadSummary {
  long long trials = 0;
  // Stopping sizes; trials that never stop count the final checkpoint.
  double mean = 0.0;
  double mean_se = 0.0;
  // Smallest checkpoint whose cumulative stopping fraction reaches the
  // level, or -1 when no checkpoint does.
  long long q50 = -1;
  long long q90 = -1;
  long long q99 = -1;
  double stop_rate = 0.0;
  std::vector<CoveragePoint> coverage;
};

// Actual ballot counts behind a simulated polling stratum.
struct PollingTruth {
  long long winner = 0;
  long long loser = 0;
  long long other = 0;

  long long ballots() const { return winner + loser + other; }
};

// Smallest sample margin at each checkpoint that rejects the stratum null
// A_w - A_l <= margin_threshold at level alpha, or
// std::numeric_limits<long long>::max() when no sample of that size can
// reject.
std::vector<long long> polling_stopping_margins(long long population,
                                                long long margin_threshold,
                                                double alpha,
                                                const Schedule& schedule);

// Stopping rule for a polling stratum backed by fixed comparison-stratum
// evidence: stop once the Fisher combination rejects every admissible split
// of the overall margin between the strata at level alpha. The comparison
// evidence is `comparison_draws` error-free draws against a total error
// bound of `comparison_bound` (margin fractions).
struct HybridStoppingRule {
  double alpha = 0.05;
  long long overall_margin = 0;   // votes, winner minus loser, both strata
  long long stratum1_margin = 0;  // comparison stratum share, votes
  long long stratum2_margin = 0;  // polling stratum share, votes
  long long stratum1_ballots = 0;
  long long stratum2_ballots = 0;
  long long comparison_draws = 0;
  double comparison_bound = 0.0;
};

std::vector<long long> hybrid_stopping_margins(const HybridStoppingRule& rule,
                                               const Schedule& schedule);

struct PollingScenario {
  PollingTruth truth;
  long long margin_threshold = 0;
  double alpha = 0.05;
  Schedule schedule;
  long long trials = 10000;
  std::string seed = "workload";
};

// Draws without replacement from the truth, testing at each checkpoint
// against the fixed stratum threshold.
WorkloadSummary simulate_polling_workload(const PollingScenario& scenario);

struct HybridScenario {
  HybridStoppingRule rule;
  PollingTruth truth;
  Schedule schedule;
  long long trials = 10000;
  std::string seed = "workload";
};

// Same trial mechanics as simulate_polling_workload, but stopping under the
// combined rule of hybrid_stopping_margins.
WorkloadSummary simulate_hybrid_workload(const HybridScenario& scenario);

// Ballot-level error mix for comparison-audit simulation: independently per
// draw, taint `taint` shows with probability `rate`; otherwise the draw is
// clean. Rates must sum to at most 1.
struct ErrorProfile {
  double taint = 0.0;
  double rate = 0.0;
};

struct ComparisonScenario {
  double threshold = 0.0;  // null threshold in taint units
  std::vector<ErrorProfile> errors;
  double alpha = 0.05;
  long long horizon = 10000;  // censoring point, in draws
  long long trials = 10000;
  std::string seed = "workload";
  bool use_kaplan_wald = false;
  double gamma = kDefaultKaplanWaldGamma;
};

// Per-draw stopping granularity; quantiles are exact order statistics and
// the coverage list stays empty.
WorkloadSummary simulate_comparison_workload(const ComparisonScenario& scenario);

// First n at which the test statistic crosses log(alpha) when every draw
// contributes its expected log factor. Equals clean_sample_size with no
// errors; std::numeric_limits<long long>::max() when the expected factor
// does not shrink the p-value.
long long expected_rate_stopping_size(double threshold,
                                      const std::vector<ErrorProfile>& errors,
                                      double alpha);

struct RejectionRate {
  double rate = 0.0;
  double sigma = 0.0;  // binomial Monte-Carlo standard error
  long long trials = 0;
};

// Fraction of trials in which the sequential comparison test ever rejects
// within the scenario horizon.
RejectionRate comparison_null_rejection(const ComparisonScenario& scenario);

// Single look at a fixed sample size against a polling stratum whose true
// margin sits on the null boundary.
struct PollingNull {
  PollingTruth truth;
  long long margin_threshold = 0;
  long long sample = 0;
  double alpha = 0.05;
  long long trials = 10000;
  std::string seed = "risk";
};

RejectionRate polling_null_rejection(const PollingNull& null_case);

// Single look for the combined rule: comparison draws show taint 1 with
// probability error_rate (rule.comparison_draws of them), the polling sample
// is drawn from the truth, and the trial rejects when the Fisher combination
// rejects every admissible margin split.
struct HybridNull {
  HybridStoppingRule rule;
  double error_rate = 0.0;
  PollingTruth truth;
  long long sample = 0;
  long long trials = 10000;
  std::string seed = "risk";
};

RejectionRate hybrid_null_rejection(const HybridNull& null_case);

struct ScenarioRow {
  std::string name;
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;
};

struct ReportDocument {
  std::string text;  // aligned human-readable table
  std::string csv;   // schema-tagged long form, one line per metric
};

// An empty row set yields empty text and a header-only CSV.
ReportDocument scenario_report(const std::vector<ScenarioRow>& rows);

}  // namespace rla
