#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlakit/combination.hpp"
#include "rlakit/comparison.hpp"
#include "rlakit/contest.hpp"
#include "rlakit/polling.hpp"
#include "rlakit/simulation.hpp"

using namespace rla;

namespace {

constexpr long long kNever = std::numeric_limits<long long>::max();

// Same boundary shape the stopping-margin search uses: the margin carried
// entirely by wins (or losses), the rest undervotes.
PollingSample margin_sample(long long size, long long margin) {
  PollingSample s;
  s.size = size;
  s.wins = margin > 0 ? margin : 0;
  s.losses = margin < 0 ? -margin : 0;
  s.others = size - s.wins - s.losses;
  return s;
}

double margin_pvalue(long long population, long long threshold, long long size,
                     long long margin) {
  return polling_pvalue(margin_sample(size, margin), population, threshold).p_value;
}

// Contest matching HybridStoppingRule{_, 30, 20, 10, 100, 50, _, _}.
MarginTable hybrid_margins() {
  ContestSpec s;
  s.candidates = {"w", "l"};
  s.winners = {"w"};
  s.losers = {"l"};
  s.ballots = {{"s1", 100}, {"s2", 50}};
  s.votes["s1"] = {{"w", 60}, {"l", 40}};
  s.votes["s2"] = {{"w", 30}, {"l", 20}};
  return derive_margins(s);
}

double hybrid_pvalue(long long clean_draws, double bound, long long size,
                     long long margin) {
  HybridEvidence ev;
  ev.taints.assign(static_cast<size_t>(clean_draws), 0.0);
  ev.total_bound = bound;
  ev.sample = margin_sample(size, margin);
  return combined_audit_pvalue(ev, hybrid_margins(), {"w", "l"}, "s1", "s2").p_max;
}

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("arithmetic schedules") {
  CHECK(Schedule::arithmetic(25, 100, 25).sizes ==
        std::vector<long long>{25, 50, 75, 100});
  CHECK(Schedule::arithmetic(5, 5, 3).sizes == std::vector<long long>{5});
  // A step that overshoots the end keeps the last partial checkpoint out.
  CHECK(Schedule::arithmetic(10, 25, 10).sizes == std::vector<long long>{10, 20});

  CHECK_THROWS_AS(Schedule::arithmetic(0, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(Schedule::arithmetic(10, 5, 5), std::invalid_argument);
  CHECK_THROWS_AS(Schedule::arithmetic(1, 10, 0), std::invalid_argument);
}

TEST_CASE("geometric schedules deduplicate after rounding") {
  CHECK(Schedule::geometric(10, 1000, 5).sizes ==
        std::vector<long long>{10, 32, 100, 316, 1000});
  CHECK(Schedule::geometric(2, 4, 8).sizes == std::vector<long long>{2, 3, 4});
  CHECK(Schedule::geometric(1, 1, 1).sizes == std::vector<long long>{1});

  CHECK_THROWS_AS(Schedule::geometric(0.5, 10, 3), std::invalid_argument);
  CHECK_THROWS_AS(Schedule::geometric(10, 5, 3), std::invalid_argument);
  CHECK_THROWS_AS(Schedule::geometric(10, 20, 0), std::invalid_argument);
}

TEST_CASE("polling stopping margins are the least rejecting margins") {
  const Schedule sched = Schedule::arithmetic(25, 200, 25);
  for (long long c : {0LL, 50LL}) {
    const std::vector<long long> dstar =
        polling_stopping_margins(1000, c, 0.05, sched);
    REQUIRE(dstar.size() == sched.sizes.size());
    for (size_t i = 0; i < dstar.size(); ++i) {
      const long long n = sched.sizes[i];
      if (dstar[i] == kNever) {
        CHECK(margin_pvalue(1000, c, n, n) > 0.05);
        continue;
      }
      CHECK(dstar[i] >= -n);
      CHECK(dstar[i] <= n);
      CHECK(margin_pvalue(1000, c, n, dstar[i]) <= 0.05);
      if (dstar[i] > -n) CHECK(margin_pvalue(1000, c, n, dstar[i] - 1) > 0.05);
    }
  }
}

TEST_CASE("polling stopping margins: no sample small enough can reject") {
  const std::vector<long long> dstar =
      polling_stopping_margins(1000, 900, 0.05, Schedule::arithmetic(25, 50, 25));
  CHECK(dstar == std::vector<long long>{kNever, kNever});
}

TEST_CASE("polling stopping margin validation") {
  const Schedule ok = Schedule::arithmetic(10, 20, 10);
  CHECK_THROWS_AS(polling_stopping_margins(0, 0, 0.05, ok), std::invalid_argument);
  CHECK_THROWS_AS(polling_stopping_margins(100, 0, 0.0, ok), std::invalid_argument);
  CHECK_THROWS_AS(polling_stopping_margins(100, 0, 1.0, ok), std::invalid_argument);
  CHECK_THROWS_AS(polling_stopping_margins(15, 0, 0.05, ok), std::invalid_argument);
  Schedule empty;
  CHECK_THROWS_AS(polling_stopping_margins(100, 0, 0.05, empty), std::invalid_argument);
  Schedule unsorted;
  unsorted.sizes = {10, 10};
  CHECK_THROWS_AS(polling_stopping_margins(100, 0, 0.05, unsorted),
                  std::invalid_argument);
}

TEST_CASE("polling workload: unanimous support stops at the first checkpoint") {
  PollingScenario sc;
  sc.truth = PollingTruth{1000, 0, 0};
  sc.margin_threshold = 0;
  sc.alpha = 0.05;
  sc.schedule = Schedule::arithmetic(25, 50, 25);
  sc.trials = 100;
  const WorkloadSummary w = simulate_polling_workload(sc);
  CHECK(w.trials == 100);
  CHECK(w.mean == 25.0);
  CHECK(w.mean_se == 0.0);
  CHECK(w.q50 == 25);
  CHECK(w.q90 == 25);
  CHECK(w.q99 == 25);
  CHECK(w.stop_rate == 1.0);
  REQUIRE(w.coverage.size() == 2);
  CHECK(w.coverage[0].size == 25);
  CHECK(w.coverage[0].fraction == 1.0);
  CHECK(w.coverage[1].fraction == 1.0);
}

TEST_CASE("polling workload: an unreachable rule never stops") {
  PollingScenario sc;
  sc.truth = PollingTruth{500, 500, 0};
  sc.margin_threshold = 400;
  sc.alpha = 0.05;
  sc.schedule = Schedule::arithmetic(50, 100, 50);
  sc.trials = 50;
  const WorkloadSummary w = simulate_polling_workload(sc);
  CHECK(w.stop_rate == 0.0);
  CHECK(w.q50 == -1);
  CHECK(w.q90 == -1);
  CHECK(w.q99 == -1);
  CHECK(w.mean == 100.0);  // censored at the horizon
  for (const CoveragePoint& p : w.coverage) CHECK(p.fraction == 0.0);
}

TEST_CASE("polling workload: coverage accumulates and repeats by seed") {
  PollingScenario sc;
  sc.truth = PollingTruth{550, 450, 0};
  sc.margin_threshold = 0;
  sc.alpha = 0.1;
  sc.schedule = Schedule::arithmetic(25, 300, 25);
  sc.trials = 300;
  sc.seed = "coverage-check";
  const WorkloadSummary a = simulate_polling_workload(sc);
  const WorkloadSummary b = simulate_polling_workload(sc);
  CHECK(a.mean == b.mean);
  CHECK(a.q50 == b.q50);
  CHECK(a.stop_rate == b.stop_rate);
  REQUIRE(a.coverage.size() == b.coverage.size());
  for (size_t i = 0; i < a.coverage.size(); ++i)
    CHECK(a.coverage[i].fraction == b.coverage[i].fraction);

  double prev = 0.0;
  for (const CoveragePoint& p : a.coverage) {
    CHECK(p.fraction >= prev);
    CHECK(p.fraction <= 1.0);
    prev = p.fraction;
  }
  CHECK(a.stop_rate == a.coverage.back().fraction);
  if (a.q50 > 0 && a.q90 > 0) CHECK(a.q50 <= a.q90);
  if (a.q90 > 0 && a.q99 > 0) CHECK(a.q90 <= a.q99);
  CHECK(a.mean >= 25.0);
  CHECK(a.mean <= 300.0);
}

TEST_CASE("polling workload validation") {
  PollingScenario sc;
  sc.truth = PollingTruth{10, 5, 0};
  sc.schedule = Schedule::arithmetic(5, 10, 5);
  sc.trials = 0;
  CHECK_THROWS_AS(simulate_polling_workload(sc), std::invalid_argument);
  sc.trials = 10;
  sc.truth = PollingTruth{-1, 5, 0};
  CHECK_THROWS_AS(simulate_polling_workload(sc), std::invalid_argument);
  sc.truth = PollingTruth{0, 0, 0};
  CHECK_THROWS_AS(simulate_polling_workload(sc), std::invalid_argument);
}

TEST_CASE("comparison workload: clean audits stop at the deterministic size") {
  ComparisonScenario sc;
  sc.threshold = 0.02;
  sc.alpha = 0.05;
  sc.horizon = 200;
  sc.trials = 50;
  const long long n = clean_sample_size(0.02, 0.05);
  REQUIRE(n == 149);
  const WorkloadSummary w = simulate_comparison_workload(sc);
  CHECK(w.mean == static_cast<double>(n));
  CHECK(w.mean_se == 0.0);
  CHECK(w.q50 == n);
  CHECK(w.q90 == n);
  CHECK(w.q99 == n);
  CHECK(w.stop_rate == 1.0);
  CHECK(w.coverage.empty());
}

TEST_CASE("comparison workload: certain full taint never stops") {
  ComparisonScenario sc;
  sc.threshold = 0.02;
  sc.alpha = 0.05;
  sc.horizon = 50;
  sc.trials = 20;
  sc.errors = {{1.0, 1.0}};
  const WorkloadSummary w = simulate_comparison_workload(sc);
  CHECK(w.stop_rate == 0.0);
  CHECK(w.q50 == -1);
  CHECK(w.q99 == -1);
  CHECK(w.mean == 50.0);
}

TEST_CASE("comparison workload: occasional errors stretch the sample") {
  ComparisonScenario clean;
  clean.threshold = 0.02;
  clean.alpha = 0.05;
  clean.horizon = 2000;
  clean.trials = 400;
  clean.seed = "stretch";
  ComparisonScenario noisy = clean;
  noisy.errors = {{0.1, 0.05}};  // expected drift still negative: audits finish
  const WorkloadSummary wc = simulate_comparison_workload(clean);
  const WorkloadSummary wn = simulate_comparison_workload(noisy);
  CHECK(wn.mean > wc.mean);
  CHECK(wn.q50 >= wc.q50);
  // Both still stop essentially always at this horizon.
  CHECK(wc.stop_rate == 1.0);
  CHECK(wn.stop_rate > 0.99);

  ComparisonScenario bad = clean;
  bad.errors = {{0.5, 0.6}, {0.2, 0.6}};
  CHECK_THROWS_AS(simulate_comparison_workload(bad), std::invalid_argument);
  bad.errors = {{1.2, 0.1}};
  CHECK_THROWS_AS(simulate_comparison_workload(bad), std::invalid_argument);
  bad.errors = {};
  bad.horizon = 0;
  CHECK_THROWS_AS(simulate_comparison_workload(bad), std::invalid_argument);
}

TEST_CASE("expected-rate stopping size") {
  // With no errors this is exactly the clean deterministic size.
  CHECK(expected_rate_stopping_size(0.02, {}, 0.05) == clean_sample_size(0.02, 0.05));
  CHECK(expected_rate_stopping_size(0.1, {}, 0.1) == clean_sample_size(0.1, 0.1));
  CHECK(expected_rate_stopping_size(0.05, {{0.9, 0.0}}, 0.05) ==
        clean_sample_size(0.05, 0.05));

  CHECK(expected_rate_stopping_size(0.05, {{0.05, 0.1}}, 0.1) == 50);

  // Errors that outweigh the per-draw gain make the expected test drift
  // upward: no finite sample is predicted to reject.
  CHECK(expected_rate_stopping_size(0.01, {{0.5, 0.05}}, 0.05) == kNever);
  CHECK(expected_rate_stopping_size(0.02, {{1.0, 0.001}}, 0.05) == kNever);

  CHECK_THROWS_AS(expected_rate_stopping_size(0.0, {}, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(expected_rate_stopping_size(1.0, {}, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(expected_rate_stopping_size(0.02, {{0.5, -0.1}}, 0.05),
                  std::invalid_argument);
  CHECK_THROWS_AS(expected_rate_stopping_size(0.02, {{1.5, 0.1}}, 0.05),
                  std::invalid_argument);
  CHECK_THROWS_AS(expected_rate_stopping_size(0.02, {{0.1, 0.7}, {0.2, 0.7}}, 0.05),
                  std::invalid_argument);
}

TEST_CASE("comparison null rejection stays near the risk limit") {
  ComparisonScenario sc;
  sc.threshold = 0.02;
  sc.errors = {{1.0, 0.02}};  // every error is a full-margin overstatement
  sc.alpha = 0.05;
  sc.horizon = 450;
  sc.trials = 2000;
  sc.seed = "null-check";
  const RejectionRate r = comparison_null_rejection(sc);
  CHECK(r.trials == 2000);
  CHECK(r.rate >= 0.0);
  CHECK(r.rate <= 0.05 + 4.0 * std::sqrt(0.05 * 0.95 / 2000.0));
  CHECK(r.sigma == doctest::Approx(std::sqrt(r.rate * (1.0 - r.rate) / 2000.0)));
  const RejectionRate again = comparison_null_rejection(sc);
  CHECK(again.rate == r.rate);
}

TEST_CASE("polling null rejection stays near the risk limit") {
  PollingNull nc;
  nc.truth = PollingTruth{500, 500, 0};  // exactly the null boundary
  nc.margin_threshold = 0;
  nc.sample = 50;
  nc.alpha = 0.05;
  nc.trials = 2000;
  const RejectionRate r = polling_null_rejection(nc);
  CHECK(r.trials == 2000);
  CHECK(r.rate <= 0.05 + 4.0 * std::sqrt(0.05 * 0.95 / 2000.0));

  nc.sample = 0;
  CHECK_THROWS_AS(polling_null_rejection(nc), std::invalid_argument);
  nc.sample = 1001;
  CHECK_THROWS_AS(polling_null_rejection(nc), std::invalid_argument);
}

TEST_CASE("hybrid stopping margins agree with the combined p-value") {
  HybridStoppingRule rule;
  rule.alpha = 0.1;
  rule.overall_margin = 30;
  rule.stratum1_margin = 20;
  rule.stratum2_margin = 10;
  rule.stratum1_ballots = 100;
  rule.stratum2_ballots = 50;
  rule.comparison_draws = 10;
  rule.comparison_bound = 4.0;
  const Schedule sched = Schedule::arithmetic(10, 40, 10);
  const std::vector<long long> dstar = hybrid_stopping_margins(rule, sched);
  REQUIRE(dstar.size() == 4);

  for (size_t i = 0; i < dstar.size(); ++i) {
    const long long n = sched.sizes[i];
    if (dstar[i] == kNever) {
      CHECK(hybrid_pvalue(10, 4.0, n, n) > 0.1);
      continue;
    }
    CHECK(hybrid_pvalue(10, 4.0, n, dstar[i]) <= 0.1);
    if (dstar[i] > -n) CHECK(hybrid_pvalue(10, 4.0, n, dstar[i] - 1) > 0.1);
  }

  // More comparison evidence can only lower the required polling margin.
  HybridStoppingRule stronger = rule;
  stronger.comparison_draws = 40;
  const std::vector<long long> dstar2 = hybrid_stopping_margins(stronger, sched);
  for (size_t i = 0; i < dstar.size(); ++i) CHECK(dstar2[i] <= dstar[i]);
}

TEST_CASE("hybrid stopping margins: weak comparison evidence cannot stop") {
  // With a huge error bound the comparison side carries almost nothing, and
  // thresholds at or above the polling census never reject on their own.
  HybridStoppingRule rule;
  rule.alpha = 0.1;
  rule.overall_margin = 30;
  rule.stratum1_margin = 20;
  rule.stratum2_margin = 10;
  rule.stratum1_ballots = 100;
  rule.stratum2_ballots = 50;
  rule.comparison_draws = 10;
  rule.comparison_bound = 1000.0;
  Schedule census;
  census.sizes = {50};
  CHECK(hybrid_stopping_margins(rule, census) == std::vector<long long>{kNever});
}

TEST_CASE("hybrid stopping margin validation") {
  HybridStoppingRule rule;
  rule.alpha = 0.1;
  rule.overall_margin = 30;
  rule.stratum1_margin = 20;
  rule.stratum2_margin = 10;
  rule.stratum1_ballots = 100;
  rule.stratum2_ballots = 50;
  rule.comparison_draws = 10;
  rule.comparison_bound = 4.0;
  const Schedule ok = Schedule::arithmetic(10, 20, 10);

  HybridStoppingRule r1 = rule;
  r1.stratum2_margin = 5;  // margins no longer sum to the overall
  CHECK_THROWS_AS(hybrid_stopping_margins(r1, ok), std::invalid_argument);
  HybridStoppingRule r2 = rule;
  r2.stratum2_margin = 60;
  r2.overall_margin = 80;  // exceeds the stratum's ballots
  CHECK_THROWS_AS(hybrid_stopping_margins(r2, ok), std::invalid_argument);
  HybridStoppingRule r3 = rule;
  r3.comparison_draws = -1;
  CHECK_THROWS_AS(hybrid_stopping_margins(r3, ok), std::invalid_argument);
  HybridStoppingRule r4 = rule;
  r4.comparison_bound = 0.0;
  CHECK_THROWS_AS(hybrid_stopping_margins(r4, ok), std::invalid_argument);
  Schedule beyond;
  beyond.sizes = {60};  // past the polling stratum
  CHECK_THROWS_AS(hybrid_stopping_margins(rule, beyond), std::invalid_argument);
}

TEST_CASE("hybrid workload: strong comparison evidence stops immediately") {
  HybridStoppingRule rule;
  rule.alpha = 0.1;
  rule.overall_margin = 30;
  rule.stratum1_margin = 20;
  rule.stratum2_margin = 10;
  rule.stratum1_ballots = 100;
  rule.stratum2_ballots = 50;
  rule.comparison_draws = 200;
  rule.comparison_bound = 4.0;
  const Schedule sched = Schedule::arithmetic(10, 20, 10);
  const std::vector<long long> dstar = hybrid_stopping_margins(rule, sched);
  REQUIRE(dstar[0] <= 10);  // the first checkpoint can already stop

  HybridScenario sc;
  sc.rule = rule;
  sc.truth = PollingTruth{50, 0, 0};
  sc.schedule = sched;
  sc.trials = 40;
  const WorkloadSummary w = simulate_hybrid_workload(sc);
  CHECK(w.q50 == 10);
  CHECK(w.stop_rate == 1.0);

  sc.truth = PollingTruth{10, 5, 0};  // does not fill the stratum
  CHECK_THROWS_AS(simulate_hybrid_workload(sc), std::invalid_argument);
}

TEST_CASE("hybrid null rejection stays near the risk limit") {
  HybridNull nc;
  nc.rule.alpha = 0.1;
  nc.rule.overall_margin = 30;
  nc.rule.stratum1_margin = 20;
  nc.rule.stratum2_margin = 10;
  nc.rule.stratum1_ballots = 100;
  nc.rule.stratum2_ballots = 50;
  nc.rule.comparison_draws = 20;
  nc.rule.comparison_bound = 5.0;
  // Boundary null: expected taint weight times the bound equals the
  // comparison stratum's share of the margin (2/15 * 5 = 20/30), and the
  // polling truth is an exact tie.
  nc.error_rate = 2.0 / 15.0;
  nc.truth = PollingTruth{25, 25, 0};
  nc.sample = 40;
  nc.trials = 1000;
  const RejectionRate r = hybrid_null_rejection(nc);
  CHECK(r.trials == 1000);
  CHECK(r.rate <= 0.1 + 4.0 * std::sqrt(0.1 * 0.9 / 1000.0));

  HybridNull bad = nc;
  bad.error_rate = 1.5;
  CHECK_THROWS_AS(hybrid_null_rejection(bad), std::invalid_argument);
  bad = nc;
  bad.truth = PollingTruth{10, 10, 0};
  CHECK_THROWS_AS(hybrid_null_rejection(bad), std::invalid_argument);
  bad = nc;
  bad.sample = 51;
  CHECK_THROWS_AS(hybrid_null_rejection(bad), std::invalid_argument);
}

TEST_CASE("scenario report rendering") {
  const ReportDocument empty = scenario_report({});
  CHECK(empty.text.empty());
  CHECK(empty.csv == "schema:report.v1\nscenario,metric,value,note\n");

  std::vector<ScenarioRow> rows;
  rows.push_back({"clean", {{"mean", 42.0}, {"q90", 60.5}}, "baseline"});
  rows.push_back({"dirty", {}, ""});
  const ReportDocument doc = scenario_report(rows);
  CHECK(doc.text ==
        "clean  mean=42  q90=60.5  # baseline\n"
        "dirty\n");
  CHECK(doc.csv ==
        "schema:report.v1\n"
        "scenario,metric,value,note\n"
        "clean,mean,42,baseline\n"
        "clean,q90,60.5,baseline\n"
        "dirty,,,\n");

  std::vector<ScenarioRow> bad;
  bad.push_back({"has,comma", {}, ""});
  CHECK_THROWS_AS(scenario_report(bad), std::invalid_argument);
  bad.clear();
  bad.push_back({"fine", {{"x", 1.0}}, "note\nbreak"});
  CHECK_THROWS_AS(scenario_report(bad), std::invalid_argument);
}

}  // TEST_SUITE("simulation")
