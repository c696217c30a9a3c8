#include "rlakit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "rlakit/combination.hpp"
#include "rlakit/ratio.hpp"
#include "rlakit/sampling.hpp"

namespace rla {

namespace {

constexpr long long kNoStop = std::numeric_limits<long long>::max();

double unit_double(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

long long scale_down(std::uint64_t x, long long n) {
  return static_cast<long long>(
      (static_cast<unsigned __int128>(x) * static_cast<unsigned long long>(n)) >> 64);
}

std::string trial_seed(const std::string& seed, long long trial) {
  return seed + ",trial-" + std::to_string(trial);
}

void check_schedule(const Schedule& schedule, long long cap) {
  if (schedule.sizes.empty())
    throw std::invalid_argument("schedule: no checkpoints");
  long long prev = 0;
  for (long long n : schedule.sizes) {
    if (n <= prev)
      throw std::invalid_argument("schedule: checkpoints must be positive and strictly increasing");
    prev = n;
  }
  if (cap > 0 && schedule.sizes.back() > cap)
    throw std::invalid_argument("schedule: checkpoint exceeds the population");
}

void check_truth(const PollingTruth& truth) {
  if (truth.winner < 0 || truth.loser < 0 || truth.other < 0)
    throw std::invalid_argument("simulation: negative ballot count in truth");
  if (truth.ballots() < 1)
    throw std::invalid_argument("simulation: empty polling stratum");
}

void check_trials(long long trials) {
  if (trials < 1) throw std::invalid_argument("simulation: trials must be positive");
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("simulation: alpha must lie in (0,1)");
}

PollingSample sample_with_margin(long long size, long long margin) {
  PollingSample s;
  s.size = size;
  s.wins = margin > 0 ? margin : 0;
  s.losses = margin < 0 ? -margin : 0;
  s.others = size - s.wins - s.losses;
  return s;
}

double boundary_pvalue(long long population, long long threshold, long long size,
                       long long margin) {
  return polling_pvalue(sample_with_margin(size, margin), population, threshold).p_value;
}

// Smallest observed margin in [-size, size] with p <= limit; relies on the
// p-value being nonincreasing in the margin.
long long least_margin_below(long long population, long long threshold,
                             long long size, double limit) {
  if (boundary_pvalue(population, threshold, size, -size) <= limit) return -size;
  if (boundary_pvalue(population, threshold, size, size) > limit) return kNoStop;
  long long lo = -size, hi = size;  // p(lo) > limit, p(hi) <= limit
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    (boundary_pvalue(population, threshold, size, mid) <= limit ? hi : lo) = mid;
  }
  return hi;
}

// Draws without replacement from the truth, stopping at the first checkpoint
// whose margin threshold the running sample margin reaches.
WorkloadSummary run_margin_trials(const PollingTruth& truth, const Schedule& schedule,
                                  const std::vector<long long>& thresholds,
                                  long long trials, const std::string& seed) {
  std::vector<long long> stops(schedule.sizes.size(), 0);
  const long long horizon = schedule.sizes.back();
  double sum = 0.0, sumsq = 0.0;
  for (long long i = 0; i < trials; ++i) {
    const std::string ts = trial_seed(seed, i);
    long long w = truth.winner, l = truth.loser, rest = truth.other;
    long long margin = 0, drawn = 0, index = 0;
    long long stop = horizon;
    for (size_t si = 0; si < schedule.sizes.size(); ++si) {
      while (drawn < schedule.sizes[si]) {
        const long long pick = scale_down(seed_uniform64(ts, ++index), w + l + rest);
        if (pick < w) {
          --w;
          ++margin;
        } else if (pick < w + l) {
          --l;
          --margin;
        } else {
          --rest;
        }
        ++drawn;
      }
      if (margin >= thresholds[si]) {
        stop = schedule.sizes[si];
        ++stops[si];
        break;
      }
    }
    sum += static_cast<double>(stop);
    sumsq += static_cast<double>(stop) * static_cast<double>(stop);
  }

  WorkloadSummary out;
  out.trials = trials;
  out.mean = sum / static_cast<double>(trials);
  const double var =
      trials > 1 ? (sumsq - sum * sum / static_cast<double>(trials)) /
                       static_cast<double>(trials - 1)
                 : 0.0;
  out.mean_se = std::sqrt(std::max(var, 0.0) / static_cast<double>(trials));
  long long cum = 0;
  out.coverage.reserve(schedule.sizes.size());
  for (size_t si = 0; si < schedule.sizes.size(); ++si) {
    cum += stops[si];
    const double frac = static_cast<double>(cum) / static_cast<double>(trials);
    out.coverage.push_back({schedule.sizes[si], frac});
    if (out.q50 < 0 && frac >= 0.50) out.q50 = schedule.sizes[si];
    if (out.q90 < 0 && frac >= 0.90) out.q90 = schedule.sizes[si];
    if (out.q99 < 0 && frac >= 0.99) out.q99 = schedule.sizes[si];
  }
  out.stop_rate = static_cast<double>(cum) / static_cast<double>(trials);
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void check_report_field(const std::string& s) {
  if (s.find(',') != std::string::npos || s.find('\n') != std::string::npos)
    throw std::invalid_argument("report: field contains a delimiter: " + s);
}

}  // namespace

Schedule Schedule::arithmetic(long long first, long long last, long long step) {
  if (first < 1 || last < first || step < 1)
    throw std::invalid_argument("schedule: need 1 <= first <= last and step >= 1");
  Schedule s;
  for (long long n = first; n <= last; n += step) s.sizes.push_back(n);
  return s;
}

Schedule Schedule::geometric(double first, double last, int points) {
  if (!(first >= 1.0) || !(last >= first) || points < 1)
    throw std::invalid_argument("schedule: need 1 <= first <= last and points >= 1");
  Schedule s;
  const double lf = std::log(first), ll = std::log(last);
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? lf : lf + (ll - lf) * i / (points - 1);
    long long n = std::llround(std::exp(f));
    if (n < 1) n = 1;
    if (s.sizes.empty() || n > s.sizes.back()) s.sizes.push_back(n);
  }
  return s;
}

std::vector<long long> polling_stopping_margins(long long population,
                                                long long margin_threshold,
                                                double alpha,
                                                const Schedule& schedule) {
  if (population < 1)
    throw std::invalid_argument("simulation: population must be positive");
  check_alpha(alpha);
  check_schedule(schedule, population);
  std::vector<long long> out;
  out.reserve(schedule.sizes.size());
  for (long long n : schedule.sizes)
    out.push_back(least_margin_below(population, margin_threshold, n, alpha));
  return out;
}

std::vector<long long> hybrid_stopping_margins(const HybridStoppingRule& rule,
                                               const Schedule& schedule) {
  const long long V = rule.overall_margin;
  const long long V1 = rule.stratum1_margin, V2 = rule.stratum2_margin;
  const long long N1 = rule.stratum1_ballots, N2 = rule.stratum2_ballots;
  if (V <= 0 || V1 + V2 != V)
    throw std::invalid_argument("hybrid rule: stratum margins must sum to a positive overall margin");
  if (N1 < 1 || N2 < 1 || V1 > N1 || V1 < -N1 || V2 > N2 || V2 < -N2)
    throw std::invalid_argument("hybrid rule: stratum margins exceed their ballot counts");
  if (rule.comparison_draws < 0)
    throw std::invalid_argument("hybrid rule: negative comparison draw count");
  if (!(rule.comparison_bound > 0.0))
    throw std::invalid_argument("hybrid rule: comparison error bound must be positive");
  check_alpha(rule.alpha);
  check_schedule(schedule, N2);

  const double crit = chi2_4_critical(rule.alpha);
  const double bound = rule.comparison_bound;
  const long long draws = rule.comparison_draws;

  // Admissible shares of the overall margin chargeable to the comparison
  // stratum; outside this interval one stratum's null is impossible.
  const Ratio lam_lo(V - V2 - N2, V), lam_hi(V1 + N1, V);

  // Fisher component carried by `draws` error-free comparison draws when the
  // stratum is charged a lambda share of the margin.
  auto g1 = [&](const Ratio& lam) -> double {
    if (draws == 0) return 0.0;
    const double l = lam.to_double();
    if (l <= 0.0) return 0.0;
    const double t = l / bound;
    if (t >= 1.0) return std::numeric_limits<double>::infinity();
    return -2.0 * static_cast<double>(draws) * std::log1p(-t);
  };

  // Integer polling thresholds c = ceil(V2 - lambda2 * V) partition the
  // lambda axis into buckets; within a bucket the polling p-value is fixed
  // and g1 is smallest at the left edge.
  auto lam_inf = [&](long long c) {
    const Ratio edge(V - V2 + c - 1, V);
    return edge < lam_lo ? lam_lo : edge;
  };

  const long long c_min = (Ratio(V2) - (Ratio(1) - lam_lo) * Ratio(V)).ceil();
  const long long c_max = (Ratio(V2) - (Ratio(1) - lam_hi) * Ratio(V)).ceil();

  // Buckets whose left edge sits at or below max(lam_lo, 0) all share the
  // same g1; the one with the weakest polling null dominates, so the scan
  // starts there. Below -N2 the polling null is empty and never binds.
  const Ratio lam_flat = lam_lo < Ratio(0) ? Ratio(0) : lam_lo;
  const long long c_flat = (lam_flat * Ratio(V) + Ratio(V2 - V + 1)).floor();
  const long long scan_to = std::min(c_max, N2 - 1);
  long long scan_from = std::max(c_min, -N2);
  if (c_flat > scan_from) scan_from = std::min(c_flat, scan_to);

  // Buckets at c >= N2 have polling p-value 1 and stand or fall on the
  // comparison evidence alone, independent of the polling sample.
  bool can_stop = true;
  if (c_max >= N2 && g1(lam_inf(std::max(c_min, N2))) < crit) can_stop = false;

  std::vector<long long> out;
  out.reserve(schedule.sizes.size());
  for (long long n : schedule.sizes) {
    if (!can_stop) {
      out.push_back(kNoStop);
      continue;
    }
    long long best = -n;
    bool feasible = true;
    for (long long c = scan_from; c <= scan_to; ++c) {
      const double g = g1(lam_inf(c));
      if (g >= crit) break;  // this bucket and all later ones hold regardless
      const double beta = std::exp(-(crit - g) / 2.0);
      if (boundary_pvalue(N2, c, n, best) <= beta) continue;
      if (boundary_pvalue(N2, c, n, n) > beta) {
        feasible = false;
        break;
      }
      long long lo = best, hi = n;  // p(lo) > beta, p(hi) <= beta
      while (hi - lo > 1) {
        const long long mid = lo + (hi - lo) / 2;
        (boundary_pvalue(N2, c, n, mid) <= beta ? hi : lo) = mid;
      }
      best = hi;
    }
    out.push_back(feasible ? best : kNoStop);
  }
  return out;
}

WorkloadSummary simulate_polling_workload(const PollingScenario& scenario) {
  check_truth(scenario.truth);
  check_trials(scenario.trials);
  const std::vector<long long> thresholds = polling_stopping_margins(
      scenario.truth.ballots(), scenario.margin_threshold, scenario.alpha,
      scenario.schedule);
  return run_margin_trials(scenario.truth, scenario.schedule, thresholds,
                           scenario.trials, scenario.seed);
}

WorkloadSummary simulate_hybrid_workload(const HybridScenario& scenario) {
  check_truth(scenario.truth);
  check_trials(scenario.trials);
  if (scenario.truth.ballots() != scenario.rule.stratum2_ballots)
    throw std::invalid_argument("simulation: truth does not fill the polling stratum");
  const std::vector<long long> thresholds =
      hybrid_stopping_margins(scenario.rule, scenario.schedule);
  return run_margin_trials(scenario.truth, scenario.schedule, thresholds,
                           scenario.trials, scenario.seed);
}

WorkloadSummary simulate_comparison_workload(const ComparisonScenario& scenario) {
  check_trials(scenario.trials);
  check_alpha(scenario.alpha);
  if (scenario.horizon < 1)
    throw std::invalid_argument("simulation: horizon must be positive");
  double total_rate = 0.0;
  for (const ErrorProfile& e : scenario.errors) {
    if (!(e.rate >= 0.0 && e.rate <= 1.0))
      throw std::invalid_argument("simulation: error rate outside [0,1]");
    if (!(e.taint <= 1.0))
      throw std::invalid_argument("simulation: error taint exceeds 1");
    total_rate += e.rate;
  }
  if (total_rate > 1.0 + 1e-12)
    throw std::invalid_argument("simulation: error rates sum beyond 1");

  auto run_trial = [&](auto state, const std::string& ts) -> long long {
    for (long long k = 1; k <= scenario.horizon; ++k) {
      const double u = unit_double(seed_uniform64(ts, k));
      double taint = 0.0, cum = 0.0;
      for (const ErrorProfile& e : scenario.errors) {
        cum += e.rate;
        if (u < cum) {
          taint = e.taint;
          break;
        }
      }
      state.update(taint);
      if (state.pvalue() <= scenario.alpha) return k;
      if (state.poisoned()) return kNoStop;  // no later draw can reject
    }
    return kNoStop;
  };

  std::vector<long long> stops;
  stops.reserve(scenario.trials);
  double sum = 0.0, sumsq = 0.0;
  long long stopped = 0;
  for (long long i = 0; i < scenario.trials; ++i) {
    const std::string ts = trial_seed(scenario.seed, i);
    const long long stop =
        scenario.use_kaplan_wald
            ? run_trial(KaplanWaldState(scenario.threshold, scenario.gamma), ts)
            : run_trial(KaplanMarkovState(scenario.threshold), ts);
    stops.push_back(stop);
    if (stop != kNoStop) ++stopped;
    const double censored =
        static_cast<double>(stop == kNoStop ? scenario.horizon : stop);
    sum += censored;
    sumsq += censored * censored;
  }

  std::sort(stops.begin(), stops.end());
  auto quantile = [&](double level) -> long long {
    const auto rank = static_cast<size_t>(
        std::ceil(level * static_cast<double>(scenario.trials)));
    const long long v = stops[rank == 0 ? 0 : rank - 1];
    return v == kNoStop ? -1 : v;
  };

  WorkloadSummary out;
  out.trials = scenario.trials;
  out.mean = sum / static_cast<double>(scenario.trials);
  const double var =
      scenario.trials > 1
          ? (sumsq - sum * sum / static_cast<double>(scenario.trials)) /
                static_cast<double>(scenario.trials - 1)
          : 0.0;
  out.mean_se = std::sqrt(std::max(var, 0.0) / static_cast<double>(scenario.trials));
  out.q50 = quantile(0.50);
  out.q90 = quantile(0.90);
  out.q99 = quantile(0.99);
  out.stop_rate = static_cast<double>(stopped) / static_cast<double>(scenario.trials);
  return out;
}

long long expected_rate_stopping_size(double threshold,
                                      const std::vector<ErrorProfile>& errors,
                                      double alpha) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument("expected stopping size: threshold must lie in (0,1)");
  check_alpha(alpha);
  double drift = std::log1p(-threshold);
  double total_rate = 0.0;
  for (const ErrorProfile& e : errors) {
    if (!(e.rate >= 0.0 && e.rate <= 1.0))
      throw std::invalid_argument("expected stopping size: error rate outside [0,1]");
    if (!(e.taint <= 1.0))
      throw std::invalid_argument("expected stopping size: error taint exceeds 1");
    total_rate += e.rate;
    if (e.rate > 0.0) {
      if (e.taint >= 1.0) return kNoStop;
      drift -= e.rate * std::log1p(-e.taint);
    }
  }
  if (total_rate > 1.0 + 1e-12)
    throw std::invalid_argument("expected stopping size: error rates sum beyond 1");
  if (!(drift < 0.0)) return kNoStop;

  const double target = std::log(alpha);
  long long n = static_cast<long long>(std::ceil(target / drift - 1e-9));
  if (n < 1) n = 1;
  while (n > 1 && static_cast<double>(n - 1) * drift <= target) --n;
  while (static_cast<double>(n) * drift > target) ++n;
  return n;
}

RejectionRate comparison_null_rejection(const ComparisonScenario& scenario) {
  const WorkloadSummary w = simulate_comparison_workload(scenario);
  RejectionRate out;
  out.trials = w.trials;
  out.rate = w.stop_rate;
  out.sigma = std::sqrt(out.rate * (1.0 - out.rate) / static_cast<double>(w.trials));
  return out;
}

RejectionRate polling_null_rejection(const PollingNull& null_case) {
  check_truth(null_case.truth);
  check_trials(null_case.trials);
  check_alpha(null_case.alpha);
  const long long population = null_case.truth.ballots();
  if (null_case.sample < 1 || null_case.sample > population)
    throw std::invalid_argument("simulation: sample outside [1, population]");

  const long long dstar = least_margin_below(population, null_case.margin_threshold,
                                             null_case.sample, null_case.alpha);
  long long rejected = 0;
  for (long long i = 0; i < null_case.trials; ++i) {
    const std::string ts = trial_seed(null_case.seed, i);
    long long w = null_case.truth.winner, l = null_case.truth.loser;
    long long rest = null_case.truth.other, margin = 0;
    for (long long k = 1; k <= null_case.sample; ++k) {
      const long long pick = scale_down(seed_uniform64(ts, k), w + l + rest);
      if (pick < w) {
        --w;
        ++margin;
      } else if (pick < w + l) {
        --l;
        --margin;
      } else {
        --rest;
      }
    }
    if (margin >= dstar) ++rejected;
  }

  RejectionRate out;
  out.trials = null_case.trials;
  out.rate = static_cast<double>(rejected) / static_cast<double>(null_case.trials);
  out.sigma =
      std::sqrt(out.rate * (1.0 - out.rate) / static_cast<double>(null_case.trials));
  return out;
}

RejectionRate hybrid_null_rejection(const HybridNull& null_case) {
  check_truth(null_case.truth);
  check_trials(null_case.trials);
  if (!(null_case.error_rate >= 0.0 && null_case.error_rate <= 1.0))
    throw std::invalid_argument("simulation: error rate outside [0,1]");
  if (null_case.truth.ballots() != null_case.rule.stratum2_ballots)
    throw std::invalid_argument("simulation: truth does not fill the polling stratum");
  if (null_case.sample < 1 || null_case.sample > null_case.rule.stratum2_ballots)
    throw std::invalid_argument("simulation: sample outside [1, population]");

  // A comparison draw showing taint 1 freezes the test at its running
  // minimum, so the whole sequence reduces to the error-free prefix length.
  const long long n1 = null_case.rule.comparison_draws;
  Schedule single;
  single.sizes = {null_case.sample};
  std::vector<long long> dstar(static_cast<size_t>(n1) + 1);
  for (long long m = 0; m <= n1; ++m) {
    HybridStoppingRule r = null_case.rule;
    r.comparison_draws = m;
    dstar[static_cast<size_t>(m)] = hybrid_stopping_margins(r, single)[0];
  }

  long long rejected = 0;
  for (long long i = 0; i < null_case.trials; ++i) {
    const std::string ts = trial_seed(null_case.seed, i);
    long long clean = n1;
    for (long long k = 1; k <= n1; ++k) {
      if (unit_double(seed_uniform64(ts, k)) < null_case.error_rate) {
        clean = k - 1;
        break;
      }
    }
    long long w = null_case.truth.winner, l = null_case.truth.loser;
    long long rest = null_case.truth.other, margin = 0;
    for (long long k = 1; k <= null_case.sample; ++k) {
      const long long pick = scale_down(seed_uniform64(ts, n1 + k), w + l + rest);
      if (pick < w) {
        --w;
        ++margin;
      } else if (pick < w + l) {
        --l;
        --margin;
      } else {
        --rest;
      }
    }
    if (margin >= dstar[static_cast<size_t>(clean)]) ++rejected;
  }

  RejectionRate out;
  out.trials = null_case.trials;
  out.rate = static_cast<double>(rejected) / static_cast<double>(null_case.trials);
  out.sigma =
      std::sqrt(out.rate * (1.0 - out.rate) / static_cast<double>(null_case.trials));
  return out;
}

ReportDocument scenario_report(const std::vector<ScenarioRow>& rows) {
  ReportDocument doc;
  doc.csv = "schema:report.v1\nscenario,metric,value,note\n";
  if (rows.empty()) return doc;

  size_t name_width = 0;
  for (const ScenarioRow& row : rows) name_width = std::max(name_width, row.name.size());

  for (const ScenarioRow& row : rows) {
    check_report_field(row.name);
    check_report_field(row.note);
    std::string line = row.name;
    line.append(name_width - row.name.size() + 2, ' ');
    if (row.metrics.empty()) {
      doc.csv += row.name + ",,," + row.note + "\n";
    }
    for (const auto& [key, value] : row.metrics) {
      check_report_field(key);
      line += key + "=" + fmt(value) + "  ";
      doc.csv += row.name + "," + key + "," + fmt(value) + "," + row.note + "\n";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    if (!row.note.empty()) line += "  # " + row.note;
    doc.text += line + "\n";
  }
  return doc;
}

}  // namespace rla
