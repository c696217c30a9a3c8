#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include "audit_dir.hpp"
#include "rlakit/comparison.hpp"
#include "rlakit/polling.hpp"
#include "rlakit/simulation.hpp"

namespace rla::tools {

namespace {

namespace fs = std::filesystem;

struct StrataIds {
  std::string comparison;
  std::string polling;
};

StrataIds split_strata(const AuditConfig& cfg) {
  StrataIds ids;
  for (const auto& [id, sc] : cfg.strata) {
    std::string& slot =
        sc.kind == StratumKind::comparison ? ids.comparison : ids.polling;
    if (!slot.empty())
      throw std::invalid_argument("config declares two strata of the same kind ('" +
                                  slot + "', '" + id + "'); expected one of each");
    slot = id;
  }
  if (ids.comparison.empty() || ids.polling.empty())
    throw std::invalid_argument(
        "config must declare one comparison stratum and one polling stratum");
  return ids;
}

// The reported results, the manifests, and the config must describe the
// same election before anything downstream runs.
void cross_check(const AuditDir& dir) {
  for (const auto& [id, sc] : dir.config.strata)
    if (!dir.contest.ballots.count(id))
      throw std::invalid_argument("config stratum '" + id +
                                  "' has no ballot count in the contest file");
  for (const auto& [id, n] : dir.contest.ballots)
    if (!dir.config.strata.count(id))
      throw std::invalid_argument("contest stratum '" + id +
                                  "' is not declared in the config");

  const std::set<std::string> known(dir.contest.candidates.begin(),
                                    dir.contest.candidates.end());
  for (const auto& [id, m] : dir.manifests) {
    if (m.ballots != dir.contest.ballots.at(id))
      throw std::invalid_argument(
          "manifest for stratum '" + id + "' lists " + std::to_string(m.ballots) +
          " ballots; the contest file says " +
          std::to_string(dir.contest.ballots.at(id)));
    std::map<std::string, long long> totals;
    for (const Batch& b : m.batches)
      for (const auto& [cand, v] : b.votes) totals[cand] += v;
    for (const auto& [cand, got] : totals) {
      if (!known.count(cand))
        throw std::invalid_argument("manifest for stratum '" + id +
                                    "' reports votes for unknown candidate '" +
                                    cand + "'");
      const long long want = dir.contest.reported(id, cand);
      if (got != want)
        throw std::invalid_argument(
            "manifest for stratum '" + id + "': batches total " +
            std::to_string(got) + " votes for '" + cand +
            "' but the contest file reports " + std::to_string(want));
    }
    for (const auto& [cand, want] : dir.contest.votes.count(id)
                                        ? dir.contest.votes.at(id)
                                        : std::map<std::string, long long>{})
      if (want != 0 && !totals.count(cand))
        throw std::invalid_argument("manifest for stratum '" + id +
                                    "' reports no votes for '" + cand + "'");
  }
}

// Everything the commands keep reaching for, derived once per invocation.
struct Context {
  AuditDir dir;
  StrataIds ids;
  MarginTable margins;
  CandidatePair pair;  // tightest pair; drives sample sizes and state
  std::map<std::string, Batch> batches;
  std::map<std::string, BatchErrorBound> bounds;
  Ratio total_bound;  // U, margin-fraction units
};

Context load(const std::string& config_path) {
  Context ctx{AuditDir::open(config_path)};
  const AllocationCheck chk = validate_allocation(ctx.dir.config.allocation);
  if (!chk.ok) throw std::invalid_argument("risk allocation: " + chk.violation);
  ctx.ids = split_strata(ctx.dir.config);
  cross_check(ctx.dir);
  ctx.margins = derive_margins(ctx.dir.contest);

  ctx.pair = ctx.margins.pairs().front();
  for (const CandidatePair& p : ctx.margins.pairs())
    if (ctx.margins.overall(p) < ctx.margins.overall(ctx.pair)) ctx.pair = p;

  const StratumManifest& m = ctx.dir.manifests.at(ctx.ids.comparison);
  for (const Batch& b : m.batches) {
    ctx.batches.emplace(b.id, b);
    ctx.bounds.emplace(b.id, batch_upper_bound(b, ctx.margins,
                                               ctx.dir.config.bound_mode,
                                               ctx.dir.config.bound_inflation));
  }
  ctx.total_bound = total_error_bound(m.batches, ctx.margins,
                                      ctx.dir.config.bound_mode,
                                      ctx.dir.config.bound_inflation);
  return ctx;
}

AuditState replay_state(const Context& ctx) {
  AuditState st =
      make_audit_state(ctx.margins, ctx.pair, ctx.dir.config.allocation,
                       ctx.ids.comparison, ctx.ids.polling);
  for (const AuditEvent& e : ctx.dir.events()) st = audit_state_step(st, e);
  return st;
}

std::string pair_tag(const CandidatePair& p) { return p.first + "|" + p.second; }

std::string stream_seed(const Context& ctx, const std::string& stratum) {
  return ctx.dir.config.seed + ":" + stratum;
}

// ---------------------------------------------------------------------------
// Evidence assembly from recorded rounds

// Taints of the comparison stratum in draw order through `round`, built by
// joining each round's plan with its audited counts. A batch drawn several
// times contributes its taint once per draw, as the with-replacement test
// expects.
std::vector<double> comparison_taints(const Context& ctx, long long round) {
  std::vector<double> taints;
  for (long long r = 1; r <= round; ++r) {
    const fs::path plan_p = ctx.dir.plan_path(r, ctx.ids.comparison);
    if (!fs::exists(plan_p)) continue;
    const std::vector<Draw> plan = parse_plan(read_file(plan_p), plan_p.string());
    const fs::path round_p = ctx.dir.round_path(r, ctx.ids.comparison);
    if (!fs::exists(round_p))
      throw std::invalid_argument("round " + std::to_string(r) + " stratum '" +
                                  ctx.ids.comparison +
                                  "' was drawn but has no audited counts at " +
                                  round_p.string());
    const ComparisonRound rec =
        parse_comparison_round(read_file(round_p), round_p.string());
    for (const Draw& d : plan) {
      const auto batch_it = ctx.batches.find(d.selected);
      if (batch_it == ctx.batches.end())
        throw std::invalid_argument("plan " + plan_p.string() +
                                    " selects unknown batch '" + d.selected + "'");
      const auto audit_it = rec.audited.find(d.selected);
      if (audit_it == rec.audited.end())
        throw std::invalid_argument("round " + std::to_string(r) +
                                    ": no audited counts for drawn batch '" +
                                    d.selected + "'");
      const TaintObservation obs =
          observed_taint(batch_it->second, audit_it->second, ctx.margins,
                         ctx.bounds.at(d.selected));
      taints.push_back(obs.taint.to_double());
    }
  }
  return taints;
}

// Cumulative polling tally through `round` for one candidate pair. Marks
// for anyone else, and empty marks, count as "other".
PollingSample polling_sample(const Context& ctx, long long round,
                             const CandidatePair& pair) {
  PollingSample s;
  for (long long r = 1; r <= round; ++r) {
    const fs::path plan_p = ctx.dir.plan_path(r, ctx.ids.polling);
    if (!fs::exists(plan_p)) continue;
    const fs::path round_p = ctx.dir.round_path(r, ctx.ids.polling);
    if (!fs::exists(round_p))
      throw std::invalid_argument("round " + std::to_string(r) + " stratum '" +
                                  ctx.ids.polling +
                                  "' was drawn but has no marks recorded at " +
                                  round_p.string());
    const PollingRound rec = parse_polling_round(read_file(round_p), round_p.string());
    for (const BallotMark& m : rec.marks) {
      ++s.size;
      if (m.candidate == pair.first) ++s.wins;
      else if (m.candidate == pair.second) ++s.losses;
      else ++s.others;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Stratum tests at a given threshold share

double comparison_pvalue_at(const Context& ctx, const std::vector<double>& taints,
                            const Ratio& lambda1) {
  if (lambda1 >= ctx.total_bound) return 0.0;  // null empty: e <= u batchwise
  if (!lambda1.is_negative() && !lambda1.is_zero()) {
    const double t = (lambda1 / ctx.total_bound).to_double();
    return ctx.dir.config.use_kaplan_wald
               ? kw_pvalue(taints, t, ctx.dir.config.kaplan_wald_gamma)
               : km_pvalue(taints, t);
  }
  return 1.0;  // nonpositive share: the null holds even for a clean report
}

double polling_pvalue_at(const Context& ctx, const PollingSample& sample,
                         const CandidatePair& pair, const Ratio& lambda2) {
  const long long c =
      polling_null_threshold(ctx.margins, ctx.ids.polling, pair, lambda2);
  return polling_pvalue(sample, ctx.margins.ballots_in(ctx.ids.polling), c,
                        ctx.dir.config.polling_method, ctx.dir.config.search_depth)
      .p_value;
}

// ---------------------------------------------------------------------------
// Assessment

struct Assessment {
  long long round = 0;
  AuditState state;
  std::vector<AssessmentLine> lines;
  std::string decision;
};

Assessment compute_assessment(const Context& ctx, long long round, int grid) {
  Assessment out;
  out.round = round;
  out.state = replay_state(ctx);

  const std::vector<double> taints = comparison_taints(ctx, round);
  const Ratio lam1 = out.state.lambda.at(ctx.ids.comparison);
  const Ratio lam2 = out.state.lambda.at(ctx.ids.polling);
  const double alpha = ctx.dir.config.allocation.alpha;
  const double alpha1 = ctx.dir.config.allocation.alpha1;
  const double alpha2 = ctx.dir.config.allocation.alpha2;

  out.lines.push_back({"round", std::to_string(round)});
  out.lines.push_back(
      {"draws." + ctx.ids.comparison, std::to_string(taints.size())});

  bool comparison_rejects = true;
  bool polling_rejects = true;
  bool fisher_stops = true;
  long long polling_size = 0;

  for (const CandidatePair& pair : ctx.margins.pairs()) {
    const std::string tag = pair_tag(pair);
    const PollingSample sample = polling_sample(ctx, round, pair);
    polling_size = sample.size;

    const double p1 = comparison_pvalue_at(ctx, taints, lam1);
    const double p2 = polling_pvalue_at(ctx, sample, pair, lam2);
    comparison_rejects = comparison_rejects && p1 <= alpha1;
    polling_rejects = polling_rejects && p2 <= alpha2;
    out.lines.push_back({"p.comparison:" + tag, format_double(p1)});
    out.lines.push_back({"p.polling:" + tag, format_double(p2)});

    HybridEvidence ev;
    ev.taints = taints;
    ev.total_bound = ctx.total_bound.to_double();
    ev.use_kaplan_wald = ctx.dir.config.use_kaplan_wald;
    ev.kw_gamma = ctx.dir.config.kaplan_wald_gamma;
    ev.sample = sample;
    ev.method = ctx.dir.config.polling_method;
    ev.depth = ctx.dir.config.search_depth;
    const LambdaScan scan = combined_audit_pvalue(
        ev, ctx.margins, pair, ctx.ids.comparison, ctx.ids.polling);
    fisher_stops = fisher_stops && scan.p_max <= alpha;
    out.lines.push_back({"p.combined:" + tag, format_double(scan.p_max)});
    out.lines.push_back(
        {"lambda.argmax:" + tag, format_double(scan.argmax_lambda1)});

    // Fisher curve over the requested lambda grid, for plots and logs.
    const LambdaInterval iv =
        feasible_lambda_interval(ctx.margins, ctx.ids.comparison, ctx.ids.polling);
    if (!iv.empty && grid >= 2) {
      for (int i = 0; i < grid; ++i) {
        const Ratio lam = iv.lo + (iv.hi - iv.lo) * Ratio(i, grid - 1);
        const double p1g = comparison_pvalue_at(ctx, taints, lam);
        const double p2g = polling_pvalue_at(ctx, sample, pair, Ratio(1) - lam);
        const double pf = fisher_combine(p1g, p2g).p_value;
        out.lines.push_back({"p.fisher:" + tag + "@" + format_double(lam.to_double()),
                             format_double(pf)});
      }
    }
  }

  out.lines.push_back(
      {"draws." + ctx.ids.polling, std::to_string(polling_size)});
  out.lines.push_back({"lambda." + ctx.ids.comparison, format_ratio(lam1)});
  out.lines.push_back({"lambda." + ctx.ids.polling, format_ratio(lam2)});
  out.lines.push_back(
      {"stratum." + ctx.ids.comparison + ".rejects", comparison_rejects ? "yes" : "no"});
  out.lines.push_back(
      {"stratum." + ctx.ids.polling + ".rejects", polling_rejects ? "yes" : "no"});

  bool pending_count = false;
  bool any_counted = false;
  for (const auto& [id, st] : out.state.status) {
    const bool counted = out.state.hand_count.at(id).has_value();
    any_counted = any_counted || counted;
    if (st == StratumStatus::full_hand_count && !counted) pending_count = true;
  }

  if (out.state.closed) {
    out.decision = out.state.outcome_confirmed ? "confirmed" : "not-confirmed";
  } else if (pending_count) {
    out.decision = "full-count-required";
  } else if (!any_counted &&
             out.state.status.at(ctx.ids.comparison) == StratumStatus::sampling &&
             out.state.status.at(ctx.ids.polling) == StratumStatus::sampling) {
    // Both strata still sampling: the combined test over all admissible
    // overstatement splits decides at the overall risk limit.
    out.decision = fisher_stops ? "stop" : "continue";
  } else {
    // Asymmetric state (a stratum confirmed or hand counted): each stratum
    // still sampling must reject on its own at its current threshold.
    bool stop = true;
    for (const auto& [id, st] : out.state.status)
      if (st == StratumStatus::sampling)
        stop = stop && (id == ctx.ids.comparison ? comparison_rejects
                                                 : polling_rejects);
    out.decision = stop ? "stop" : "continue";
  }
  out.lines.push_back({"decision", out.decision});
  return out;
}

void print_assessment(const Assessment& a) {
  for (const AssessmentLine& l : a.lines) {
    if (l.metric.rfind("p.fisher:", 0) == 0) continue;  // grid: file only
    std::cout << "  " << l.metric << " = " << l.value << "\n";
  }
}

// ---------------------------------------------------------------------------
// Planning

// Draws still needed for the running comparison test to reach alpha1 if
// every one of them comes back clean. Uses the running product, not the
// reported minimum: only future factors can move the product.
long long comparison_draws_needed(const Context& ctx,
                                  const std::vector<double>& taints, double t,
                                  double alpha1, bool* unreachable) {
  *unreachable = false;
  const double gamma = ctx.dir.config.kaplan_wald_gamma;
  const bool kw = ctx.dir.config.use_kaplan_wald;
  double log_running = 0.0;
  double best = 0.0;
  for (double taint : taints) {
    if (!kw && taint >= 1.0) {
      *unreachable = true;
      return 0;
    }
    log_running += kw ? -std::log(gamma * (1.0 - taint) / (1.0 - t) + 1.0 - gamma)
                      : std::log1p(-t) - std::log1p(-taint);
    best = std::min(best, log_running);
  }
  if (best <= std::log(alpha1)) return 0;
  const double step = kw ? -std::log(gamma / (1.0 - t) + 1.0 - gamma)
                         : std::log1p(-t);
  if (step >= 0.0) {
    *unreachable = true;  // threshold too small to ever gain evidence
    return 0;
  }
  const double need = (std::log(alpha1) - log_running) / step;
  return need <= 0.0 ? 0 : static_cast<long long>(std::ceil(need));
}

Schedule planning_schedule(long long drawn, long long population) {
  const long long lo = std::max<long long>(10, drawn + 1);
  const long long hi = std::min(population, std::max<long long>(20000, 4 * lo));
  if (hi <= lo) return Schedule{{std::min(lo, population)}};
  return Schedule::geometric(static_cast<double>(lo), static_cast<double>(hi), 40);
}

struct PollingPlan {
  long long next = 0;
  bool full_count = false;  // q90 beyond the simulated horizon
};

// 90th-percentile cumulative stopping size under the reported tallies,
// Monte Carlo over the combined rule (or the single-stratum rule once the
// comparison stratum is out of the picture), less what is already drawn.
PollingPlan polling_draws_needed(const Context& ctx, const AuditState& state,
                                 long long drawn, long long comparison_total,
                                 long long trials, long long round) {
  PollingPlan plan;
  const std::string& s2 = ctx.ids.polling;
  const long long population = ctx.margins.ballots_in(s2);
  const Schedule sched = planning_schedule(drawn, population);

  PollingTruth truth;
  truth.winner = ctx.dir.contest.reported(s2, ctx.pair.first);
  truth.loser = ctx.dir.contest.reported(s2, ctx.pair.second);
  truth.other = population - truth.winner - truth.loser;

  WorkloadSummary sim;
  const bool comparison_counted =
      state.hand_count.at(ctx.ids.comparison).has_value();
  const std::string seed =
      ctx.dir.config.seed + ":plan-" + std::to_string(round);
  if (comparison_counted ||
      state.status.at(ctx.ids.comparison) != StratumStatus::sampling) {
    PollingScenario sc;
    sc.truth = truth;
    sc.margin_threshold = polling_null_threshold(ctx.margins, s2, ctx.pair,
                                                 state.lambda.at(s2));
    sc.alpha = ctx.dir.config.allocation.alpha2;
    sc.schedule = sched;
    sc.trials = trials;
    sc.seed = seed;
    sim = simulate_polling_workload(sc);
  } else {
    HybridScenario sc;
    sc.rule.alpha = ctx.dir.config.allocation.alpha;
    sc.rule.overall_margin = ctx.margins.overall(ctx.pair);
    sc.rule.stratum1_margin = ctx.margins.in_stratum(ctx.ids.comparison, ctx.pair);
    sc.rule.stratum2_margin = ctx.margins.in_stratum(s2, ctx.pair);
    sc.rule.stratum1_ballots = ctx.margins.ballots_in(ctx.ids.comparison);
    sc.rule.stratum2_ballots = population;
    sc.rule.comparison_draws = comparison_total;
    sc.rule.comparison_bound = ctx.total_bound.to_double();
    sc.truth = truth;
    sc.schedule = sched;
    sc.trials = trials;
    sc.seed = seed;
    sim = simulate_hybrid_workload(sc);
  }

  if (sim.q90 < 0) {
    plan.full_count = true;
    plan.next = population - drawn;
  } else {
    plan.next = std::max<long long>(0, sim.q90 - drawn);
  }
  return plan;
}

}  // namespace

// ---------------------------------------------------------------------------
// Commands

int cmd_init(const std::string& config_path) {
  const Context ctx = load(config_path);

  write_file(ctx.dir.out_path("margins.csv"), emit_margins(ctx.margins));

  std::cout << "audit initialized at " << ctx.dir.root.string() << "\n";
  std::cout << "  contest: " << ctx.dir.contest.candidates.size() << " candidates, "
            << ctx.margins.ballots() << " ballots\n";
  for (const auto& [id, sc] : ctx.dir.config.strata)
    std::cout << "  stratum " << id << ": "
              << (sc.kind == StratumKind::comparison ? "comparison" : "polling")
              << ", " << ctx.margins.ballots_in(id) << " ballots\n";
  std::cout << "  tightest pair: " << ctx.pair.first << " over " << ctx.pair.second
            << " by " << ctx.margins.min_margin() << " votes (diluted "
            << format_double(ctx.margins.diluted_min().to_double()) << ")\n";
  std::cout << "  comparison bound U = " << format_double(ctx.total_bound.to_double())
            << " (" << format_ratio(ctx.total_bound) << ")\n";
  std::cout << "  margins table: " << ctx.dir.out_path("margins.csv").string() << "\n";
  return 0;
}

int cmd_plan(const std::string& config_path, long long round, long long trials) {
  const Context ctx = load(config_path);
  const long long r = round > 0 ? round : ctx.dir.recorded_rounds() + 1;
  const long long mc_trials = trials > 0 ? trials : 1000;
  const AuditState state = replay_state(ctx);
  if (state.closed)
    throw AuditStateError("audit is closed; nothing to plan");

  const long long evidence_round = std::min(r - 1, ctx.dir.recorded_rounds());
  const std::vector<double> taints = comparison_taints(ctx, evidence_round);
  const long long drawn1 =
      static_cast<long long>(ctx.dir.plans_through(r - 1, ctx.ids.comparison).size());
  const long long drawn2 =
      static_cast<long long>(ctx.dir.plans_through(r - 1, ctx.ids.polling).size());

  std::vector<std::pair<std::string, long long>> sizes;
  std::cout << "plan for round " << r << "\n";

  long long comparison_next = 0;
  const Ratio lam1 = state.lambda.at(ctx.ids.comparison);
  if (state.status.at(ctx.ids.comparison) != StratumStatus::sampling) {
    std::cout << "  " << ctx.ids.comparison << ": not sampling; 0 draws\n";
  } else if (!lam1.is_negative() && !lam1.is_zero() && lam1 < ctx.total_bound) {
    const double t = (lam1 / ctx.total_bound).to_double();
    bool unreachable = false;
    comparison_next =
        comparison_draws_needed(ctx, taints, t,
                                ctx.dir.config.allocation.alpha1, &unreachable);
    if (unreachable) {
      std::cout << "  " << ctx.ids.comparison
                << ": sampling cannot reach the risk limit from here; "
                   "consider a full hand count\n";
    } else {
      std::cout << "  " << ctx.ids.comparison << ": " << comparison_next
                << " more draws reach alpha1 if clean (threshold t = "
                << format_double(t) << ")\n";
    }
  } else {
    std::cout << "  " << ctx.ids.comparison
              << ": threshold share " << format_ratio(lam1)
              << " is outside (0, U); sampling cannot decide it\n";
  }
  sizes.emplace_back(ctx.ids.comparison, comparison_next);

  long long polling_next = 0;
  if (state.status.at(ctx.ids.polling) != StratumStatus::sampling) {
    std::cout << "  " << ctx.ids.polling << ": not sampling; 0 draws\n";
  } else {
    const PollingPlan pp = polling_draws_needed(ctx, state, drawn2,
                                                drawn1 + comparison_next,
                                                mc_trials, r);
    polling_next = pp.next;
    if (pp.full_count) {
      std::cout << "  " << ctx.ids.polling
                << ": simulated audits rarely stop within the planning "
                   "horizon; suggesting the full remaining "
                << pp.next << " ballots\n";
    } else {
      std::cout << "  " << ctx.ids.polling << ": " << pp.next
                << " more ballots reach the 90th percentile of " << mc_trials
                << " simulated audits\n";
    }
  }
  sizes.emplace_back(ctx.ids.polling, polling_next);

  std::sort(sizes.begin(), sizes.end());
  const fs::path out =
      ctx.dir.out_path("parameters-round-" + std::to_string(r) + ".csv");
  write_file(out, emit_parameters(sizes));
  std::cout << "  parameter file: " << out.string() << "\n";
  return 0;
}

int cmd_draw(const std::string& config_path, long long round,
             const std::string& seed_override, bool paranoid) {
  if (!seed_override.empty()) {
    // The seed becomes part of the audit record the moment anything is
    // drawn from it; afterwards it can only be changed by hand, on purpose.
    AuditDir dir = AuditDir::open(config_path);
    if (dir.any_plans())
      throw AuditStateError(
          "seed override refused: plans already exist under the configured seed");
    dir.config.seed = seed_override;
    write_file(dir.config_path, emit_config(dir.config));
    std::cout << "seed set to \"" << seed_override << "\"\n";
  }

  const Context ctx = load(config_path);
  const long long r = round > 0 ? round : ctx.dir.recorded_rounds() + 1;

  const fs::path params_path =
      ctx.dir.out_path("parameters-round-" + std::to_string(r) + ".csv");
  if (!fs::exists(params_path))
    throw std::invalid_argument("no parameter file for round " + std::to_string(r) +
                                "; run plan first (" + params_path.string() + ")");
  std::map<std::string, long long> sizes;
  for (const auto& [stratum, n] :
       parse_parameters(read_file(params_path), params_path.string())) {
    if (!ctx.dir.config.strata.count(stratum))
      throw std::invalid_argument("parameter file names unknown stratum '" +
                                  stratum + "'");
    sizes[stratum] = n;
  }

  for (const auto& [id, sc] : ctx.dir.config.strata) {
    const auto it = sizes.find(id);
    const long long n = it == sizes.end() ? 0 : it->second;
    if (n <= 0) {
      std::cout << "  " << id << ": no draws this round\n";
      continue;
    }
    const fs::path plan_p = ctx.dir.plan_path(r, id);
    if (fs::exists(plan_p))
      throw AuditStateError("plan for round " + std::to_string(r) + " stratum '" +
                            id + "' already exists at " + plan_p.string());

    const std::vector<Draw> prior = ctx.dir.plans_through(r - 1, id);
    const long long total = static_cast<long long>(prior.size()) + n;
    std::vector<Draw> full;
    if (sc.kind == StratumKind::comparison) {
      std::vector<std::pair<std::string, Ratio>> weights;
      for (const Batch& b : ctx.dir.manifests.at(id).batches) {
        const Ratio& u = ctx.bounds.at(b.id).bound;
        if (!u.is_zero()) weights.emplace_back(b.id, u);
      }
      full = draw_ppeb_transcript(stream_seed(ctx, id), weights, total);
    } else {
      full = draw_srs_transcript(stream_seed(ctx, id),
                                 ctx.margins.ballots_in(id), total);
    }

    if (paranoid) {
      // The draw stream must re-derive byte-identically: earlier rounds'
      // plan files are a prefix of today's transcript.
      for (long long pr = 0; pr < static_cast<long long>(prior.size()); ++pr) {
        if (full[pr].index != prior[pr].index ||
            full[pr].digest_hex != prior[pr].digest_hex ||
            full[pr].selected != prior[pr].selected)
          throw AuditStateError(
              "paranoid check failed: draw " + std::to_string(pr + 1) +
              " of stratum '" + id +
              "' does not reproduce the recorded plan; the seed or the "
              "manifest changed after drawing");
      }
    }

    const std::vector<Draw> fresh(full.begin() + prior.size(), full.end());
    const std::string text = emit_plan(fresh);
    if (paranoid) {
      const std::vector<Draw> back = parse_plan(text, plan_p.string());
      if (back.size() != fresh.size())
        throw AuditStateError("paranoid check failed: plan round-trip changed size");
    }
    write_file(plan_p, text);
    std::cout << "  " << id << ": " << n << " draws -> " << plan_p.string() << "\n";
  }
  return 0;
}

int cmd_record(const std::string& config_path, long long round) {
  const Context ctx = load(config_path);
  const long long r = round > 0 ? round : ctx.dir.recorded_rounds() + 1;
  if (r <= ctx.dir.recorded_rounds())
    throw AuditStateError("round " + std::to_string(r) + " is already recorded");

  const std::set<std::string> known(ctx.dir.contest.candidates.begin(),
                                    ctx.dir.contest.candidates.end());
  std::vector<AuditEvent> add;

  for (const auto& [id, sc] : ctx.dir.config.strata) {
    const fs::path plan_p = ctx.dir.plan_path(r, id);
    const fs::path round_p = ctx.dir.round_path(r, id);
    if (!fs::exists(plan_p)) {
      if (fs::exists(round_p))
        throw std::invalid_argument(round_p.string() +
                                    " has audit data but round " +
                                    std::to_string(r) + " was never drawn there");
      continue;
    }
    if (!fs::exists(round_p))
      throw std::invalid_argument("missing audit data for round " +
                                  std::to_string(r) + " stratum '" + id + "' (" +
                                  round_p.string() + ")");
    const std::vector<Draw> plan = parse_plan(read_file(plan_p), plan_p.string());

    if (sc.kind == StratumKind::comparison) {
      const ComparisonRound rec =
          parse_comparison_round(read_file(round_p), round_p.string());
      std::set<std::string> drawn;
      for (const Draw& d : plan) drawn.insert(d.selected);
      for (const auto& [batch_id, votes] : rec.audited) {
        if (!drawn.count(batch_id))
          throw std::invalid_argument("audited batch '" + batch_id +
                                      "' is not in the round " +
                                      std::to_string(r) + " plan");
        const auto batch_it = ctx.batches.find(batch_id);
        if (batch_it == ctx.batches.end())
          throw std::invalid_argument("audited batch '" + batch_id +
                                      "' is not in the manifest");
        long long total = 0;
        for (const auto& [cand, v] : votes) {
          if (!known.count(cand))
            throw std::invalid_argument("audited counts for unknown candidate '" +
                                        cand + "' in batch '" + batch_id + "'");
          total += v;
        }
        if (total > batch_it->second.ballots)
          throw std::invalid_argument(
              "audited votes in batch '" + batch_id + "' total " +
              std::to_string(total) + ", more than its " +
              std::to_string(batch_it->second.ballots) + " ballots");
      }
      for (const std::string& batch_id : drawn)
        if (!rec.audited.count(batch_id))
          throw std::invalid_argument("drawn batch '" + batch_id +
                                      "' has no audited counts in " +
                                      round_p.string());
    } else {
      const PollingRound rec =
          parse_polling_round(read_file(round_p), round_p.string());
      std::set<long long> planned;
      for (const Draw& d : plan)
        planned.insert(parse_integer(d.selected, plan_p.string(), 0));
      std::set<long long> marked;
      for (const BallotMark& m : rec.marks) {
        if (!planned.count(m.position))
          throw std::invalid_argument("mark for position " +
                                      std::to_string(m.position) +
                                      " which round " + std::to_string(r) +
                                      " never drew");
        if (!m.candidate.empty() && !known.count(m.candidate))
          throw std::invalid_argument("mark for unknown candidate '" +
                                      m.candidate + "'");
        marked.insert(m.position);
      }
      for (long long pos : planned)
        if (!marked.count(pos))
          throw std::invalid_argument("drawn position " + std::to_string(pos) +
                                      " has no mark in " + round_p.string());
    }

    AuditEvent e;
    e.kind = AuditEvent::Kind::round_recorded;
    e.stratum = id;
    e.round = r;
    add.push_back(e);
  }

  if (add.empty())
    throw std::invalid_argument("no plans exist for round " + std::to_string(r) +
                                "; run draw first");

  // Dry-run the state machine before touching the log.
  AuditState st = replay_state(ctx);
  for (const AuditEvent& e : add) st = audit_state_step(st, e);

  append_events(ctx.dir, add);
  std::cout << "round " << r << " recorded (" << add.size() << " strata)\n";
  return 0;
}

int cmd_assess(const std::string& config_path, long long round, int grid) {
  const Context ctx = load(config_path);
  const long long r = round > 0 ? round : ctx.dir.recorded_rounds();
  const int g = grid > 0 ? grid : ctx.dir.config.grid_points;
  if (g < 2) throw std::invalid_argument("grid must be at least 2");

  const Assessment a = compute_assessment(ctx, r, g);
  const fs::path out =
      ctx.dir.out_path("assessment-round-" + std::to_string(r) + ".csv");
  write_file(out, emit_assessment(a.lines));

  std::cout << "assessment after round " << r << "\n";
  print_assessment(a);
  std::cout << "  file: " << out.string() << "\n";
  return 0;
}

int cmd_escalate_reject(const std::string& config_path, const std::string& stratum) {
  const Context ctx = load(config_path);
  AuditEvent e;
  e.kind = AuditEvent::Kind::stratum_rejected;
  e.stratum = stratum;
  AuditState st = audit_state_step(replay_state(ctx), e);
  append_events(ctx.dir, {e});
  std::cout << st.log.back() << "\n";
  if (st.closed)
    std::cout << "audit closed: "
              << (st.outcome_confirmed ? "outcome confirmed" : "outcome not confirmed")
              << "\n";
  return 0;
}

int cmd_escalate_full_count(const std::string& config_path,
                            const std::string& stratum, long long actual_margin) {
  const Context ctx = load(config_path);
  AuditEvent e;
  e.kind = AuditEvent::Kind::full_count_recorded;
  e.stratum = stratum;
  e.actual_margin = actual_margin;
  const size_t before = replay_state(ctx).log.size();
  AuditState st = audit_state_step(replay_state(ctx), e);
  append_events(ctx.dir, {e});
  for (size_t i = before; i < st.log.size(); ++i) std::cout << st.log[i] << "\n";
  return 0;
}

int cmd_simulate(const std::string& config_path, long long trials) {
  const Context ctx = load(config_path);
  const long long mc_trials = trials > 0 ? trials : 10000;
  const AuditState state = replay_state(ctx);

  const Ratio lam1 = state.lambda.at(ctx.ids.comparison);
  double t = 0.0;
  long long clean1 = -1;
  if (!lam1.is_negative() && !lam1.is_zero() && lam1 < ctx.total_bound) {
    t = (lam1 / ctx.total_bound).to_double();
    clean1 = clean_sample_size(t, ctx.dir.config.allocation.alpha1);
  }

  const long long population = ctx.margins.ballots_in(ctx.ids.polling);
  PollingTruth truth;
  truth.winner = ctx.dir.contest.reported(ctx.ids.polling, ctx.pair.first);
  truth.loser = ctx.dir.contest.reported(ctx.ids.polling, ctx.pair.second);
  truth.other = population - truth.winner - truth.loser;

  HybridScenario sc;
  sc.rule.alpha = ctx.dir.config.allocation.alpha;
  sc.rule.overall_margin = ctx.margins.overall(ctx.pair);
  sc.rule.stratum1_margin = ctx.margins.in_stratum(ctx.ids.comparison, ctx.pair);
  sc.rule.stratum2_margin = ctx.margins.in_stratum(ctx.ids.polling, ctx.pair);
  sc.rule.stratum1_ballots = ctx.margins.ballots_in(ctx.ids.comparison);
  sc.rule.stratum2_ballots = population;
  sc.rule.comparison_draws = clean1 > 0 ? clean1 : 0;
  sc.rule.comparison_bound = ctx.total_bound.to_double();
  sc.truth = truth;
  sc.schedule = planning_schedule(0, population);
  sc.trials = mc_trials;
  sc.seed = ctx.dir.config.seed + ":simulate";
  const WorkloadSummary sim = simulate_hybrid_workload(sc);

  std::vector<ScenarioRow> rows;
  ScenarioRow comparison{ctx.ids.comparison, {}, "clean-audit stopping size"};
  comparison.metrics.emplace_back("clean_size", static_cast<double>(clean1));
  comparison.metrics.emplace_back("threshold", t);
  comparison.metrics.emplace_back("bound", ctx.total_bound.to_double());
  rows.push_back(comparison);

  ScenarioRow polling{ctx.ids.polling, {},
                      "combined-rule workload under reported tallies"};
  polling.metrics.emplace_back("trials", static_cast<double>(sim.trials));
  polling.metrics.emplace_back("mean", sim.mean);
  polling.metrics.emplace_back("q50", static_cast<double>(sim.q50));
  polling.metrics.emplace_back("q90", static_cast<double>(sim.q90));
  polling.metrics.emplace_back("q99", static_cast<double>(sim.q99));
  polling.metrics.emplace_back("stop_rate", sim.stop_rate);
  rows.push_back(polling);

  const ReportDocument doc = scenario_report(rows);
  write_file(ctx.dir.out_path("simulation.csv"), doc.csv);
  std::cout << doc.text;
  std::cout << "  file: " << ctx.dir.out_path("simulation.csv").string() << "\n";
  return 0;
}

int cmd_report(const std::string& config_path) {
  const Context ctx = load(config_path);
  const long long r = ctx.dir.recorded_rounds();
  const AuditState state = replay_state(ctx);
  const Assessment a = compute_assessment(ctx, r, 2);

  std::vector<ScenarioRow> rows;
  ScenarioRow contest{"contest", {}, ""};
  contest.metrics.emplace_back("ballots", static_cast<double>(ctx.margins.ballots()));
  contest.metrics.emplace_back("margin", static_cast<double>(ctx.margins.min_margin()));
  contest.metrics.emplace_back("diluted", ctx.margins.diluted_min().to_double());
  contest.metrics.emplace_back("rounds", static_cast<double>(r));
  rows.push_back(contest);

  for (const auto& [id, sc] : ctx.dir.config.strata) {
    const char* status = "sampling";
    if (state.status.at(id) == StratumStatus::confirmed) status = "confirmed";
    if (state.status.at(id) == StratumStatus::full_hand_count)
      status = state.hand_count.at(id).has_value() ? "hand-counted"
                                                   : "hand-count-pending";
    ScenarioRow row{"stratum." + id, {}, status};
    row.metrics.emplace_back("ballots",
                             static_cast<double>(ctx.margins.ballots_in(id)));
    row.metrics.emplace_back(
        "draws", static_cast<double>(ctx.dir.plans_through(r, id).size()));
    row.metrics.emplace_back("lambda", state.lambda.at(id).to_double());
    rows.push_back(row);
  }

  for (const CandidatePair& pair : ctx.margins.pairs()) {
    ScenarioRow row{"pair." + pair_tag(pair), {}, "decision: " + a.decision};
    for (const AssessmentLine& l : a.lines) {
      const std::string tag = ":" + pair_tag(pair);
      if (l.metric == "p.comparison" + tag)
        row.metrics.emplace_back("p1", std::stod(l.value));
      if (l.metric == "p.polling" + tag)
        row.metrics.emplace_back("p2", std::stod(l.value));
      if (l.metric == "p.combined" + tag)
        row.metrics.emplace_back("p", std::stod(l.value));
    }
    rows.push_back(row);
  }

  const ReportDocument doc = scenario_report(rows);
  write_file(ctx.dir.out_path("report.csv"), doc.csv);
  std::cout << doc.text;
  if (!state.log.empty()) {
    std::cout << "decision log:\n";
    for (const std::string& line : state.log) std::cout << "  " << line << "\n";
  }
  std::cout << "  file: " << ctx.dir.out_path("report.csv").string() << "\n";
  return 0;
}

}  // namespace rla::tools
