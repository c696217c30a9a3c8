#include "rlakit/combination.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "rlakit/comparison.hpp"

namespace rla {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument(std::string(what) + " outside [0,1]");
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

RiskAllocation default_allocation(double alpha, const Ratio& lambda1) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("allocation: alpha must lie in (0,1)");
  RiskAllocation a;
  a.alpha = alpha;
  a.alpha1 = 0.8 * alpha;
  // Largest alpha2 keeping (1-alpha1)(1-alpha2) >= 1-alpha.
  a.alpha2 = (alpha - a.alpha1) / (1.0 - a.alpha1);
  a.lambda1 = lambda1;
  a.rule = EscalationRule::adjust_threshold;
  return a;
}

AllocationCheck validate_allocation(const RiskAllocation& alloc) {
  auto in_unit = [](double x) { return x > 0.0 && x < 1.0; };
  if (!in_unit(alloc.alpha)) return {false, "alpha = " + fmt(alloc.alpha) + " outside (0,1)"};
  if (!in_unit(alloc.alpha1)) return {false, "alpha1 = " + fmt(alloc.alpha1) + " outside (0,1)"};
  if (!in_unit(alloc.alpha2)) return {false, "alpha2 = " + fmt(alloc.alpha2) + " outside (0,1)"};
  if (alloc.alpha1 > alloc.alpha)
    return {false, "stratum limit exceeds overall: alpha1 = " + fmt(alloc.alpha1) +
                       " > alpha = " + fmt(alloc.alpha)};
  if (alloc.alpha2 > alloc.alpha)
    return {false, "stratum limit exceeds overall: alpha2 = " + fmt(alloc.alpha2) +
                       " > alpha = " + fmt(alloc.alpha)};
  if (alloc.rule == EscalationRule::adjust_threshold) {
    double lhs = (1.0 - alloc.alpha1) * (1.0 - alloc.alpha2);
    double rhs = 1.0 - alloc.alpha;
    if (lhs < rhs)
      return {false, "risk composition under adjust-threshold: (1-alpha1)(1-alpha2) = " +
                         fmt(lhs) + " < 1-alpha = " + fmt(rhs)};
  }
  return {};
}

Ratio adjust_lambda_after_handcount(long long overall_margin,
                                    long long revealed_overstatement) {
  if (overall_margin <= 0)
    throw std::invalid_argument("threshold adjustment: overall margin must be positive");
  return Ratio(overall_margin - revealed_overstatement, overall_margin);
}

double chi2_4_sf(double x) {
  if (std::isnan(x)) throw std::invalid_argument("chi2_4_sf: NaN statistic");
  if (x <= 0.0) return 1.0;
  if (!std::isfinite(x)) return 0.0;
  return std::exp(-0.5 * x) * (1.0 + 0.5 * x);
}

double chi2_4_critical(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("chi2_4_critical: alpha must lie in (0,1)");
  double lo = 0.0, hi = 1.0;
  while (chi2_4_sf(hi) > alpha) hi *= 2.0;  // bracket; sf is strictly decreasing
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    (chi2_4_sf(mid) > alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

FisherCombination fisher_combine(double p1, double p2) {
  check_probability(p1, "fisher p1");
  check_probability(p2, "fisher p2");
  if (p1 == 0.0 || p2 == 0.0) return {kInf, 0.0, true};
  double chi = -2.0 * (std::log(p1) + std::log(p2));
  if (chi < 0.0) chi = 0.0;  // rounding when both p are exactly 1
  return {chi, chi2_4_sf(chi), false};
}

LambdaInterval feasible_lambda_interval(const MarginTable& margins,
                                        const std::string& stratum1,
                                        const std::string& stratum2) {
  const long long n1 = margins.ballots_in(stratum1);
  const long long n2 = margins.ballots_in(stratum2);
  LambdaInterval iv;
  bool first = true;
  for (const CandidatePair& p : margins.pairs()) {
    const long long v = margins.overall(p);
    Ratio lo(v - margins.in_stratum(stratum2, p) - n2, v);
    Ratio hi(margins.in_stratum(stratum1, p) + n1, v);
    if (first || lo > iv.lo) iv.lo = lo;
    if (first || hi < iv.hi) iv.hi = hi;
    first = false;
  }
  iv.empty = iv.lo > iv.hi;
  return iv;
}

LambdaScan combined_pvalue_over_lambda(const std::function<double(double)>& p1_of_lambda1,
                                       const std::function<double(double)>& p2_of_lambda2,
                                       double lambda_lo, double lambda_hi,
                                       int grid_points,
                                       const std::vector<double>& extra_lambda1) {
  if (grid_points < 2)
    throw std::invalid_argument("lambda scan: grid needs at least 2 points");
  if (!(lambda_lo <= lambda_hi))
    throw std::invalid_argument("lambda scan: empty interval");

  std::set<double> points;
  for (int k = 0; k < grid_points; ++k)
    points.insert(lambda_lo + (lambda_hi - lambda_lo) *
                                  (static_cast<double>(k) / (grid_points - 1)));
  for (double x : extra_lambda1)
    if (x >= lambda_lo && x <= lambda_hi) points.insert(x);

  LambdaScan scan;
  scan.p_max = -1.0;
  for (double lam : points) {
    const double p1 = p1_of_lambda1(lam);
    const double p2 = p2_of_lambda2(1.0 - lam);
    check_probability(p1, "stratum 1 p-value");
    check_probability(p2, "stratum 2 p-value");
    const double p = fisher_combine(p1, p2).p_value;
    ++scan.evaluations;
    if (p > scan.p_max) {
      scan.p_max = p;
      scan.argmax_lambda1 = lam;
    }
  }
  return scan;
}

LambdaScan combined_audit_pvalue(const HybridEvidence& evidence,
                                 const MarginTable& margins,
                                 const CandidatePair& pair,
                                 const std::string& stratum1,
                                 const std::string& stratum2) {
  if (!(evidence.total_bound > 0.0))
    throw std::invalid_argument("combined p-value: total error bound must be positive");
  validate_sample(evidence.sample);

  const long long V = margins.overall(pair);
  const long long V2 = margins.in_stratum(stratum2, pair);
  const long long N2 = margins.ballots_in(stratum2);

  const LambdaInterval iv = feasible_lambda_interval(margins, stratum1, stratum2);
  LambdaScan scan;
  if (iv.empty) return scan;  // counting bounds alone rule out every split
  const double lam_lo = iv.lo.to_double();

  bool falsifies_full_overstatement = false;  // some taint observed below 1
  for (double t : evidence.taints)
    if (t < 1.0) falsifies_full_overstatement = true;

  // -2 ln p1 at a given lambda1; nondecreasing in lambda1.
  const auto g1 = [&](double lam) -> double {
    if (lam <= 0.0) return 0.0;  // the null tolerates any nonnegative overstatement
    const double t = lam / evidence.total_bound;
    if (t >= 1.0) {
      // Null demands at least the a-priori maximum overstatement; a single
      // batch seen below its bound falsifies it outright.
      return falsifies_full_overstatement ? kInf : 0.0;
    }
    const double p = evidence.use_kaplan_wald
                         ? kw_pvalue(evidence.taints, t, evidence.kw_gamma)
                         : km_pvalue(evidence.taints, t);
    return -2.0 * std::log(p);
  };

  std::map<long long, double> g2_memo;
  const auto g2 = [&](long long c) -> double {
    auto it = g2_memo.find(c);
    if (it != g2_memo.end()) return it->second;
    const PollingAssessment a =
        polling_pvalue(evidence.sample, N2, c, evidence.method, evidence.depth);
    const double g = a.p_value <= 0.0 ? kInf : -2.0 * std::log(a.p_value);
    g2_memo.emplace(c, g);
    return g;
  };

  // Left edge of the lambda1 interval mapping to threshold c, clamped to
  // the feasible interval. Within a bucket p2 is constant and p1 peaks at
  // this edge, so evaluating here gives the bucket's exact supremum.
  const auto lam_inf = [&](long long c) {
    return std::max(lam_lo,
                    1.0 - static_cast<double>(V2 - c + 1) / static_cast<double>(V));
  };

  double best = -1.0;
  double best_lam = lam_lo;
  const auto consider = [&](double p, double lam) {
    if (p > best) {
      best = p;
      best_lam = lam;
    }
  };
  const auto value = [&](long long c) {
    const double a = g1(lam_inf(c)), b = g2(c);
    ++scan.evaluations;
    const double p = (a == kInf || b == kInf) ? 0.0 : chi2_4_sf(a + b);
    consider(p, lam_inf(c));
  };

  // Threshold range spanned by the feasible interval, exact in rationals.
  const long long c_min = (Ratio(V2) - (Ratio(1) - iv.lo) * Ratio(V)).ceil();
  const long long c_max = (Ratio(V2) - (Ratio(1) - iv.hi) * Ratio(V)).ceil();

  // c >= N2 buckets: p2 = 1 there, and g1 grows with c, so the smallest
  // such bucket dominates the rest.
  if (c_max >= N2) {
    const long long c = std::max(c_min, N2);
    consider(chi2_4_sf(g1(lam_inf(c))), lam_inf(c));
    ++scan.evaluations;
  }
  // c < -N2 buckets have empty polling nulls: p = 0, nothing to scan.
  const long long scan_lo = std::max(c_min, -N2);
  const long long scan_hi = std::min(c_max, N2 - 1);

  if (scan_lo <= scan_hi) {
    value(scan_lo);
    if (scan_hi != scan_lo) value(scan_hi);
    // Branch and bound over the interior: on [a,b], g1 is smallest at a and
    // g2 smallest at b, so chi2_4_sf(g1(a)+g2(b)) bounds every bucket in
    // the range from above.
    const std::function<void(long long, long long)> explore = [&](long long a, long long b) {
      if (a > b) return;
      const double bound = chi2_4_sf(std::min(g1(lam_inf(a)) + g2(b), kInf));
      if (bound <= best) return;
      const long long mid = a + (b - a) / 2;
      value(mid);
      explore(a, mid - 1);
      explore(mid + 1, b);
    };
    explore(scan_lo + 1, scan_hi - 1);
  }

  scan.p_max = std::max(best, 0.0);
  scan.argmax_lambda1 = best_lam;
  return scan;
}

// ---------------------------------------------------------------------------
// Audit state machine

namespace {

const char* status_name(StratumStatus s) {
  switch (s) {
    case StratumStatus::sampling: return "sampling";
    case StratumStatus::full_hand_count: return "full-hand-count";
    case StratumStatus::confirmed: return "confirmed";
  }
  return "?";
}

}  // namespace

AuditState make_audit_state(const MarginTable& margins, const CandidatePair& pair,
                            const RiskAllocation& alloc, const std::string& stratum1,
                            const std::string& stratum2) {
  const AllocationCheck chk = validate_allocation(alloc);
  if (!chk.ok) throw std::invalid_argument("allocation: " + chk.violation);

  AuditState s;
  s.rule = alloc.rule;
  s.overall_margin = margins.overall(pair);
  s.reported_margin[stratum1] = margins.in_stratum(stratum1, pair);
  s.reported_margin[stratum2] = margins.in_stratum(stratum2, pair);
  s.status[stratum1] = StratumStatus::sampling;
  s.status[stratum2] = StratumStatus::sampling;
  s.lambda[stratum1] = alloc.lambda1;
  s.lambda[stratum2] = alloc.lambda2();
  s.hand_count[stratum1] = std::nullopt;
  s.hand_count[stratum2] = std::nullopt;
  s.log.push_back("audit opened: margin " + std::to_string(s.overall_margin) +
                  ", lambda " + alloc.lambda1.str() + " and " + alloc.lambda2().str() +
                  ", rule " +
                  (alloc.rule == EscalationRule::auto_full_count ? "auto-full-count"
                                                                 : "adjust-threshold"));
  return s;
}

AuditState audit_state_step(const AuditState& state, const AuditEvent& event) {
  AuditState s = state;
  if (s.closed)
    throw AuditStateError("audit already closed; no further events accepted");
  if (!s.status.count(event.stratum))
    throw std::invalid_argument("audit state: unknown stratum " + event.stratum);

  switch (event.kind) {
    case AuditEvent::Kind::round_recorded: {
      if (s.status[event.stratum] != StratumStatus::sampling)
        throw AuditStateError("round recorded in stratum " + event.stratum +
                              " which is " + status_name(s.status[event.stratum]));
      s.log.push_back("round " + std::to_string(event.round) + " recorded in stratum " +
                      event.stratum);
      break;
    }

    case AuditEvent::Kind::stratum_rejected: {
      StratumStatus& st = s.status[event.stratum];
      if (st == StratumStatus::full_hand_count)
        throw AuditStateError("stratum " + event.stratum +
                              " is being hand counted; its sampling test is moot");
      if (st == StratumStatus::confirmed)
        throw AuditStateError("stratum " + event.stratum + " already confirmed");
      st = StratumStatus::confirmed;
      s.log.push_back("stratum " + event.stratum + " rejects its null at lambda " +
                      s.lambda[event.stratum].str());
      bool all = true;
      for (const auto& [id, stat] : s.status)
        if (stat != StratumStatus::confirmed) all = false;
      if (all) {
        s.closed = true;
        s.outcome_confirmed = true;
        s.log.push_back("outcome confirmed: every stratum within its tolerable overstatement");
      }
      break;
    }

    case AuditEvent::Kind::full_count_recorded: {
      if (s.hand_count[event.stratum].has_value())
        throw AuditStateError("stratum " + event.stratum + " already hand counted");
      s.hand_count[event.stratum] = event.actual_margin;
      s.status[event.stratum] = StratumStatus::full_hand_count;
      const long long omega = s.reported_margin[event.stratum] - event.actual_margin;
      s.log.push_back("stratum " + event.stratum + " hand counted: actual margin " +
                      std::to_string(event.actual_margin) + ", overstatement " +
                      std::to_string(omega));

      for (auto& [id, stat] : s.status) {
        if (id == event.stratum || s.hand_count[id].has_value()) continue;
        if (s.rule == EscalationRule::auto_full_count) {
          stat = StratumStatus::full_hand_count;
          s.log.push_back("stratum " + id + " must be fully hand counted (rule)");
        } else {
          const Ratio adjusted = adjust_lambda_after_handcount(s.overall_margin, omega);
          s.lambda[id] = adjusted;
          if (stat == StratumStatus::confirmed) {
            stat = StratumStatus::sampling;
            s.log.push_back("stratum " + id + " reopened: threshold adjusted to " +
                            adjusted.str());
          } else {
            s.log.push_back("stratum " + id + " threshold adjusted to " + adjusted.str());
          }
        }
      }

      bool all_counted = true;
      long long total = 0;
      for (const auto& [id, hc] : s.hand_count) {
        if (!hc.has_value()) all_counted = false;
        else total += *hc;
      }
      if (all_counted) {
        s.closed = true;
        s.outcome_confirmed = total > 0;
        s.log.push_back("full count decides: actual margin " + std::to_string(total) +
                        (s.outcome_confirmed ? ", reported outcome confirmed"
                                             : ", reported outcome not confirmed"));
      }
      break;
    }
  }
  return s;
}

}  // namespace rla
