#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlakit/contest.hpp"
#include "rlakit/polling.hpp"
#include "rlakit/ratio.hpp"

namespace rla {

// What happens when one stratum's test cannot reach its risk limit and the
// stratum is hand counted in full:
//   auto_full_count  - the other stratum must be fully hand counted too;
//                      permits alpha1 = alpha2 = alpha.
//   adjust_threshold - the other stratum is retested against the margin
//                      still unaccounted for after the hand count; requires
//                      (1-alpha1)(1-alpha2) >= 1-alpha.
enum class EscalationRule { auto_full_count, adjust_threshold };

struct RiskAllocation {
  double alpha = 0.05;
  double alpha1 = 0.04;
  double alpha2 = 0.0104;
  Ratio lambda1 = Ratio(1, 2);  // stratum 1 share of the tolerable overstatement
  EscalationRule rule = EscalationRule::adjust_threshold;

  Ratio lambda2() const { return Ratio(1) - lambda1; }
};

// adjust_threshold allocation giving stratum 1 four fifths of the overall
// risk and stratum 2 the largest limit the composition rule then allows.
RiskAllocation default_allocation(double alpha, const Ratio& lambda1);

struct AllocationCheck {
  bool ok = true;
  std::string violation;  // named constraint with both sides, empty when ok
};

AllocationCheck validate_allocation(const RiskAllocation& alloc);

// New tolerable-overstatement share for the remaining stratum once stratum
// h has been hand counted and revealed overstatement omega_h:
// lambda' = (V - omega_h) / V. Rejecting "overstatement >= lambda' V" in
// the other stratum then certifies the outcome outright, because the two
// overstatements would otherwise sum to at least V. lambda' > 1 when the
// hand count found votes the report missed; lambda' <= 0 when the hand
// count alone already covers the whole margin.
Ratio adjust_lambda_after_handcount(long long overall_margin,
                                    long long revealed_overstatement);

// Fisher's combination of two independent stratum p-values. The combined
// statistic is compared against the chi-square distribution with 4 degrees
// of freedom, whose upper tail has the closed form e^(-x/2) (1 + x/2).
struct FisherCombination {
  double chi_square = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // a zero input forced chi to +infinity
};

FisherCombination fisher_combine(double p1, double p2);

double chi2_4_sf(double x);
// Inverse of chi2_4_sf: the statistic with upper tail exactly alpha.
double chi2_4_critical(double alpha);

// lambda1 values outside this interval put more overstatement in a stratum
// than its ballots could hold; the corresponding nulls are empty and need
// no testing. Bounds come from omega_s in [V_s - N_s, V_s + N_s].
struct LambdaInterval {
  Ratio lo;
  Ratio hi;
  bool empty = false;
};

LambdaInterval feasible_lambda_interval(const MarginTable& margins,
                                        const std::string& stratum1,
                                        const std::string& stratum2);

struct LambdaScan {
  double p_max = 0.0;
  double argmax_lambda1 = 0.0;
  long long evaluations = 0;
};

// Maximum of the Fisher combination over an explicit lambda1 grid, for
// caller-supplied p-value curves. grid_points uniform points over
// [lambda_lo, lambda_hi] (endpoints included) plus any extra points, which
// callers use for the discontinuity set of step-function curves.
LambdaScan combined_pvalue_over_lambda(const std::function<double(double)>& p1_of_lambda1,
                                       const std::function<double(double)>& p2_of_lambda2,
                                       double lambda_lo, double lambda_hi,
                                       int grid_points,
                                       const std::vector<double>& extra_lambda1 = {});

// Evidence gathered so far in a two-stratum hybrid audit: comparison taints
// in draw order against total bound U, and the cumulative polling tally.
struct HybridEvidence {
  std::vector<double> taints;
  double total_bound = 0.0;  // U, margin-fraction units
  bool use_kaplan_wald = false;
  double kw_gamma = 0.95;

  PollingSample sample;
  PollingMethod method = PollingMethod::tri_hypergeometric;
  SearchDepth depth = SearchDepth::standard;
};

// Exact supremum of the Fisher combination over the feasible lambda1
// interval. The polling p-value is a step function of lambda1 through the
// integer threshold c = ceil(V_2 - (1-lambda1) V), and the comparison
// p-value decreases in lambda1, so the supremum over each step sits at the
// step's left edge; those edges are scanned exactly, with branch-and-bound
// pruning over c ranges. Subsumes any uniform lambda grid.
LambdaScan combined_audit_pvalue(const HybridEvidence& evidence,
                                 const MarginTable& margins,
                                 const CandidatePair& pair,
                                 const std::string& stratum1,
                                 const std::string& stratum2);

// ---------------------------------------------------------------------------
// Audit state machine

enum class StratumStatus { sampling, full_hand_count, confirmed };

class AuditStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AuditEvent {
  enum class Kind {
    stratum_rejected,     // the stratum test reached its risk limit
    full_count_recorded,  // stratum hand counted; actual_margin is the tally
    round_recorded,       // bookkeeping: a sampling round landed
  };
  Kind kind = Kind::round_recorded;
  std::string stratum;
  long long actual_margin = 0;
  long long round = 0;
};

// Value-semantics audit state: every step returns a new state with the
// decision log extended. Out-of-order events (rejecting a hand-counted
// stratum, double-counting, stepping a closed audit) raise AuditStateError.
struct AuditState {
  EscalationRule rule = EscalationRule::adjust_threshold;
  long long overall_margin = 0;  // V for the audited pair
  std::map<std::string, long long> reported_margin;      // stratum -> V_s
  std::map<std::string, StratumStatus> status;
  std::map<std::string, Ratio> lambda;                   // current thresholds
  std::map<std::string, std::optional<long long>> hand_count;  // actual margins
  std::vector<std::string> log;
  bool closed = false;
  bool outcome_confirmed = false;
};

AuditState make_audit_state(const MarginTable& margins, const CandidatePair& pair,
                            const RiskAllocation& alloc, const std::string& stratum1,
                            const std::string& stratum2);

AuditState audit_state_step(const AuditState& state, const AuditEvent& event);

}  // namespace rla
