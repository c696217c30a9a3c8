#pragma once

#include <string>

#include "rlakit/contest.hpp"
#include "rlakit/ratio.hpp"

namespace rla {

// Tallied simple random sample from a polling stratum: wins for the pair's
// winner, losses for its loser, everything else (other candidates,
// undervotes, ballots without the contest) in others.
struct PollingSample {
  long long size = 0;
  long long wins = 0;
  long long losses = 0;
  long long others = 0;

  long long margin() const { return wins - losses; }         // D
  long long pair_sample() const { return wins + losses; }    // m
};

void validate_sample(const PollingSample& sample);

// P(B_w - B_l >= margin_min) when a simple random sample of `sample` ballots
// is drawn without replacement from a population of `population` ballots of
// which winner_pop vote for w, loser_pop for l, and the rest for neither.
// Sums the trivariate hypergeometric over the tail, decomposed by
// m = B_w + B_l and truncated once the remaining terms are provably below
// 1e-18 of the running sum; effectively exact at double precision and fast
// for populations in the millions.
double tri_hyper_tail(long long winner_pop, long long loser_pop,
                      long long population, long long sample,
                      long long margin_min);

// P(X >= winner_min) for X hypergeometric: pair_sample draws without
// replacement from winner_pop + loser_pop ballots. The conditional test
// applies this given m = B_w + B_l, with winner_min = ceil((m + D)/2).
double cond_hyper_tail(long long winner_pop, long long loser_pop,
                       long long pair_sample, long long winner_min);

enum class PollingMethod { tri_hypergeometric, conditional_hypergeometric };

// standard evaluates both endpoints of the null boundary plus a 100-point
// interior grid; exhaustive scans every integer configuration. They agree
// in practice (and provably coincide whenever the boundary has at most 102
// configurations); exhaustive exists because the endpoint dominance is an
// empirical observation, not a theorem.
enum class SearchDepth { standard, exhaustive };

enum class NullShape {
  bounded,        // ordinary composite null, p maximized over its boundary
  empty,          // threshold below -N: no population satisfies the null
  unfalsifiable,  // threshold >= N: every population satisfies the null
};

struct PollingAssessment {
  double p_value = 1.0;
  // Boundary configuration attaining the maximum (votes for the winner);
  // -1 when the null is empty or unfalsifiable.
  long long worst_winner_pop = -1;
  NullShape shape = NullShape::bounded;
};

// p-value for H0: A_w - A_l <= margin_threshold in a stratum of
// `population` ballots, maximized over the null boundary
// A_w - A_l = margin_threshold with A_w in [max(0,c), floor((N+c)/2)].
// The maximizing configuration is reported for the audit record.
PollingAssessment polling_pvalue(const PollingSample& sample, long long population,
                                 long long margin_threshold,
                                 PollingMethod method = PollingMethod::tri_hypergeometric,
                                 SearchDepth depth = SearchDepth::standard);

// Integer threshold c for the stratum null "stratum overstatement >=
// lambda * V": c = ceil(V_s - lambda * V), rounded up so the tested null
// contains the exact one.
long long polling_null_threshold(long long stratum_margin, long long overall_margin,
                                 const Ratio& lambda);
long long polling_null_threshold(const MarginTable& margins, const std::string& stratum,
                                 const CandidatePair& pair, const Ratio& lambda);

}  // namespace rla
