#include "rlakit/polling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace rla {

namespace {

// Relative truncation level for the tail scans. Remaining terms are bounded
// by a geometric series (hypergeometric pmfs are log-concave, so the step
// ratios only shrink moving away from the mode) and dropped once provably
// below this fraction of the accumulated sum.
constexpr double kTailEps = 1e-18;
// Absolute floor so all-underflow regions terminate.
constexpr double kTailFloor = 1e-320;

double lchoose(long long n, long long k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

long long ceil_div2(long long x) { return x / 2 + (x % 2 > 0 ? 1 : 0); }

// P(X >= ilo) for X ~ hypergeometric(Aw successes, Al failures, m draws).
// Anchored at max(ilo, mode) and expanded with the pmf ratio recurrence in
// both directions, so the work is proportional to the mass actually summed
// rather than to the support size.
double hyper_upper_tail(long long Aw, long long Al, long long m, long long ilo) {
  const long long s_lo = std::max(0LL, m - Al);
  const long long s_hi = std::min(m, Aw);
  if (s_lo > s_hi) throw std::invalid_argument("hypergeometric tail: empty support");
  if (ilo <= s_lo) return 1.0;
  if (ilo > s_hi) return 0.0;

  const long long K = Aw + Al;
  long long mode = static_cast<long long>(
      (static_cast<double>(m + 1) * static_cast<double>(Aw + 1)) /
      static_cast<double>(K + 2));
  mode = std::clamp(mode, s_lo, s_hi);
  const long long a = std::max(ilo, mode);

  const double anchor =
      std::exp(lchoose(Aw, a) + lchoose(Al, m - a) - lchoose(K, m));
  double acc = anchor;

  double term = anchor;
  for (long long i = a; i < s_hi; ++i) {
    const double r = (static_cast<double>(Aw - i) * static_cast<double>(m - i)) /
                     (static_cast<double>(i + 1) * static_cast<double>(Al - m + i + 1));
    term *= r;
    acc += term;
    if (r < 1.0 && term * r / (1.0 - r) < acc * kTailEps + kTailFloor) break;
  }

  term = anchor;
  for (long long i = a; i > ilo; --i) {
    const double r = (static_cast<double>(i) * static_cast<double>(Al - m + i)) /
                     (static_cast<double>(Aw - i + 1) * static_cast<double>(m - i + 1));
    term *= r;
    acc += term;
    if (r < 1.0 && term * r / (1.0 - r) < acc * kTailEps + kTailFloor) break;
  }

  return std::min(acc, 1.0);
}

}  // namespace

void validate_sample(const PollingSample& sample) {
  if (sample.size < 0 || sample.wins < 0 || sample.losses < 0 || sample.others < 0)
    throw std::invalid_argument("polling sample: negative count");
  if (sample.wins + sample.losses + sample.others != sample.size)
    throw std::invalid_argument("polling sample: tallies do not sum to sample size");
}

double tri_hyper_tail(long long winner_pop, long long loser_pop,
                      long long population, long long sample,
                      long long margin_min) {
  if (winner_pop < 0 || loser_pop < 0)
    throw std::invalid_argument("tri tail: negative population count");
  if (winner_pop + loser_pop > population)
    throw std::invalid_argument("tri tail: candidate ballots exceed population");
  if (sample < 0 || sample > population)
    throw std::invalid_argument("tri tail: sample size outside [0, population]");

  const long long D = margin_min, n = sample;
  if (D > n) return 0.0;
  if (D <= -n) return 1.0;

  const long long Aw = winner_pop, Al = loser_pop;
  const long long Au = population - Aw - Al;
  const long long K = Aw + Al;
  const long long m_lo = std::max(0LL, n - Au);
  const long long m_hi = std::min(n, K);

  // inner(m) = P(B_w - B_l >= D | B_w + B_l = m)
  const auto inner = [&](long long m) {
    const long long ilo = std::max(ceil_div2(m + D), std::max(0LL, m - Al));
    return hyper_upper_tail(Aw, Al, m, ilo);
  };

  long long mode = static_cast<long long>(
      (static_cast<double>(n + 1) * static_cast<double>(K + 1)) /
      static_cast<double>(population + 2));
  mode = std::clamp(mode, m_lo, m_hi);

  const double anchor = std::exp(lchoose(K, mode) + lchoose(Au, n - mode) -
                                 lchoose(population, n));
  double acc = anchor * inner(mode);

  double w = anchor;
  for (long long m = mode; m < m_hi; ++m) {
    const double r = (static_cast<double>(K - m) * static_cast<double>(n - m)) /
                     (static_cast<double>(m + 1) * static_cast<double>(Au - n + m + 1));
    w *= r;
    acc += w * inner(m + 1);
    if (r < 1.0 && w * r / (1.0 - r) < acc * kTailEps + kTailFloor) break;
  }

  w = anchor;
  for (long long m = mode; m > m_lo; --m) {
    if (m - 1 < D) break;  // the tail condition is unreachable with fewer pair ballots
    const double r = (static_cast<double>(m) * static_cast<double>(Au - n + m)) /
                     (static_cast<double>(K - m + 1) * static_cast<double>(n - m + 1));
    w *= r;
    acc += w * inner(m - 1);
    if (r < 1.0 && w * r / (1.0 - r) < acc * kTailEps + kTailFloor) break;
  }

  return std::min(acc, 1.0);
}

double cond_hyper_tail(long long winner_pop, long long loser_pop,
                       long long pair_sample, long long winner_min) {
  if (winner_pop < 0 || loser_pop < 0)
    throw std::invalid_argument("conditional tail: negative population count");
  if (pair_sample < 0 || pair_sample > winner_pop + loser_pop)
    throw std::invalid_argument("conditional tail: pair sample outside [0, A_w + A_l]");
  return hyper_upper_tail(winner_pop, loser_pop, pair_sample, winner_min);
}

PollingAssessment polling_pvalue(const PollingSample& sample, long long population,
                                 long long margin_threshold, PollingMethod method,
                                 SearchDepth depth) {
  validate_sample(sample);
  if (population <= 0)
    throw std::invalid_argument("polling p-value: population must be positive");
  if (sample.size > population)
    throw std::invalid_argument("polling p-value: sample exceeds population");

  const long long N = population, c = margin_threshold;
  if (c < -N) return {0.0, -1, NullShape::empty};
  if (c >= N) return {1.0, -1, NullShape::unfalsifiable};

  const long long lo = std::max(0LL, c);
  const long long hi = (N + c) / 2;

  std::set<long long> candidates;
  if (depth == SearchDepth::exhaustive) {
    for (long long a = lo; a <= hi; ++a) candidates.insert(a);
  } else {
    candidates.insert(lo);
    candidates.insert(hi);
    for (int k = 1; k <= 100; ++k)
      candidates.insert(lo + std::llround(static_cast<double>(k) *
                                          static_cast<double>(hi - lo) / 101.0));
  }

  const long long D = sample.margin();
  const long long m = sample.pair_sample();
  const long long imin = ceil_div2(m + D);

  double best = -1.0;
  long long arg = -1;
  for (long long Aw : candidates) {
    const long long Al = Aw - c;
    double p;
    if (method == PollingMethod::tri_hypergeometric) {
      p = tri_hyper_tail(Aw, Al, N, sample.size, D);
    } else if (Aw + Al < m) {
      p = 0.0;  // this null population cannot produce the observed pair sample
    } else {
      p = cond_hyper_tail(Aw, Al, m, imin);
    }
    if (p > best) {
      best = p;
      arg = Aw;
    }
  }
  return {std::min(best, 1.0), arg, NullShape::bounded};
}

long long polling_null_threshold(long long stratum_margin, long long overall_margin,
                                 const Ratio& lambda) {
  return (Ratio(stratum_margin) - lambda * Ratio(overall_margin)).ceil();
}

long long polling_null_threshold(const MarginTable& margins, const std::string& stratum,
                                 const CandidatePair& pair, const Ratio& lambda) {
  return polling_null_threshold(margins.in_stratum(stratum, pair),
                                margins.overall(pair), lambda);
}

}  // namespace rla
