#include "rlakit/comparison.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rla {

namespace {

void check_threshold(double t) {
  if (!(t > 0.0) || !(t < 1.0))
    throw std::invalid_argument("comparison test: threshold must lie in (0,1)");
}

void check_taint(double taint) {
  if (!(taint <= 1.0))
    throw std::invalid_argument("comparison test: taint exceeds 1");
}

}  // namespace

BatchErrorBound batch_upper_bound(const Batch& batch, const MarginTable& margins,
                                  BoundMode mode, const Ratio& inflation) {
  if (inflation < Ratio(1))
    throw std::invalid_argument("batch bound: inflation factor must be >= 1");
  Ratio u;
  if (mode == BoundMode::simple) {
    u = Ratio(2 * batch.ballots, margins.min_margin());
  } else {
    bool first = true;
    for (const CandidatePair& p : margins.pairs()) {
      Ratio cand(batch.reported(p.first) - batch.reported(p.second) + batch.ballots,
                 margins.overall(p));
      if (first || cand > u) u = cand;
      first = false;
    }
  }
  return BatchErrorBound{batch.id, u * inflation, mode};
}

Ratio total_error_bound(const std::vector<Batch>& batches, const MarginTable& margins,
                        BoundMode mode, const Ratio& inflation) {
  Ratio total;
  for (const Batch& b : batches)
    total = total + batch_upper_bound(b, margins, mode, inflation).bound;
  return total;
}

TaintObservation observed_taint(const Batch& batch,
                                const std::map<std::string, long long>& audited_votes,
                                const MarginTable& margins,
                                const BatchErrorBound& bound) {
  if (bound.batch_id != batch.id)
    throw std::invalid_argument("taint: bound computed for batch " + bound.batch_id +
                                ", audited batch " + batch.id);
  if (!(bound.bound > Ratio(0)))
    throw std::invalid_argument("taint: batch " + batch.id +
                                " has zero error bound and is never drawn");
  long long audited_total = 0;
  for (const auto& [cand, v] : audited_votes) {
    if (v < 0 || v > batch.ballots)
      throw std::invalid_argument("taint: audited votes for " + cand +
                                  " outside [0, ballots] in batch " + batch.id);
    audited_total += v;
  }
  if (audited_total > batch.ballots)
    throw std::invalid_argument("taint: audited votes exceed ballots in batch " + batch.id);

  auto audited = [&](const std::string& cand) {
    auto it = audited_votes.find(cand);
    return it == audited_votes.end() ? 0LL : it->second;
  };
  Ratio e;
  bool first = true;
  for (const CandidatePair& p : margins.pairs()) {
    long long over = (batch.reported(p.first) - audited(p.first)) -
                     (batch.reported(p.second) - audited(p.second));
    Ratio cand(over, margins.overall(p));
    if (first || cand > e) e = cand;
    first = false;
  }
  return TaintObservation{batch.id, e, e / bound.bound};
}

KaplanMarkovState::KaplanMarkovState(double threshold) {
  check_threshold(threshold);
  one_minus_t_ = 1.0 - threshold;
}

void KaplanMarkovState::update(double taint) {
  check_taint(taint);
  ++draws_;
  if (poisoned_) return;
  double surviving = 1.0 - taint;
  if (surviving < std::numeric_limits<double>::min()) {
    // Martingale hit zero; later prefixes all evaluate to p = 1 and only
    // the minimum already recorded can still reject.
    poisoned_ = true;
    return;
  }
  log_running_ += std::log(one_minus_t_ / surviving);
  if (log_running_ < log_best_) log_best_ = log_running_;
}

double KaplanMarkovState::pvalue() const { return std::exp(log_best_); }

KaplanWaldState::KaplanWaldState(double threshold, double gamma) {
  check_threshold(threshold);
  if (!(gamma > 0.0) || !(gamma <= 1.0))
    throw std::invalid_argument("comparison test: gamma must lie in (0,1]");
  one_minus_t_ = 1.0 - threshold;
  gamma_ = gamma;
}

void KaplanWaldState::update(double taint) {
  check_taint(taint);
  ++draws_;
  if (poisoned_) return;
  double factor = gamma_ * ((1.0 - taint) / one_minus_t_) + (1.0 - gamma_);
  if (factor < std::numeric_limits<double>::min()) {
    poisoned_ = true;  // only reachable at gamma == 1
    return;
  }
  log_running_ -= std::log(factor);
  if (log_running_ < log_best_) log_best_ = log_running_;
}

double KaplanWaldState::pvalue() const { return std::exp(log_best_); }

double km_pvalue(const std::vector<double>& taints, double threshold) {
  KaplanMarkovState state(threshold);
  for (double t : taints) state.update(t);
  return state.pvalue();
}

double kw_pvalue(const std::vector<double>& taints, double threshold, double gamma) {
  KaplanWaldState state(threshold, gamma);
  for (double t : taints) state.update(t);
  return state.pvalue();
}

long long clean_sample_size(double threshold, double alpha) {
  check_threshold(threshold);
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("clean sample size: alpha must lie in (0,1]");
  if (alpha == 1.0) return 0;
  double step = std::log1p(-threshold);  // log(1-t), negative
  double target = std::log(alpha);
  long long n = static_cast<long long>(std::ceil(target / step - 1e-9));
  if (n < 0) n = 0;
  while (n > 0 && static_cast<double>(n - 1) * step <= target) --n;
  while (static_cast<double>(n) * step > target) ++n;
  return n;
}

}  // namespace rla
