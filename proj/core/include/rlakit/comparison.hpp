#pragma once

#include <string>
#include <vector>

#include "rlakit/contest.hpp"
#include "rlakit/ratio.hpp"

namespace rla {

// Per-batch a-priori error bound, in overall-margin fractions.
//   sharp : u_p = max over (w,l) of (v_pw - v_pl + n_p) / V_wl
//           (the worst case flips every ballot from the reported winner to
//           the loser of the tightest pair)
//   simple: u_p = 2 n_p / V, usable when per-batch subtotals are not
//           trusted; always >= the sharp bound.
// An inflation factor >= 1 scales either bound, trading sample size for
// slack against data-entry problems in the reported subtotals.
enum class BoundMode { sharp, simple };

struct BatchErrorBound {
  std::string batch_id;
  Ratio bound;  // u_p
  BoundMode mode = BoundMode::sharp;
};

BatchErrorBound batch_upper_bound(const Batch& batch, const MarginTable& margins,
                                  BoundMode mode, const Ratio& inflation = Ratio(1));

// Sum of u_p over a batch list (U). Zero-bound batches contribute nothing
// and are excluded from sampling; they cannot hide overstatement.
Ratio total_error_bound(const std::vector<Batch>& batches, const MarginTable& margins,
                        BoundMode mode, const Ratio& inflation = Ratio(1));

// Observed overstatement of one audited batch and its taint t_p = e_p/u_p.
// e_p = max over (w,l) of (v_pw - a_pw - v_pl + a_pl) / V_wl; may be
// negative when the audit found votes the report missed. t_p <= 1 for any
// audited interpretation, by construction of u_p.
struct TaintObservation {
  std::string batch_id;
  Ratio error;  // e_p
  Ratio taint;  // t_p
};

TaintObservation observed_taint(const Batch& batch,
                                const std::map<std::string, long long>& audited_votes,
                                const MarginTable& margins,
                                const BatchErrorBound& bound);

// Sequential comparison tests of the null "stratum overstatement >= t * U"
// against PPEB draws with replacement. Both track the running product over
// draws in log space and report
//
//     p = min(1, min over prefixes k of p_k)
//
// so an audit that keeps drawing never loses ground it already gained.
// A draw with taint 1 zeroes the underlying martingale: every later prefix
// has p_k = 1 and only earlier minima still count.
//
// Kaplan-Markov:  p_k = prod_{j<=k} (1 - t) / (1 - T_j)
// Kaplan-Wald:    p_k = [ prod_{j<=k} ( g*(1-T_j)/(1-t) + 1-g ) ]^(-1)
//
// gamma = 1 makes Kaplan-Wald coincide with Kaplan-Markov; gamma < 1 keeps
// single taints near 1 from wiping out the accumulated product.
class KaplanMarkovState {
 public:
  explicit KaplanMarkovState(double threshold);
  void update(double taint);
  double pvalue() const;
  long long draws() const { return draws_; }
  bool poisoned() const { return poisoned_; }

 private:
  double one_minus_t_;
  double log_running_ = 0.0;  // log of the current prefix p_k
  double log_best_ = 0.0;     // min over prefixes, capped at 0
  bool poisoned_ = false;
  long long draws_ = 0;
};

class KaplanWaldState {
 public:
  KaplanWaldState(double threshold, double gamma);
  void update(double taint);
  double pvalue() const;
  long long draws() const { return draws_; }
  bool poisoned() const { return poisoned_; }

 private:
  double one_minus_t_;
  double gamma_;
  double log_running_ = 0.0;
  double log_best_ = 0.0;
  bool poisoned_ = false;
  long long draws_ = 0;
};

inline constexpr double kDefaultKaplanWaldGamma = 0.95;

double km_pvalue(const std::vector<double>& taints, double threshold);
double kw_pvalue(const std::vector<double>& taints, double threshold, double gamma);

// Smallest n with (1-t)^n <= alpha: the draw count at which a comparison
// audit that finds no errors at all reaches level alpha.
long long clean_sample_size(double threshold, double alpha);

}  // namespace rla
