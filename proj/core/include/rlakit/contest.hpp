#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rlakit/ratio.hpp"

namespace rla {

// One physical audit unit in a comparison stratum: a precinct, a machine
// batch, or a single ballot card. votes maps candidate id to the reported
// count inside the unit. Counts, not indicators: a batch of n_p ballots
// reports up to n_p votes per candidate, and at most n_p in total for a
// vote-for-one contest.
struct Batch {
  std::string id;
  long long ballots = 0;
  std::map<std::string, long long> votes;

  long long reported(const std::string& cand) const {
    auto it = votes.find(cand);
    return it == votes.end() ? 0 : it->second;
  }
};

enum class StratumKind { comparison, polling };

struct StratumManifest {
  std::string id;
  StratumKind kind = StratumKind::comparison;
  long long ballots = 0;
  // Unit list for comparison strata. Polling strata are sampled per ballot
  // and carry no units.
  std::vector<Batch> batches;
};

// Validates internal consistency: positive ballot counts, unique batch ids,
// per-batch vote totals within batch size, and (comparison kind) batch
// ballots summing to the stratum total. Throws std::invalid_argument.
void validate_manifest(const StratumManifest& manifest);

// Reported contest results, split by stratum. Vote-for-k plurality: each
// (winner, loser) pair is treated independently downstream.
struct ContestSpec {
  std::vector<std::string> candidates;
  std::vector<std::string> winners;
  std::vector<std::string> losers;
  // stratum id -> candidate id -> reported votes
  std::map<std::string, std::map<std::string, long long>> votes;
  // stratum id -> ballots cast in that stratum
  std::map<std::string, long long> ballots;

  long long total_ballots() const;
  long long reported(const std::string& stratum, const std::string& cand) const;
};

using CandidatePair = std::pair<std::string, std::string>;  // (winner, loser)

// Pairwise reported margins in votes, overall and by stratum, plus the
// minimum margin V that drives every bound. Immutable; a hand count
// produces a new table via with_hand_count so the revealed actual margins
// and overstatements travel with the reported ones.
class MarginTable {
 public:
  const std::vector<CandidatePair>& pairs() const { return pairs_; }
  const std::vector<std::string>& strata() const { return strata_; }

  long long overall(const CandidatePair& p) const;
  long long in_stratum(const std::string& stratum, const CandidatePair& p) const;
  long long min_margin() const { return min_margin_; }
  long long ballots() const { return ballots_; }
  long long ballots_in(const std::string& stratum) const;

  Ratio diluted(const CandidatePair& p) const {
    return Ratio(overall(p), ballots_);
  }
  Ratio diluted_min() const { return Ratio(min_margin_, ballots_); }

  // Copy of this table with one stratum's actual votes filled in from a
  // completed hand count. actual(), overstatement() become defined for
  // that stratum.
  MarginTable with_hand_count(
      const std::string& stratum,
      const std::map<std::string, long long>& actual_votes) const;

  bool hand_counted(const std::string& stratum) const;
  // Actual hand-counted margin A for the pair in a counted stratum.
  long long actual(const std::string& stratum, const CandidatePair& p) const;
  // omega = reported stratum margin minus actual stratum margin.
  long long overstatement(const std::string& stratum, const CandidatePair& p) const;

  friend MarginTable derive_margins(const ContestSpec&);

 private:
  std::vector<CandidatePair> pairs_;
  std::vector<std::string> strata_;
  std::map<CandidatePair, long long> overall_;
  std::map<std::string, std::map<CandidatePair, long long>> by_stratum_;
  std::map<std::string, std::map<CandidatePair, long long>> actual_;
  std::map<std::string, long long> stratum_ballots_;
  long long min_margin_ = 0;
  long long ballots_ = 0;
};

// Builds the pairwise margin table. Fails with std::invalid_argument if the
// winner and loser sets overlap or are empty, a candidate is unknown, any
// stratum's votes exceed its ballots, or any overall pairwise margin is
// non-positive (a reported tie or reversal leaves nothing to audit; the
// outcome is not well-formed).
MarginTable derive_margins(const ContestSpec& spec);

// Diluted margin driving a comparison audit after legacy (no-CVR) ballots
// are hand counted and removed from the comparison universe: subtract the
// legacy subtotals from each candidate and dilute by the remaining ballot
// count. May be <= 0; callers must treat that as a full-hand-count trigger,
// not an error.
Ratio diluted_margin_after_handcount(long long winner_total, long long loser_total,
                                     long long winner_legacy, long long loser_legacy,
                                     long long ballots_cvr);

// Largest margin overstatement the legacy stratum could hide if its
// reported subtotals are ignored: every unaccounted legacy ballot could
// hold a winner vote that is actually a loser vote, so the bound is
// N_legacy + V_w' - V_l'. Always in [0, 2*N_legacy].
long long worst_case_legacy_reduction(long long ballots_legacy,
                                      long long winner_legacy,
                                      long long loser_legacy);

}  // namespace rla
