#include "rlakit/contest.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace rla {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

}  // namespace

void validate_manifest(const StratumManifest& manifest) {
  if (manifest.id.empty()) fail("manifest: empty stratum id");
  if (manifest.ballots <= 0) fail("manifest " + manifest.id + ": ballot count must be positive");
  if (manifest.kind == StratumKind::polling) {
    if (!manifest.batches.empty())
      fail("manifest " + manifest.id + ": polling stratum carries no batch list");
    return;
  }
  std::set<std::string> ids;
  long long total = 0;
  for (const Batch& b : manifest.batches) {
    if (b.id.empty()) fail("manifest " + manifest.id + ": empty batch id");
    if (!ids.insert(b.id).second)
      fail("manifest " + manifest.id + ": duplicate batch id " + b.id);
    if (b.ballots < 1) fail("batch " + b.id + ": ballot count must be >= 1");
    long long votes = 0;
    for (const auto& [cand, v] : b.votes) {
      if (v < 0 || v > b.ballots)
        fail("batch " + b.id + ": votes for " + cand + " outside [0, ballots]");
      votes += v;
    }
    if (votes > b.ballots)
      fail("batch " + b.id + ": total votes exceed ballot count");
    total += b.ballots;
  }
  if (total != manifest.ballots)
    fail("manifest " + manifest.id + ": batch ballots sum to " + std::to_string(total) +
         ", expected " + std::to_string(manifest.ballots));
}

long long ContestSpec::total_ballots() const {
  long long n = 0;
  for (const auto& [s, b] : ballots) n += b;
  return n;
}

long long ContestSpec::reported(const std::string& stratum, const std::string& cand) const {
  auto s = votes.find(stratum);
  if (s == votes.end()) return 0;
  auto c = s->second.find(cand);
  return c == s->second.end() ? 0 : c->second;
}

long long MarginTable::overall(const CandidatePair& p) const {
  auto it = overall_.find(p);
  if (it == overall_.end()) fail("margins: unknown pair " + p.first + "/" + p.second);
  return it->second;
}

long long MarginTable::in_stratum(const std::string& stratum, const CandidatePair& p) const {
  auto s = by_stratum_.find(stratum);
  if (s == by_stratum_.end()) fail("margins: unknown stratum " + stratum);
  auto it = s->second.find(p);
  if (it == s->second.end()) fail("margins: unknown pair " + p.first + "/" + p.second);
  return it->second;
}

long long MarginTable::ballots_in(const std::string& stratum) const {
  auto it = stratum_ballots_.find(stratum);
  if (it == stratum_ballots_.end()) fail("margins: unknown stratum " + stratum);
  return it->second;
}

MarginTable MarginTable::with_hand_count(
    const std::string& stratum,
    const std::map<std::string, long long>& actual_votes) const {
  MarginTable out = *this;
  auto s = out.by_stratum_.find(stratum);
  if (s == out.by_stratum_.end()) fail("margins: unknown stratum " + stratum);
  auto count = [&](const std::string& cand) {
    auto it = actual_votes.find(cand);
    return it == actual_votes.end() ? 0LL : it->second;
  };
  for (const CandidatePair& p : out.pairs_)
    out.actual_[stratum][p] = count(p.first) - count(p.second);
  return out;
}

bool MarginTable::hand_counted(const std::string& stratum) const {
  return actual_.count(stratum) != 0;
}

long long MarginTable::actual(const std::string& stratum, const CandidatePair& p) const {
  auto s = actual_.find(stratum);
  if (s == actual_.end()) fail("margins: stratum " + stratum + " has no hand count");
  auto it = s->second.find(p);
  if (it == s->second.end()) fail("margins: unknown pair " + p.first + "/" + p.second);
  return it->second;
}

long long MarginTable::overstatement(const std::string& stratum, const CandidatePair& p) const {
  return in_stratum(stratum, p) - actual(stratum, p);
}

MarginTable derive_margins(const ContestSpec& spec) {
  if (spec.winners.empty()) fail("contest: no reported winners");
  if (spec.losers.empty()) fail("contest: no reported losers");
  std::set<std::string> known(spec.candidates.begin(), spec.candidates.end());
  for (const auto& w : spec.winners)
    if (!known.count(w)) fail("contest: unknown winner " + w);
  for (const auto& l : spec.losers) {
    if (!known.count(l)) fail("contest: unknown loser " + l);
    if (std::find(spec.winners.begin(), spec.winners.end(), l) != spec.winners.end())
      fail("contest: " + l + " listed as both winner and loser");
  }
  if (spec.ballots.empty()) fail("contest: no strata");

  MarginTable t;
  for (const auto& [stratum, n] : spec.ballots) {
    if (n <= 0) fail("contest: stratum " + stratum + " ballot count must be positive");
    t.strata_.push_back(stratum);
    t.stratum_ballots_[stratum] = n;
    t.ballots_ += n;
    long long votes = 0;
    auto vs = spec.votes.find(stratum);
    if (vs != spec.votes.end())
      for (const auto& [cand, v] : vs->second) {
        if (!known.count(cand)) fail("contest: votes for unknown candidate " + cand);
        if (v < 0) fail("contest: negative votes for " + cand + " in " + stratum);
        votes += v;
      }
    if (votes > n)
      fail("contest: stratum " + stratum + " votes exceed its ballot count");
  }
  for (const auto& [stratum, vs] : spec.votes)
    if (!spec.ballots.count(stratum))
      fail("contest: votes reported for unknown stratum " + stratum);

  bool first = true;
  for (const auto& w : spec.winners)
    for (const auto& l : spec.losers) {
      CandidatePair p{w, l};
      long long margin = 0;
      for (const auto& stratum : t.strata_) {
        long long m = spec.reported(stratum, w) - spec.reported(stratum, l);
        t.by_stratum_[stratum][p] = m;
        margin += m;
      }
      if (margin <= 0)
        fail("contest: reported outcome not well-formed, margin " + w + "/" + l +
             " = " + std::to_string(margin));
      t.overall_[p] = margin;
      t.pairs_.push_back(p);
      if (first || margin < t.min_margin_) t.min_margin_ = margin;
      first = false;
    }
  return t;
}

Ratio diluted_margin_after_handcount(long long winner_total, long long loser_total,
                                     long long winner_legacy, long long loser_legacy,
                                     long long ballots_cvr) {
  if (winner_total < 0 || loser_total < 0 || winner_legacy < 0 || loser_legacy < 0)
    fail("handcount adjustment: negative vote count");
  if (ballots_cvr <= 0) fail("handcount adjustment: CVR ballot count must be positive");
  long long margin = (winner_total - winner_legacy) - (loser_total - loser_legacy);
  return Ratio(margin, ballots_cvr);
}

long long worst_case_legacy_reduction(long long ballots_legacy,
                                      long long winner_legacy,
                                      long long loser_legacy) {
  if (winner_legacy < 0 || loser_legacy < 0 || ballots_legacy < 0)
    fail("legacy bound: negative count");
  if (winner_legacy + loser_legacy > ballots_legacy)
    fail("legacy bound: reported votes exceed stratum ballots");
  return ballots_legacy + winner_legacy - loser_legacy;
}

}  // namespace rla
