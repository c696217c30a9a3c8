#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rlakit/ratio.hpp"

namespace rla {

// Deterministic, publicly verifiable randomness: draw k of a sequence is
// derived from the SHA-256 digest of "<seed>,<k>". Anyone with the seed and
// the manifest can recompute every selection, in any language.

// First 8 bytes of the digest, big-endian, as an integer in [0, 2^64).
std::uint64_t seed_uniform64(const std::string& seed, long long index);

// Full lowercase hex digest, for plan transcripts.
std::string seed_digest_hex(const std::string& seed, long long index);

struct Draw {
  long long index = 0;     // draw counter, 1-based, including skipped duplicates
  std::string digest_hex;
  std::string selected;    // ballot position or batch id
};

// n distinct ballot positions in [1, N], in draw order. Draw k selects
// position floor(x_k * N / 2^64) + 1 (exact integer arithmetic); positions
// already drawn are skipped and the counter keeps advancing.
std::vector<long long> draw_srs(const std::string& seed, long long population,
                                long long count);
std::vector<Draw> draw_srs_transcript(const std::string& seed, long long population,
                                      long long count);

// k batch selections with replacement, probability proportional to each
// batch's error bound. The bounds are scaled to exact integer weights over
// their least common denominator; draw j selects the first batch whose
// cumulative weight w satisfies w * 2^64 >= x_j * total_weight. Every bound
// must be positive: zero-bound batches cannot hold overstatement and are
// excluded before sampling.
std::vector<std::string> draw_ppeb(const std::string& seed,
                                   const std::vector<std::pair<std::string, Ratio>>& bounds,
                                   long long draws);
std::vector<Draw> draw_ppeb_transcript(const std::string& seed,
                                       const std::vector<std::pair<std::string, Ratio>>& bounds,
                                       long long draws);

}  // namespace rla
