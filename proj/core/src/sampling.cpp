#include "rlakit/sampling.hpp"

#include <openssl/evp.h>

#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace rla {

namespace {

void digest(const std::string& seed, long long index, unsigned char out[32]) {
  const std::string msg = seed + "," + std::to_string(index);
  unsigned int len = 0;
  if (EVP_Digest(msg.data(), msg.size(), out, &len, EVP_sha256(), nullptr) != 1 ||
      len != 32)
    throw std::runtime_error("sampling: SHA-256 digest failed");
}

// floor(x * n / 2^64) for x in [0, 2^64); uniform over [0, n) to within
// 2^-64, and exactly reproducible from the digest.
long long scale_down(std::uint64_t x, long long n) {
  return static_cast<long long>(
      (static_cast<unsigned __int128>(x) * static_cast<unsigned long long>(n)) >> 64);
}

}  // namespace

std::uint64_t seed_uniform64(const std::string& seed, long long index) {
  unsigned char md[32];
  digest(seed, index, md);
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x = (x << 8) | md[i];
  return x;
}

std::string seed_digest_hex(const std::string& seed, long long index) {
  unsigned char md[32];
  digest(seed, index, md);
  static const char* hex = "0123456789abcdef";
  std::string out(64, '0');
  for (int i = 0; i < 32; ++i) {
    out[2 * i] = hex[md[i] >> 4];
    out[2 * i + 1] = hex[md[i] & 0xf];
  }
  return out;
}

std::vector<Draw> draw_srs_transcript(const std::string& seed, long long population,
                                      long long count) {
  if (population < 1)
    throw std::invalid_argument("srs: population must be positive");
  if (count < 0 || count > population)
    throw std::invalid_argument("srs: sample size outside [0, population]");

  std::vector<Draw> out;
  out.reserve(count);
  std::unordered_set<long long> seen;
  seen.reserve(static_cast<size_t>(count) * 2);
  for (long long k = 1; static_cast<long long>(out.size()) < count; ++k) {
    const long long position = scale_down(seed_uniform64(seed, k), population) + 1;
    if (!seen.insert(position).second) continue;
    out.push_back({k, seed_digest_hex(seed, k), std::to_string(position)});
  }
  return out;
}

std::vector<long long> draw_srs(const std::string& seed, long long population,
                                long long count) {
  if (population < 1)
    throw std::invalid_argument("srs: population must be positive");
  if (count < 0 || count > population)
    throw std::invalid_argument("srs: sample size outside [0, population]");

  std::vector<long long> out;
  out.reserve(count);
  std::unordered_set<long long> seen;
  seen.reserve(static_cast<size_t>(count) * 2);
  for (long long k = 1; static_cast<long long>(out.size()) < count; ++k) {
    const long long position = scale_down(seed_uniform64(seed, k), population) + 1;
    if (seen.insert(position).second) out.push_back(position);
  }
  return out;
}

namespace {

struct PpebTable {
  std::vector<unsigned long long> cumulative;
  unsigned long long total = 0;
};

PpebTable build_weights(const std::vector<std::pair<std::string, Ratio>>& bounds) {
  if (bounds.empty()) throw std::invalid_argument("ppeb: no batches to sample");

  constexpr long long kDenLimit = 1LL << 62;
  long long common = 1;
  for (const auto& [id, u] : bounds) {
    if (!(u > Ratio(0)))
      throw std::invalid_argument("ppeb: batch " + id + " has non-positive bound");
    const long long g = std::gcd(common, u.den());
    const __int128 next = static_cast<__int128>(common / g) * u.den();
    if (next > kDenLimit)
      throw std::overflow_error("ppeb: common denominator of bounds exceeds 2^62");
    common = static_cast<long long>(next);
  }

  PpebTable t;
  t.cumulative.reserve(bounds.size());
  unsigned __int128 sum = 0;
  for (const auto& [id, u] : bounds) {
    const unsigned __int128 w =
        static_cast<unsigned __int128>(u.num()) * (common / u.den());
    sum += w;
    if (sum >= (static_cast<unsigned __int128>(1) << 63))
      throw std::overflow_error("ppeb: total weight exceeds 2^63");
    t.cumulative.push_back(static_cast<unsigned long long>(sum));
  }
  t.total = static_cast<unsigned long long>(sum);
  return t;
}

size_t select(const PpebTable& t, std::uint64_t x) {
  // first batch with cumulative * 2^64 >= x * total, i.e. cumulative >=
  // ceil(x * total / 2^64)
  const unsigned __int128 prod = static_cast<unsigned __int128>(x) * t.total;
  const unsigned long long target = static_cast<unsigned long long>(
      (prod + ((static_cast<unsigned __int128>(1) << 64) - 1)) >> 64);
  const auto it =
      std::lower_bound(t.cumulative.begin(), t.cumulative.end(), target);
  return static_cast<size_t>(it - t.cumulative.begin());
}

}  // namespace

std::vector<std::string> draw_ppeb(const std::string& seed,
                                   const std::vector<std::pair<std::string, Ratio>>& bounds,
                                   long long draws) {
  if (draws < 0) throw std::invalid_argument("ppeb: negative draw count");
  const PpebTable t = build_weights(bounds);
  std::vector<std::string> out;
  out.reserve(draws);
  for (long long k = 1; k <= draws; ++k)
    out.push_back(bounds[select(t, seed_uniform64(seed, k))].first);
  return out;
}

std::vector<Draw> draw_ppeb_transcript(const std::string& seed,
                                       const std::vector<std::pair<std::string, Ratio>>& bounds,
                                       long long draws) {
  if (draws < 0) throw std::invalid_argument("ppeb: negative draw count");
  const PpebTable t = build_weights(bounds);
  std::vector<Draw> out;
  out.reserve(draws);
  for (long long k = 1; k <= draws; ++k)
    out.push_back({k, seed_digest_hex(seed, k),
                   bounds[select(t, seed_uniform64(seed, k))].first});
  return out;
}

}  // namespace rla
