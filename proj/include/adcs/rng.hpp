// Seeded random streams. A master seed fans out to named per-component
// streams so that changing one component's randomness (e.g. the resampling
// draw) never perturbs another's.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace adcs::rng {

// FNV-1a, used both for stream derivation and for config hashing.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= 0x100000001b3ull;
  }
  return h;
}

// One independent generator. Streams are identified by (master seed, name,
// index); the index distinguishes e.g. per-chain noise streams.
class Stream {
 public:
  Stream() : gen_(0) {}
  Stream(std::uint64_t master, std::string_view name, std::uint64_t index = 0)
      : gen_(fnv1a_u64(index, fnv1a(name, fnv1a_u64(master, 0xcbf29ce484222325ull)))) {}

  double normal() { return normal_(gen_); }
  double uniform() { return uniform_(gen_); }           // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
    return d(gen_);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Fan-out helper carrying the master seed.
class SeedBank {
 public:
  explicit SeedBank(std::uint64_t master) : master_(master) {}
  Stream stream(std::string_view name, std::uint64_t index = 0) const {
    return Stream(master_, name, index);
  }
  std::uint64_t master() const { return master_; }

 private:
  std::uint64_t master_;
};

}  // namespace adcs::rng
