#ifndef MASTERFACE_RNG_HPP_
#define MASTERFACE_RNG_HPP_

#include <cstdint>
#include <random>

namespace masterface {

// Deterministic random stream: a seeded mt19937_64 plus a draw counter, so a
// stream position can be serialized as (seed, count) and restored bit-exactly.
// Gaussians come from a fixed Box-Muller transform (exactly two raw draws
// each); std::normal_distribution is implementation-defined and would break
// snapshot portability.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  // Restore a serialized position by fast-forwarding the engine.
  NormalStream(std::uint64_t seed, std::uint64_t count) : NormalStream(seed) {
    engine_.discard(count);
    count_ = count;
  }

  std::uint64_t next_u64() {
    ++count_;
    return engine_();
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal draw; consumes exactly two raw u64s.
  double gauss();

  // Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t count() const { return count_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_ = 0;
  std::uint64_t count_ = 0;
};

// 64-bit FNV-1a over raw bytes; used for image digests and config digests.
std::uint64_t fnv1a64(const void* bytes, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ull);
std::string to_hex(std::uint64_t value);

}  // namespace masterface

#endif  // MASTERFACE_RNG_HPP_
