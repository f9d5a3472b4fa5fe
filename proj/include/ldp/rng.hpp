#ifndef LDP_RNG_HPP
#define LDP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace ldp {

/// splitmix64 finalizer; used to derive independent per-replicate seeds
/// from (master_seed, replicate_index) so batches can run in any order.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t x = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

/// mt19937_64 with explicit, implementation-independent mappings to
/// uniform/exponential doubles. The engine itself is fully specified by
/// the standard, so identical seeds give identical streams everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Rng(std::uint64_t master, std::uint64_t replicate)
      : engine_(mix_seed(master, replicate)) {}

  /// Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1].
  double uniform_pos() { return 1.0 - uniform(); }

  /// Exponential waiting time with the given rate (> 0).
  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ldp

#endif
