#ifndef OBA_RANDOM_HPP
#define OBA_RANDOM_HPP

#include <cstdint>

namespace oba {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seed of an independent stream: derived from seed XOR stream index, so the
/// content of stream i never depends on how many other streams were drawn.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(seed ^ splitmix64(stream)); }

}  // namespace oba

#endif  // OBA_RANDOM_HPP
