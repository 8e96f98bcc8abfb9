#include "bayestree/rng.hpp"

#include <stdexcept>

namespace bayestree {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t root_seed, StreamPurpose purpose,
                     std::uint64_t index, std::uint64_t round) {
  std::uint64_t x = mix64(root_seed + 0x9e3779b97f4a7c15ULL);
  x = mix64(x ^ mix64(static_cast<std::uint64_t>(purpose) + 0xbf58476d1ce4e5b9ULL));
  x = mix64(x ^ mix64(index + 0x94d049bb133111ebULL));
  x = mix64(x ^ mix64(round + 0x2545f4914f6cdd1dULL));
  for (auto& s : state_) {
    x += 0x9e3779b97f4a7c15ULL;
    s = mix64(x);
  }
  // xoshiro must not start from the all-zero state
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
    state_[0] = 0x9e3779b97f4a7c15ULL;
  }
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t RngStream::next_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("next_index: n must be positive");
  const std::uint64_t nn = static_cast<std::uint64_t>(n);
  const std::uint64_t reject_below = (0 - nn) % nn;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= reject_below) return static_cast<std::size_t>(r % nn);
  }
}

}  // namespace bayestree
