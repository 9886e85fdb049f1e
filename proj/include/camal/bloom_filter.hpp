#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace camal {

// Standard Bloom filter over 64-bit keys: ceil(bits_per_key * n) bits and
// ceil(bits_per_key * ln 2) probes by double hashing. A filter built with
// zero bits per key is disabled and answers "maybe" for every key.
class BloomFilter {
 public:
  BloomFilter() = default;
  BloomFilter(std::uint64_t expected_keys, double bits_per_key, std::uint64_t seed);

  void add(std::uint64_t key) noexcept;
  bool may_contain(std::uint64_t key) const noexcept;

  bool enabled() const noexcept { return num_bits_ != 0; }
  double bits_per_key() const noexcept { return bits_per_key_; }
  std::uint32_t num_probes() const noexcept { return num_probes_; }
  std::uint64_t num_bits() const noexcept { return num_bits_; }
  std::uint64_t seed() const noexcept { return seed_; }

  // (1 - e^{-k n / m})^k for n inserted keys.
  double design_fpr(std::uint64_t keys) const noexcept;

  // Little-endian: "CFLT", u32 version, u64 seed, u32 probes, u64 bits,
  // f64 bits_per_key, then the bit array as u64 words.
  std::vector<std::uint8_t> serialize() const;
  static BloomFilter deserialize(std::span<const std::uint8_t> bytes);

 private:
  std::vector<std::uint64_t> words_;
  std::uint64_t num_bits_ = 0;
  std::uint32_t num_probes_ = 0;
  double bits_per_key_ = 0.0;
  std::uint64_t seed_ = 0;
};

}  // namespace camal
