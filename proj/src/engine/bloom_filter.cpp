#include "camal/bloom_filter.hpp"

#include <cmath>
#include <cstring>

#include "camal/errors.hpp"

namespace camal {

namespace {

constexpr std::uint32_t kFilterVersion = 1;

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw StorageError("truncated filter");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[pos + i]) << (8 * i);
  pos += sizeof(T);
  return value;
}

}  // namespace

BloomFilter::BloomFilter(std::uint64_t expected_keys, double bits_per_key, std::uint64_t seed)
    : bits_per_key_(bits_per_key > 0.0 ? bits_per_key : 0.0), seed_(seed) {
  if (bits_per_key_ <= 0.0 || expected_keys == 0) {
    bits_per_key_ = bits_per_key > 0.0 ? bits_per_key : 0.0;
    return;
  }
  num_bits_ = static_cast<std::uint64_t>(std::ceil(bits_per_key_ * static_cast<double>(expected_keys)));
  num_probes_ = static_cast<std::uint32_t>(std::ceil(bits_per_key_ * std::log(2.0)));
  if (num_probes_ == 0) num_probes_ = 1;
  words_.assign((num_bits_ + 63) / 64, 0);
}

void BloomFilter::add(std::uint64_t key) noexcept {
  if (num_bits_ == 0) return;
  const std::uint64_t h1 = mix64(key ^ seed_);
  const std::uint64_t h2 = mix64(h1) | 1;
  std::uint64_t h = h1;
  for (std::uint32_t i = 0; i < num_probes_; ++i, h += h2) {
    const std::uint64_t bit = h % num_bits_;
    words_[bit >> 6] |= std::uint64_t{1} << (bit & 63);
  }
}

bool BloomFilter::may_contain(std::uint64_t key) const noexcept {
  if (num_bits_ == 0) return true;
  const std::uint64_t h1 = mix64(key ^ seed_);
  const std::uint64_t h2 = mix64(h1) | 1;
  std::uint64_t h = h1;
  for (std::uint32_t i = 0; i < num_probes_; ++i, h += h2) {
    const std::uint64_t bit = h % num_bits_;
    if ((words_[bit >> 6] & (std::uint64_t{1} << (bit & 63))) == 0) return false;
  }
  return true;
}

double BloomFilter::design_fpr(std::uint64_t keys) const noexcept {
  if (num_bits_ == 0) return 1.0;
  const double k = num_probes_;
  return std::pow(1.0 - std::exp(-k * static_cast<double>(keys) / static_cast<double>(num_bits_)), k);
}

std::vector<std::uint8_t> BloomFilter::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(36 + words_.size() * 8);
  for (char c : {'C', 'F', 'L', 'T'}) out.push_back(static_cast<std::uint8_t>(c));
  put_le<std::uint32_t>(out, kFilterVersion);
  put_le<std::uint64_t>(out, seed_);
  put_le<std::uint32_t>(out, num_probes_);
  put_le<std::uint64_t>(out, num_bits_);
  std::uint64_t bpk_bits = 0;
  std::memcpy(&bpk_bits, &bits_per_key_, sizeof(bpk_bits));
  put_le<std::uint64_t>(out, bpk_bits);
  for (std::uint64_t w : words_) put_le<std::uint64_t>(out, w);
  return out;
}

BloomFilter BloomFilter::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "CFLT", 4) != 0) {
    throw StorageError("bad filter magic");
  }
  std::size_t pos = 4;
  if (get_le<std::uint32_t>(bytes, pos) != kFilterVersion) throw StorageError("filter version");
  BloomFilter f;
  f.seed_ = get_le<std::uint64_t>(bytes, pos);
  f.num_probes_ = get_le<std::uint32_t>(bytes, pos);
  f.num_bits_ = get_le<std::uint64_t>(bytes, pos);
  const auto bpk_bits = get_le<std::uint64_t>(bytes, pos);
  std::memcpy(&f.bits_per_key_, &bpk_bits, sizeof(bpk_bits));
  f.words_.resize((f.num_bits_ + 63) / 64);
  for (auto& w : f.words_) w = get_le<std::uint64_t>(bytes, pos);
  return f;
}

}  // namespace camal
