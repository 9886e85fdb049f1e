#include "camal/monkey.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace camal {

namespace {

const double kLn2Sq = std::numbers::ln2 * std::numbers::ln2;

// Total bits when p_i = min(1, exp(log_scale) * n_i).
double bits_at(double log_scale, std::span<const std::uint64_t> n) {
  double total = 0.0;
  for (auto ni : n) {
    if (ni == 0) continue;
    const double log_p = std::min(0.0, log_scale + std::log(static_cast<double>(ni)));
    total += -static_cast<double>(ni) * log_p / kLn2Sq;
  }
  return total;
}

}  // namespace

double bloom_fpr(double bits_per_key) noexcept {
  if (bits_per_key <= 0.0) return 1.0;
  return std::exp(-bits_per_key * kLn2Sq);
}

double allocation_bits(std::span<const std::uint64_t> level_entries,
                       std::span<const double> bits_per_key) {
  double total = 0.0;
  for (std::size_t i = 0; i < level_entries.size() && i < bits_per_key.size(); ++i) {
    total += static_cast<double>(level_entries[i]) * bits_per_key[i];
  }
  return total;
}

std::vector<double> monkey_allocate(std::uint64_t filter_bytes,
                                    std::span<const std::uint64_t> level_entries) {
  std::vector<double> bpk(level_entries.size(), 0.0);
  std::uint64_t smallest = 0;
  for (auto n : level_entries) {
    if (n != 0 && (smallest == 0 || n < smallest)) smallest = n;
  }
  if (filter_bytes == 0 || smallest == 0) return bpk;

  const double budget = 8.0 * static_cast<double>(filter_bytes);
  // At hi every p_i is 1 and no bits are spent.
  double hi = -std::log(static_cast<double>(smallest));
  double lo = hi - 1.0;
  while (bits_at(lo, level_entries) < budget) lo = hi - 2.0 * (hi - lo);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bits_at(mid, level_entries) > budget) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double log_scale = 0.5 * (lo + hi);
  for (std::size_t i = 0; i < level_entries.size(); ++i) {
    if (level_entries[i] == 0) continue;
    const double log_p =
        std::min(0.0, log_scale + std::log(static_cast<double>(level_entries[i])));
    bpk[i] = -log_p / kLn2Sq;
  }
  return bpk;
}

}  // namespace camal
