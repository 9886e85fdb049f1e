#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace camal {

// Per-level bits per key for `filter_bytes` of filter memory over levels with
// the given entry counts. False-positive rates are proportional to level size
// (capped at 1) and scaled so that sum n_i * (-ln p_i) / ln^2 2 uses the whole
// budget. Empty levels get 0.
std::vector<double> monkey_allocate(std::uint64_t filter_bytes,
                                    std::span<const std::uint64_t> level_entries);

// Filter bits implied by an allocation.
double allocation_bits(std::span<const std::uint64_t> level_entries,
                       std::span<const double> bits_per_key);

// Expected false-positive rate at b bits per key under optimal probe count.
double bloom_fpr(double bits_per_key) noexcept;

}  // namespace camal
