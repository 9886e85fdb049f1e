#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace camal {

// Range lookups touch a handful of entries ("minimal selectivity").
inline constexpr double kDefaultSelectivity = 4.0;

// Operation fractions of a key-value workload.
//   v: zero-result point lookups, r: non-zero-result point lookups,
//   q: range lookups, w: writes (a delete_fraction of which are deletes).
struct WorkloadMix {
  double v = 0.0;
  double r = 0.0;
  double q = 0.0;
  double w = 0.0;
  double s = kDefaultSelectivity;
  double delete_fraction = 0.0;

  // Throws ConfigError unless the fractions form a partition of 1 (1e-9).
  void validate() const;

  friend bool operator==(const WorkloadMix&, const WorkloadMix&) = default;
};

// Table of the 15 training mixes (unimodal, bimodal, trimodal).
std::vector<WorkloadMix> training_workloads();

// The 24 progressively shifting test mixes, in replay order.
std::vector<WorkloadMix> test_workloads();

// Workload file: one `v,r,q,w,s,delete_fraction` line per mix.
void write_workload_file(const std::filesystem::path& path, const std::vector<WorkloadMix>& mixes);
std::vector<WorkloadMix> read_workload_file(const std::filesystem::path& path);
std::string format_workload_line(const WorkloadMix& mix);
WorkloadMix parse_workload_line(const std::string& line);

enum class KeyDistributionKind { Uniform, Zipfian };

struct KeyDistribution {
  KeyDistributionKind kind = KeyDistributionKind::Uniform;
  double theta = 0.99;  // Zipfian skew, [0, 0.99]
  std::uint64_t seed = 1;
};

// The loaded key pool. Index i in [0, size) maps to a distinct 63-bit key;
// absent keys always carry the top bit, so they never collide with it.
struct KeyUniverse {
  std::uint64_t size = 0;

  static std::uint64_t key_at(std::uint64_t index) noexcept;
  static std::uint64_t absent_key(std::uint64_t random_bits) noexcept;
  static bool is_absent(std::uint64_t key) noexcept { return (key >> 63) != 0; }
};

// Deterministic 64-bit generator with a portable uniform-real conversion.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept;
  double uniform() noexcept;                       // [0, 1)
  std::uint64_t below(std::uint64_t n) noexcept;   // [0, n)

 private:
  std::uint64_t state_;
};

// YCSB bounded Zipfian over ranks [0, n). Rank 0 is the most popular.
class ZipfianGenerator {
 public:
  ZipfianGenerator(std::uint64_t n, double theta);

  std::uint64_t sample(Rng& rng) const noexcept;
  std::uint64_t items() const noexcept { return n_; }

 private:
  std::uint64_t n_;
  double theta_;
  double alpha_;
  double zetan_;
  double eta_;
};

enum class OpKind : std::uint8_t { PointGetAbsent, PointGetExisting, RangeGet, Put, Delete };
inline constexpr std::size_t kOpKindCount = 5;

struct Operation {
  OpKind kind;
  std::uint64_t key;
  std::uint32_t length = 0;  // entries requested by RangeGet
};

struct OperationStream {
  std::vector<Operation> ops;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return ops.size(); }
};

// Draws `count` i.i.d. operations with probabilities (v, r, q, w). Existing
// keys and write targets follow `dist` over the universe's ranks; range
// starts are uniform over existing keys.
OperationStream generate_stream(const WorkloadMix& mix, const KeyDistribution& dist,
                                std::uint64_t count, const KeyUniverse& universe);

// Value payload of a put, a pure function of (key, stamp).
std::string make_value(std::uint64_t key, std::uint64_t stamp, std::size_t bytes);

}  // namespace camal
