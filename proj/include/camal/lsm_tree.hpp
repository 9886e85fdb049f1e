#pragma once

#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "camal/analytic_model.hpp"
#include "camal/block_store.hpp"
#include "camal/bloom_filter.hpp"
#include "camal/cost_sample.hpp"
#include "camal/workload.hpp"

namespace camal {

struct EngineOptions {
  // Empty path keeps every block in memory.
  std::filesystem::path storage_path;
  std::uint64_t seed = 0x5eed;
  // Simulated device time added to each operation's latency per block moved.
  double device_read_ns = 0.0;
  double device_write_ns = 0.0;
};

struct RunInfo {
  std::uint64_t id = 0;
  std::uint64_t entries = 0;
  std::uint32_t blocks = 0;
  double bits_per_key = 0.0;
};

struct LevelInfo {
  std::uint32_t level = 0;  // 1-based
  std::uint64_t capacity_entries = 0;
  std::uint64_t entries = 0;
  std::vector<RunInfo> runs;  // newest first
};

// (M_b / E) * (T - 1) * T^(level - 1), saturating.
std::uint64_t level_capacity_entries(const Environment& env, std::uint32_t size_ratio,
                                     std::uint64_t buffer_bytes, std::uint32_t level);

class LsmTree {
 public:
  // Reopens the tree persisted under options.storage_path when a MANIFEST is
  // present (its recorded configs win over `cfg`); otherwise starts empty.
  static std::unique_ptr<LsmTree> open(const Environment& env, const LsmConfig& cfg,
                                       EngineOptions options = {});
  // Same, over a caller-supplied store.
  static std::unique_ptr<LsmTree> open(const Environment& env, const LsmConfig& cfg,
                                       std::unique_ptr<BlockStore> store,
                                       EngineOptions options = {});

  LsmTree(const LsmTree&) = delete;
  LsmTree& operator=(const LsmTree&) = delete;
  ~LsmTree();

  void put(std::uint64_t key, std::string_view value);
  void remove(std::uint64_t key);
  std::optional<std::string> get(std::uint64_t key);
  std::vector<std::pair<std::uint64_t, std::string>> range(std::uint64_t start,
                                                            std::uint64_t count);

  // Executes the stream and reports the counters of this window. Puts write
  // env.value_bytes() of deterministic payload. Per-operation latencies are
  // appended to `latencies` when given.
  CostSample run_workload(const OperationStream& stream, std::vector<double>* latencies = nullptr);

  // Records a new target. Level capacities shrink to it as levels take part
  // in compactions and grow to it at the next flush, the buffer resizes at
  // the next flush, new runs get filters sized from the target, and the
  // cache resizes now.
  void set_target_config(const LsmConfig& cfg);

  void flush();
  // Flushes the buffer and persists the MANIFEST.
  void close();

  const Environment& env() const noexcept { return env_; }
  const LsmConfig& active_config() const noexcept { return active_; }
  const LsmConfig& target_config() const noexcept { return target_; }
  bool converged() const noexcept { return active_ == target_; }

  const IoStats& stats() const noexcept { return stats_; }
  void reset_stats() noexcept { stats_ = {}; }

  std::vector<LevelInfo> levels() const;
  std::uint64_t buffer_entries() const noexcept { return buffer_.size(); }
  std::uint64_t buffer_capacity_entries() const noexcept { return buffer_capacity_; }
  std::size_t cache_capacity_blocks() const noexcept { return cache_.capacity(); }

 private:
  struct Run {
    std::uint64_t id = 0;
    std::uint32_t level = 0;
    std::uint64_t entries = 0;
    std::vector<std::uint64_t> fences;  // first key of every block
    std::uint64_t max_key = 0;
    BloomFilter filter;
    double bits_per_key = 0.0;
  };
  using RunPtr = std::shared_ptr<Run>;

  struct Level {
    std::vector<RunPtr> runs;  // newest first
    std::uint64_t capacity = 0;
    std::uint64_t entries() const noexcept;
  };

  struct BufferValue {
    bool tombstone = false;
    std::string value;
  };

  class BlockCache {
   public:
    explicit BlockCache(std::size_t capacity = 0) : capacity_(capacity) {}
    BlockPtr find(std::uint64_t run, std::uint32_t block);
    void insert(std::uint64_t run, std::uint32_t block, BlockPtr data);
    void erase_run(std::uint64_t run);
    void resize(std::size_t capacity);
    std::size_t capacity() const noexcept { return capacity_; }

   private:
    using Key = std::pair<std::uint64_t, std::uint32_t>;
    struct KeyHash {
      std::size_t operator()(const Key& k) const noexcept {
        return std::hash<std::uint64_t>{}(k.first * 0x9e3779b97f4a7c15ULL ^ k.second);
      }
    };
    std::size_t capacity_;
    std::list<std::pair<Key, BlockPtr>> lru_;
    std::unordered_map<Key, std::list<std::pair<Key, BlockPtr>>::iterator, KeyHash> index_;
  };

  LsmTree(const Environment& env, const LsmConfig& cfg, std::unique_ptr<BlockStore> store,
          EngineOptions options);

  void write(std::uint64_t key, bool tombstone, std::string_view value);
  void compact_from(std::size_t level);
  void compact_level(std::size_t level);
  void absorb_deeper_levels();
  // Merges `inputs` (newest first) into one run installed at the front of
  // `out`, replacing `consumed`.
  void merge_and_install(std::size_t out, std::vector<std::vector<Entry>> inputs,
                         const std::vector<RunPtr>& consumed);
  std::vector<Entry> read_all(const Run& run);
  BlockPtr fetch(const Run& run, std::uint32_t block);
  void drop(const RunPtr& run);
  void retire_config_if_converged();
  std::uint64_t target_capacity(std::size_t level) const;
  bool over_capacity(std::size_t level) const;
  void count_op(OpKind kind) noexcept { ++stats_.op_counts[static_cast<std::size_t>(kind)]; }

  std::string manifest_text() const;
  void load_manifest(const std::string& text);

  Environment env_;
  LsmConfig active_;
  LsmConfig target_;
  EngineOptions options_;
  std::unique_ptr<BlockStore> store_;
  std::map<std::uint64_t, BufferValue> buffer_;
  std::uint64_t buffer_capacity_ = 1;
  std::vector<Level> levels_;
  BlockCache cache_;
  IoStats stats_;
  std::uint64_t next_run_id_ = 1;
  std::uint64_t write_stamp_ = 0;
  bool closed_ = false;
  bool reshape_pending_ = false;
};

}  // namespace camal
