#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "camal/bloom_filter.hpp"

namespace camal {

struct Entry {
  std::uint64_t key = 0;
  bool tombstone = false;
  std::string value;
};

struct Block {
  std::vector<Entry> entries;
};

using BlockPtr = std::shared_ptr<const Block>;

struct RunDescriptor {
  std::uint64_t id = 0;
  std::uint32_t level = 0;
  std::uint32_t blocks = 0;
};

// Backing storage for sorted runs. The tree charges one I/O per block passed
// to write_run and per read_block call; the store itself does no accounting.
class BlockStore {
 public:
  virtual ~BlockStore() = default;

  virtual void write_run(const RunDescriptor& run, std::span<const BlockPtr> blocks,
                         const BloomFilter& filter) = 0;
  virtual BlockPtr read_block(std::uint64_t run_id, std::uint32_t index) = 0;
  virtual BloomFilter read_filter(std::uint64_t run_id) = 0;
  virtual void drop_run(std::uint64_t run_id) = 0;

  // Reattaches a run listed in a persisted manifest.
  virtual void register_run(const RunDescriptor& run) = 0;

  virtual void save_manifest(std::string_view text) = 0;
  virtual std::optional<std::string> load_manifest() = 0;
};

// Blocks kept as decoded objects in memory.
std::unique_ptr<BlockStore> make_memory_store();

// Directory with MANIFEST, run-<level>-<seq>.dat and run-<level>-<seq>.flt.
std::unique_ptr<BlockStore> make_file_store(const std::filesystem::path& dir,
                                            std::uint64_t block_bytes);

// Fixed-size little-endian block image; throws StorageError if the records
// do not fit in block_bytes.
std::vector<std::uint8_t> encode_block(const Block& block, std::uint64_t block_bytes);
Block decode_block(std::span<const std::uint8_t> bytes);

}  // namespace camal
