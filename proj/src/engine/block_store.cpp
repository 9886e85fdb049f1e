#include "camal/block_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include "camal/analytic_model.hpp"
#include "camal/errors.hpp"

namespace camal {

namespace {

template <typename T>
void store_le(std::uint8_t* out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out[i] = static_cast<std::uint8_t>(value >> (8 * i));
}

template <typename T>
T load_le(const std::uint8_t* in) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(in[i]) << (8 * i);
  return value;
}

class MemoryStore final : public BlockStore {
 public:
  void write_run(const RunDescriptor& run, std::span<const BlockPtr> blocks,
                 const BloomFilter& filter) override {
    runs_[run.id] = Stored{{blocks.begin(), blocks.end()}, filter};
  }

  BlockPtr read_block(std::uint64_t run_id, std::uint32_t index) override {
    const auto it = runs_.find(run_id);
    if (it == runs_.end() || index >= it->second.blocks.size()) {
      throw StorageError("read of unknown block " + std::to_string(run_id) + ":" +
                         std::to_string(index));
    }
    return it->second.blocks[index];
  }

  BloomFilter read_filter(std::uint64_t run_id) override {
    const auto it = runs_.find(run_id);
    if (it == runs_.end()) throw StorageError("unknown run " + std::to_string(run_id));
    return it->second.filter;
  }

  void drop_run(std::uint64_t run_id) override { runs_.erase(run_id); }

  void register_run(const RunDescriptor& run) override {
    if (!runs_.contains(run.id)) throw StorageError("memory store cannot reattach runs");
  }

  void save_manifest(std::string_view text) override { manifest_ = std::string(text); }
  std::optional<std::string> load_manifest() override { return manifest_; }

 private:
  struct Stored {
    std::vector<BlockPtr> blocks;
    BloomFilter filter;
  };
  std::unordered_map<std::uint64_t, Stored> runs_;
  std::optional<std::string> manifest_;
};

class FileHandle {
 public:
  FileHandle() = default;
  explicit FileHandle(int fd) : fd_(fd) {}
  FileHandle(FileHandle&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  FileHandle& operator=(FileHandle&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  FileHandle(const FileHandle&) = delete;
  FileHandle& operator=(const FileHandle&) = delete;
  ~FileHandle() { reset(); }

  int get() const noexcept { return fd_; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

class FileStore final : public BlockStore {
 public:
  FileStore(std::filesystem::path dir, std::uint64_t block_bytes)
      : dir_(std::move(dir)), block_bytes_(block_bytes) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) {
      throw StorageError("cannot create storage directory " + dir_.string());
    }
    const auto probe = dir_ / ".probe";
    std::ofstream out(probe);
    if (!out) throw StorageError("storage directory is not writable: " + dir_.string());
    out.close();
    std::filesystem::remove(probe, ec);
  }

  void write_run(const RunDescriptor& run, std::span<const BlockPtr> blocks,
                 const BloomFilter& filter) override {
    const auto data_path = path_for(run, ".dat");
    {
      std::ofstream out(data_path, std::ios::binary | std::ios::trunc);
      if (!out) throw StorageError("cannot create " + data_path.string());
      for (const auto& block : blocks) {
        const auto image = encode_block(*block, block_bytes_);
        out.write(reinterpret_cast<const char*>(image.data()),
                  static_cast<std::streamsize>(image.size()));
      }
      if (!out) throw StorageError("write failed: " + data_path.string());
    }
    write_filter(run, filter);
    register_run(run);
  }

  BlockPtr read_block(std::uint64_t run_id, std::uint32_t index) override {
    const auto it = runs_.find(run_id);
    if (it == runs_.end() || index >= it->second.desc.blocks) {
      throw StorageError("read of unknown block " + std::to_string(run_id) + ":" +
                         std::to_string(index));
    }
    std::vector<std::uint8_t> image(block_bytes_);
    const auto offset = static_cast<off_t>(index) * static_cast<off_t>(block_bytes_);
    std::size_t done = 0;
    while (done < image.size()) {
      const ssize_t n = ::pread(it->second.fd.get(), image.data() + done, image.size() - done,
                                offset + static_cast<off_t>(done));
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw StorageError("short read from run " + std::to_string(run_id));
      done += static_cast<std::size_t>(n);
    }
    return std::make_shared<const Block>(decode_block(image));
  }

  BloomFilter read_filter(std::uint64_t run_id) override {
    const auto it = runs_.find(run_id);
    if (it == runs_.end()) throw StorageError("unknown run " + std::to_string(run_id));
    const auto path = path_for(it->second.desc, ".flt");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>()};
    return BloomFilter::deserialize(bytes);
  }

  void drop_run(std::uint64_t run_id) override {
    const auto it = runs_.find(run_id);
    if (it == runs_.end()) return;
    std::error_code ec;
    std::filesystem::remove(path_for(it->second.desc, ".dat"), ec);
    std::filesystem::remove(path_for(it->second.desc, ".flt"), ec);
    runs_.erase(it);
  }

  void register_run(const RunDescriptor& run) override {
    const auto path = path_for(run, ".dat");
    const int fd = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) throw StorageError("cannot open " + path.string() + ": " + std::strerror(errno));
    runs_.insert_or_assign(run.id, Open{run, FileHandle(fd)});
  }

  void save_manifest(std::string_view text) override {
    const auto tmp = dir_ / "MANIFEST.tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw StorageError("cannot write " + tmp.string());
      out << text;
      if (!out) throw StorageError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, dir_ / "MANIFEST", ec);
    if (ec) throw StorageError("cannot install MANIFEST: " + ec.message());
  }

  std::optional<std::string> load_manifest() override {
    std::ifstream in(dir_ / "MANIFEST");
    if (!in) return std::nullopt;
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
  }

 private:
  struct Open {
    RunDescriptor desc;
    FileHandle fd;
  };

  std::filesystem::path path_for(const RunDescriptor& run, const char* ext) const {
    return dir_ / ("run-" + std::to_string(run.level) + "-" + std::to_string(run.id) + ext);
  }

  void write_filter(const RunDescriptor& run, const BloomFilter& filter) {
    const auto path = path_for(run, ".flt");
    const auto bytes = filter.serialize();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StorageError("write failed: " + path.string());
  }

  std::filesystem::path dir_;
  std::uint64_t block_bytes_;
  std::unordered_map<std::uint64_t, Open> runs_;
};

}  // namespace

std::unique_ptr<BlockStore> make_memory_store() { return std::make_unique<MemoryStore>(); }

std::unique_ptr<BlockStore> make_file_store(const std::filesystem::path& dir,
                                            std::uint64_t block_bytes) {
  return std::make_unique<FileStore>(dir, block_bytes);
}

std::vector<std::uint8_t> encode_block(const Block& block, std::uint64_t block_bytes) {
  std::vector<std::uint8_t> image(block_bytes, 0);
  if (block.entries.size() > 0xffff) throw StorageError("too many records for one block");
  store_le<std::uint16_t>(image.data(), static_cast<std::uint16_t>(block.entries.size()));
  std::size_t pos = kBlockHeaderBytes;
  for (const auto& e : block.entries) {
    const std::size_t need = kRecordOverheadBytes + e.value.size();
    if (pos + need > block_bytes) throw StorageError("records exceed the block size");
    image[pos] = e.tombstone ? 1 : 0;
    store_le<std::uint64_t>(image.data() + pos + 1, e.key);
    store_le<std::uint32_t>(image.data() + pos + 9, static_cast<std::uint32_t>(e.value.size()));
    std::memcpy(image.data() + pos + kRecordOverheadBytes, e.value.data(), e.value.size());
    pos += need;
  }
  return image;
}

Block decode_block(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kBlockHeaderBytes) throw StorageError("truncated block");
  Block block;
  const auto count = load_le<std::uint16_t>(bytes.data());
  block.entries.reserve(count);
  std::size_t pos = kBlockHeaderBytes;
  for (std::uint16_t i = 0; i < count; ++i) {
    if (pos + kRecordOverheadBytes > bytes.size()) throw StorageError("corrupt block");
    Entry e;
    e.tombstone = bytes[pos] != 0;
    e.key = load_le<std::uint64_t>(bytes.data() + pos + 1);
    const auto len = load_le<std::uint32_t>(bytes.data() + pos + 9);
    pos += kRecordOverheadBytes;
    if (pos + len > bytes.size()) throw StorageError("corrupt block");
    e.value.assign(reinterpret_cast<const char*>(bytes.data() + pos), len);
    pos += len;
    block.entries.push_back(std::move(e));
  }
  return block;
}

}  // namespace camal
