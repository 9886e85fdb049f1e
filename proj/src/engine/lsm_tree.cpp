#include "camal/lsm_tree.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "camal/errors.hpp"
#include "camal/monkey.hpp"

namespace camal {

namespace {

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool entry_less(const Entry& e, std::uint64_t key) noexcept { return e.key < key; }

}  // namespace

std::uint64_t level_capacity_entries(const Environment& env, std::uint32_t size_ratio,
                                     std::uint64_t buffer_bytes, std::uint32_t level) {
  if (size_ratio < 2 || level == 0 || env.E == 0) throw ConfigError("bad level capacity query");
  constexpr unsigned __int128 kCap = std::numeric_limits<std::uint64_t>::max() / 2;
  unsigned __int128 bytes = static_cast<unsigned __int128>(buffer_bytes) * (size_ratio - 1);
  for (std::uint32_t i = 1; i < level && bytes < kCap * env.E; ++i) bytes *= size_ratio;
  const unsigned __int128 entries = bytes / env.E;
  return entries > kCap ? static_cast<std::uint64_t>(kCap) : static_cast<std::uint64_t>(entries);
}

// ---- block cache ----

BlockPtr LsmTree::BlockCache::find(std::uint64_t run, std::uint32_t block) {
  const auto it = index_.find({run, block});
  if (it == index_.end()) return nullptr;
  lru_.splice(lru_.begin(), lru_, it->second);
  return it->second->second;
}

void LsmTree::BlockCache::insert(std::uint64_t run, std::uint32_t block, BlockPtr data) {
  if (capacity_ == 0) return;
  const Key key{run, block};
  if (auto it = index_.find(key); it != index_.end()) {
    it->second->second = std::move(data);
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  lru_.emplace_front(key, std::move(data));
  index_[key] = lru_.begin();
  resize(capacity_);
}

void LsmTree::BlockCache::erase_run(std::uint64_t run) {
  for (auto it = lru_.begin(); it != lru_.end();) {
    if (it->first.first == run) {
      index_.erase(it->first);
      it = lru_.erase(it);
    } else {
      ++it;
    }
  }
}

void LsmTree::BlockCache::resize(std::size_t capacity) {
  capacity_ = capacity;
  while (lru_.size() > capacity_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
}

// ---- tree ----

std::uint64_t LsmTree::Level::entries() const noexcept {
  std::uint64_t n = 0;
  for (const auto& r : runs) n += r->entries;
  return n;
}

std::unique_ptr<LsmTree> LsmTree::open(const Environment& env, const LsmConfig& cfg,
                                       EngineOptions options) {
  env.validate();
  cfg.validate(env);
  std::unique_ptr<BlockStore> store;
  if (options.storage_path.empty()) {
    store = make_memory_store();
  } else {
    store = make_file_store(options.storage_path, env.block_bytes);
  }
  return open(env, cfg, std::move(store), std::move(options));
}

std::unique_ptr<LsmTree> LsmTree::open(const Environment& env, const LsmConfig& cfg,
                                       std::unique_ptr<BlockStore> store, EngineOptions options) {
  env.validate();
  cfg.validate(env);
  if (!store) throw ConfigError("no block store");
  std::unique_ptr<LsmTree> tree(new LsmTree(env, cfg, std::move(store), std::move(options)));
  if (auto text = tree->store_->load_manifest()) tree->load_manifest(*text);
  return tree;
}

LsmTree::LsmTree(const Environment& env, const LsmConfig& cfg, std::unique_ptr<BlockStore> store,
                 EngineOptions options)
    : env_(env),
      active_(cfg),
      target_(cfg),
      options_(std::move(options)),
      store_(std::move(store)),
      buffer_capacity_(std::max<std::uint64_t>(1, cfg.buffer_bytes / env.E)),
      cache_(cfg.cache_bytes / env.block_bytes) {}

LsmTree::~LsmTree() {
  if (closed_ || options_.storage_path.empty()) return;
  try {
    close();
  } catch (...) {
  }
}

void LsmTree::put(std::uint64_t key, std::string_view value) {
  count_op(OpKind::Put);
  write(key, false, value);
}

void LsmTree::remove(std::uint64_t key) {
  count_op(OpKind::Delete);
  write(key, true, {});
}

void LsmTree::write(std::uint64_t key, bool tombstone, std::string_view value) {
  if (value.size() > env_.value_bytes()) {
    throw ConfigError("value of " + std::to_string(value.size()) + " bytes exceeds the " +
                      std::to_string(env_.value_bytes()) + "-byte record payload");
  }
  auto& slot = buffer_[key];
  slot.tombstone = tombstone;
  slot.value.assign(value);
  if (buffer_.size() >= buffer_capacity_) flush();
}

std::optional<std::string> LsmTree::get(std::uint64_t key) {
  auto result = [&]() -> std::optional<std::string> {
    if (const auto it = buffer_.find(key); it != buffer_.end()) {
      if (it->second.tombstone) return std::nullopt;
      return it->second.value;
    }
    for (const auto& level : levels_) {
      for (const auto& run : level.runs) {
        if (key < run->fences.front()) continue;
        if (run->filter.enabled()) {
          ++stats_.filter_probes;
          if (!run->filter.may_contain(key)) continue;
        }
        const auto b = static_cast<std::uint32_t>(
            std::upper_bound(run->fences.begin(), run->fences.end(), key) - run->fences.begin() -
            1);
        const auto block = fetch(*run, b);
        const auto it =
            std::lower_bound(block->entries.begin(), block->entries.end(), key, entry_less);
        if (it != block->entries.end() && it->key == key) {
          if (it->tombstone) return std::nullopt;
          return it->value;
        }
        if (run->filter.enabled()) ++stats_.filter_false_positives;
      }
    }
    return std::nullopt;
  }();
  count_op(result ? OpKind::PointGetExisting : OpKind::PointGetAbsent);
  return result;
}

std::vector<std::pair<std::uint64_t, std::string>> LsmTree::range(std::uint64_t start,
                                                                   std::uint64_t count) {
  count_op(OpKind::RangeGet);
  std::vector<std::pair<std::uint64_t, std::string>> out;
  if (count == 0) return out;

  // One cursor per overlapping run. An unloaded cursor knows only a lower
  // bound on its next key (the start key or the next block's fence), so a
  // block is fetched only once the merge actually reaches it.
  struct Cursor {
    const Run* run;
    std::uint32_t block;
    BlockPtr data;
    std::size_t pos = 0;
    std::uint64_t head = 0;
    bool done = false;
  };
  std::vector<Cursor> cursors;
  for (const auto& level : levels_) {
    for (const auto& run : level.runs) {
      if (run->max_key < start) continue;
      Cursor c{run.get(), 0, nullptr};
      if (start >= run->fences.front()) {
        c.block = static_cast<std::uint32_t>(
            std::upper_bound(run->fences.begin(), run->fences.end(), start) -
            run->fences.begin() - 1);
      }
      c.head = std::max(start, run->fences[c.block]);
      cursors.push_back(std::move(c));
    }
  }
  auto buf = buffer_.lower_bound(start);

  auto advance = [&](Cursor& c) {
    if (++c.pos < c.data->entries.size()) {
      c.head = c.data->entries[c.pos].key;
      return;
    }
    c.data.reset();
    if (++c.block < c.run->fences.size()) {
      c.head = c.run->fences[c.block];
    } else {
      c.done = true;
    }
  };
  auto load = [&](Cursor& c) {
    c.data = fetch(*c.run, c.block);
    const auto& es = c.data->entries;
    c.pos = static_cast<std::size_t>(std::lower_bound(es.begin(), es.end(), start, entry_less) -
                                     es.begin());
    if (c.pos < es.size()) {
      c.head = es[c.pos].key;
    } else {
      c.pos = es.size() - 1;
      advance(c);
    }
  };

  while (out.size() < count) {
    bool any = buf != buffer_.end();
    std::uint64_t smallest = any ? buf->first : 0;
    for (const auto& c : cursors) {
      if (!c.done && (!any || c.head < smallest)) {
        smallest = c.head;
        any = true;
      }
    }
    if (!any) break;
    // An unloaded cursor only bounds its next key, so resolve those first.
    Cursor* pending = nullptr;
    for (auto& c : cursors) {
      if (!c.done && !c.data && c.head == smallest) {
        pending = &c;
        break;
      }
    }
    if (pending) {
      load(*pending);
      continue;
    }
    // Every source positioned at `smallest` is loaded; the newest one wins.
    bool emitted = false;
    if (buf != buffer_.end() && buf->first == smallest) {
      if (!buf->second.tombstone) out.emplace_back(smallest, buf->second.value);
      emitted = true;
      ++buf;
    }
    for (auto& c : cursors) {
      if (c.done || c.head != smallest) continue;
      if (!emitted) {
        const auto& e = c.data->entries[c.pos];
        if (!e.tombstone) out.emplace_back(e.key, e.value);
        emitted = true;
      }
      advance(c);
    }
  }
  return out;
}

BlockPtr LsmTree::fetch(const Run& run, std::uint32_t block) {
  if (auto hit = cache_.find(run.id, block)) {
    ++stats_.cache_hits;
    return hit;
  }
  ++stats_.blocks_read;
  auto data = store_->read_block(run.id, block);
  cache_.insert(run.id, block, data);
  return data;
}

std::vector<Entry> LsmTree::read_all(const Run& run) {
  std::vector<Entry> entries;
  entries.reserve(run.entries);
  for (std::uint32_t b = 0; b < run.fences.size(); ++b) {
    const auto block = store_->read_block(run.id, b);
    ++stats_.blocks_read;
    ++stats_.compaction_blocks_read;
    entries.insert(entries.end(), block->entries.begin(), block->entries.end());
  }
  return entries;
}

void LsmTree::drop(const RunPtr& run) {
  cache_.erase_run(run->id);
  store_->drop_run(run->id);
}

std::uint64_t LsmTree::target_capacity(std::size_t level) const {
  return level_capacity_entries(env_, target_.size_ratio, target_.buffer_bytes,
                                static_cast<std::uint32_t>(level + 1));
}

bool LsmTree::over_capacity(std::size_t level) const {
  const auto& l = levels_[level];
  if (l.entries() > l.capacity) return true;
  return target_.policy == Policy::Tiering && l.runs.size() >= target_.size_ratio;
}

void LsmTree::flush() {
  if (buffer_.empty()) return;
  ++stats_.flushes;
  buffer_capacity_ = std::max<std::uint64_t>(1, target_.buffer_bytes / env_.E);
  if (levels_.empty()) levels_.push_back(Level{{}, 0});
  levels_[0].capacity = target_capacity(0);

  std::vector<Entry> fresh;
  fresh.reserve(buffer_.size());
  for (auto& [key, v] : buffer_) fresh.push_back(Entry{key, v.tombstone, std::move(v.value)});
  buffer_.clear();

  std::vector<std::vector<Entry>> inputs;
  inputs.push_back(std::move(fresh));
  std::vector<RunPtr> consumed;
  if (target_.policy == Policy::Leveling) {
    for (const auto& run : levels_[0].runs) {
      inputs.push_back(read_all(*run));
      consumed.push_back(run);
    }
  }
  merge_and_install(0, std::move(inputs), consumed);
  compact_from(0);
  // Growing a level moves no data, so it need not wait for a compaction.
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    levels_[i].capacity = std::max(levels_[i].capacity, target_capacity(i));
  }
  if (reshape_pending_ && target_.policy == Policy::Leveling) absorb_deeper_levels();
  reshape_pending_ = false;
  retire_config_if_converged();
}

// After a ratio or buffer increase the deeper levels can hold data that the
// target shape would keep higher up; nothing ever compacts into them again.
// On the first flush under a new target, fold them into the shallowest level
// that can hold everything from there down. Only then: in a static tree,
// deduplication can shrink the deeper levels enough to pass the same test.
void LsmTree::absorb_deeper_levels() {
  for (std::size_t i = 0; i + 1 < levels_.size(); ++i) {
    std::uint64_t below = 0;
    for (std::size_t j = i + 1; j < levels_.size(); ++j) below += levels_[j].entries();
    if (below == 0) return;
    if (levels_[i].entries() + below > levels_[i].capacity) continue;
    ++stats_.compactions;
    std::vector<std::vector<Entry>> inputs;
    std::vector<RunPtr> consumed;
    for (std::size_t j = i; j < levels_.size(); ++j) {
      for (const auto& run : levels_[j].runs) {
        inputs.push_back(read_all(*run));
        consumed.push_back(run);
      }
    }
    for (const auto& run : consumed) {
      auto& runs = levels_[run->level - 1].runs;
      runs.erase(std::find(runs.begin(), runs.end(), run));
      drop(run);
    }
    levels_.resize(i + 1);
    merge_and_install(i, std::move(inputs), {});
    return;
  }
}

void LsmTree::compact_from(std::size_t level) {
  for (std::size_t i = level; i < levels_.size(); ++i) {
    if (over_capacity(i)) compact_level(i);
  }
}

void LsmTree::compact_level(std::size_t level) {
  ++stats_.compactions;
  if (level + 1 == levels_.size()) levels_.push_back(Level{{}, 0});
  levels_[level].capacity = target_capacity(level);
  levels_[level + 1].capacity = target_capacity(level + 1);

  std::vector<std::vector<Entry>> inputs;
  std::vector<RunPtr> consumed;
  for (const auto& run : levels_[level].runs) {
    inputs.push_back(read_all(*run));
    consumed.push_back(run);
  }
  if (target_.policy == Policy::Leveling) {
    for (const auto& run : levels_[level + 1].runs) {
      inputs.push_back(read_all(*run));
      consumed.push_back(run);
    }
  }
  merge_and_install(level + 1, std::move(inputs), consumed);
}

void LsmTree::merge_and_install(std::size_t out, std::vector<std::vector<Entry>> inputs,
                                const std::vector<RunPtr>& consumed) {
  for (const auto& run : consumed) {
    auto& runs = levels_[run->level - 1].runs;
    runs.erase(std::find(runs.begin(), runs.end(), run));
    drop(run);
  }
  const bool drop_tombstones = out + 1 == levels_.size() && levels_[out].runs.empty();

  // k-way merge; on equal keys the lowest input index (newest) wins.
  std::vector<std::size_t> pos(inputs.size(), 0);
  std::vector<std::pair<std::uint64_t, std::size_t>> heap;
  auto cmp = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  };
  std::size_t total = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    total += inputs[i].size();
    if (!inputs[i].empty()) heap.emplace_back(inputs[i][0].key, i);
  }
  std::make_heap(heap.begin(), heap.end(), cmp);
  std::vector<Entry> merged;
  merged.reserve(total);
  bool have_last = false;
  std::uint64_t last = 0;
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    const auto [key, src] = heap.back();
    heap.pop_back();
    Entry& e = inputs[src][pos[src]];
    if (!have_last || key != last) {
      if (!(drop_tombstones && e.tombstone)) merged.push_back(std::move(e));
      have_last = true;
      last = key;
    }
    if (++pos[src] < inputs[src].size()) {
      heap.emplace_back(inputs[src][pos[src]].key, src);
      std::push_heap(heap.begin(), heap.end(), cmp);
    }
  }
  if (merged.empty()) {
    while (!levels_.empty() && levels_.back().runs.empty() && levels_.size() > out + 1) {
      levels_.pop_back();
    }
    return;
  }

  auto run = std::make_shared<Run>();
  run->id = next_run_id_++;
  run->level = static_cast<std::uint32_t>(out + 1);
  run->entries = merged.size();
  run->max_key = merged.back().key;

  std::vector<std::uint64_t> sizes(levels_.size(), 0);
  for (std::size_t i = 0; i < levels_.size(); ++i) sizes[i] = levels_[i].entries();
  sizes[out] += merged.size();
  run->bits_per_key = monkey_allocate(target_.filter_bytes, sizes)[out];
  run->filter = BloomFilter(merged.size(), run->bits_per_key, mix_seed(options_.seed ^ run->id));

  std::vector<BlockPtr> blocks;
  blocks.reserve((merged.size() + env_.B - 1) / env_.B);
  for (std::size_t i = 0; i < merged.size(); i += env_.B) {
    auto block = std::make_shared<Block>();
    const std::size_t end = std::min<std::size_t>(merged.size(), i + env_.B);
    block->entries.reserve(end - i);
    for (std::size_t j = i; j < end; ++j) {
      run->filter.add(merged[j].key);
      block->entries.push_back(std::move(merged[j]));
    }
    run->fences.push_back(block->entries.front().key);
    blocks.push_back(std::move(block));
  }
  store_->write_run(RunDescriptor{run->id, run->level, static_cast<std::uint32_t>(blocks.size())},
                    blocks, run->filter);
  stats_.blocks_written += blocks.size();
  auto& runs = levels_[out].runs;
  runs.insert(runs.begin(), std::move(run));
}

void LsmTree::set_target_config(const LsmConfig& cfg) {
  cfg.validate(env_);
  if (cfg != target_) reshape_pending_ = true;
  target_ = cfg;
  cache_.resize(cfg.cache_bytes / env_.block_bytes);
  retire_config_if_converged();
}

void LsmTree::retire_config_if_converged() {
  if (active_ == target_) return;
  if (buffer_capacity_ != std::max<std::uint64_t>(1, target_.buffer_bytes / env_.E)) return;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].capacity != target_capacity(i)) return;
  }
  active_ = target_;
}

CostSample LsmTree::run_workload(const OperationStream& stream, std::vector<double>* sink) {
  using Clock = std::chrono::steady_clock;
  const IoStats before = stats_;
  std::vector<double> latencies;
  latencies.reserve(stream.size());
  const std::size_t value_bytes = env_.value_bytes();
  for (const auto& op : stream.ops) {
    const auto reads = stats_.blocks_read;
    const auto writes = stats_.blocks_written;
    const auto t0 = Clock::now();
    switch (op.kind) {
      case OpKind::PointGetAbsent:
      case OpKind::PointGetExisting:
        (void)get(op.key);
        break;
      case OpKind::RangeGet:
        (void)range(op.key, op.length);
        break;
      case OpKind::Put:
        put(op.key, make_value(op.key, ++write_stamp_, value_bytes));
        break;
      case OpKind::Delete:
        remove(op.key);
        break;
    }
    const auto wall =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count();
    stats_.wall_ns += static_cast<std::uint64_t>(wall);
    const double device =
        options_.device_read_ns * static_cast<double>(stats_.blocks_read - reads) +
        options_.device_write_ns * static_cast<double>(stats_.blocks_written - writes);
    latencies.push_back(static_cast<double>(wall) + device);
  }

  if (sink) sink->insert(sink->end(), latencies.begin(), latencies.end());
  CostSample sample;
  sample.config = active_;
  sample.env = env_;
  sample.seed = stream.seed;
  sample.io = stats_ - before;
  if (!latencies.empty()) {
    const double n = static_cast<double>(latencies.size());
    double sum = 0.0;
    for (double l : latencies) sum += l;
    sample.mean_latency_ns = sum / n;
    // Nearest-rank 90th percentile.
    const std::size_t rank =
        static_cast<std::size_t>(std::ceil(0.9 * n)) - 1;
    std::nth_element(latencies.begin(), latencies.begin() + static_cast<std::ptrdiff_t>(rank),
                     latencies.end());
    sample.p90_latency_ns = latencies[rank];
    sample.io_per_op =
        static_cast<double>(sample.io.blocks_read + sample.io.blocks_written) / n;
  }
  return sample;
}

std::vector<LevelInfo> LsmTree::levels() const {
  std::vector<LevelInfo> out;
  out.reserve(levels_.size());
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    LevelInfo info;
    info.level = static_cast<std::uint32_t>(i + 1);
    info.capacity_entries = levels_[i].capacity;
    info.entries = levels_[i].entries();
    for (const auto& r : levels_[i].runs) {
      info.runs.push_back(RunInfo{r->id, r->entries, static_cast<std::uint32_t>(r->fences.size()),
                                  r->bits_per_key});
    }
    out.push_back(std::move(info));
  }
  return out;
}

// ---- persistence ----

namespace {

void write_config(std::ostream& out, const char* tag, const LsmConfig& c) {
  out << tag << ' ' << c.size_ratio << ' ' << policy_name(c.policy) << ' ' << c.buffer_bytes << ' '
      << c.filter_bytes << ' ' << c.cache_bytes << '\n';
}

LsmConfig read_config(std::istream& in) {
  LsmConfig c;
  std::string policy;
  in >> c.size_ratio >> policy >> c.buffer_bytes >> c.filter_bytes >> c.cache_bytes;
  if (!in) throw StorageError("malformed config line in MANIFEST");
  c.policy = parse_policy(policy);
  return c;
}

}  // namespace

void LsmTree::close() {
  flush();
  store_->save_manifest(manifest_text());
  closed_ = true;
}

std::string LsmTree::manifest_text() const {
  std::ostringstream out;
  out << "camal-manifest 1\n";
  out << "env " << env_.N << ' ' << env_.E << ' ' << env_.B << ' ' << env_.M << ' '
      << env_.min_buffer << ' ' << env_.block_bytes << '\n';
  write_config(out, "active", active_);
  write_config(out, "target", target_);
  out << "state " << next_run_id_ << ' ' << buffer_capacity_ << ' ' << write_stamp_ << '\n';
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    out << "level " << i + 1 << ' ' << levels_[i].capacity << '\n';
    // Oldest first so reloading can prepend.
    for (auto it = levels_[i].runs.rbegin(); it != levels_[i].runs.rend(); ++it) {
      char bpk[32];
      std::snprintf(bpk, sizeof bpk, "%.17g", (*it)->bits_per_key);
      out << "run " << (*it)->level << ' ' << (*it)->id << ' ' << (*it)->entries << ' '
          << (*it)->fences.size() << ' ' << bpk << '\n';
    }
  }
  return out.str();
}

void LsmTree::load_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "camal-manifest 1") {
    throw StorageError("unrecognized MANIFEST header");
  }
  levels_.clear();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "env") {
      Environment e;
      ls >> e.N >> e.E >> e.B >> e.M >> e.min_buffer >> e.block_bytes;
      if (!ls || !(e == env_)) throw ConfigError("stored tree was built for another environment");
    } else if (tag == "active") {
      active_ = read_config(ls);
    } else if (tag == "target") {
      target_ = read_config(ls);
    } else if (tag == "state") {
      ls >> next_run_id_ >> buffer_capacity_ >> write_stamp_;
    } else if (tag == "level") {
      std::size_t idx = 0;
      std::uint64_t cap = 0;
      ls >> idx >> cap;
      if (!ls || idx != levels_.size() + 1) throw StorageError("malformed level line in MANIFEST");
      levels_.push_back(Level{{}, cap});
    } else if (tag == "run") {
      auto run = std::make_shared<Run>();
      std::uint32_t blocks = 0;
      ls >> run->level >> run->id >> run->entries >> blocks >> run->bits_per_key;
      if (!ls || run->level != levels_.size() || blocks == 0) {
        throw StorageError("malformed run line in MANIFEST");
      }
      store_->register_run(RunDescriptor{run->id, run->level, blocks});
      run->filter = store_->read_filter(run->id);
      for (std::uint32_t b = 0; b < blocks; ++b) {
        const auto block = store_->read_block(run->id, b);
        if (block->entries.empty()) throw StorageError("empty block in stored run");
        run->fences.push_back(block->entries.front().key);
        if (b + 1 == blocks) run->max_key = block->entries.back().key;
      }
      auto& runs = levels_.back().runs;
      runs.insert(runs.begin(), std::move(run));
    } else {
      throw StorageError("unknown MANIFEST line: " + line);
    }
  }
  cache_.resize(target_.cache_bytes / env_.block_bytes);
}

}  // namespace camal
