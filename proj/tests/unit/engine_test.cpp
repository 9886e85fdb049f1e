#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <random>

#include "camal/block_store.hpp"
#include "camal/errors.hpp"
#include "camal/lsm_tree.hpp"
#include "camal/tuner.hpp"

using namespace camal;

namespace {

Environment env() { return Environment::test_profile(); }

LsmConfig cfg(std::uint32_t t, Policy p, std::uint64_t buffer, std::uint64_t filter,
              std::uint64_t cache = 0) {
  return LsmConfig{t, p, buffer, filter, cache};
}

LsmConfig with_cache(std::uint32_t t, Policy p, std::uint64_t buffer, std::uint64_t cache) {
  return cfg(t, p, buffer, env().M - buffer - cache, cache);
}

// Fills the rest of M with filter memory.
LsmConfig with_buffer(std::uint32_t t, Policy p, std::uint64_t buffer) {
  return cfg(t, p, buffer, env().M - buffer);
}

std::string val(std::uint64_t key, int version = 0) {
  return make_value(key, static_cast<std::uint64_t>(version), env().value_bytes());
}

std::uint64_t run_count(const LsmTree& t) {
  std::uint64_t n = 0;
  for (const auto& l : t.levels()) n += l.runs.size();
  return n;
}

std::uint32_t deepest_level(const LsmTree& t) {
  std::uint32_t d = 0;
  for (const auto& l : t.levels()) {
    if (l.entries > 0) d = l.level;
  }
  return d;
}

// Counts the store traffic the tree causes.
class CountingStore final : public BlockStore {
 public:
  explicit CountingStore(std::uint64_t* reads, std::uint64_t* writes)
      : inner_(make_memory_store()), reads_(reads), writes_(writes) {}
  void write_run(const RunDescriptor& run, std::span<const BlockPtr> blocks,
                 const BloomFilter& filter) override {
    *writes_ += blocks.size();
    inner_->write_run(run, blocks, filter);
  }
  BlockPtr read_block(std::uint64_t run_id, std::uint32_t index) override {
    ++*reads_;
    return inner_->read_block(run_id, index);
  }
  BloomFilter read_filter(std::uint64_t run_id) override { return inner_->read_filter(run_id); }
  void drop_run(std::uint64_t run_id) override { inner_->drop_run(run_id); }
  void register_run(const RunDescriptor& run) override { inner_->register_run(run); }
  void save_manifest(std::string_view text) override { inner_->save_manifest(text); }
  std::optional<std::string> load_manifest() override { return inner_->load_manifest(); }

 private:
  std::unique_ptr<BlockStore> inner_;
  std::uint64_t* reads_;
  std::uint64_t* writes_;
};

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("camal_engine_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Engine, EmptyTreeGetIsNotFound) {
  auto t = LsmTree::open(env(), default_config(env()));
  EXPECT_FALSE(t->get(KeyUniverse::key_at(3)).has_value());
  EXPECT_EQ(t->stats().blocks_read, 0u);
  EXPECT_TRUE(t->range(0, 10).empty());
}

TEST(Engine, RejectsBufferBelowFloor) {
  const auto e = env();
  EXPECT_THROW(LsmTree::open(e, cfg(10, Policy::Leveling, e.min_buffer - 1, e.M - e.min_buffer + 1)),
               ConfigError);
  EXPECT_THROW(LsmTree::open(e, cfg(1, Policy::Leveling, e.M, 0)), ConfigError);
}

TEST(Engine, RecencyAndTombstones) {
  auto t = LsmTree::open(env(), with_buffer(4, Policy::Leveling, 8192));
  const auto k = KeyUniverse::key_at(5);
  t->put(k, val(k, 1));
  t->put(k, val(k, 2));
  EXPECT_EQ(t->get(k), val(k, 2));
  t->remove(k);
  EXPECT_FALSE(t->get(k).has_value());
  // Same again with the versions spread over flushed runs.
  const auto j = KeyUniverse::key_at(6);
  t->put(j, val(j, 1));
  for (std::uint64_t i = 100; i < 400; ++i) t->put(KeyUniverse::key_at(i), val(i));
  t->put(j, val(j, 2));
  for (std::uint64_t i = 400; i < 700; ++i) t->put(KeyUniverse::key_at(i), val(i));
  EXPECT_EQ(t->get(j), val(j, 2));
  t->remove(j);
  for (std::uint64_t i = 700; i < 1000; ++i) t->put(KeyUniverse::key_at(i), val(i));
  EXPECT_FALSE(t->get(j).has_value());
  EXPECT_THROW(t->put(1, std::string(env().value_bytes() + 1, 'x')), ConfigError);
}

TEST(Engine, MatchesOrderedMapReference) {
  for (auto policy : {Policy::Leveling, Policy::Tiering}) {
    auto t = LsmTree::open(env(), with_cache(3, policy, 8192, 16'384));
    std::map<std::uint64_t, std::string> ref;
    std::mt19937_64 gen(policy == Policy::Leveling ? 1 : 2);
    for (int i = 0; i < 20'000; ++i) {
      const std::uint64_t k = KeyUniverse::key_at(gen() % 3000);
      switch (gen() % 4) {
        case 0: {
          auto v = val(k, i);
          t->put(k, v);
          ref[k] = v;
          break;
        }
        case 1:
          t->remove(k);
          ref.erase(k);
          break;
        case 2: {
          const auto it = ref.find(k);
          const auto got = t->get(k);
          ASSERT_EQ(got.has_value(), it != ref.end()) << i;
          if (got) ASSERT_EQ(*got, it->second);
          break;
        }
        default: {
          const std::uint64_t n = 1 + gen() % 20;
          const auto got = t->range(k, n);
          auto it = ref.lower_bound(k);
          std::size_t j = 0;
          for (; j < n && it != ref.end(); ++j, ++it) {
            ASSERT_LT(j, got.size());
            ASSERT_EQ(got[j].first, it->first);
            ASSERT_EQ(got[j].second, it->second);
          }
          ASSERT_EQ(got.size(), j);
        }
      }
    }
  }
}

TEST(Engine, LevelCountMatchesLoadedVolume) {
  const auto e = env();
  for (std::uint32_t T : {3u, 5u}) {
    const std::uint64_t buffer = 8192;
    const std::uint64_t per = buffer / e.E;
    // Exactly L1 + L2 capacity.
    const std::uint64_t n = per * (T - 1) * (1 + T);
    auto t = LsmTree::open(e, with_buffer(T, Policy::Leveling, buffer));
    for (std::uint64_t i = 0; i < n; ++i) t->put(KeyUniverse::key_at(i), val(i));
    t->flush();
    const auto loaded = Environment{n, e.E, e.B, e.M, e.min_buffer, e.block_bytes};
    EXPECT_EQ(deepest_level(*t), level_count(loaded, T, buffer)) << T;
    EXPECT_EQ(deepest_level(*t), 2u);
    // One more buffer's worth spills into a third level.
    for (std::uint64_t i = n; i < n + per; ++i) t->put(KeyUniverse::key_at(i), val(i));
    const auto more = Environment{n + per, e.E, e.B, e.M, e.min_buffer, e.block_bytes};
    EXPECT_EQ(deepest_level(*t), level_count(more, T, buffer)) << T;
    EXPECT_EQ(deepest_level(*t), 3u);
  }
}

TEST(Engine, AbsentLookupWithoutFiltersReadsEveryRun) {
  for (auto policy : {Policy::Leveling, Policy::Tiering}) {
    auto t = LsmTree::open(env(), cfg(3, policy, env().M, 0));
    preload(*t, 20'000);
    t->flush();
    const auto runs = run_count(*t);
    ASSERT_GT(runs, 1u);
    t->reset_stats();
    EXPECT_FALSE(t->get(KeyUniverse::absent_key(77)).has_value());
    EXPECT_EQ(t->stats().blocks_read, runs);
    EXPECT_EQ(t->stats().filter_probes, 0u);
  }
}

TEST(Engine, BufferHitCostsNothing) {
  auto t = LsmTree::open(env(), default_config(env()));
  preload(*t, 5000);
  const auto k = KeyUniverse::key_at(4999);
  ASSERT_GT(t->buffer_entries(), 0u);
  t->reset_stats();
  EXPECT_TRUE(t->get(k).has_value());
  EXPECT_EQ(t->stats().blocks_read, 0u);
}

TEST(Engine, FalsePositiveBlocksAreCached) {
  const auto e = env();
  auto t = LsmTree::open(e, cfg(4, Policy::Leveling, 64 * 1024, 12'500, e.M - 64 * 1024 - 12'500));
  preload(*t, 10'000);
  t->flush();
  std::uint64_t first = 0, second = 0, probes = 0, fps = 0;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const auto k = KeyUniverse::absent_key(i * 0x9e3779b97f4a7c15ULL);
    auto s0 = t->stats();
    t->get(k);
    auto s1 = t->stats();
    t->get(k);
    auto s2 = t->stats();
    first += s1.blocks_read - s0.blocks_read;
    second += s2.blocks_read - s1.blocks_read;
    probes += s1.filter_probes - s0.filter_probes;
    fps += s1.filter_false_positives - s0.filter_false_positives;
  }
  // Absent keys sort past every run, so false positives share the last blocks.
  EXPECT_LE(first, fps);
  EXPECT_EQ(second, 0u);
  const double rate = static_cast<double>(fps) / static_cast<double>(probes);
  EXPECT_LT(rate, 0.03);
}

TEST(Engine, RangeReadsBoundedByTwoBlocksPerRun) {
  auto t = LsmTree::open(env(), with_buffer(4, Policy::Leveling, 16'384));
  preload(*t, 30'000);
  t->flush();
  const auto L = deepest_level(*t);
  ASSERT_GE(L, 2u);
  Rng rng(4);
  for (int i = 0; i < 300; ++i) {
    const auto start = KeyUniverse::key_at(rng.below(30'000));
    const auto before = t->stats().blocks_read;
    const auto got = t->range(start, 4);
    EXPECT_LE(t->stats().blocks_read - before, 2u * L);
    EXPECT_LE(got.size(), 4u);
  }
}

TEST(Engine, SingleRunShortRangeReadsOneBlock) {
  auto t = LsmTree::open(env(), with_buffer(4, Policy::Leveling, 64 * 1024));
  for (std::uint64_t i = 0; i < 300; ++i) t->put(KeyUniverse::key_at(i), val(i));
  t->flush();
  ASSERT_EQ(run_count(*t), 1u);
  t->reset_stats();
  // The smallest loaded key starts the first block.
  std::uint64_t smallest = ~0ull;
  for (std::uint64_t i = 0; i < 300; ++i) smallest = std::min(smallest, KeyUniverse::key_at(i));
  const auto got = t->range(smallest, 1);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].first, smallest);
  EXPECT_EQ(t->stats().blocks_read, 1u);
}

TEST(Engine, CountingStoreAgreesWithStats) {
  std::uint64_t reads = 0, writes = 0;
  auto t = LsmTree::open(env(), with_buffer(3, Policy::Leveling, 8192),
                         std::make_unique<CountingStore>(&reads, &writes));
  preload(*t, 10'000);
  const auto s = generate_stream({0.3, 0.3, 0.2, 0.2}, {}, 5000, KeyUniverse{10'000});
  t->run_workload(s);
  EXPECT_EQ(t->stats().blocks_read, reads);
  EXPECT_EQ(t->stats().blocks_written, writes);
}

TEST(Engine, EmptyStreamAndDeterminism) {
  auto t = LsmTree::open(env(), default_config(env()));
  const auto empty = t->run_workload(OperationStream{});
  EXPECT_EQ(empty.io.ops(), 0u);
  EXPECT_EQ(empty.io.blocks_read, 0u);
  EXPECT_EQ(empty.io.blocks_written, 0u);
  EXPECT_EQ(empty.io_per_op, 0.0);

  const auto s = generate_stream({0.25, 0.25, 0.25, 0.25}, {}, 8000, KeyUniverse{20'000});
  auto run = [&] {
    auto x = LsmTree::open(env(), default_config(env()));
    preload(*x, 20'000);
    auto r = x->run_workload(s);
    r.io.wall_ns = 0;
    return r;
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.io, b.io);
  EXPECT_EQ(a.io_per_op, b.io_per_op);
}

TEST(Engine, WriteAmplificationNearAnalytic) {
  const auto e = env();
  const std::uint32_t T = 4;
  const std::uint64_t buffer = 16'384;
  auto t = LsmTree::open(e, with_buffer(T, Policy::Leveling, buffer));
  preload(*t, e.N);
  const auto s = generate_stream({0, 0, 0, 1}, {}, 100'000, KeyUniverse{e.N});
  const auto r = t->run_workload(s);
  const double measured = static_cast<double>(r.io.blocks_written) / static_cast<double>(r.io.ops());
  const double L = level_count(e, T, buffer);
  const double analytic = L * T / static_cast<double>(e.B);
  EXPECT_GT(measured, analytic / 2) << measured << " vs " << analytic;
  EXPECT_LT(measured, analytic * 2) << measured << " vs " << analytic;
}

TEST(Engine, FileBackedRoundTrip) {
  const auto dir = scratch("rt");
  const auto e = env();
  const auto c = with_cache(5, Policy::Tiering, 8192, 8192);
  {
    EngineOptions o;
    o.storage_path = dir;
    auto t = LsmTree::open(e, c, o);
    preload(*t, 12'345);
    t->remove(KeyUniverse::key_at(7));
    t->close();
  }
  EngineOptions o;
  o.storage_path = dir;
  auto t = LsmTree::open(e, default_config(e), o);
  EXPECT_EQ(t->active_config(), c);
  for (std::uint64_t i = 0; i < 12'345; ++i) {
    const auto got = t->get(KeyUniverse::key_at(i));
    if (i == 7) {
      EXPECT_FALSE(got.has_value());
    } else {
      ASSERT_TRUE(got.has_value()) << i;
    }
  }
  // A different environment cannot reopen the tree.
  t->close();
  t.reset();
  auto other = e;
  other.N *= 2;
  EXPECT_THROW(LsmTree::open(other, c, o), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Engine, BlockCodecRoundTrip) {
  Block b;
  b.entries.push_back({1, false, "abc"});
  b.entries.push_back({2, true, ""});
  const auto bytes = encode_block(b, 4096);
  EXPECT_EQ(bytes.size(), 4096u);
  const auto d = decode_block(bytes);
  ASSERT_EQ(d.entries.size(), 2u);
  EXPECT_EQ(d.entries[0].value, "abc");
  EXPECT_TRUE(d.entries[1].tombstone);
  Block big;
  big.entries.push_back({1, false, std::string(5000, 'x')});
  EXPECT_THROW(encode_block(big, 4096), StorageError);
}

TEST(Retarget, LevelCapacitiesFollowNewRatio) {
  const auto e = env();
  // Buffer of 10 units (one unit = 8 KB) at ratio 2.
  const std::uint64_t unit = 8192;
  const std::uint64_t per_unit = unit / e.E;
  const auto start = with_buffer(2, Policy::Leveling, 10 * unit);
  auto t = LsmTree::open(e, start);
  EXPECT_EQ(level_capacity_entries(e, 2, 10 * unit, 1), 10 * per_unit);
  EXPECT_EQ(level_capacity_entries(e, 2, 10 * unit, 2), 20 * per_unit);
  preload(*t, 20'000);

  auto next = start;
  next.size_ratio = 3;
  t->set_target_config(next);
  EXPECT_FALSE(t->converged());
  // One full pass over the data.
  for (std::uint64_t i = 0; i < 20'000; ++i) t->put(KeyUniverse::key_at(i), val(i, 1));
  t->flush();
  const auto lv = t->levels();
  ASSERT_GE(lv.size(), 2u);
  EXPECT_EQ(lv[0].capacity_entries, 20 * per_unit);
  EXPECT_EQ(lv[1].capacity_entries, 60 * per_unit);
  for (const auto& l : lv) {
    if (l.entries > 0) EXPECT_LE(l.entries, l.capacity_entries + 10 * per_unit);
  }
  EXPECT_TRUE(t->converged());

  // Smaller buffer; the freed memory goes to the filters.
  auto third = next;
  third.buffer_bytes = 8 * unit;
  third.filter_bytes += 2 * unit;
  t->set_target_config(third);
  for (std::uint64_t i = 0; i < 20'000; ++i) t->put(KeyUniverse::key_at(i), val(i, 2));
  t->flush();
  const auto lv3 = t->levels();
  EXPECT_EQ(t->buffer_capacity_entries(), 8 * per_unit);
  EXPECT_EQ(lv3[0].capacity_entries, 16 * per_unit);
  EXPECT_EQ(lv3[1].capacity_entries, 48 * per_unit);
  EXPECT_TRUE(t->converged());
  EXPECT_EQ(t->active_config(), third);
}

TEST(Retarget, SameConfigIsAFixedPoint) {
  const auto c = with_buffer(3, Policy::Leveling, 16'384);
  auto a = LsmTree::open(env(), c);
  auto b = LsmTree::open(env(), c);
  b->set_target_config(c);
  EXPECT_TRUE(b->converged());
  const auto s = generate_stream({0.2, 0.2, 0.1, 0.5}, {}, 20'000, KeyUniverse{10'000});
  preload(*a, 10'000);
  preload(*b, 10'000);
  a->run_workload(s);
  b->set_target_config(c);
  b->run_workload(s);
  auto la = a->levels(), lb = b->levels();
  ASSERT_EQ(la.size(), lb.size());
  for (std::size_t i = 0; i < la.size(); ++i) {
    EXPECT_EQ(la[i].capacity_entries, lb[i].capacity_entries);
    EXPECT_EQ(la[i].entries, lb[i].entries);
    EXPECT_EQ(la[i].runs.size(), lb[i].runs.size());
  }
  EXPECT_EQ(a->stats().blocks_written, b->stats().blocks_written);
}

TEST(Retarget, RatioIncreaseFoldsDeepLevelsOnNextFlush) {
  const auto e = env();
  const auto start = with_buffer(2, Policy::Leveling, 16'384);
  auto t = LsmTree::open(e, start);
  preload(*t, 20'000);
  ASSERT_GE(t->levels().size(), 3u);

  auto wide = start;
  wide.size_ratio = static_cast<std::uint32_t>(e.t_lim());
  const auto depth = t->levels().size();
  t->set_target_config(wide);
  EXPECT_EQ(t->levels().size(), depth);  // nothing moves until a flush
  for (std::uint64_t i = 0; i < 300; ++i) t->put(KeyUniverse::key_at(i), val(KeyUniverse::key_at(i), 1));
  t->flush();
  const auto lv = t->levels();
  std::uint64_t held = 0;
  for (std::size_t i = 1; i < lv.size(); ++i) held += lv[i].entries;
  EXPECT_EQ(held, 0u);
  EXPECT_EQ(lv[0].entries, 20'000u);
  for (std::uint64_t i = 0; i < 20'000; i += 97) {
    const auto k = KeyUniverse::key_at(i);
    EXPECT_EQ(t->get(k), val(k, i < 300 ? 1 : 0)) << i;
  }

  // Tiering trees are left to the lazy path.
  auto tier = with_buffer(2, Policy::Tiering, 16'384);
  auto u = LsmTree::open(e, tier);
  preload(*u, 20'000);
  const auto before = u->levels().size();
  tier.size_ratio = static_cast<std::uint32_t>(e.t_lim());
  u->set_target_config(tier);
  u->put(KeyUniverse::key_at(1), val(KeyUniverse::key_at(1), 1));
  u->flush();
  EXPECT_EQ(u->levels().size(), before);
}

TEST(Retarget, CacheResizesImmediately) {
  const auto e = env();
  auto t = LsmTree::open(e, default_config(e));
  EXPECT_EQ(t->cache_capacity_blocks(), 0u);
  auto c = default_config(e);
  c.buffer_bytes -= 40'960;
  c.cache_bytes = 40'960;
  t->set_target_config(c);
  EXPECT_EQ(t->cache_capacity_blocks(), 10u);
}
