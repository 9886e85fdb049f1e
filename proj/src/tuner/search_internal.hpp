#pragma once

#include "camal/tuner.hpp"

namespace camal::detail {

// Best T in [2, T_lim] with the rest of `cfg` held; ties keep cfg.
Selection argmin_T(const ConfigObjective& f, const Environment& env, const LsmConfig& cfg);

// Best filter size on the bpk grid (plus cfg's own and `extra`) with T and
// the cache held; the buffer takes the remainder.
Selection argmin_memory(const ConfigObjective& f, const Environment& env, const LsmConfig& cfg,
                        double grid_bpk, std::uint64_t extra_filter_bytes);

// cfg with M_c = fraction * M taken from the buffer, if the buffer floor allows.
std::optional<LsmConfig> with_cache(const Environment& env, const LsmConfig& cfg, double fraction);

}  // namespace camal::detail
