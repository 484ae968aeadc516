#pragma once

#include <string>

#include "bevmotion/kv.hpp"
#include "bevmotion/synth.hpp"
#include "bevmotion/trainer.hpp"

namespace bevmotion {

// Materialized view of a run configuration: scene generation, training and
// evaluation settings in one place.
struct RunConfig {
    SceneSpec scene;
    TrainConfig train;
    bool eval_use_gt_shim = false;

    void validate() const;
};

// All recognized keys with their default values, in canonical order.
KvMap default_config_kv();

// Applies `overrides` on top of the defaults. Unknown keys are rejected.
KvMap merge_config_kv(const KvMap& overrides);

// Parses and validates a merged key-value map into a RunConfig.
RunConfig config_from_kv(const KvMap& merged);

// FNV-1a hash of the canonical serialization, 16 hex characters. Identical
// configurations hash identically regardless of override order.
std::string config_hash(const KvMap& merged);

}  // namespace bevmotion
