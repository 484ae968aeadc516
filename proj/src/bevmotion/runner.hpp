#pragma once

#include <string>

#include "bevmotion/config.hpp"
#include "bevmotion/kv.hpp"

namespace bevmotion {

// Command-level entry points shared by the C API and the CLI. Each creates a
// run directory named <config-hash>-<timestamp> under `out_parent`, writes
// its outputs there and returns the run directory path. The config hash is
// recorded in every emitted file; file contents carry no timestamps, so
// reruns with identical configs produce identical files.

std::string cmd_gen(const KvMap& merged_cfg, const std::string& out_parent);

std::string cmd_pseudo(const KvMap& merged_cfg, const std::string& dataset_dir,
                       const std::string& out_parent);

std::string cmd_train(const KvMap& merged_cfg, const std::string& dataset_dir,
                      const std::string& out_parent);

std::string cmd_eval(const KvMap& merged_cfg, const std::string& dataset_dir,
                     const std::string& checkpoint_path, const std::string& out_parent);

std::string cmd_ablate(const KvMap& merged_cfg, const std::string& dataset_dir,
                       const std::string& out_parent);

std::string cmd_bench(const KvMap& merged_cfg, const std::string& out_parent);

}  // namespace bevmotion
