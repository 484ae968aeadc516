#include "bevmotion.h"

#include <cstring>
#include <string>

#include "bevmotion/config.hpp"
#include "bevmotion/io_util.hpp"
#include "bevmotion/predictor.hpp"
#include "bevmotion/runner.hpp"
#include "bevmotion/synth.hpp"

using namespace bevmotion;

struct bm_config {
    KvMap overrides;  // applied over defaults at materialization time
};

struct bm_dataset {
    LabeledSequence seq;
};

struct bm_model {
    Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

bm_status status_of(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::config:
            return BM_ERROR_CONFIG;
        case ErrorKind::io:
            return BM_ERROR_IO;
        case ErrorKind::version:
        case ErrorKind::checksum:
            return BM_ERROR_FORMAT;
        case ErrorKind::numeric:
        case ErrorKind::solver_failure:
            return BM_ERROR_NUMERIC;
        default:
            return BM_ERROR;
    }
}

template <typename Fn>
bm_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return BM_OK;
    } catch (const Error& e) {
        g_last_error = std::string(error_kind_name(e.kind())) + ": " + e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return BM_ERROR;
    } catch (...) {
        g_last_error = "unknown error";
        return BM_ERROR;
    }
}

bm_status copy_out(const std::string& value, char* buf, size_t buf_size) {
    if (buf == nullptr || buf_size == 0) {
        return BM_OK;  // caller opted out
    }
    if (value.size() + 1 > buf_size) {
        g_last_error = "output buffer too small";
        return BM_ERROR;
    }
    std::memcpy(buf, value.c_str(), value.size() + 1);
    return BM_OK;
}

bm_status require(bool condition, const char* message) {
    if (!condition) {
        g_last_error = message;
        return BM_ERROR;
    }
    return BM_OK;
}

template <typename Fn>
bm_status run_command(const bm_config* config, char* run_dir_buf, size_t buf_size,
                      Fn&& command) {
    if (bm_status s = require(config != nullptr, "config is NULL"); s != BM_OK) {
        return s;
    }
    bm_status result = BM_OK;
    bm_status guard = guarded([&] {
        const KvMap merged = merge_config_kv(config->overrides);
        const std::string run_dir = command(merged);
        result = copy_out(run_dir, run_dir_buf, buf_size);
    });
    return guard != BM_OK ? guard : result;
}

}  // namespace

extern "C" {

const char* bm_version(void) { return "1.0.0"; }

const char* bm_status_name(bm_status status) {
    switch (status) {
        case BM_OK: return "ok";
        case BM_ERROR: return "error";
        case BM_ERROR_CONFIG: return "config-error";
        case BM_ERROR_IO: return "io-error";
        case BM_ERROR_NUMERIC: return "numeric-error";
        case BM_ERROR_FORMAT: return "format-error";
    }
    return "unknown";
}

const char* bm_last_error(void) { return g_last_error.c_str(); }

bm_status bm_config_create(bm_config** out_config) {
    if (bm_status s = require(out_config != nullptr, "out_config is NULL"); s != BM_OK) {
        return s;
    }
    return guarded([&] { *out_config = new bm_config(); });
}

void bm_config_free(bm_config* config) { delete config; }

bm_status bm_config_load_file(bm_config* config, const char* path) {
    if (bm_status s = require(config && path, "config/path is NULL"); s != BM_OK) {
        return s;
    }
    return guarded([&] {
        const KvMap parsed = KvMap::parse(read_text_file(path));
        // validate keys and values eagerly
        KvMap trial = config->overrides;
        for (const auto& [key, value] : parsed.entries()) {
            trial.set(key, value);
        }
        config_from_kv(merge_config_kv(trial));
        config->overrides = trial;
    });
}

bm_status bm_config_set(bm_config* config, const char* key, const char* value) {
    if (bm_status s = require(config && key && value, "config/key/value is NULL");
        s != BM_OK) {
        return s;
    }
    return guarded([&] {
        KvMap trial = config->overrides;
        trial.set(key, value);
        config_from_kv(merge_config_kv(trial));  // rejects unknown keys and bad values
        config->overrides = trial;
    });
}

bm_status bm_config_get(const bm_config* config, const char* key, char* buf,
                        size_t buf_size) {
    if (bm_status s = require(config && key, "config/key is NULL"); s != BM_OK) {
        return s;
    }
    bm_status result = BM_OK;
    bm_status guard = guarded([&] {
        const KvMap merged = merge_config_kv(config->overrides);
        const auto value = merged.get(key);
        if (!value) {
            raise(ErrorKind::config, std::string("unknown config key: ") + key);
        }
        result = copy_out(*value, buf, buf_size);
    });
    return guard != BM_OK ? guard : result;
}

bm_status bm_config_hash(const bm_config* config, char* buf, size_t buf_size) {
    if (bm_status s = require(config != nullptr, "config is NULL"); s != BM_OK) {
        return s;
    }
    bm_status result = BM_OK;
    bm_status guard = guarded([&] {
        result = copy_out(config_hash(merge_config_kv(config->overrides)), buf, buf_size);
    });
    return guard != BM_OK ? guard : result;
}

bm_status bm_dataset_open(const char* dir, bm_dataset** out_dataset) {
    if (bm_status s = require(dir && out_dataset, "dir/out_dataset is NULL"); s != BM_OK) {
        return s;
    }
    return guarded([&] {
        auto* ds = new bm_dataset{read_dataset(dir)};
        *out_dataset = ds;
    });
}

void bm_dataset_free(bm_dataset* dataset) { delete dataset; }

bm_status bm_dataset_frame_count(const bm_dataset* dataset, int* out_count) {
    if (bm_status s = require(dataset && out_count, "dataset/out_count is NULL");
        s != BM_OK) {
        return s;
    }
    *out_count = static_cast<int>(dataset->seq.n_frames());
    return BM_OK;
}

bm_status bm_dataset_point_count(const bm_dataset* dataset, int frame, int* out_count) {
    if (bm_status s = require(dataset && out_count, "dataset/out_count is NULL");
        s != BM_OK) {
        return s;
    }
    if (frame < 0 || frame >= static_cast<int>(dataset->seq.n_frames())) {
        g_last_error = "frame index out of range";
        return BM_ERROR;
    }
    *out_count = static_cast<int>(dataset->seq.frames[frame].points.size());
    return BM_OK;
}

bm_status bm_dataset_grid_dims(const bm_dataset* dataset, int* out_rows, int* out_cols) {
    if (bm_status s = require(dataset && out_rows && out_cols, "argument is NULL");
        s != BM_OK) {
        return s;
    }
    *out_rows = dataset->seq.spec.grid.rows();
    *out_cols = dataset->seq.spec.grid.cols();
    return BM_OK;
}

bm_status bm_model_load(const char* checkpoint_path, bm_model** out_model) {
    if (bm_status s = require(checkpoint_path && out_model, "argument is NULL");
        s != BM_OK) {
        return s;
    }
    return guarded([&] { *out_model = new bm_model{load_checkpoint(checkpoint_path)}; });
}

void bm_model_free(bm_model* model) { delete model; }

bm_status bm_model_param_count(const bm_model* model, uint64_t* out_count) {
    if (bm_status s = require(model && out_count, "argument is NULL"); s != BM_OK) {
        return s;
    }
    *out_count = model->checkpoint.params.values().size();
    return BM_OK;
}

bm_status bm_run_gen(const bm_config* config, const char* out_parent, char* run_dir_buf,
                     size_t buf_size) {
    if (bm_status s = require(out_parent != nullptr, "out_parent is NULL"); s != BM_OK) {
        return s;
    }
    return run_command(config, run_dir_buf, buf_size,
                       [&](const KvMap& kv) { return cmd_gen(kv, out_parent); });
}

bm_status bm_run_pseudo(const bm_config* config, const char* dataset_dir,
                        const char* out_parent, char* run_dir_buf, size_t buf_size) {
    if (bm_status s = require(dataset_dir && out_parent, "argument is NULL"); s != BM_OK) {
        return s;
    }
    return run_command(config, run_dir_buf, buf_size, [&](const KvMap& kv) {
        return cmd_pseudo(kv, dataset_dir, out_parent);
    });
}

bm_status bm_run_train(const bm_config* config, const char* dataset_dir,
                       const char* out_parent, char* run_dir_buf, size_t buf_size) {
    if (bm_status s = require(dataset_dir && out_parent, "argument is NULL"); s != BM_OK) {
        return s;
    }
    return run_command(config, run_dir_buf, buf_size, [&](const KvMap& kv) {
        return cmd_train(kv, dataset_dir, out_parent);
    });
}

bm_status bm_run_eval(const bm_config* config, const char* dataset_dir,
                      const char* checkpoint_path, const char* out_parent,
                      char* run_dir_buf, size_t buf_size) {
    if (bm_status s = require(dataset_dir && out_parent, "argument is NULL"); s != BM_OK) {
        return s;
    }
    return run_command(config, run_dir_buf, buf_size, [&](const KvMap& kv) {
        return cmd_eval(kv, dataset_dir, checkpoint_path ? checkpoint_path : "", out_parent);
    });
}

bm_status bm_run_ablate(const bm_config* config, const char* dataset_dir,
                        const char* out_parent, char* run_dir_buf, size_t buf_size) {
    if (bm_status s = require(dataset_dir && out_parent, "argument is NULL"); s != BM_OK) {
        return s;
    }
    return run_command(config, run_dir_buf, buf_size, [&](const KvMap& kv) {
        return cmd_ablate(kv, dataset_dir, out_parent);
    });
}

bm_status bm_run_bench(const bm_config* config, const char* out_parent, char* run_dir_buf,
                       size_t buf_size) {
    if (bm_status s = require(out_parent != nullptr, "out_parent is NULL"); s != BM_OK) {
        return s;
    }
    return run_command(config, run_dir_buf, buf_size,
                       [&](const KvMap& kv) { return cmd_bench(kv, out_parent); });
}

}  // extern "C"
