#include "bevmotion/config.hpp"

#include <cstdio>

namespace bevmotion {

void RunConfig::validate() const {
    scene.validate();
    train.validate();
}

KvMap default_config_kv() {
    KvMap kv;
    // scene
    kv.set_int("scene.n_movers", 3);
    kv.set_double("scene.mover_size_min", 0.4);
    kv.set_double("scene.mover_size_max", 0.8);
    kv.set_double("scene.speed_min", 1.25);
    kv.set_double("scene.speed_max", 6.25);
    kv.set_double("scene.ground_density", 1.0);
    kv.set_double("scene.artifact_rate", 0.0);
    kv.set_double("scene.ego_vx", 0.0);
    kv.set_double("scene.ego_vy", 0.0);
    kv.set_double("scene.frame_period", 0.2);
    kv.set_int("scene.n_frames", 12);
    kv.set_int("scene.seed", 1);
    kv.set_bool("scene.snap_to_grid", true);
    // grid (desk-scale default; the full-size range is available here)
    kv.set_double("grid.x_min", -8.0);
    kv.set_double("grid.x_max", 8.0);
    kv.set_double("grid.y_min", -8.0);
    kv.set_double("grid.y_max", 8.0);
    kv.set_double("grid.z_min", -3.0);
    kv.set_double("grid.z_max", 2.0);
    kv.set_double("grid.cell_x", 0.25);
    kv.set_double("grid.cell_y", 0.25);
    kv.set_double("grid.cell_z", 0.4);
    // ground removal
    kv.set_double("ground.plane_z", -2.0);
    kv.set_double("ground.tolerance", 0.3);
    kv.set_int("ground.ransac_iters", 0);
    kv.set_double("ground.inlier_threshold", 0.15);
    // transport
    kv.set_double("transport.epsilon", 0.0);  // 0 = epsilon_scale * median(C)
    kv.set_double("transport.epsilon_scale", 0.03);
    kv.set_int("transport.max_iters", 2000);
    kv.set_double("transport.marginal_tol", 1e-9);
    // loss weights
    kv.set_double("loss.alpha", 0.05);
    kv.set_double("loss.beta", 1.0);
    kv.set_double("loss.gamma", 0.1);
    kv.set_double("loss.sigma", 0.2);
    kv.set_double("loss.smooth_l1_beta", 1.0);
    // training
    kv.set_int("train.epochs", 10);
    kv.set_double("train.lr", 0.004);
    kv.set_double("train.lr_decay_factor", 0.5);
    kv.set_int("train.lr_decay_every", 10);
    kv.set_int("train.seed", 1);
    kv.set_bool("train.msm_enabled", true);
    kv.set_int("train.msm_warmup_epochs", 2);
    kv.set_bool("train.two_step_enabled", true);
    kv.set_bool("train.backward_enabled", true);
    kv.set("train.smoothness", "cluster");
    kv.set_int("train.knn_k", 4);
    kv.set_int("train.connectivity", 8);
    kv.set_double("train.state_speed_threshold", 0.2);
    // network
    kv.set_int("net.t_in", 5);
    kv.set_int("net.hidden", 16);
    // evaluation
    kv.set_bool("eval.use_gt_shim", false);
    return kv;
}

KvMap merge_config_kv(const KvMap& overrides) {
    KvMap merged = default_config_kv();
    for (const auto& [key, value] : overrides.entries()) {
        if (!merged.contains(key)) {
            raise(ErrorKind::config, "unknown config key: " + key);
        }
        merged.set(key, value);
    }
    return merged;
}

RunConfig config_from_kv(const KvMap& kv) {
    RunConfig cfg;
    SceneSpec& s = cfg.scene;
    s.n_movers = static_cast<int>(kv.get_int("scene.n_movers"));
    s.mover_size_min = kv.get_double("scene.mover_size_min");
    s.mover_size_max = kv.get_double("scene.mover_size_max");
    s.speed_min = kv.get_double("scene.speed_min");
    s.speed_max = kv.get_double("scene.speed_max");
    s.ground_density = kv.get_double("scene.ground_density");
    s.artifact_rate = kv.get_double("scene.artifact_rate");
    s.ego_vx = kv.get_double("scene.ego_vx");
    s.ego_vy = kv.get_double("scene.ego_vy");
    s.frame_period = kv.get_double("scene.frame_period");
    s.n_frames = static_cast<int>(kv.get_int("scene.n_frames"));
    s.seed = static_cast<uint64_t>(kv.get_int("scene.seed"));
    s.snap_to_grid = kv.get_bool("scene.snap_to_grid");
    s.grid.x_min = kv.get_double("grid.x_min");
    s.grid.x_max = kv.get_double("grid.x_max");
    s.grid.y_min = kv.get_double("grid.y_min");
    s.grid.y_max = kv.get_double("grid.y_max");
    s.grid.z_min = kv.get_double("grid.z_min");
    s.grid.z_max = kv.get_double("grid.z_max");
    s.grid.cell_x = kv.get_double("grid.cell_x");
    s.grid.cell_y = kv.get_double("grid.cell_y");
    s.grid.cell_z = kv.get_double("grid.cell_z");

    TrainConfig& t = cfg.train;
    t.epochs = static_cast<int>(kv.get_int("train.epochs"));
    t.adam.learning_rate = kv.get_double("train.lr");
    t.adam.decay_factor = kv.get_double("train.lr_decay_factor");
    t.adam.decay_every_epochs = static_cast<int>(kv.get_int("train.lr_decay_every"));
    t.seed = static_cast<uint64_t>(kv.get_int("train.seed"));
    t.weights.alpha = kv.get_double("loss.alpha");
    t.weights.beta = kv.get_double("loss.beta");
    t.weights.gamma = kv.get_double("loss.gamma");
    t.weights.sigma = kv.get_double("loss.sigma");
    t.weights.smooth_l1_beta = kv.get_double("loss.smooth_l1_beta");
    t.msm_enabled = kv.get_bool("train.msm_enabled");
    t.msm_warmup_epochs = static_cast<int>(kv.get_int("train.msm_warmup_epochs"));
    t.two_step_enabled = kv.get_bool("train.two_step_enabled");
    t.backward_enabled = kv.get_bool("train.backward_enabled");
    const std::string smoothness = kv.get_string("train.smoothness");
    if (smoothness == "cluster") {
        t.smoothness = SmoothnessKind::cluster;
    } else if (smoothness == "knn") {
        t.smoothness = SmoothnessKind::knn;
    } else {
        raise(ErrorKind::config, "train.smoothness must be 'cluster' or 'knn'");
    }
    t.knn_k = static_cast<int>(kv.get_int("train.knn_k"));
    t.connectivity = static_cast<int>(kv.get_int("train.connectivity"));
    t.state_speed_threshold = kv.get_double("train.state_speed_threshold");
    t.net.t_in = static_cast<int>(kv.get_int("net.t_in"));
    t.net.hidden = static_cast<int>(kv.get_int("net.hidden"));
    t.transport.epsilon = kv.get_double("transport.epsilon");
    t.transport.epsilon_scale = kv.get_double("transport.epsilon_scale");
    t.transport.max_iters = static_cast<int>(kv.get_int("transport.max_iters"));
    t.transport.marginal_tol = kv.get_double("transport.marginal_tol");
    t.ground.plane_z = kv.get_double("ground.plane_z");
    t.ground.tolerance = kv.get_double("ground.tolerance");
    t.ground.ransac_iters = static_cast<int>(kv.get_int("ground.ransac_iters"));
    t.ground.inlier_threshold = kv.get_double("ground.inlier_threshold");

    cfg.eval_use_gt_shim = kv.get_bool("eval.use_gt_shim");
    cfg.validate();
    return cfg;
}

std::string config_hash(const KvMap& merged) {
    const std::string text = merged.serialize();
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace bevmotion
