// Command-line front end. Talks to the library exclusively through the
// public C API in bevmotion.h.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bevmotion.h"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "runs";
    std::string weights;  // "alpha,beta,gamma,sigma"
    long seed = -1;
    long epochs = -1;
    double epsilon = -1.0;
    bool no_msm = false;
    bool no_backward = false;
    bool no_forward = false;
    bool no_cluster = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "configuration file (key = value lines)");
    cmd->add_option("--out", flags.out_dir, "parent directory for run outputs");
    cmd->add_option("--seed", flags.seed, "override scene and training seeds");
    cmd->add_option("--weights", flags.weights,
                    "loss weights as alpha,beta,gamma,sigma");
    cmd->add_option("--epsilon", flags.epsilon, "entropic regularizer (0 = auto)");
    cmd->add_option("--epochs", flags.epochs, "training epochs");
    cmd->add_flag("--no-msm", flags.no_msm, "disable the moving statement mask");
    cmd->add_flag("--no-backward", flags.no_backward, "disable backward consistency");
    cmd->add_flag("--no-forward", flags.no_forward, "disable forward consistency");
    cmd->add_flag("--no-cluster", flags.no_cluster, "disable cluster consistency");
}

int fail(bm_status status) {
    std::fprintf(stderr, "error: %s: %s\n", bm_status_name(status), bm_last_error());
    return static_cast<int>(status);
}

#define CHECK_BM(call)                        \
    do {                                      \
        const bm_status status_ = (call);     \
        if (status_ != BM_OK) {               \
            bm_config_free(config);           \
            return fail(status_);             \
        }                                     \
    } while (0)

int apply_flags(bm_config* config, const CommonFlags& flags) {
    if (!flags.config_path.empty()) {
        const bm_status s = bm_config_load_file(config, flags.config_path.c_str());
        if (s != BM_OK) {
            return static_cast<int>(s);
        }
    }
    std::vector<std::pair<std::string, std::string>> sets;
    if (flags.seed >= 0) {
        const std::string seed = std::to_string(flags.seed);
        sets.emplace_back("scene.seed", seed);
        sets.emplace_back("train.seed", seed);
    }
    if (flags.epochs >= 0) {
        sets.emplace_back("train.epochs", std::to_string(flags.epochs));
    }
    if (flags.epsilon >= 0.0) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", flags.epsilon);
        sets.emplace_back("transport.epsilon", buf);
    }
    if (!flags.weights.empty()) {
        double a, b, g, s;
        if (std::sscanf(flags.weights.c_str(), "%lf,%lf,%lf,%lf", &a, &b, &g, &s) != 4) {
            std::fprintf(stderr, "error: config-error: --weights expects alpha,beta,gamma,sigma\n");
            return static_cast<int>(BM_ERROR_CONFIG);
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", a);
        sets.emplace_back("loss.alpha", buf);
        std::snprintf(buf, sizeof(buf), "%.17g", b);
        sets.emplace_back("loss.beta", buf);
        std::snprintf(buf, sizeof(buf), "%.17g", g);
        sets.emplace_back("loss.gamma", buf);
        std::snprintf(buf, sizeof(buf), "%.17g", s);
        sets.emplace_back("loss.sigma", buf);
    }
    if (flags.no_msm) {
        sets.emplace_back("train.msm_enabled", "false");
    }
    if (flags.no_backward) {
        sets.emplace_back("train.backward_enabled", "false");
        sets.emplace_back("loss.beta", "0");
    }
    if (flags.no_forward) {
        sets.emplace_back("loss.gamma", "0");
    }
    if (flags.no_cluster) {
        sets.emplace_back("loss.alpha", "0");
    }
    for (const auto& [key, value] : sets) {
        const bm_status s = bm_config_set(config, key.c_str(), value.c_str());
        if (s != BM_OK) {
            return static_cast<int>(s);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"self-supervised BEV motion prediction pipeline"};
    app.set_version_flag("--version", bm_version());
    app.require_subcommand(1);

    CommonFlags flags;
    std::string dataset_dir;
    std::string checkpoint_path;

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    add_common_flags(gen, flags);

    CLI::App* pseudo = app.add_subcommand("pseudo", "pseudo-label a dataset and report recovery stats");
    add_common_flags(pseudo, flags);
    pseudo->add_option("--data", dataset_dir, "dataset directory")->required();

    CLI::App* train = app.add_subcommand("train", "train the predictor on a dataset");
    add_common_flags(train, flags);
    train->add_option("--data", dataset_dir, "dataset directory")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    add_common_flags(eval, flags);
    eval->add_option("--data", dataset_dir, "dataset directory")->required();
    eval->add_option("--checkpoint", checkpoint_path, "checkpoint file");

    CLI::App* ablate = app.add_subcommand("ablate", "train the loss-term on/off grid");
    add_common_flags(ablate, flags);
    ablate->add_option("--data", dataset_dir, "dataset directory")->required();

    CLI::App* bench = app.add_subcommand("bench", "time the solver and pseudo-labeling");
    add_common_flags(bench, flags);

    CLI11_PARSE(app, argc, argv);

    bm_config* config = nullptr;
    if (const bm_status s = bm_config_create(&config); s != BM_OK) {
        return fail(s);
    }
    if (const int rc = apply_flags(config, flags); rc != 0) {
        std::fprintf(stderr, "error: %s: %s\n", bm_status_name(static_cast<bm_status>(rc)),
                     bm_last_error());
        bm_config_free(config);
        return rc;
    }

    char run_dir[4096] = {0};
    if (gen->parsed()) {
        CHECK_BM(bm_run_gen(config, flags.out_dir.c_str(), run_dir, sizeof(run_dir)));
    } else if (pseudo->parsed()) {
        CHECK_BM(bm_run_pseudo(config, dataset_dir.c_str(), flags.out_dir.c_str(), run_dir,
                               sizeof(run_dir)));
    } else if (train->parsed()) {
        CHECK_BM(bm_run_train(config, dataset_dir.c_str(), flags.out_dir.c_str(), run_dir,
                              sizeof(run_dir)));
    } else if (eval->parsed()) {
        CHECK_BM(bm_run_eval(config, dataset_dir.c_str(),
                             checkpoint_path.empty() ? nullptr : checkpoint_path.c_str(),
                             flags.out_dir.c_str(), run_dir, sizeof(run_dir)));
    } else if (ablate->parsed()) {
        CHECK_BM(bm_run_ablate(config, dataset_dir.c_str(), flags.out_dir.c_str(), run_dir,
                               sizeof(run_dir)));
    } else if (bench->parsed()) {
        CHECK_BM(bm_run_bench(config, flags.out_dir.c_str(), run_dir, sizeof(run_dir)));
    }
    bm_config_free(config);
    std::printf("%s\n", run_dir);
    return 0;
}
