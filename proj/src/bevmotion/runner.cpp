#include "bevmotion/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>

#include "bevmotion/io_util.hpp"
#include "bevmotion/pseudo_labels.hpp"
#include "bevmotion/rng.hpp"

namespace bevmotion {

namespace {

std::string make_run_dir(const KvMap& cfg, const std::string& out_parent) {
    const std::string hash = config_hash(cfg);
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm_utc);

    std::string base = out_parent + "/" + hash + "-" + stamp;
    std::string dir = base;
    int suffix = 1;
    while (std::filesystem::exists(dir)) {
        dir = base + "-" + std::to_string(suffix++);
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        raise(ErrorKind::io, "cannot create run directory: " + dir);
    }
    return dir;
}

void write_kv_report(const std::string& path, const KvMap& kv) {
    write_text_file(path, kv.serialize());
}

void put_group(KvMap& kv, const std::string& prefix,
               const std::optional<GroupStats>& group) {
    if (!group) {
        return;  // empty groups are absent, not zero
    }
    kv.set_double(prefix + ".mean", group->mean);
    kv.set_double(prefix + ".median", group->median);
    kv.set_int(prefix + ".count", static_cast<int64_t>(group->count));
}

void put_eval_report(KvMap& kv, const std::string& prefix, const EvalReport& report) {
    put_group(kv, prefix + "static", report.group_static);
    put_group(kv, prefix + "slow", report.group_slow);
    put_group(kv, prefix + "fast", report.group_fast);
    put_group(kv, prefix + "div.static", report.div_static);
    put_group(kv, prefix + "div.slow", report.div_slow);
    put_group(kv, prefix + "div.fast", report.div_fast);
}

std::string format_eval_text(const EvalReport& report) {
    std::string out;
    char line[160];
    auto add_group = [&](const char* name, const std::optional<GroupStats>& g) {
        if (!g) {
            std::snprintf(line, sizeof(line), "  %-8s (no cells)\n", name);
        } else {
            std::snprintf(line, sizeof(line),
                          "  %-8s mean %.6f m  median %.6f m  cells %zu\n", name, g->mean,
                          g->median, g->count);
        }
        out += line;
    };
    out += "1s displacement error by ground-truth speed group\n";
    add_group("static", report.group_static);
    add_group("slow", report.group_slow);
    add_group("fast", report.group_fast);
    if (report.div_static || report.div_slow || report.div_fast) {
        out += "forward/backward divergence |m_fwd + m_bwd|\n";
        add_group("static", report.div_static);
        add_group("slow", report.div_slow);
        add_group("fast", report.div_fast);
    }
    return out;
}

LabeledSequence load_dataset_checked(const std::string& dataset_dir) {
    if (!std::filesystem::exists(dataset_dir + "/manifest.txt")) {
        raise(ErrorKind::io, "dataset manifest not found in " + dataset_dir);
    }
    return read_dataset(dataset_dir);
}

struct PseudoStats {
    double epe_sum = 0.0;
    double epe_max = 0.0;
    size_t cells = 0;

    void add(double epe) {
        epe_sum += epe;
        epe_max = std::max(epe_max, epe);
        ++cells;
    }
    double mean() const { return cells == 0 ? 0.0 : epe_sum / cells; }
};

}  // namespace

std::string cmd_gen(const KvMap& cfg_kv, const std::string& out_parent) {
    const RunConfig cfg = config_from_kv(cfg_kv);
    const std::string run_dir = make_run_dir(cfg_kv, out_parent);
    const LabeledSequence seq = generate(cfg.scene);

    const std::string dataset_dir = run_dir + "/dataset";
    write_dataset(seq, dataset_dir);

    size_t total_points = 0;
    for (const PointFrame& f : seq.frames) {
        total_points += f.points.size();
    }
    KvMap report;
    report.set("config_hash", config_hash(cfg_kv));
    report.set("dataset_dir", dataset_dir);
    report.set_int("n_frames", static_cast<int64_t>(seq.n_frames()));
    report.set_int("total_points", static_cast<int64_t>(total_points));
    write_kv_report(run_dir + "/gen.kv", report);
    return run_dir;
}

std::string cmd_pseudo(const KvMap& cfg_kv, const std::string& dataset_dir,
                       const std::string& out_parent) {
    const RunConfig cfg = config_from_kv(cfg_kv);
    const std::string run_dir = make_run_dir(cfg_kv, out_parent);
    const LabeledSequence seq = load_dataset_checked(dataset_dir);

    const SamplePrep prep = prepare_samples(seq, cfg.train);
    if (prep.samples.empty()) {
        raise(ErrorKind::empty_input, "no usable samples for pseudo-labeling");
    }

    KvMap report;
    report.set("config_hash", config_hash(cfg_kv));
    PseudoStats aggregate;
    int sample_idx = 0;
    for (const Sample& s : prep.samples) {
        const MotionField pseudo = generate_pseudo_motion(
            s.src_ng, s.tgt1_ng, nullptr, cfg.train.transport, s.ground_cells,
            seq.spec.frame_period);

        PseudoStats stats;
        const MotionField& gt = seq.gt_motion_02[s.t];
        for (int i = 0; i < pseudo.rows(); ++i) {
            for (int j = 0; j < pseudo.cols(); ++j) {
                if (!pseudo.valid.at(i, j) || !gt.valid.at(i, j)) {
                    continue;
                }
                const double ex = pseudo.dx.at(i, j) - gt.dx.at(i, j);
                const double ey = pseudo.dy.at(i, j) - gt.dy.at(i, j);
                const double epe = std::hypot(ex, ey);
                stats.add(epe);
                aggregate.add(epe);
            }
        }
        const std::string prefix = "sample." + std::to_string(sample_idx);
        report.set_int(prefix + ".t", s.t);
        report.set_double(prefix + ".epe_mean", stats.mean());
        report.set_double(prefix + ".epe_max", stats.epe_max);
        report.set_int(prefix + ".cells", static_cast<int64_t>(stats.cells));

        // label dump, same blob style as the dataset
        ByteWriter out;
        out.u32(static_cast<uint32_t>(s.t));
        out.u32(static_cast<uint32_t>(pseudo.rows()));
        out.u32(static_cast<uint32_t>(pseudo.cols()));
        for (double v : pseudo.dx.data()) out.f64(v);
        for (double v : pseudo.dy.data()) out.f64(v);
        out.bytes(pseudo.valid.data().data(), pseudo.valid.size());
        const uint32_t crc = crc32(out.buffer().data(), out.buffer().size());
        ByteWriter final_out = std::move(out);
        final_out.u32(crc);
        char name[32];
        std::snprintf(name, sizeof(name), "/pseudo_%04d.bin", s.t);
        write_file(run_dir + name, final_out.buffer());
        ++sample_idx;
    }
    report.set_int("samples", sample_idx);
    report.set_double("epe_mean", aggregate.mean());
    report.set_double("epe_max", aggregate.epe_max);
    report.set_int("cells", static_cast<int64_t>(aggregate.cells));
    write_kv_report(run_dir + "/pseudo_stats.kv", report);
    return run_dir;
}

std::string cmd_train(const KvMap& cfg_kv, const std::string& dataset_dir,
                      const std::string& out_parent) {
    const RunConfig cfg = config_from_kv(cfg_kv);
    const std::string run_dir = make_run_dir(cfg_kv, out_parent);
    const LabeledSequence seq = load_dataset_checked(dataset_dir);

    PredictorParams params = PredictorParams::he_init(cfg.train.net, cfg.train.seed);
    const TrainResult result = train(seq, std::move(params), cfg.train);
    save_checkpoint(result.params, result.rows, result.cols, run_dir + "/checkpoint.bin");

    std::string csv = "epoch,total,sup,cluster,back,forward,state,samples\n";
    char line[256];
    for (size_t e = 0; e < result.curves.size(); ++e) {
        const EpochStats& st = result.curves[e];
        std::snprintf(line, sizeof(line), "%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n", e,
                      st.total, st.sup, st.cluster, st.back, st.forward, st.state,
                      st.samples);
        csv += line;
    }
    write_text_file(run_dir + "/loss_curves.csv", csv);

    const EvalReport eval = evaluate_dataset(seq, result.params, cfg.train);
    KvMap metrics;
    metrics.set("config_hash", config_hash(cfg_kv));
    put_eval_report(metrics, "", eval);
    if (!result.curves.empty()) {
        const EpochStats& last = result.curves.back();
        metrics.set_double("loss.total", last.total);
        metrics.set_double("loss.sup", last.sup);
        metrics.set_double("loss.cluster", last.cluster);
        metrics.set_double("loss.back", last.back);
        metrics.set_double("loss.forward", last.forward);
        metrics.set_double("loss.state", last.state);
    }
    write_kv_report(run_dir + "/metrics.kv", metrics);
    write_text_file(run_dir + "/metrics.txt",
                    "config_hash " + config_hash(cfg_kv) + "\n" + format_eval_text(eval));

    std::string log;
    for (const std::string& entry : result.log) {
        log += entry + "\n";
    }
    write_text_file(run_dir + "/log.txt", log);
    return run_dir;
}

std::string cmd_eval(const KvMap& cfg_kv, const std::string& dataset_dir,
                     const std::string& checkpoint_path, const std::string& out_parent) {
    const RunConfig cfg = config_from_kv(cfg_kv);
    const std::string run_dir = make_run_dir(cfg_kv, out_parent);
    const LabeledSequence seq = load_dataset_checked(dataset_dir);

    EvalReport eval;
    if (cfg.eval_use_gt_shim) {
        // reference path: evaluate the ground truth against itself
        EvalAccumulator acc;
        for (size_t t = 0; t < seq.n_frames(); ++t) {
            acc.add_error(seq.gt_motion_1s[t], seq.gt_motion_1s[t], seq.gt_speed[t]);
        }
        eval = acc.finalize();
    } else {
        const Checkpoint ck = load_checkpoint(checkpoint_path);
        TrainConfig train_cfg = cfg.train;
        train_cfg.net = ck.params.config();
        eval = evaluate_dataset(seq, ck.params, train_cfg);
    }

    KvMap metrics;
    metrics.set("config_hash", config_hash(cfg_kv));
    put_eval_report(metrics, "", eval);
    write_kv_report(run_dir + "/metrics.kv", metrics);
    write_text_file(run_dir + "/metrics.txt",
                    "config_hash " + config_hash(cfg_kv) + "\n" + format_eval_text(eval));
    return run_dir;
}

std::string cmd_ablate(const KvMap& cfg_kv, const std::string& dataset_dir,
                       const std::string& out_parent) {
    const RunConfig cfg = config_from_kv(cfg_kv);
    const std::string run_dir = make_run_dir(cfg_kv, out_parent);
    const LabeledSequence seq = load_dataset_checked(dataset_dir);

    // Rows mirror the classic on/off grid over the three consistency terms.
    struct Row {
        char name;
        bool cluster, backward, forward;
    };
    const Row rows[8] = {{'a', false, false, false}, {'b', true, false, false},
                         {'c', false, true, false},  {'d', true, true, false},
                         {'e', true, false, true},   {'f', false, false, true},
                         {'g', false, true, true},   {'h', true, true, true}};

    KvMap report;
    report.set("config_hash", config_hash(cfg_kv));
    std::string table =
        "row cluster backward forward | static_mean slow_mean fast_mean | "
        "div_static div_slow div_fast\n";

    for (const Row& row : rows) {
        TrainConfig variant = cfg.train;
        variant.weights.alpha = row.cluster ? cfg.train.weights.alpha : 0.0;
        variant.backward_enabled = row.backward;
        variant.weights.beta = row.backward ? cfg.train.weights.beta : 0.0;
        variant.weights.gamma = row.forward ? cfg.train.weights.gamma : 0.0;
        variant.msm_enabled = false;  // isolate the consistency terms

        PredictorParams params = PredictorParams::he_init(variant.net, variant.seed);
        const TrainResult trained = train(seq, std::move(params), variant);

        // divergence is measured for every row, so evaluation always runs the
        // backward sequence
        TrainConfig eval_cfg = variant;
        eval_cfg.backward_enabled = true;
        const EvalReport eval = evaluate_dataset(seq, trained.params, eval_cfg);

        const std::string prefix = std::string("row.") + row.name;
        report.set_bool(prefix + ".cluster", row.cluster);
        report.set_bool(prefix + ".backward", row.backward);
        report.set_bool(prefix + ".forward", row.forward);
        put_eval_report(report, prefix + ".", eval);

        const EpochStats& last = trained.curves.back();
        report.set_double(prefix + ".loss.total", last.total);
        report.set_double(prefix + ".loss.sup", last.sup);
        report.set_double(prefix + ".loss.cluster", last.cluster);
        report.set_double(prefix + ".loss.back", last.back);
        report.set_double(prefix + ".loss.forward", last.forward);
        report.set_double(prefix + ".loss.state", last.state);
        const double recomposed = last.sup + variant.weights.alpha * last.cluster +
                                  variant.weights.beta * last.back +
                                  variant.weights.gamma * last.forward +
                                  variant.weights.sigma * last.state;
        report.set_double(prefix + ".recomposition_delta", std::abs(last.total - recomposed));

        char line[256];
        auto mean_or_nan = [](const std::optional<GroupStats>& g) {
            return g ? g->mean : std::nan("");
        };
        std::snprintf(line, sizeof(line),
                      "%c   %d       %d        %d       | %11.6f %9.6f %9.6f | %10.6f %8.6f %8.6f\n",
                      row.name, row.cluster, row.backward, row.forward,
                      mean_or_nan(eval.group_static), mean_or_nan(eval.group_slow),
                      mean_or_nan(eval.group_fast), mean_or_nan(eval.div_static),
                      mean_or_nan(eval.div_slow), mean_or_nan(eval.div_fast));
        table += line;
    }
    write_kv_report(run_dir + "/ablate.kv", report);
    write_text_file(run_dir + "/ablate.txt",
                    "config_hash " + config_hash(cfg_kv) + "\n" + table);
    return run_dir;
}

std::string cmd_bench(const KvMap& cfg_kv, const std::string& out_parent) {
    const RunConfig cfg = config_from_kv(cfg_kv);
    const std::string run_dir = make_run_dir(cfg_kv, out_parent);

    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point start) {
        return std::chrono::duration<double, std::milli>(clock::now() - start).count();
    };

    KvMap report;
    report.set("config_hash", config_hash(cfg_kv));

    // Sinkhorn timings on random cost matrices
    Rng rng(42);
    auto bench_sinkhorn = [&](int m, int n, int iters, const std::string& key) {
        CostMatrix cost;
        cost.src_count = m;
        cost.tgt_count = n;
        cost.values.resize(static_cast<size_t>(m) * n);
        for (double& v : cost.values) {
            v = rng.uniform(0.0, 10.0);
        }
        TransportConfig tc = cfg.train.transport;
        tc.max_iters = iters;
        tc.marginal_tol = 0.0;  // run the full iteration budget
        const auto start = clock::now();
        const TransportPlan plan = sinkhorn(cost, tc);
        const double elapsed = ms_since(start);
        report.set_double(key + "_ms", elapsed);
        report.set_int(key + "_iters", plan.iterations_used);
    };
    bench_sinkhorn(300, 300, 100, "sinkhorn_300x300_iters100");
    bench_sinkhorn(1000, 1000, 100, "sinkhorn_1000x1000_iters100");

    // Pseudo-label timing on a generated frame pair
    const LabeledSequence seq = generate(cfg.scene);
    const SamplePrep prep = prepare_samples(seq, cfg.train);
    if (!prep.samples.empty()) {
        const Sample& s = prep.samples.front();
        const auto start = clock::now();
        generate_pseudo_motion(s.src_ng, s.tgt1_ng, nullptr, cfg.train.transport,
                               s.ground_cells, seq.spec.frame_period);
        report.set_double("pseudo_label_pair_ms", ms_since(start));
        report.set_int("pseudo_label_src_pillars", static_cast<int64_t>(s.src_ng.count()));
        report.set_int("pseudo_label_tgt_pillars", static_cast<int64_t>(s.tgt1_ng.count()));
    }
    write_kv_report(run_dir + "/bench.kv", report);
    return run_dir;
}

}  // namespace bevmotion
