#include "bevmotion/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "bevmotion/io_util.hpp"
#include "bevmotion/rng.hpp"

namespace bevmotion {

void NetConfig::validate() const {
    if (t_in < 1 || hidden < 1) {
        raise(ErrorKind::config, "net t_in and hidden channels must be >= 1");
    }
}

ParamLayout ParamLayout::make(const NetConfig& cfg) {
    const size_t T = cfg.t_in;
    const size_t F = cfg.hidden;
    ParamLayout l;
    l.conv1_w = 0;
    l.conv1_b = l.conv1_w + F * T * 9;
    l.conv2_w = l.conv1_b + F;
    l.conv2_b = l.conv2_w + F * F * 9;
    l.motion_w = l.conv2_b + F;
    l.motion_b = l.motion_w + 4 * F;
    l.state_w = l.motion_b + 4;
    l.state_b = l.state_w + 2 * F;
    l.total = l.state_b + 2;
    return l;
}

PredictorParams PredictorParams::zeros(const NetConfig& cfg) {
    cfg.validate();
    PredictorParams p;
    p.cfg_ = cfg;
    p.layout_ = ParamLayout::make(cfg);
    p.values_.assign(p.layout_.total, 0.0);
    return p;
}

PredictorParams PredictorParams::he_init(const NetConfig& cfg, uint64_t seed) {
    PredictorParams p = zeros(cfg);
    Rng rng(seed);
    const ParamLayout& l = p.layout_;
    const size_t F = cfg.hidden;
    auto fill_gaussian = [&](size_t offset, size_t count, double fan_in) {
        const double scale = std::sqrt(2.0 / fan_in);
        for (size_t k = 0; k < count; ++k) {
            p.values_[offset + k] = scale * rng.next_gaussian();
        }
    };
    fill_gaussian(l.conv1_w, F * cfg.t_in * 9, cfg.t_in * 9.0);
    fill_gaussian(l.conv2_w, F * F * 9, F * 9.0);
    fill_gaussian(l.motion_w, 4 * F, static_cast<double>(F));
    fill_gaussian(l.state_w, 2 * F, static_cast<double>(F));
    return p;
}

namespace {

// out[f] += sum_c sum_k w[f][c][ki][kj] * in[c] shifted; w is [F][C][3][3].
void conv3x3_accumulate(const double* in, int C, int rows, int cols, const double* w,
                        int F, double* out) {
    const size_t plane = static_cast<size_t>(rows) * cols;
    for (int f = 0; f < F; ++f) {
        double* out_plane = out + f * plane;
        for (int c = 0; c < C; ++c) {
            const double* in_plane = in + c * plane;
            const double* wk = w + (static_cast<size_t>(f) * C + c) * 9;
            for (int ki = 0; ki < 3; ++ki) {
                const int di = ki - 1;
                const int i_lo = std::max(0, -di);
                const int i_hi = std::min(rows, rows - di);
                for (int kj = 0; kj < 3; ++kj) {
                    const int dj = kj - 1;
                    const double wv = wk[ki * 3 + kj];
                    if (wv == 0.0) {
                        continue;
                    }
                    const int j_lo = std::max(0, -dj);
                    const int j_hi = std::min(cols, cols - dj);
                    for (int i = i_lo; i < i_hi; ++i) {
                        const double* src = in_plane + static_cast<size_t>(i + di) * cols + dj;
                        double* dst = out_plane + static_cast<size_t>(i) * cols;
                        for (int j = j_lo; j < j_hi; ++j) {
                            dst[j] += wv * src[j];
                        }
                    }
                }
            }
        }
    }
}

// dw[f][c][ki][kj] = sum_ij dout[f][i][j] * in[c][i+di][j+dj]
void conv3x3_weight_grads(const double* in, int C, int rows, int cols, const double* dout,
                          int F, double* dw) {
    const size_t plane = static_cast<size_t>(rows) * cols;
    for (int f = 0; f < F; ++f) {
        const double* dout_plane = dout + f * plane;
        for (int c = 0; c < C; ++c) {
            const double* in_plane = in + c * plane;
            double* dwk = dw + (static_cast<size_t>(f) * C + c) * 9;
            for (int ki = 0; ki < 3; ++ki) {
                const int di = ki - 1;
                const int i_lo = std::max(0, -di);
                const int i_hi = std::min(rows, rows - di);
                for (int kj = 0; kj < 3; ++kj) {
                    const int dj = kj - 1;
                    const int j_lo = std::max(0, -dj);
                    const int j_hi = std::min(cols, cols - dj);
                    double acc = 0.0;
                    for (int i = i_lo; i < i_hi; ++i) {
                        const double* src = in_plane + static_cast<size_t>(i + di) * cols + dj;
                        const double* g = dout_plane + static_cast<size_t>(i) * cols;
                        for (int j = j_lo; j < j_hi; ++j) {
                            acc += g[j] * src[j];
                        }
                    }
                    dwk[ki * 3 + kj] += acc;
                }
            }
        }
    }
}

// din[c][i+di][j+dj] += w[f][c][ki][kj] * dout[f][i][j]
void conv3x3_input_grads(const double* dout, int F, int rows, int cols, const double* w,
                         int C, double* din) {
    const size_t plane = static_cast<size_t>(rows) * cols;
    for (int f = 0; f < F; ++f) {
        const double* dout_plane = dout + f * plane;
        for (int c = 0; c < C; ++c) {
            double* din_plane = din + c * plane;
            const double* wk = w + (static_cast<size_t>(f) * C + c) * 9;
            for (int ki = 0; ki < 3; ++ki) {
                const int di = ki - 1;
                const int i_lo = std::max(0, -di);
                const int i_hi = std::min(rows, rows - di);
                for (int kj = 0; kj < 3; ++kj) {
                    const int dj = kj - 1;
                    const double wv = wk[ki * 3 + kj];
                    if (wv == 0.0) {
                        continue;
                    }
                    const int j_lo = std::max(0, -dj);
                    const int j_hi = std::min(cols, cols - dj);
                    for (int i = i_lo; i < i_hi; ++i) {
                        double* dst = din_plane + static_cast<size_t>(i + di) * cols + dj;
                        const double* g = dout_plane + static_cast<size_t>(i) * cols;
                        for (int j = j_lo; j < j_hi; ++j) {
                            dst[j] += wv * g[j];
                        }
                    }
                }
            }
        }
    }
}

void add_bias(double* planes, int F, size_t plane, const double* bias) {
    for (int f = 0; f < F; ++f) {
        double* p = planes + f * plane;
        const double b = bias[f];
        for (size_t k = 0; k < plane; ++k) {
            p[k] += b;
        }
    }
}

void relu(const double* z, size_t count, double* a) {
    for (size_t k = 0; k < count; ++k) {
        a[k] = z[k] > 0.0 ? z[k] : 0.0;
    }
}

GridD grid_from_plane(const std::vector<double>& buf, size_t offset, int rows, int cols) {
    GridD g(rows, cols);
    std::copy_n(buf.data() + offset, static_cast<size_t>(rows) * cols, g.data().begin());
    return g;
}

}  // namespace

NetOutput forward(const PredictorParams& params, const FrameStack& input) {
    const NetConfig& cfg = params.config();
    if (static_cast<int>(input.size()) != cfg.t_in) {
        raise(ErrorKind::shape, "forward expects t_in stacked frames");
    }
    const int rows = input[0].rows();
    const int cols = input[0].cols();
    for (const GridU8& frame : input) {
        if (frame.rows() != rows || frame.cols() != cols) {
            raise(ErrorKind::shape, "stacked frames must share one shape");
        }
    }
    const size_t plane = static_cast<size_t>(rows) * cols;
    const int T = cfg.t_in;
    const int F = cfg.hidden;
    const ParamLayout& l = params.layout();
    const double* w = params.values().data();

    ForwardCache cache;
    cache.rows = rows;
    cache.cols = cols;
    cache.params_revision = params.revision();
    cache.input.resize(T * plane);
    for (int t = 0; t < T; ++t) {
        const auto& src = input[t].data();
        double* dst = cache.input.data() + t * plane;
        for (size_t k = 0; k < plane; ++k) {
            dst[k] = static_cast<double>(src[k]);
        }
    }

    cache.z1.assign(F * plane, 0.0);
    conv3x3_accumulate(cache.input.data(), T, rows, cols, w + l.conv1_w, F, cache.z1.data());
    add_bias(cache.z1.data(), F, plane, w + l.conv1_b);
    cache.a1.resize(F * plane);
    relu(cache.z1.data(), cache.z1.size(), cache.a1.data());

    cache.z2.assign(F * plane, 0.0);
    conv3x3_accumulate(cache.a1.data(), F, rows, cols, w + l.conv2_w, F, cache.z2.data());
    add_bias(cache.z2.data(), F, plane, w + l.conv2_b);
    cache.a2.resize(F * plane);
    relu(cache.z2.data(), cache.z2.size(), cache.a2.data());

    // 1x1 heads
    std::vector<double> motion(4 * plane, 0.0);
    std::vector<double> state(2 * plane, 0.0);
    const double* wm = w + l.motion_w;
    const double* ws = w + l.state_w;
    for (int f = 0; f < F; ++f) {
        const double* a = cache.a2.data() + f * plane;
        for (int c = 0; c < 4; ++c) {
            const double wv = wm[c * F + f];
            if (wv == 0.0) continue;
            double* dst = motion.data() + c * plane;
            for (size_t k = 0; k < plane; ++k) {
                dst[k] += wv * a[k];
            }
        }
        for (int s = 0; s < 2; ++s) {
            const double wv = ws[s * F + f];
            if (wv == 0.0) continue;
            double* dst = state.data() + s * plane;
            for (size_t k = 0; k < plane; ++k) {
                dst[k] += wv * a[k];
            }
        }
    }
    add_bias(motion.data(), 4, plane, w + l.motion_b);
    add_bias(state.data(), 2, plane, w + l.state_b);

    NetOutput out;
    out.dx02 = grid_from_plane(motion, 0 * plane, rows, cols);
    out.dy02 = grid_from_plane(motion, 1 * plane, rows, cols);
    out.dx04 = grid_from_plane(motion, 2 * plane, rows, cols);
    out.dy04 = grid_from_plane(motion, 3 * plane, rows, cols);
    out.logit_static = grid_from_plane(state, 0 * plane, rows, cols);
    out.logit_moving = grid_from_plane(state, 1 * plane, rows, cols);
    out.cache = std::move(cache);
    return out;
}

BackwardResult backward(const PredictorParams& params, const ForwardCache& cache,
                        const OutputGrads& grads, bool want_input_grads) {
    if (cache.params_revision != params.revision()) {
        raise(ErrorKind::invalid_cache, "forward cache is stale for these parameters");
    }
    const NetConfig& cfg = params.config();
    const int rows = cache.rows;
    const int cols = cache.cols;
    const size_t plane = static_cast<size_t>(rows) * cols;
    const int T = cfg.t_in;
    const int F = cfg.hidden;
    const ParamLayout& l = params.layout();
    const double* w = params.values().data();

    auto plane_or_zero = [&](const GridD& g, const char* name) -> std::vector<double> {
        if (g.size() == 0) {
            return std::vector<double>(plane, 0.0);
        }
        if (g.rows() != rows || g.cols() != cols) {
            raise(ErrorKind::shape, std::string("output gradient shape mismatch: ") + name);
        }
        return g.data();
    };
    std::vector<double> dmotion(4 * plane);
    std::vector<double> dstate(2 * plane);
    {
        auto g0 = plane_or_zero(grads.dx02, "dx02");
        auto g1 = plane_or_zero(grads.dy02, "dy02");
        auto g2 = plane_or_zero(grads.dx04, "dx04");
        auto g3 = plane_or_zero(grads.dy04, "dy04");
        std::copy(g0.begin(), g0.end(), dmotion.begin());
        std::copy(g1.begin(), g1.end(), dmotion.begin() + plane);
        std::copy(g2.begin(), g2.end(), dmotion.begin() + 2 * plane);
        std::copy(g3.begin(), g3.end(), dmotion.begin() + 3 * plane);
        auto s0 = plane_or_zero(grads.logit_static, "logit_static");
        auto s1 = plane_or_zero(grads.logit_moving, "logit_moving");
        std::copy(s0.begin(), s0.end(), dstate.begin());
        std::copy(s1.begin(), s1.end(), dstate.begin() + plane);
    }

    BackwardResult result;
    result.param_grads.assign(l.total, 0.0);
    double* dg = result.param_grads.data();

    // heads
    std::vector<double> da2(F * plane, 0.0);
    const double* wm = w + l.motion_w;
    const double* ws = w + l.state_w;
    for (int c = 0; c < 4; ++c) {
        const double* g = dmotion.data() + c * plane;
        double bias_acc = 0.0;
        for (size_t k = 0; k < plane; ++k) {
            bias_acc += g[k];
        }
        dg[l.motion_b + c] += bias_acc;
        for (int f = 0; f < F; ++f) {
            const double* a = cache.a2.data() + f * plane;
            double acc = 0.0;
            const double wv = wm[c * F + f];
            double* da = da2.data() + f * plane;
            for (size_t k = 0; k < plane; ++k) {
                acc += g[k] * a[k];
                da[k] += wv * g[k];
            }
            dg[l.motion_w + c * F + f] += acc;
        }
    }
    for (int s = 0; s < 2; ++s) {
        const double* g = dstate.data() + s * plane;
        double bias_acc = 0.0;
        for (size_t k = 0; k < plane; ++k) {
            bias_acc += g[k];
        }
        dg[l.state_b + s] += bias_acc;
        for (int f = 0; f < F; ++f) {
            const double* a = cache.a2.data() + f * plane;
            double acc = 0.0;
            const double wv = ws[s * F + f];
            double* da = da2.data() + f * plane;
            for (size_t k = 0; k < plane; ++k) {
                acc += g[k] * a[k];
                da[k] += wv * g[k];
            }
            dg[l.state_w + s * F + f] += acc;
        }
    }

    // conv2
    std::vector<double> dz2(F * plane);
    for (size_t k = 0; k < dz2.size(); ++k) {
        dz2[k] = cache.z2[k] > 0.0 ? da2[k] : 0.0;
    }
    for (int f = 0; f < F; ++f) {
        const double* g = dz2.data() + f * plane;
        double acc = 0.0;
        for (size_t k = 0; k < plane; ++k) {
            acc += g[k];
        }
        dg[l.conv2_b + f] += acc;
    }
    conv3x3_weight_grads(cache.a1.data(), F, rows, cols, dz2.data(), F, dg + l.conv2_w);
    std::vector<double> da1(F * plane, 0.0);
    conv3x3_input_grads(dz2.data(), F, rows, cols, w + l.conv2_w, F, da1.data());

    // conv1
    std::vector<double> dz1(F * plane);
    for (size_t k = 0; k < dz1.size(); ++k) {
        dz1[k] = cache.z1[k] > 0.0 ? da1[k] : 0.0;
    }
    for (int f = 0; f < F; ++f) {
        const double* g = dz1.data() + f * plane;
        double acc = 0.0;
        for (size_t k = 0; k < plane; ++k) {
            acc += g[k];
        }
        dg[l.conv1_b + f] += acc;
    }
    conv3x3_weight_grads(cache.input.data(), T, rows, cols, dz1.data(), F, dg + l.conv1_w);

    if (want_input_grads) {
        result.input_grads.assign(T * plane, 0.0);
        conv3x3_input_grads(dz1.data(), F, rows, cols, w + l.conv1_w, T,
                            result.input_grads.data());
    }
    return result;
}

OptimizerState OptimizerState::init(const AdamConfig& cfg, size_t param_count) {
    OptimizerState s;
    s.cfg = cfg;
    s.m.assign(param_count, 0.0);
    s.v.assign(param_count, 0.0);
    return s;
}

double OptimizerState::effective_lr() const {
    const int halvings = cfg.decay_every_epochs > 0 ? epoch / cfg.decay_every_epochs : 0;
    return cfg.learning_rate * std::pow(cfg.decay_factor, halvings);
}

void adam_step(PredictorParams& params, const std::vector<double>& grads,
               OptimizerState& state) {
    std::vector<double>& p = params.mutable_values();
    if (grads.size() != p.size() || state.m.size() != p.size()) {
        raise(ErrorKind::shape, "adam_step size mismatch");
    }
    state.step += 1;
    const AdamConfig& c = state.cfg;
    const double lr = state.effective_lr();
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (size_t k = 0; k < p.size(); ++k) {
        state.m[k] = c.beta1 * state.m[k] + (1.0 - c.beta1) * grads[k];
        state.v[k] = c.beta2 * state.v[k] + (1.0 - c.beta2) * grads[k] * grads[k];
        const double m_hat = state.m[k] / bc1;
        const double v_hat = state.v[k] / bc2;
        p[k] -= lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
    params.bump_revision();
}

uint64_t relu_fingerprint(const ForwardCache& cache) {
    uint64_t fp = 1469598103934665603ULL;
    for (double z : cache.z1) {
        fingerprint_mix(fp, z > 0.0);
    }
    for (double z : cache.z2) {
        fingerprint_mix(fp, z > 0.0);
    }
    return fp;
}

GradCheckReport grad_check(const PredictorParams& params, const LossFn& loss_fn,
                           const GradCheckOptions& opts) {
    LossProbe base = loss_fn(params, true);
    if (base.param_grads.size() != params.values().size()) {
        raise(ErrorKind::shape, "loss_fn returned gradients of the wrong size");
    }

    const size_t total = params.values().size();
    std::vector<size_t> indices;
    if (opts.sample_count <= 0 || static_cast<size_t>(opts.sample_count) >= total) {
        indices.resize(total);
        for (size_t k = 0; k < total; ++k) {
            indices[k] = k;
        }
    } else {
        Rng rng(opts.seed);
        indices.reserve(opts.sample_count);
        for (int k = 0; k < opts.sample_count; ++k) {
            indices.push_back(rng.next_below(total));
        }
    }

    GradCheckReport report;
    PredictorParams probe = params;
    for (size_t idx : indices) {
        const double original = probe.mutable_values()[idx];
        probe.mutable_values()[idx] = original + opts.step;
        const LossProbe plus = loss_fn(probe, false);
        probe.mutable_values()[idx] = original - opts.step;
        const LossProbe minus = loss_fn(probe, false);
        probe.mutable_values()[idx] = original;

        if (plus.branch_fingerprint != minus.branch_fingerprint) {
            ++report.skipped;
            continue;
        }
        const double numeric = (plus.value - minus.value) / (2.0 * opts.step);
        const double analytic = base.param_grads[idx];
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
        const double rel = std::abs(numeric - analytic) / denom;
        report.max_rel_error = std::max(report.max_rel_error, rel);
        ++report.checked;
    }
    report.pass = report.checked > 0 && report.max_rel_error < opts.tolerance;
    return report;
}

// ---- checkpoint io ----

namespace {
constexpr char kCheckpointMagic[4] = {'B', 'M', 'C', 'K'};
constexpr uint16_t kCheckpointMajor = 1;
constexpr uint16_t kCheckpointMinor = 0;
}  // namespace

void save_checkpoint(const PredictorParams& params, int rows, int cols,
                     const std::string& path) {
    ByteWriter out;
    out.bytes(kCheckpointMagic, 4);
    out.u16(kCheckpointMajor);
    out.u16(kCheckpointMinor);
    out.u32(static_cast<uint32_t>(params.config().t_in));
    out.u32(static_cast<uint32_t>(params.config().hidden));
    out.u32(static_cast<uint32_t>(rows));
    out.u32(static_cast<uint32_t>(cols));
    out.u64(params.values().size());
    for (double v : params.values()) {
        out.f32(static_cast<float>(v));
    }
    write_file(path, out.buffer());
}

Checkpoint load_checkpoint(const std::string& path) {
    const std::vector<uint8_t> blob = read_file(path);
    ByteReader in(blob);
    char magic[4];
    in.bytes(magic, 4);
    if (std::memcmp(magic, kCheckpointMagic, 4) != 0) {
        raise(ErrorKind::version, "not a checkpoint file: " + path);
    }
    const uint16_t major = in.u16();
    in.u16();  // minor, ignored
    if (major != kCheckpointMajor) {
        raise(ErrorKind::version,
              "unsupported checkpoint major version " + std::to_string(major));
    }
    NetConfig cfg;
    cfg.t_in = static_cast<int>(in.u32());
    cfg.hidden = static_cast<int>(in.u32());
    Checkpoint ck;
    ck.rows = static_cast<int>(in.u32());
    ck.cols = static_cast<int>(in.u32());
    const uint64_t count = in.u64();
    ck.params = PredictorParams::zeros(cfg);
    if (count != ck.params.values().size()) {
        raise(ErrorKind::io, "checkpoint parameter count mismatch");
    }
    for (uint64_t k = 0; k < count; ++k) {
        ck.params.mutable_values()[k] = static_cast<double>(in.f32());
    }
    return ck;
}

}  // namespace bevmotion
