#include "proxemo/nn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "proxemo/parallel.hpp"

namespace proxemo {

// ---------------------------------------------------------------------------
// parallel_for

namespace {
int g_num_threads = 0;
}

int num_threads() {
    if (g_num_threads > 0) return g_num_threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

void set_num_threads(int n) { g_num_threads = n; }

void parallel_for_chunks(std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& f) {
    if (n <= 0) return;
    const int k = static_cast<int>(std::min<std::int64_t>(num_threads(), n));
    if (k <= 1) {
        f(0, n);
        return;
    }
    const std::int64_t chunk = (n + k - 1) / k;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(k - 1));
    for (int i = 1; i < k; ++i) {
        const std::int64_t lo = i * chunk;
        const std::int64_t hi = std::min<std::int64_t>(lo + chunk, n);
        if (lo >= hi) break;
        workers.emplace_back([&f, lo, hi] { f(lo, hi); });
    }
    f(0, std::min<std::int64_t>(chunk, n));
    for (auto& w : workers) w.join();
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& f) {
    parallel_for_chunks(n, [&f](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) f(i);
    });
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, int groups, Rng& init_rng)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad),
      groups_(groups) {
    if (groups_ < 1 || in_ch_ % groups_ != 0 || out_ch_ % groups_ != 0)
        throw ShapeError("conv2d: channels must be divisible by groups");
    if (kernel_ < 1 || stride_ < 1 || pad_ < 0)
        throw ShapeError("conv2d: bad kernel/stride/pad");

    const int icg = in_ch_ / groups_;
    weight = Tensor4(out_ch_, icg, kernel_, kernel_);
    weight_grad = Tensor4(out_ch_, icg, kernel_, kernel_);
    bias.assign(static_cast<std::size_t>(out_ch_), 0.0);
    bias_grad.assign(static_cast<std::size_t>(out_ch_), 0.0);

    // Kaiming-uniform, fan-in, ReLU gain.
    const double fan_in = static_cast<double>(icg) * kernel_ * kernel_;
    const double bound = std::sqrt(6.0 / fan_in);
    for (auto& v : weight.v) v = init_rng.uniform(-bound, bound);
}

namespace {

// ox range keeping ox*stride - pad + kx inside [0, iw)
inline void ox_bounds(int kx, int stride, int pad, int iw, int ow, int& lo, int& hi) {
    lo = 0;
    while (lo < ow && lo * stride - pad + kx < 0) ++lo;
    hi = ow - 1;
    while (hi >= lo && hi * stride - pad + kx >= iw) --hi;
}

}  // namespace

Tensor4 Conv2d::forward(const Tensor4& x, bool /*train*/) {
    if (x.c != in_ch_) throw ShapeError("conv2d: input channel mismatch");
    const int oh = (x.h + 2 * pad_ - kernel_) / stride_ + 1;
    const int ow = (x.w + 2 * pad_ - kernel_) / stride_ + 1;
    if (oh < 1 || ow < 1) throw ShapeError("conv2d: input too small for kernel");

    input_ = x;
    have_input_ = true;

    Tensor4 out(x.n, out_ch_, oh, ow);
    const int icg = in_ch_ / groups_;
    const int ocg = out_ch_ / groups_;
    const int k = kernel_, stride = stride_, pad = pad_;
    const int ih = x.h, iw = x.w;

    parallel_for(static_cast<std::int64_t>(x.n) * out_ch_, [&](std::int64_t task) {
        const int b = static_cast<int>(task / out_ch_);
        const int oc = static_cast<int>(task % out_ch_);
        const int ic0 = (oc / ocg) * icg;
        double* out_plane = out.plane(b, oc);
        const double bv = bias[static_cast<std::size_t>(oc)];
        for (int i = 0; i < oh * ow; ++i) out_plane[i] = bv;

        // interior ox range valid for every kx at once (stride 1 fast path)
        int in_lo = 0, in_hi = -1;
        if (stride == 1) {
            in_lo = pad;
            in_hi = std::min(ow - 1, iw - 1 + pad - (k - 1));
        }

        for (int icl = 0; icl < icg; ++icl) {
            const double* in_plane = input_.plane(b, ic0 + icl);
            const double* w_row0 = &weight.at(oc, icl, 0, 0);
            for (int ky = 0; ky < k; ++ky) {
                const double* wk = w_row0 + static_cast<std::size_t>(ky) * k;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= ih) continue;
                    const double* in_row = in_plane + static_cast<std::size_t>(iy) * iw;
                    double* out_row = out_plane + static_cast<std::size_t>(oy) * ow;
                    if (stride == 1) {
                        // edges with per-kx clipping, then the shared interior
                        for (int kx = 0; kx < k; ++kx) {
                            int lo, hi;
                            ox_bounds(kx, 1, pad, iw, ow, lo, hi);
                            const double wv = wk[kx];
                            const double* in_off = in_row - pad + kx;
                            for (int ox = lo; ox < std::min(in_lo, hi + 1); ++ox)
                                out_row[ox] += wv * in_off[ox];
                            for (int ox = std::max(lo, in_hi + 1); ox <= hi; ++ox)
                                out_row[ox] += wv * in_off[ox];
                        }
                        const double* in_base = in_row - pad;
                        if (k == 3) {
                            const double w0 = wk[0], w1 = wk[1], w2 = wk[2];
                            for (int ox = in_lo; ox <= in_hi; ++ox)
                                out_row[ox] += w0 * in_base[ox] + w1 * in_base[ox + 1] +
                                               w2 * in_base[ox + 2];
                        } else {
                            for (int ox = in_lo; ox <= in_hi; ++ox) {
                                double acc = out_row[ox];
                                for (int kx = 0; kx < k; ++kx) acc += wk[kx] * in_base[ox + kx];
                                out_row[ox] = acc;
                            }
                        }
                    } else {
                        for (int kx = 0; kx < k; ++kx) {
                            int lo, hi;
                            ox_bounds(kx, stride, pad, iw, ow, lo, hi);
                            const double wv = wk[kx];
                            for (int ox = lo; ox <= hi; ++ox)
                                out_row[ox] += wv * in_row[ox * stride - pad + kx];
                        }
                    }
                }
            }
        }
    });
    return out;
}

Tensor4 Conv2d::backward(const Tensor4& grad_out) {
    if (!have_input_) throw std::logic_error("conv2d: backward without forward");
    have_input_ = false;

    const int oh = (input_.h + 2 * pad_ - kernel_) / stride_ + 1;
    const int ow = (input_.w + 2 * pad_ - kernel_) / stride_ + 1;
    grad_out.require_shape(input_.n, out_ch_, oh, ow, "conv2d backward");

    const int icg = in_ch_ / groups_;
    const int ocg = out_ch_ / groups_;
    const int k = kernel_, stride = stride_, pad = pad_;
    const int ih = input_.h, iw = input_.w;
    const int n = input_.n;

    // Parameter gradients: each task owns one output channel.
    parallel_for(out_ch_, [&](std::int64_t oc_task) {
        const int oc = static_cast<int>(oc_task);
        const int ic0 = (oc / ocg) * icg;
        double bsum = 0.0;
        for (int b = 0; b < n; ++b) {
            const double* go_plane = grad_out.plane(b, oc);
            for (int i = 0; i < oh * ow; ++i) bsum += go_plane[i];
            for (int icl = 0; icl < icg; ++icl) {
                const double* in_plane = input_.plane(b, ic0 + icl);
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        int ox_lo, ox_hi;
                        ox_bounds(kx, stride, pad, iw, ow, ox_lo, ox_hi);
                        double acc = 0.0;
                        for (int oy = 0; oy < oh; ++oy) {
                            const int iy = oy * stride - pad + ky;
                            if (iy < 0 || iy >= ih) continue;
                            const double* in_row = in_plane + static_cast<std::size_t>(iy) * iw;
                            const double* go_row = go_plane + static_cast<std::size_t>(oy) * ow;
                            if (stride == 1) {
                                const double* in_off = in_row - pad + kx;
                                for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                    acc += go_row[ox] * in_off[ox];
                            } else {
                                for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                    acc += go_row[ox] * in_row[ox * stride - pad + kx];
                            }
                        }
                        weight_grad.at(oc, icl, ky, kx) += acc;
                    }
                }
            }
        }
        bias_grad[static_cast<std::size_t>(oc)] += bsum;
    });

    // Input gradient: each task owns one sample. For stride 1 the inner loop
    // gathers over kx so each grad_in element is stored once per (oc, ky).
    Tensor4 grad_in(n, in_ch_, ih, iw);
    parallel_for(n, [&](std::int64_t b_task) {
        const int b = static_cast<int>(b_task);
        for (int oc = 0; oc < out_ch_; ++oc) {
            const int ic0 = (oc / ocg) * icg;
            const double* go_plane = grad_out.plane(b, oc);
            for (int icl = 0; icl < icg; ++icl) {
                double* gi_plane = grad_in.plane(b, ic0 + icl);
                const double* w_row0 = &weight.at(oc, icl, 0, 0);
                if (stride == 1) {
                    // ix range where ox = ix - kx + pad is valid for every kx
                    const int ix_lo = std::max(0, k - 1 - pad);
                    const int ix_hi = std::min(iw - 1, ow - 1 - pad);
                    for (int ky = 0; ky < k; ++ky) {
                        const double* wk = w_row0 + static_cast<std::size_t>(ky) * k;
                        for (int iy = 0; iy < ih; ++iy) {
                            const int oy = iy - ky + pad;
                            if (oy < 0 || oy >= oh) continue;
                            const double* go_row = go_plane + static_cast<std::size_t>(oy) * ow;
                            double* gi_row = gi_plane + static_cast<std::size_t>(iy) * iw;
                            for (int kx = 0; kx < k; ++kx) {
                                // edge columns outside the shared gather range
                                int lo, hi;
                                ox_bounds(kx, 1, pad, iw, ow, lo, hi);
                                const double wv = wk[kx];
                                double* gi_off = gi_row - pad + kx;
                                for (int ox = lo; ox < std::min(ix_lo + pad - kx, hi + 1); ++ox)
                                    gi_off[ox] += wv * go_row[ox];
                                for (int ox = std::max(lo, ix_hi + pad - kx + 1); ox <= hi; ++ox)
                                    gi_off[ox] += wv * go_row[ox];
                            }
                            const double* go_base = go_row + pad;
                            if (k == 3) {
                                const double w0 = wk[0], w1 = wk[1], w2 = wk[2];
                                for (int ix = ix_lo; ix <= ix_hi; ++ix)
                                    gi_row[ix] += w0 * go_base[ix] + w1 * go_base[ix - 1] +
                                                  w2 * go_base[ix - 2];
                            } else {
                                for (int ix = ix_lo; ix <= ix_hi; ++ix) {
                                    double acc = gi_row[ix];
                                    for (int kx = 0; kx < k; ++kx)
                                        acc += wk[kx] * go_base[ix - kx];
                                    gi_row[ix] = acc;
                                }
                            }
                        }
                    }
                } else {
                    for (int ky = 0; ky < k; ++ky) {
                        const double* wk = w_row0 + static_cast<std::size_t>(ky) * k;
                        for (int kx = 0; kx < k; ++kx) {
                            int ox_lo, ox_hi;
                            ox_bounds(kx, stride, pad, iw, ow, ox_lo, ox_hi);
                            const double wv = wk[kx];
                            for (int oy = 0; oy < oh; ++oy) {
                                const int iy = oy * stride - pad + ky;
                                if (iy < 0 || iy >= ih) continue;
                                double* gi_row = gi_plane + static_cast<std::size_t>(iy) * iw;
                                const double* go_row =
                                    go_plane + static_cast<std::size_t>(oy) * ow;
                                for (int ox = ox_lo; ox <= ox_hi; ++ox)
                                    gi_row[ox * stride - pad + kx] += wv * go_row[ox];
                            }
                        }
                    }
                }
            }
        }
    });
    return grad_in;
}

void Conv2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".weight", &weight.v, &weight_grad.v,
                   {weight.n, weight.c, weight.h, weight.w}});
    out.push_back({prefix + ".bias", &bias, &bias_grad, {out_ch_}});
}

std::string Conv2d::describe() const {
    std::ostringstream os;
    os << (groups_ > 1 ? "group_conv" : "conv") << " " << in_ch_ << "->" << out_ch_
       << " k" << kernel_ << " s" << stride_ << " p" << pad_;
    if (groups_ > 1) os << " g" << groups_;
    return os.str();
}

// ---------------------------------------------------------------------------
// ReLU

Tensor4 ReLU::forward(const Tensor4& x, bool /*train*/) {
    input_ = x;
    have_input_ = true;
    Tensor4 out = x;
    for (auto& v : out.v) v = v > 0.0 ? v : 0.0;
    return out;
}

Tensor4 ReLU::backward(const Tensor4& grad_out) {
    if (!have_input_) throw std::logic_error("relu: backward without forward");
    have_input_ = false;
    if (!grad_out.same_shape(input_)) throw ShapeError("relu backward: shape mismatch");
    Tensor4 grad_in = grad_out;
    for (std::size_t i = 0; i < grad_in.v.size(); ++i)
        if (input_.v[i] <= 0.0) grad_in.v[i] = 0.0;
    return grad_in;
}

// ---------------------------------------------------------------------------
// MaxPool2d

MaxPool2d::MaxPool2d(int window, int stride) : window_(window), stride_(stride) {
    if (window_ < 1 || stride_ < 1) throw ShapeError("maxpool: bad window/stride");
}

Tensor4 MaxPool2d::forward(const Tensor4& x, bool /*train*/) {
    if (x.h < window_ || x.w < window_) throw ShapeError("maxpool: window larger than input");
    const int oh = (x.h - window_) / stride_ + 1;
    const int ow = (x.w - window_) / stride_ + 1;
    in_n_ = x.n; in_c_ = x.c; in_h_ = x.h; in_w_ = x.w;
    argmax_.assign(static_cast<std::size_t>(x.n) * x.c * oh * ow, 0);
    have_input_ = true;

    Tensor4 out(x.n, x.c, oh, ow);
    parallel_for(static_cast<std::int64_t>(x.n) * x.c, [&](std::int64_t task) {
        const int b = static_cast<int>(task / x.c);
        const int c = static_cast<int>(task % x.c);
        const double* in_plane = x.plane(b, c);
        double* out_plane = out.plane(b, c);
        std::int32_t* am = argmax_.data() + task * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const int iy0 = oy * stride_, ix0 = ox * stride_;
                double best = in_plane[static_cast<std::size_t>(iy0) * x.w + ix0];
                std::int32_t best_at = iy0 * x.w + ix0;
                // ties keep the first (row-major) occurrence
                for (int dy = 0; dy < window_; ++dy)
                    for (int dx = 0; dx < window_; ++dx) {
                        const int iy = iy0 + dy, ix = ix0 + dx;
                        const double v = in_plane[static_cast<std::size_t>(iy) * x.w + ix];
                        if (v > best) {
                            best = v;
                            best_at = iy * x.w + ix;
                        }
                    }
                out_plane[static_cast<std::size_t>(oy) * ow + ox] = best;
                am[static_cast<std::size_t>(oy) * ow + ox] = best_at;
            }
        }
    });
    return out;
}

Tensor4 MaxPool2d::backward(const Tensor4& grad_out) {
    if (!have_input_) throw std::logic_error("maxpool: backward without forward");
    have_input_ = false;
    const int oh = (in_h_ - window_) / stride_ + 1;
    const int ow = (in_w_ - window_) / stride_ + 1;
    grad_out.require_shape(in_n_, in_c_, oh, ow, "maxpool backward");

    Tensor4 grad_in(in_n_, in_c_, in_h_, in_w_);
    parallel_for(static_cast<std::int64_t>(in_n_) * in_c_, [&](std::int64_t task) {
        const int b = static_cast<int>(task / in_c_);
        const int c = static_cast<int>(task % in_c_);
        const double* go_plane = grad_out.plane(b, c);
        double* gi_plane = grad_in.plane(b, c);
        const std::int32_t* am = argmax_.data() + task * oh * ow;
        for (int i = 0; i < oh * ow; ++i) gi_plane[am[i]] += go_plane[i];
    });
    return grad_in;
}

std::string MaxPool2d::describe() const {
    std::ostringstream os;
    os << "maxpool " << window_ << "x" << window_ << " s" << stride_;
    return os.str();
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum) {
    if (channels_ < 1) throw ShapeError("batchnorm: bad channel count");
    if (!(eps_ > 0.0)) throw ShapeError("batchnorm: epsilon must be positive");
    gamma.assign(static_cast<std::size_t>(channels_), 1.0);
    beta.assign(static_cast<std::size_t>(channels_), 0.0);
    running_mean.assign(static_cast<std::size_t>(channels_), 0.0);
    running_var.assign(static_cast<std::size_t>(channels_), 1.0);
    gamma_grad.assign(static_cast<std::size_t>(channels_), 0.0);
    beta_grad.assign(static_cast<std::size_t>(channels_), 0.0);
}

Tensor4 BatchNorm2d::forward(const Tensor4& x, bool train) {
    if (x.c != channels_) throw ShapeError("batchnorm: channel mismatch");
    const std::int64_t plane = static_cast<std::int64_t>(x.h) * x.w;
    const std::int64_t count = static_cast<std::int64_t>(x.n) * plane;

    x_hat_ = Tensor4(x.n, x.c, x.h, x.w);
    inv_std_.assign(static_cast<std::size_t>(channels_), 0.0);
    train_mode_ = train;
    have_input_ = true;

    Tensor4 out(x.n, x.c, x.h, x.w);
    parallel_for(channels_, [&](std::int64_t c_task) {
        const int c = static_cast<int>(c_task);
        double mean, var;
        if (train) {
            double sum = 0.0;
            for (int b = 0; b < x.n; ++b) {
                const double* p = x.plane(b, c);
                for (std::int64_t i = 0; i < plane; ++i) sum += p[i];
            }
            mean = sum / static_cast<double>(count);
            double sq = 0.0;
            for (int b = 0; b < x.n; ++b) {
                const double* p = x.plane(b, c);
                for (std::int64_t i = 0; i < plane; ++i) {
                    const double d = p[i] - mean;
                    sq += d * d;
                }
            }
            var = sq / static_cast<double>(count);
            running_mean[c] = (1.0 - momentum_) * running_mean[c] + momentum_ * mean;
            running_var[c] = (1.0 - momentum_) * running_var[c] + momentum_ * var;
        } else {
            mean = running_mean[c];
            var = running_var[c];
        }
        const double istd = 1.0 / std::sqrt(var + eps_);
        inv_std_[c] = istd;
        const double g = gamma[c], bta = beta[c];
        for (int b = 0; b < x.n; ++b) {
            const double* p = x.plane(b, c);
            double* xh = x_hat_.plane(b, c);
            double* o = out.plane(b, c);
            for (std::int64_t i = 0; i < plane; ++i) {
                xh[i] = (p[i] - mean) * istd;
                o[i] = g * xh[i] + bta;
            }
        }
    });
    return out;
}

Tensor4 BatchNorm2d::backward(const Tensor4& grad_out) {
    if (!have_input_) throw std::logic_error("batchnorm: backward without forward");
    have_input_ = false;
    if (!grad_out.same_shape(x_hat_)) throw ShapeError("batchnorm backward: shape mismatch");

    const std::int64_t plane = static_cast<std::int64_t>(grad_out.h) * grad_out.w;
    const std::int64_t count = static_cast<std::int64_t>(grad_out.n) * plane;

    Tensor4 grad_in(grad_out.n, grad_out.c, grad_out.h, grad_out.w);
    parallel_for(channels_, [&](std::int64_t c_task) {
        const int c = static_cast<int>(c_task);
        double sum_go = 0.0, sum_go_xh = 0.0;
        for (int b = 0; b < grad_out.n; ++b) {
            const double* go = grad_out.plane(b, c);
            const double* xh = x_hat_.plane(b, c);
            for (std::int64_t i = 0; i < plane; ++i) {
                sum_go += go[i];
                sum_go_xh += go[i] * xh[i];
            }
        }
        gamma_grad[c] += sum_go_xh;
        beta_grad[c] += sum_go;

        const double scale = gamma[c] * inv_std_[c];
        if (train_mode_) {
            const double mean_go = sum_go / static_cast<double>(count);
            const double mean_go_xh = sum_go_xh / static_cast<double>(count);
            for (int b = 0; b < grad_out.n; ++b) {
                const double* go = grad_out.plane(b, c);
                const double* xh = x_hat_.plane(b, c);
                double* gi = grad_in.plane(b, c);
                for (std::int64_t i = 0; i < plane; ++i)
                    gi[i] = scale * (go[i] - mean_go - xh[i] * mean_go_xh);
            }
        } else {
            for (int b = 0; b < grad_out.n; ++b) {
                const double* go = grad_out.plane(b, c);
                double* gi = grad_in.plane(b, c);
                for (std::int64_t i = 0; i < plane; ++i) gi[i] = scale * go[i];
            }
        }
    });
    return grad_in;
}

void BatchNorm2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".gamma", &gamma, &gamma_grad, {channels_}});
    out.push_back({prefix + ".beta", &beta, &beta_grad, {channels_}});
}

std::string BatchNorm2d::describe() const {
    return "batchnorm " + std::to_string(channels_);
}

// ---------------------------------------------------------------------------
// GlobalAvgPool

Tensor4 GlobalAvgPool::forward(const Tensor4& x, bool /*train*/) {
    in_n_ = x.n; in_c_ = x.c; in_h_ = x.h; in_w_ = x.w;
    have_input_ = true;
    Tensor4 out(x.n, x.c, 1, 1);
    const std::int64_t plane = static_cast<std::int64_t>(x.h) * x.w;
    for (int b = 0; b < x.n; ++b)
        for (int c = 0; c < x.c; ++c) {
            const double* p = x.plane(b, c);
            double sum = 0.0;
            for (std::int64_t i = 0; i < plane; ++i) sum += p[i];
            out.at(b, c, 0, 0) = sum / static_cast<double>(plane);
        }
    return out;
}

Tensor4 GlobalAvgPool::backward(const Tensor4& grad_out) {
    if (!have_input_) throw std::logic_error("global_avg_pool: backward without forward");
    have_input_ = false;
    grad_out.require_shape(in_n_, in_c_, 1, 1, "global_avg_pool backward");
    Tensor4 grad_in(in_n_, in_c_, in_h_, in_w_);
    const std::int64_t plane = static_cast<std::int64_t>(in_h_) * in_w_;
    for (int b = 0; b < in_n_; ++b)
        for (int c = 0; c < in_c_; ++c) {
            const double g = grad_out.at(b, c, 0, 0) / static_cast<double>(plane);
            double* gi = grad_in.plane(b, c);
            for (std::int64_t i = 0; i < plane; ++i) gi[i] = g;
        }
    return grad_in;
}

// ---------------------------------------------------------------------------
// Sequential

Tensor4 Sequential::forward(const Tensor4& x, bool train) {
    Tensor4 cur = x;
    for (auto& layer : layers_) cur = layer->forward(cur, train);
    return cur;
}

Tensor4 Sequential::backward(const Tensor4& grad_out) {
    Tensor4 cur = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
    return cur;
}

std::vector<ParamRef> Sequential::params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->collect_params("layer" + std::to_string(i), out);
    return out;
}

std::vector<std::string> Sequential::describe() const {
    std::vector<std::string> out;
    out.reserve(layers_.size());
    for (const auto& layer : layers_) out.push_back(layer->describe());
    return out;
}

// ---------------------------------------------------------------------------
// Softmax grid and cross-entropy

double SoftmaxGrid::sum() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

std::pair<int, int> SoftmaxGrid::argmax() const {
    int best = 0;
    for (int i = 1; i < kGridCells; ++i)
        if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(best)]) best = i;
    return {best / 4, best % 4};
}

SoftmaxGrid softmax_grid(const std::array<double, kGridCells>& logits) {
    for (double v : logits)
        if (!std::isfinite(v)) throw InvalidInputError("softmax_grid: non-finite logit");
    const double mx = *std::max_element(logits.begin(), logits.end());
    SoftmaxGrid out;
    double sum = 0.0;
    for (int i = 0; i < kGridCells; ++i) {
        out.p[static_cast<std::size_t>(i)] = std::exp(logits[static_cast<std::size_t>(i)] - mx);
        sum += out.p[static_cast<std::size_t>(i)];
    }
    for (auto& v : out.p) v /= sum;
    return out;
}

double cross_entropy(const SoftmaxGrid& pred, const std::array<double, kGridCells>& one_hot_target) {
    int hot = -1;
    for (int i = 0; i < kGridCells; ++i) {
        const double t = one_hot_target[static_cast<std::size_t>(i)];
        if (t == 1.0) {
            if (hot >= 0) throw InvalidInputError("cross_entropy: target not one-hot");
            hot = i;
        } else if (t != 0.0) {
            throw InvalidInputError("cross_entropy: target not one-hot");
        }
    }
    if (hot < 0) throw InvalidInputError("cross_entropy: target not one-hot");
    const double p = pred.p[static_cast<std::size_t>(hot)];
    if (!(p > 0.0) || p > 1.0 + 1e-12)
        throw InvalidInputError("cross_entropy: prediction outside (0,1]");
    return -std::log(p);
}

SoftmaxLoss softmax_cross_entropy(const Tensor4& logits, const std::vector<int>& target_cells) {
    if (logits.c != kGridCells || logits.h != 1 || logits.w != 1)
        throw ShapeError("softmax_cross_entropy: logits must be (n,16,1,1)");
    if (static_cast<std::size_t>(logits.n) != target_cells.size())
        throw ShapeError("softmax_cross_entropy: batch/target size mismatch");

    SoftmaxLoss out;
    out.grad_logits = Tensor4(logits.n, kGridCells, 1, 1);
    out.grids.resize(static_cast<std::size_t>(logits.n));
    const double inv_n = 1.0 / static_cast<double>(logits.n);
    for (int b = 0; b < logits.n; ++b) {
        std::array<double, kGridCells> lg{};
        for (int i = 0; i < kGridCells; ++i) lg[static_cast<std::size_t>(i)] = logits.at(b, i, 0, 0);
        const SoftmaxGrid grid = softmax_grid(lg);
        out.grids[static_cast<std::size_t>(b)] = grid;
        const int target = target_cells[static_cast<std::size_t>(b)];
        if (target < 0 || target >= kGridCells)
            throw InvalidInputError("softmax_cross_entropy: target cell out of range");
        out.loss += -std::log(std::max(grid.p[static_cast<std::size_t>(target)], 1e-300)) * inv_n;
        for (int i = 0; i < kGridCells; ++i) {
            const double y = i == target ? 1.0 : 0.0;
            out.grad_logits.at(b, i, 0, 0) = (grid.p[static_cast<std::size_t>(i)] - y) * inv_n;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Adam

double lr_at_epoch(const AdamConfig& cfg, int epoch) {
    const int k = epoch <= 0 ? 0 : epoch / cfg.decay_every;
    return cfg.lr * std::pow(cfg.decay, k);
}

Adam::Adam(std::vector<ParamRef> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        if (p.value->size() != p.grad->size())
            throw ShapeError("adam: parameter/gradient size mismatch for " + p.name);
        m_.emplace_back(p.value->size(), 0.0);
        v_.emplace_back(p.value->size(), 0.0);
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

void Adam::step(int epoch) {
    ++t_;
    const double lr = lr_at_epoch(cfg_, epoch);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        auto& value = *params_[pi].value;
        auto& grad = *params_[pi].grad;
        if (value.size() != grad.size())
            throw ShapeError("adam: parameter/gradient size mismatch for " + params_[pi].name);
        auto& m = m_[pi];
        auto& v = v_[pi];
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i];
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            value[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
        }
    }
}

}  // namespace proxemo
