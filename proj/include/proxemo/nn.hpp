#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "proxemo/rng.hpp"
#include "proxemo/tensor.hpp"

namespace proxemo {

// ---------------------------------------------------------------------------
// Parameters

struct ParamRef {
    std::string name;
    std::vector<double>* value = nullptr;
    std::vector<double>* grad = nullptr;
    std::vector<int> shape;
};

// ---------------------------------------------------------------------------
// Layers

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor4 forward(const Tensor4& x, bool train) = 0;
    // Consumes the state recorded by the last forward. Calling backward twice
    // (or before any forward) is an error.
    virtual Tensor4 backward(const Tensor4& grad_out) = 0;
    virtual void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
        (void)prefix;
        (void)out;
    }
    virtual std::string describe() const = 0;
};

class Conv2d : public Layer {
public:
    // Cross-correlation with stride/padding. groups > 1 splits in/out channels
    // into independent slices convolved in isolation and concatenated.
    Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad, int groups, Rng& init_rng);

    Tensor4 forward(const Tensor4& x, bool train) override;
    Tensor4 backward(const Tensor4& grad_out) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    std::string describe() const override;

    int in_channels() const { return in_ch_; }
    int out_channels() const { return out_ch_; }
    int groups() const { return groups_; }

    Tensor4 weight;              // (out_ch, in_ch/groups, k, k)
    std::vector<double> bias;    // (out_ch)
    Tensor4 weight_grad;
    std::vector<double> bias_grad;

private:
    int in_ch_, out_ch_, kernel_, stride_, pad_, groups_;
    Tensor4 input_;
    bool have_input_ = false;
};

class ReLU : public Layer {
public:
    Tensor4 forward(const Tensor4& x, bool train) override;
    Tensor4 backward(const Tensor4& grad_out) override;
    std::string describe() const override { return "relu"; }

private:
    Tensor4 input_;
    bool have_input_ = false;
};

class MaxPool2d : public Layer {
public:
    MaxPool2d(int window, int stride);

    Tensor4 forward(const Tensor4& x, bool train) override;
    Tensor4 backward(const Tensor4& grad_out) override;
    std::string describe() const override;

private:
    int window_, stride_;
    int in_n_ = 0, in_c_ = 0, in_h_ = 0, in_w_ = 0;
    std::vector<std::int32_t> argmax_;  // flat input offset per output element
    bool have_input_ = false;
};

class BatchNorm2d : public Layer {
public:
    explicit BatchNorm2d(int channels, double eps = 1e-5, double momentum = 0.1);

    // Train mode normalizes with batch statistics and updates the running
    // estimates; eval mode uses the running estimates only.
    Tensor4 forward(const Tensor4& x, bool train) override;
    Tensor4 backward(const Tensor4& grad_out) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    std::string describe() const override;

    std::vector<double> gamma, beta, running_mean, running_var;
    std::vector<double> gamma_grad, beta_grad;

private:
    int channels_;
    double eps_, momentum_;
    // saved forward state
    Tensor4 x_hat_;
    std::vector<double> inv_std_;
    bool train_mode_ = false;
    bool have_input_ = false;
};

// Averages each channel plane to 1x1.
class GlobalAvgPool : public Layer {
public:
    Tensor4 forward(const Tensor4& x, bool train) override;
    Tensor4 backward(const Tensor4& grad_out) override;
    std::string describe() const override { return "global_avg_pool"; }

private:
    int in_n_ = 0, in_c_ = 0, in_h_ = 0, in_w_ = 0;
    bool have_input_ = false;
};

class Sequential {
public:
    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

    Tensor4 forward(const Tensor4& x, bool train);
    Tensor4 backward(const Tensor4& grad_out);
    std::vector<ParamRef> params();
    std::vector<std::string> describe() const;

    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// ---------------------------------------------------------------------------
// Joint (emotion x view-group) softmax head

constexpr int kGridCells = 16;

// 4x4 joint probability grid, rows = emotion, columns = view group. All 16
// entries are normalized together.
struct SoftmaxGrid {
    std::array<double, kGridCells> p{};

    double at(int emotion, int view) const { return p[static_cast<std::size_t>(emotion) * 4 + view]; }
    double sum() const;
    // Argmax cell; ties resolve to the lowest (emotion, view) index.
    std::pair<int, int> argmax() const;
};

inline int grid_cell(int emotion, int view) { return emotion * 4 + view; }

// Jointly normalized softmax over all 16 logits, stabilized by max
// subtraction.
SoftmaxGrid softmax_grid(const std::array<double, kGridCells>& logits);

// Scalar cross-entropy of one prediction against a one-hot 4x4 target.
double cross_entropy(const SoftmaxGrid& pred, const std::array<double, kGridCells>& one_hot_target);

// Batched softmax + cross-entropy head over logits shaped (n, 16, 1, 1).
// Returns the batch-averaged loss and d(loss)/d(logits).
struct SoftmaxLoss {
    double loss = 0.0;
    Tensor4 grad_logits;
    std::vector<SoftmaxGrid> grids;
};
SoftmaxLoss softmax_cross_entropy(const Tensor4& logits, const std::vector<int>& target_cells);

// ---------------------------------------------------------------------------
// Optimizer

struct AdamConfig {
    double lr = 0.009;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double decay = 0.9;     // multiplicative lr decay...
    int decay_every = 250;  // ...applied every this many epochs
};

double lr_at_epoch(const AdamConfig& cfg, int epoch);

class Adam {
public:
    Adam(std::vector<ParamRef> params, AdamConfig cfg);

    // One update with the learning rate for `epoch`.
    void step(int epoch);
    void zero_grad();

    const AdamConfig& config() const { return cfg_; }

private:
    std::vector<ParamRef> params_;
    AdamConfig cfg_;
    std::vector<std::vector<double>> m_, v_;
    std::int64_t t_ = 0;
};

// ---------------------------------------------------------------------------
// Checkpoints

struct NamedTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> data;
};

// Binary container: magic/version header, string metadata, named float64
// tensors. Bit-exact round trip.
void save_checkpoint(const std::string& path,
                     const std::map<std::string, std::string>& meta,
                     const std::vector<NamedTensor>& tensors);
void load_checkpoint(const std::string& path,
                     std::map<std::string, std::string>& meta,
                     std::vector<NamedTensor>& tensors);

}  // namespace proxemo
