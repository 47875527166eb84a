#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "proxemo/embedding.hpp"
#include "proxemo/gait.hpp"
#include "proxemo/nn.hpp"

namespace proxemo {

struct ModelConfig {
    int input_size = 244;
    int groups = 4;          // n_g
    int stem_channels = 32;  // channel up-sampling before the GC stages
    int head_channels = 32;  // width of the first head conv
    std::uint64_t seed = 0x9a17;
};

// Group-convolution classifier over gait images. Two GC stages (two GC layers
// each, 128 then 256 filters) between a strided stem conv and a two-conv
// head; no fully-connected layers. Output is the joint 4x4 softmax grid.
class GaitClassifier {
public:
    explicit GaitClassifier(const ModelConfig& cfg);

    // Batched logits, shape (n, 16, 1, 1).
    Tensor4 forward_logits(const Tensor4& images, bool train);
    Tensor4 backward(const Tensor4& grad_logits);

    // Single-image eval-mode forward.
    SoftmaxGrid forward(const GaitImage& image);
    std::pair<EmotionClass, ViewGroup> predict(const GaitImage& image);

    std::vector<ParamRef> params();
    std::size_t parameter_count();
    std::vector<std::string> describe() const;
    const ModelConfig& config() const { return cfg_; }

    void save(const std::string& path) const;
    static GaitClassifier load(const std::string& path);

    Tensor4 image_to_tensor(const GaitImage& image) const;

private:
    ModelConfig cfg_;
    Sequential net_;
};

struct TrainConfig {
    int epochs = 200;
    int batch_size = 32;
    int input_size = 64;
    double val_fraction = 0.1;  // train fraction is the complement
    std::uint64_t seed = 1;
    AdamConfig adam;
    // Stop once validation mean accuracy reaches this percentage (0 = never).
    double early_stop_val_acc = 0.0;
    int log_every = 1;
    bool verbose = false;
};

struct LabeledImage {
    GaitImage image;
    EmotionClass emotion;
    ViewGroup view_group;

    int cell() const { return grid_cell(static_cast<int>(emotion), static_cast<int>(view_group)); }
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double train_acc = 0.0;  // percent, joint 16-class
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct TrainResult {
    GaitClassifier net;
    std::vector<EpochStats> history;
};

// Minimizes the joint softmax cross-entropy with Adam. Deterministic for a
// fixed config. The dataset is split (1 - val_fraction)/val_fraction after a
// seeded shuffle; throws ConfigError on empty or single-cell datasets.
TrainResult train(const std::vector<LabeledImage>& dataset, const TrainConfig& cfg,
                  const ModelConfig& model_cfg);

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

// ---------------------------------------------------------------------------
// Evaluation

struct EvalReport {
    double mean_accuracy_pct = 0.0;  // average per-cell recall, percent
    double mean_f1 = 0.0;
    // Joint 16x16 confusion matrix, row = true cell, column = predicted cell.
    std::vector<std::vector<int>> confusion;
    std::vector<int> empty_cells;  // true cells with no samples, excluded from the means
    int total = 0;
    int correct = 0;
};

EvalReport evaluate_predictions(const std::vector<std::pair<int, int>>& true_pred_cells);
EvalReport evaluate(GaitClassifier& net, const std::vector<LabeledImage>& dataset);

void write_report_csv(const std::string& path, const EvalReport& report);
void write_confusion_csv(const std::string& path, const EvalReport& report);
std::string report_summary(const EvalReport& report);

}  // namespace proxemo
