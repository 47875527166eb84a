#include "proxemo/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "proxemo/errors.hpp"

namespace proxemo {

GaitClassifier::GaitClassifier(const ModelConfig& cfg) : cfg_(cfg) {
    if (cfg_.groups < 1 || cfg_.stem_channels % cfg_.groups != 0)
        throw ConfigError("model: stem channels must be divisible by groups");
    if (cfg_.input_size < 32) throw ConfigError("model: input size must be >= 32");

    Rng rng(cfg_.seed);
    const int g = cfg_.groups;
    const int s1 = 32 * g;  // stage-1 GC filters (32 per group)
    const int s2 = 64 * g;  // stage-2 GC filters (64 per group)

    // Stem: channel up-sampling, stride-2 7x7.
    net_.add(std::make_unique<Conv2d>(3, cfg_.stem_channels, 7, 2, 3, 1, rng));
    net_.add(std::make_unique<ReLU>());

    // Stage 1.
    net_.add(std::make_unique<Conv2d>(cfg_.stem_channels, s1, 3, 1, 1, g, rng));
    net_.add(std::make_unique<ReLU>());
    net_.add(std::make_unique<MaxPool2d>(2, 2));
    net_.add(std::make_unique<Conv2d>(s1, s1, 3, 1, 1, g, rng));
    net_.add(std::make_unique<ReLU>());
    net_.add(std::make_unique<MaxPool2d>(2, 2));
    net_.add(std::make_unique<BatchNorm2d>(s1));

    // Stage 2.
    net_.add(std::make_unique<Conv2d>(s1, s2, 3, 1, 1, g, rng));
    net_.add(std::make_unique<ReLU>());
    net_.add(std::make_unique<MaxPool2d>(2, 2));
    net_.add(std::make_unique<Conv2d>(s2, s2, 3, 1, 1, g, rng));
    net_.add(std::make_unique<ReLU>());
    net_.add(std::make_unique<MaxPool2d>(2, 2));
    net_.add(std::make_unique<BatchNorm2d>(s2));

    // Head: two plain convs gather the group features into the 4x4 logits.
    net_.add(std::make_unique<Conv2d>(s2, cfg_.head_channels, 3, 1, 1, 1, rng));
    net_.add(std::make_unique<ReLU>());
    net_.add(std::make_unique<Conv2d>(cfg_.head_channels, kGridCells, 1, 1, 0, 1, rng));
    net_.add(std::make_unique<GlobalAvgPool>());
}

Tensor4 GaitClassifier::image_to_tensor(const GaitImage& image) const {
    if (image.height != cfg_.input_size || image.width != cfg_.input_size)
        throw ShapeError("model: image size does not match the configured input size");
    Tensor4 t(1, 3, image.height, image.width);
    std::memcpy(t.v.data(), image.data.data(), image.data.size() * sizeof(double));
    return t;
}

Tensor4 GaitClassifier::forward_logits(const Tensor4& images, bool train) {
    if (images.c != 3 || images.h != cfg_.input_size || images.w != cfg_.input_size)
        throw ShapeError("model: batch shape does not match the configured input size");
    return net_.forward(images, train);
}

Tensor4 GaitClassifier::backward(const Tensor4& grad_logits) { return net_.backward(grad_logits); }

SoftmaxGrid GaitClassifier::forward(const GaitImage& image) {
    const Tensor4 logits = forward_logits(image_to_tensor(image), false);
    std::array<double, kGridCells> lg{};
    for (int i = 0; i < kGridCells; ++i) lg[static_cast<std::size_t>(i)] = logits.at(0, i, 0, 0);
    return softmax_grid(lg);
}

std::pair<EmotionClass, ViewGroup> GaitClassifier::predict(const GaitImage& image) {
    const auto [e, v] = forward(image).argmax();
    return {static_cast<EmotionClass>(e), static_cast<ViewGroup>(v)};
}

std::vector<ParamRef> GaitClassifier::params() { return net_.params(); }

std::size_t GaitClassifier::parameter_count() {
    std::size_t total = 0;
    for (const auto& p : params()) total += p.value->size();
    return total;
}

std::vector<std::string> GaitClassifier::describe() const { return net_.describe(); }

namespace {

// Checkpoint state is the trainable parameters plus batch-norm running stats.
std::vector<NamedTensor> state_tensors(Sequential& net) {
    std::vector<NamedTensor> out;
    for (const auto& p : net.params())
        out.push_back({p.name, p.shape, *p.value});
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        if (auto* bn = dynamic_cast<BatchNorm2d*>(&net.layer(i))) {
            const std::string prefix = "layer" + std::to_string(i);
            out.push_back({prefix + ".running_mean",
                           {static_cast<int>(bn->running_mean.size())}, bn->running_mean});
            out.push_back({prefix + ".running_var",
                           {static_cast<int>(bn->running_var.size())}, bn->running_var});
        }
    }
    return out;
}

}  // namespace

void GaitClassifier::save(const std::string& path) const {
    auto& self = const_cast<GaitClassifier&>(*this);
    std::map<std::string, std::string> meta = {
        {"model", "proxemo-gait-classifier"},
        {"input_size", std::to_string(cfg_.input_size)},
        {"groups", std::to_string(cfg_.groups)},
        {"stem_channels", std::to_string(cfg_.stem_channels)},
        {"head_channels", std::to_string(cfg_.head_channels)},
        {"seed", std::to_string(cfg_.seed)},
    };
    save_checkpoint(path, meta, state_tensors(self.net_));
}

GaitClassifier GaitClassifier::load(const std::string& path) {
    std::map<std::string, std::string> meta;
    std::vector<NamedTensor> tensors;
    load_checkpoint(path, meta, tensors);
    if (meta["model"] != "proxemo-gait-classifier")
        throw FormatError(path + ": not a gait classifier checkpoint");

    ModelConfig cfg;
    cfg.input_size = std::stoi(meta.at("input_size"));
    cfg.groups = std::stoi(meta.at("groups"));
    cfg.stem_channels = std::stoi(meta.at("stem_channels"));
    cfg.head_channels = std::stoi(meta.at("head_channels"));
    cfg.seed = std::stoull(meta.at("seed"));

    GaitClassifier model(cfg);
    auto expected = state_tensors(model.net_);
    if (expected.size() != tensors.size())
        throw FormatError(path + ": checkpoint tensor count does not match the architecture");

    // Destination pointers by name.
    std::map<std::string, std::vector<double>*> dest;
    for (auto& p : model.net_.params()) dest[p.name] = p.value;
    for (std::size_t i = 0; i < model.net_.layer_count(); ++i) {
        if (auto* bn = dynamic_cast<BatchNorm2d*>(&model.net_.layer(i))) {
            const std::string prefix = "layer" + std::to_string(i);
            dest[prefix + ".running_mean"] = &bn->running_mean;
            dest[prefix + ".running_var"] = &bn->running_var;
        }
    }
    for (const auto& t : tensors) {
        auto it = dest.find(t.name);
        if (it == dest.end()) throw FormatError(path + ": unexpected tensor " + t.name);
        if (it->second->size() != t.data.size())
            throw ShapeError(path + ": size mismatch for tensor " + t.name);
        *it->second = t.data;
    }
    return model;
}

// ---------------------------------------------------------------------------
// Training

namespace {

Tensor4 assemble_batch(const std::vector<LabeledImage>& dataset, const std::vector<int>& indices,
                       std::size_t lo, std::size_t hi, int input_size, std::vector<int>& cells) {
    const int bs = static_cast<int>(hi - lo);
    Tensor4 batch(bs, 3, input_size, input_size);
    cells.resize(static_cast<std::size_t>(bs));
    const std::size_t stride = static_cast<std::size_t>(3) * input_size * input_size;
    for (int b = 0; b < bs; ++b) {
        const auto& sample = dataset[static_cast<std::size_t>(indices[lo + b])];
        std::memcpy(batch.v.data() + b * stride, sample.image.data.data(),
                    stride * sizeof(double));
        cells[static_cast<std::size_t>(b)] = sample.cell();
    }
    return batch;
}

struct SplitEval {
    double loss = 0.0;
    double acc_pct = 0.0;  // mean per-cell recall, percent
};

SplitEval eval_split(GaitClassifier& net, const std::vector<LabeledImage>& dataset,
                     const std::vector<int>& indices, int batch_size, int input_size) {
    SplitEval out;
    if (indices.empty()) return out;
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(indices.size());
    double loss_sum = 0.0;
    std::vector<int> cells;
    for (std::size_t lo = 0; lo < indices.size(); lo += static_cast<std::size_t>(batch_size)) {
        const std::size_t hi = std::min(indices.size(), lo + static_cast<std::size_t>(batch_size));
        Tensor4 batch = assemble_batch(dataset, indices, lo, hi, input_size, cells);
        const Tensor4 logits = net.forward_logits(batch, false);
        const SoftmaxLoss sm = softmax_cross_entropy(logits, cells);
        loss_sum += sm.loss * static_cast<double>(hi - lo);
        for (std::size_t b = 0; b < sm.grids.size(); ++b) {
            const auto [e, v] = sm.grids[b].argmax();
            pairs.emplace_back(cells[b], grid_cell(e, v));
        }
    }
    out.loss = loss_sum / static_cast<double>(indices.size());
    out.acc_pct = evaluate_predictions(pairs).mean_accuracy_pct;
    return out;
}

}  // namespace

TrainResult train(const std::vector<LabeledImage>& dataset, const TrainConfig& cfg,
                  const ModelConfig& model_cfg) {
    if (dataset.empty()) throw ConfigError("train: empty dataset");
    if (cfg.batch_size < 1) throw ConfigError("train: batch size must be >= 1");
    if (cfg.val_fraction < 0.0 || cfg.val_fraction >= 1.0)
        throw ConfigError("train: val fraction must be in [0, 1)");

    std::set<int> cells_present;
    for (const auto& s : dataset) {
        if (s.image.height != cfg.input_size || s.image.width != cfg.input_size)
            throw ConfigError("train: dataset image size does not match config input size");
        cells_present.insert(s.cell());
    }
    if (cells_present.size() < 2)
        throw ConfigError("train: dataset is degenerate (single class cell)");

    ModelConfig mc = model_cfg;
    mc.input_size = cfg.input_size;
    TrainResult result{GaitClassifier(mc), {}};

    Rng rng(cfg.seed);
    std::vector<int> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates with the project RNG so splits are platform-stable.
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        const std::size_t j = rng.below(i + 1);
        std::swap(order[i], order[j]);
    }
    const std::size_t n_val = static_cast<std::size_t>(
        std::llround(cfg.val_fraction * static_cast<double>(dataset.size())));
    std::vector<int> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<int> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    if (train_idx.empty()) throw ConfigError("train: no training samples after split");

    Adam adam(result.net.params(), cfg.adam);
    std::vector<int> cells;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = train_idx.size() - 1; i > 0; --i) {
            const std::size_t j = rng.below(i + 1);
            std::swap(train_idx[i], train_idx[j]);
        }

        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t lo = 0; lo < train_idx.size(); lo += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t hi =
                std::min(train_idx.size(), lo + static_cast<std::size_t>(cfg.batch_size));
            Tensor4 batch = assemble_batch(dataset, train_idx, lo, hi, cfg.input_size, cells);
            const Tensor4 logits = result.net.forward_logits(batch, true);
            const SoftmaxLoss sm = softmax_cross_entropy(logits, cells);
            loss_sum += sm.loss * static_cast<double>(hi - lo);
            for (std::size_t b = 0; b < sm.grids.size(); ++b) {
                const auto [e, v] = sm.grids[b].argmax();
                if (grid_cell(e, v) == cells[b]) ++correct;
            }
            adam.zero_grad();
            result.net.backward(sm.grad_logits);
            adam.step(epoch);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.lr = lr_at_epoch(cfg.adam, epoch);
        stats.train_loss = loss_sum / static_cast<double>(train_idx.size());
        stats.train_acc = 100.0 * static_cast<double>(correct) / static_cast<double>(train_idx.size());
        if (!val_idx.empty()) {
            const SplitEval ve = eval_split(result.net, dataset, val_idx, cfg.batch_size, cfg.input_size);
            stats.val_loss = ve.loss;
            stats.val_acc = ve.acc_pct;
        }
        result.history.push_back(stats);

        if (cfg.verbose && (epoch % cfg.log_every == 0 || epoch == cfg.epochs - 1)) {
            std::ostringstream os;
            os << "epoch " << epoch << " lr " << stats.lr << " train_loss " << stats.train_loss
               << " train_acc " << stats.train_acc << " val_acc " << stats.val_acc << "\n";
            std::fputs(os.str().c_str(), stderr);
        }

        if (cfg.early_stop_val_acc > 0.0 && !val_idx.empty() &&
            stats.val_acc >= cfg.early_stop_val_acc)
            break;
        if (cfg.early_stop_val_acc > 0.0 && val_idx.empty() &&
            stats.train_acc >= cfg.early_stop_val_acc)
            break;
    }
    return result;
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << "epoch,lr,train_loss,train_acc,val_loss,val_acc\n";
    for (const auto& h : history)
        out << h.epoch << ',' << h.lr << ',' << h.train_loss << ',' << h.train_acc << ','
            << h.val_loss << ',' << h.val_acc << "\n";
    if (!out) throw FileError("write failed: " + path);
}

EvalReport evaluate(GaitClassifier& net, const std::vector<LabeledImage>& dataset) {
    if (dataset.empty()) throw InvalidInputError("evaluate: empty dataset");
    std::vector<int> indices(dataset.size());
    std::iota(indices.begin(), indices.end(), 0);
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(dataset.size());
    std::vector<int> cells;
    const int bs = 32;
    const int input_size = net.config().input_size;
    for (std::size_t lo = 0; lo < indices.size(); lo += bs) {
        const std::size_t hi = std::min(indices.size(), lo + bs);
        Tensor4 batch = assemble_batch(dataset, indices, lo, hi, input_size, cells);
        const Tensor4 logits = net.forward_logits(batch, false);
        for (int b = 0; b < logits.n; ++b) {
            std::array<double, kGridCells> lg{};
            for (int i = 0; i < kGridCells; ++i)
                lg[static_cast<std::size_t>(i)] = logits.at(b, i, 0, 0);
            const auto [e, v] = softmax_grid(lg).argmax();
            pairs.emplace_back(cells[static_cast<std::size_t>(b)], grid_cell(e, v));
        }
    }
    return evaluate_predictions(pairs);
}

}  // namespace proxemo
