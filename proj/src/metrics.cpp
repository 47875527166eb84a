#include <fstream>
#include <sstream>

#include "proxemo/errors.hpp"
#include "proxemo/model.hpp"

namespace proxemo {

EvalReport evaluate_predictions(const std::vector<std::pair<int, int>>& true_pred_cells) {
    if (true_pred_cells.empty()) throw InvalidInputError("evaluate: no predictions");

    EvalReport report;
    report.confusion.assign(kGridCells, std::vector<int>(kGridCells, 0));
    for (const auto& [truth, pred] : true_pred_cells) {
        if (truth < 0 || truth >= kGridCells || pred < 0 || pred >= kGridCells)
            throw InvalidInputError("evaluate: cell index out of range");
        ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
        ++report.total;
        if (truth == pred) ++report.correct;
    }

    double acc_sum = 0.0, f1_sum = 0.0;
    int cells_counted = 0;
    for (int cell = 0; cell < kGridCells; ++cell) {
        int n_true = 0, n_pred = 0;
        for (int other = 0; other < kGridCells; ++other) {
            n_true += report.confusion[static_cast<std::size_t>(cell)][static_cast<std::size_t>(other)];
            n_pred += report.confusion[static_cast<std::size_t>(other)][static_cast<std::size_t>(cell)];
        }
        if (n_true == 0) {
            report.empty_cells.push_back(cell);
            continue;
        }
        const int tp = report.confusion[static_cast<std::size_t>(cell)][static_cast<std::size_t>(cell)];
        const double recall = static_cast<double>(tp) / n_true;
        const double precision = n_pred > 0 ? static_cast<double>(tp) / n_pred : 0.0;
        acc_sum += recall;
        if (precision + recall > 0.0) f1_sum += 2.0 * precision * recall / (precision + recall);
        ++cells_counted;
    }
    report.mean_accuracy_pct = 100.0 * acc_sum / cells_counted;
    report.mean_f1 = f1_sum / cells_counted;
    return report;
}

void write_report_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << "metric,value\n";
    out << "mean_accuracy_pct," << report.mean_accuracy_pct << "\n";
    out << "mean_f1," << report.mean_f1 << "\n";
    out << "total," << report.total << "\n";
    out << "correct," << report.correct << "\n";
    out << "empty_cells," << report.empty_cells.size() << "\n";
    if (!out) throw FileError("write failed: " + path);
}

void write_confusion_csv(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    // header: predicted cells as emotion/view pairs
    out << "true\\pred";
    for (int p = 0; p < kGridCells; ++p)
        out << ',' << to_string(static_cast<EmotionClass>(p / 4)) << '/'
            << to_string(static_cast<ViewGroup>(p % 4));
    out << "\n";
    for (int t = 0; t < kGridCells; ++t) {
        out << to_string(static_cast<EmotionClass>(t / 4)) << '/'
            << to_string(static_cast<ViewGroup>(t % 4));
        for (int p = 0; p < kGridCells; ++p)
            out << ',' << report.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
        out << "\n";
    }
    if (!out) throw FileError("write failed: " + path);
}

std::string report_summary(const EvalReport& report) {
    std::ostringstream os;
    os << "samples: " << report.total << "  plain accuracy: "
       << 100.0 * report.correct / report.total << "%\n";
    os << "mean accuracy: " << report.mean_accuracy_pct << "%\n";
    os << "mean F1: " << report.mean_f1 << "\n";
    if (!report.empty_cells.empty()) {
        os << "cells with no samples (excluded from means):";
        for (int c : report.empty_cells)
            os << ' ' << to_string(static_cast<EmotionClass>(c / 4)) << '/'
               << to_string(static_cast<ViewGroup>(c % 4));
        os << "\n";
    }

    // Emotion-only 4x4 view of the joint confusion.
    int emo[4][4] = {};
    for (int t = 0; t < kGridCells; ++t)
        for (int p = 0; p < kGridCells; ++p)
            emo[t / 4][p / 4] += report.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    os << "emotion confusion (rows true, cols predicted; counts):\n";
    for (int t = 0; t < 4; ++t) {
        os << "  " << to_string(static_cast<EmotionClass>(t)) << ":";
        for (int p = 0; p < 4; ++p) os << ' ' << emo[t][p];
        os << "\n";
    }
    return os.str();
}

}  // namespace proxemo
