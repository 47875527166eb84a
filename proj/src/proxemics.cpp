#include "proxemo/proxemics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "proxemo/errors.hpp"

namespace proxemo {

double comfort_constant_cm(EmotionClass e) {
    switch (e) {
        case EmotionClass::happy: return 90.04;
        case EmotionClass::sad: return 112.71;
        case EmotionClass::angry: return 99.75;
        case EmotionClass::neutral: return 92.03;
    }
    return 0.0;
}

double view_group_constant(ViewGroup g) {
    switch (g) {
        case ViewGroup::front: return 1.0;
        case ViewGroup::right: return 0.5;
        case ViewGroup::back: return 0.0;
        case ViewGroup::left: return 0.5;
    }
    return 0.0;
}

double comfort_space(const SoftmaxGrid& grid) {
    double sum = 0.0;
    for (double v : grid.p) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InvalidInputError("comfort_space: grid entries must be non-negative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw InvalidInputError("comfort_space: grid is not normalized");

    // Best view-group response per emotion; the comfort distance is their
    // convex combination of the c_j table, scaled by the predicted view group.
    double num = 0.0, den = 0.0;
    for (int e = 0; e < kNumEmotions; ++e) {
        double m = 0.0;
        for (int g = 0; g < kNumViewGroups; ++g) m = std::max(m, grid.at(e, g));
        num += comfort_constant_cm(static_cast<EmotionClass>(e)) * m;
        den += m;
    }
    const auto [arg_e, arg_g] = grid.argmax();
    (void)arg_e;
    const double vg = view_group_constant(static_cast<ViewGroup>(arg_g));
    return num / den * vg / 100.0;  // cm -> m
}

double inflation_radius(double comfort_m, std::span<const double> human_ranges) {
    if (human_ranges.empty())
        throw InvalidInputError("inflation_radius: no human returns in scan");
    double lo = human_ranges[0], hi = human_ranges[0];
    for (double d : human_ranges) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return std::max(0.0, comfort_m - (hi - lo));
}

// ---------------------------------------------------------------------------
// LidarScan

Vec2 LidarScan::point(std::size_t i) const {
    return {origin.x + ranges[i] * std::cos(angles[i]),
            origin.y + ranges[i] * std::sin(angles[i])};
}

void write_scan_csv(const std::string& path, const LidarScan& scan) {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << "angle,range,human,hit_id\n";
    for (std::size_t i = 0; i < scan.beam_count(); ++i)
        out << scan.angles[i] << ',' << scan.ranges[i] << ',' << (scan.human_mask(i) ? 1 : 0)
            << ',' << scan.hit_id[i] << "\n";
    if (!out) throw FileError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// AdmissibleSet

AdmissibleSet::AdmissibleSet(double x0, double y0, int nx, int ny, double resolution,
                             double radius)
    : x0_(x0), y0_(y0), nx_(nx), ny_(ny), res_(resolution), radius_(radius),
      grid_(static_cast<std::size_t>(nx) * ny, 0) {
    if (nx_ < 0 || ny_ < 0 || !(res_ > 0.0))
        throw InvalidInputError("admissible set: bad grid dimensions");
}

bool AdmissibleSet::in_bounds(const Vec2& p) const {
    const int ix = static_cast<int>(std::floor((p.x - x0_) / res_));
    const int iy = static_cast<int>(std::floor((p.y - y0_) / res_));
    return ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_;
}

bool AdmissibleSet::blocked_at(const Vec2& p) const {
    const int ix = static_cast<int>(std::floor((p.x - x0_) / res_));
    const int iy = static_cast<int>(std::floor((p.y - y0_) / res_));
    if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) return false;
    return grid_[idx(ix, iy)] != 0;
}

Vec2 AdmissibleSet::cell_center(int ix, int iy) const {
    return {x0_ + (ix + 0.5) * res_, y0_ + (iy + 0.5) * res_};
}

std::size_t AdmissibleSet::blocked_count() const {
    std::size_t n = 0;
    for (auto b : grid_) n += b;
    return n;
}

void AdmissibleSet::mark_point(const Vec2& p) {
    const int ix = static_cast<int>(std::floor((p.x - x0_) / res_));
    const int iy = static_cast<int>(std::floor((p.y - y0_) / res_));
    if (ix >= 0 && ix < nx_ && iy >= 0 && iy < ny_) grid_[idx(ix, iy)] = 1;
}

void AdmissibleSet::mark_disk(const Vec2& center, double radius) {
    mark_point(center);  // radius 0 still blocks the containing cell
    if (radius <= 0.0) return;
    const int ix_lo = std::max(0, static_cast<int>(std::floor((center.x - radius - x0_) / res_)));
    const int ix_hi = std::min(nx_ - 1, static_cast<int>(std::floor((center.x + radius - x0_) / res_)));
    const int iy_lo = std::max(0, static_cast<int>(std::floor((center.y - radius - y0_) / res_)));
    const int iy_hi = std::min(ny_ - 1, static_cast<int>(std::floor((center.y + radius - y0_) / res_)));
    const double r2 = radius * radius;
    for (int iy = iy_lo; iy <= iy_hi; ++iy) {
        const double dy = y0_ + (iy + 0.5) * res_ - center.y;
        for (int ix = ix_lo; ix <= ix_hi; ++ix) {
            const double dx = x0_ + (ix + 0.5) * res_ - center.x;
            // cell blocked iff its center lies inside the closed disk
            if (dx * dx + dy * dy <= r2) grid_[idx(ix, iy)] = 1;
        }
    }
}

void AdmissibleSet::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << "x0," << x0_ << "\ny0," << y0_ << "\nnx," << nx_ << "\nny," << ny_ << "\nresolution,"
        << res_ << "\ninflation_radius," << radius_ << "\n";
    out << "cells\n";
    for (int iy = 0; iy < ny_; ++iy) {
        for (int ix = 0; ix < nx_; ++ix) {
            if (ix) out << ',';
            out << (grid_[idx(ix, iy)] != 0 ? 1 : 0);
        }
        out << "\n";
    }
    if (!out) throw FileError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Fusion

AdmissibleSet inflate_points(const std::vector<Vec2>& points, const std::vector<double>& radii,
                             double resolution) {
    if (points.size() != radii.size())
        throw InvalidInputError("inflate_points: point/radius count mismatch");
    if (!(resolution > 0.0)) throw InvalidInputError("inflate_points: bad resolution");
    for (double r : radii)
        if (r < 0.0 || !std::isfinite(r))
            throw InvalidInputError("inflate_points: negative inflation radius");

    if (points.empty()) return AdmissibleSet(0.0, 0.0, 0, 0, resolution, 0.0);

    double min_x = points[0].x, max_x = points[0].x;
    double min_y = points[0].y, max_y = points[0].y;
    double max_r = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        min_x = std::min(min_x, points[i].x - radii[i]);
        max_x = std::max(max_x, points[i].x + radii[i]);
        min_y = std::min(min_y, points[i].y - radii[i]);
        max_y = std::max(max_y, points[i].y + radii[i]);
        max_r = std::max(max_r, radii[i]);
    }
    // Snap the origin to the resolution lattice so cell centers are stable
    // regardless of which points appear in the scan.
    const double x0 = std::floor((min_x - resolution) / resolution) * resolution;
    const double y0 = std::floor((min_y - resolution) / resolution) * resolution;
    const int nx = static_cast<int>(std::ceil((max_x + resolution - x0) / resolution)) + 1;
    const int ny = static_cast<int>(std::ceil((max_y + resolution - y0) / resolution)) + 1;

    AdmissibleSet set(x0, y0, nx, ny, resolution, max_r);
    for (std::size_t i = 0; i < points.size(); ++i) set.mark_disk(points[i], radii[i]);
    return set;
}

AdmissibleSet proxemic_fusion(const LidarScan& scan, double r, double resolution) {
    if (r < 0.0 || !std::isfinite(r))
        throw InvalidInputError("proxemic_fusion: inflation radius must be >= 0");
    std::vector<Vec2> points;
    for (std::size_t i = 0; i < scan.beam_count(); ++i)
        if (scan.is_hit(i)) points.push_back(scan.point(i));
    return inflate_points(points, std::vector<double>(points.size(), r), resolution);
}

}  // namespace proxemo
