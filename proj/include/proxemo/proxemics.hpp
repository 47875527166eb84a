#pragma once

#include <span>
#include <string>
#include <vector>

#include "proxemo/gait.hpp"
#include "proxemo/nn.hpp"
#include "proxemo/vec.hpp"

namespace proxemo {

// Comfort-space radius around a pedestrian, by perceived emotion (cm).
double comfort_constant_cm(EmotionClass e);

// Orientation scaling: people guard the space they can see. front=1,
// right=left=0.5, back=0.
double view_group_constant(ViewGroup g);

// Collapses a normalized 4x4 grid into a comfort distance in meters: per
// emotion take the best view-group response, form the convex combination of
// the per-emotion comfort constants, and scale by the view-group constant of
// the grid's argmax cell. Throws InvalidInputError on non-normalized input.
double comfort_space(const SoftmaxGrid& grid);

// r = max(0, c - (max(dh) - min(dh))), all meters. Throws InvalidInputError
// when no human returns exist (caller falls back to obstacle avoidance).
double inflation_radius(double comfort_m, std::span<const double> human_ranges);

struct LidarScan {
    std::vector<double> angles;     // world-frame beam angles, radians
    std::vector<double> ranges;     // meters, (0, max_range]
    std::vector<int> hit_id;        // -1 none/static wall, >= 0 pedestrian index
    double max_range = 0.0;
    Vec2 origin{0.0, 0.0};          // sensor position in the world frame

    std::size_t beam_count() const { return angles.size(); }
    bool human_mask(std::size_t i) const { return hit_id[i] >= 0; }
    // Hit point of beam i in the world frame. Beams at max_range hit nothing.
    Vec2 point(std::size_t i) const;
    bool is_hit(std::size_t i) const { return ranges[i] < max_range - 1e-9; }
};

// Occupancy-grid realization of the fused obstacle set. Cells store blocked /
// free; everything outside the grid is free. Immutable after construction.
class AdmissibleSet {
public:
    AdmissibleSet() = default;
    AdmissibleSet(double x0, double y0, int nx, int ny, double resolution, double radius);

    bool blocked_at(const Vec2& p) const;
    bool in_bounds(const Vec2& p) const;
    double resolution() const { return res_; }
    double inflation() const { return radius_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    Vec2 cell_center(int ix, int iy) const;
    bool cell_blocked(int ix, int iy) const { return grid_[idx(ix, iy)] != 0; }
    std::size_t blocked_count() const;

    void mark_point(const Vec2& p);
    void mark_disk(const Vec2& center, double radius);

    void write_csv(const std::string& path) const;

private:
    std::size_t idx(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * nx_ + ix;
    }
    double x0_ = 0.0, y0_ = 0.0;
    int nx_ = 0, ny_ = 0;
    double res_ = 0.05;
    double radius_ = 0.0;
    std::vector<std::uint8_t> grid_;
};

// Minkowski sum of weighted obstacle points with disks: cell blocked iff its
// center lies within radii[i] of points[i] for some i (the containing cell of
// every point is always blocked, so radius 0 reproduces the raw point set).
AdmissibleSet inflate_points(const std::vector<Vec2>& points, const std::vector<double>& radii,
                             double resolution);

// The fused admissible set for a scan with one inflation radius r >= 0
// applied to every hit point.
AdmissibleSet proxemic_fusion(const LidarScan& scan, double r, double resolution);

void write_scan_csv(const std::string& path, const LidarScan& scan);

}  // namespace proxemo
