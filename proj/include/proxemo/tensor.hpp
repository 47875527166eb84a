#pragma once

#include <cstddef>
#include <vector>

#include "proxemo/errors.hpp"

namespace proxemo {

// Dense NCHW float64 tensor.
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_),
          v(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {}

    std::size_t size() const { return v.size(); }

    double& at(int b, int ci, int y, int x) {
        return v[((static_cast<std::size_t>(b) * c + ci) * h + y) * w + x];
    }
    double at(int b, int ci, int y, int x) const {
        return v[((static_cast<std::size_t>(b) * c + ci) * h + y) * w + x];
    }

    double* plane(int b, int ci) {
        return v.data() + (static_cast<std::size_t>(b) * c + ci) * h * w;
    }
    const double* plane(int b, int ci) const {
        return v.data() + (static_cast<std::size_t>(b) * c + ci) * h * w;
    }

    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    void require_shape(int n_, int c_, int h_, int w_, const char* what) const {
        if (n != n_ || c != c_ || h != h_ || w != w_)
            throw ShapeError(std::string(what) + ": unexpected tensor shape");
    }
};

}  // namespace proxemo
