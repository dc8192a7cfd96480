#include "degenctrl/region.hpp"

#include <algorithm>
#include <numbers>

#include "degenctrl/error.hpp"

namespace degenctrl {

namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
    std::ranges::sort(v);
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

double rectangle_union_area(const std::vector<std::pair<Interval, Interval>>& rects) {
    std::vector<double> xs, ys;
    for (const auto& [x, y] : rects) {
        xs.insert(xs.end(), {x.lo, x.hi});
        ys.insert(ys.end(), {y.lo, y.hi});
    }
    xs = sorted_unique(std::move(xs));
    ys = sorted_unique(std::move(ys));
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double xm = 0.5 * (xs[i] + xs[i + 1]);
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            const double ym = 0.5 * (ys[j] + ys[j + 1]);
            const bool covered = std::ranges::any_of(rects, [&](const auto& rc) {
                return rc.first.lo <= xm && xm < rc.first.hi && rc.second.lo <= ym && ym < rc.second.hi;
            });
            if (covered) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
        }
    }
    return area;
}

BoxUnion::BoxUnion(std::vector<Box> boxes, double horizon) : boxes_(std::move(boxes)), horizon_(horizon) {
    if (boxes_.empty()) throw InvalidArgument("box union must contain at least one box");
    if (!(horizon > 0.0)) throw InvalidArgument("box union: horizon must be positive");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (const auto& b : boxes_) {
        if (!(b.theta.lo >= 0.0 && b.theta.lo < b.theta.hi && b.theta.hi <= two_pi + 1e-12))
            throw InvalidArgument("box theta interval must lie in [0, 2pi]");
        if (!(b.r.lo >= 0.0 && b.r.lo < b.r.hi && b.r.hi <= 1.0))
            throw InvalidArgument("box r interval must lie in [0, 1]");
        if (!(b.t.lo >= 0.0 && b.t.lo < b.t.hi && b.t.hi <= horizon * (1 + 1e-12)))
            throw InvalidArgument("box t interval must lie in [0, T]");
    }
    const auto edges = time_edges();
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
        measure_ += slice_measure(0.5 * (edges[k] + edges[k + 1])) * (edges[k + 1] - edges[k]);
}

double BoxUnion::slice_measure(double t) const {
    std::vector<std::pair<Interval, Interval>> rects;
    for (const auto& b : boxes_)
        if (b.t.contains(t)) rects.emplace_back(b.theta, b.r);
    return rectangle_union_area(rects);
}

bool BoxUnion::contains(double theta, double r, double t) const {
    return std::ranges::any_of(boxes_, [&](const Box& b) { return b.contains(theta, r, t); });
}

std::vector<double> BoxUnion::time_edges() const {
    std::vector<double> e;
    for (const auto& b : boxes_) e.insert(e.end(), {b.t.lo, b.t.hi});
    return sorted_unique(std::move(e));
}

Interval BoxUnion::radial_hull() const {
    Interval h{boxes_.front().r.lo, boxes_.front().r.hi};
    for (const auto& b : boxes_) {
        h.lo = std::min(h.lo, b.r.lo);
        h.hi = std::max(h.hi, b.r.hi);
    }
    return h;
}

}  // namespace degenctrl
