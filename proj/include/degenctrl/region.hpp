#pragma once

// Space-time control/observation regions: a theta-independent cylinder
// T x (a,b) x (0,T), or a finite union of boxes in (theta, r, t). Box-union
// measures and time slices are computed exactly by coordinate compression.

#include <utility>
#include <variant>
#include <vector>

namespace degenctrl {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] double length() const { return hi - lo; }
    [[nodiscard]] bool contains(double x) const { return lo <= x && x < hi; }
    bool operator==(const Interval&) const = default;
};

struct Box {
    Interval theta;
    Interval r;
    Interval t;

    [[nodiscard]] double measure() const { return theta.length() * r.length() * t.length(); }
    [[nodiscard]] bool contains(double th, double rr, double tt) const {
        return theta.contains(th) && r.contains(rr) && t.contains(tt);
    }
};

/// Theta-independent patch T x (a,b) over the whole time horizon.
struct Cylinder {
    double a = 0.0;
    double b = 1.0;

    [[nodiscard]] bool contains_r(double r) const { return a < r && r < b; }
};

class BoxUnion {
public:
    BoxUnion() = default;
    /// Boxes must lie in [0,2pi) x [0,1] x [0,horizon] and have positive size.
    BoxUnion(std::vector<Box> boxes, double horizon);

    [[nodiscard]] const std::vector<Box>& boxes() const { return boxes_; }
    [[nodiscard]] double horizon() const { return horizon_; }
    /// |D| with overlaps counted once.
    [[nodiscard]] double measure() const { return measure_; }
    /// |D_t|, the (theta, r) area of the slice at time t.
    [[nodiscard]] double slice_measure(double t) const;
    [[nodiscard]] bool contains(double theta, double r, double t) const;
    /// Sorted distinct time edges of all boxes.
    [[nodiscard]] std::vector<double> time_edges() const;
    /// Radial hull [min r.lo, max r.hi].
    [[nodiscard]] Interval radial_hull() const;

private:
    std::vector<Box> boxes_;
    double horizon_ = 1.0;
    double measure_ = 0.0;
};

/// Area of a union of axis-aligned rectangles given as (x, y) interval pairs.
double rectangle_union_area(const std::vector<std::pair<Interval, Interval>>& rects);

using ControlRegion = std::variant<Cylinder, BoxUnion>;

}  // namespace degenctrl
