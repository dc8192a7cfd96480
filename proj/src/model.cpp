#include "degenctrl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "degenctrl/error.hpp"

namespace degenctrl {

void ModelConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha out of range (0,1)");
    if (!(T_horizon > 0.0) || !std::isfinite(T_horizon)) throw InvalidArgument("T_horizon must be positive");
    if (n_theta_max < 0) throw InvalidArgument("n_theta_max must be >= 0");
    if (n_r < 8) throw InvalidArgument("n_r must be >= 8");
    if (n_time < 2) throw InvalidArgument("n_time must be >= 2");
    if (grid_power && !(*grid_power >= 1.0)) throw InvalidArgument("grid_power must be >= 1");
    if (theta_quad_points && *theta_quad_points < 2 * n_theta_max + 2)
        throw InvalidArgument("theta_quad_points must be >= 2*n_theta_max+2");
    if (s0_default && !(*s0_default >= 1.0)) throw InvalidArgument("s0_default must be >= 1");
}

double ModelConfig::effective_grid_power() const {
    return grid_power ? *grid_power : 2.0 / (2.0 - alpha);
}

int ModelConfig::effective_theta_quad_points() const {
    return theta_quad_points ? *theta_quad_points : 4 * n_theta_max + 8;
}

double ModelConfig::effective_s0() const {
    return s0_default ? *s0_default : 10.0 * std::max(1.0, std::pow(T_horizon, 16));
}

ModelConfig ModelConfig::resolved() const {
    ModelConfig c = *this;
    c.grid_power = effective_grid_power();
    c.theta_quad_points = effective_theta_quad_points();
    c.s0_default = effective_s0();
    return c;
}

double face_weight(double lo, double hi, double alpha) {
    if (lo > 0.0) return std::pow(0.5 * (lo + hi), alpha);
    return (1.0 - alpha) * std::pow(hi, alpha);
}

RadialGrid build_radial_grid(int n_r, double grid_power, double alpha) {
    if (n_r < 2) throw InvalidArgument("n_r too small");
    if (!(grid_power >= 1.0)) throw InvalidArgument("grid_power must be >= 1");
    RadialGrid g;
    g.n_r = n_r;
    g.grid_power = grid_power;
    g.alpha = alpha;
    g.edges.resize(n_r + 1);
    for (int i = 0; i <= n_r; ++i)
        g.edges[i] = std::pow(static_cast<double>(i) / n_r, grid_power);
    g.edges.front() = 0.0;
    g.edges.back() = 1.0;
    g.nodes.assign(g.edges.begin() + 1, g.edges.end() - 1);
    g.half_nodes.resize(n_r);
    g.widths.resize(n_r);
    g.half_weights.resize(n_r);
    for (int i = 0; i < n_r; ++i) {
        g.widths[i] = g.edges[i + 1] - g.edges[i];
        g.half_nodes[i] = 0.5 * (g.edges[i] + g.edges[i + 1]);
        g.half_weights[i] = face_weight(g.edges[i], g.edges[i + 1], alpha);
    }
    g.mass.resize(n_r - 1);
    for (int i = 1; i < n_r; ++i) g.mass[i - 1] = g.half_nodes[i] - g.half_nodes[i - 1];
    return g;
}

const char* parity_name(Parity p) { return p == Parity::Cos ? "cos" : "sin"; }

double angular_basis(ModeIndex mode, double theta) {
    using std::numbers::pi;
    if (mode.n == 0) return mode.parity == Parity::Cos ? 1.0 / std::sqrt(2.0 * pi) : 0.0;
    const double s = 1.0 / std::sqrt(pi);
    return mode.parity == Parity::Cos ? s * std::cos(mode.n * theta) : s * std::sin(mode.n * theta);
}

// ---- ModeCoeffs -------------------------------------------------------------

ModeCoeffs::ModeCoeffs(int n_theta_max, std::size_t n_radial)
    : n_theta_max_(n_theta_max), n_radial_(n_radial), data_(mode_count() * n_radial, 0.0) {}

ModeCoeffs::ModeCoeffs(const Model& model) : ModeCoeffs(model.n_theta_max(), model.n_radial()) {}

std::size_t ModeCoeffs::slot(ModeIndex mode) const {
    if (mode.n < 0 || mode.n > n_theta_max_) throw InvalidArgument("mode frequency out of range");
    if (mode.parity == Parity::Cos) return static_cast<std::size_t>(mode.n);
    if (mode.n == 0) throw InvalidArgument("sin mode requires n >= 1");
    return static_cast<std::size_t>(n_theta_max_ + mode.n);
}

ModeIndex ModeCoeffs::mode_at(std::size_t s) const {
    const auto nmax = static_cast<std::size_t>(n_theta_max_);
    if (s <= nmax) return {Parity::Cos, static_cast<int>(s)};
    return {Parity::Sin, static_cast<int>(s - nmax)};
}

std::span<double> ModeCoeffs::operator[](std::size_t s) {
    return std::span<double>(data_).subspan(s * n_radial_, n_radial_);
}

std::span<const double> ModeCoeffs::operator[](std::size_t s) const {
    return std::span<const double>(data_).subspan(s * n_radial_, n_radial_);
}

ModeCoeffs& ModeCoeffs::operator+=(const ModeCoeffs& o) {
    if (!same_shape(o)) throw DimensionMismatch("mode coefficient shapes differ");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

ModeCoeffs& ModeCoeffs::operator-=(const ModeCoeffs& o) {
    if (!same_shape(o)) throw DimensionMismatch("mode coefficient shapes differ");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

ModeCoeffs& ModeCoeffs::operator*=(double s) {
    for (auto& v : data_) v *= s;
    return *this;
}

void ModeCoeffs::axpy(double s, const ModeCoeffs& o) {
    if (!same_shape(o)) throw DimensionMismatch("mode coefficient shapes differ");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * o.data_[k];
}

// ---- Field2D ----------------------------------------------------------------

Field2D::Field2D(std::size_t n_theta, std::size_t n_radial)
    : n_theta_(n_theta), n_radial_(n_radial), data_(n_theta * n_radial, 0.0) {}

Field2D::Field2D(const Model& model) : Field2D(model.n_theta(), model.n_radial()) {}

// ---- Model ------------------------------------------------------------------

Model::Model(const ModelConfig& config) : config_(config.resolved()) {
    config.validate();
    grid_ = build_radial_grid(config_.n_r, *config_.grid_power, config_.alpha);
    const int q = *config_.theta_quad_points;
    theta_.resize(q);
    for (int k = 0; k < q; ++k) theta_[k] = 2.0 * std::numbers::pi * k / q;
    for (int n = 0; n <= config_.n_theta_max; ++n) modes_.push_back({Parity::Cos, n});
    for (int n = 1; n <= config_.n_theta_max; ++n) modes_.push_back({Parity::Sin, n});
}

double Model::theta_weight() const { return 2.0 * std::numbers::pi / static_cast<double>(theta_.size()); }

void Model::check(const ModeCoeffs& c) const {
    if (c.n_theta_max() != config_.n_theta_max || c.n_radial() != n_radial())
        throw DimensionMismatch("mode coefficients do not match the model");
}

void Model::check(const Field2D& f) const {
    if (f.n_theta() != n_theta() || f.n_radial() != n_radial())
        throw DimensionMismatch("field dimensions do not match the model");
}

Model build_model(const ModelConfig& config) { return Model(config); }

ModeCoeffs project_modes(const Model& model, const Field2D& field) {
    model.check(field);
    ModeCoeffs out(model);
    const double w = model.theta_weight();
    const auto theta = model.theta_nodes();
    const std::size_t nr = model.n_radial();
    for (std::size_t s = 0; s < out.mode_count(); ++s) {
        const ModeIndex m = out.mode_at(s);
        auto dst = out[s];
        for (std::size_t q = 0; q < theta.size(); ++q) {
            const double g = w * angular_basis(m, theta[q]);
            for (std::size_t i = 0; i < nr; ++i) dst[i] += g * field(q, i);
        }
    }
    return out;
}

Field2D synthesize_field(const Model& model, const ModeCoeffs& coeffs) {
    model.check(coeffs);
    Field2D out(model);
    const auto theta = model.theta_nodes();
    const std::size_t nr = model.n_radial();
    for (std::size_t q = 0; q < theta.size(); ++q) {
        for (std::size_t s = 0; s < coeffs.mode_count(); ++s) {
            const double g = angular_basis(coeffs.mode_at(s), theta[q]);
            const auto src = coeffs[s];
            for (std::size_t i = 0; i < nr; ++i) out(q, i) += g * src[i];
        }
    }
    return out;
}

double radial_dot(const RadialGrid& grid, std::span<const double> u, std::span<const double> v) {
    if (u.size() != grid.size() || v.size() != grid.size())
        throw DimensionMismatch("radial vector length does not match grid");
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += grid.mass[i] * u[i] * v[i];
    return acc;
}

double radial_norm(const RadialGrid& grid, std::span<const double> u) {
    return std::sqrt(radial_dot(grid, u, u));
}

double mode_dot(const Model& model, const ModeCoeffs& a, const ModeCoeffs& b) {
    model.check(a);
    model.check(b);
    double acc = 0.0;
    for (std::size_t s = 0; s < a.mode_count(); ++s) acc += radial_dot(model.grid(), a[s], b[s]);
    return acc;
}

double mode_norm(const Model& model, const ModeCoeffs& a) { return std::sqrt(mode_dot(model, a, a)); }

double field_norm(const Model& model, const Field2D& f) {
    model.check(f);
    const auto& mass = model.grid().mass;
    double acc = 0.0;
    for (std::size_t q = 0; q < f.n_theta(); ++q)
        for (std::size_t i = 0; i < f.n_radial(); ++i) acc += mass[i] * f(q, i) * f(q, i);
    return std::sqrt(model.theta_weight() * acc);
}

}  // namespace degenctrl
