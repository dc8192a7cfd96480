#pragma once

// Discrete model of the degenerate problem on T x (0,1): radial grid, angular
// quadrature, Fourier-mode bookkeeping, and the analysis/synthesis maps
// between 2D fields and per-mode radial coefficients.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace degenctrl {

/// User-facing model parameters. Optional fields take derived defaults,
/// see resolved().
struct ModelConfig {
    double alpha = 0.5;
    double T_horizon = 1.0;
    int n_theta_max = 4;
    int n_r = 64;
    std::optional<double> grid_power;      // default 2/(2-alpha)
    int n_time = 100;
    std::optional<int> theta_quad_points;  // default 4*n_theta_max+8
    std::optional<double> s0_default;      // default 10*max(1, T^16)

    /// Throws InvalidArgument when an invariant is violated.
    void validate() const;
    /// Copy with every optional field filled in.
    [[nodiscard]] ModelConfig resolved() const;

    [[nodiscard]] double effective_grid_power() const;
    [[nodiscard]] int effective_theta_quad_points() const;
    [[nodiscard]] double effective_s0() const;

    bool operator==(const ModelConfig&) const = default;
};

/// Graded radial mesh r_i = (i/n_r)^g. Interior nodes carry the unknowns;
/// r_0 = 0 and r_{n_r} = 1 hold the homogeneous Dirichlet values.
struct RadialGrid {
    int n_r = 0;
    double grid_power = 1.0;
    double alpha = 0.5;
    std::vector<double> edges;         // r_0 .. r_{n_r}
    std::vector<double> nodes;         // r_1 .. r_{n_r-1}
    std::vector<double> half_nodes;    // r_{i+1/2}, i = 0 .. n_r-1
    std::vector<double> widths;        // r_{i+1} - r_i, i = 0 .. n_r-1
    std::vector<double> half_weights;  // face coefficients: r_{i+1/2}^alpha, harmonic mean of r^alpha on (0, r_1)
    std::vector<double> mass;          // cell measure of node i (interior)

    [[nodiscard]] std::size_t size() const { return nodes.size(); }
};

RadialGrid build_radial_grid(int n_r, double grid_power, double alpha);

/// Face coefficient of cell (lo, hi): w at the midpoint, or the harmonic mean
/// (hi - lo) / int r^-alpha on the cell touching r = 0.
double face_weight(double lo, double hi, double alpha);

enum class Parity { Cos = 0, Sin = 1 };

/// Index (i, n) of the angular basis function g_{i,n}.
struct ModeIndex {
    Parity parity = Parity::Cos;
    int n = 0;

    auto operator<=>(const ModeIndex&) const = default;
};

const char* parity_name(Parity p);

/// Orthonormal angular basis on [0, 2pi): 1/sqrt(2pi), cos(n t)/sqrt(pi),
/// sin(n t)/sqrt(pi).
double angular_basis(ModeIndex mode, double theta);

class Model;

/// Per-mode radial coefficient vectors, laid out cos 0..N then sin 1..N.
class ModeCoeffs {
public:
    ModeCoeffs() = default;
    ModeCoeffs(int n_theta_max, std::size_t n_radial);
    explicit ModeCoeffs(const Model& model);

    [[nodiscard]] int n_theta_max() const { return n_theta_max_; }
    [[nodiscard]] std::size_t n_radial() const { return n_radial_; }
    [[nodiscard]] std::size_t mode_count() const { return 2 * static_cast<std::size_t>(n_theta_max_) + 1; }

    [[nodiscard]] std::size_t slot(ModeIndex mode) const;
    [[nodiscard]] ModeIndex mode_at(std::size_t slot) const;

    std::span<double> operator[](std::size_t slot);
    std::span<const double> operator[](std::size_t slot) const;
    std::span<double> mode(ModeIndex m) { return (*this)[slot(m)]; }
    std::span<const double> mode(ModeIndex m) const { return (*this)[slot(m)]; }

    std::vector<double>& data() { return data_; }
    [[nodiscard]] const std::vector<double>& data() const { return data_; }

    [[nodiscard]] bool same_shape(const ModeCoeffs& other) const {
        return n_theta_max_ == other.n_theta_max_ && n_radial_ == other.n_radial_;
    }

    ModeCoeffs& operator+=(const ModeCoeffs& other);
    ModeCoeffs& operator-=(const ModeCoeffs& other);
    ModeCoeffs& operator*=(double s);
    /// this += s * other
    void axpy(double s, const ModeCoeffs& other);

private:
    int n_theta_max_ = 0;
    std::size_t n_radial_ = 0;
    std::vector<double> data_;
};

/// Samples on the tensor grid theta_q x r_i, theta-major.
class Field2D {
public:
    Field2D() = default;
    Field2D(std::size_t n_theta, std::size_t n_radial);
    explicit Field2D(const Model& model);

    [[nodiscard]] std::size_t n_theta() const { return n_theta_; }
    [[nodiscard]] std::size_t n_radial() const { return n_radial_; }

    double& operator()(std::size_t q, std::size_t i) { return data_[q * n_radial_ + i]; }
    double operator()(std::size_t q, std::size_t i) const { return data_[q * n_radial_ + i]; }

    std::vector<double>& data() { return data_; }
    [[nodiscard]] const std::vector<double>& data() const { return data_; }

private:
    std::size_t n_theta_ = 0;
    std::size_t n_radial_ = 0;
    std::vector<double> data_;
};

/// Immutable discrete model.
class Model {
public:
    explicit Model(const ModelConfig& config);

    [[nodiscard]] const ModelConfig& config() const { return config_; }
    [[nodiscard]] const RadialGrid& grid() const { return grid_; }
    [[nodiscard]] std::span<const double> theta_nodes() const { return theta_; }
    [[nodiscard]] const std::vector<ModeIndex>& modes() const { return modes_; }

    [[nodiscard]] double alpha() const { return config_.alpha; }
    [[nodiscard]] double horizon() const { return config_.T_horizon; }
    [[nodiscard]] int n_theta_max() const { return config_.n_theta_max; }
    [[nodiscard]] int n_time() const { return config_.n_time; }
    [[nodiscard]] double dt() const { return config_.T_horizon / config_.n_time; }
    [[nodiscard]] std::size_t n_radial() const { return grid_.size(); }
    [[nodiscard]] std::size_t n_theta() const { return theta_.size(); }
    /// Angular trapezoid weight 2pi/Q.
    [[nodiscard]] double theta_weight() const;

    void check(const ModeCoeffs& c) const;
    void check(const Field2D& f) const;

private:
    ModelConfig config_;
    RadialGrid grid_;
    std::vector<double> theta_;
    std::vector<ModeIndex> modes_;
};

Model build_model(const ModelConfig& config);

/// Discrete Fourier analysis against g_{i,n} by the angular trapezoid rule.
ModeCoeffs project_modes(const Model& model, const Field2D& field);
/// Pointwise sum of c_{i,n}(r) g_{i,n}(theta).
Field2D synthesize_field(const Model& model, const ModeCoeffs& coeffs);

/// Mass-weighted radial inner product sum_i m_i u_i v_i.
double radial_dot(const RadialGrid& grid, std::span<const double> u, std::span<const double> v);
double radial_norm(const RadialGrid& grid, std::span<const double> u);

/// Discrete L2(Omega) inner product in mode coordinates.
double mode_dot(const Model& model, const ModeCoeffs& a, const ModeCoeffs& b);
double mode_norm(const Model& model, const ModeCoeffs& a);
/// Discrete L2(Omega) norm of a field by angular trapezoid x radial mass.
double field_norm(const Model& model, const Field2D& f);

}  // namespace degenctrl
