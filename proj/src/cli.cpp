#include "degenctrl/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "degenctrl/carleman.hpp"
#include "degenctrl/control.hpp"
#include "degenctrl/evolution.hpp"
#include "degenctrl/measurable_obs.hpp"
#include "degenctrl/radial_spectral.hpp"
#include "degenctrl/scenarios.hpp"
#include "degenctrl/spectral_obs.hpp"

namespace degenctrl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class Kind { Real, OptReal, Int, OptInt, UInt, String, RealArray, IntervalArray, BoxArray };

struct Field {
    std::string name;
    Kind kind;
    json def;
};

const std::vector<Field>& model_fields() {
    static const std::vector<Field> f{
        {"alpha", Kind::Real, 0.5},          {"T_horizon", Kind::Real, 1.0},
        {"n_theta_max", Kind::Int, 4},       {"n_r", Kind::Int, 64},
        {"grid_power", Kind::OptReal, nullptr}, {"n_time", Kind::Int, 100},
        {"theta_quad_points", Kind::OptInt, nullptr}, {"s0_default", Kind::OptReal, nullptr},
        {"seed", Kind::UInt, 0},
    };
    return f;
}

json desk_boxes_json() {
    return json::array({json::array({0.0, 2.0, 0.3, 0.45, 0.0, 0.6}), json::array({3.0, 5.5, 0.4, 0.6, 0.3, 1.0})});
}

const std::map<std::string, std::vector<Field>>& command_fields() {
    static const std::map<std::string, std::vector<Field>> f{
        {"spectrum", {{"count", Kind::Int, 5}, {"max_rel_error", Kind::Real, 5e-3}}},
        {"hardy", {{"samples", Kind::Int, 1000}, {"max_degree", Kind::Int, 6}}},
        {"solve",
         {{"initial", Kind::String, "eigen"},
          {"initial_n", Kind::Int, 1},
          {"initial_k", Kind::Int, 1},
          {"snapshot_times", Kind::RealArray, json::array()}}},
        {"carleman",
         {{"alphas", Kind::RealArray, json::array()},
          {"a", Kind::Real, 0.3},
          {"b", Kind::Real, 0.6},
          {"s_multipliers", Kind::RealArray, json::array({1.0, 2.0, 4.0})}}},
        {"spectral-ineq", {{"K_max", Kind::Int, 12}, {"c", Kind::Real, 0.0}, {"d", Kind::Real, 1.0}}},
        {"observability",
         {{"cap_type", Kind::String, "E_j"},
          {"j_max", Kind::Int, -1},
          {"n_max", Kind::Int, -1},
          {"theta_lo", Kind::Real, 0.0},
          {"theta_hi", Kind::Real, 2.0 * std::numbers::pi},
          {"a", Kind::Real, 0.3},
          {"b", Kind::Real, 0.6},
          {"k_max", Kind::Int, 24}}},
        {"hum",
         {{"a", Kind::Real, 0.3},
          {"b", Kind::Real, 0.6},
          {"boxes", Kind::BoxArray, json::array()},
          {"eps", Kind::Real, 1e-6},
          {"cg_tol", Kind::Real, 1e-10},
          {"max_iter", Kind::Int, 500},
          {"initial", Kind::String, "desk"},
          {"initial_n", Kind::Int, 1},
          {"initial_k", Kind::Int, 1},
          {"control_stride", Kind::Int, 10}}},
        {"lr",
         {{"a", Kind::Real, 0.3},
          {"b", Kind::Real, 0.6},
          {"tol", Kind::Real, 1e-3},
          {"n_blocks", Kind::Int, 3},
          {"cg_tol", Kind::Real, 1e-12},
          {"max_iter", Kind::Int, 500},
          {"initial", Kind::String, "desk"},
          {"initial_n", Kind::Int, 1},
          {"initial_k", Kind::Int, 1}}},
        {"measurable",
         {{"a", Kind::Real, 0.3},
          {"b", Kind::Real, 0.6},
          {"boxes", Kind::BoxArray, desk_boxes_json()},
          {"family_size", Kind::Int, 20},
          {"low_modes", Kind::Int, 4},
          {"q_C", Kind::Real, 1.0},
          {"q_h", Kind::Real, 0.5},
          {"m_max", Kind::Int, 40},
          {"slab_t1", Kind::Real, 0.4},
          {"slab_t2", Kind::Real, 0.6},
          {"slab_eta", Kind::Real, 0.1},
          {"calibration", Kind::Real, 1e-6}}},
        {"density-seq",
         {{"E_intervals", Kind::IntervalArray, json::array({json::array({0.0, 1.0})})},
          {"ell", Kind::Real, 0.5},
          {"q", Kind::Real, 0.5},
          {"m_max", Kind::Int, 40},
          {"ell_1", Kind::OptReal, nullptr}}},
    };
    return f;
}

bool numeric_tuple_array(const json& v, std::size_t width) {
    if (!v.is_array()) return false;
    return std::ranges::all_of(v, [&](const json& e) {
        return e.is_array() && e.size() == width && std::ranges::all_of(e, [](const json& x) { return x.is_number(); });
    });
}

bool matches(const json& v, Kind kind) {
    switch (kind) {
        case Kind::Real: return v.is_number();
        case Kind::OptReal: return v.is_null() || v.is_number();
        case Kind::Int: return v.is_number_integer();
        case Kind::OptInt: return v.is_null() || v.is_number_integer();
        case Kind::UInt: return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
        case Kind::String: return v.is_string();
        case Kind::RealArray:
            return v.is_array() && std::ranges::all_of(v, [](const json& x) { return x.is_number(); });
        case Kind::IntervalArray: return numeric_tuple_array(v, 2);
        case Kind::BoxArray: return numeric_tuple_array(v, 6);
    }
    return false;
}

const char* kind_name(Kind kind) {
    switch (kind) {
        case Kind::Real: return "a number";
        case Kind::OptReal: return "a number or null";
        case Kind::Int: return "an integer";
        case Kind::OptInt: return "an integer or null";
        case Kind::UInt: return "a non-negative integer";
        case Kind::String: return "a string";
        case Kind::RealArray: return "an array of numbers";
        case Kind::IntervalArray: return "an array of [lo, hi] pairs";
        case Kind::BoxArray: return "an array of [theta_lo, theta_hi, r_lo, r_hi, t_lo, t_hi] boxes";
    }
    return "";
}

std::vector<Box> boxes_from(const json& v) {
    std::vector<Box> out;
    for (const auto& b : v)
        out.push_back({{b[0].get<double>(), b[1].get<double>()},
                       {b[2].get<double>(), b[3].get<double>()},
                       {b[4].get<double>(), b[5].get<double>()}});
    return out;
}

// ---- artifacts -------------------------------------------------------------

class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + (dir_ / name).string());
        f << content;
        if (!f) throw Error("write failed for " + (dir_ / name).string());
        if (std::ranges::find(names_, name) == names_.end()) names_.push_back(name);
    }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
    [[nodiscard]] const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

class Csv {
public:
    explicit Csv(std::initializer_list<std::string> header) { line(std::vector<std::string>(header)); }
    explicit Csv(const std::vector<std::string>& header) { line(header); }

    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }
    [[nodiscard]] const std::string& text() const { return text_; }

private:
    std::string text_;
};

std::string num(double v) { return format_double(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

std::string field_csv(const Model& model, const Field2D& f) {
    std::vector<std::string> header{"r"};
    for (double th : model.theta_nodes()) header.push_back(num(th));
    Csv csv(header);
    for (std::size_t i = 0; i < model.n_radial(); ++i) {
        std::vector<std::string> row{num(model.grid().nodes[i])};
        for (std::size_t q = 0; q < model.n_theta(); ++q) row.push_back(num(f(q, i)));
        csv.line(row);
    }
    return csv.text();
}

struct Failure {
    int code = kOk;
    std::string message;

    void fail(int c, const std::string& m) {
        if (code == kOk) {
            code = c;
            message = m;
        }
    }
};

ModeCoeffs initial_datum(const Model& model, const json& o, std::uint64_t seed) {
    const std::string kind = o.at("initial").get<std::string>();
    if (kind == "desk") return desk_datum(model);
    if (kind == "random") return random_datum(model, seed);
    if (kind == "eigen") {
        const int n = o.at("initial_n").get<int>();
        if (n < 0 || n > model.n_theta_max()) throw ConfigError("initial_n outside 0..n_theta_max");
        return eigen_datum(model, {Parity::Cos, n}, o.at("initial_k").get<int>());
    }
    throw ConfigError("initial must be one of desk, eigen, random");
}

// ---- commands --------------------------------------------------------------

Failure cmd_spectrum(const RunConfig& rc, Artifacts& art) {
    const Model model = build_model(rc.model);
    const int count = rc.options.at("count").get<int>();
    if (count < 1 || static_cast<std::size_t>(count) > model.n_radial()) throw ConfigError("count out of range");
    const auto op = assemble_radial_operator(model.alpha(), model.grid());
    const auto vals = radial_eigenvalues(op, static_cast<std::size_t>(count));
    const auto bessel = bessel_oracle(model.alpha(), count);
    const double tol = rc.options.at("max_rel_error").get<double>();
    Failure f;
    Csv csv{"k", "lambda_discrete", "lambda_bessel", "rel_error"};
    for (int k = 0; k < count; ++k) {
        const double rel = std::abs(vals[k] - bessel[k]) / bessel[k];
        csv.line({num(k + 1), num(vals[k]), num(bessel[k]), num(rel)});
        if (!(rel < tol)) f.fail(kInvariantFailure, "eigenvalue " + std::to_string(k + 1) + " misses the Bessel oracle");
    }
    art.write("spectrum.csv", csv.text());
    const double gap = 0.25 * (1 - model.alpha()) * (1 - model.alpha());
    if (!(gap < vals[0])) f.fail(kInvariantFailure, "spectral gap (1-alpha)^2/4 < lambda_1 violated");
    return f;
}

Failure cmd_hardy(const RunConfig& rc, Artifacts& art) {
    const Model model = build_model(rc.model);
    const int samples = rc.options.at("samples").get<int>();
    const int max_degree = rc.options.at("max_degree").get<int>();
    if (samples < 1 || max_degree < 0) throw ConfigError("samples must be positive and max_degree non-negative");
    const auto& grid = model.grid();
    std::mt19937_64 rng(rc.seed);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> deg(0, max_degree);
    Failure f;
    Csv csv{"sample", "degree", "ratio", "constant"};
    for (int s = 0; s < samples; ++s) {
        const int d = deg(rng);
        std::vector<double> c(static_cast<std::size_t>(d) + 1);
        for (auto& x : c) x = nd(rng);
        std::vector<double> u(grid.edges.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double r = grid.edges[i];
            double p = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) p = p * r + *it;
            u[i] = r * (1.0 - r) * p;
        }
        u.front() = 0.0;
        u.back() = 0.0;
        const auto rep = hardy_ratio_with_ends(u, model.alpha(), grid);
        csv.line({num(s), num(d), num(rep.ratio), num(rep.constant)});
        if (rep.ratio > rep.constant * (1 + 1e-6)) f.fail(kInvariantFailure, "Hardy ratio above the constant");
    }
    art.write("hardy.csv", csv.text());
    return f;
}

Failure cmd_solve(const RunConfig& rc, Artifacts& art) {
    const Model model = build_model(rc.model);
    const auto phi0 = initial_datum(model, rc.options, rc.seed);
    const auto traj = solve_forward(model, phi0);
    const auto norms = trajectory_norms(model, traj);
    Failure f;
    Csv csv{"t", "l2_norm"};
    for (std::size_t k = 0; k < norms.size(); ++k) {
        csv.line({num(traj.time.time(static_cast<int>(k))), num(norms[k])});
        if (k > 0 && norms[k] > norms[k - 1] * (1 + 1e-12)) f.fail(kInvariantFailure, "discrete energy increased");
    }
    art.write("solve.csv", csv.text());
    for (const auto& tj : rc.options.at("snapshot_times")) {
        const double t = tj.get<double>();
        if (!(t >= 0.0 && t <= model.horizon())) throw ConfigError("snapshot time outside [0, T]");
        const int k = static_cast<int>(std::lround(t / model.dt()));
        art.write("snapshot_" + std::to_string(k) + ".csv",
                  field_csv(model, synthesize_field(model, traj.snapshot(static_cast<std::size_t>(k)))));
    }
    return f;
}

Failure cmd_carleman(const RunConfig& rc, Artifacts& art) {
    std::vector<double> alphas = rc.options.at("alphas").get<std::vector<double>>();
    if (alphas.empty()) alphas.push_back(rc.model.alpha);
    const auto mult = rc.options.at("s_multipliers").get<std::vector<double>>();
    if (mult.empty()) throw ConfigError("s_multipliers must not be empty");
    const auto cases = carleman_family(rc.model, alphas, rc.options.at("a").get<double>(),
                                       rc.options.at("b").get<double>(), mult);
    Failure f;
    Csv csv{"s", "mode_parity", "mode_n", "lhs_grad", "lhs_zero", "rhs_f", "rhs_obs", "ratio"};
    json jc = json::array();
    std::size_t row_index = 0;
    for (const auto& c : cases) {
        json rows = json::array();
        for (const auto& r : c.rows) {
            csv.line({num(r.s), parity_name(r.mode.parity), num(r.mode.n), num(r.lhs_grad), num(r.lhs_zero),
                      num(r.rhs_f), num(r.rhs_obs), num(r.ratio)});
            rows.push_back({{"row", row_index++}, {"s", r.s}, {"log_scale", r.log_scale}, {"below_s0", r.below_s0}});
            const bool ok = std::isfinite(r.ratio) && r.ratio > 0.0 && r.lhs_grad >= 0.0 && r.lhs_zero >= 0.0 &&
                            r.rhs_f >= 0.0 && r.rhs_obs >= 0.0;
            if (!ok) f.fail(kInvariantFailure, "Carleman report has a non-finite or non-positive entry");
        }
        jc.push_back({{"alpha", c.alpha}, {"kind", c.kind}, {"s0", c.s0}, {"rows", rows}});
    }
    art.write("carleman.csv", csv.text());

    const Model model = build_model(rc.model);
    const auto nodes = make_time_grid(model).nodes();
    const auto tb = verify_theta_bounds(model.horizon(), nodes);
    if (!tb.holds) f.fail(kInvariantFailure, "Theta derivative bounds violated");
    art.write_json("carleman.json", {{"cases", jc},
                                     {"theta_bounds",
                                      {{"nodes_checked", tb.nodes_checked},
                                       {"max_ratio_d1", tb.max_ratio_d1},
                                       {"max_ratio_d2", tb.max_ratio_d2},
                                       {"holds", tb.holds}}}});
    return f;
}

Failure cmd_spectral_ineq(const RunConfig& rc, Artifacts& art) {
    const int K_max = rc.options.at("K_max").get<int>();
    const double c = rc.options.at("c").get<double>(), d = rc.options.at("d").get<double>();
    if (K_max < 0) throw ConfigError("K_max must be non-negative");
    Failure f;
    Csv csv{"K", "lambda_min", "log_lambda_min", "c_emp"};
    for (int K = 0; K <= K_max; ++K) {
        const auto g = torus_smallest_gram_eigenvalue(K, c, d);
        csv.line({num(K), num(g.lambda_min), num(g.log_lambda_min), num(g.c_emp)});
        if (K == 0 && std::abs(g.lambda_min - (d - c) / (2 * std::numbers::pi)) > 1e-12)
            f.fail(kInvariantFailure, "K=0 Gram eigenvalue differs from |I|/(2pi)");
    }
    art.write("spectral_ineq.csv", csv.text());
    return f;
}

Failure cmd_observability(const RunConfig& rc, Artifacts& art) {
    const Model model = build_model(rc.model);
    const auto& o = rc.options;
    const std::string cap = o.at("cap_type").get<std::string>();
    const int k_max = o.at("k_max").get<int>();
    const double a = o.at("a").get<double>(), b = o.at("b").get<double>();
    Failure f;
    Csv csv{"j_or_n", "cap_type", "c_emp", "basis_dim", "residual"};
    std::vector<ObservabilityEstimate> ests;
    if (cap == "E_j") {
        int j_max = o.at("j_max").get<int>();
        if (j_max < 0) j_max = static_cast<int>(std::floor(std::log2(std::max(1, model.n_theta_max()))));
        const Patch patch{o.at("theta_lo").get<double>(), o.at("theta_hi").get<double>(), a, b};
        for (int j = 0; j <= j_max; ++j) ests.push_back(truncated_observability(model, patch, j, k_max));
        for (std::size_t j = 1; j < ests.size(); ++j)
            if (ests[j].c_emp < ests[j - 1].c_emp * (1 - 1e-6))
                f.fail(kInvariantFailure, "observability constant decreased in j");
    } else if (cap == "mode") {
        int n_max = o.at("n_max").get<int>();
        if (n_max < 0) n_max = model.n_theta_max();
        for (int n = 0; n <= n_max; ++n) ests.push_back(mode_observability_constant(model, n, a, b, k_max));
    } else {
        throw ConfigError("cap_type must be E_j or mode");
    }
    for (const auto& e : ests) {
        csv.line({num(e.index), e.cap_type, num(e.c_emp), num(e.basis_dim), num(e.residual)});
        if (e.singular) f.fail(kInvariantFailure, "singular observation operator: " + e.diagnostic);
    }
    art.write("observability.csv", csv.text());
    return f;
}

ControlRegion region_from(const RunConfig& rc) {
    const auto& o = rc.options;
    if (!o.at("boxes").empty()) return BoxUnion(boxes_from(o.at("boxes")), rc.model.T_horizon);
    return Cylinder{o.at("a").get<double>(), o.at("b").get<double>()};
}

Failure cmd_hum(const RunConfig& rc, Artifacts& art) {
    const Model model = build_model(rc.model);
    const auto& o = rc.options;
    const auto phi0 = initial_datum(model, o, rc.seed);
    const int stride = o.at("control_stride").get<int>();
    if (stride < 1) throw ConfigError("control_stride must be positive");
    const auto res = hum_control(model, phi0, region_from(rc), o.at("eps").get<double>(),
                                 o.at("cg_tol").get<double>(), o.at("max_iter").get<int>());
    for (std::size_t k = 0; k < res.control.size(); k += static_cast<std::size_t>(stride))
        art.write("control_" + std::to_string(k) + ".csv", field_csv(model, synthesize_field(model, res.control[k])));
    const double rel = res.phi0_norm > 0 ? res.terminal_residual / res.phi0_norm : 0.0;
    const double linf = res.phi0_norm > 0 ? linf_ratio(res) : 0.0;
    art.write_json("hum.json", {{"residual", rel},
                                {"iterations", res.iterations},
                                {"cost", res.cost},
                                {"linf_ratio", linf},
                                {"identity_residual", res.identity_residual},
                                {"phi0_norm", res.phi0_norm},
                                {"eps", res.eps},
                                {"cg_tol", res.cg_tol},
                                {"solver_residual", res.solver_residual},
                                {"converged", res.converged},
                                {"stagnated", res.stagnated},
                                {"control_stride", stride},
                                {"dt", model.dt()}});
    Failure f;
    if (!res.converged) f.fail(kNotConverged, "HUM solver did not reach cg_tol");
    if (res.identity_residual > 10 * res.cg_tol * res.phi0_norm)
        f.fail(kInvariantFailure, "penalized identity residual above 10 cg_tol |phi0|");
    return f;
}

Failure cmd_lr(const RunConfig& rc, Artifacts& art) {
    const Model model = build_model(rc.model);
    const auto& o = rc.options;
    const auto phi0 = initial_datum(model, o, rc.seed);
    const auto res = lr_control(model, phi0, Cylinder{o.at("a").get<double>(), o.at("b").get<double>()},
                                o.at("tol").get<double>(), o.at("n_blocks").get<int>(), o.at("cg_tol").get<double>(),
                                o.at("max_iter").get<int>());
    json blocks = json::array();
    for (const auto& b : res.blocks)
        blocks.push_back({{"index", b.index},
                          {"cap", b.cap},
                          {"t_start", b.t_start},
                          {"t_switch", b.t_switch},
                          {"t_end", b.t_end},
                          {"eps", b.eps},
                          {"iterations", b.iterations},
                          {"cost", b.cost},
                          {"low_mode_norm", b.low_mode_norm},
                          {"budget", b.budget},
                          {"norm_end", b.norm_end},
                          {"budget_met", b.budget_met}});
    art.write_json("lr.json", {{"boundaries", res.boundaries},
                               {"blocks", blocks},
                               {"phi0_norm", res.phi0_norm},
                               {"final_norm", res.final_norm},
                               {"final_residual", res.final_residual},
                               {"tol", res.tol},
                               {"converged", res.converged},
                               {"diagnostic", res.diagnostic}});
    Failure f;
    if (!res.converged) f.fail(kNotConverged, "dyadic block control missed the tolerance: " + res.diagnostic);
    return f;
}

json sequence_json(const DensitySequence& s) {
    return {{"ell", s.ell},
            {"q", s.q},
            {"gap", s.gap},
            {"halvings", s.halvings},
            {"values", s.values},
            {"fractions", s.fractions},
            {"max_ratio_error", s.max_ratio_error},
            {"min_fraction", s.min_fraction}};
}

Failure cmd_measurable(const RunConfig& rc, Artifacts& art) {
    const Model model = build_model(rc.model);
    const auto& o = rc.options;
    const BoxUnion D(boxes_from(o.at("boxes")), model.horizon());
    const Cylinder omega{o.at("a").get<double>(), o.at("b").get<double>()};
    MeasurableOptions mo;
    mo.family_size = o.at("family_size").get<int>();
    mo.low_modes = o.at("low_modes").get<int>();
    mo.seed = rc.seed;
    mo.q_constant = o.at("q_C").get<double>();
    mo.q_exponent = o.at("q_h").get<double>();
    mo.m_max = o.at("m_max").get<int>();
    const auto family = measurable_family(model, mo);
    const auto rep = measurable_observability_ratio(model, family, D, omega, mo);
    Failure f;
    if (slice_inclusion_violations(model, D, rep.slices.E) != 0)
        f.fail(kInvariantFailure, "chi_E chi_{D_t} <= chi_D violated on the grid");

    const double t1 = o.at("slab_t1").get<double>(), t2 = o.at("slab_t2").get<double>();
    json data = json::array();
    for (std::size_t j = 0; j < family.size(); ++j) {
        const auto& d = rep.data[j];
        const auto slab = slab_interpolation_report(model, family[j], t1, t2, rep.slices.E, D,
                                                    o.at("calibration").get<double>(), o.at("slab_eta").get<double>());
        if (!slab.degenerate && !slab.h_in_unit) f.fail(kInvariantFailure, "slab exponent h_emp outside (0,1)");
        data.push_back({{"index", d.index},
                        {"kind", d.kind},
                        {"terminal_norm", d.terminal_norm},
                        {"observation", d.observation},
                        {"rho", d.rho},
                        {"excluded", d.excluded},
                        {"slab", {{"n1", slab.n1}, {"n2", slab.n2}, {"obs", slab.obs}, {"h_emp", slab.h_emp},
                                  {"degenerate", slab.degenerate}}}});
    }
    json intervals = json::array();
    for (const auto& i : rep.slices.E.intervals()) intervals.push_back({i.lo, i.hi});
    art.write_json("measurable.json", {{"E_intervals", intervals},
                                       {"E_measure", rep.slices.e_measure},
                                       {"E_lower_bound", rep.slices.e_lower_bound},
                                       {"D_measure", rep.slices.d_measure},
                                       {"threshold", rep.slices.threshold},
                                       {"ell", rep.ell},
                                       {"q", rep.q},
                                       {"ell_sequence", rep.sequence.values},
                                       {"sequence", sequence_json(rep.sequence)},
                                       {"rho_max", rep.rho_max},
                                       {"excluded", rep.excluded},
                                       {"slab_window", {t1, t2}},
                                       {"calibration", o.at("calibration")},
                                       {"per_datum", data}});
    if (rep.sequence.max_ratio_error > 1e-12 || rep.sequence.min_fraction < 1.0 / 3.0)
        f.fail(kInvariantFailure, "density sequence violates its invariants");
    return f;
}

Failure cmd_density_seq(const RunConfig& rc, Artifacts& art) {
    const auto& o = rc.options;
    std::vector<Interval> iv;
    for (const auto& p : o.at("E_intervals")) iv.push_back({p[0].get<double>(), p[1].get<double>()});
    const TimeSet E(iv, rc.model.T_horizon);
    std::optional<double> ell_1;
    if (!o.at("ell_1").is_null()) ell_1 = o.at("ell_1").get<double>();
    const auto seq =
        density_sequence(E, o.at("ell").get<double>(), o.at("q").get<double>(), o.at("m_max").get<int>(), ell_1);
    Csv csv{"m", "ell_m", "gap", "fraction"};
    for (std::size_t m = 0; m < seq.values.size(); ++m) {
        const bool last = m + 1 == seq.values.size();
        csv.line({num(m + 1), num(seq.values[m]), last ? "" : num(seq.values[m] - seq.values[m + 1]),
                  last ? "" : num(seq.fractions[m])});
    }
    art.write("density_seq.csv", csv.text());
    Failure f;
    if (seq.max_ratio_error > 1e-12 || seq.min_fraction < 1.0 / 3.0)
        f.fail(kInvariantFailure, "density sequence violates its invariants");
    return f;
}

using Command = Failure (*)(const RunConfig&, Artifacts&);

const std::map<std::string, Command>& commands() {
    static const std::map<std::string, Command> c{
        {"spectrum", cmd_spectrum},       {"hardy", cmd_hardy},
        {"solve", cmd_solve},             {"carleman", cmd_carleman},
        {"spectral-ineq", cmd_spectral_ineq}, {"observability", cmd_observability},
        {"hum", cmd_hum},                 {"lr", cmd_lr},
        {"measurable", cmd_measurable},   {"density-seq", cmd_density_seq},
    };
    return c;
}

int code_for(const std::exception& e) {
    if (dynamic_cast<const MissingFileError*>(&e)) return kMissingFile;
    if (dynamic_cast<const InvalidArgument*>(&e)) return kUsageError;
    if (dynamic_cast<const ConvergenceError*>(&e)) return kNotConverged;
    return kInvariantFailure;
}

void write_manifest(const fs::path& out, const std::string& command, const json& config, std::uint64_t seed,
                    const std::vector<std::string>& artifacts, double seconds, int code, const std::string& message) {
    json files = json::array();
    for (const auto& name : artifacts)
        files.push_back({{"file", name}, {"sha256", sha256_file(out / name)}, {"bytes", fs::file_size(out / name)}});
    const json m{{"command", command},     {"config", config},       {"seed", seed},
                 {"artifacts", files},     {"duration_seconds", seconds}, {"exit_code", code},
                 {"message", message}};
    std::ofstream f(out / "manifest.json", std::ios::binary | std::ios::trunc);
    f << m.dump(2) << "\n";
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, v] : commands()) n.push_back(k);
        return n;
    }();
    return names;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw MissingFileError("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (f.read(buf, sizeof buf) || f.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(f.gcount()));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static constexpr char hex[] = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

json RunConfig::resolved() const {
    const ModelConfig r = model.resolved();
    json j{{"alpha", r.alpha},
           {"T_horizon", r.T_horizon},
           {"n_theta_max", r.n_theta_max},
           {"n_r", r.n_r},
           {"grid_power", *r.grid_power},
           {"n_time", r.n_time},
           {"theta_quad_points", *r.theta_quad_points},
           {"s0_default", *r.s0_default},
           {"seed", seed}};
    for (const auto& [k, v] : options.items()) j[k] = v;
    return j;
}

RunConfig parse_config(const std::string& command, const json& doc, std::optional<std::uint64_t> seed_override) {
    const auto it = command_fields().find(command);
    if (it == command_fields().end()) throw ConfigError("unknown command '" + command + "'");
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    std::map<std::string, const Field*> schema;
    for (const auto& f : model_fields()) schema[f.name] = &f;
    for (const auto& f : it->second) schema[f.name] = &f;
    for (const auto& [k, v] : doc.items()) {
        const auto s = schema.find(k);
        if (s == schema.end()) throw ConfigError("unknown key '" + k + "' for command " + command);
        if (!matches(v, s->second->kind))
            throw ConfigError("key '" + k + "' must be " + std::string(kind_name(s->second->kind)));
    }
    auto get = [&](const Field& f) { return doc.contains(f.name) ? doc.at(f.name) : f.def; };

    RunConfig rc;
    rc.command = command;
    ModelConfig& m = rc.model;
    m.alpha = get(model_fields()[0]).get<double>();
    m.T_horizon = get(model_fields()[1]).get<double>();
    m.n_theta_max = get(model_fields()[2]).get<int>();
    m.n_r = get(model_fields()[3]).get<int>();
    if (const auto g = get(model_fields()[4]); !g.is_null()) m.grid_power = g.get<double>();
    m.n_time = get(model_fields()[5]).get<int>();
    if (const auto q = get(model_fields()[6]); !q.is_null()) m.theta_quad_points = q.get<int>();
    if (const auto s = get(model_fields()[7]); !s.is_null()) m.s0_default = s.get<double>();
    rc.seed = seed_override.value_or(get(model_fields()[8]).get<std::uint64_t>());
    try {
        m.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    rc.options = json::object();
    for (const auto& f : it->second) rc.options[f.name] = get(f);
    return rc;
}

RunConfig parse_config_file(const std::string& command, const fs::path& path,
                            std::optional<std::uint64_t> seed_override) {
    if (!fs::is_regular_file(path)) throw MissingFileError("config file not found: " + path.string());
    std::ifstream f(path, std::ios::binary);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    return parse_config(command, doc, seed_override);
}

RunOutcome run_command(const RunConfig& config, const fs::path& out) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(out);
    Artifacts art(out);
    RunOutcome outcome;
    try {
        const Failure f = commands().at(config.command)(config, art);
        outcome.exit_code = f.code;
        outcome.message = f.message;
    } catch (const std::exception& e) {
        outcome.exit_code = code_for(e);
        outcome.message = e.what();
    }
    outcome.artifacts = art.names();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(out, config.command, config.resolved(), config.seed, outcome.artifacts, secs, outcome.exit_code,
                   outcome.message);
    return outcome;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Degenerate parabolic control toolkit"};
    std::string command, config_path, out_dir;
    std::optional<std::uint64_t> seed;
    app.add_option("command", command, "one of: spectrum, hardy, solve, carleman, spectral-ineq, observability, "
                                       "hum, lr, measurable, density-seq")
        ->required();
    app.add_option("--config", config_path, "flat JSON scenario")->required();
    app.add_option("--out", out_dir, "artifact directory")->required();
    app.add_option("--seed", seed, "overrides the config seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kUsageError;
    }

    const auto t0 = std::chrono::steady_clock::now();
    RunConfig rc;
    try {
        rc = parse_config_file(command, config_path, seed);
    } catch (const std::exception& e) {
        const int code = code_for(e);
        err << "error: " << e.what() << "\n";
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (!ec) {
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            write_manifest(out_dir, command, json::object(), seed.value_or(0), {}, secs, code, e.what());
        }
        return code;
    }
    const auto outcome = run_command(rc, out_dir);
    for (const auto& a : outcome.artifacts) out << (fs::path(out_dir) / a).string() << "\n";
    if (outcome.exit_code != kOk) err << "error: " << outcome.message << "\n";
    return outcome.exit_code;
}

}  // namespace degenctrl::cli
