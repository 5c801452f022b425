// Configuration-driven experiment runner.
//
//   heatreach run CONFIG [--threads N] [--output DIR] [--set key=value]...
//   heatreach <experiment> CONFIG [...]
//
// Exit status: 0 success, 2 invalid configuration or arguments, 3 numerical
// guard, 1 anything else. Partial outputs are removed on failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>

#include "heatreach/heatreach.hpp"

namespace fs = std::filesystem;
using namespace heatreach;

namespace {

const std::vector<std::string> kExperiments = {"egg-sample",         "bie-solve",      "forward-solve",
                                               "onedim-controls",    "wick-synthesize", "verify-convergence",
                                               "verify-contour",     "verify-optimality", "verify-monodromy"};

// Keys that may differ between otherwise identical runs; kept out of CSV
// metadata so outputs are comparable byte for byte.
bool run_local_key(const std::string& k) { return k == "threads" || k == "output.dir"; }

/// Collects outputs under one directory and records what was written.
class OutputSet {
public:
    OutputSet(fs::path dir, std::vector<std::pair<std::string, std::string>> metadata)
        : dir_(std::move(dir)), metadata_(std::move(metadata))
    {
    }

    const fs::path& dir() const { return dir_; }

    void prepare()
    {
        if (!fs::exists(dir_)) {
            fs::create_directories(dir_);
            created_dir_ = true;
        }
    }

    void csv(const std::string& name, CsvTable table)
    {
        auto meta = metadata_;
        meta.insert(meta.end(), table.metadata.begin(), table.metadata.end());
        table.metadata = std::move(meta);
        track(name);
        table.write(dir_ / name);
    }

    void columns(const std::string& name, const std::string& comment, const std::vector<std::pair<double, double>>& data)
    {
        track(name);
        write_columns(dir_ / name, comment, data);
    }

    void track(const std::string& name) { files_.push_back(name); }
    const std::vector<std::string>& files() const { return files_; }

    void discard() noexcept
    {
        std::error_code ec;
        for (const auto& f : files_) fs::remove(dir_ / f, ec);
        fs::remove(dir_ / "manifest.txt", ec);
        if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> metadata_;
    std::vector<std::string> files_;
    bool created_dir_ = false;
};

using Job = std::function<void(OutputSet&)>;

// ---------------------------------------------------------------- parsing helpers

DomainSpec read_domain(const Config& c)
{
    const auto kind = c.get_string("domain.kind", "interval");
    DomainSpec d;
    if (kind == "interval") {
        d = Interval{c.get_double("domain.a", -1.0), c.get_double("domain.b", 1.0)};
    } else if (kind == "ball") {
        const auto center = c.get_doubles("domain.center");
        d = Ball{center, c.get_double("domain.radius"), static_cast<int>(center.size())};
    } else if (kind == "polygon") {
        Polygon p;
        for (const auto& row : c.get_rows("domain.vertices")) {
            if (row.size() != 2) throw ConfigError("config: polygon vertices need two coordinates");
            p.vertices.push_back({row[0], row[1]});
        }
        d = p;
    } else {
        throw ConfigError("config: unknown domain.kind '" + kind + "'");
    }
    validate(d);
    return d;
}

/// "re, im : p1, p2 ; ..." with a real coefficient allowed as "c : p1"
std::vector<Monomial> parse_terms(const std::string& text)
{
    std::vector<Monomial> out;
    for (const auto& term : detail::split(text, ';')) {
        if (term.empty()) continue;
        const auto colon = term.find(':');
        if (colon == std::string::npos) throw ConfigError("config: polynomial term needs 'coefficient : exponents'");
        const auto coef = detail::split(term.substr(0, colon), ',');
        const auto pows = detail::split(term.substr(colon + 1), ',');
        Monomial m;
        if (coef.size() == 1) m.coefficient = detail::parse_double("target.terms", coef[0]);
        else if (coef.size() == 2)
            m.coefficient = {detail::parse_double("target.terms", coef[0]), detail::parse_double("target.terms", coef[1])};
        else throw ConfigError("config: polynomial coefficient must be 're' or 're, im'");
        for (const auto& p : pows) {
            const double v = detail::parse_double("target.terms", p);
            if (v < 0 || v != static_cast<int>(v)) throw ConfigError("config: exponents must be nonnegative integers");
            m.powers.push_back(static_cast<int>(v));
        }
        out.push_back(std::move(m));
    }
    if (out.empty()) throw ConfigError("config: polynomial target needs at least one term");
    return out;
}

HolomorphicTarget read_target(const Config& c)
{
    const auto kind = c.get_string("target.kind");
    if (kind == "polynomial")
        return make_polynomial_target(parse_terms(c.get_string("target.terms")), static_cast<int>(c.get_int("target.dim", 1)));
    if (kind == "lorentzian")
        return make_lorentzian_target(c.get_double("target.alpha"), static_cast<int>(c.get_int("target.dim", 1)));
    if (kind == "pole-quotient") return make_pole_quotient_target(c.get_complex("target.pole"));
    if (kind == "singular-e1") return make_singular_e1_target(c.get_double("target.x0"), c.get_complex("target.a"));
    throw ConfigError("config: unknown target.kind '" + kind + "'");
}

SampleCounts read_counts(const Config& c)
{
    SampleCounts s;
    s.real_points = c.get_size("sample.real_points", s.real_points);
    s.imag_points = c.get_size("sample.imag_points", s.imag_points);
    s.imag_directions = c.get_size("sample.imag_directions", s.imag_directions);
    return s;
}

double positive(const Config& c, const std::string& key)
{
    const double v = c.get_double(key);
    if (!(v > 0.0)) throw ConfigError("config: '" + key + "' must be positive");
    return v;
}

std::vector<CsvCell> coords(const RealVector& x)
{
    return {x.begin(), x.end()};
}

std::vector<std::string> coord_names(const std::string& prefix, std::size_t d)
{
    std::vector<std::string> out;
    for (std::size_t k = 1; k <= d; ++k) out.push_back(prefix + std::to_string(k));
    return out;
}

template <class... Ts>
std::vector<CsvCell> row(Ts&&... xs)
{
    return {CsvCell(std::forward<Ts>(xs))...};
}

CsvTable report_table() { return CsvTable{{}, {"metric", "value"}, {}}; }

void add_metric(CsvTable& t, const std::string& name, double v) { t.add_row({name, v}); }

// ---------------------------------------------------------------- experiments

Job egg_sample(const Config& c)
{
    const auto domain = read_domain(c);
    const double margin = c.get_double("sample.margin", 0.1);
    const auto counts = read_counts(c);
    const bool diagnostics = c.get_bool("diagnostics", false);
    const auto seed = static_cast<std::uint64_t>(c.get_size("diagnostics.seed", 1));
    const std::size_t inputs = c.get_size("diagnostics.random_inputs", 1000);
    return [=](OutputSet& out) {
        const auto pts = sample_compact_subset(domain, margin, counts);
        const std::size_t d = pts.empty() ? 0 : pts.front().dim();
        CsvTable t;
        t.header = coord_names("re", d);
        for (const auto& n : coord_names("im", d)) t.header.push_back(n);
        t.header.push_back("in_closed_egg");
        t.header.push_back("boundary_distance");
        std::size_t inside = 0;
        for (const auto& z : pts) {
            std::vector<CsvCell> r = coords(z.re);
            for (double v : z.im) r.push_back(v);
            const bool in = egg_contains(domain, z, EggMode::closed);
            inside += in;
            r.push_back(static_cast<long long>(in));
            r.push_back(distance_to_boundary(domain, z.re).distance);
            t.add_row(std::move(r));
        }
        out.csv("points.csv", std::move(t));
        auto rep = report_table();
        add_metric(rep, "points", static_cast<double>(pts.size()));
        add_metric(rep, "points_in_closed_egg", static_cast<double>(inside));
        if (diagnostics) {
            const auto k = kernel_diagnostics(pts, seed, inputs);
            add_metric(rep, "e1_at_one", k.e1_one);
            add_metric(rep, "e1_quadrature", k.e1_quadrature);
            add_metric(rep, "e1_reference_gap", std::abs(k.e1_one - 0.219383934));
            add_metric(rep, "mass_error_1d", k.mass_error_1d);
            add_metric(rep, "mass_error_2d", k.mass_error_2d);
            add_metric(rep, "semigroup_error", k.semigroup_error);
            add_metric(rep, "real_consistency_error", k.real_consistency_error);
            add_metric(rep, "cr_residual", k.cr_residual);
        }
        out.csv("report.csv", std::move(rep));
    };
}

struct Source {
    RealVector point;
    double t0;
    double operator()(double t, const RealVector& x) const
    {
        RealVector r(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) r[k] = x[k] - point[k];
        return heat_kernel(t + t0, r);
    }
};

Source read_source(const Config& c, const DomainSpec& domain)
{
    Source s{c.get_doubles("source.point"), c.get_double("source.t0", 0.1)};
    if (s.point.size() != static_cast<std::size_t>(dimension(domain)))
        throw ConfigError("config: source.point dimension differs from the domain");
    if (!(s.t0 > 0.0)) throw ConfigError("config: source.t0 must be positive");
    if (!distance_to_boundary(domain, s.point).exterior) throw ConfigError("config: source.point must lie outside the domain");
    return s;
}

Job bie_solve(const Config& c)
{
    const auto domain = read_domain(c);
    const double T = positive(c, "T");
    const std::size_t nt = c.get_size("grid.nt");
    const std::size_t res = c.get_size("grid.boundary_resolution", 64);
    const auto src = read_source(c, domain);
    const auto rows = c.get_rows("eval.points");
    std::vector<RealVector> points;
    for (const auto& r : rows) {
        if (r.size() != static_cast<std::size_t>(dimension(domain))) throw ConfigError("config: eval.points dimension");
        if (distance_to_boundary(domain, r).exterior) throw ConfigError("config: eval.points must lie inside the domain");
        points.push_back(r);
    }
    return [=](OutputSet& out) {
        const auto grid = make_space_time_grid(domain, T, nt, res);
        const auto g = sample_on_grid(grid, [&](double t, const BoundaryNode& n) { return Complex(src(t, n.point)); });
        const VolterraOperator V(grid);
        const auto q = V.solve(g);
        const std::size_t d = static_cast<std::size_t>(grid.dim());
        CsvTable dens;
        dens.header = {"slab", "t_mid", "node"};
        for (const auto& n : coord_names("y", d)) dens.header.push_back(n);
        dens.header.push_back("q_re");
        dens.header.push_back("q_im");
        for (std::size_t i = 0; i < grid.nt; ++i)
            for (std::size_t j = 0; j < grid.node_count(); ++j) {
                std::vector<CsvCell> r = row(static_cast<long long>(i), grid.midpoint(i), static_cast<long long>(j));
                for (double v : grid.nodes[j].point) r.push_back(v);
                r.push_back(q.at(i, j).real());
                r.push_back(q.at(i, j).imag());
                dens.add_row(std::move(r));
            }
        out.csv("density.csv", std::move(dens));
        CsvTable field;
        field.header = coord_names("x", d);
        for (const char* h : {"u_re", "u_im", "exact", "abs_error"}) field.header.push_back(h);
        double worst = 0.0;
        for (const auto& x : points) {
            const Complex u = single_layer_eval(q, T, ComplexPoint::real(x));
            const double want = src(T, x);
            worst = std::max(worst, std::abs(u - want));
            auto r = coords(x);
            for (double v : {u.real(), u.imag(), want, std::abs(u - want)}) r.push_back(v);
            field.add_row(std::move(r));
        }
        out.csv("field.csv", std::move(field));
        auto rep = report_table();
        add_metric(rep, "max_error", worst);
        add_metric(rep, "step_condition", V.step_condition());
        add_metric(rep, "regularization", V.regularization());
        out.csv("report.csv", std::move(rep));
    };
}

Job forward_solve(const Config& c)
{
    const auto domain = read_domain(c);
    const double T = positive(c, "T");
    const std::size_t nt = c.get_size("grid.nt");
    const std::size_t nx = c.get_size("grid.nx");
    const std::size_t ntheta = c.get_size("grid.ntheta", 64);
    const std::size_t stride = c.get_size("output.stride", 0);
    const auto src = read_source(c, domain);
    return [=](OutputSet& out) {
        const auto field = crank_nicolson_solve(
            domain, [&](const RealVector& x) { return Complex(src(0.0, x)); },
            [&](double t, const RealVector& x) { return Complex(src(t, x)); }, T, nt, nx, ntheta, stride);
        const std::size_t d = field.spatial_grid.empty() ? 1 : field.spatial_grid.front().size();
        CsvTable t;
        t.header = {"t"};
        for (const auto& n : coord_names("x", d)) t.header.push_back(n);
        for (const char* h : {"interior", "u_re", "u_im", "exact", "abs_error"}) t.header.push_back(h);
        double worst = 0.0;
        for (std::size_t k = 0; k < field.times.size(); ++k)
            for (std::size_t j = 0; j < field.size(); ++j) {
                const Complex u = field.at(k, j);
                const double want = src(field.times[k], field.spatial_grid[j]);
                if (field.interior[j] && k + 1 == field.times.size()) worst = std::max(worst, std::abs(u - want));
                std::vector<CsvCell> r = row(field.times[k]);
                for (double v : field.spatial_grid[j]) r.push_back(v);
                r.push_back(static_cast<long long>(field.interior[j]));
                for (double v : {u.real(), u.imag(), want, std::abs(u - want)}) r.push_back(v);
                t.add_row(std::move(r));
            }
        out.csv("field.csv", std::move(t));
        auto rep = report_table();
        add_metric(rep, "sup_error_at_T", worst);
        out.csv("report.csv", std::move(rep));
    };
}

/// h(t) = a t sin(b t) + c t^2 exp(-d t)
std::function<double(double)> read_signal(const Config& c, const std::string& key, std::vector<double> fallback)
{
    const auto p = c.has(key) ? c.get_doubles(key) : fallback;
    if (p.size() != 4) throw ConfigError("config: '" + key + "' needs four coefficients a, b, c, d");
    return [p](double t) { return p[0] * t * std::sin(p[1] * t) + p[2] * t * t * std::exp(-p[3] * t); };
}

Job onedim_controls(const Config& c)
{
    const double L = positive(c, "L");
    const double T = positive(c, "T");
    const std::size_t nt = c.get_size("grid.nt");
    const auto h1 = read_signal(c, "signals.h1", {1.0, 3.0, 0.0, 0.0});
    const auto h2 = read_signal(c, "signals.h2", {0.0, 0.0, 1.0, 1.0});
    const std::size_t vnx = c.get_size("verify.nx", 400);
    const std::size_t vnt = c.get_size("verify.nt", 0);
    EndpointSignals s{L, T, nt, {}, {}};
    if (nt < 8) throw ConfigError("config: grid.nt must be >= 8");
    for (std::size_t n = 0; n < nt; ++n) {
        s.h1.push_back(h1(s.time(n)));
        s.h2.push_back(h2(s.time(n)));
    }
    validate(s);
    return [=](OutputSet& out) {
        const auto q = solve_endpoint_densities(s);
        const auto fwd = endpoint_forward(q);
        CsvTable dens{{}, {"t_start", "t_end", "q1", "q2"}, {}};
        for (std::size_t m = 0; m < q.slabs(); ++m)
            dens.add_row(row(q.dt() * static_cast<double>(m), q.dt() * static_cast<double>(m + 1), q.q1[m], q.q2[m]));
        out.csv("densities.csv", std::move(dens));
        CsvTable sig{{}, {"t", "h1", "h2", "h1_reconstructed", "h2_reconstructed"}, {}};
        for (std::size_t n = 0; n < nt; ++n) sig.add_row(row(s.time(n), s.h1[n], s.h2[n], fwd.h1[n], fwd.h2[n]));
        out.csv("signals.csv", std::move(sig));
        auto rep = report_table();
        add_metric(rep, "roundtrip_rel_l2", q.roundtrip_error);
        add_metric(rep, "skipped_frequencies", static_cast<double>(q.skipped_frequencies));
        if (vnt > 0) {
            // h1 is the value at -L, h2 at +L
            const auto field = crank_nicolson_solve(
                Interval{-L, L}, [](const RealVector&) { return Complex(0.0); },
                [&](double t, const RealVector& x) { return Complex(x[0] < 0.0 ? h1(t) : h2(t)); }, T, vnt, vnx);
            const double err =
                sup_error(field, [&](const RealVector& x) { return rep1_eval(q, T, ComplexPoint::real(x)); }, T);
            add_metric(rep, "rep1_vs_cn_sup_error", err);
        }
        out.csv("report.csv", std::move(rep));
    };
}

Job wick_synthesize_job(const Config& c)
{
    const auto target = read_target(c);
    const auto domain = read_domain(c);
    const double T = positive(c, "T");
    const double R = detail::require_centered_ball(domain).R;
    const auto cutoff = make_cutoff(c.get_double("cutoff.R", R), c.get_double("cutoff.Rp"));
    SynthesisGrids g;
    g.nx = c.get_size("grid.nx", g.nx);
    g.ntheta = c.get_size("grid.ntheta", g.ntheta);
    g.nt_sched = c.get_size("grid.nt_sched", g.nt_sched);
    const std::size_t vnt = c.get_size("verify.nt", 2000);
    const bool baseline = c.get_bool("verify.baseline", false);
    return [=](OutputSet& out) {
        const auto s = wick_synthesize(target, domain, T, cutoff, g);
        const std::size_t d = s.initial_points.front().size();
        CsvTable init;
        init.header = coord_names("x", d);
        init.header.push_back("g_re");
        init.header.push_back("g_im");
        for (std::size_t i = 0; i < s.g.size(); ++i) {
            auto r = coords(s.initial_points[i]);
            r.push_back(s.g[i].real());
            r.push_back(s.g[i].imag());
            init.add_row(std::move(r));
        }
        out.csv("initial.csv", std::move(init));
        CsvTable bd;
        bd.header = {"t", "node"};
        for (const auto& n : coord_names("y", d)) bd.header.push_back(n);
        bd.header.push_back("h_re");
        bd.header.push_back("h_im");
        for (std::size_t k = 0; k < s.times.size(); ++k)
            for (std::size_t j = 0; j < s.boundary_nodes.size(); ++j) {
                std::vector<CsvCell> r = row(s.times[k], static_cast<long long>(j));
                for (double v : s.boundary_nodes[j]) r.push_back(v);
                r.push_back(s.h_at(k, j).real());
                r.push_back(s.h_at(k, j).imag());
                bd.add_row(std::move(r));
            }
        out.csv("boundary.csv", std::move(bd));
        auto rep = report_table();
        rep.metadata.push_back({"target", s.target_description});
        add_metric(rep, "amplification", s.amplification);
        add_metric(rep, "terminal_mismatch", s.terminal_mismatch);
        add_metric(rep, "initial_tail_bound", s.initial_tail_bound);
        if (vnt > 0) {
            const auto r = roundtrip_verify(s, target, vnt);
            add_metric(rep, "sup_error", r.sup_error);
            add_metric(rep, "l2_error", r.l2_error);
            if (baseline) add_metric(rep, "exact_data_sup_error", discretisation_baseline(s, target, vnt).sup_error);
            CsvTable prof;
            prof.header = coord_names("x", d);
            for (const char* h : {"u_re", "u_im", "target_re", "target_im"}) prof.header.push_back(h);
            for (std::size_t i = 0; i < r.points.size(); ++i) {
                auto pr = coords(r.points[i]);
                for (double v : {r.computed[i].real(), r.computed[i].imag(), r.expected[i].real(), r.expected[i].imag()})
                    pr.push_back(v);
                prof.add_row(std::move(pr));
            }
            out.csv("profile.csv", std::move(prof));
        }
        out.csv("report.csv", std::move(rep));
    };
}

Job verify_convergence(const Config& c)
{
    const auto target = read_target(c);
    const auto domain = read_domain(c);
    const auto frame = detail::ball_frame(domain);
    const auto cutoff = make_cutoff(c.get_double("cutoff.R", frame.radius), c.get_double("cutoff.Rp"));
    const double margin = c.get_double("margin");
    const auto ts = c.get_doubles("ts");
    const auto counts = read_counts(c);
    const double final_tol = c.get_double("tolerance.final", 1e-2);
    return [=](OutputSet& out) {
        const auto rep = convergence_sweep(target, domain, cutoff, margin, ts, counts);
        CsvTable t{{{"target", target.describe()}, {"samples", std::to_string(rep.sample_size)}}, {"t", "sup_error"}, {}};
        std::vector<std::pair<double, double>> cols;
        for (const auto& e : rep.entries) {
            t.add_row(row(e.t, e.sup_error));
            cols.push_back({e.t, e.sup_error});
        }
        out.csv("convergence.csv", std::move(t));
        out.columns("convergence.dat", "t sup_error", cols);
        auto r = report_table();
        add_metric(r, "strictly_decreasing", rep.strictly_decreasing() ? 1.0 : 0.0);
        add_metric(r, "final_error", rep.entries.back().sup_error);
        add_metric(r, "final_below_tolerance", rep.entries.back().sup_error < final_tol ? 1.0 : 0.0);
        out.csv("report.csv", std::move(r));
    };
}

Job verify_contour(const Config& c)
{
    const auto target = read_target(c);
    const TubeCutoff tube{c.get_double("tube.L", 1.0), c.get_double("tube.Lp", 1.4), c.get_double("tube.beta", 0.01)};
    const auto pts = c.get_rows("points");
    const auto ts = c.get_doubles("ts");
    for (const auto& p : pts)
        if (p.size() != 2) throw ConfigError("config: points are 're, im' pairs");
    for (double t : ts)
        if (!(t > 0.0)) throw ConfigError("config: ts must be positive");
    return [=](OutputSet& out) {
        CsvTable t{{}, {"z_re", "z_im", "t", "direct_re", "direct_im", "I1_re", "I1_im", "I2_re", "I2_im", "residual"}, {}};
        double worst = 0.0, min_decay = INFINITY;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& p = pts[i];
            double prev = NAN;
            for (double tt : ts) {
                const auto r = contour_shift_check(ComplexPoint::scalar({p[0], p[1]}), tt, target, tube);
                t.add_row(row(p[0], p[1], tt, r.direct.real(), r.direct.imag(), r.I1.real(), r.I1.imag(), r.I2.real(),
                              r.I2.imag(), r.residual()));
                worst = std::max(worst, r.residual());
                if (i == 0 && !std::isnan(prev) && p[1] != 0.0) min_decay = std::min(min_decay, prev / std::abs(r.I2));
                prev = std::abs(r.I2);
            }
        }
        out.csv("contour.csv", std::move(t));
        const auto gap = tube_gap_check(tube);
        auto r = report_table();
        add_metric(r, "max_residual", worst);
        add_metric(r, "first_point_min_I2_decay", min_decay);
        add_metric(r, "tube_gap_epsilon1", gap.epsilon1);
        add_metric(r, "tube_gap_worst_margin", gap.worst_margin);
        out.csv("report.csv", std::move(r));
    };
}

Job verify_optimality(const Config& c)
{
    const auto domain = read_domain(c);
    const auto* iv = std::get_if<Interval>(&domain);
    if (!iv) throw ConfigError("config: verify-optimality needs domain.kind = interval");
    const Interval interval = *iv;
    const Complex p = c.get_complex("p");
    const std::size_t panels = c.get_size("quad.panels", 8);
    const std::size_t n = c.get_size("grid.n", 10);
    return [=](OutputSet& out) {
        const auto r = optimality_cross_check(interval, ComplexPoint::scalar(p), panels, n);
        CsvTable t{{{"x0", format_double(r.x0)}, {"a", format_double(r.a.real()) + "," + format_double(r.a.imag())}},
                   {"z_re", "z_im", "integral_re", "integral_im", "closed_re", "closed_im", "abs_error"},
                   {}};
        for (std::size_t i = 0; i < r.points.size(); ++i)
            t.add_row(row(r.points[i].real(), r.points[i].imag(), r.integral[i].real(), r.integral[i].imag(),
                          r.closed_form[i].real(), r.closed_form[i].imag(), std::abs(r.integral[i] - r.closed_form[i])));
        out.csv("optimality.csv", std::move(t));
        auto rep = report_table();
        add_metric(rep, "points", static_cast<double>(r.points.size()));
        add_metric(rep, "max_error", r.max_error);
        add_metric(rep, "max_explicit_form_gap", r.max_form_gap);
        add_metric(rep, "source_distance", r.source_distance);
        out.csv("report.csv", std::move(rep));
    };
}

Job verify_monodromy(const Config& c)
{
    const double x0 = c.get_double("x0");
    const Complex a = c.get_complex("a");
    const int d = static_cast<int>(c.get_int("d", 1));
    const auto radii = c.get_doubles("loop.radii");
    const int steps = static_cast<int>(c.get_int("loop.steps", 128));
    const int orientation = static_cast<int>(c.get_int("loop.orientation", 1));
    const bool has_offset = c.has("loop.offset");
    const Complex offset = c.get_complex("loop.offset", {0.0, 0.0});
    return [=](OutputSet& out) {
        CsvTable t{{},
                   {"center_re", "center_im", "radius", "steps", "winding", "jump_re", "jump_im", "abs_jump", "expected_re",
                    "expected_im"},
                   {}};
        auto emit = [&](const MonodromyReport& r) {
            t.add_row(row(r.center.real(), r.center.imag(), r.loop_radius, static_cast<long long>(r.steps),
                          static_cast<long long>(r.winding), r.jump.real(), r.jump.imag(), std::abs(r.jump),
                          r.expected_jump.real(), r.expected_jump.imag()));
        };
        std::vector<MonodromyReport> reps;
        for (double rad : radii) reps.push_back(monodromy_detect(x0, a, d, rad, steps, std::nullopt, orientation));
        for (const auto& r : reps) emit(r);
        if (has_offset)
            emit(monodromy_detect(x0, a, d, radii.front(), steps, reps.front().singular_point + offset, orientation));
        out.csv("monodromy.csv", std::move(t));
        auto rep = report_table();
        double spread = 0.0;
        for (const auto& r : reps) spread = std::max(spread, std::abs(r.jump - reps.front().jump));
        add_metric(rep, "abs_jump", std::abs(reps.front().jump));
        add_metric(rep, "radius_spread", spread);
        out.csv("report.csv", std::move(rep));
    };
}

Job plan(const std::string& kind, const Config& c)
{
    if (kind == "egg-sample") return egg_sample(c);
    if (kind == "bie-solve") return bie_solve(c);
    if (kind == "forward-solve") return forward_solve(c);
    if (kind == "onedim-controls") return onedim_controls(c);
    if (kind == "wick-synthesize") return wick_synthesize_job(c);
    if (kind == "verify-convergence") return verify_convergence(c);
    if (kind == "verify-contour") return verify_contour(c);
    if (kind == "verify-optimality") return verify_optimality(c);
    if (kind == "verify-monodromy") return verify_monodromy(c);
    throw ConfigError("unknown experiment '" + kind + "'");
}

std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Invocation {
    std::string subcommand;
    std::string config_path;
    std::string output;
    long threads = -1;
    std::vector<std::string> overrides;
};

int execute(const Invocation& inv)
{
    Config cfg;
    Job job;
    fs::path dir;
    std::string kind;
    try {
        cfg = Config::load(inv.config_path);
        for (const auto& kv : inv.overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
        }
        if (inv.threads >= 0) cfg.set("threads", std::to_string(inv.threads));
        kind = cfg.get_string("experiment");
        if (inv.subcommand != "run" && inv.subcommand != kind)
            throw ConfigError("config experiment '" + kind + "' does not match subcommand '" + inv.subcommand + "'");
        const long threads = cfg.get_int("threads", 0);
        if (threads < 0) throw ConfigError("config: threads must be >= 0");
        thread_limit().store(static_cast<std::size_t>(threads));
        if (!inv.output.empty()) dir = inv.output;
        else if (cfg.has("output.dir")) dir = cfg.get_string("output.dir");
        else {
            const char* root = std::getenv("HEATREACH_OUTPUT_ROOT");
            dir = fs::path(root && *root ? root : "heatreach-output") / fs::path(inv.config_path).stem();
        }
        job = plan(kind, cfg);
        if (const auto unused = cfg.unused_keys(); !unused.empty()) {
            std::string list;
            for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
            throw ConfigError("config: unknown keys: " + list);
        }
    } catch (const GuardError& e) {
        std::cerr << "guard: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 2;
    }

    std::vector<std::pair<std::string, std::string>> meta = {{"experiment", kind}, {"version", HEATREACH_VERSION}};
    for (const auto& [k, v] : cfg.entries())
        if (!run_local_key(k) && k != "experiment") meta.push_back({"config." + k, v});
    OutputSet out(dir, meta);
    const auto started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    int status = 0;
    try {
        out.prepare();
        job(out);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ofstream m(dir / "manifest.txt", std::ios::binary);
        m << "experiment = " << kind << "\nversion = " << HEATREACH_VERSION << "\nstarted = " << started
          << "\nwall_time_s = " << format_double(wall) << "\nthreads_effective = " << effective_threads()
          << "\nconfig_file = " << fs::absolute(inv.config_path).string() << '\n';
        for (const auto& [k, v] : cfg.entries()) m << "config." << k << " = " << v << '\n';
        for (const auto& f : out.files()) m << "output = " << f << '\n';
        if (!m) throw std::runtime_error("cannot write manifest");
        std::cout << kind << ": wrote " << out.files().size() << " files to " << dir.string() << '\n';
        return 0;
    } catch (const GuardError& e) {
        std::cerr << "guard: " << e.what() << '\n';
        status = 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        status = 2;
    } catch (const std::domain_error& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        status = 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        status = 1;
    }
    out.discard();
    return status;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"heatreach: heat-equation reachability experiments"};
    app.set_version_flag("--version", std::string(HEATREACH_VERSION));
    app.require_subcommand(1);
    Invocation inv;
    std::vector<std::string> names = {"run"};
    names.insert(names.end(), kExperiments.begin(), kExperiments.end());
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name, name == "run" ? "run the experiment named in the config" : "run " + name);
        sub->add_option("config", inv.config_path, "key = value configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--output", inv.output, "output directory (overrides output.dir)");
        sub->add_option("-j,--threads", inv.threads, "cap on worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
        sub->add_option("-s,--set", inv.overrides, "override a config entry, key=value");
        sub->callback([&inv, name] { inv.subcommand = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return execute(inv);
}
