#include <cmath>
#include <sstream>
#include <vector>

#include "lfld/dataset.hpp"
#include "lfld/rng.hpp"

// Reference solvers and dataset presets. Both PDE integrators use explicit
// finite differences in double precision and are deterministic: the same
// parameters and grid always reproduce the same bytes. Stability limits are
// enforced up front with the computed bound in the error message, so a bad
// grid fails loudly instead of producing garbage fields.

namespace lfld {

namespace {

struct SaveGrid {
    std::int64_t total_steps = 0;
    std::int64_t n_saved = 0;
    double dx = 0.0;
};

SaveGrid check_grid(const Grid1d& g, const char* who, std::int64_t min_nodes,
                    bool periodic) {
    if (g.n_nodes < min_nodes)
        throw ConfigError(std::string(who) + ": n_nodes must be >= " +
                          std::to_string(min_nodes));
    if (!(g.length > 0.0)) throw ConfigError(std::string(who) + ": length must be positive");
    if (!(g.dt > 0.0)) throw ConfigError(std::string(who) + ": dt must be positive");
    if (!(g.t_end > 0.0)) throw ConfigError(std::string(who) + ": t_end must be positive");
    if (g.save_stride < 1)
        throw ConfigError(std::string(who) + ": save_stride must be >= 1");
    SaveGrid s;
    // Periodic grids tile [0, L) with n cells; bounded grids place nodes on
    // both endpoints of [0, L].
    s.dx = periodic ? g.length / double(g.n_nodes) : g.length / double(g.n_nodes - 1);
    s.total_steps = std::int64_t(std::llround(g.t_end / g.dt));
    if (s.total_steps < g.save_stride)
        throw ConfigError(std::string(who) +
                          ": t_end shorter than one save interval (save_stride * dt)");
    s.n_saved = s.total_steps / g.save_stride;
    return s;
}

void check_finite_fields(const SampleRecord& rec, const char* who) {
    for (float v : rec.fields)
        if (!std::isfinite(v))
            throw ContractError(std::string(who) + ": solver produced non-finite values");
}

}  // namespace

std::vector<double> latin_hypercube(std::int64_t n_samples,
                                    const std::vector<std::array<double, 2>>& ranges,
                                    std::uint64_t seed) {
    if (n_samples < 1) throw ContractError("latin_hypercube: n_samples must be >= 1");
    const std::int64_t n_dims = std::int64_t(ranges.size());
    if (n_dims < 1) throw ContractError("latin_hypercube: at least one range is required");
    for (std::int64_t j = 0; j < n_dims; ++j) {
        const auto& r = ranges[std::size_t(j)];
        if (!(r[0] < r[1])) {
            std::ostringstream msg;
            msg << "latin_hypercube: range " << j << " is [" << r[0] << ", " << r[1]
                << "]; lower bound must be strictly below upper bound";
            throw ConfigError(msg.str());
        }
    }

    SplitMix64 rng(seed);
    std::vector<double> out(std::size_t(n_samples * n_dims));
    std::vector<double> column(static_cast<std::size_t>(n_samples));
    for (std::int64_t j = 0; j < n_dims; ++j) {
        // One uniform point inside each of the n equal strata of [0, 1) ...
        for (std::int64_t i = 0; i < n_samples; ++i)
            column[std::size_t(i)] = (double(i) + rng.next_double()) / double(n_samples);
        // ... assigned to samples in random order, independently per dimension.
        rng.shuffle(column);
        const double lo = ranges[std::size_t(j)][0];
        const double hi = ranges[std::size_t(j)][1];
        for (std::int64_t i = 0; i < n_samples; ++i)
            out[std::size_t(i * n_dims + j)] = lo + (hi - lo) * column[std::size_t(i)];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Excitable cable (two-variable reduced ionic model, Neumann ends)
// ---------------------------------------------------------------------------
//
//   du/dt = D u_xx - k u (u - a)(u - 1) - u w + I_stim(x, t)
//   dw/dt = (eps0 + mu1 w / (u + mu2)) (-w - k u (u - a - 1))
//
// with a = 0.1, mu1 = 0.2, mu2 = 0.3. u rests at exactly 0 and depolarizes
// toward ~1; with zero stimulus every update is identically zero, so the
// field stays at rest bit-exactly.

namespace {
constexpr double kExcThreshold = 0.1;   // a
constexpr double kRecoveryMu1 = 0.2;    // mu1
constexpr double kRecoveryMu2 = 0.3;    // mu2
constexpr double kStimDuration = 1.5;   // both stimuli hold this long
constexpr double kStimFraction = 0.1;   // fraction of the cable each stimulus covers
}  // namespace

SampleRecord solve_monodomain_1d(const MonodomainParams& p, const Grid1d& g) {
    const SaveGrid sg = check_grid(g, "monodomain", 4, /*periodic=*/false);
    if (!(p.D > 0.0)) throw ConfigError("monodomain: D must be positive");
    if (!(p.k >= 0.0) || !(p.eps0 >= 0.0) || !std::isfinite(p.t_stim) ||
        !std::isfinite(p.stim_amplitude))
        throw ConfigError("monodomain: k and eps0 must be non-negative and finite");

    const double diffusion_bound = 0.4 * sg.dx * sg.dx / p.D;
    if (g.dt > diffusion_bound) {
        std::ostringstream msg;
        msg << "monodomain: dt " << g.dt << " exceeds the diffusion stability bound "
            << diffusion_bound << " (0.4 * dx^2 / D with dx = " << sg.dx << ", D = " << p.D
            << ")";
        throw ConfigError(msg.str());
    }

    const std::int64_t n = g.n_nodes;
    const std::int64_t stim_nodes =
        std::max<std::int64_t>(1, std::int64_t(std::ceil(kStimFraction * double(n))));
    const double r = p.D * g.dt / (sg.dx * sg.dx);

    std::vector<double> u(std::size_t(n), 0.0), w(std::size_t(n), 0.0);
    std::vector<double> u_next(static_cast<std::size_t>(n)), w_next(static_cast<std::size_t>(n));

    SampleRecord rec;
    rec.inputs.resize(std::size_t(sg.n_saved * 5));
    rec.fields.resize(std::size_t(sg.n_saved * n));

    const auto stim_left_active = [&](double t) {
        return t >= 0.0 && t < kStimDuration;
    };
    const auto stim_right_active = [&](double t) {
        return t >= p.t_stim && t < p.t_stim + kStimDuration;
    };

    for (std::int64_t step = 1; step <= sg.total_steps; ++step) {
        const double t_prev = double(step - 1) * g.dt;
        const double left_amp = stim_left_active(t_prev) ? p.stim_amplitude : 0.0;
        const double right_amp = stim_right_active(t_prev) ? p.stim_amplitude : 0.0;

        for (std::int64_t i = 0; i < n; ++i) {
            const std::size_t ii = std::size_t(i);
            // Mirror ghosts give zero-flux ends.
            const double u_lo = i > 0 ? u[ii - 1] : u[1];
            const double u_hi = i < n - 1 ? u[ii + 1] : u[std::size_t(n - 2)];
            const double lap = u_lo - 2.0 * u[ii] + u_hi;
            double stim = 0.0;
            if (i < stim_nodes) stim = left_amp;
            if (i >= n - stim_nodes) stim += right_amp;
            const double reaction =
                -p.k * u[ii] * (u[ii] - kExcThreshold) * (u[ii] - 1.0) - u[ii] * w[ii];
            // Conductance-like drive toward the excited state: it can never
            // push u past 1, which keeps the field inside its physical range.
            u_next[ii] = u[ii] + r * lap + g.dt * (reaction + stim * (1.0 - u[ii]));
            const double eps = p.eps0 + kRecoveryMu1 * w[ii] / (u[ii] + kRecoveryMu2);
            w_next[ii] =
                w[ii] + g.dt * eps * (-w[ii] - p.k * u[ii] * (u[ii] - kExcThreshold - 1.0));
        }
        u.swap(u_next);
        w.swap(w_next);

        if (step % g.save_stride == 0) {
            const std::int64_t s = step / g.save_stride - 1;
            const double t = double(step) * g.dt;
            float* in_row = rec.inputs.data() + std::size_t(s * 5);
            in_row[0] = stim_left_active(t) ? float(p.stim_amplitude) : 0.0f;
            in_row[1] = stim_right_active(t) ? float(p.stim_amplitude) : 0.0f;
            in_row[2] = float(p.D);
            in_row[3] = float(p.k);
            in_row[4] = float(p.eps0);
            float* u_row = rec.fields.data() + std::size_t(s * n);
            for (std::int64_t i = 0; i < n; ++i) u_row[std::size_t(i)] = float(u[std::size_t(i)]);
        }
    }
    check_finite_fields(rec, "monodomain");
    return rec;
}

// ---------------------------------------------------------------------------
// Periodic advection-diffusion with a pulsatile Gaussian source
// ---------------------------------------------------------------------------
//
//   du/dt + a u_x = nu u_xx + A(t) exp(-(x - c)^2 / (2 width^2))
//
// upwind transport, central diffusion, forward Euler. The source amplitude
// A(t) = src_amp * (1 - cos(2 pi t / period)) / 2 is the dataset's genuinely
// time-varying input channel; src_amp = 0 switches the source off entirely.

namespace {

SampleRecord run_advdiff(const AdvDiffParams& p, const Grid1d& g,
                         std::vector<double>* mass_trace) {
    const SaveGrid sg = check_grid(g, "advdiff", 4, /*periodic=*/true);
    if (!(p.nu >= 0.0)) throw ConfigError("advdiff: nu must be non-negative");
    if (!(p.src_width > 0.0) || !(p.ic_width > 0.0))
        throw ConfigError("advdiff: src_width and ic_width must be positive");
    if (!(p.src_period > 0.0)) throw ConfigError("advdiff: src_period must be positive");
    if (!std::isfinite(p.a) || !std::isfinite(p.src_amp) || !std::isfinite(p.ic_amp))
        throw ConfigError("advdiff: a, src_amp, and ic_amp must be finite");

    const double cfl = std::abs(p.a) * g.dt / sg.dx;
    if (cfl > 0.9) {
        std::ostringstream msg;
        msg << "advdiff: advective CFL number " << cfl << " exceeds the stability bound 0.9"
            << " (|a| * dt / dx with dx = " << sg.dx << ", a = " << p.a << ", dt = " << g.dt
            << ")";
        throw ConfigError(msg.str());
    }
    const double dnum = p.nu * g.dt / (sg.dx * sg.dx);
    if (dnum > 0.4) {
        std::ostringstream msg;
        msg << "advdiff: diffusion number " << dnum << " exceeds the stability bound 0.4"
            << " (nu * dt / dx^2 with dx = " << sg.dx << ", nu = " << p.nu << ", dt = " << g.dt
            << ")";
        throw ConfigError(msg.str());
    }

    const std::int64_t n = g.n_nodes;
    std::vector<double> u(static_cast<std::size_t>(n)), u_next(static_cast<std::size_t>(n));
    std::vector<double> source_shape(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const double x = double(i) * sg.dx;
        const double dic = x - p.ic_center;
        u[std::size_t(i)] = p.ic_amp * std::exp(-dic * dic / (2.0 * p.ic_width * p.ic_width));
        const double dsrc = x - p.src_center;
        source_shape[std::size_t(i)] =
            std::exp(-dsrc * dsrc / (2.0 * p.src_width * p.src_width));
    }

    const auto amplitude_at = [&](double t) {
        return p.src_amp * 0.5 * (1.0 - std::cos(2.0 * 3.141592653589793 * t / p.src_period));
    };

    SampleRecord rec;
    rec.inputs.resize(std::size_t(sg.n_saved * 4));
    rec.fields.resize(std::size_t(sg.n_saved * n));

    const double c_adv = p.a * g.dt / sg.dx;
    const double c_diff = dnum;
    for (std::int64_t step = 1; step <= sg.total_steps; ++step) {
        const double amp = amplitude_at(double(step - 1) * g.dt);
        for (std::int64_t i = 0; i < n; ++i) {
            const std::size_t ii = std::size_t(i);
            const std::size_t up = std::size_t((i - 1 + n) % n);
            const std::size_t dn = std::size_t((i + 1) % n);
            // First-order upwind: difference against the node the flow comes from.
            const double adv = p.a >= 0.0 ? u[ii] - u[up] : u[dn] - u[ii];
            const double lap = u[up] - 2.0 * u[ii] + u[dn];
            u_next[ii] = u[ii] - c_adv * adv + c_diff * lap + g.dt * amp * source_shape[ii];
        }
        u.swap(u_next);

        if (step % g.save_stride == 0) {
            const std::int64_t s = step / g.save_stride - 1;
            const double t = double(step) * g.dt;
            float* in_row = rec.inputs.data() + std::size_t(s * 4);
            in_row[0] = float(amplitude_at(t));
            in_row[1] = float(p.a);
            in_row[2] = float(p.nu);
            in_row[3] = float(p.src_width);
            float* u_row = rec.fields.data() + std::size_t(s * n);
            for (std::int64_t i = 0; i < n; ++i) u_row[std::size_t(i)] = float(u[std::size_t(i)]);
            if (mass_trace) {
                double m = 0.0;
                for (std::int64_t i = 0; i < n; ++i) m += u[std::size_t(i)];
                mass_trace->push_back(m * sg.dx);
            }
        }
    }
    check_finite_fields(rec, "advdiff");
    return rec;
}

}  // namespace

SampleRecord solve_advdiff_1d(const AdvDiffParams& p, const Grid1d& g) {
    return run_advdiff(p, g, nullptr);
}

std::vector<double> advdiff_mass_trace(const AdvDiffParams& p, const Grid1d& g) {
    std::vector<double> mass;
    run_advdiff(p, g, &mass);
    return mass;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

Grid1d monodomain_grid() {
    Grid1d g;
    g.n_nodes = 64;
    g.length = 1.0;
    g.dt = 0.005;
    g.t_end = 30.0;
    g.save_stride = 100;  // saved step 0.5, 60 saved steps
    return g;
}

Grid1d advdiff_grid() {
    Grid1d g;
    g.n_nodes = 128;
    g.length = 1.0;
    g.dt = 0.00125;
    g.t_end = 2.0;
    g.save_stride = 20;  // saved step 0.025, 80 saved steps
    return g;
}

namespace {

void fill_common_geometry(TrajectoryDataset& ds, const Grid1d& g, const SaveGrid& sg) {
    ds.n_dim = 1;
    ds.coords.resize(std::size_t(g.n_nodes));
    for (std::int64_t i = 0; i < g.n_nodes; ++i)
        ds.coords[std::size_t(i)] = float(double(i) * sg.dx);
    ds.times.resize(std::size_t(sg.n_saved));
    for (std::int64_t s = 0; s < sg.n_saved; ++s)
        ds.times[std::size_t(s)] = float(double((s + 1) * g.save_stride) * g.dt);
    ds.mask.assign(std::size_t(g.n_nodes), 0);
}

}  // namespace

TrajectoryDataset make_monodomain_dataset(std::int64_t n_samples, std::uint64_t seed,
                                          const Grid1d& g) {
    if (n_samples < 1) throw ConfigError("monodomain dataset: n_samples must be >= 1");
    const SaveGrid sg = check_grid(g, "monodomain", 4, /*periodic=*/false);

    TrajectoryDataset ds;
    ds.generator = "monodomain1d";
    ds.seed = seed;
    ds.n_inputs = 5;
    ds.n_out = 1;
    ds.input_names = {"stim_left", "stim_right", "D", "k", "eps0"};
    ds.param_names = {"D", "t_stim", "k", "eps0"};
    ds.param_ranges = {{5e-4, 2e-3}, {0.0, 10.0}, {7.0, 9.0}, {0.008, 0.02}};
    fill_common_geometry(ds, g, sg);

    const std::vector<double> points = latin_hypercube(
        n_samples, ds.param_ranges, SplitMix64(seed).derive(1).next_u64());
    for (std::int64_t k = 0; k < n_samples; ++k) {
        MonodomainParams p;
        p.D = points[std::size_t(4 * k + 0)];
        p.t_stim = points[std::size_t(4 * k + 1)];
        p.k = points[std::size_t(4 * k + 2)];
        p.eps0 = points[std::size_t(4 * k + 3)];
        ds.param_values.push_back({p.D, p.t_stim, p.k, p.eps0});
        ds.samples.push_back(solve_monodomain_1d(p, g));
    }
    ds.validate();
    return ds;
}

TrajectoryDataset make_advdiff_dataset(std::int64_t n_samples, std::uint64_t seed,
                                       const Grid1d& g) {
    if (n_samples < 1) throw ConfigError("advdiff dataset: n_samples must be >= 1");
    const SaveGrid sg = check_grid(g, "advdiff", 4, /*periodic=*/true);

    TrajectoryDataset ds;
    ds.generator = "advdiff1d";
    ds.seed = seed;
    ds.n_inputs = 4;
    ds.n_out = 1;
    ds.input_names = {"src", "a", "nu", "src_width"};
    ds.param_names = {"a", "nu", "amp_factor", "width_factor"};
    ds.param_ranges = {{0.2, 0.6}, {1e-3, 4e-3}, {0.8, 1.2}, {0.8, 1.2}};
    fill_common_geometry(ds, g, sg);

    const std::vector<double> points = latin_hypercube(
        n_samples, ds.param_ranges, SplitMix64(seed).derive(1).next_u64());
    for (std::int64_t k = 0; k < n_samples; ++k) {
        AdvDiffParams p;
        p.a = points[std::size_t(4 * k + 0)];
        p.nu = points[std::size_t(4 * k + 1)];
        const double amp_factor = points[std::size_t(4 * k + 2)];
        const double width_factor = points[std::size_t(4 * k + 3)];
        p.src_amp = 1.0 * amp_factor;
        p.src_width = 0.06 * width_factor;
        ds.param_values.push_back({p.a, p.nu, amp_factor, width_factor});
        ds.samples.push_back(solve_advdiff_1d(p, g));
    }
    ds.validate();
    return ds;
}

}  // namespace lfld
