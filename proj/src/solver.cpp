#include "nlstorus/solver.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <random>

#include "nlstorus/parallel.hpp"

namespace nlst {

namespace {

// FFTW planning is not thread safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

inline std::complex<double> to_std(const fftw_complex& c) { return {c[0], c[1]}; }

}  // namespace

struct FourierEngine::Impl {
    int N;
    int K;
    TorusSpec torus;
    fftw_complex* spec = nullptr;
    fftw_complex* phys = nullptr;
    fftw_plan plan_synthesis = nullptr;  // spec -> phys, e^{+ik.x}, unnormalized
    fftw_plan plan_analysis = nullptr;   // phys -> spec, e^{-ik.x}

    std::vector<double> lambda;  // per box mode, row-major m outer
    double cached_dt = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::complex<double>> e_half, e_full;
    std::vector<std::complex<double>> u, stage, k1, k2, k3, k4;

    Impl(int grid_n, int k_alias, const TorusSpec& t) : N(grid_n), K(k_alias), torus(t) {
        spec = fftw_alloc_complex(static_cast<std::size_t>(N) * N);
        phys = fftw_alloc_complex(static_cast<std::size_t>(N) * N);
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            plan_synthesis = fftw_plan_dft_2d(N, N, spec, phys, FFTW_BACKWARD, FFTW_ESTIMATE);
            plan_analysis = fftw_plan_dft_2d(N, N, phys, spec, FFTW_FORWARD, FFTW_ESTIMATE);
        }
        const int W = 2 * K + 1;
        lambda.resize(static_cast<std::size_t>(W) * W);
        for (int m = -K; m <= K; ++m)
            for (int l = -K; l <= K; ++l)
                lambda[static_cast<std::size_t>((m + K) * W + (l + K))] =
                    dispersion({m, l}, torus);
        std::size_t n = lambda.size();
        u.resize(n);
        stage.resize(n);
        k1.resize(n);
        k2.resize(n);
        k3.resize(n);
        k4.resize(n);
    }

    ~Impl() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan_synthesis);
        fftw_destroy_plan(plan_analysis);
        fftw_free(spec);
        fftw_free(phys);
    }

    std::size_t grid_index(std::int64_t m, std::int64_t l) const {
        std::int64_t mm = ((m % N) + N) % N;
        std::int64_t ll = ((l % N) + N) % N;
        return static_cast<std::size_t>(mm * N + ll);
    }

    void embed(const std::vector<std::complex<double>>& box) {
        std::memset(spec, 0, sizeof(fftw_complex) * static_cast<std::size_t>(N) * N);
        const int W = 2 * K + 1;
        for (int m = -K; m <= K; ++m)
            for (int l = -K; l <= K; ++l) {
                const auto v = box[static_cast<std::size_t>((m + K) * W + (l + K))];
                auto g = grid_index(m, l);
                spec[g][0] = v.real();
                spec[g][1] = v.imag();
            }
    }

    void extract(std::vector<std::complex<double>>& box) const {
        const double inv = 1.0 / (static_cast<double>(N) * N);
        const int W = 2 * K + 1;
        for (int m = -K; m <= K; ++m)
            for (int l = -K; l <= K; ++l)
                box[static_cast<std::size_t>((m + K) * W + (l + K))] =
                    to_std(spec[grid_index(m, l)]) * inv;
    }

    void nonlinear(const std::vector<std::complex<double>>& in,
                   std::vector<std::complex<double>>& out) {
        embed(in);
        fftw_execute(plan_synthesis);
        const std::size_t n = static_cast<std::size_t>(N) * N;
        for (std::size_t j = 0; j < n; ++j) {
            const double re = phys[j][0], im = phys[j][1];
            const double a2 = re * re + im * im;
            phys[j][0] = a2 * re;
            phys[j][1] = a2 * im;
        }
        fftw_execute(plan_analysis);
        extract(out);
    }

    void refresh_phases(double dt) {
        if (dt == cached_dt) return;
        cached_dt = dt;
        const std::size_t n = lambda.size();
        e_half.resize(n);
        e_full.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            e_half[i] = std::polar(1.0, lambda[i] * dt / 2.0);
            e_full[i] = std::polar(1.0, lambda[i] * dt);
        }
    }

    double quartic_grid_mean(const std::vector<std::complex<double>>& box) {
        embed(box);
        fftw_execute(plan_synthesis);
        const std::size_t n = static_cast<std::size_t>(N) * N;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double a2 = phys[j][0] * phys[j][0] + phys[j][1] * phys[j][1];
            acc += a2 * a2;
        }
        return acc / static_cast<double>(n);
    }
};

FourierEngine::FourierEngine(int grid_n, int k_alias, const TorusSpec& torus)
    : impl_(std::make_unique<Impl>(grid_n, k_alias, torus)) {
    if (grid_n < 4 * k_alias)
        throw std::invalid_argument("grid too small for dealiased cubic products");
}

FourierEngine::~FourierEngine() = default;

void FourierEngine::nonlinear_term(const std::vector<std::complex<double>>& coeffs,
                                   std::vector<std::complex<double>>& out) {
    out.resize(coeffs.size());
    impl_->nonlinear(coeffs, out);
}

// One step of the gauged classical RK4: with u = e^{-i lambda t} psi_hat the
// linear flow is exact and only du/dt = i e^{-i lambda t} (|psi|^2 psi)^ is
// integrated explicitly.
void FourierEngine::step_if_rk4(SpectralField& field, double dt) {
    if (!(dt != 0.0)) throw std::invalid_argument("dt must be nonzero");
    auto& im = *impl_;
    im.refresh_phases(dt);
    const std::size_t n = im.lambda.size();
    im.u = field.coeffs();

    const std::complex<double> iu(0.0, 1.0);
    auto eval = [&](const std::vector<std::complex<double>>& phase, double coef,
                    const std::vector<std::complex<double>>& slope,
                    std::vector<std::complex<double>>& out) {
        if (!nonlinearity_enabled_) {
            std::fill(out.begin(), out.end(), std::complex<double>(0.0, 0.0));
            return;
        }
        for (std::size_t i = 0; i < n; ++i) im.stage[i] = phase[i] * (im.u[i] + coef * slope[i]);
        im.nonlinear(im.stage, out);
        for (std::size_t i = 0; i < n; ++i) out[i] *= iu * std::conj(phase[i]);
    };

    if (nonlinearity_enabled_) {
        im.nonlinear(im.u, im.k1);
        for (std::size_t i = 0; i < n; ++i) im.k1[i] *= iu;
    } else {
        std::fill(im.k1.begin(), im.k1.end(), std::complex<double>(0.0, 0.0));
    }
    eval(im.e_half, dt / 2.0, im.k1, im.k2);
    eval(im.e_half, dt / 2.0, im.k2, im.k3);
    eval(im.e_full, dt, im.k3, im.k4);

    auto& out = field.coeffs();
    for (std::size_t i = 0; i < n; ++i)
        out[i] = im.e_full[i] *
                 (im.u[i] + dt / 6.0 * (im.k1[i] + 2.0 * im.k2[i] + 2.0 * im.k3[i] + im.k4[i]));
    field.set_time(field.time() + dt);
}

HamiltonianParts FourierEngine::hamiltonian(const SpectralField& field) {
    auto& im = *impl_;
    const auto& c = field.coeffs();
    double h0 = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) h0 += im.lambda[i] * std::norm(c[i]);
    double p = 0.25 * im.quartic_grid_mean(c);
    return {0.5 * h0, p};
}

SpectralField make_initial_condition(double R, SobolevIndex s, std::uint64_t seed,
                                     const TorusSpec& torus, int grid_n, int k_alias) {
    if (!(R > 0.0)) throw std::invalid_argument("R must be positive");
    if (k_alias < 2) throw std::invalid_argument("mode box too small for the initial stencil");
    SpectralField field(grid_n, k_alias, torus);

    double weight_sum = 0.0;
    for (std::int64_t m = -2; m <= 2; ++m)
        for (std::int64_t l = -2; l <= 2; ++l) {
            if (m == 0 && l == 0) continue;
            weight_sum += sobolev_weight({m, l}, s);
        }
    const double C = R / std::sqrt(weight_sum);

    std::mt19937_64 rng(seed);
    for (std::int64_t m = -2; m <= 2; ++m)
        for (std::int64_t l = -2; l <= 2; ++l) {
            if (m == 0 && l == 0) continue;
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            field.at({m, l}) = std::polar(C, 2.0 * 3.14159265358979323846 * u);
        }
    return field;
}

DiagnosticSeries run_single(const SimulationConfig& config, SpectralField& field,
                            int realization_id, const Observer& observer) {
    if (!(config.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (config.t_end > 0.0 &&
        !(config.dt <= config.sample_interval && config.sample_interval <= config.t_end))
        throw std::invalid_argument("require dt <= sample_interval <= T");

    FourierEngine engine(config.grid_n, config.k_alias, config.torus);

    DiagnosticSeries series;
    series.realization_id = realization_id;
    series.config_hash = config.config_hash;
    series.sobolev_s = {config.s.s};
    series.tail_radii = config.tail_radii;

    auto record = [&] {
        DiagnosticRecord rec;
        rec.t = field.time();
        rec.mass = mass(field);
        rec.hamiltonian = engine.hamiltonian(field).total();
        rec.sobolev = {sobolev_norm(field, config.s)};
        for (double M : config.tail_radii) rec.tails.push_back(tail_norm(field, M, config.s));
        if (!std::isfinite(rec.mass) || !std::isfinite(rec.hamiltonian))
            throw BlowupError(field.time(), realization_id);
        series.records.push_back(std::move(rec));
        if (observer) observer(realization_id, field);
    };

    const auto n_steps = static_cast<std::int64_t>(std::llround(config.t_end / config.dt));
    const auto done = static_cast<std::int64_t>(std::llround(field.time() / config.dt));
    const auto sample_every =
        std::max<std::int64_t>(1, std::llround(config.sample_interval / config.dt));
    record();
    for (std::int64_t step = done + 1; step <= n_steps; ++step) {
        engine.step_if_rk4(field, config.dt);
        if (step % sample_every == 0 || step == n_steps) record();
    }
    return series;
}

std::vector<DiagnosticSeries> run_simulation(const SimulationConfig& config,
                                             const Observer& observer) {
    if (config.n_realizations < 1) throw std::invalid_argument("need at least one realization");

    std::vector<DiagnosticSeries> out(static_cast<std::size_t>(config.n_realizations));
    std::vector<std::exception_ptr> errors(out.size());

    parallel_for(out.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            try {
                SpectralField field =
                    make_initial_condition(config.R, config.s, config.seed + r, config.torus,
                                           config.grid_n, config.k_alias);
                out[r] = run_single(config, field, static_cast<int>(r), observer);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace nlst
