#include "nlstorus/truncated.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nlstorus/parallel.hpp"

namespace nlst {

QuartetTable QuartetTable::build(std::int64_t support_box, const QuasiResonanceParams& params,
                                 const TorusSpec& torus, bool exact_only,
                                 std::uint64_t work_budget) {
    if (support_box < 1) throw std::invalid_argument("support box must be >= 1");
    QuartetTable table(support_box, params, torus);
    const int W = table.width();

    auto flat = [&](ModeIndex k) {
        return static_cast<std::int32_t>((k.m + support_box) * W + (k.l + support_box));
    };

    const auto quartets = enumerate_quasi_resonant_quartets(support_box, params, torus,
                                                            work_budget);
    // Expand each deduplicated quartet into its ordered-triple slot assignments.
    struct Raw {
        std::int32_t out, i1, i2, i3;
    };
    std::vector<Raw> raw;
    raw.reserve(quartets.size() * 4);
    for (const Quartet& q : quartets) {
        raw.push_back({flat(q.k4), flat(q.k1), flat(q.k2), flat(q.k3)});
        raw.push_back({flat(q.k4), flat(q.k2), flat(q.k1), flat(q.k3)});
        raw.push_back({flat(q.k3), flat(q.k1), flat(q.k2), flat(q.k4)});
        raw.push_back({flat(q.k3), flat(q.k2), flat(q.k1), flat(q.k4)});
    }
    auto key = [](const Raw& r) {
        return std::array<std::int32_t, 4>{r.out, r.i1, r.i2, r.i3};
    };
    std::sort(raw.begin(), raw.end(), [&](const Raw& a, const Raw& b) { return key(a) < key(b); });
    raw.erase(std::unique(raw.begin(), raw.end(),
                          [&](const Raw& a, const Raw& b) { return key(a) == key(b); }),
              raw.end());

    table.lambda_.resize(table.n_modes());
    for (std::size_t i = 0; i < table.n_modes(); ++i)
        table.lambda_[i] = dispersion(table.mode_of(i), torus);

    table.offsets_.assign(table.n_modes() + 1, 0);
    table.entries_.reserve(raw.size());
    for (const Raw& r : raw) {
        ModeIndex k1 = table.mode_of(static_cast<std::size_t>(r.i1));
        ModeIndex k2 = table.mode_of(static_cast<std::size_t>(r.i2));
        ModeIndex k3 = table.mode_of(static_cast<std::size_t>(r.i3));
        ModeIndex k = table.mode_of(static_cast<std::size_t>(r.out));
        Quartet q(k1, k2, k3, k);
        const bool exact = is_exact_resonant(q, torus);
        if (exact_only && !exact) continue;
        DefectPair d = defect(q);
        const double theta = static_cast<double>(d.p) +
                             torus.omega_sq() * static_cast<double>(d.q);
        table.entries_.push_back({r.i1, r.i2, r.i3, theta});
        table.offsets_[static_cast<std::size_t>(r.out) + 1]++;
        if (!exact)
            table.nonexact_extent_ = std::max({table.nonexact_extent_, k1.norm_inf(),
                                               k2.norm_inf(), k3.norm_inf(), k.norm_inf()});
    }
    for (std::size_t i = 0; i < table.n_modes(); ++i) table.offsets_[i + 1] += table.offsets_[i];
    return table;
}

std::vector<std::complex<double>> rhs(const TruncatedState& state, const QuartetTable& table) {
    if (state.support_box != table.support_box())
        throw std::invalid_argument("state and table support boxes differ");
    const auto& z = state.z;
    const auto& entries = table.entries();
    const auto& offsets = table.offsets();
    const auto& lambda = table.mode_lambda();
    const std::complex<double> is(0.0, static_cast<double>(state.sign));
    const std::complex<double> iu(0.0, 1.0);

    std::vector<std::complex<double>> out(z.size());
    parallel_for(z.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            std::complex<double> acc(0.0, 0.0);
            for (std::uint32_t e = offsets[k]; e < offsets[k + 1]; ++e) {
                const auto& en = entries[e];
                acc += z[static_cast<std::size_t>(en.i1)] * z[static_cast<std::size_t>(en.i2)] *
                       std::conj(z[static_cast<std::size_t>(en.i3)]);
            }
            out[k] = iu * lambda[k] * z[k] + is * acc;
        }
    });
    return out;
}

TruncatedStepper::TruncatedStepper(const QuartetTable& table, double dt)
    : table_(table), dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    const auto& entries = table.entries();
    phase_half_.resize(entries.size());
    phase_full_.resize(entries.size());
    for (std::size_t e = 0; e < entries.size(); ++e) {
        phase_half_[e] = std::polar(1.0, entries[e].theta * dt / 2.0);
        phase_full_[e] = std::polar(1.0, entries[e].theta * dt);
    }
    mode_phase_.resize(table.n_modes());
    for (std::size_t i = 0; i < table.n_modes(); ++i)
        mode_phase_[i] = std::polar(1.0, table.mode_lambda()[i] * dt);
    const std::size_t n = table.n_modes();
    w_.resize(n);
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    stage_.resize(n);
}

void TruncatedStepper::step(TruncatedState& state) const {
    if (state.support_box != table_.support_box())
        throw std::invalid_argument("state and table support boxes differ");
    const auto& entries = table_.entries();
    const auto& offsets = table_.offsets();
    const std::size_t n = table_.n_modes();
    const std::complex<double> is(0.0, static_cast<double>(state.sign));

    // Gauge anchored at the step start: w(0) = z(t_n) and
    // dw_k/dDelta = sign * i * sum e^{i theta Delta} w1 w2 conj(w3).
    w_ = state.z;

    auto stage_rhs = [&](const std::vector<std::complex<double>>* entry_phase,
                         const std::vector<std::complex<double>>& win,
                         std::vector<std::complex<double>>& out) {
        parallel_for(n, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t k = lo; k < hi; ++k) {
                std::complex<double> acc(0.0, 0.0);
                for (std::uint32_t e = offsets[k]; e < offsets[k + 1]; ++e) {
                    const auto& en = entries[e];
                    std::complex<double> term = win[static_cast<std::size_t>(en.i1)] *
                                                win[static_cast<std::size_t>(en.i2)] *
                                                std::conj(win[static_cast<std::size_t>(en.i3)]);
                    acc += entry_phase ? (*entry_phase)[e] * term : term;
                }
                out[k] = is * acc;
            }
        });
    };

    stage_rhs(nullptr, w_, k1_);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = w_[i] + dt_ / 2.0 * k1_[i];
    stage_rhs(&phase_half_, stage_, k2_);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = w_[i] + dt_ / 2.0 * k2_[i];
    stage_rhs(&phase_half_, stage_, k3_);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = w_[i] + dt_ * k3_[i];
    stage_rhs(&phase_full_, stage_, k4_);

    for (std::size_t i = 0; i < n; ++i) {
        state.z[i] = mode_phase_[i] *
                     (w_[i] + dt_ / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]));
        if (!std::isfinite(state.z[i].real()) || !std::isfinite(state.z[i].imag()))
            throw std::runtime_error("non-finite truncated amplitude at t=" +
                                     std::to_string(state.time));
    }
    state.time += dt_;
}

void step_truncated(TruncatedState& state, const QuartetTable& table, double dt) {
    TruncatedStepper stepper(table, dt);
    stepper.step(state);
}

double n_m_norm(const TruncatedState& state, std::int64_t M, SobolevIndex s) {
    if (M < 0) throw std::invalid_argument("M must be >= 0");
    const std::int64_t B = state.support_box;
    double acc = 0.0;
    for (std::int64_t m = -B; m <= B; ++m)
        for (std::int64_t l = -B; l <= B; ++l) {
            ModeIndex k{m, l};
            const double e = std::norm(state.at(k));
            if (e == 0.0) continue;
            const double w = split_weight(k, s);
            if (std::abs(m) > M) acc += w * e;
            if (std::abs(l) > M) acc += w * e;
        }
    return acc;
}

NmDriftReport verify_nm_conservation(std::int64_t support_box, const QuasiResonanceParams& params,
                                     const TorusSpec& torus, std::int64_t M,
                                     std::int64_t support_radius, double t_end, double dt,
                                     std::uint64_t seed, double tolerance, int sign) {
    QuartetTable table = QuartetTable::build(support_box, params, torus);
    NmDriftReport report;
    report.extent = table.nonexact_extent();
    report.tolerance = tolerance;
    if (support_radius > support_box)
        throw std::invalid_argument("initial support exceeds the table box");
    if (M < std::max(support_radius, report.extent))
        throw std::invalid_argument(
            "M below max(initial support radius, non-exact quartet extent): conservation is "
            "not guaranteed here");

    TruncatedState state(support_box, sign);
    std::mt19937_64 rng(seed);
    for (std::int64_t m = -support_radius; m <= support_radius; ++m)
        for (std::int64_t l = -support_radius; l <= support_radius; ++l) {
            const double u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            state.at({m, l}) = std::polar(std::sqrt(u1), 2.0 * 3.14159265358979323846 * u2);
        }
    double m0 = 0.0;
    for (const auto& c : state.z) m0 += std::norm(c);
    const double scale = 1.0 / std::sqrt(m0);
    for (auto& c : state.z) c *= scale;

    const SobolevIndex s{1.0};
    report.mass0 = 1.0;
    report.nm0 = n_m_norm(state, M, s);

    TruncatedStepper stepper(table, dt);
    const auto n_steps = static_cast<std::int64_t>(std::llround(t_end / dt));
    for (std::int64_t i = 0; i < n_steps; ++i) {
        stepper.step(state);
        const double nm = n_m_norm(state, M, s);
        report.max_drift = std::max(report.max_drift,
                                    std::abs(nm - report.nm0) / std::max(report.nm0, report.mass0));
    }
    report.passed = report.max_drift < tolerance;
    return report;
}

}  // namespace nlst
