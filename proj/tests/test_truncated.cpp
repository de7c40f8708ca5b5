#include <doctest.h>

#include <complex>
#include <random>
#include <set>

#include "nlstorus/truncated.hpp"

using namespace nlst;
using cd = std::complex<double>;

namespace {
const TorusSpec kIrr = TorusSpec::irrational(kOmegaSqSqrt2);
const TorusSpec kRat = TorusSpec::rational(1.0);

TruncatedState random_state(std::int64_t box, std::int64_t radius, std::uint64_t seed,
                            int sign = +1) {
    TruncatedState state(box, sign);
    std::mt19937_64 rng(seed);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (std::int64_t m = -radius; m <= radius; ++m)
        for (std::int64_t l = -radius; l <= radius; ++l)
            state.at({m, l}) = std::polar(std::sqrt(u()), 2.0 * 3.14159265358979323846 * u());
    double mass = 0.0;
    for (const auto& c : state.z) mass += std::norm(c);
    for (auto& c : state.z) c /= std::sqrt(mass);
    return state;
}

double l2_mass(const TruncatedState& s) {
    double acc = 0.0;
    for (const auto& c : s.z) acc += std::norm(c);
    return acc;
}
}  // namespace

TEST_CASE("tiny-Lambda table holds only axis-parallel entries") {
    QuartetTable table = QuartetTable::build(1, {0.001, 2.0}, kIrr);
    CHECK(table.size() > 0);
    CHECK(table.nonexact_extent() == 0);
    for (std::size_t k = 0; k < table.n_modes(); ++k)
        for (std::uint32_t e = table.offsets()[k]; e < table.offsets()[k + 1]; ++e) {
            const auto& en = table.entries()[e];
            Quartet q(table.mode_of(static_cast<std::size_t>(en.i1)),
                      table.mode_of(static_cast<std::size_t>(en.i2)),
                      table.mode_of(static_cast<std::size_t>(en.i3)), table.mode_of(k));
            CHECK(is_axis_parallel_rectangle(q));
            CHECK(std::abs(en.theta) <
                  0.001);  // the defining bound caps every stored oscillation
        }
}

TEST_CASE("square-torus table strictly contains the irrational table") {
    QuasiResonanceParams params{30.0, 0.1};
    QuartetTable irr = QuartetTable::build(2, params, kIrr);
    QuartetTable rat = QuartetTable::build(2, params, kRat);
    CHECK(rat.size() > irr.size());

    std::set<std::array<std::int32_t, 4>> rat_set;
    for (std::size_t k = 0; k < rat.n_modes(); ++k)
        for (std::uint32_t e = rat.offsets()[k]; e < rat.offsets()[k + 1]; ++e)
            rat_set.insert({static_cast<std::int32_t>(k), rat.entries()[e].i1,
                            rat.entries()[e].i2, rat.entries()[e].i3});
    for (std::size_t k = 0; k < irr.n_modes(); ++k)
        for (std::uint32_t e = irr.offsets()[k]; e < irr.offsets()[k + 1]; ++e)
            CHECK(rat_set.count({static_cast<std::int32_t>(k), irr.entries()[e].i1,
                                 irr.entries()[e].i2, irr.entries()[e].i3}) == 1);
}

TEST_CASE("exact-only tables drop every non-exact entry") {
    QuasiResonanceParams params{30.0, 0.1};
    QuartetTable full = QuartetTable::build(4, params, kIrr);
    QuartetTable exact = QuartetTable::build(4, params, kIrr, /*exact_only=*/true);
    CHECK(exact.size() < full.size());
    CHECK(exact.nonexact_extent() == 0);
    for (std::size_t k = 0; k < exact.n_modes(); ++k)
        for (std::uint32_t e = exact.offsets()[k]; e < exact.offsets()[k + 1]; ++e) {
            const auto& en = exact.entries()[e];
            CHECK(is_exact_resonant(Quartet(exact.mode_of(static_cast<std::size_t>(en.i1)),
                                            exact.mode_of(static_cast<std::size_t>(en.i2)),
                                            exact.mode_of(static_cast<std::size_t>(en.i3)),
                                            exact.mode_of(k)),
                                    kIrr));
        }
}

TEST_CASE("rhs: single mode and zero state") {
    QuartetTable table = QuartetTable::build(2, {30.0, 0.1}, kIrr);

    TruncatedState state(2);
    const cd A(0.3, -0.6);
    state.at({1, 0}) = A;
    auto out = rhs(state, table);
    const double lam = dispersion({1, 0}, kIrr);
    const cd want = cd(0.0, 1.0) * (lam * A + std::norm(A) * A);
    CHECK(std::abs(out[state.index_of({1, 0})] - want) < 1e-15);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (i != state.index_of({1, 0})) CHECK(std::abs(out[i]) == 0.0);

    TruncatedState zero(2);
    for (const auto& v : rhs(zero, table)) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("rhs matches the quadruple-loop convolution with the bound filter") {
    for (const TorusSpec& torus : {kIrr, kRat}) {
        QuasiResonanceParams params{30.0, 0.1};
        QuartetTable table = QuartetTable::build(3, params, torus);
        TruncatedState state = random_state(3, 3, 99);
        state.sign = -1;
        auto got = rhs(state, table);

        double max_err = 0.0, scale = 0.0;
        for (std::int64_t m = -3; m <= 3; ++m)
            for (std::int64_t l = -3; l <= 3; ++l) {
                ModeIndex k{m, l};
                cd acc(0.0, 0.0);
                for (std::int64_t m1 = -3; m1 <= 3; ++m1)
                    for (std::int64_t l1 = -3; l1 <= 3; ++l1)
                        for (std::int64_t m2 = -3; m2 <= 3; ++m2)
                            for (std::int64_t l2 = -3; l2 <= 3; ++l2) {
                                ModeIndex k1{m1, l1}, k2{m2, l2};
                                ModeIndex k3 = k1 + k2 - k;
                                if (k3.norm_inf() > 3) continue;
                                if (!is_quasi_resonant(Quartet(k1, k2, k3, k), params, torus))
                                    continue;
                                acc += state.at(k1) * state.at(k2) * std::conj(state.at(k3));
                            }
                cd want = cd(0.0, 1.0) * dispersion(k, torus) * state.at(k) +
                          cd(0.0, -1.0) * acc;
                max_err = std::max(max_err, std::abs(got[state.index_of(k)] - want));
                scale = std::max(scale, std::abs(want));
            }
        CHECK(max_err / scale < 1e-12);
    }
}

TEST_CASE("single truncated mode: constant modulus, phase rate lambda + |z|^2") {
    QuartetTable table = QuartetTable::build(2, {30.0, 0.1}, kIrr);
    TruncatedState state(2);
    const double A = 0.5;
    state.at({1, 0}) = A;
    const double dt = kFundamentalPeriod / 1000.0;
    TruncatedStepper stepper(table, dt);
    for (int i = 0; i < 1000; ++i) stepper.step(state);
    const double lam = dispersion({1, 0}, kIrr);
    const cd exact = std::polar(A, (lam + A * A) * state.time);
    CHECK(std::abs(std::abs(state.at({1, 0})) - A) < 1e-13);
    CHECK(std::abs(state.at({1, 0}) - exact) < 1e-11);
}

TEST_CASE("truncated flow conserves the l2 mass in both signs") {
    QuasiResonanceParams params{30.0, 0.1};
    QuartetTable table = QuartetTable::build(4, params, kIrr);
    const double dt = kFundamentalPeriod / 500.0;
    for (int sign : {+1, -1}) {
        TruncatedState state = random_state(4, 4, 17, sign);
        const double m0 = l2_mass(state);
        TruncatedStepper stepper(table, dt);
        double max_drift = 0.0;
        for (int i = 0; i < 500; ++i) {
            stepper.step(state);
            max_drift = std::max(max_drift, std::abs(l2_mass(state) - m0) / m0);
        }
        CHECK(max_drift < 1e-10);
    }
}

TEST_CASE("gauged stepping agrees with direct integration of the ungauged rhs") {
    // Ungauged RK4 on dz/dt = rhs(z) must match the gauged stepper to O(dt^4).
    QuasiResonanceParams params{30.0, 0.1};
    QuartetTable table = QuartetTable::build(3, params, kIrr);
    auto diff_at = [&](double dt) {
        TruncatedState a = random_state(3, 3, 5);
        TruncatedState b = a;
        TruncatedStepper stepper(table, dt);
        const int n = 64;
        for (int i = 0; i < n; ++i) stepper.step(a);
        for (int i = 0; i < n; ++i) {
            auto r1 = rhs(b, table);
            TruncatedState tmp = b;
            auto add = [&](const std::vector<cd>& k, double c) {
                for (std::size_t j = 0; j < tmp.z.size(); ++j) tmp.z[j] = b.z[j] + c * k[j];
            };
            add(r1, dt / 2.0);
            auto r2 = rhs(tmp, table);
            add(r2, dt / 2.0);
            auto r3 = rhs(tmp, table);
            add(r3, dt);
            auto r4 = rhs(tmp, table);
            for (std::size_t j = 0; j < b.z.size(); ++j)
                b.z[j] += dt / 6.0 * (r1[j] + 2.0 * r2[j] + 2.0 * r3[j] + r4[j]);
            b.time += dt;
        }
        double err = 0.0;
        for (std::size_t j = 0; j < a.z.size(); ++j)
            err = std::max(err, std::abs(a.z[j] - b.z[j]));
        return err;
    };
    // The ungauged path integrates the stiff linear term explicitly, so dt must
    // resolve lambda_max; both are then 4th-order paths to the same flow.
    const double e1 = diff_at(0.002);
    const double e2 = diff_at(0.001);
    CHECK(e1 < 1e-7);
    CHECK(e1 / e2 > 8.0);
}

TEST_CASE("split-weight cut-off norm") {
    TruncatedState state(5);
    CHECK(n_m_norm(state, 2, SobolevIndex(1.0)) == 0.0);

    state.at({3, 0}) = 1.0;
    CHECK(n_m_norm(state, 2, SobolevIndex(1.0)) == 11.0);

    TruncatedState one(5);
    one.at({1, 1}) = 1.0;
    CHECK(n_m_norm(one, 2, SobolevIndex(1.0)) == 0.0);
    CHECK(n_m_norm(one, 2, SobolevIndex(3.0)) == 0.0);

    // a mode beyond M in both components contributes to both sums
    TruncatedState both(5);
    both.at({3, 4}) = 1.0;
    CHECK(n_m_norm(both, 2, SobolevIndex(1.0)) == 2.0 * (10.0 + 17.0));
}

TEST_CASE("no split-weight mass crosses M when M covers the non-exact extent") {
    QuasiResonanceParams params{0.001, 2.0};
    NmDriftReport report = verify_nm_conservation(5, params, kIrr, /*M=*/2,
                                                  /*support_radius=*/2, kFundamentalPeriod,
                                                  kFundamentalPeriod / 500.0, 21);
    CHECK(report.extent == 0);
    CHECK(report.nm0 == 0.0);
    CHECK(report.passed);
    CHECK(report.max_drift < 1e-10);
}

TEST_CASE("verify_nm_conservation rejects M below the initial support") {
    QuasiResonanceParams params{0.001, 2.0};
    CHECK_THROWS_AS(verify_nm_conservation(5, params, kIrr, /*M=*/1, /*support_radius=*/3,
                                           1.0, 0.01, 7),
                    std::invalid_argument);
}

TEST_CASE("exact-resonance-only flow decouples into conserved line masses") {
    QuartetTable table = QuartetTable::build(4, {30.0, 0.1}, kIrr, /*exact_only=*/true);
    TruncatedState state = random_state(4, 4, 33);
    const std::int64_t B = 4;

    auto line_masses = [&](const TruncatedState& s) {
        std::vector<double> rows, cols;
        for (std::int64_t m = -B; m <= B; ++m) {
            double acc = 0.0;
            for (std::int64_t l = -B; l <= B; ++l) acc += std::norm(s.at({m, l}));
            rows.push_back(acc);
        }
        for (std::int64_t l = -B; l <= B; ++l) {
            double acc = 0.0;
            for (std::int64_t m = -B; m <= B; ++m) acc += std::norm(s.at({m, l}));
            cols.push_back(acc);
        }
        rows.insert(rows.end(), cols.begin(), cols.end());
        return rows;
    };

    const auto initial = line_masses(state);
    TruncatedStepper stepper(table, kFundamentalPeriod / 500.0);
    double max_drift = 0.0;
    for (int i = 0; i < 500; ++i) {
        stepper.step(state);
        const auto now = line_masses(state);
        for (std::size_t j = 0; j < now.size(); ++j)
            max_drift = std::max(max_drift, std::abs(now[j] - initial[j]));
    }
    CHECK(max_drift < 1e-10);
}
