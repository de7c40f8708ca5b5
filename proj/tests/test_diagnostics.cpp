#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "nlstorus/diagnostics.hpp"
#include "nlstorus/solver.hpp"

using namespace nlst;
using cd = std::complex<double>;

namespace {
const TorusSpec kIrr = TorusSpec::irrational(kOmegaSqSqrt2);

SpectralField random_small_field(std::uint64_t seed, const TorusSpec& torus) {
    SpectralField f(64, 16, torus);
    std::mt19937_64 rng(seed);
    auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5; };
    for (ModeIndex k : {ModeIndex{1, 0}, {0, 2}, {-1, 1}, {2, -3}, {-4, -4}})
        f.at(k) = cd(u(), u());
    return f;
}
}  // namespace

TEST_CASE("sobolev norm") {
    SpectralField zero(32, 8, kIrr);
    CHECK(sobolev_norm(zero, SobolevIndex(2.0)) == 0.0);

    SpectralField one(32, 8, kIrr);
    one.at({1, 0}) = 1.0;
    CHECK(sobolev_norm(one, SobolevIndex(2.0)) == doctest::Approx(2.0).epsilon(1e-15));

    SpectralField init = make_initial_condition(1.8263, SobolevIndex(2.0), 9, kIrr, 64, 16);
    CHECK(sobolev_norm(init, SobolevIndex(2.0)) == doctest::Approx(1.8263).epsilon(1e-12));
}

TEST_CASE("tail norm") {
    SpectralField f = make_initial_condition(1.0, SobolevIndex(2.0), 1, kIrr, 64, 16);
    // support is |k|_inf <= 2 so |k| <= 2*sqrt(2) < 3
    CHECK(tail_norm(f, 3.0, SobolevIndex(2.0)) == 0.0);

    SpectralField g(32, 8, kIrr);
    g.at({3, 4}) = 1.0;
    CHECK(tail_norm(g, 4.9, SobolevIndex(0.0)) == 1.0);
    CHECK(tail_norm(g, 5.0, SobolevIndex(0.0)) == 0.0);  // strict |k| > M

    // M = 0 excludes exactly the zero mode
    SpectralField h(32, 8, kIrr);
    h.at({0, 0}) = cd(0.5, 0.5);
    h.at({2, 1}) = cd(0.0, 1.0);
    const double total = sobolev_norm(h, SobolevIndex(1.0));
    const double t0 = tail_norm(h, 0.0, SobolevIndex(1.0));
    CHECK(t0 * t0 + std::norm(h.at({0, 0})) == doctest::Approx(total * total).epsilon(1e-12));

    // monotone non-increasing in M
    SpectralField r = random_small_field(4, kIrr);
    double prev = tail_norm(r, 0.0, SobolevIndex(2.0));
    for (double M = 0.5; M <= 8.0; M += 0.5) {
        double t = tail_norm(r, M, SobolevIndex(2.0));
        CHECK(t <= prev);
        prev = t;
    }
}

TEST_CASE("threshold radius") {
    SpectralField f = make_initial_condition(1.0, SobolevIndex(2.0), 2, kIrr, 64, 16);
    ThresholdM th = threshold_M(f, 0.01, SobolevIndex(2.0));
    CHECK_FALSE(th.eps_exceeds_total);
    CHECK(th.M <= 2.0 * std::sqrt(2.0));

    // epsilon equal to the total norm is answered by M = 0
    const double total = sobolev_norm(f, SobolevIndex(2.0));
    CHECK(threshold_M(f, total, SobolevIndex(2.0)).M == 0.0);
    CHECK(threshold_M(f, total * 1.01, SobolevIndex(2.0)).eps_exceeds_total);

    // monotone non-increasing in epsilon
    SpectralField r = random_small_field(11, kIrr);
    double prev_m = 1e300;
    for (double eps : {0.01, 0.02, 0.05, 0.1, 0.2}) {
        double m = threshold_M(r, eps, SobolevIndex(2.0)).M;
        CHECK(m <= prev_m);
        prev_m = m;
    }
}

TEST_CASE("threshold radius matches a brute-force cumulative scan") {
    // synthetic spectrum |psi_k|^2 = e^{-|k|}
    SpectralField f(64, 16, kIrr);
    for (std::int64_t m = -16; m <= 16; ++m)
        for (std::int64_t l = -16; l <= 16; ++l) {
            double r = std::sqrt(static_cast<double>(m * m + l * l));
            f.at({m, l}) = std::exp(-r / 2.0);
        }
    const SobolevIndex s0(0.0);
    const double eps = 0.1 * sobolev_norm(f, s0);

    // oracle: scan attained radii in ascending order, recomputing the tail
    std::set<std::int64_t> radii_sq;
    for (std::int64_t m = -16; m <= 16; ++m)
        for (std::int64_t l = -16; l <= 16; ++l) radii_sq.insert(m * m + l * l);
    double want = -1.0;
    for (std::int64_t r2 : radii_sq) {
        double M = std::sqrt(static_cast<double>(r2));
        double acc = 0.0;
        for (std::int64_t m = -16; m <= 16; ++m)
            for (std::int64_t l = -16; l <= 16; ++l)
                if (static_cast<double>(m * m + l * l) > M * M)
                    acc += std::norm(f.at({m, l})) * sobolev_weight({m, l}, s0);
        if (std::sqrt(acc) <= eps) {
            want = M;
            break;
        }
    }
    CHECK(threshold_M(f, eps, s0).M == want);
}

TEST_CASE("hamiltonian fixtures") {
    SpectralField zero(32, 8, TorusSpec::rational(2.0));
    CHECK(hamiltonian(zero).total() == 0.0);

    SpectralField one(32, 8, TorusSpec::rational(2.0));
    one.at({1, 0}) = 1.0;
    HamiltonianParts h = hamiltonian(one);
    CHECK(h.h0 == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(h.p == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(h.total() == doctest::Approx(0.75).epsilon(1e-13));
}

TEST_CASE("quartic part agrees with the spectral quadruple sum") {
    SpectralField f = random_small_field(21, kIrr);
    const std::vector<ModeIndex> support{{1, 0}, {0, 2}, {-1, 1}, {2, -3}, {-4, -4}};

    cd acc(0.0, 0.0);
    for (ModeIndex k1 : support)
        for (ModeIndex k2 : support)
            for (ModeIndex k3 : support)
                for (ModeIndex k4 : support)
                    if (k1 + k2 == k3 + k4)
                        acc += f.at(k1) * f.at(k2) * std::conj(f.at(k3)) * std::conj(f.at(k4));
    const double want = 0.25 * acc.real();
    CHECK(hamiltonian(f).p == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("hamiltonian is gauge and reflection invariant") {
    SpectralField f = random_small_field(31, kIrr);
    HamiltonianParts h = hamiltonian(f);

    SpectralField g = f;
    const cd phase = std::polar(1.0, 1.2345);
    for (auto& c : g.coeffs()) c *= phase;
    HamiltonianParts hg = hamiltonian(g);
    CHECK(hg.total() == doctest::Approx(h.total()).epsilon(1e-12));

    SpectralField r(f.grid_n(), f.k_alias(), f.torus());
    const int K = f.k_alias();
    for (std::int64_t m = -K; m <= K; ++m)
        for (std::int64_t l = -K; l <= K; ++l) r.at({-m, -l}) = f.at({m, l});
    HamiltonianParts hr = hamiltonian(r);
    CHECK(hr.h0 == doctest::Approx(h.h0).epsilon(1e-12));
    CHECK(hr.p == doctest::Approx(h.p).epsilon(1e-12));
}

TEST_CASE("spectrum dump and anisotropy") {
    SpectralField f = make_initial_condition(1.0, SobolevIndex(2.0), 3, kIrr, 64, 16);
    SpectrumDump dump = spectrum_dump(f);

    int nonzero = 0;
    double first = -1.0, sum = 0.0;
    for (double e : dump.energy) {
        sum += e;
        if (e > 0.0) {
            ++nonzero;
            if (first < 0.0) first = e;
            CHECK(e == doctest::Approx(first).epsilon(1e-12));
        }
    }
    CHECK(nonzero == 24);
    CHECK(sum == doctest::Approx(mass(f)).epsilon(1e-15));
    CHECK(dump.at({0, 0}) == 0.0);

    AnisotropyRatio ar = anisotropy_ratio(dump);
    CHECK(ar.finite);
    CHECK(ar.value == doctest::Approx(1.0).epsilon(1e-12));

    SpectralField single(32, 8, kIrr);
    single.at({3, 0}) = 1.0;
    AnisotropyRatio inf_ar = anisotropy_ratio(spectrum_dump(single));
    CHECK_FALSE(inf_ar.finite);

    // transposing the spectrum inverts the ratio
    SpectralField g = random_small_field(8, kIrr);
    SpectralField gt(g.grid_n(), g.k_alias(), g.torus());
    for (std::int64_t m = -16; m <= 16; ++m)
        for (std::int64_t l = -16; l <= 16; ++l) gt.at({l, m}) = g.at({m, l});
    AnisotropyRatio a = anisotropy_ratio(spectrum_dump(g));
    AnisotropyRatio at = anisotropy_ratio(spectrum_dump(gt));
    CHECK(a.value * at.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ensemble statistics") {
    EnsembleStats st = ensemble_stats({3.0});
    CHECK(st.median == 3.0);
    CHECK(st.min == 3.0);
    CHECK(st.max == 3.0);

    st = ensemble_stats({1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK(st.median == 3.0);
    CHECK(st.min == 1.0);
    CHECK(st.max == 5.0);

    st = ensemble_stats({2.0, 1.0});
    CHECK(st.median == 1.0);  // lower-middle for even counts
    CHECK(st.min == 1.0);
    CHECK(st.max == 2.0);

    CHECK_THROWS_AS(ensemble_stats({}), std::invalid_argument);
}
