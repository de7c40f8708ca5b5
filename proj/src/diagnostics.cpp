#include "nlstorus/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <set>

#include "nlstorus/solver.hpp"

namespace nlst {

double mass(const SpectralField& field) {
    double acc = 0.0;
    for (const auto& c : field.coeffs()) acc += std::norm(c);
    return acc;
}

double sobolev_norm(const SpectralField& field, SobolevIndex s) {
    double acc = 0.0;
    const int K = field.k_alias();
    for (std::int64_t m = -K; m <= K; ++m)
        for (std::int64_t l = -K; l <= K; ++l)
            acc += std::norm(field.at({m, l})) * sobolev_weight({m, l}, s);
    return std::sqrt(acc);
}

double tail_norm(const SpectralField& field, double M, SobolevIndex s) {
    if (M < 0.0) throw std::invalid_argument("tail radius must be >= 0");
    double acc = 0.0;
    const int K = field.k_alias();
    const double M2 = M * M;
    for (std::int64_t m = -K; m <= K; ++m)
        for (std::int64_t l = -K; l <= K; ++l) {
            ModeIndex k{m, l};
            if (static_cast<double>(k.norm_sq()) > M2)
                acc += std::norm(field.at(k)) * sobolev_weight(k, s);
        }
    return std::sqrt(acc);
}

ThresholdM threshold_M(const SpectralField& field, double eps, SobolevIndex s) {
    if (!(eps > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (eps > sobolev_norm(field, s)) return {0.0, true};

    std::set<std::int64_t> radii_sq;
    const int K = field.k_alias();
    for (std::int64_t m = -K; m <= K; ++m)
        for (std::int64_t l = -K; l <= K; ++l) radii_sq.insert(m * m + l * l);
    for (std::int64_t r2 : radii_sq) {
        double M = std::sqrt(static_cast<double>(r2));
        if (tail_norm(field, M, s) <= eps) return {M, false};
    }
    return {std::sqrt(static_cast<double>(*radii_sq.rbegin())), false};
}

namespace {

// Engine cache for standalone Hamiltonian evaluation.
std::mutex& engine_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

HamiltonianParts hamiltonian(const SpectralField& field) {
    static std::unique_ptr<FourierEngine> cached;
    static int cached_grid = 0, cached_k = 0;
    static double cached_w2 = 0.0;
    std::lock_guard<std::mutex> lock(engine_mutex());
    if (!cached || cached_grid != field.grid_n() || cached_k != field.k_alias() ||
        cached_w2 != field.torus().omega_sq()) {
        cached = std::make_unique<FourierEngine>(field.grid_n(), field.k_alias(), field.torus());
        cached_grid = field.grid_n();
        cached_k = field.k_alias();
        cached_w2 = field.torus().omega_sq();
    }
    return cached->hamiltonian(field);
}

SpectrumDump spectrum_dump(const SpectralField& field) {
    SpectrumDump dump;
    dump.k_alias = field.k_alias();
    dump.energy.reserve(field.coeffs().size());
    for (const auto& c : field.coeffs()) dump.energy.push_back(std::norm(c));
    return dump;
}

AnisotropyRatio anisotropy_ratio(const SpectrumDump& spectrum) {
    const int K = spectrum.k_alias;
    double num = 0.0, den = 0.0, tot = 0.0;
    for (std::int64_t m = -K; m <= K; ++m)
        for (std::int64_t l = -K; l <= K; ++l) {
            double e = spectrum.at({m, l});
            num += static_cast<double>(m * m) * e;
            den += static_cast<double>(l * l) * e;
            tot += e;
        }
    if (!(tot > 0.0)) throw std::invalid_argument("anisotropy of an empty spectrum");
    if (den == 0.0) return {std::numeric_limits<double>::infinity(), false};
    return {num / den, true};
}

EnsembleStats ensemble_stats(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("ensemble statistics of an empty list");
    std::sort(values.begin(), values.end());
    EnsembleStats st;
    st.min = values.front();
    st.max = values.back();
    st.median = values[(values.size() - 1) / 2];
    return st;
}

}  // namespace nlst
