#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "nlstorus/resonance.hpp"

namespace nlst {

// One ordered interaction (k1, k2, k3) -> k = k1+k2-k3 of the quasi-resonant
// sum, indexed by flat mode ids on the support box.
struct QuartetTableEntry {
    std::int32_t i1, i2, i3;
    double theta;  // lambda_{k1}+lambda_{k2}-lambda_{k3}-lambda_k from exact (p,q)
};

// All quasi-resonant ordered triples on |k|_inf <= support_box, grouped by
// output mode for O(1) right-hand-side assembly.
class QuartetTable {
  public:
    static QuartetTable build(std::int64_t support_box, const QuasiResonanceParams& params,
                              const TorusSpec& torus, bool exact_only = false,
                              std::uint64_t work_budget = kDefaultWorkBudget);

    std::int64_t support_box() const { return box_; }
    int width() const { return static_cast<int>(2 * box_ + 1); }
    std::size_t n_modes() const { return static_cast<std::size_t>(width()) * width(); }
    const TorusSpec& torus() const { return torus_; }
    const QuasiResonanceParams& params() const { return params_; }

    std::size_t size() const { return entries_.size(); }
    const std::vector<QuartetTableEntry>& entries() const { return entries_; }
    const std::vector<std::uint32_t>& offsets() const { return offsets_; }  // per output mode
    const std::vector<double>& mode_lambda() const { return lambda_; }

    // Largest |k|_inf component among modes of non-exact entries (0 if none).
    std::int64_t nonexact_extent() const { return nonexact_extent_; }

    std::size_t index_of(ModeIndex k) const {
        return static_cast<std::size_t>((k.m + box_) * width() + (k.l + box_));
    }
    ModeIndex mode_of(std::size_t idx) const {
        auto w = static_cast<std::int64_t>(width());
        return {static_cast<std::int64_t>(idx) / w - box_,
                static_cast<std::int64_t>(idx) % w - box_};
    }

  private:
    QuartetTable(std::int64_t box, QuasiResonanceParams params, TorusSpec torus)
        : box_(box), params_(params), torus_(torus) {}

    std::int64_t box_;
    QuasiResonanceParams params_;
    TorusSpec torus_;
    std::vector<QuartetTableEntry> entries_;
    std::vector<std::uint32_t> offsets_;
    std::vector<double> lambda_;
    std::int64_t nonexact_extent_ = 0;
};

struct TruncatedState {
    std::int64_t support_box;
    double time = 0.0;
    int sign = +1;  // +1 defocusing, -1 focusing
    std::vector<std::complex<double>> z;  // row-major over the box, m outer

    explicit TruncatedState(std::int64_t box, int sign_ = +1)
        : support_box(box), sign(sign_),
          z(static_cast<std::size_t>(2 * box + 1) * (2 * box + 1)) {}

    std::size_t index_of(ModeIndex k) const {
        return static_cast<std::size_t>((k.m + support_box) * (2 * support_box + 1) +
                                        (k.l + support_box));
    }
    std::complex<double>& at(ModeIndex k) { return z[index_of(k)]; }
    std::complex<double> at(ModeIndex k) const { return z[index_of(k)]; }
};

// dz_k/dt = i lambda_k z_k + sign * i * sum over table entries of z1 z2 conj(z3),
// summed in table order.
std::vector<std::complex<double>> rhs(const TruncatedState& state, const QuartetTable& table);

// Gauged RK4 stepper: linear phases handled analytically, the quasi-resonant
// oscillation e^{i theta t} kept explicitly; stage phases cached per dt.
class TruncatedStepper {
  public:
    TruncatedStepper(const QuartetTable& table, double dt);
    void step(TruncatedState& state) const;
    double dt() const { return dt_; }

  private:
    const QuartetTable& table_;
    double dt_;
    std::vector<std::complex<double>> phase_half_, phase_full_;  // per entry
    std::vector<std::complex<double>> mode_phase_;               // e^{i lambda dt} per mode
    mutable std::vector<std::complex<double>> w_, k1_, k2_, k3_, k4_, stage_;
};

void step_truncated(TruncatedState& state, const QuartetTable& table, double dt);

// Literal evaluation of the split-weight cut-off norm: modes with |m| > M and
// modes with |l| > M each contribute (both sums fire when both indices exceed M).
double n_m_norm(const TruncatedState& state, std::int64_t M, SobolevIndex s);

struct NmDriftReport {
    double max_drift = 0.0;    // max_t |N_M(t) - N_M(0)| / max(N_M(0), mass_0)
    double nm0 = 0.0;
    double mass0 = 0.0;
    std::int64_t extent = 0;   // non-exact extent of the table used
    bool passed = false;
    double tolerance = 0.0;
};

// Integrates a random state supported on |k|_inf <= support_radius and checks
// that no split-weight mass crosses M. Precondition (configuration error if
// violated): M >= max(support_radius, table non-exact extent).
NmDriftReport verify_nm_conservation(std::int64_t support_box, const QuasiResonanceParams& params,
                                     const TorusSpec& torus, std::int64_t M,
                                     std::int64_t support_radius, double t_end, double dt,
                                     std::uint64_t seed, double tolerance = 1e-8, int sign = +1);

}  // namespace nlst
