#pragma once

#include <complex>
#include <vector>

#include "nlstorus/lattice.hpp"

namespace nlst {

// Complex Fourier coefficients on the alias-free mode box |m|,|l| <= K.
// The grid invariant grid_n >= 4K guarantees the cubic product is an exact
// convolution on the box after truncation.
class SpectralField {
  public:
    SpectralField(int grid_n, int k_alias, const TorusSpec& torus, double time = 0.0)
        : grid_n_(grid_n), K_(k_alias), torus_(torus), time_(time),
          coeffs_(static_cast<std::size_t>(2 * k_alias + 1) * (2 * k_alias + 1)) {
        if (k_alias < 1) throw std::invalid_argument("alias-free half-width must be >= 1");
        if (grid_n < 4 * k_alias)
            throw std::invalid_argument("grid too small for dealiased cubic products");
    }

    int grid_n() const { return grid_n_; }
    int k_alias() const { return K_; }
    int width() const { return 2 * K_ + 1; }
    const TorusSpec& torus() const { return torus_; }

    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    bool in_box(ModeIndex k) const { return k.norm_inf() <= K_; }
    std::size_t index_of(ModeIndex k) const {
        return static_cast<std::size_t>((k.m + K_) * width() + (k.l + K_));
    }
    ModeIndex mode_of(std::size_t idx) const {
        auto w = static_cast<std::int64_t>(width());
        return {static_cast<std::int64_t>(idx) / w - K_, static_cast<std::int64_t>(idx) % w - K_};
    }

    std::complex<double>& at(ModeIndex k) { return coeffs_[index_of(k)]; }
    std::complex<double> at(ModeIndex k) const { return coeffs_[index_of(k)]; }

    std::vector<std::complex<double>>& coeffs() { return coeffs_; }
    const std::vector<std::complex<double>>& coeffs() const { return coeffs_; }

  private:
    int grid_n_;
    int K_;
    TorusSpec torus_;
    double time_;
    std::vector<std::complex<double>> coeffs_;
};

}  // namespace nlst
