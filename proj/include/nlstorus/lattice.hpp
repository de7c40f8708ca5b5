#pragma once

#include <cstdint>
#include <cmath>
#include <compare>
#include <stdexcept>
#include <string>

namespace nlst {

using int128 = __int128;

// Integer lattice point k = (m, l) indexing a Fourier mode.
struct ModeIndex {
    std::int64_t m = 0;
    std::int64_t l = 0;

    friend constexpr ModeIndex operator+(ModeIndex a, ModeIndex b) { return {a.m + b.m, a.l + b.l}; }
    friend constexpr ModeIndex operator-(ModeIndex a, ModeIndex b) { return {a.m - b.m, a.l - b.l}; }
    friend constexpr bool operator==(ModeIndex a, ModeIndex b) { return a.m == b.m && a.l == b.l; }
    friend constexpr auto operator<=>(ModeIndex a, ModeIndex b) {
        if (auto c = a.m <=> b.m; c != 0) return c;
        return a.l <=> b.l;
    }

    constexpr std::int64_t norm_sq() const { return m * m + l * l; }
    constexpr std::int64_t norm_inf() const {
        std::int64_t am = m < 0 ? -m : m, al = l < 0 ? -l : l;
        return am > al ? am : al;
    }
};

struct SobolevIndex {
    double s = 0.0;
    explicit SobolevIndex(double s_) : s(s_) {
        if (!(s_ >= 0.0)) throw std::invalid_argument("Sobolev index must be >= 0");
    }
};

enum class TorusKind { Rational, IrrationalApproximated };

enum class FractionMode { Binary, Decimal };

// Reduced fraction a/b of a positive double. Binary mode decomposes the IEEE
// value exactly (mantissa * 2^e); decimal mode uses the shortest round-trip
// decimal literal, matching how the value would be read off a printout.
struct Fraction {
    std::int64_t a = 0;
    std::int64_t b = 1;
};

Fraction reduce_float_to_fraction(double omega_sq, FractionMode mode);

// Aspect parameter omega^2 of the torus, stored as a float together with its
// exact rational value. All exact-resonance decisions use the fraction.
class TorusSpec {
  public:
    static TorusSpec rational(double omega_sq);
    static TorusSpec rational_fraction(std::int64_t a, std::int64_t b);
    static TorusSpec irrational(double omega_sq);

    double omega_sq() const { return omega_sq_; }
    std::int64_t a() const { return a_; }
    std::int64_t b() const { return b_; }
    TorusKind kind() const { return kind_; }

    friend bool operator==(const TorusSpec&, const TorusSpec&) = default;

  private:
    TorusSpec(double w2, std::int64_t a, std::int64_t b, TorusKind kind)
        : omega_sq_(w2), a_(a), b_(b), kind_(kind) {}

    double omega_sq_;
    std::int64_t a_;
    std::int64_t b_;
    TorusKind kind_;
};

// The square-root-of-two torus of the numerical study, spelled with the exact
// double that the audit fixtures assume (not std::sqrt(2.0), which is one ulp up).
inline constexpr double kOmegaSqSqrt2 = 1.414213562373095;

// lambda_k = m^2 + omega^2 l^2
inline double dispersion(ModeIndex k, const TorusSpec& torus) {
    return static_cast<double>(k.m) * static_cast<double>(k.m) +
           torus.omega_sq() * static_cast<double>(k.l) * static_cast<double>(k.l);
}

// <k>^{2s} with <k> = sqrt(1 + m^2 + l^2)
inline double sobolev_weight(ModeIndex k, SobolevIndex s) {
    return std::pow(1.0 + static_cast<double>(k.norm_sq()), s.s);
}

// (1+m^2)^s + (1+l^2)^s, the split weight of the cut-off norm
inline double split_weight(ModeIndex k, SobolevIndex s) {
    return std::pow(1.0 + static_cast<double>(k.m) * static_cast<double>(k.m), s.s) +
           std::pow(1.0 + static_cast<double>(k.l) * static_cast<double>(k.l), s.s);
}

// K^2 < max(a,b): the float-approximated torus creates no spurious resonances
// for mode-number differences up to K.
bool audit_precision(std::int64_t K, std::int64_t a, std::int64_t b);

}  // namespace nlst
