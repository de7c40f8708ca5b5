#include "nlstorus/lattice.hpp"

#include <charconv>
#include <cstring>
#include <limits>
#include <numeric>

namespace nlst {

namespace {

Fraction reduce_binary(double x) {
    int e = 0;
    double frac = std::frexp(x, &e);  // x = frac * 2^e, frac in [0.5, 1)
    // Scale the fraction up to an odd integer mantissa.
    std::int64_t mant = 0;
    while (frac != std::floor(frac)) {
        frac *= 2.0;
        --e;
    }
    mant = static_cast<std::int64_t>(frac);
    while (mant % 2 == 0 && mant != 0) {
        mant /= 2;
        ++e;
    }
    if (e >= 0) {
        if (e >= 63 || mant > (std::numeric_limits<std::int64_t>::max() >> e))
            throw std::overflow_error("binary fraction numerator exceeds 64-bit range");
        return {mant << e, 1};
    }
    if (-e >= 63) throw std::overflow_error("binary fraction denominator exceeds 64-bit range");
    return {mant, std::int64_t{1} << (-e)};
}

Fraction reduce_decimal(double x) {
    // Shortest round-trip decimal representation, then digits/10^k reduced.
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    std::string rep(buf, res.ptr);

    std::string digits;
    int frac_digits = 0;
    int exp10 = 0;
    std::size_t i = 0;
    bool seen_point = false;
    for (; i < rep.size(); ++i) {
        char c = rep[i];
        if (c == '.') {
            seen_point = true;
        } else if (c == 'e' || c == 'E') {
            exp10 = std::stoi(rep.substr(i + 1));
            break;
        } else {
            digits.push_back(c);
            if (seen_point) ++frac_digits;
        }
    }
    int128 num = 0;
    for (char c : digits) {
        num = num * 10 + (c - '0');
        if (num > int128(std::numeric_limits<std::int64_t>::max())) break;
    }
    int pow = frac_digits - exp10;  // x = digits * 10^-pow
    int128 den = 1;
    while (pow > 0) { den *= 10; --pow; }
    while (pow < 0) { num *= 10; ++pow; }
    if (num > int128(std::numeric_limits<std::int64_t>::max()) ||
        den > int128(std::numeric_limits<std::int64_t>::max()))
        throw std::overflow_error("decimal fraction exceeds 64-bit range");
    std::int64_t a = static_cast<std::int64_t>(num);
    std::int64_t b = static_cast<std::int64_t>(den);
    std::int64_t g = std::gcd(a, b);
    return {a / g, b / g};
}

}  // namespace

Fraction reduce_float_to_fraction(double omega_sq, FractionMode mode) {
    if (!std::isfinite(omega_sq) || omega_sq <= 0.0)
        throw std::invalid_argument("omega^2 must be finite and positive");
    return mode == FractionMode::Binary ? reduce_binary(omega_sq) : reduce_decimal(omega_sq);
}

TorusSpec TorusSpec::rational(double omega_sq) {
    Fraction f = reduce_float_to_fraction(omega_sq, FractionMode::Binary);
    return TorusSpec(omega_sq, f.a, f.b, TorusKind::Rational);
}

TorusSpec TorusSpec::rational_fraction(std::int64_t a, std::int64_t b) {
    if (a <= 0 || b <= 0) throw std::invalid_argument("fraction must be positive");
    std::int64_t g = std::gcd(a, b);
    a /= g;
    b /= g;
    double w2 = static_cast<double>(a) / static_cast<double>(b);
    Fraction back = reduce_float_to_fraction(w2, FractionMode::Binary);
    if (back.a != a || back.b != b)
        throw std::invalid_argument("fraction " + std::to_string(a) + "/" + std::to_string(b) +
                                    " is not exactly representable as a double");
    return TorusSpec(w2, a, b, TorusKind::Rational);
}

TorusSpec TorusSpec::irrational(double omega_sq) {
    Fraction f = reduce_float_to_fraction(omega_sq, FractionMode::Binary);
    return TorusSpec(omega_sq, f.a, f.b, TorusKind::IrrationalApproximated);
}

bool audit_precision(std::int64_t K, std::int64_t a, std::int64_t b) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    int128 k2 = int128(K) * int128(K);
    return k2 < int128(a > b ? a : b);
}

}  // namespace nlst
