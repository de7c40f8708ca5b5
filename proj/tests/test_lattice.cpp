#include <doctest.h>

#include "nlstorus/lattice.hpp"

using namespace nlst;

TEST_CASE("dispersion relation") {
    TorusSpec t2 = TorusSpec::rational(2.0);
    CHECK(dispersion({1, 0}, t2) == 1.0);
    CHECK(dispersion({0, 1}, t2) == 2.0);

    TorusSpec irr = TorusSpec::irrational(kOmegaSqSqrt2);
    CHECK(dispersion({3, 2}, irr) == doctest::Approx(14.65685424949238).epsilon(1e-15));
    CHECK(dispersion({0, 0}, irr) == 0.0);

    // even in each component
    TorusSpec one = TorusSpec::rational(1.0);
    for (std::int64_t m = -5; m <= 5; ++m)
        for (std::int64_t l = -5; l <= 5; ++l) {
            CHECK(dispersion({m, l}, irr) == dispersion({-m, l}, irr));
            CHECK(dispersion({m, l}, irr) == dispersion({m, -l}, irr));
            CHECK(dispersion({m, l}, one) == static_cast<double>(m * m + l * l));
        }
}

TEST_CASE("sobolev and split weights") {
    SobolevIndex s2(2.0);
    CHECK(sobolev_weight({0, 0}, s2) == 1.0);
    CHECK(sobolev_weight({1, 0}, s2) == 4.0);
    CHECK(sobolev_weight({2, 1}, s2) == 36.0);

    SobolevIndex s1(1.0);
    CHECK(split_weight({0, 0}, s1) == 2.0);
    CHECK(split_weight({3, 0}, s1) == 11.0);
    CHECK(split_weight({2, 2}, s2) == 50.0);
}

TEST_CASE("split weight is equivalent to the bracket weight, C_s = 2 for s <= 2") {
    for (double s : {0.5, 1.0, 1.5, 2.0}) {
        SobolevIndex si(s);
        for (std::int64_t m = -64; m <= 64; m += 1)
            for (std::int64_t l = -64; l <= 64; l += 4) {
                const double w = sobolev_weight({m, l}, si);
                const double v = split_weight({m, l}, si);
                CHECK(v <= 2.0 * w);
                CHECK(w <= 2.0 * v);
            }
    }
}

TEST_CASE("decimal fraction reduction matches the printed-digits route") {
    Fraction f = reduce_float_to_fraction(1.414213562373095, FractionMode::Decimal);
    CHECK(f.a == 282842712474619LL);
    CHECK(f.b == 200000000000000LL);

    CHECK(reduce_float_to_fraction(0.5, FractionMode::Decimal).a == 1);
    CHECK(reduce_float_to_fraction(0.5, FractionMode::Decimal).b == 2);
    CHECK(reduce_float_to_fraction(1.25, FractionMode::Decimal).a == 5);
    CHECK(reduce_float_to_fraction(1.25, FractionMode::Decimal).b == 4);

    CHECK_THROWS(reduce_float_to_fraction(-1.0, FractionMode::Decimal));
    CHECK_THROWS(reduce_float_to_fraction(0.0, FractionMode::Binary));
}

TEST_CASE("binary fraction reduction is the exact IEEE value") {
    // 1.414213562373095 as a double is exactly 1592262918131443 / 2^50.
    Fraction f = reduce_float_to_fraction(kOmegaSqSqrt2, FractionMode::Binary);
    CHECK(f.a == 1592262918131443LL);
    CHECK(f.b == 1125899906842624LL);
    CHECK(static_cast<double>(f.a) / static_cast<double>(f.b) == kOmegaSqSqrt2);

    CHECK(reduce_float_to_fraction(0.5, FractionMode::Binary).a == 1);
    CHECK(reduce_float_to_fraction(0.5, FractionMode::Binary).b == 2);
    CHECK(reduce_float_to_fraction(3.0, FractionMode::Binary).a == 3);
    CHECK(reduce_float_to_fraction(3.0, FractionMode::Binary).b == 1);
}

TEST_CASE("torus specs store an exact reduced fraction") {
    TorusSpec one = TorusSpec::rational(1.0);
    CHECK(one.a() == 1);
    CHECK(one.b() == 1);
    CHECK(one.kind() == TorusKind::Rational);

    TorusSpec alt = TorusSpec::rational_fraction(370723, 262144);
    CHECK(alt.omega_sq() == 370723.0 / 262144.0);
    CHECK(alt.a() == 370723);
    CHECK(alt.b() == 262144);

    // not exactly representable as a double
    CHECK_THROWS_AS(TorusSpec::rational_fraction(1, 3), std::invalid_argument);
    CHECK_THROWS(TorusSpec::rational_fraction(-1, 2));

    TorusSpec irr = TorusSpec::irrational(kOmegaSqSqrt2);
    CHECK(irr.kind() == TorusKind::IrrationalApproximated);
    CHECK(static_cast<double>(irr.a()) / static_cast<double>(irr.b()) == irr.omega_sq());
}

TEST_CASE("precision audit") {
    CHECK(audit_precision(512, 282842712474619LL, 200000000000000LL));  // K^2 = 262144
    CHECK(audit_precision(512, 370723, 262144));
    CHECK_FALSE(audit_precision(1, 1, 1));
    CHECK_FALSE(audit_precision(2, 1, 1));
    CHECK_THROWS(audit_precision(0, 1, 2));
}
