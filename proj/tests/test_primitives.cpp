#include "syrbo/primitives.hpp"

#include <array>
#include <cmath>
#include <span>

#include <gtest/gtest.h>

#include "syrbo/rng.hpp"


using syrbo::Primitive;

TEST(Primitives, TableMetadata) {
    EXPECT_EQ(syrbo::kAllPrimitives.size(), 13u);
    for (Primitive p : {Primitive::add, Primitive::sub, Primitive::mul, Primitive::div,
                        Primitive::max, Primitive::min})
        EXPECT_EQ(syrbo::arity(p), 2) << syrbo::name(p);
    for (Primitive p : {Primitive::sqrt, Primitive::log, Primitive::abs, Primitive::neg,
                        Primitive::inv})
        EXPECT_EQ(syrbo::arity(p), 1) << syrbo::name(p);
    EXPECT_EQ(syrbo::arity(Primitive::if3), 3);
    EXPECT_EQ(syrbo::arity(Primitive::if4), 4);
}

TEST(Primitives, NameRoundTrip) {
    for (Primitive p : syrbo::kAllPrimitives) {
        auto back = syrbo::primitive_from_name(syrbo::name(p));
        ASSERT_TRUE(back.has_value());
        EXPECT_EQ(*back, p);
    }
    EXPECT_FALSE(syrbo::primitive_from_name("sin").has_value());
    EXPECT_FALSE(syrbo::primitive_from_name("").has_value());
}

TEST(Primitives, ProtectedSemantics) {
    EXPECT_EQ(syrbo::apply(Primitive::div, std::array{1.0, 0.0}), 1.0);
    EXPECT_EQ(syrbo::apply(Primitive::sqrt, std::array{-4.0}), 2.0);
    EXPECT_EQ(syrbo::apply(Primitive::if3, std::array{0.0, 5.0, 7.0}), 5.0);
    EXPECT_EQ(syrbo::apply(Primitive::if4, std::array{2.0, 3.0, 10.0, 20.0}), 20.0);
    EXPECT_EQ(syrbo::apply(Primitive::neg, std::array{0.0}), 0.0);
    EXPECT_EQ(syrbo::apply(Primitive::log, std::array{1.0}), 0.0);
    EXPECT_EQ(syrbo::apply(Primitive::log, std::array{0.0}), 0.0);
    EXPECT_EQ(syrbo::apply(Primitive::inv, std::array{0.0005}), 0.0);
    EXPECT_EQ(syrbo::apply(Primitive::inv, std::array{2.0}), 0.5);
}

TEST(Primitives, ProtectionBoundary) {
    // |d| <= 0.001 exactly returns 1; just above divides.
    EXPECT_EQ(syrbo::apply(Primitive::div, std::array{5.0, 0.001}), 1.0);
    EXPECT_EQ(syrbo::apply(Primitive::div, std::array{5.0, -0.001}), 1.0);
    double just_above = std::nextafter(0.001, 1.0);
    EXPECT_EQ(syrbo::apply(Primitive::div, std::array{5.0, just_above}), 5.0 / just_above);
    syrbo::Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        double x = rng.range(-100.0, 100.0);
        double d = rng.range(-2.0, 2.0);
        double expected = std::fabs(d) <= 0.001 ? 1.0 : x / d;
        EXPECT_EQ(syrbo::apply(Primitive::div, std::array{x, d}), expected);
    }
}

TEST(Primitives, Totality) {
    syrbo::Rng rng(11);
    auto huge = [&] {
        double mag = std::pow(10.0, rng.range(-100.0, 100.0));
        return rng.chance(0.5) ? mag : -mag;
    };
    for (int i = 0; i < 2000; ++i) {
        for (Primitive p : syrbo::kAllPrimitives) {
            std::array<double, 4> args{huge(), huge(), huge(), huge()};
            double out = syrbo::apply(p, std::span<const double>(args.data(), syrbo::arity(p)));
            (void)out;  // may be non-finite via overflow, but never throws
        }
    }
}

TEST(Primitives, Symmetry) {
    syrbo::Rng rng(13);
    for (int i = 0; i < 1000; ++i) {
        double a = rng.range(-50.0, 50.0);
        double b = rng.range(-50.0, 50.0);
        for (Primitive p : {Primitive::add, Primitive::mul, Primitive::max, Primitive::min})
            EXPECT_EQ(syrbo::apply(p, std::array{a, b}), syrbo::apply(p, std::array{b, a}));
    }
}

TEST(Primitives, ConditionalsSelectExactlyOneBranch) {
    const double nan = std::nan("");
    // The unselected branch never influences the result.
    EXPECT_EQ(syrbo::apply(Primitive::if3, std::array{1.0, 5.0, nan}), 5.0);
    EXPECT_EQ(syrbo::apply(Primitive::if3, std::array{-1.0, nan, 7.0}), 7.0);
    EXPECT_EQ(syrbo::apply(Primitive::if4, std::array{3.0, 2.0, 10.0, nan}), 10.0);
    EXPECT_EQ(syrbo::apply(Primitive::if4, std::array{2.0, 3.0, nan, 20.0}), 20.0);
    // Boundary: if3 takes the "then" branch at exactly zero, if4 at equality.
    EXPECT_EQ(syrbo::apply(Primitive::if3, std::array{0.0, 1.0, 2.0}), 1.0);
    EXPECT_EQ(syrbo::apply(Primitive::if4, std::array{3.0, 3.0, 1.0, 2.0}), 1.0);
}

TEST(Primitives, ArityMismatchRejected) {
    EXPECT_THROW(syrbo::apply(Primitive::add, std::array{1.0}), std::invalid_argument);
    EXPECT_THROW(syrbo::apply(Primitive::neg, std::array{1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(syrbo::apply(Primitive::if4, std::array{1.0, 2.0, 3.0}), std::invalid_argument);
}
