#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

namespace syrbo {

// Arguments with magnitude at or below this threshold trigger the protected
// fallbacks of div, log and inv.
inline constexpr double kProtectedEpsilon = 0.001;

enum class Primitive : std::uint8_t {
    add,
    sub,
    mul,
    div,
    sqrt,
    log,
    abs,
    neg,
    inv,
    max,
    min,
    if3,
    if4,
};

inline constexpr std::size_t kPrimitiveCount = 13;

inline constexpr std::array<Primitive, kPrimitiveCount> kAllPrimitives = {
    Primitive::add, Primitive::sub, Primitive::mul, Primitive::div, Primitive::sqrt,
    Primitive::log, Primitive::abs, Primitive::neg, Primitive::inv, Primitive::max,
    Primitive::min, Primitive::if3, Primitive::if4,
};

constexpr int arity(Primitive p) {
    switch (p) {
        case Primitive::sqrt:
        case Primitive::log:
        case Primitive::abs:
        case Primitive::neg:
        case Primitive::inv:
            return 1;
        case Primitive::add:
        case Primitive::sub:
        case Primitive::mul:
        case Primitive::div:
        case Primitive::max:
        case Primitive::min:
            return 2;
        case Primitive::if3:
            return 3;
        case Primitive::if4:
            return 4;
    }
    return 0;  // unreachable
}

constexpr std::string_view name(Primitive p) {
    switch (p) {
        case Primitive::add: return "add";
        case Primitive::sub: return "sub";
        case Primitive::mul: return "mul";
        case Primitive::div: return "div";
        case Primitive::sqrt: return "sqrt";
        case Primitive::log: return "log";
        case Primitive::abs: return "abs";
        case Primitive::neg: return "neg";
        case Primitive::inv: return "inv";
        case Primitive::max: return "max";
        case Primitive::min: return "min";
        case Primitive::if3: return "if3";
        case Primitive::if4: return "if4";
    }
    return "";
}

constexpr std::optional<Primitive> primitive_from_name(std::string_view s) {
    for (Primitive p : kAllPrimitives)
        if (name(p) == s) return p;
    return std::nullopt;
}

// Protected semantics: every primitive is total over finite arguments.
inline double apply(Primitive p, std::span<const double> args) {
    if (args.size() != static_cast<std::size_t>(arity(p)))
        throw std::invalid_argument("primitive arity mismatch");
    switch (p) {
        case Primitive::add: return args[0] + args[1];
        case Primitive::sub: return args[0] - args[1];
        case Primitive::mul: return args[0] * args[1];
        case Primitive::div:
            return std::fabs(args[1]) <= kProtectedEpsilon ? 1.0 : args[0] / args[1];
        case Primitive::sqrt: return std::sqrt(std::fabs(args[0]));
        case Primitive::log:
            return std::fabs(args[0]) <= kProtectedEpsilon ? 0.0 : std::log(std::fabs(args[0]));
        case Primitive::abs: return std::fabs(args[0]);
        case Primitive::neg: return -args[0];
        case Primitive::inv:
            return std::fabs(args[0]) <= kProtectedEpsilon ? 0.0 : 1.0 / args[0];
        case Primitive::max: return args[0] >= args[1] ? args[0] : args[1];
        case Primitive::min: return args[0] <= args[1] ? args[0] : args[1];
        case Primitive::if3: return args[0] >= 0.0 ? args[1] : args[2];
        case Primitive::if4: return args[0] >= args[1] ? args[2] : args[3];
    }
    throw std::invalid_argument("unknown primitive");
}

}  // namespace syrbo
