#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "syrbo/primitives.hpp"

namespace syrbo {

// One node of a prefix-ordered (pre-order, depth-first) expression tree.
struct Node {
    enum class Kind : std::uint8_t { primitive, feature, constant };

    Kind kind = Kind::constant;
    Primitive prim = Primitive::add;  // kind == primitive
    std::uint32_t feature = 0;        // kind == feature
    double value = 0.0;               // kind == constant

    static Node make_primitive(Primitive p) {
        Node n;
        n.kind = Kind::primitive;
        n.prim = p;
        return n;
    }
    static Node make_feature(std::uint32_t index) {
        Node n;
        n.kind = Kind::feature;
        n.feature = index;
        return n;
    }
    static Node make_constant(double v) {
        Node n;
        n.kind = Kind::constant;
        n.value = v;
        return n;
    }
};

inline int arity(const Node& n) {
    return n.kind == Node::Kind::primitive ? arity(n.prim) : 0;
}

// Expression tree flattened in prefix order.
struct Program {
    std::vector<Node> nodes;

    std::size_t size() const { return nodes.size(); }
};

// A node sequence parses as exactly one complete expression: scanning left to
// right, the number of still-open slots never hits zero early and is zero at
// the end.
inline bool is_valid(const Program& p) {
    if (p.nodes.empty()) return false;
    std::size_t open = 1;
    for (const Node& n : p.nodes) {
        if (open == 0) return false;
        open += static_cast<std::size_t>(arity(n));
        open -= 1;
    }
    return open == 0;
}

// One-past-the-end index of the subtree rooted at `root`.
inline std::size_t subtree_end(const Program& p, std::size_t root) {
    std::size_t open = 1;
    std::size_t i = root;
    while (open > 0) {
        open += static_cast<std::size_t>(arity(p.nodes[i]));
        open -= 1;
        ++i;
    }
    return i;
}

// Depth of the tree; a lone terminal has depth 0.
inline std::size_t depth(const Program& p) {
    std::size_t max_depth = 0;
    std::vector<int> pending;  // remaining children per open primitive
    for (const Node& n : p.nodes) {
        max_depth = std::max(max_depth, pending.size());
        int a = arity(n);
        if (a > 0) {
            pending.push_back(a);
        } else {
            while (!pending.empty() && --pending.back() == 0) pending.pop_back();
        }
    }
    return max_depth;
}

inline std::uint32_t max_feature_index(const Program& p) {
    std::uint32_t m = 0;
    for (const Node& n : p.nodes)
        if (n.kind == Node::Kind::feature) m = std::max(m, n.feature);
    return m;
}

inline bool uses_features(const Program& p) {
    return std::any_of(p.nodes.begin(), p.nodes.end(),
                       [](const Node& n) { return n.kind == Node::Kind::feature; });
}

namespace detail {

inline void format_double(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip form
    out.append(buf, res.ptr);
}

}  // namespace detail

// Prefix s-expression text, e.g. `(mul (add x0 0.5) x1)`. Constants are
// printed in shortest round-trip form, features as `x<i>`.
inline std::string to_sexpr(const Program& p) {
    if (!is_valid(p)) throw std::invalid_argument("cannot serialize invalid program");
    std::string out;
    std::vector<int> pending;
    for (const Node& n : p.nodes) {
        if (!out.empty() && out.back() != '(') out.push_back(' ');
        switch (n.kind) {
            case Node::Kind::primitive:
                out.push_back('(');
                out.append(name(n.prim));
                pending.push_back(arity(n.prim));
                break;
            case Node::Kind::feature:
                out.push_back('x');
                out.append(std::to_string(n.feature));
                break;
            case Node::Kind::constant:
                detail::format_double(out, n.value);
                break;
        }
        if (arity(n) == 0) {
            while (!pending.empty() && --pending.back() == 0) {
                pending.pop_back();
                out.push_back(')');
            }
        }
    }
    return out;
}

namespace detail {

struct SexprParser {
    std::string_view text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("program parse error at offset " + std::to_string(pos) +
                                    ": " + msg);
    }

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' ||
                                     text[pos] == '\r'))
            ++pos;
    }

    std::string_view atom() {
        std::size_t start = pos;
        while (pos < text.size() && text[pos] != ' ' && text[pos] != '\t' && text[pos] != '\n' &&
               text[pos] != '\r' && text[pos] != '(' && text[pos] != ')')
            ++pos;
        if (pos == start) fail("expected atom");
        return text.substr(start, pos - start);
    }

    void parse_expr(std::vector<Node>& out) {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        if (text[pos] == '(') {
            ++pos;
            skip_ws();
            std::string_view head = atom();
            auto prim = primitive_from_name(head);
            if (!prim) fail("unknown primitive '" + std::string(head) + "'");
            out.push_back(Node::make_primitive(*prim));
            for (int i = 0; i < arity(*prim); ++i) parse_expr(out);
            skip_ws();
            if (pos >= text.size() || text[pos] != ')') fail("expected ')'");
            ++pos;
            return;
        }
        if (text[pos] == ')') fail("unexpected ')'");
        std::string_view tok = atom();
        if (tok.size() >= 2 && tok[0] == 'x' && tok[1] >= '0' && tok[1] <= '9') {
            std::uint32_t idx = 0;
            auto res = std::from_chars(tok.data() + 1, tok.data() + tok.size(), idx);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
                fail("bad feature '" + std::string(tok) + "'");
            out.push_back(Node::make_feature(idx));
            return;
        }
        double v = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            fail("bad constant '" + std::string(tok) + "'");
        out.push_back(Node::make_constant(v));
    }
};

}  // namespace detail

inline Program parse_sexpr(std::string_view text) {
    detail::SexprParser parser{text};
    Program p;
    parser.parse_expr(p.nodes);
    parser.skip_ws();
    if (parser.pos != text.size()) parser.fail("trailing input");
    return p;
}

}  // namespace syrbo
