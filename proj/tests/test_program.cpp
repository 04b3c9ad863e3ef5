#include "syrbo/program.hpp"

#include <gtest/gtest.h>

#include "syrbo/gp.hpp"
#include "syrbo/rng.hpp"

using syrbo::Node;
using syrbo::Primitive;
using syrbo::Program;

namespace {

Program make(std::initializer_list<Node> nodes) {
    Program p;
    p.nodes = nodes;
    return p;
}

}  // namespace

TEST(Program, Validity) {
    EXPECT_TRUE(syrbo::is_valid(make({Node::make_constant(1.0)})));
    EXPECT_TRUE(syrbo::is_valid(make({Node::make_primitive(Primitive::add),
                                      Node::make_feature(0), Node::make_constant(2.0)})));
    // incomplete
    EXPECT_FALSE(syrbo::is_valid(make({Node::make_primitive(Primitive::add),
                                       Node::make_feature(0)})));
    // trailing nodes
    EXPECT_FALSE(syrbo::is_valid(make({Node::make_constant(1.0), Node::make_constant(2.0)})));
    EXPECT_FALSE(syrbo::is_valid(Program{}));
}

TEST(Program, DepthAndSubtrees) {
    // (mul (add x0 0.5) x1)
    Program p = make({Node::make_primitive(Primitive::mul), Node::make_primitive(Primitive::add),
                      Node::make_feature(0), Node::make_constant(0.5), Node::make_feature(1)});
    EXPECT_EQ(syrbo::depth(p), 2u);
    EXPECT_EQ(syrbo::subtree_end(p, 0), 5u);
    EXPECT_EQ(syrbo::subtree_end(p, 1), 4u);
    EXPECT_EQ(syrbo::subtree_end(p, 2), 3u);
    EXPECT_EQ(syrbo::subtree_end(p, 4), 5u);
    EXPECT_EQ(syrbo::depth(make({Node::make_feature(3)})), 0u);
}

TEST(Program, SexprPrinting) {
    Program p = make({Node::make_primitive(Primitive::mul), Node::make_primitive(Primitive::add),
                      Node::make_feature(0), Node::make_constant(0.5), Node::make_feature(1)});
    EXPECT_EQ(syrbo::to_sexpr(p), "(mul (add x0 0.5) x1)");
    EXPECT_EQ(syrbo::to_sexpr(make({Node::make_feature(12)})), "x12");
    EXPECT_EQ(syrbo::to_sexpr(make({Node::make_constant(-0.25)})), "-0.25");
}

TEST(Program, SexprParsing) {
    Program p = syrbo::parse_sexpr("(mul (add x0 0.5) x1)");
    ASSERT_EQ(p.size(), 5u);
    EXPECT_EQ(p.nodes[0].prim, Primitive::mul);
    EXPECT_EQ(p.nodes[2].feature, 0u);
    EXPECT_EQ(p.nodes[3].value, 0.5);
    EXPECT_EQ(p.nodes[4].feature, 1u);

    EXPECT_THROW(syrbo::parse_sexpr(""), std::invalid_argument);
    EXPECT_THROW(syrbo::parse_sexpr("(add x0)"), std::invalid_argument);
    EXPECT_THROW(syrbo::parse_sexpr("(add x0 x1 x2)"), std::invalid_argument);
    EXPECT_THROW(syrbo::parse_sexpr("(sin x0)"), std::invalid_argument);
    EXPECT_THROW(syrbo::parse_sexpr("(add x0 x1"), std::invalid_argument);
    EXPECT_THROW(syrbo::parse_sexpr("(add x0 x1) junk"), std::invalid_argument);
    EXPECT_THROW(syrbo::parse_sexpr("xan"), std::invalid_argument);
}

// Print -> parse -> print is the identity on random programs, and the parsed
// node list matches the original exactly.
TEST(Program, SexprRoundTripProperty) {
    syrbo::GpConfig config;
    config.init_depth_min = 0;
    config.init_depth_max = 7;
    syrbo::Rng rng(99);
    for (int i = 0; i < 2000; ++i) {
        Program p = syrbo::random_program(config, 6, rng);
        std::string text = syrbo::to_sexpr(p);
        Program q = syrbo::parse_sexpr(text);
        ASSERT_EQ(p.size(), q.size()) << text;
        for (std::size_t n = 0; n < p.size(); ++n) {
            EXPECT_EQ(p.nodes[n].kind, q.nodes[n].kind);
            if (p.nodes[n].kind == Node::Kind::primitive)
                EXPECT_EQ(p.nodes[n].prim, q.nodes[n].prim);
            if (p.nodes[n].kind == Node::Kind::feature)
                EXPECT_EQ(p.nodes[n].feature, q.nodes[n].feature);
            if (p.nodes[n].kind == Node::Kind::constant)
                EXPECT_EQ(p.nodes[n].value, q.nodes[n].value);  // exact round-trip
        }
        EXPECT_EQ(syrbo::to_sexpr(q), text);
    }
}
