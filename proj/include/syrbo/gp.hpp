#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "syrbo/matrix.hpp"
#include "syrbo/program.hpp"
#include "syrbo/rng.hpp"

namespace syrbo {

struct GpConfig {
    std::size_t population_size = 200;
    std::size_t generations = 200;
    std::size_t tournament_size = 20;
    double crossover_prob = 0.9;
    double subtree_mut_prob = 0.01;
    double hoist_mut_prob = 0.01;
    double point_mut_prob = 0.01;
    double point_replace_prob = 0.05;
    std::size_t init_depth_min = 2;
    std::size_t init_depth_max = 6;
    double constant_min = -1.0;
    double constant_max = 1.0;
    double parsimony_coefficient = 0.001;
    std::size_t hard_node_cap = 2048;
    std::uint64_t seed = 0;
};

inline void validate(const GpConfig& c) {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (c.population_size == 0) throw std::invalid_argument("population_size must be positive");
    if (c.tournament_size == 0) throw std::invalid_argument("tournament_size must be positive");
    if (!prob(c.crossover_prob) || !prob(c.subtree_mut_prob) || !prob(c.hoist_mut_prob) ||
        !prob(c.point_mut_prob) || !prob(c.point_replace_prob))
        throw std::invalid_argument("probabilities must lie in [0,1]");
    if (c.crossover_prob + c.subtree_mut_prob + c.hoist_mut_prob + c.point_mut_prob > 1.0)
        throw std::invalid_argument("operator probabilities must sum to at most 1");
    if (c.init_depth_min > c.init_depth_max)
        throw std::invalid_argument("init_depth_min must not exceed init_depth_max");
    if (!(c.constant_min <= c.constant_max))
        throw std::invalid_argument("constant range is empty");
    if (c.parsimony_coefficient < 0.0)
        throw std::invalid_argument("parsimony_coefficient must be non-negative");
    if (c.hard_node_cap == 0) throw std::invalid_argument("hard_node_cap must be positive");
}

// Best-of-run result of one evolution.
struct GpRegressor {
    Program program;
    GpConfig config;
    double fitness = std::numeric_limits<double>::infinity();  // raw training MAE
};

struct Fitness {
    double raw = std::numeric_limits<double>::infinity();
    double penalized = std::numeric_limits<double>::infinity();
};

namespace detail {

inline Node random_terminal(const GpConfig& config, std::size_t n_features, Rng& rng) {
    if (rng.chance(0.5)) return Node::make_feature(static_cast<std::uint32_t>(rng.index(n_features)));
    return Node::make_constant(rng.range(config.constant_min, config.constant_max));
}

inline Primitive random_primitive(Rng& rng) {
    return kAllPrimitives[rng.index(kPrimitiveCount)];
}

// Pre-order construction. `full` places primitives everywhere above the
// target depth; `grow` forces primitives only above the minimum depth, then
// flips a coin, so the finished depth always lands in [min, target].
inline void build_tree(std::vector<Node>& out, const GpConfig& config, std::size_t n_features,
                       bool full, std::size_t target_depth, std::size_t depth, Rng& rng) {
    bool make_primitive;
    if (depth >= target_depth)
        make_primitive = false;
    else if (full || depth < config.init_depth_min)
        make_primitive = true;
    else
        make_primitive = rng.chance(0.5);

    if (!make_primitive) {
        out.push_back(random_terminal(config, n_features, rng));
        return;
    }
    Primitive p = random_primitive(rng);
    out.push_back(Node::make_primitive(p));
    for (int i = 0; i < arity(p); ++i)
        build_tree(out, config, n_features, full, target_depth, depth + 1, rng);
}

}  // namespace detail

// Ramped half-and-half initialization: grow or full with probability 1/2,
// target depth uniform over [init_depth_min, init_depth_max]. Terminals are a
// feature index or a constant with equal probability. Rebuilt from scratch in
// the rare event the node cap is exceeded.
inline Program random_program(const GpConfig& config, std::size_t n_features, Rng& rng) {
    if (n_features == 0) throw std::invalid_argument("need at least one feature");
    Program p;
    do {
        p.nodes.clear();
        bool full = rng.chance(0.5);
        std::size_t target = config.init_depth_min +
                             rng.index(config.init_depth_max - config.init_depth_min + 1);
        detail::build_tree(p.nodes, config, n_features, full, target, 0, rng);
    } while (p.size() > config.hard_node_cap);
    return p;
}

namespace detail {

// Evaluates the subtree at `pos` for every row at once; advances `pos` past
// the subtree. Children are evaluated left to right, matching a plain
// recursive per-row interpreter bit for bit.
inline std::vector<double> eval_subtree(const Program& p, std::size_t& pos, const Matrix& X) {
    const Node& n = p.nodes[pos++];
    switch (n.kind) {
        case Node::Kind::constant:
            return std::vector<double>(X.rows, n.value);
        case Node::Kind::feature: {
            std::vector<double> out(X.rows);
            for (std::size_t r = 0; r < X.rows; ++r) out[r] = X.at(r, n.feature);
            return out;
        }
        case Node::Kind::primitive: {
            const int a = arity(n.prim);
            std::vector<double> child[4];
            for (int i = 0; i < a; ++i) child[i] = eval_subtree(p, pos, X);
            std::vector<double> out(X.rows);
            for (std::size_t r = 0; r < X.rows; ++r) {
                double args[4];
                for (int i = 0; i < a; ++i) args[i] = child[i][r];
                out[r] = apply(n.prim, {args, static_cast<std::size_t>(a)});
            }
            return out;
        }
    }
    throw std::logic_error("corrupt node");
}

}  // namespace detail

// One prediction per row of X.
inline std::vector<double> evaluate(const Program& p, const Matrix& X) {
    if (!is_valid(p)) throw std::invalid_argument("cannot evaluate invalid program");
    for (const Node& n : p.nodes)
        if (n.kind == Node::Kind::feature && n.feature >= X.cols)
            throw std::invalid_argument("program references feature beyond input width");
    std::size_t pos = 0;
    return detail::eval_subtree(p, pos, X);
}

// raw = training MAE; penalized adds the parsimony term. Any non-finite
// prediction (or an overflowed mean) yields the worst possible value.
inline Fitness fitness(const Program& p, const Matrix& X, const std::vector<double>& y,
                       double parsimony_coefficient) {
    if (X.rows == 0) throw std::invalid_argument("fitness: empty dataset");
    if (X.rows != y.size()) throw std::invalid_argument("fitness: X and y disagree on rows");
    std::vector<double> pred = evaluate(p, X);
    double sum = 0.0;
    for (std::size_t r = 0; r < X.rows; ++r) sum += std::fabs(pred[r] - y[r]);
    double raw = sum / static_cast<double>(X.rows);
    Fitness f;
    if (std::isfinite(raw)) {
        f.raw = raw;
        f.penalized = raw + parsimony_coefficient * static_cast<double>(p.size());
    }
    return f;
}

struct Individual {
    Program program;
    Fitness fitness;
};

namespace detail {

// Smaller penalized fitness wins; ties prefer fewer nodes, then the earlier
// population index.
inline bool beats(const Individual& a, std::size_t ia, const Individual& b, std::size_t ib) {
    if (a.fitness.penalized != b.fitness.penalized)
        return a.fitness.penalized < b.fitness.penalized;
    if (a.program.size() != b.program.size()) return a.program.size() < b.program.size();
    return ia < ib;
}

}  // namespace detail

// k draws uniformly with replacement; returns the index of the best draw.
inline std::size_t tournament_select(const std::vector<Individual>& population, std::size_t k,
                                     Rng& rng) {
    if (population.empty()) throw std::invalid_argument("tournament over empty population");
    std::size_t best = rng.index(population.size());
    for (std::size_t i = 1; i < k; ++i) {
        std::size_t challenger = rng.index(population.size());
        if (detail::beats(population[challenger], challenger, population[best], best))
            best = challenger;
    }
    return best;
}

// Replace a uniformly chosen subtree of `parent` with a uniformly chosen
// subtree of `donor`; falls back to a copy of `parent` if the child would
// exceed the node cap.
inline Program subtree_crossover(const Program& parent, const Program& donor, Rng& rng,
                                 std::size_t hard_node_cap) {
    std::size_t i = rng.index(parent.size());
    std::size_t i_end = subtree_end(parent, i);
    std::size_t j = rng.index(donor.size());
    std::size_t j_end = subtree_end(donor, j);

    std::size_t new_size = parent.size() - (i_end - i) + (j_end - j);
    if (new_size > hard_node_cap) return parent;

    Program child;
    child.nodes.reserve(new_size);
    child.nodes.insert(child.nodes.end(), parent.nodes.begin(), parent.nodes.begin() + i);
    child.nodes.insert(child.nodes.end(), donor.nodes.begin() + j, donor.nodes.begin() + j_end);
    child.nodes.insert(child.nodes.end(), parent.nodes.begin() + i_end, parent.nodes.end());
    return child;
}

// Replace a random subtree with a freshly grown program.
inline Program subtree_mutation(const Program& parent, const GpConfig& config,
                                std::size_t n_features, Rng& rng) {
    std::size_t i = rng.index(parent.size());
    std::size_t i_end = subtree_end(parent, i);
    Program donor = random_program(config, n_features, rng);

    std::size_t new_size = parent.size() - (i_end - i) + donor.size();
    if (new_size > config.hard_node_cap) return parent;

    Program child;
    child.nodes.reserve(new_size);
    child.nodes.insert(child.nodes.end(), parent.nodes.begin(), parent.nodes.begin() + i);
    child.nodes.insert(child.nodes.end(), donor.nodes.begin(), donor.nodes.end());
    child.nodes.insert(child.nodes.end(), parent.nodes.begin() + i_end, parent.nodes.end());
    return child;
}

// Replace a random subtree with a random subtree of itself (never grows).
inline Program hoist_mutation(const Program& parent, Rng& rng) {
    std::size_t i = rng.index(parent.size());
    std::size_t i_end = subtree_end(parent, i);
    std::size_t j = i + rng.index(i_end - i);
    std::size_t j_end = subtree_end(parent, j);

    Program child;
    child.nodes.reserve(parent.size() - (i_end - i) + (j_end - j));
    child.nodes.insert(child.nodes.end(), parent.nodes.begin(), parent.nodes.begin() + i);
    child.nodes.insert(child.nodes.end(), parent.nodes.begin() + j, parent.nodes.begin() + j_end);
    child.nodes.insert(child.nodes.end(), parent.nodes.begin() + i_end, parent.nodes.end());
    return child;
}

// Each node is independently replaced with probability point_replace_prob:
// primitives by a same-arity primitive, terminals by a fresh terminal.
inline Program point_mutation(const Program& parent, const GpConfig& config,
                              std::size_t n_features, Rng& rng) {
    Program child = parent;
    for (Node& n : child.nodes) {
        if (!rng.chance(config.point_replace_prob)) continue;
        if (n.kind == Node::Kind::primitive) {
            std::vector<Primitive> same;
            for (Primitive p : kAllPrimitives)
                if (arity(p) == arity(n.prim)) same.push_back(p);
            n = Node::make_primitive(same[rng.index(same.size())]);
        } else {
            n = detail::random_terminal(config, n_features, rng);
        }
    }
    return child;
}

// Generational evolution loop. A single RNG stream seeded from config.seed is
// consumed in a fixed order: initialization first, then one operator draw
// plus its parent selections per offspring, generation by generation. The
// result is a pure function of (config, X, y).
inline GpRegressor evolve(const GpConfig& config, const Matrix& X, const std::vector<double>& y) {
    validate(config);
    if (X.rows == 0) throw std::invalid_argument("evolve: empty dataset");
    if (X.rows != y.size()) throw std::invalid_argument("evolve: X and y disagree on rows");
    if (X.cols == 0) throw std::invalid_argument("evolve: need at least one feature");

    Rng rng(config.seed);
    const std::size_t n_features = X.cols;

    std::vector<Individual> population(config.population_size);
    for (auto& ind : population) ind.program = random_program(config, n_features, rng);
    for (auto& ind : population)
        ind.fitness = fitness(ind.program, X, y, config.parsimony_coefficient);

    Individual best = population.front();
    auto consider = [&best](const Individual& candidate) {
        if (candidate.fitness.penalized < best.fitness.penalized ||
            (candidate.fitness.penalized == best.fitness.penalized &&
             candidate.program.size() < best.program.size()))
            best = candidate;
    };
    for (const auto& ind : population) consider(ind);

    const double p_cx = config.crossover_prob;
    const double p_sub = p_cx + config.subtree_mut_prob;
    const double p_hoist = p_sub + config.hoist_mut_prob;
    const double p_point = p_hoist + config.point_mut_prob;

    std::vector<Individual> next(config.population_size);
    for (std::size_t gen = 0; gen < config.generations; ++gen) {
        for (auto& offspring : next) {
            double op = rng.unit();
            const Program& parent =
                population[tournament_select(population, config.tournament_size, rng)].program;
            if (op < p_cx) {
                const Program& donor =
                    population[tournament_select(population, config.tournament_size, rng)].program;
                offspring.program = subtree_crossover(parent, donor, rng, config.hard_node_cap);
            } else if (op < p_sub) {
                offspring.program = subtree_mutation(parent, config, n_features, rng);
            } else if (op < p_hoist) {
                offspring.program = hoist_mutation(parent, rng);
            } else if (op < p_point) {
                offspring.program = point_mutation(parent, config, n_features, rng);
            } else {
                offspring.program = parent;  // reproduction
            }
        }
        for (auto& ind : next)
            ind.fitness = fitness(ind.program, X, y, config.parsimony_coefficient);
        population.swap(next);
        for (const auto& ind : population) consider(ind);
    }

    GpRegressor result;
    result.program = std::move(best.program);
    result.config = config;
    result.fitness = best.fitness.raw;
    return result;
}

}  // namespace syrbo
