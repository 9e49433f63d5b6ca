#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "maxbb/wcnf.hpp"
#include "oracle.hpp"

using namespace maxbb;

TEST_CASE("wcnf parsing basics") {
    auto inst = parse_wcnf(std::string("h 1 2 0\n3 -1 0\n"));
    REQUIRE(inst.num_vars == 2);
    REQUIRE(inst.hard.size() == 1);
    REQUIRE(inst.soft.size() == 1);
    REQUIRE(inst.soft[0].weight == 3);
    REQUIRE(inst.soft[0].lits == std::vector<Lit>{Lit::negative(1)});

    auto empty = parse_wcnf(std::string(""));
    REQUIRE(empty.num_vars == 0);
    REQUIRE(empty.hard.empty());
    REQUIRE(empty.soft.empty());

    auto commented = parse_wcnf(std::string("c hello\n\nc world\nh -2 0\n"));
    REQUIRE(commented.hard.size() == 1);
}

TEST_CASE("wcnf parse errors carry line numbers") {
    auto expect_line = [](const std::string& text, long long line) {
        try {
            parse_wcnf(text);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            REQUIRE(e.line == line);
        }
    };
    expect_line("h 1 2\n", 1);            // missing terminating 0
    expect_line("h 1 0\n0 2 0\n", 2);     // zero weight
    expect_line("h 1 0\n-3 2 0\n", 2);    // negative weight
    expect_line("h 1 0\nx 2 0\n", 2);     // junk prefix
    expect_line("p wcnf 3 2 10\n", 1);    // legacy header rejected
    expect_line("h 1 0 junk\n", 1);       // trailing tokens
    expect_line("5 0\n", 1);              // empty soft clause
}

TEST_CASE("wcnf round-trips") {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 50; ++it) {
        auto inst = oracle::random_instance(rng, {.max_vars = 8, .max_clauses = 5});
        std::string once = write_wcnf(inst);
        auto reparsed = parse_wcnf(once);
        std::string twice = write_wcnf(reparsed);
        REQUIRE(once == twice);
        REQUIRE(reparsed.hard.size() == inst.hard.size());
        REQUIRE(reparsed.soft.size() == inst.soft.size());
    }
}

TEST_CASE("to_pbo shapes") {
    // unit soft (3, {~x1}) contributes objective term 3 x1, no new clause
    MaxSatInstance a;
    a.num_vars = 1;
    a.soft.push_back({3, {Lit::negative(1)}});
    auto pa = to_pbo(a);
    REQUIRE(pa.formula.empty());
    REQUIRE(pa.objective.cost_of(Lit::positive(1)) == 3);
    REQUIRE(pa.num_vars == 1);

    // non-unit soft (2, {x1,x2}) introduces b: hard x1 v x2 v b, objective 2 b
    MaxSatInstance b;
    b.num_vars = 2;
    b.soft.push_back({2, {Lit::positive(1), Lit::positive(2)}});
    auto pb = to_pbo(b);
    REQUIRE(pb.num_vars == 3);
    REQUIRE(pb.formula.size() == 1);
    REQUIRE(pb.formula[0] ==
            PBConstraint::clause({Lit::positive(1), Lit::positive(2), Lit::positive(3)}));
    REQUIRE(pb.objective.cost_of(Lit::positive(3)) == 2);

    // opposite-polarity unit softs: the second one gets relaxed
    MaxSatInstance c;
    c.num_vars = 1;
    c.soft.push_back({3, {Lit::negative(1)}});
    c.soft.push_back({5, {Lit::positive(1)}});
    auto pc = to_pbo(c);
    REQUIRE(pc.objective.cost_of(Lit::positive(1)) == 3);
    REQUIRE(pc.num_vars == 2);
    REQUIRE(pc.objective.cost_of(Lit::positive(2)) == 5);
    REQUIRE(pc.formula.size() == 1);

    // duplicate unit softs merge weights
    MaxSatInstance d;
    d.num_vars = 1;
    d.soft.push_back({3, {Lit::negative(1)}});
    d.soft.push_back({4, {Lit::negative(1)}});
    auto pd = to_pbo(d);
    REQUIRE(pd.objective.cost_of(Lit::positive(1)) == 7);
    REQUIRE(pd.num_vars == 1);
}

TEST_CASE("optimum preservation under to_pbo") {
    std::mt19937_64 rng(17);
    for (int it = 0; it < 120; ++it) {
        auto inst = oracle::random_instance(rng, {.max_vars = 6, .max_clauses = 10});
        auto pbo = to_pbo(inst);
        REQUIRE(pbo.num_vars <= 63);
        auto a = oracle::maxsat_optimum(inst);
        auto b = oracle::pbo_optimum(pbo);
        REQUIRE(a.has_value() == b.has_value());
        if (a) REQUIRE(*a == *b);
        // fresh relaxation literals never collide with instance variables
        for (Lit l : pbo.soft_cost_lit) REQUIRE(l.var() >= 1);
        for (size_t i = inst.hard.size(); i < pbo.formula.size(); ++i) {
            const auto& terms = pbo.formula[i].terms();
            REQUIRE(terms.back().lit.var() > inst.num_vars);
        }
    }
}
