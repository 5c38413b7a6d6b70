#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "vser/envs.hpp"
#include "vser/format.hpp"

using namespace vser;

namespace {

const char* kMini = R"(# smallest possible game
[game]
name mini
agents 1
horizon 1
discount 1/1
fully_observed false

[states]
s

[actions 0]
go

[observations 0]
none

[start]
s 1/1

[transition]
s go -> s 1/1

[observe]
s go -> none 1/1
)";

std::string replaced(std::string text, const std::string& from, const std::string& to) {
    auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("minimal document parses", "[format]") {
    DecPomdp g = parse_game(kMini, "mini.dpg");
    CHECK(g.name == "mini");
    CHECK(g.num_states() == 1);
    CHECK(g.agents == 1);
    CHECK(g.horizon == 1);
    CHECK_FALSE(g.fully_observed);
}

TEST_CASE("bad probability sum is diagnosed at the row", "[format]") {
    std::string doc = replaced(kMini, "s go -> s 1/1\n\n[observe]", "s go -> s 3/4\n\n[observe]");
    try {
        parse_game(doc, "mini.dpg");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.file == "mini.dpg");
        CHECK(e.line == 22);  // the transition row's line
        CHECK(e.col == 1);
        CHECK(e.message.find("3/4") != std::string::npos);
        CHECK(std::string(e.what()).rfind("mini.dpg:22:1: ", 0) == 0);
    }
}

TEST_CASE("diagnostics carry useful positions", "[format]") {
    SECTION("unknown symbol") {
        std::string doc = replaced(kMini, "s go -> s 1/1\n\n[observe]", "s go -> bogus 1/1\n\n[observe]");
        try {
            parse_game(doc);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.message.find("bogus") != std::string::npos);
            CHECK(e.line == 22);
            CHECK(e.col == 9);
        }
    }
    SECTION("duplicate section") {
        std::string doc = std::string(kMini) + "\n[start]\ns 1/1\n";
        CHECK_THROWS_WITH(parse_game(doc), Catch::Matchers::ContainsSubstring("duplicate section"));
    }
    SECTION("out-of-order sections") {
        std::string doc = replaced(kMini, "[states]\ns\n", "");
        doc += "\n[states]\ns\n";  // states after everything else
        CHECK_THROWS_AS(parse_game(doc), ParseError);
    }
    SECTION("missing transition cell") {
        // Two actions, only one covered.
        std::string doc = replaced(kMini, "[actions 0]\ngo\n", "[actions 0]\ngo halt\n");
        doc = replaced(doc, "s go -> none 1/1", "s * -> none 1/1");
        CHECK_THROWS_WITH(parse_game(doc), Catch::Matchers::ContainsSubstring("no transition row"));
    }
    SECTION("content before any section") {
        CHECK_THROWS_WITH(parse_game("hello\n"), Catch::Matchers::ContainsSubstring("before any section"));
    }
    SECTION("empty document") {
        CHECK_THROWS_AS(parse_game(""), ParseError);
        CHECK_THROWS_AS(parse_game("# only a comment\n"), ParseError);
    }
}

TEST_CASE("parse is total on junk", "[format]") {
    const char* junk[] = {
        "[game]\n",
        "[game]\nname x\nagents 2\n",
        "[[]]\n",
        "[bogus]\n",
        "[actions]\n",
        "[states 3]\n",
        "[game]\nname x\nagents two\nhorizon 1\ndiscount 1/1\nfully_observed false\n",
        "[game]\nname x\nagents 1\nhorizon 1\ndiscount 0.5\nfully_observed false\n",
        "[game]\nname x\nagents 1\nhorizon 1\ndiscount 1/1\nfully_observed maybe\n",
    };
    for (const char* doc : junk) {
        INFO(doc);
        CHECK_THROWS_AS(parse_game(doc), ParseError);
    }
}

TEST_CASE("wildcards expand first-match-wins", "[format]") {
    std::string base = R"([game]
name wild
agents 1
horizon 2
discount 1/1
fully_observed false

[states]
u v

[actions 0]
go halt

[observations 0]
none

[start]
u 1/1

[transition]
)";
    std::string tail = R"(
[observe]
* * -> none 1/1

[reward]
* * -> v 1/1
v * -> * 2/1
)";
    // Specific row first: (v, go) keeps v; wildcard fills the rest.
    DecPomdp first = parse_game(base + "v go -> v 1/1\n* * -> u 1/1\n" + tail);
    CHECK(first.transition[1][0] == ProbRow{{1, Rat(1)}});
    CHECK(first.transition[1][1] == ProbRow{{0, Rat(1)}});
    // Wildcard first: it wins everywhere, the specific row is dead.
    DecPomdp second = parse_game(base + "* * -> u 1/1\nv go -> v 1/1\n" + tail);
    CHECK(second.transition[1][0] == ProbRow{{0, Rat(1)}});

    // Rewards: "* * -> v 1" decided (·,·,v) first, so the later v-row only
    // fills the remaining successors.
    CHECK(first.reward_at(0, 0, 1) == Rat(1));
    CHECK(first.reward_at(1, 0, 1) == Rat(1));  // not overridden to 2
    CHECK(first.reward_at(1, 0, 0) == Rat(2));
    CHECK(first.reward_at(0, 0, 0) == Rat(0));
}

TEST_CASE("round-trip through the serializer", "[format]") {
    for (const DecPomdp& g : {build_matrix_game(), build_two_step_game(), build_referential_game()}) {
        std::string text = serialize_game(g);
        DecPomdp back = parse_game(text, g.name + ".dpg");
        CHECK(back == g);
        // Deterministic bytes and canonical-form idempotence.
        CHECK(serialize_game(g) == text);
        CHECK(serialize_game(back) == text);
    }
}

TEST_CASE("serialization format details", "[format]") {
    DecPomdp g = build_matrix_game();
    std::string text = serialize_game(g);
    CHECK(text.find("discount 1/1") != std::string::npos);
    CHECK(text.find("fully_observed false") != std::string::npos);
    CHECK(text.find("[transition]") != std::string::npos);
    // Zero rewards are left out.
    CHECK(text.find("0/1") == std::string::npos);
}

TEST_CASE("fully observed files omit observation sections", "[format]") {
    DecPomdp g = build_two_step_game();
    std::string text = serialize_game(g);
    CHECK(text.find("[observations") == std::string::npos);
    CHECK(text.find("[observe]") == std::string::npos);
    DecPomdp back = parse_game(text);
    CHECK(back == g);
    CHECK(back.fully_observed);
    CHECK(back.observations[0] == back.states);

    // Declaring an observe section anyway is an error.
    std::string with_obs =
        replaced(text, "\n[reward]", "\n[observe]\ns1 a a -> s1 s1 1/1\n\n[reward]");
    CHECK_THROWS_WITH(parse_game(with_obs), Catch::Matchers::ContainsSubstring("fully observed"));
}

TEST_CASE("checked-in reference files match their builders", "[format]") {
    const char* dir = std::getenv("VSER_SOURCE_DIR");
    if (!dir) SKIP("VSER_SOURCE_DIR not set");
    auto read = [&](const std::string& rel) {
        std::ifstream in(std::string(dir) + "/" + rel, std::ios::binary);
        REQUIRE(in.good());
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    CHECK(parse_game(read("envs/matrix.dpg")) == build_matrix_game());
    CHECK(parse_game(read("envs/two_step.dpg")) == build_two_step_game());
    CHECK(parse_game(read("envs/referential.dpg")) == build_referential_game());
}
