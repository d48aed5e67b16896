#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "support.hpp"

using namespace qtraj;
using nlohmann::json;

namespace {

json minimal_scenario() {
    return json{{"dim", 2},
                {"initial", {{"state", "plus"}}},
                {"steps", json::array({{{"preset", "dephasing"}, {"params", {0.25}}}})}};
}

} // namespace

TEST_CASE("scenario parsing") {
    SECTION("minimal valid document") {
        Scenario sc = parse_scenario(minimal_scenario());
        CHECK(sc.dim == 2);
        REQUIRE(sc.pure());
        CHECK(std::abs((*sc.initial_state)[0] - Complex(1.0 / std::numbers::sqrt2, 0.0)) <= 1e-15);
        REQUIRE(sc.steps.size() == 1);
        CHECK(sc.steps[0].size() == 2);
        CHECK(sc.options.grid_size == 4096);
        CHECK(sc.options.close_loop);
    }

    SECTION("explicit state and kraus matrices") {
        json j{{"dim", 2},
               {"initial", {{"state", json::array({{1.0, 0.0}, {0.0, 0.0}})}}},
               {"steps", json::array({{{"kraus",
                                        json::array({json::array(
                                            {json::array({{1.0, 0.0}, {0.0, 0.0}}),
                                             json::array({{0.0, 0.0}, {1.0, 0.0}})})})},
                                       {"label", "custom"}}})}};
        Scenario sc = parse_scenario(j);
        CHECK(sc.steps[0].label() == "custom");
        CHECK(sc.steps[0].size() == 1);
    }

    SECTION("named densities") {
        json j{{"dim", 3},
               {"initial", {{"density", "maximally_mixed"}}},
               {"steps", json::array({{{"preset", "complete_dephasing"}}})}};
        Scenario sc = parse_scenario(j);
        REQUIRE_FALSE(sc.pure());
        CHECK(sc.initial_density->trace() == Catch::Approx(1.0));
    }

    SECTION("options are applied") {
        json j = minimal_scenario();
        j["options"] = {{"grid_size", 512},     {"seed", 99},          {"min_weight", 1e-6},
                        {"epsilon", 1e-4},      {"close_loop", false}, {"tolerances", {{"recon", 1e-8}}}};
        Scenario sc = parse_scenario(j);
        CHECK(sc.options.grid_size == 512);
        CHECK(sc.options.seed == 99);
        CHECK(sc.options.min_weight == 1e-6);
        CHECK(sc.options.epsilon == 1e-4);
        CHECK_FALSE(sc.options.close_loop);
        CHECK(sc.options.tolerances.recon == 1e-8);
    }

    SECTION("validation failures") {
        json j = minimal_scenario();
        j.erase("dim");
        CHECK_THROWS_AS(parse_scenario(j), ValidationError);

        j = minimal_scenario();
        j["initial"] = {{"state", json::array({{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}})}};
        CHECK_THROWS_AS(parse_scenario(j), ValidationError); // dim mismatch

        j = minimal_scenario();
        j["initial"] = {{"state", json::array({{2.0, 0.0}, {0.0, 0.0}})}};
        CHECK_THROWS_AS(parse_scenario(j), ValidationError); // not normalized

        j = minimal_scenario();
        j["steps"] = json::array({{{"kraus", json::array({json::array(
                                       {json::array({{0.5, 0.0}, {0.0, 0.0}}),
                                        json::array({{0.0, 0.0}, {0.5, 0.0}})})})}}});
        CHECK_THROWS_AS(parse_scenario(j), ValidationError); // incomplete channel

        j = minimal_scenario();
        j["steps"] = json::array({{{"preset", "no_such_channel"}}});
        CHECK_THROWS_AS(parse_scenario(j), ValidationError);

        j = minimal_scenario();
        j["options"] = {{"epsilon", 1.5}};
        CHECK_THROWS_AS(parse_scenario(j), ValidationError);
    }

    SECTION("both or neither initial forms are rejected") {
        json j = minimal_scenario();
        j["initial"] = {{"state", "plus"}, {"density", "maximally_mixed"}};
        CHECK_THROWS_AS(parse_scenario(j), ValidationError);
        j["initial"] = json::object();
        CHECK_THROWS_AS(parse_scenario(j), ValidationError);
    }
}

TEST_CASE("scenario hashing is stable") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("qtraj") == fnv1a_hex("qtraj"));
    CHECK(fnv1a_hex("a") != fnv1a_hex("b"));
}

TEST_CASE("mixer files") {
    Scenario sc = parse_scenario(minimal_scenario());

    SECTION("single mixer broadcasts over all steps") {
        // write a scratch mixers file and load it back
        json mixer = json::array({{{"label", "half-turn"},
                                   {"mixers", json::array({json::array(
                                       {json::array({{0.0, 0.0}, {1.0, 0.0}}),
                                        json::array({{1.0, 0.0}, {0.0, 0.0}})})})}}});
        std::string path = "mixers_unit_test.json";
        {
            std::ofstream f(path);
            f << mixer.dump();
        }
        std::vector<MixerSet> sets = load_mixer_sets(path, sc);
        std::remove(path.c_str());
        REQUIRE(sets.size() == 1);
        CHECK(sets[0].label == "half-turn");
        REQUIRE(sets[0].mixers.size() == sc.steps.size());
    }

    SECTION("non-unitary mixers are rejected") {
        json mixer = json::array({{{"mixers", json::array({json::array(
                                       {json::array({{0.5, 0.0}, {0.0, 0.0}}),
                                        json::array({{0.0, 0.0}, {0.5, 0.0}})})})}}});
        std::string path = "mixers_unit_test_bad.json";
        {
            std::ofstream f(path);
            f << mixer.dump();
        }
        CHECK_THROWS_AS(load_mixer_sets(path, sc), ValidationError);
        std::remove(path.c_str());
    }
}
