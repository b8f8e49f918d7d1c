#include "doctest.h"
#include "fixtures.hpp"
#include "homonet/json_io.hpp"
#include "oracle.hpp"
#include "replicate.hpp"

using namespace homonet;

namespace {

int count_lines(const std::string& s, const std::string& prefix) {
    int c = 0;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) c += line.rfind(prefix, 0) == 0;
    return c;
}

}  // namespace

TEST_CASE("rational scalars") {
    CHECK(rational_from_json(Json("3/4"), "x") == frac(3, 4));
    CHECK(rational_from_json(Json(5), "x") == 5);
    CHECK(rational_from_json(Json(0.25), "x") == frac(1, 4));
    CHECK_THROWS_AS(rational_from_json(Json::array(), "x"), ParseError);
    CHECK(scalar_json(Rational(frac(6, 8))) == Json("3/4"));
}

TEST_CASE("parse diagnostics name the line") {
    try {
        parse_json("{\n  \"types\": [1,\n  2,,\n]}", "inst.json");
        FAIL("accepted malformed JSON");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).rfind("inst.json:3:", 0) == 0);
    }
    CHECK_THROWS_WITH_AS(load_instance("{\"types\": [1]}", "a.json"), doctest::Contains("missing field"), ParseError);
    CHECK_THROWS_AS(network_from_json(Json::parse(R"({"n": 3, "edges": [[0, 0]]})")), ParseError);
    CHECK_THROWS_AS(network_from_json(Json::parse(R"({"n": 3, "edges": [[0, 1], [1, 0]]})")), ParseError);
    CHECK_THROWS_AS(network_from_json(Json::parse(R"({"n": 3, "edges": [[0, 3]]})")), ParseError);
    CHECK_THROWS_AS(network_from_json(Json::parse(R"({"edges": []})")), ParseError);
}

TEST_CASE("report serializers") {
    auto g = fixtures::two_cliques(DecayKind::hyperbolic, frac(1, 25));
    auto st = pairwise_nash_stable<Rational>(g, fixtures::segregated());
    auto j = stability_to_json(st);
    CHECK(j["verdict"] == "stable");
    REQUIRE(j.contains("witness"));
    // The serialized witness is accepted by the independent blocking oracle.
    TransferVector<Rational> back;
    for (const auto& e : j["witness"]) back.set(e["link"][0], e["link"][1], parse_rational(e["to_lower"].get<std::string>()));
    CHECK_FALSE(oracle::pair_blocked(g, fixtures::segregated(), back));

    auto un = pairwise_nash_stable<Rational>(with_delta(g, frac(1, 10)), fixtures::segregated());
    auto ju = stability_to_json(un);
    CHECK(ju["verdict"] == "unstable");
    CHECK(ju.contains("stage"));

    auto th = thresholds_to_json(hyperbolic_thresholds(g));
    CHECK(th["delta_lower"] == "2/65");
    CHECK(th["delta_upper"] == "1/22");
    CHECK(th["method"] == "closed-form-hyperbolic");
    CHECK(th["lower_bracket"].is_null());

    auto eff = efficiency_to_json(is_efficient<Rational>(g, fixtures::segregated()));
    CHECK(eff["efficient"] == false);
    CHECK(parse_rational(eff["max_total"].get<std::string>()) == oracle::best_total(g, 6, 2));

    Network mixed(6, {{0, 3}, {1, 2}});
    CHECK(sorting_to_json(sorting_in_type(g, mixed))["holds"] == oracle::sorting_in_type(g, mixed));
    auto star = star_to_json(star_conditions(fixtures::star_instance(3, frac(9, 10)), frac(9, 10)));
    CHECK(star["all_pass"] == true);
    CHECK(star["center"] == 2);
    CHECK(profile_to_json(is_local_tree(build_canonical_local_tree(CanonicalKind::cycle, 7), 2).profile)["deficiency"] == 0);
    // Serialization is deterministic.
    CHECK(stability_to_json(pairwise_nash_stable<Rational>(g, fixtures::segregated())).dump() == j.dump());
}

TEST_CASE("instance files on disk") {
    auto g = load_instance_file(HOMONET_TEST_DATA "/two_cliques.json");
    auto ref = fixtures::two_cliques(DecayKind::hyperbolic, frac(1, 25));
    CHECK(g.types == ref.types);
    CHECK(total_utility(g, fixtures::bridged()) == total_utility(ref, fixtures::bridged()));
    auto net = load_network_file(HOMONET_TEST_DATA "/segregated.json");
    CHECK(net.edges() == fixtures::segregated().edges());
    auto s = load_instance_file(HOMONET_TEST_DATA "/star.json");
    auto sref = fixtures::star_instance(3, frac(9, 10));
    CHECK(total_utility(s, build_low_value_star(s).net) == total_utility(sref, build_low_value_star(sref).net));
    CHECK_THROWS_AS(load_instance_file(HOMONET_TEST_DATA "/missing.json"), ParseError);
}

TEST_CASE("replication targets") {
    CHECK(replicate::targets().size() == 8);
    CHECK_THROWS(replicate::run("nope", 10, 6, 7));

    auto ex = replicate::run("example-3-1", 10, 6, 7);
    CHECK(ex.out.str().find("delta_lower = 2/37") != std::string::npos);
    CHECK(ex.out.str().find("delta_upper = 1/8") != std::string::npos);
    CHECK(ex.passed + ex.failed == count_lines(ex.out.str(), "PASS") + count_lines(ex.out.str(), "FAIL"));

    auto c = replicate::run("example-c-centrality", 10, 6, 7);
    CHECK(c.failed == 0);
    CHECK(c.passed == 4);

    auto fa = replicate::run("fact-a2", 10, 6, 7);
    CHECK(fa.failed == 0);

    auto fh = replicate::run("figure-hyperbolic", 10, 6, 7);
    CHECK(fh.failed == 0);
    CHECK(count_lines(fh.out.str(), "n_x,n_y") == 1);

    // The literal footnote list is not a local tree; every other instance matches.
    auto ac = replicate::run("appendix-c-formulas", 10, 6, 7);
    CHECK(ac.failed == 1);
    CHECK(ac.out.str().find("FAIL footnote (10,3): local tree") != std::string::npos);
}
