#pragma once

// Instances shared by several test files.

#include "homonet/game.hpp"
#include "homonet/network.hpp"

namespace fixtures {

using namespace homonet;

// Three high (2) and three low (1) agents, Z = 10 / 6 / 7, quota 2.
inline GameInstance two_cliques(DecayKind kind, const Rational& delta) {
    GameInstance g;
    g.types = {2, 2, 2, 1, 1, 1};
    g.value = symmetric_table({2, 1}, {{10, 7}, {7, 6}});
    g.cost = CostRegime::quota(2);
    g.decay = {kind, delta};
    return g;
}

inline const Network& segregated() {
    static const Network net(6, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}});
    return net;
}

// Segregated network with links 01 and 35 swapped for the bridges 05 and 13.
inline const Network& bridged() {
    static const Network net(6, {{0, 2}, {0, 5}, {1, 2}, {1, 3}, {3, 4}, {4, 5}});
    return net;
}

// High agents share Z = 3, cross links Z = 2, one low agent, linear cost 1.
inline GameInstance star_instance(int n, const Rational& delta) {
    GameInstance g;
    g.types.assign(n - 1, 2);
    g.types.push_back(1);
    g.value = symmetric_table({2, 1}, {{3, 2}, {2, frac(3, 2)}});
    g.cost = CostRegime::linear(1);
    g.decay = {DecayKind::constant, delta};
    return g;
}

}  // namespace fixtures
