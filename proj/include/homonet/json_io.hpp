#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "homonet/game.hpp"
#include "homonet/localtree.hpp"
#include "homonet/metrics.hpp"
#include "homonet/network.hpp"
#include "homonet/policy.hpp"
#include "homonet/rational.hpp"
#include "homonet/stability.hpp"
#include "homonet/thresholds.hpp"

namespace homonet {

using Json = nlohmann::json;  // std::map objects, so keys come out sorted

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Rational rational_from_json(const Json& j, const std::string& where) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long>());
    if (j.is_number_float()) return parse_rational(j.dump());
    throw ParseError(where + ": expected a number or \"p/q\" string");
}

template <class S>
Json scalar_json(const S& v) {
    if constexpr (Num<S>::exact)
        return to_string(v);
    else
        return Json::parse(to_string(v));
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot write");
    out << text;
}

// Parses with a file:line diagnostic on syntax errors.
inline Json parse_json(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        size_t line = 1;
        for (size_t k = 0; k < e.byte && k < text.size(); ++k) line += text[k] == '\n';
        throw ParseError(source + ":" + std::to_string(line) + ": " + e.what());
    }
}

inline GameInstance instance_from_json(const Json& j, const std::string& src = "instance") {
    auto need = [&](const Json& o, const char* key) -> const Json& {
        if (!o.is_object() || !o.contains(key)) throw ParseError(src + ": missing field \"" + key + "\"");
        return o.at(key);
    };
    GameInstance g;
    const Json& types = need(j, "types");
    if (!types.is_array()) throw ParseError(src + ": \"types\" must be an array");
    for (size_t k = 0; k < types.size(); ++k) g.types.push_back(rational_from_json(types[k], src + ": types[" + std::to_string(k) + "]"));

    const Json& cost = need(j, "cost");
    std::string ck = need(cost, "kind").get<std::string>();
    if (ck == "quota")
        g.cost = CostRegime::quota(need(cost, "kappa").get<int>());
    else if (ck == "linear")
        g.cost = CostRegime::linear(rational_from_json(need(cost, "c"), src + ": cost.c"));
    else if (ck == "convex") {
        std::vector<Rational> t;
        for (const auto& e : need(cost, "table")) t.push_back(rational_from_json(e, src + ": cost.table"));
        g.cost = CostRegime::convex(std::move(t));
    } else
        throw ParseError(src + ": unknown cost kind \"" + ck + "\"");

    if (j.contains("decay")) {
        const Json& d = j.at("decay");
        std::string dk = need(d, "kind").get<std::string>();
        if (dk == "constant")
            g.decay.kind = DecayKind::constant;
        else if (dk == "hyperbolic")
            g.decay.kind = DecayKind::hyperbolic;
        else if (dk == "none")
            g.decay.kind = DecayKind::none;
        else
            throw ParseError(src + ": unknown decay kind \"" + dk + "\"");
        if (d.contains("delta")) g.decay.delta = rational_from_json(d.at("delta"), src + ": decay.delta");
    }

    const Json& v = need(j, "value");
    std::string vk = need(v, "kind").get<std::string>();
    if (vk == "product")
        g.value.kind = ValueKind::product;
    else if (vk == "separable") {
        g.value.kind = ValueKind::separable;
        g.value.a = rational_from_json(need(v, "a"), src + ": value.a");
        g.value.b = rational_from_json(need(v, "b"), src + ": value.b");
    } else if (vk == "table") {
        g.value.kind = ValueKind::table;
        for (const auto& e : need(v, "levels")) g.value.levels.push_back(rational_from_json(e, src + ": value.levels"));
        for (const auto& row : need(v, "z")) {
            std::vector<Rational> r;
            for (const auto& e : row) r.push_back(rational_from_json(e, src + ": value.z"));
            g.value.z.push_back(std::move(r));
        }
    } else
        throw ParseError(src + ": unknown value kind \"" + vk + "\"");
    validate(g);
    return g;
}

inline GameInstance load_instance(const std::string& text, const std::string& src = "instance") {
    return instance_from_json(parse_json(text, src), src);
}

inline GameInstance load_instance_file(const std::string& path) { return load_instance(read_text(path), path); }

inline Json instance_to_json(const GameInstance& g) {
    Json j;
    for (const auto& t : g.types) j["types"].push_back(to_string(t));
    switch (g.cost.kind) {
        case CostKind::quota: j["cost"] = {{"kind", "quota"}, {"kappa", g.cost.kappa}}; break;
        case CostKind::linear: j["cost"] = {{"kind", "linear"}, {"c", to_string(g.cost.c)}}; break;
        case CostKind::convex: {
            Json t = Json::array();
            for (const auto& c : g.cost.table) t.push_back(to_string(c));
            j["cost"] = {{"kind", "convex"}, {"table", t}};
        }
    }
    const char* dk = g.decay.kind == DecayKind::constant ? "constant" : g.decay.kind == DecayKind::hyperbolic ? "hyperbolic" : "none";
    j["decay"] = {{"kind", dk}, {"delta", to_string(g.decay.delta)}};
    switch (g.value.kind) {
        case ValueKind::product: j["value"] = {{"kind", "product"}}; break;
        case ValueKind::separable: j["value"] = {{"kind", "separable"}, {"a", to_string(g.value.a)}, {"b", to_string(g.value.b)}}; break;
        case ValueKind::table: {
            Json lv = Json::array(), z = Json::array();
            for (const auto& l : g.value.levels) lv.push_back(to_string(l));
            for (const auto& row : g.value.z) {
                Json r = Json::array();
                for (const auto& e : row) r.push_back(to_string(e));
                z.push_back(r);
            }
            j["value"] = {{"kind", "table"}, {"levels", lv}, {"z", z}};
        }
    }
    return j;
}

inline Network network_from_json(const Json& j, const std::string& src = "network") {
    if (!j.is_object() || !j.contains("n") || !j.contains("edges")) throw ParseError(src + ": need fields \"n\" and \"edges\"");
    Network net(j.at("n").get<int>());
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw ParseError(src + ": each edge is a pair");
        int a = e[0].get<int>(), b = e[1].get<int>();
        if (a == b || a < 0 || b < 0 || a >= net.n() || b >= net.n()) throw ParseError(src + ": bad edge " + e.dump());
        if (net.has_edge(a, b)) throw ParseError(src + ": duplicate edge " + e.dump());
        net.add_edge(a, b);
    }
    return net;
}

inline Network load_network_file(const std::string& path) { return network_from_json(parse_json(read_text(path), path), path); }

inline Json network_to_json(const Network& net) {
    Json edges = Json::array();
    for (auto [a, b] : net.edges()) edges.push_back({a, b});
    return {{"n", net.n()}, {"edges", edges}};
}

inline Json edges_json(const std::vector<Edge>& es) {
    Json out = Json::array();
    for (auto [a, b] : es) out.push_back({a, b});
    return out;
}

inline Json move_to_json(const Move& m) {
    return {{"coalition", members(m.coalition)}, {"added", edges_json(m.added)}, {"deleted", edges_json(m.deleted)}};
}

// One entry per link: the transfer received by the lower endpoint.
template <class S>
Json transfers_to_json(const TransferVector<S>& t) {
    Json out = Json::array();
    for (const auto& [e, v] : t.entries())
        if (sign(v) != 0) out.push_back({{"link", {e.first, e.second}}, {"to_lower", scalar_json(v)}});
    return out;
}

template <class S>
Json stability_to_json(const StabilityReport<S>& r) {
    Json j;
    j["verdict"] = to_string(r.verdict);
    j["stage"] = r.stage;
    j["moves"] = r.moves;
    j["rows"] = r.rows;
    j["lp_solves"] = r.lp_solves;
    j["bounds"] = {{"max_coalition", r.bounds.max_coalition}, {"max_adds", r.bounds.max_adds}, {"budget", r.bounds.budget}, {"full", r.bounds.full}};
    if (r.witness) j["witness"] = transfers_to_json(*r.witness);
    if (r.blocking) {
        j["blocking"] = move_to_json(*r.blocking);
        j["surplus"] = scalar_json(r.surplus);
        Json gains = Json::array();
        for (const auto& [i, v] : r.gains) gains.push_back({{"agent", i}, {"gain", scalar_json(v)}});
        j["gains"] = gains;
    }
    if (!r.certificate.empty()) {
        Json c = Json::array();
        for (const auto& [m, y] : r.certificate) c.push_back({{"move", move_to_json(m)}, {"multiplier", scalar_json(y)}});
        j["certificate"] = c;
    }
    return j;
}

template <class S>
Json efficiency_to_json(const EfficiencyReport<S>& r) {
    return {{"efficient", r.efficient}, {"total", scalar_json(r.total)}, {"max_total", scalar_json(r.max_total)},
            {"argmax", network_to_json(r.argmax)}, {"candidates", r.candidates}};
}

inline Json sorting_to_json(const SortingReport& r) {
    Json j = {{"holds", r.holds}, {"clamped", r.clamped}};
    if (!r.holds) j["violation"] = {{"i", r.i}, {"j", r.j}, {"q", r.q}, {"i_prime", r.i_prime}, {"j_prime", r.j_prime}};
    return j;
}

inline Json bracket_json(const std::optional<Bracket>& b) {
    if (!b) return nullptr;
    return {to_string(b->lo), to_string(b->hi)};
}

inline Json thresholds_to_json(const ThresholdResult& r) {
    Json pairs = Json::array();
    for (const auto& p : r.pairs)
        pairs.push_back({{"x", to_string(p.x)}, {"x_tilde", to_string(p.x_tilde)}, {"n_x", p.n_x}, {"n_x_tilde", p.n_x_tilde},
                         {"zhat", to_string(p.zhat)}, {"zhat_small", to_string(p.zhat_small)},
                         {"delta_lower", to_string(p.delta_lower)}, {"delta_upper", to_string(p.delta_upper)}});
    return {{"method", r.method},
            {"delta_lower", to_string(r.delta_lower)},
            {"delta_upper", to_string(r.delta_upper)},
            {"delta_lower_approx", r.delta_lower.get_d()},
            {"delta_upper_approx", r.delta_upper.get_d()},
            {"lower_bracket", bracket_json(r.lower_bracket)},
            {"upper_bracket", bracket_json(r.upper_bracket)},
            {"pairs", pairs}};
}

inline Json contracts_to_json(const ContractVector& c) {
    Json out = Json::array();
    for (const auto& [e, v] : c.entries()) out.push_back({{"to", e.first}, {"link", {e.first, e.second}}, {"payment", to_string(v)}});
    return out;
}

inline Json trace_to_json(const PolicyTrace& t) {
    Json steps = Json::array();
    for (const auto& s : t.steps) {
        Json g = Json::array();
        for (const auto& [i, v] : s.member_gains) g.push_back({{"agent", i}, {"gain", to_string(v)}});
        steps.push_back({{"network", network_to_json(s.before)}, {"move", move_to_json(s.move)}, {"gain", to_string(s.gain)},
                         {"member_gains", g}, {"transfers_after", transfers_to_json(s.transfers_after)}});
    }
    Json j = {{"steps", steps},
              {"final_network", network_to_json(t.final_network)},
              {"final_transfers", transfers_to_json(t.final_transfers)},
              {"stable_given_contracts", t.stable_given_contracts},
              {"welfare_before", to_string(t.welfare_before)},
              {"welfare_after", to_string(t.welfare_after)}};
    if (t.final_blocking) j["final_blocking"] = move_to_json(*t.final_blocking);
    return j;
}

inline Json inequalities_json(const std::vector<InequalityCheck>& v) {
    Json out = Json::array();
    for (const auto& c : v)
        out.push_back({{"name", c.name}, {"lhs", to_string(c.lhs)}, {"rhs", to_string(c.rhs)}, {"strict", c.strict}, {"holds", c.holds}});
    return out;
}

inline Json star_to_json(const StarReport& r) {
    Json j = {{"star", network_to_json(r.star.net)},
              {"center", r.star.center},
              {"tie_break", r.star.tie_break},
              {"structural", inequalities_json(r.structural)},
              {"transfer", inequalities_json(r.transfer)},
              {"sufficient", inequalities_json(r.sufficient)},
              {"all_pass", r.all_pass}};
    j["witness"] = r.witness ? transfers_to_json(*r.witness) : Json(nullptr);
    return j;
}

inline Json corollaries_to_json(const StarCorollaries& c) {
    Json j = {{"pairwise_stable", c.pairwise_stable},
              {"inefficient", c.inefficient},
              {"sorting_in_type", c.sorting_in_type},
              {"degree_monotonic", c.degree_monotonic},
              {"decay_monotonic", c.decay_monotonic}};
    j["better_network"] = c.better ? network_to_json(*c.better) : Json(nullptr);
    return j;
}

inline Json profile_to_json(const LocalTreeProfile& p) {
    return {{"n", p.n}, {"kappa", p.kappa}, {"r", p.r}, {"deficiency", p.deficiency}, {"histograms", p.hist}};
}

}  // namespace homonet
