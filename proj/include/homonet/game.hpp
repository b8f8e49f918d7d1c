#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "homonet/network.hpp"
#include "homonet/rational.hpp"

namespace homonet {

enum class DecayKind { none, constant, hyperbolic };

struct DecayModel {
    DecayKind kind = DecayKind::none;
    Rational delta = 0;
};

enum class CostKind { quota, convex, linear };

struct CostRegime {
    CostKind kind = CostKind::quota;
    int kappa = 0;
    std::vector<Rational> table;  // c(0), c(1), ... for convex
    Rational c = 0;               // per-link cost for linear

    static CostRegime quota(int k) { return {CostKind::quota, k, {}, 0}; }
    static CostRegime convex(std::vector<Rational> t) { return {CostKind::convex, 0, std::move(t), 0}; }
    static CostRegime linear(Rational c) { return {CostKind::linear, 0, {}, std::move(c)}; }

    int max_degree(int n) const { return kind == CostKind::quota ? std::min(kappa, n - 1) : n - 1; }

    Rational cost(int k) const {
        switch (kind) {
            case CostKind::quota: return 0;
            case CostKind::linear: return c * k;
            case CostKind::convex:
                if (k >= static_cast<int>(table.size())) throw std::out_of_range("cost table too short for degree " + std::to_string(k));
                return table[k];
        }
        return 0;
    }
};

enum class ValueKind { table, product, separable };

struct ValueModel {
    ValueKind kind = ValueKind::product;
    std::vector<Rational> levels;         // table kind, descending
    std::vector<std::vector<Rational>> z;  // z[a][b] = z(levels[a], levels[b])
    Rational a = 0, b = 0;                 // separable: z(x,y) = a x + b y

    Rational value(const Rational& x, const Rational& y) const {
        switch (kind) {
            case ValueKind::product: return x * y;
            case ValueKind::separable: return a * x + b * y;
            case ValueKind::table: {
                size_t ia = index_of(x), ib = index_of(y);
                return z[ia][ib];
            }
        }
        return 0;
    }

    size_t index_of(const Rational& x) const {
        for (size_t i = 0; i < levels.size(); ++i)
            if (levels[i] == x) return i;
        throw std::invalid_argument("type level " + to_string(x) + " missing from value table");
    }
};

struct GameInstance {
    std::vector<Rational> types;
    ValueModel value;
    CostRegime cost;
    DecayModel decay;

    int n() const { return static_cast<int>(types.size()); }

    // Distinct realized types, descending.
    std::vector<Rational> levels() const {
        std::vector<Rational> out;
        for (const auto& t : types)
            if (out.empty() || out.back() != t) out.push_back(t);
        return out;
    }
    int level_of(int i) const {
        auto ls = levels();
        return static_cast<int>(std::find(ls.begin(), ls.end(), types[i]) - ls.begin());
    }
    int population(const Rational& x) const { return static_cast<int>(std::count(types.begin(), types.end(), x)); }

    Rational z(int i, int j) const { return value.value(types[i], types[j]); }
    Rational Z(int i, int j) const { return z(i, j) + z(j, i); }
    Rational Zlevels(const Rational& x, const Rational& y) const { return value.value(x, y) + value.value(y, x); }
};

struct TypeOrder {
    std::vector<Rational> sorted;
    std::vector<int> permutation;  // sorted[k] = original[permutation[k]]
};

// Stable descending sort, ties keep original id order.
inline TypeOrder canonical_type_order(const std::vector<Rational>& types) {
    TypeOrder out;
    out.permutation.resize(types.size());
    std::iota(out.permutation.begin(), out.permutation.end(), 0);
    std::stable_sort(out.permutation.begin(), out.permutation.end(), [&](int a, int b) { return types[a] > types[b]; });
    for (int p : out.permutation) out.sorted.push_back(types[p]);
    return out;
}

class UnsortedTypes : public std::invalid_argument {
public:
    explicit UnsortedTypes(TypeOrder order)
        : std::invalid_argument(describe(order)), order_(std::move(order)) {}
    const TypeOrder& order() const { return order_; }

private:
    static std::string describe(const TypeOrder& o) {
        std::ostringstream s;
        s << "types not sorted descending; canonical order [";
        for (size_t k = 0; k < o.sorted.size(); ++k) s << (k ? "," : "") << to_string(o.sorted[k]);
        s << "] from original ids [";
        for (size_t k = 0; k < o.permutation.size(); ++k) s << (k ? "," : "") << o.permutation[k];
        s << "]";
        return s.str();
    }
    TypeOrder order_;
};

inline void validate(const GameInstance& g) {
    if (g.n() < 1) throw std::invalid_argument("instance needs at least one agent");
    if (g.n() > kMaxAgents) throw std::invalid_argument("too many agents");
    if (!std::is_sorted(g.types.begin(), g.types.end(), std::greater<>())) throw UnsortedTypes(canonical_type_order(g.types));
    auto ls = g.levels();
    if (g.value.kind == ValueKind::table) {
        const auto& v = g.value;
        if (v.z.size() != v.levels.size()) throw std::invalid_argument("value table shape mismatch");
        for (const auto& row : v.z)
            if (row.size() != v.levels.size()) throw std::invalid_argument("value table shape mismatch");
        for (const auto& x : ls) v.index_of(x);
    }
    for (const auto& x : ls)
        for (const auto& y : ls)
            if (g.value.value(x, y) <= 0) throw std::invalid_argument("nonpositive link value");
    const auto& c = g.cost;
    switch (c.kind) {
        case CostKind::quota:
            if (c.kappa < 1) throw std::invalid_argument("degree quota must be positive");
            break;
        case CostKind::linear:
            if (c.c <= 0) throw std::invalid_argument("linear cost must be positive");
            break;
        case CostKind::convex: {
            if (static_cast<int>(c.table.size()) < g.n()) throw std::invalid_argument("cost table needs entries for degrees 0..n-1");
            if (c.table[0] != 0) throw std::invalid_argument("cost table must start at 0");
            for (size_t k = 1; k < c.table.size(); ++k)
                if (c.table[k] <= c.table[k - 1]) throw std::invalid_argument("not strictly increasing");
            for (size_t k = 2; k < c.table.size(); ++k)
                if (c.table[k] - 2 * c.table[k - 1] + c.table[k - 2] <= 0) throw std::invalid_argument("not strictly convex");
            break;
        }
    }
    if (g.decay.delta < 0 || g.decay.delta >= 1) throw std::invalid_argument("delta must lie in [0,1)");
}

// Weight of a connection at the given distance; kInf means unreachable.
template <class S = Rational>
S link_weight(const DecayModel& d, int distance) {
    if (distance == 0) throw std::invalid_argument("distance 0 has no weight");
    if (distance == kInf) return S(0);
    if (distance == 1) return S(1);
    S delta = Num<S>::from(d.delta);
    switch (d.kind) {
        case DecayKind::none: return S(0);
        case DecayKind::constant: return Num<S>::pow(delta, distance - 1);
        case DecayKind::hyperbolic: return delta;
    }
    return S(0);
}

class QuotaViolation : public std::invalid_argument {
public:
    QuotaViolation(int kappa, std::vector<int> agents)
        : std::invalid_argument(describe(kappa, agents)), agents_(std::move(agents)) {}
    const std::vector<int>& agents() const { return agents_; }

private:
    static std::string describe(int kappa, const std::vector<int>& a) {
        std::string s = "degree quota " + std::to_string(kappa) + " exceeded by agents";
        for (int i : a) s += " " + std::to_string(i);
        return s;
    }
    std::vector<int> agents_;
};

// Precomputed weights, level values and costs for fast utility evaluation.
template <class S = Rational>
class Evaluator {
public:
    explicit Evaluator(const GameInstance& g) : g_(&g), n_(g.n()) {
        auto ls = g.levels();
        nl_ = static_cast<int>(ls.size());
        level_.resize(n_);
        lmask_.assign(nl_, 0);
        for (int i = 0; i < n_; ++i) {
            level_[i] = g.level_of(i);
            lmask_[level_[i]] |= uint32_t{1} << i;
        }
        zl_.assign(nl_, std::vector<S>(nl_));
        for (int a = 0; a < nl_; ++a)
            for (int b = 0; b < nl_; ++b) zl_[a][b] = Num<S>::from(g.value.value(ls[a], ls[b]));
        w_.assign(n_ + 1, S(0));
        depth_ = 0;
        for (int d = 1; d < std::max(n_, 2); ++d) {
            w_[d] = link_weight<S>(g.decay, d);
            if (sign(w_[d]) != 0) depth_ = d;
        }
        for (int k = 0; k < n_; ++k) cost_.push_back(Num<S>::from(g.cost.cost(k)));
    }

    const GameInstance& instance() const { return *g_; }
    int n() const { return n_; }
    int level(int i) const { return level_[i]; }
    uint32_t level_mask(int l) const { return lmask_[l]; }
    const S& weight(int d) const { return w_[d]; }
    const S& zlevel(int a, int b) const { return zl_[a][b]; }
    const S& z(int i, int j) const { return zl_[level_[i]][level_[j]]; }
    S cost(int k) const { return cost_[k]; }

    S benefit(const Network& net, int i) const {
        S b = 0;
        auto ls = net.layers(i, depth_);
        for (size_t d = 1; d < ls.size(); ++d) {
            S layer = 0;
            for (int l = 0; l < nl_; ++l) {
                int cnt = std::popcount(ls[d] & lmask_[l]);
                if (cnt) layer += zl_[level_[i]][l] * cnt;
            }
            b += w_[d] * layer;
        }
        return b;
    }

    void check_quota(const Network& net) const {
        if (g_->cost.kind != CostKind::quota) return;
        std::vector<int> bad;
        for (int i = 0; i < n_; ++i)
            if (net.degree(i) > g_->cost.kappa) bad.push_back(i);
        if (!bad.empty()) throw QuotaViolation(g_->cost.kappa, bad);
    }

    S utility_unchecked(const Network& net, int i) const { return benefit(net, i) - cost_[net.degree(i)]; }

    S utility(const Network& net, int i) const {
        check_quota(net);
        return utility_unchecked(net, i);
    }

    std::vector<S> utilities(const Network& net) const {
        check_quota(net);
        std::vector<S> u(n_);
        for (int i = 0; i < n_; ++i) u[i] = utility_unchecked(net, i);
        return u;
    }

    S total(const Network& net) const {
        S t = 0;
        for (const auto& u : utilities(net)) t += u;
        return t;
    }

private:
    const GameInstance* g_;
    int n_ = 0, nl_ = 0, depth_ = 0;
    std::vector<int> level_;
    std::vector<uint32_t> lmask_;
    std::vector<std::vector<S>> zl_;
    std::vector<S> w_;
    std::vector<S> cost_;
};

template <class S = Rational>
S benefit(const GameInstance& g, const Network& net, int i) {
    return Evaluator<S>(g).benefit(net, i);
}
template <class S = Rational>
S utility(const GameInstance& g, const Network& net, int i) {
    return Evaluator<S>(g).utility(net, i);
}
template <class S = Rational>
S total_utility(const GameInstance& g, const Network& net) {
    return Evaluator<S>(g).total(net);
}

// Antisymmetric transfers stored once per link as tau(a,b) with a < b.
template <class S = Rational>
class TransferVector {
public:
    S get(int i, int j) const {
        auto it = tau_.find(make_edge(i, j));
        if (it == tau_.end()) return S(0);
        return i < j ? it->second : S(-it->second);
    }
    void set(int i, int j, const S& v) { tau_[make_edge(i, j)] = i < j ? v : S(-v); }
    void erase(int i, int j) { tau_.erase(make_edge(i, j)); }
    const std::map<Edge, S>& entries() const { return tau_; }

    void validate(const Network& net) const {
        for (const auto& [e, v] : tau_)
            if (sign(v) != 0 && !net.has_edge(e.first, e.second))
                throw std::invalid_argument("transfer on absent link " + std::to_string(e.first) + "-" + std::to_string(e.second));
    }

    // Net transfer income of agent i over its present links.
    S income(const Network& net, int i) const {
        S t = 0;
        for (int j : net.neighbors(i)) t += get(i, j);
        return t;
    }

private:
    std::map<Edge, S> tau_;
};

template <class S = Rational>
S net_payoff(const GameInstance& g, const Network& net, const TransferVector<S>& tau, int i) {
    tau.validate(net);
    return Evaluator<S>(g).utility(net, i) + tau.income(net, i);
}

struct ValueProperties {
    bool supermodular = false;
    bool monotone = false;
    bool no_modularity = false;
    bool vacuous = false;  // fewer than two realized levels
};

inline ValueProperties check_value_properties(const GameInstance& g) {
    ValueProperties p;
    auto ls = g.levels();
    if (ls.size() < 2) {
        p.supermodular = p.monotone = p.no_modularity = p.vacuous = true;
        return p;
    }
    auto Z = [&](const Rational& x, const Rational& y) { return g.Zlevels(x, y); };
    if (g.value.kind == ValueKind::product) {
        p.supermodular = true;
        p.monotone = std::all_of(ls.begin(), ls.end(), [](const Rational& x) { return x > 0; });
        p.no_modularity = false;
        return p;
    }
    if (g.value.kind == ValueKind::separable) {
        p.supermodular = false;
        p.no_modularity = true;
        p.monotone = g.value.a + g.value.b > 0;
        return p;
    }
    p.supermodular = true;
    for (const auto& x : ls)
        for (const auto& xt : ls)
            for (const auto& y : ls)
                for (const auto& yt : ls)
                    if (x > yt && xt > y && !(Z(x, xt) + Z(y, yt) > Z(x, y) + Z(xt, yt))) p.supermodular = false;
    p.monotone = true;
    p.no_modularity = true;
    for (size_t a = 0; a + 1 < ls.size(); ++a)
        for (const auto& c : ls)
            if (!(Z(ls[a], c) > Z(ls[a + 1], c))) p.monotone = false;
    for (size_t a = 0; a < ls.size(); ++a)
        for (size_t b = a + 1; b < ls.size(); ++b)
            for (const auto& c : ls)
                for (const auto& d : ls)
                    if (Z(ls[a], c) - Z(ls[b], c) != Z(ls[a], d) - Z(ls[b], d)) p.no_modularity = false;
    return p;
}

inline Rational decay_centrality(const GameInstance& g, const Network& net, int i) {
    if (g.decay.kind == DecayKind::hyperbolic) throw std::invalid_argument("decay centrality needs constant decay");
    DecayModel d = g.decay;
    if (d.kind == DecayKind::none) d = {DecayKind::constant, 0};
    Rational s = 0;
    auto dist = net.distances_from(i);
    for (int j = 0; j < net.n(); ++j)
        if (j != i) s += link_weight<Rational>(d, dist[j]);
    return s;
}

// Table model with z(x,y) = z(y,x) = Z(x,y)/2 for the given total values.
inline ValueModel symmetric_table(std::vector<Rational> levels, const std::vector<std::vector<Rational>>& Z) {
    ValueModel v;
    v.kind = ValueKind::table;
    v.levels = std::move(levels);
    v.z = Z;
    for (auto& row : v.z)
        for (auto& e : row) e /= 2;
    return v;
}

}  // namespace homonet
