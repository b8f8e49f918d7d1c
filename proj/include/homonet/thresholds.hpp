#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "homonet/game.hpp"
#include "homonet/localtree.hpp"
#include "homonet/network.hpp"
#include "homonet/rational.hpp"
#include "homonet/stability.hpp"

namespace homonet {

struct Bracket {
    Rational lo, hi;
};

struct PairThreshold {
    Rational x, x_tilde;
    int n_x = 0, n_x_tilde = 0;
    Rational zhat, zhat_small, delta_lower, delta_upper;
};

struct ThresholdResult {
    Rational delta_lower, delta_upper;
    std::string method;  // closed-form-hyperbolic, closed-form-example, empirical-bisection, closed-form-exact-tree
    std::vector<PairThreshold> pairs;
    std::optional<Bracket> lower_bracket, upper_bracket;
};

inline Rational zhat(const Rational& Z_xx, const Rational& Z_yy, const Rational& Z_xy) {
    if (sign(Z_xy) == 0) throw std::invalid_argument("zero cross value");
    return (Z_xx + Z_yy) / (2 * Z_xy) - 1;
}

// z(smaller population type, larger population type) / Z(x, x~). With equal
// populations the statistic only ever multiplies |n_x - n_x~| = 0, so 0 is returned.
inline Rational zhat_small(const GameInstance& g, const Rational& x, const Rational& y) {
    int nx = g.population(x), ny = g.population(y);
    Rational Zxy = g.Zlevels(x, y);
    if (sign(Zxy) == 0) throw std::invalid_argument("zero cross value");
    if (nx == ny) return 0;
    const Rational& lo = nx < ny ? x : y;
    const Rational& hi = nx < ny ? y : x;
    return g.value.value(lo, hi) / Zxy;
}

inline Rational hyperbolic_lower(const Rational& zh, int nx, int ny) { return zh / (zh + frac(nx * ny, 2)); }

inline Rational hyperbolic_upper(const Rational& zh, const Rational& zs, int nx, int ny) {
    return zh / (zh + std::max(nx, ny) - std::abs(nx - ny) * zs);
}

inline ThresholdResult hyperbolic_thresholds(const GameInstance& g) {
    if (g.decay.kind != DecayKind::hyperbolic) throw std::invalid_argument("hyperbolic thresholds need hyperbolic decay");
    if (g.cost.kind != CostKind::quota || g.cost.kappa < 2)
        throw std::invalid_argument("singular degree quota: need a quota kappa >= 2");
    auto ls = g.levels();
    for (const auto& x : ls)
        if (g.population(x) <= g.cost.kappa)
            throw std::invalid_argument("type " + to_string(x) + " not self-sufficient: n_x = " + std::to_string(g.population(x)) +
                                        " <= kappa = " + std::to_string(g.cost.kappa));
    if (ls.size() < 2) throw std::invalid_argument("need at least two types");
    ThresholdResult r;
    r.method = "closed-form-hyperbolic";
    bool first = true;
    for (size_t a = 0; a < ls.size(); ++a)
        for (size_t b = a + 1; b < ls.size(); ++b) {
            PairThreshold p;
            p.x = ls[a];
            p.x_tilde = ls[b];
            p.n_x = g.population(p.x);
            p.n_x_tilde = g.population(p.x_tilde);
            p.zhat = zhat(g.Zlevels(p.x, p.x), g.Zlevels(p.x_tilde, p.x_tilde), g.Zlevels(p.x, p.x_tilde));
            p.zhat_small = zhat_small(g, p.x, p.x_tilde);
            p.delta_lower = hyperbolic_lower(p.zhat, p.n_x, p.n_x_tilde);
            p.delta_upper = hyperbolic_upper(p.zhat, p.zhat_small, p.n_x, p.n_x_tilde);
            if (first || p.delta_lower < r.delta_lower) r.delta_lower = p.delta_lower;
            if (first || p.delta_upper < r.delta_upper) r.delta_upper = p.delta_upper;
            first = false;
            r.pairs.push_back(p);
        }
    return r;
}

// Closed forms printed with the two-clique example.
inline ThresholdResult example_thresholds(const Rational& zh) {
    ThresholdResult r;
    r.method = "closed-form-example";
    r.delta_lower = zh / (zh + frac(5, 2));
    r.delta_upper = zh / (zh + 1);
    return r;
}

inline ThresholdResult example_thresholds(const Rational& Z_hh, const Rational& Z_ll, const Rational& Z_hl) {
    auto r = example_thresholds(zhat(Z_hh, Z_ll, Z_hl));
    PairThreshold p;
    p.zhat = zhat(Z_hh, Z_ll, Z_hl);
    p.n_x = p.n_x_tilde = 3;
    p.delta_lower = r.delta_lower;
    p.delta_upper = r.delta_upper;
    r.pairs.push_back(p);
    return r;
}

inline const Rational& bisection_width() {
    static const Rational w(mpz_class(1), mpz_class(1) << 40);
    return w;
}

// Sign change of an objective that is negative at 0 and weakly increasing on
// [0,1): grid check on 64 points, then dyadic bisection to width 2^-40.
inline Bracket find_root(const std::function<Rational(const Rational&)>& f, const std::string& what) {
    const int grid = 64;
    std::vector<Rational> xs, fs;
    for (int k = 0; k < grid; ++k) xs.emplace_back(frac(k, grid));
    // Points approaching 1 catch roots beyond the last grid point.
    for (int e = 7; e <= 40; ++e) {
        Rational p = 1 - Rational(mpz_class(1), mpz_class(1) << e);
        xs.push_back(p);
    }
    for (const auto& x : xs) fs.push_back(f(x));
    for (size_t k = 1; k < fs.size(); ++k)
        if (fs[k] < fs[k - 1]) throw std::domain_error(what + ": objective not monotone in delta");
    if (sign(fs[0]) >= 0) throw std::domain_error(what + ": threshold outside unit interval (objective nonnegative at 0)");
    size_t hi = 0;
    while (hi < fs.size() && sign(fs[hi]) <= 0) ++hi;
    if (hi == fs.size()) throw std::domain_error(what + ": threshold outside unit interval (no sign change)");
    Bracket b{xs[hi - 1], xs[hi]};
    while (b.hi - b.lo > bisection_width()) {
        Rational mid = (b.lo + b.hi) / 2;
        (sign(f(mid)) <= 0 ? b.lo : b.hi) = mid;
    }
    return b;
}

inline Rational bracket_mid(const Bracket& b) { return (b.lo + b.hi) / 2; }

inline GameInstance with_delta(GameInstance g, const Rational& d) {
    g.decay.delta = d;
    return g;
}

// Best zero-transfer joint surplus over pair moves that add one cross-type link.
inline Rational best_bridge_surplus(const GameInstance& g, const Network& net) {
    Evaluator<Rational> ev(g);
    auto base = ev.utilities(net);
    std::optional<Rational> best;
    enumerate_moves(g, net, 2, 1, [&](const Move& m) {
        if (m.added.size() != 1) return true;
        auto [a, b] = m.added[0];
        if (g.types[a] == g.types[b]) return true;
        Network after = apply_move(net, m);
        Rational s = ev.utility_unchecked(after, a) - base[a] + ev.utility_unchecked(after, b) - base[b];
        if (!best || s > *best) best = s;
        return true;
    });
    if (!best) throw std::invalid_argument("no cross-type pair move available");
    return *best;
}

inline ThresholdResult empirical_thresholds(const GameInstance& g, const Network& sorted, const Network& bridged) {
    ThresholdResult r;
    r.method = "empirical-bisection";
    r.upper_bracket = find_root([&](const Rational& d) { return best_bridge_surplus(with_delta(g, d), sorted); },
                                "stability threshold");
    r.lower_bracket = find_root(
        [&](const Rational& d) -> Rational {
            auto gd = with_delta(g, d);
            return total_utility(gd, bridged) - total_utility(gd, sorted);
        },
        "efficiency threshold");
    r.delta_lower = bracket_mid(*r.lower_bracket);
    r.delta_upper = bracket_mid(*r.upper_bracket);
    return r;
}

// Symmetric link values assumed: z = Z/2 within and across types.
struct ExactTreeObjectives {
    std::function<Rational(const Rational&)> pairwise, aggregate;
};

inline ExactTreeObjectives exact_tree_objectives(const LocalTreeProfile& p, const Rational& Z_xx, const Rational& Z_yy,
                                                 const Rational& Z_xy, DecayKind kind = DecayKind::constant) {
    require_exact(p);
    ExactTreeObjectives o;
    o.pairwise = [=](const Rational& d) -> Rational {
        Rational gain = closed_form_gain(p, d, Z_xy, GainVariant::focal_pairwise, 0, kind);
        return gain - closed_form_loss(p, d, Z_xx / 2, 0, kind) - closed_form_loss(p, d, Z_yy / 2, 0, kind);
    };
    o.aggregate = [=](const Rational& d) -> Rational {
        Rational gain = closed_form_gain(p, d, Z_xy, GainVariant::aggregate, 0, kind);
        return gain - closed_form_loss(p, d, Z_xx / 2, -1, kind) - closed_form_loss(p, d, Z_yy / 2, -1, kind);
    };
    return o;
}

inline ThresholdResult exact_tree_thresholds(const LocalTreeProfile& p, const Rational& Z_xx, const Rational& Z_yy,
                                             const Rational& Z_xy, DecayKind kind = DecayKind::constant) {
    auto o = exact_tree_objectives(p, Z_xx, Z_yy, Z_xy, kind);
    ThresholdResult r;
    r.method = "closed-form-exact-tree";
    r.upper_bracket = find_root(o.pairwise, "stability threshold");
    r.lower_bracket = find_root(o.aggregate, "efficiency threshold");
    r.delta_lower = bracket_mid(*r.lower_bracket);
    r.delta_upper = bracket_mid(*r.upper_bracket);
    PairThreshold row;
    row.n_x = row.n_x_tilde = p.n;
    row.zhat = zhat(Z_xx, Z_yy, Z_xy);
    row.delta_lower = r.delta_lower;
    row.delta_upper = r.delta_upper;
    r.pairs.push_back(row);
    return r;
}

enum class SortedConstant {
    printed,  // (k-1) d / (1 - (k-1) d)
    summed    // k / (1 - (k-1) d), direct sum of k (k-1)^{l-1} d^{l-1}
};

struct MixingReport {
    Rational sorted, mixed, penalty;
};

inline MixingReport mixing_penalty(const Rational& Z_xx, const Rational& Z_yy, const Rational& Z_xy, int kappa,
                                   const Rational& delta, int n_x, int n_y, const Rational& omega,
                                   SortedConstant norm = SortedConstant::printed) {
    if (kappa > 1 && delta * (kappa - 1) >= 1) throw std::domain_error("asymptotic independence needs delta < 1/(kappa-1)");
    if (n_x + n_y <= 0) throw std::invalid_argument("empty populations");
    Rational k1 = kappa - 1;
    Rational c = norm == SortedConstant::printed ? Rational(k1 * delta / (1 - k1 * delta)) : Rational(kappa / (1 - k1 * delta));
    Rational avg_same = (n_x * (Z_xx / 2) + n_y * (Z_yy / 2)) / Rational(n_x + n_y);
    MixingReport m;
    m.sorted = c * avg_same;
    Rational wedge = Z_xx + Z_yy - 2 * Z_xy;
    m.mixed = m.sorted - frac(1, 2) * (n_x * omega / Rational(n_x + n_y)) * wedge;
    m.penalty = m.sorted - m.mixed;
    return m;
}

struct SweepRow {
    int n_x = 0, n_y = 0, kappa = 0;
    Rational zhat, delta_lower, delta_upper;
    std::string method;
};

struct SweepSpec {
    std::vector<std::pair<int, int>> populations;
    std::vector<int> kappas{2};
    std::vector<Rational> zhats;
    Rational zhat_small = frac(1, 2);  // z(min, max) / Z under symmetric values
};

inline std::vector<SweepRow> sweep(const SweepSpec& s) {
    if (s.populations.empty() || s.kappas.empty() || s.zhats.empty()) throw std::invalid_argument("empty sweep range");
    std::vector<SweepRow> rows;
    for (const auto& zh : s.zhats)
        for (int k : s.kappas)
            for (auto [nx, ny] : s.populations) {
                SweepRow r;
                r.n_x = nx;
                r.n_y = ny;
                r.kappa = k;
                r.zhat = zh;
                r.delta_lower = hyperbolic_lower(zh, nx, ny);
                r.delta_upper = hyperbolic_upper(zh, nx == ny ? Rational(0) : s.zhat_small, nx, ny);
                r.method = "closed-form-hyperbolic";
                rows.push_back(r);
            }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream o;
    o << "n_x,n_y,kappa,zhat,delta_lower,delta_upper,method\n";
    for (const auto& r : rows)
        o << r.n_x << ',' << r.n_y << ',' << r.kappa << ',' << to_string(r.zhat) << ',' << to_string(r.delta_lower) << ','
          << to_string(r.delta_upper) << ',' << r.method << '\n';
    return o.str();
}

// Log-log chart of both thresholds against n_x, one pair of polylines per zhat.
inline std::string sweep_svg(const std::vector<SweepRow>& rows) {
    const double W = 640, H = 420, L = 60, R = 20, T = 20, B = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& r : rows) {
        double x = std::log10(static_cast<double>(r.n_x));
        for (const auto& v : {r.delta_lower, r.delta_upper}) {
            double y = v.get_d();
            if (y <= 0) continue;
            xmin = std::min(xmin, x), xmax = std::max(xmax, x);
            ymin = std::min(ymin, std::log10(y)), ymax = std::max(ymax, std::log10(y));
        }
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">log10 n_x</text>\n";
    o << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2 << ")\" text-anchor=\"middle\">log10 delta</text>\n";
    std::vector<Rational> zs;
    for (const auto& r : rows)
        if (std::find(zs.begin(), zs.end(), r.zhat) == zs.end()) zs.push_back(r.zhat);
    for (const auto& zh : zs)
        for (int which = 0; which < 2; ++which) {
            o << "<polyline fill=\"none\" stroke=\"" << (which ? "firebrick" : "steelblue") << "\" points=\"";
            for (const auto& r : rows) {
                if (r.zhat != zh) continue;
                double y = (which ? r.delta_upper : r.delta_lower).get_d();
                if (y <= 0) continue;
                o << px(std::log10(static_cast<double>(r.n_x))) << ',' << py(std::log10(y)) << ' ';
            }
            o << "\"><title>" << (which ? "delta_upper" : "delta_lower") << " zhat=" << to_string(zh) << "</title></polyline>\n";
        }
    o << "</svg>\n";
    return o.str();
}

}  // namespace homonet
