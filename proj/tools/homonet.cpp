#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "homonet/json_io.hpp"
#include "homonet/localtree.hpp"
#include "homonet/metrics.hpp"
#include "homonet/policy.hpp"
#include "homonet/stability.hpp"
#include "homonet/thresholds.hpp"
#include "replicate.hpp"

using namespace homonet;

namespace {

constexpr int kOk = 0, kFailure = 1, kUsage = 2, kNegative = 3, kUnknown = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const Json& j, const std::string& path) {
    std::string text = j.dump(2) + "\n";
    if (path.empty())
        std::cout << text;
    else
        write_text(path, text);
}

std::vector<int> parse_ints(const std::string& s, char sep) {
    std::vector<int> out;
    std::string cur;
    for (char c : s + sep) {
        if (c == sep) {
            if (cur.empty()) throw UsageError("bad integer list: " + s);
            out.push_back(std::stoi(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

std::vector<Rational> parse_rationals(const std::string& s) {
    std::vector<Rational> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            out.push_back(parse_rational(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

int threads_from_env() {
    const char* v = std::getenv("HOMONET_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    long t = std::strtol(v, &end, 10);
    if (*end || t < 1) throw UsageError(std::string("HOMONET_THREADS must be a positive integer, got \"") + v + "\"");
    return static_cast<int>(t);
}

int verdict_code(Verdict v) {
    switch (v) {
        case Verdict::stable: return kOk;
        case Verdict::unstable: return kNegative;
        case Verdict::unknown_at_bound: return kUnknown;
    }
    return kFailure;
}

GameInstance instance_with(const std::string& path, const std::optional<std::string>& delta) {
    auto g = load_instance_file(path);
    if (delta) {
        g.decay.delta = parse_rational(*delta);
        validate(g);
    }
    return g;
}

template <class S>
int run_stability(const GameInstance& g, const Network& net, const std::string& notion, int max_coalition, int max_adds,
                  long budget, int max_agents, const std::string& out) {
    StabilityReport<S> rep;
    if (notion == "pairwise") {
        PairwiseOptions opt;
        opt.max_agents = max_agents;
        rep = pairwise_nash_stable<S>(g, net, opt);
    } else if (notion == "strong") {
        StrongOptions opt;
        if (max_agents >= 0) opt.pairwise.max_agents = opt.efficiency.max_agents = max_agents;
        int mc = max_coalition > 0 ? max_coalition : net.n();
        int ma = max_adds > 0 ? max_adds : net.n() * (net.n() - 1) / 2;
        rep = strongly_stable<S>(g, net, SearchBounds{mc, ma, budget, false}, opt);
    } else {
        throw UsageError("unknown notion: " + notion);
    }
    Json j = stability_to_json(rep);
    j["notion"] = notion;
    j["arithmetic"] = Num<S>::exact ? "exact" : "float";
    emit(j, out);
    return verdict_code(rep.verdict);
}

template <class S>
int run_efficiency(const GameInstance& g, const Network& net, const std::string& candidates, int max_agents, const std::string& out) {
    std::optional<std::vector<Network>> cands;
    if (!candidates.empty()) {
        Json j = parse_json(read_text(candidates), candidates);
        if (!j.contains("networks")) throw ParseError(candidates + ": need a \"networks\" array");
        cands.emplace();
        for (const auto& e : j.at("networks")) cands->push_back(network_from_json(e, candidates));
    }
    EfficiencyOptions opt;
    opt.max_agents = max_agents;
    auto rep = is_efficient<S>(g, net, cands, opt);
    Json j = efficiency_to_json(rep);
    j["arithmetic"] = Num<S>::exact ? "exact" : "float";
    emit(j, out);
    return rep.efficient ? kOk : kNegative;
}

Json analyze(const GameInstance& g, const Network& net) {
    Json j;
    j["network"] = network_to_json(net);
    j["sorting_in_type"] = sorting_to_json(sorting_in_type(g, net));
    j["sorting_in_degree"] = sorting_to_json(sorting_in_degree(g, net));
    j["perfectly_sorted"] = is_perfectly_sorted(g, net);
    j["locally_connected_sorted"] = is_locally_connected_sorted(g, net);
    j["degree_monotonic"] = degree_monotonic(g, net);
    if (g.cost.kind == CostKind::quota) j["no_link_surplus"] = no_link_surplus(g, net);
    if (g.decay.kind != DecayKind::hyperbolic) j["decay_monotonic"] = decay_monotonic(g, net);
    if (net.num_edges() > 0) j["same_type_link_share"] = to_string(same_type_link_share(g, net));
    Evaluator<Rational> ev(g);
    Json u = Json::array();
    for (const auto& x : ev.utilities(net)) u.push_back(to_string(x));
    j["utilities"] = u;
    j["total"] = to_string(ev.total(net));
    return j;
}

void print_table(const Json& j) {
    auto row = [](const std::string& k, const std::string& v) { std::cout << "  " << k << std::string(k.size() < 26 ? 26 - k.size() : 1, ' ') << v << "\n"; };
    for (const char* k : {"perfectly_sorted", "locally_connected_sorted", "degree_monotonic", "no_link_surplus", "decay_monotonic"})
        if (j.contains(k)) row(k, j.at(k).get<bool>() ? "yes" : "no");
    row("sorting_in_type", j["sorting_in_type"]["holds"].get<bool>() ? "yes" : "no");
    row("sorting_in_degree", j["sorting_in_degree"]["holds"].get<bool>() ? "yes" : "no");
    if (j.contains("same_type_link_share")) row("same_type_link_share", j["same_type_link_share"].get<std::string>());
    row("total utility", j["total"].get<std::string>());
}

Network sorted_for(const GameInstance& g, const std::string& network_path) {
    if (!network_path.empty()) return load_network_file(network_path);
    return build_sorted_network(g, SortedBuilder::regular);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-sided network formation with types: stability, efficiency, thresholds and policy"};
    app.require_subcommand(1, 1);
    app.footer("Environment: HOMONET_THREADS caps worker threads (default 1).\n"
               "Exit codes: 0 ok/stable, 1 computation error, 2 usage or input error, 3 unstable/inefficient, 4 unknown at bound.");

    std::string instance, network, out, candidates;
    std::optional<std::string> delta;
    bool use_float = false;
    int max_coalition = 0, max_adds = 0, max_agents = -1;
    long budget = -1;

    auto add_instance = [&](CLI::App* c, bool required = true) {
        auto* o = c->add_option("--instance", instance, "instance JSON file")->check(CLI::ExistingFile);
        if (required) o->required();
        c->add_option("--delta", delta, "override decay parameter (p/q or decimal)");
        c->add_option("--json", out, "write JSON here instead of stdout");
    };
    auto add_arith = [&](CLI::App* c) {
        c->add_flag("--float", use_float, "double arithmetic with tolerance 1e-9");
        c->add_flag("--exact,!--no-exact", [&](int64_t n) { use_float = n < 0; }, "exact rational arithmetic (default)");
    };

    auto* a_an = app.add_subcommand("analyze", "predicate table for a network");
    add_instance(a_an);
    a_an->add_option("--network", network, "network JSON file")->required()->check(CLI::ExistingFile);

    std::string notion = "pairwise";
    auto* a_st = app.add_subcommand("stability", "pairwise-Nash or strong stability verdict");
    add_instance(a_st);
    add_arith(a_st);
    a_st->add_option("--network", network, "network JSON file")->required()->check(CLI::ExistingFile);
    a_st->add_option("--notion", notion, "pairwise or strong")->check(CLI::IsMember({"pairwise", "strong"}));
    a_st->add_option("--max-coalition", max_coalition, "largest coalition for strong stability (default n)");
    a_st->add_option("--max-adds", max_adds, "most links a coalition may add (default all)");
    a_st->add_option("--budget", budget, "cap on enumerated moves");
    a_st->add_option("--max-agents", max_agents, "raise the exact enumeration cap");

    auto* a_ef = app.add_subcommand("efficiency", "efficiency against all feasible networks or a candidate set");
    add_instance(a_ef);
    add_arith(a_ef);
    a_ef->add_option("--network", network, "network JSON file")->required()->check(CLI::ExistingFile);
    a_ef->add_option("--candidates", candidates, "JSON file {\"networks\": [...]}")->check(CLI::ExistingFile);
    a_ef->add_option("--max-agents", max_agents, "raise the enumeration cap");

    std::string method = "hyperbolic", bridges_s, kind = "clique";
    int side = 3;
    auto* a_th = app.add_subcommand("thresholds", "delta thresholds for one instance");
    add_instance(a_th);
    a_th->add_option("--method", method, "hyperbolic, example, empirical or exact-tree")
        ->check(CLI::IsMember({"hyperbolic", "example", "empirical", "exact-tree"}));
    a_th->add_option("--network", network, "sorted network for empirical (default: regular construction)");
    a_th->add_option("--bridges", bridges_s, "i,j,i2,j2 for empirical");
    a_th->add_option("--decay-kind", kind, "exact-tree decay: constant or hyperbolic");

    std::string kappas_s = "2", n_s = "3:20", zhat_s = "1", csv, svg;
    auto* a_sw = app.add_subcommand("sweep", "hyperbolic closed-form thresholds over a grid");
    a_sw->add_option("--kappa", kappas_s, "comma-separated quotas");
    a_sw->add_option("--n", n_s, "population range a:b (equal sides)");
    a_sw->add_option("--zhat", zhat_s, "comma-separated zhat values");
    a_sw->add_option("--csv", csv, "write CSV here (default stdout)");
    a_sw->add_option("--svg", svg, "write SVG plot here");

    int cn = 0, ck = 0;
    bool profile = false;
    long search_budget = 1000000;
    auto* a_co = app.add_subcommand("construct", "regular networks and local trees");
    a_co->add_option("--n", cn, "agents")->required();
    a_co->add_option("--kappa", ck, "degree");
    a_co->add_option("--kind", kind, "regular, cycle, clique, footnote, petersen or search")
        ->check(CLI::IsMember({"regular", "cycle", "clique", "footnote", "petersen", "search"}));
    a_co->add_flag("--profile", profile, "add the local-tree check and distance histograms");
    a_co->add_option("--budget", search_budget, "node budget for search");
    a_co->add_option("--json", out, "write JSON here instead of stdout");

    std::string mode = "trace";
    auto* a_po = app.add_subcommand("policy", "link-contingent contracts and the implementing trace");
    add_instance(a_po);
    a_po->add_option("--bridges", bridges_s, "i,j,i2,j2: links ij and i2 j2 form, i i2 and j j2 drop")->required();
    a_po->add_option("--network", network, "sorted network (default: regular construction)");
    a_po->add_option("--mode", mode, "trace or literal")->check(CLI::IsMember({"trace", "literal"}));

    bool corollaries = false;
    auto* a_sr = app.add_subcommand("star", "low-value sponsored star inequality report");
    add_instance(a_sr);
    a_sr->add_flag("--corollaries", corollaries, "also run the five corollary verdicts");

    std::string target, zbar = "10", zlow = "6", zcross = "7";
    auto* a_re = app.add_subcommand("replicate", "run a named replication scenario");
    a_re->add_option("name", target, "scenario name")->required()->check(CLI::IsMember(replicate::targets()));
    a_re->add_option("--zbar", zbar, "Z(high,high)");
    a_re->add_option("--zlow", zlow, "Z(low,low)");
    a_re->add_option("--zcross", zcross, "Z(high,low)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        threads_from_env();
        if (*a_an) {
            auto g = instance_with(instance, delta);
            auto j = analyze(g, load_network_file(network));
            if (out.empty())
                print_table(j);
            else
                emit(j, out);
            return kOk;
        }
        if (*a_st) {
            auto g = instance_with(instance, delta);
            auto net = load_network_file(network);
            return use_float ? run_stability<double>(g, net, notion, max_coalition, max_adds, budget, max_agents, out)
                             : run_stability<Rational>(g, net, notion, max_coalition, max_adds, budget, max_agents, out);
        }
        if (*a_ef) {
            auto g = instance_with(instance, delta);
            auto net = load_network_file(network);
            return use_float ? run_efficiency<double>(g, net, candidates, max_agents, out)
                             : run_efficiency<Rational>(g, net, candidates, max_agents, out);
        }
        if (*a_th) {
            auto g = instance_with(instance, delta);
            ThresholdResult r;
            auto ls = g.levels();
            if (method == "hyperbolic") {
                r = hyperbolic_thresholds(g);
            } else if (method == "example") {
                if (ls.size() != 2) throw UsageError("example closed forms need two types");
                r = example_thresholds(g.Zlevels(ls[0], ls[0]), g.Zlevels(ls[1], ls[1]), g.Zlevels(ls[0], ls[1]));
            } else if (method == "empirical") {
                if (bridges_s.empty()) throw UsageError("empirical thresholds need --bridges");
                auto b = parse_ints(bridges_s, ',');
                if (b.size() != 4) throw UsageError("--bridges takes four agents");
                Network s = sorted_for(g, network);
                Network br = detail::bridged_target(s, Bridges{b[0], b[1], b[2], b[3]});
                r = empirical_thresholds(g, s, br);
            } else {
                if (ls.size() != 2 || g.cost.kind != CostKind::quota) throw UsageError("exact-tree thresholds need two types and a quota");
                int nx = g.population(ls[0]);
                if (g.population(ls[1]) != nx) throw UsageError("exact-tree thresholds need equal populations");
                DecayKind dk = kind == "hyperbolic" ? DecayKind::hyperbolic : DecayKind::constant;
                r = exact_tree_thresholds(LocalTreeProfile::ideal(nx, g.cost.kappa), g.Zlevels(ls[0], ls[0]),
                                          g.Zlevels(ls[1], ls[1]), g.Zlevels(ls[0], ls[1]), dk);
            }
            emit(thresholds_to_json(r), out);
            return kOk;
        }
        if (*a_sw) {
            SweepSpec s;
            s.kappas = parse_ints(kappas_s, ',');
            auto range = parse_ints(n_s, ':');
            if (range.size() != 2 || range[0] > range[1]) throw UsageError("--n takes a:b with a <= b");
            for (int n = range[0]; n <= range[1]; ++n) s.populations.emplace_back(n, n);
            s.zhats = parse_rationals(zhat_s);
            auto rows = sweep(s);
            if (csv.empty())
                std::cout << sweep_csv(rows);
            else
                write_text(csv, sweep_csv(rows));
            if (!svg.empty()) write_text(svg, sweep_svg(rows));
            return kOk;
        }
        if (*a_co) {
            Network net;
            if (kind == "regular") net = build_regular_network(cn, ck);
            else if (kind == "cycle") net = build_canonical_local_tree(CanonicalKind::cycle, cn);
            else if (kind == "clique") net = build_canonical_local_tree(CanonicalKind::clique, cn);
            else if (kind == "footnote") net = build_canonical_local_tree(CanonicalKind::footnote_10_3, cn);
            else if (kind == "petersen") net = build_canonical_local_tree(CanonicalKind::petersen, cn);
            else {
                auto s = search_local_tree(cn, ck, search_budget);
                if (!s.found) throw std::runtime_error(s.exhausted_budget ? "search budget exhausted" : "no local tree exists");
                net = *s.found;
            }
            Json j = network_to_json(net);
            if (profile) {
                int k = net.degree(0);
                auto c = is_local_tree(net, k);
                j["local_tree"] = c.holds;
                if (!c.holds) j["reason"] = c.reason;
                j["profile"] = profile_to_json(c.profile);
                if (c.holds) j["symmetric_losses"] = has_symmetric_losses(net, k);
            }
            emit(j, out);
            return kOk;
        }
        if (*a_po) {
            auto g = instance_with(instance, delta);
            auto b = parse_ints(bridges_s, ',');
            if (b.size() != 4) throw UsageError("--bridges takes four agents");
            Network s = sorted_for(g, network);
            auto pw = pairwise_nash_stable(g, s);
            TransferVector<Rational> tau0 = pw.witness ? *pw.witness : TransferVector<Rational>{};
            auto d = design_contracts(g, s, tau0, Bridges{b[0], b[1], b[2], b[3]},
                                      mode == "trace" ? ContractMode::trace : ContractMode::literal);
            auto tr = simulate_implementable(g, s, tau0, d.contracts);
            Json j = trace_to_json(tr);
            j["contracts"] = contracts_to_json(d.contracts);
            j["per_bridge_total"] = to_string(d.total_per_bridge);
            j["interval"] = {{"lower", to_string(d.lo)}, {"upper", d.hi_unbounded ? Json(nullptr) : Json(to_string(d.hi))}};
            j["mode"] = mode;
            j["sorted_stable_without_contracts"] = to_string(pw.verdict);
            emit(j, out);
            return tr.stable_given_contracts ? kOk : kNegative;
        }
        if (*a_sr) {
            auto g = load_instance_file(instance);
            Rational d = delta ? parse_rational(*delta) : g.decay.delta;
            auto r = star_conditions(g, d);
            Json j = star_to_json(r);
            j["delta"] = to_string(d);
            if (corollaries) j["corollaries"] = corollaries_to_json(verify_star_corollaries(g, d));
            emit(j, out);
            return r.all_pass ? kOk : kNegative;
        }
        if (*a_re) {
            auto rep = replicate::run(target, parse_rational(zbar), parse_rational(zlow), parse_rational(zcross));
            std::cout << "replicate " << target << "\n" << rep.out.str();
            std::cout << rep.passed << " passed, " << rep.failed << " failed\n";
            return rep.failed ? kNegative : kOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const UnsortedTypes& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
