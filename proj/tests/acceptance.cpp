// Acceptance run: one line per criterion, nonzero exit when any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "atr/bounds.hpp"
#include "atr/eval.hpp"
#include "atr/parser.hpp"
#include "atr/stdlib.hpp"
#include "atr/tcpoly.hpp"
#include "atr/typecheck.hpp"
#include "atr/verify.hpp"
#include "support.hpp"

using namespace atr;
using Words = std::vector<std::string>;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... xs) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, xs...);
    return buf;
}

// ---- 1: typing corpus ------------------------------------------------------

Outcome typing_corpus() {
    auto t0 = Clock::now();
    Outcome o;
    std::size_t accepted = 0, rejected = 0, negatives = 0;
    for (auto& name : program_names()) {
        try {
            check_program(load_program(name));
            ++accepted;
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail += " " + name + " rejected;";
        }
    }
    for (auto& e : std::filesystem::directory_iterator(corpus_dir() / "negative")) {
        if (e.path().extension() != ".atr")
            continue;
        ++negatives;
        std::ifstream in(e.path());
        std::string first;
        std::getline(in, first);
        const std::string key = "-- expect: ";
        std::string want = first.rfind(key, 0) == 0 ? first.substr(key.size()) : "?";
        try {
            check_program(parse_file(e.path()));
            o.pass = false;
            o.detail += " " + e.path().filename().string() + " accepted;";
        } catch (const TypeError& err) {
            if (tag_name(err.tag) == want)
                ++rejected;
            else {
                o.pass = false;
                o.detail += " " + e.path().filename().string() + " got " + tag_name(err.tag) + ";";
            }
        }
    }
    double secs = seconds_since(t0);
    o.pass = o.pass && accepted == 8 && negatives >= 10 && rejected == negatives && secs < 1.0;
    o.detail = fmt("%zu/8 stdlib accepted, %zu/%zu negatives rejected with their tag, %.3fs", accepted, rejected,
                   negatives, secs) +
               o.detail;
    return o;
}

// ---- 2: cost model -----------------------------------------------------------

Outcome cost_model() {
    Outcome o;
    std::size_t exact = 0;
    auto& cases = testing::micro_cases();
    for (auto& m : cases) {
        auto r = eval(parse_term(m.source));
        if (r.is_word && r.word == m.value && r.cost == m.cost)
            ++exact;
        else
            o.detail += fmt(" [%s] measured %llu, hand %llu;", m.source.c_str(),
                            static_cast<unsigned long long>(r.cost), static_cast<unsigned long long>(m.cost));
    }
    o.pass = cases.size() >= 12 && exact == cases.size();
    o.detail = fmt("%zu/%zu micro-terms exact", exact, cases.size()) + o.detail;
    return o;
}

// ---- 3: sorting ----------------------------------------------------------------

Outcome sorting() {
    auto t0 = Clock::now();
    Outcome o;
    struct Sorter {
        const char* name;
        TermPtr term;
    };
    std::vector<Sorter> sorters;
    for (auto name : {"ins_sort", "sel_sort"})
        sorters.push_back({name, check_program(load_program(name)).term});
    Evaluator ev;
    std::size_t lists = 0, failures = 0;
    auto check = [&](const Words& ws) {
        ++lists;
        auto want = testing::sort_by_hand(ws);
        auto in = encode_list(ws);
        for (auto& s : sorters) {
            bool ok = false;
            try {
                ok = decode_list(ev.apply(s.term, {in}).word) == want && reference_sort(ws) == want;
            } catch (const std::exception&) {
            }
            if (!ok && ++failures <= 3)
                o.detail += std::string(" ") + s.name + " wrong on " + (in.empty() ? "-" : in) + ";";
        }
    };
    auto all = all_words(4);
    for (std::size_t words = 0; words <= 4; ++words) {
        std::vector<std::size_t> idx(words, 0);
        for (;;) {
            Words ws;
            for (auto i : idx)
                ws.push_back(all[i]);
            check(ws);
            std::size_t k = words;
            while (k > 0 && ++idx[k - 1] == all.size())
                idx[--k] = 0;
            if (k == 0)
                break;
        }
    }
    testing::Rng rng(2024);
    for (int i = 0; i < 500; ++i)
        check(testing::random_list(rng, 8, 6));
    double secs = seconds_since(t0);
    o.pass = failures == 0 && secs < 60.0;
    o.detail = fmt("%zu lists, 2 sorters, %zu failures, %.1fs", lists, failures, secs) + o.detail;
    return o;
}

// ---- 4 and 5: bounds on sampled runs -----------------------------------------

struct SoundnessRun {
    std::size_t rows = 0, cost_viol = 0, clock_viol = 0, unsupported = 0;
    double secs = 0;
};

SoundnessRun soundness_runs() {
    auto t0 = Clock::now();
    SoundnessRun s;
    for (auto name : {"cons", "head", "tail", "insert", "ins_sort"}) {
        VerifyConfig cfg;
        cfg.program = program_path(name).string();
        cfg.samples = 200;
        cfg.seed = 17;
        auto rep = verify(cfg);
        if (!rep.supported) {
            ++s.unsupported;
            continue;
        }
        for (auto& r : rep.rows) {
            ++s.rows;
            if (!r.cost_ok || !r.pot_ok || !r.error.empty())
                ++s.cost_viol;
            if (!r.clock_ok)
                ++s.clock_viol;
        }
    }
    s.secs = seconds_since(t0);
    return s;
}

// ---- 6: closed-form dominance --------------------------------------------------

TcPolyPtr eps_var(const char* n) { return p_var(n, TcType::base(Label::epsilon())); }

PolyEnv poly_env(const std::map<std::string, Nat>& env) {
    PolyEnv e;
    for (auto& [k, v] : env)
        e[k] = PolyValue::number(v);
    return e;
}

struct Dominance {
    std::size_t instances = 0, violations = 0, disagreements = 0;
};

void dominance_scheme(bool arg_recursion, ArgCase c, testing::Rng& rng, Dominance& d) {
    auto v = eps_var("v"), w = eps_var("w");
    std::vector<TcPolyPtr> vars{v, w};
    for (int i = 0; i < 200; ++i) {
        testing::PhiInstance in;
        in.params = {"v", "w"};
        in.X = p_pair(testing::random_poly(rng, vars, 3), testing::random_poly(rng, vars, 2));
        in.Ys = {p_pair(testing::random_poly(rng, vars, 2), p_monus(v, 1)),
                 p_pair(testing::random_poly(rng, vars, 2),
                        rng() % 2 ? w : p_max2(w, testing::random_poly(rng, {v}, 1)))};
        in.ell = arg_recursion ? 0 : rng() % 3;
        TcPolyPtr z;
        if (arg_recursion) {
            bool orac = c == ArgCase::Oracular;
            auto zt = TcType::base(orac ? Label::parse("bd") : Label::diamond());
            z = p_var("z", zt);
            auto q = testing::random_poly(rng, vars, 2);
            auto r = testing::random_poly(rng, vars, 1);
            auto pot = orac ? p_max2(q, z) : q + p_max2(r, z);
            auto inner = p_pair(testing::random_poly(rng, vars, 1) + z, pot);
            in.Xs = p_pair(testing::random_poly(rng, vars, 1), p_lam("z", zt, inner));
        }
        XiIterator xi{in.params, {v->type, w->type}, {p_pot(in.Ys[0]), p_pot(in.Ys[1])}};
        auto kvar = p_var("Kp", TcType::tally());
        std::map<std::string, Nat> env{{"v", rng() % 7}, {"w", rng() % 7}};
        for (long K = 0; K <= 8; ++K)
            for (std::size_t n = 0; n <= 6; ++n) {
                ++d.instances;
                PolyValuePtr lib;
                TcPolyPtr closed;
                if (arg_recursion) {
                    auto parts = arg_recursion_parts(c, in.X, in.Xs, in.Ys, kvar, z);
                    if (!parts) {
                        ++d.violations;
                        continue;
                    }
                    lib = phi_oracle(arg_recursion_decomposition(in.X, in.Xs, in.Ys), in.params, K, n, poly_env(env));
                    closed = solve_arg_recursion(c, parts->P0, "Kp", "z", parts->P1, parts->q_s, xi.images[0], xi,
                                                 p_num(K), p_num(n));
                } else {
                    auto parts = cons_tail_parts(in.X, in.Ys, kvar);
                    lib = phi_oracle(cons_tail_decomposition(in.X, in.Ys, in.ell), in.params, K, n, poly_env(env));
                    closed = solve_cons_tail(parts.P0, "Kp", parts.P1, in.ell, xi, p_num(K), p_num(n));
                }
                auto hand = testing::phi_by_hand(in, K, n, env);
                if (hand.cost != lib->cost()->num() || hand.pot != lib->pot()->num())
                    ++d.disagreements;
                if (lib->cost()->num() > poly_eval_nat(p_cost(closed), env) ||
                    lib->pot()->num() > poly_eval_nat(p_pot(closed), env))
                    ++d.violations;
            }
    }
}

Outcome dominance() {
    Outcome o;
    testing::Rng rng(606);
    Dominance cons, orac, comp;
    dominance_scheme(false, ArgCase::Oracular, rng, cons);
    dominance_scheme(true, ArgCase::Oracular, rng, orac);
    dominance_scheme(true, ArgCase::Computational, rng, comp);
    // Phi at n = 0 is the guard alone.
    std::size_t anchor_bad = 0;
    DecompositionFn any = [](const PolyEnv&, const PolyValuePtr&) { return vcomb::tc(5, PolyValue::number(4)); };
    for (long K = 0; K <= 8; ++K) {
        auto z = phi_oracle(any, {}, K, 0, {});
        if (z->cost()->num() != 2 * K + 1 || z->pot()->num() != 0)
            ++anchor_bad;
    }
    std::size_t viol = cons.violations + orac.violations + comp.violations;
    std::size_t dis = cons.disagreements + orac.disagreements + comp.disagreements;
    o.pass = viol == 0 && dis == 0 && anchor_bad == 0;
    o.detail = fmt("cons-tail %zu/%zu, argument oracular %zu/%zu, argument computational %zu/%zu violations; "
                   "%zu disagreements with the integer recurrence; Phi(0) anchor %zu/9 wrong",
                   cons.violations, cons.instances, orac.violations, orac.instances, comp.violations, comp.instances,
                   dis, anchor_bad);
    return o;
}

// ---- 7: safety -----------------------------------------------------------------

Outcome safety() {
    Outcome o;
    std::size_t supported = 0, safe = 0;
    for (auto& name : program_names()) {
        auto b = infer_bound(load_program(name));
        if (!b.supported)
            continue;
        ++supported;
        if (b.safe && b.cls == PolyClass::Safe)
            ++safe;
        else
            o.detail += " " + name + " not safe;";
    }
    testing::Rng rng(707);
    std::vector<TcPolyPtr> eps{eps_var("a"), eps_var("b"), eps_var("c")};
    auto pick_eps = [&] {
        // chary at its own tier: a max of same-tier variables, possibly empty
        std::vector<TcPolyPtr> xs;
        for (auto& x : eps)
            if (rng() % 2)
                xs.push_back(x);
        return p_max(xs);
    };
    std::size_t kept = 0, runs = 0;
    for (int i = 0; i < 200; ++i) {
        bool orac = i % 2;
        auto tier = TcType::base(orac ? Label::parse("bd") : Label::diamond());
        auto y = p_var("y", tier), y2 = p_var("y2", tier);
        auto q = testing::random_poly(rng, eps, 3);
        auto p = orac ? p_max2(q, y) : q + y;
        std::map<std::string, TcPolyPtr> s;
        for (auto& x : eps)
            s[x->name] = pick_eps();
        auto q2 = testing::random_poly(rng, eps, 2);
        s["y"] = orac ? p_max2(q2, y2) : q2 + y2;
        ++runs;
        try {
            if (!is_safe(p, *tier))
                continue;
            auto r = substitute_safe(p, s, *tier);
            // strict and chary are the degenerate forms of safe
            if (is_safe(r, *tier) && classify(r, *tier) != PolyClass::None)
                ++kept;
            else
                o.detail += " lost safety: " + to_string(r) + ";";
        } catch (const std::exception& e) {
            o.detail += std::string(" ") + e.what() + ";";
        }
    }
    o.pass = supported > 0 && safe == supported && kept == runs;
    o.detail = fmt("%zu/%zu supported stdlib bounds Safe, %zu/%zu substitutions stay Safe", safe, supported, kept,
                   runs) +
               o.detail;
    return o;
}

// ---- 8: encoding ---------------------------------------------------------------

Outcome encoding() {
    Outcome o;
    std::size_t n = 0, bad = 0;
    auto check = [&](const Words& ws) {
        ++n;
        bool ok = false;
        try {
            auto e = encode_list(ws);
            ok = e == testing::encode_by_hand(ws) && decode_list(e) == ws;
        } catch (const std::exception&) {
        }
        bad += !ok;
    };
    auto all = all_words(3);
    for (std::size_t words = 0; words <= 3; ++words) {
        std::vector<std::size_t> idx(words, 0);
        for (;;) {
            Words ws;
            for (auto i : idx)
                ws.push_back(all[i]);
            check(ws);
            std::size_t k = words;
            while (k > 0 && ++idx[k - 1] == all.size())
                idx[--k] = 0;
            if (k == 0)
                break;
        }
    }
    testing::Rng rng(808);
    for (int i = 0; i < 1000; ++i)
        check(testing::random_list(rng, 12, 10));
    o.pass = bad == 0;
    o.detail = fmt("%zu lists, %zu failures", n, bad);
    return o;
}

} // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const char* title, const Outcome& o) {
        std::printf("criterion %d %-28s %s  %s\n", id, title, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    };
    report(1, "typing corpus", typing_corpus());
    report(2, "cost-model exactness", cost_model());
    report(3, "sorting correctness", sorting());
    auto s = soundness_runs();
    report(4, "bound soundness",
           {s.cost_viol == 0 && s.unsupported == 0 && s.rows == 1000 && s.secs < 300,
            fmt("%zu runs, %zu violations, %zu unsupported, %.1fs", s.rows, s.cost_viol, s.unsupported, s.secs)});
    report(5, "clock within its bound",
           {s.clock_viol == 0 && s.unsupported == 0 && s.rows == 1000,
            fmt("%zu runs, %zu violations", s.rows, s.clock_viol)});
    report(6, "closed-form dominance", dominance());
    report(7, "safety classification", safety());
    report(8, "encoding roundtrip", encoding());
    return failed == 0 ? 0 : 1;
}
