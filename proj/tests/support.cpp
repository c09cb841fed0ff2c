#include "support.hpp"

#include <algorithm>
#include <stdexcept>

#include "atr/types.hpp"

namespace atr::testing {

namespace {

struct Stuck {};

std::string const_of(const TermPtr& v) {
    if (v->kind != TermKind::Const)
        throw Stuck{};
    return v->bits;
}

// A crec value possibly applied to some of its parameters.
bool crec_partial(const TermPtr& v, TermPtr& head, std::vector<TermPtr>& args) {
    auto [h, as] = app_spine(v);
    if (h->kind != TermKind::Crec || as.size() >= h->params.size())
        return false;
    head = h;
    args = as;
    return true;
}

TermPtr run(const TermPtr& t, std::size_t& fuel) {
    if (fuel-- == 0)
        throw Stuck{};
    switch (t->kind) {
    case TermKind::Const:
    case TermKind::Abs:
    case TermKind::Crec:
        return t;
    case TermKind::Var:
    case TermKind::Oracle:
        throw Stuck{};
    case TermKind::Ca:
        return mk_const(std::string(1, static_cast<char>('0' + t->bit)) + const_of(run(t->a, fuel)));
    case TermKind::D: {
        auto w = const_of(run(t->a, fuel));
        return mk_const(w.empty() ? w : w.substr(1));
    }
    case TermKind::Ta: {
        auto w = const_of(run(t->a, fuel));
        return mk_const(!w.empty() && w[0] == '0' + t->bit ? "0" : "");
    }
    case TermKind::Cond:
        return const_of(run(t->a, fuel)).empty() ? run(t->c, fuel) : run(t->b, fuel);
    case TermKind::Down: {
        auto s = const_of(run(t->a, fuel));
        auto r = const_of(run(t->b, fuel));
        return mk_const(s.size() <= r.size() ? s : "");
    }
    case TermKind::App: {
        auto f = run(t->a, fuel);
        auto x = run(t->b, fuel);
        if (f->kind == TermKind::Abs)
            return run(subst(f->a, f->name, x), fuel);
        TermPtr head;
        std::vector<TermPtr> args;
        if (!crec_partial(f, head, args))
            throw Stuck{};
        args.push_back(x);
        if (args.size() < head->params.size())
            return mk_app(f, x);
        const std::string clock = head->a->bits;
        if (clock.size() >= const_of(args[0]).size())
            return mk_const("");
        auto next = mk_crec(mk_const("0" + clock), head->name, head->params, head->b, head->annot);
        auto body = subst(head->b, head->name, next);
        for (std::size_t i = 0; i < args.size(); ++i)
            body = subst(body, head->params[i].name, args[i]);
        return run(body, fuel);
    }
    }
    throw Stuck{};
}

std::string random_word(Rng& rng, std::size_t max_bits) {
    std::string w(std::uniform_int_distribution<std::size_t>(0, max_bits)(rng), '0');
    for (auto& c : w)
        c = static_cast<char>('0' + (rng() & 1));
    return w;
}

TermPtr gen(Rng& rng, int depth, std::vector<std::string>& vars, int& fresh) {
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    int choice = depth <= 0 ? pick(2) : pick(10);
    auto eps = AtrType::base(Label::epsilon());
    switch (choice) {
    case 0:
        return mk_const(random_word(rng, 3));
    case 1:
        if (vars.empty())
            return mk_const(random_word(rng, 3));
        return mk_var(vars[static_cast<std::size_t>(pick(static_cast<int>(vars.size())))]);
    case 2:
        return mk_ca(pick(2), gen(rng, depth - 1, vars, fresh));
    case 3:
        return mk_d(gen(rng, depth - 1, vars, fresh));
    case 4:
        return mk_ta(pick(2), gen(rng, depth - 1, vars, fresh));
    case 5: {
        auto a = gen(rng, depth - 1, vars, fresh);
        auto b = gen(rng, depth - 1, vars, fresh);
        return mk_cond(a, b, gen(rng, depth - 1, vars, fresh));
    }
    case 6: {
        auto a = gen(rng, depth - 1, vars, fresh);
        return mk_down(a, gen(rng, depth - 1, vars, fresh));
    }
    case 7:
    case 8: {
        auto rhs = gen(rng, depth - 1, vars, fresh);
        std::string x = "x" + std::to_string(fresh++);
        vars.push_back(x);
        auto body = gen(rng, depth - 1, vars, fresh);
        vars.pop_back();
        return mk_app(mk_abs(x, eps, body), rhs);
    }
    default: {
        // crec clock (rec f. fn v => fn w => if v then c_b (f (d v) w) else s) a b
        std::string f = "f" + std::to_string(fresh++);
        std::string v = "v" + std::to_string(fresh++);
        std::string w = "w" + std::to_string(fresh++);
        vars.push_back(v);
        vars.push_back(w);
        auto base = gen(rng, depth - 2, vars, fresh);
        vars.pop_back();
        vars.pop_back();
        auto call = mk_apps(mk_var(f), {mk_d(mk_var(v)), mk_var(w)});
        auto body = mk_cond(mk_var(v), mk_ca(pick(2), call), base);
        auto rec = mk_crec(mk_const(random_word(rng, 2)), f, {mk_param(v, eps), mk_param(w, eps)}, body,
                           AtrType::base(Label::diamond()));
        auto a = gen(rng, depth - 1, vars, fresh);
        return mk_apps(rec, {a, gen(rng, depth - 1, vars, fresh)});
    }
    }
}

} // namespace

std::optional<std::string> ref_eval(const TermPtr& t, std::size_t fuel) {
    try {
        auto v = run(t, fuel);
        if (v->kind != TermKind::Const)
            return std::nullopt;
        return v->bits;
    } catch (const Stuck&) {
        return std::nullopt;
    }
}

TermPtr gen_term(Rng& rng, int depth) {
    std::vector<std::string> vars;
    int fresh = 0;
    return gen(rng, depth, vars, fresh);
}

const std::vector<MicroCase>& micro_cases() {
    static const std::vector<MicroCase> cases = {
        {R"("")", "", 1, "Val 1"},
        {R"(c0 "1")", "01", 2, "Val 1 + Ca 1"},
        {R"(down "01" "1")", "", 5, "Val 1 + Val 1 + Down 2*1+1"},
        {R"("01")", "01", 1, "Val 1"},
        {R"(d "10")", "0", 2, "Val 1 + D 1"},
        {R"(t1 "10")", "0", 2, "Val 1 + Ta 1"},
        {R"(t0 "")", "", 2, "Val 1 + Ta 1"},
        {R"(down "1" "01")", "1", 7, "Val 1 + Val 1 + Down 2*2+1"},
        {R"(if "1" then "0" else "")", "0", 3, "Val 1 (test) + Val 1 (branch) + If 1"},
        {R"(if "" then "0" else c1 "")", "1", 4, "Val 1 + Val 1 + Ca 1 + If 1"},
        {R"((fn x:N[e] => x) "01")", "01", 5, "Val 1 + Val 1 + App 1 + Env |01|=2"},
        {R"((fn x:N[e] => c0 x) "")", "0", 5, "Val 1 + Val 1 + App 1 + Env max(0,1)=1 + Ca 1"},
        {R"((fn x:N[e] => down x x) "1")", "1", 8, "Val 1 + Val 1 + App 1 + Env 1 + Env 1 + Down 3"},
        {R"((fn x:N[e] => fn y:N[e] => y) "" "110")", "110", 9,
         "Val 1 + Val 1 + App 1 + Val 1 (inner fn) + Val 1 + App 1 + Env 3"},
        {R"(crec "" (rec f : N[d]. fn v:N[e] => c0 (f (d v))) "")", "", 4,
         "Crec 1 + Val 1 + Guard 2*min(0,0)+1 + App 1"},
        {R"(crec "" (rec f : N[d]. fn v:N[e] => if v then c0 (f (d v)) else "") "1")", "0", 13,
         "Crec 1 + Val 1 + Guard 1 + App 1 + Env 1 + If 1 + Ca 1 + (Crec 1 + Env 1) + (Env 1 + D 1) "
         "+ Guard 2*min(1,0)+1 + App 1"},
        {R"(crec "" (rec f : N[d]. fn v:N[e] => fn w:N[e] => w) "1" "00")", "00", 9,
         "Crec 1 + Val 1 + (Val 1 + App 1) + Val 1 + Guard 1 + App 1 + Env 2"},
    };
    return cases;
}

std::string encode_by_hand(const std::vector<std::string>& ws) {
    std::string out;
    for (auto& w : ws) {
        for (char b : w) {
            out += '1';
            out += b;
        }
        out += '0';
    }
    return out;
}

std::vector<std::string> sort_by_hand(std::vector<std::string> ws) {
    auto key = [](const std::string& w) {
        auto i = w.find('1');
        return i == std::string::npos ? std::string() : w.substr(i);
    };
    // Insertion sort by (length of significant part, then lexicographic); stable.
    for (std::size_t i = 1; i < ws.size(); ++i) {
        for (std::size_t j = i; j > 0; --j) {
            auto a = key(ws[j - 1]), b = key(ws[j]);
            bool greater = a.size() != b.size() ? a.size() > b.size() : a > b;
            if (!greater)
                break;
            std::swap(ws[j - 1], ws[j]);
        }
    }
    return ws;
}

std::vector<std::string> random_list(Rng& rng, std::size_t max_words, std::size_t max_bits) {
    std::vector<std::string> ws(std::uniform_int_distribution<std::size_t>(0, max_words)(rng));
    for (auto& w : ws)
        w = random_word(rng, max_bits);
    return ws;
}

CostPot phi_by_hand(const PhiInstance& in, const Nat& K, std::size_t n, const std::map<std::string, Nat>& env) {
    const Nat guard = 2 * K + 1;
    if (n == 0)
        return {guard, 0};
    // Arguments of the recursive call and the call itself.
    std::map<std::string, Nat> next = env;
    Nat call_cost = 3;   // dally(2, ...) on a lambda_star of cost 1
    for (std::size_t i = 0; i < in.params.size(); ++i) {
        call_cost += poly_eval_nat(p_cost(in.Ys[i]), env) + 1;
        next[in.params[i]] = poly_eval_nat(p_pot(in.Ys[i]), env);
    }
    if (!in.params.empty())
        call_cost += in.params.size() - 1;   // the inner lambda_star stages
    auto inner = phi_by_hand(in, K, n - 1, next);
    Nat rc = call_cost + inner.cost, rp = inner.pot;
    Nat xc = poly_eval_nat(p_cost(in.X), env), xp = poly_eval_nat(p_pot(in.X), env);
    Nat dc, dp;
    if (!in.Xs) {
        dc = xc + rc;
        dp = std::max(xp, Nat(rp + in.ell));
    } else {
        auto applied = p_app(p_pot(in.Xs), p_num(rp));
        Nat oc = poly_eval_nat(p_cost(in.Xs), env) + rc + poly_eval_nat(p_cost(applied), env);
        dc = xc + oc;
        dp = std::max(xp, poly_eval_nat(p_pot(applied), env));
    }
    return {guard + std::max(dc, Nat(1)), dp};
}

TcPolyPtr random_poly(Rng& rng, const std::vector<TcPolyPtr>& vars, int depth) {
    auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    if (depth <= 0 || pick(3) == 0) {
        if (!vars.empty() && pick(2) == 0)
            return vars[static_cast<std::size_t>(pick(static_cast<int>(vars.size())))];
        return p_num(pick(4));
    }
    auto a = random_poly(rng, vars, depth - 1);
    auto b = random_poly(rng, vars, depth - 1);
    switch (pick(3)) {
    case 0: return a + b;
    case 1: return a * b;
    default: return p_max2(a, b);
    }
}

} // namespace atr::testing
