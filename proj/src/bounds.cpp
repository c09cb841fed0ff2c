#include "atr/bounds.hpp"

#include "atr/eval.hpp"

namespace atr {

namespace {

TcPolyPtr num(long v) { return p_num(Nat(v)); }

// 2K + 1
TcPolyPtr guard_cost(const TcPolyPtr& K) { return p_add({p_mul({num(2), K}), num(1)}); }

TcPolyPtr tally_var(const std::string& stem) { return p_var(fresh_name(stem), TcType::tally()); }

} // namespace

// ---- xi ------------------------------------------------------------------

std::map<std::string, Nat> xi_apply(const XiIterator& xi, std::size_t n, std::map<std::string, Nat> env) {
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<Nat> next;
        for (std::size_t i = 0; i < xi.vars.size(); ++i)
            next.push_back(std::max(env.at(xi.vars[i]), poly_eval_nat(xi.images[i], env)));
        for (std::size_t i = 0; i < xi.vars.size(); ++i)
            env[xi.vars[i]] = next[i];
    }
    return env;
}

TcPolyPtr xi_power(const XiIterator& xi, const TcPolyPtr& count, const TcPolyPtr& body) {
    std::map<std::string, TcPolyPtr> rename;
    std::vector<IterVar> vars;
    for (std::size_t i = 0; i < xi.vars.size(); ++i) {
        auto u = fresh_name("u");
        rename[xi.vars[i]] = p_var(u, xi.types[i]);
        vars.push_back(IterVar{u, xi.types[i], p_var(xi.vars[i], xi.types[i]), nullptr});
    }
    for (std::size_t i = 0; i < xi.vars.size(); ++i)
        vars[i].image = subst(xi.images[i], rename);
    return p_iter(count, std::move(vars), subst(body, rename));
}

// ---- closed forms --------------------------------------------------------

TcPolyPtr solve_cons_tail(const TcPolyPtr& P0, const std::string& k_var, const TcPolyPtr& P1, const Nat& ell,
                          const XiIterator& xi, const TcPolyPtr& K, const TcPolyPtr& n) {
    auto kv = tally_var("K");
    auto nv = tally_var("n");
    auto P0k = subst(P0, {{k_var, kv}});
    auto rounds = p_monus(nv, 1);
    auto cost = p_add({p_mul({nv, xi_power(xi, rounds, P0k)}), guard_cost(kv)});
    auto pot = p_add({p_mul({nv, p_num(ell)}), xi_power(xi, rounds, P1)});
    return subst(p_pair(cost, pot), {{kv->name, K}, {nv->name, n}});
}

TcPolyPtr solve_arg_recursion(ArgCase c, const TcPolyPtr& P0, const std::string& k_var, const std::string& z_var,
                              const TcPolyPtr& P1, const TcPolyPtr& q_s, const TcPolyPtr& p1p, const XiIterator& xi,
                              const TcPolyPtr& K, const TcPolyPtr& n) {
    auto kv = tally_var("K");
    auto nv = tally_var("n");
    auto P0k = subst(P0, {{k_var, kv}});
    auto rounds = p_monus(nv, 1);
    TcPolyPtr cost, pot;
    if (c == ArgCase::Oracular) {
        auto per = subst(P0k, {{z_var, P1}});
        cost = xi_power(xi, rounds, p_add({p_mul({nv, per}), guard_cost(kv)}));
        pot = xi_power(xi, rounds, P1);
    } else {
        auto zc = p_add({p_mul({p_monus(nv, 2), q_s}), P1});
        auto spent = p_mul({nv, subst(P0k, {{z_var, zc}})});
        // Two readings of the additive term; both are kept.
        auto doubled_form = p_add({spent, p_mul({num(2), p1p})});
        auto guard_form = p_add({spent, guard_cost(kv)});
        cost = xi_power(xi, rounds, p_max2(doubled_form, guard_form));
        pot = p_add({p_mul({rounds, xi_power(xi, p_monus(nv, 2), q_s)}), xi_power(xi, rounds, P1)});
    }
    return subst(p_pair(cost, pot), {{kv->name, K}, {nv->name, n}});
}

// ---- decomposition parts -------------------------------------------------

namespace {

// Per-unfolding cost shared by both schemes: the guard, the f-free part, the
// recursive function's own cost 1 + 2 and a ★ step per argument.
TcPolyPtr unfolding_cost(const TcPolyPtr& X, const std::vector<TcPolyPtr>& Ys, const TcPolyPtr& K) {
    std::vector<TcPolyPtr> parts{guard_cost(K), p_cost(X), num(2 + 2 * static_cast<long>(Ys.size()))};
    for (auto& y : Ys)
        parts.push_back(p_cost(y));
    return p_add(std::move(parts));
}

bool only_bare(const std::string& z, const TcPolyPtr& p) {
    // z occurs in p only as a top-level argument of max (or p is z).
    if (p->kind == PolyKind::Var)
        return true;
    if (p->kind != PolyKind::Max)
        return false;
    for (auto& a : p->args)
        if (occurs(z, a) && a->kind != PolyKind::Var)
            return false;
    return true;
}

TcPolyPtr without_z(const std::string& z, const TcPolyPtr& p) {
    if (p->kind != PolyKind::Max)
        return p_num(0);
    std::vector<TcPolyPtr> rest;
    for (auto& a : p->args)
        if (!occurs(z, a))
            rest.push_back(a);
    return rest.empty() ? p_num(0) : p_max(rest);
}

} // namespace

ConsTailParts cons_tail_parts(const TcPolyPtr& X, const std::vector<TcPolyPtr>& Ys, const TcPolyPtr& K) {
    return {unfolding_cost(X, Ys, K), p_pot(X)};
}

std::optional<ArgRecursionParts> arg_recursion_parts(ArgCase c, const TcPolyPtr& X, const TcPolyPtr& Xs,
                                                     const std::vector<TcPolyPtr>& Ys, const TcPolyPtr& K,
                                                     const TcPolyPtr& z) {
    auto chi = p_app(p_pot(Xs), z);
    auto ps = p_pot(chi);
    const std::string& zn = z->name;
    ArgRecursionParts out;
    out.P0 = p_add({unfolding_cost(X, Ys, K), p_cost(Xs), p_cost(chi)});
    out.P1 = p_max2(p_pot(X), subst(ps, {{zn, p_num(0)}}));
    if (!occurs(zn, ps)) {
        out.q_s = ps;
        return out;
    }
    if (c == ArgCase::Oracular) {
        if (!only_bare(zn, ps))
            return std::nullopt;
        out.q_s = without_z(zn, ps);
        return out;
    }
    std::vector<TcPolyPtr> terms = ps->kind == PolyKind::Add ? ps->args : std::vector<TcPolyPtr>{ps};
    std::vector<TcPolyPtr> rest;
    int with_z = 0;
    for (auto& t : terms) {
        if (!occurs(zn, t)) {
            rest.push_back(t);
            continue;
        }
        if (!only_bare(zn, t))
            return std::nullopt;
        ++with_z;
    }
    if (with_z > 1)
        return std::nullopt;
    out.q_s = p_add(rest);
    return out;
}

// ---- the recurrence, literally -------------------------------------------

namespace {

PolyValuePtr lambda_star_values(const std::vector<std::string>& params, std::size_t i, const PolyEnv& env,
                                const std::function<PolyValuePtr(const PolyEnv&)>& body) {
    if (i == params.size())
        return body(env);
    auto name = params[i];
    return vcomb::tc(1, PolyValue::function([=](const PolyValuePtr& vp) {
                         PolyEnv e = env;
                         e[name] = vp;
                         return lambda_star_values(params, i + 1, e, body);
                     }));
}

} // namespace

PolyValuePtr phi_oracle(const DecompositionFn& d, const std::vector<std::string>& params, const Nat& K,
                        std::size_t n, const PolyEnv& env) {
    Nat g = 2 * K + 1;
    if (n == 0)
        return vcomb::tc(g, PolyValue::number(0));
    auto prev = [&](const PolyEnv& e) { return phi_oracle(d, params, K, n - 1, e); };
    auto chi = vcomb::dally(2, lambda_star_values(params, 0, env, prev));
    auto step = value_max(d(env, chi), vcomb::tc(1, PolyValue::number(0)));
    return vcomb::dally(g, step);
}

DecompositionFn cons_tail_decomposition(const TcPolyPtr& X, const std::vector<TcPolyPtr>& Ys, const Nat& ell) {
    return [=](const PolyEnv& rho, const PolyValuePtr& chi) {
        auto acc = chi;
        for (auto& y : Ys)
            acc = vcomb::star(acc, poly_eval(y, rho));
        return vcomb::plusmax(poly_eval(X, rho), vcomb::pad(ell, acc));
    };
}

DecompositionFn arg_recursion_decomposition(const TcPolyPtr& X, const TcPolyPtr& Xs,
                                            const std::vector<TcPolyPtr>& Ys) {
    return [=](const PolyEnv& rho, const PolyValuePtr& chi) {
        auto acc = chi;
        for (auto& y : Ys)
            acc = vcomb::star(acc, poly_eval(y, rho));
        auto xs = poly_eval(Xs, rho);
        auto applied = (*xs->pot())(acc->pot());
        auto outer = vcomb::tc(xs->cost()->num() + acc->cost()->num() + applied->cost()->num(), applied->pot());
        return vcomb::plusmax(poly_eval(X, rho), outer);
    };
}

// ---- structural inference ------------------------------------------------

namespace {

struct VarBound {
    TcPolyPtr pot;
    AtrTypePtr type;
};
using BEnv = std::map<std::string, VarBound>;

TcTypePtr potential_of(const AtrTypePtr& t) { return tc_translate(*t).potential; }

struct Recursion {
    std::string f;
    std::size_t arity;
    std::vector<std::vector<TcPolyPtr>> sites;
};

class Inferer {
public:
    Inferer(const Context& oracles, std::map<const Term*, CrecInfo>& crecs) : oracles_(oracles), crecs_(crecs) {}

    TcPolyPtr infer(const TermPtr& t, const BEnv& env) {
        switch (t->kind) {
        case TermKind::Const: return p_pair(num(1), p_num(t->bits.size()));
        case TermKind::Var: {
            auto it = env.find(t->name);
            if (it == env.end())
                throw UnsupportedBound("unbound variable " + t->name);
            const auto& vb = it->second;
            if (vb.type->is_base())
                return p_pair(p_max2(vb.pot, num(1)), vb.pot);
            return p_pair(num(1), vb.pot);
        }
        case TermKind::Oracle: {
            auto it = oracles_.find(t->name);
            if (it == oracles_.end())
                throw UnsupportedBound("undeclared oracle @" + t->name);
            return p_pair(num(1), p_var("@" + t->name, potential_of(it->second)));
        }
        case TermKind::Abs: {
            if (!t->annot)
                throw UnsupportedBound("abstraction over " + t->name + " has no type");
            auto ty = potential_of(t->annot);
            auto v = p_var(fresh_name(t->name), ty);
            BEnv inner = env;
            inner[t->name] = {v, t->annot};
            return comb::lambda_star(v->name, ty, infer(t->a, inner));
        }
        case TermKind::App: {
            auto [head, args] = app_spine(t);
            auto acc = infer(head, env);
            std::vector<TcPolyPtr> ys;
            for (auto& a : args) {
                ys.push_back(infer(a, env));
                acc = comb::star(acc, ys.back());
            }
            if (head->kind == TermKind::Var && !rec_.empty() && head->name == rec_.back()->f &&
                args.size() == rec_.back()->arity)
                rec_.back()->sites.push_back(ys);
            return acc;
        }
        case TermKind::Ca: {
            auto x = infer(t->a, env);
            return p_pair(p_cost(x) + num(1), p_pot(x) + num(1));
        }
        case TermKind::D:
        case TermKind::Ta: {
            auto x = infer(t->a, env);
            return p_pair(p_cost(x) + num(1), p_pot(x));
        }
        case TermKind::Cond: {
            auto s = infer(t->a, env);
            auto x = infer(t->b, env);
            auto y = infer(t->c, env);
            return p_pair(p_add({p_cost(s), p_max2(p_cost(x), p_cost(y)), num(1)}), p_max2(p_pot(x), p_pot(y)));
        }
        case TermKind::Down: {
            auto s = infer(t->a, env);
            auto r = infer(t->b, env);
            return p_pair(p_add({p_cost(s), p_cost(r), p_mul({num(2), p_pot(r)}), num(1)}), p_pot(r));
        }
        case TermKind::Crec: return crec(t, env);
        }
        throw UnsupportedBound("unknown term");
    }

private:
    TcPolyPtr crec(const TermPtr& t, const BEnv& env) {
        if (!t->annot)
            throw UnsupportedBound("crec without a result type");
        const std::string& f = t->name;
        std::size_t k = t->params.size();
        if (k == 0)
            throw UnsupportedBound("crec without parameters");

        AtrTypePtr fty = t->annot;
        for (std::size_t i = k; i-- > 0;)
            fty = AtrType::arrow(t->params[i].type, fty);

        // The recursive function's stand-in: lambda_star over the parameters of (1, 0).
        TcPolyPtr placeholder = p_num(0);
        {
            TcPolyPtr acc = p_pair(num(1), p_num(0));
            for (std::size_t i = k; i-- > 0;) {
                auto ty = potential_of(t->params[i].type);
                acc = comb::lambda_star(fresh_name("z"), ty, acc);
            }
            placeholder = p_pot(acc);
        }

        BEnv body_env = env;
        XiIterator xi;
        std::vector<TcPolyPtr> vs;
        for (auto& prm : t->params) {
            auto ty = potential_of(prm.type);
            auto v = p_var(fresh_name(prm.name), ty);
            vs.push_back(v);
            xi.vars.push_back(v->name);
            xi.types.push_back(ty);
            body_env[prm.name] = {v, prm.type};
        }
        body_env[f] = {placeholder, fty};

        Recursion r{f, k, {}};
        rec_.push_back(&r);
        TcPolyPtr X;
        try {
            X = infer(t->b, body_env);
        } catch (...) {
            rec_.pop_back();
            throw;
        }
        rec_.pop_back();

        auto ell = tail_len(f, t->b, k);
        std::optional<ArgRecursionShape> arg;
        if (!ell) {
            arg = match_arg_recursion(f, t->b, k);
            if (!arg)
                throw UnsupportedBound("recursion on " + f + " is neither cons-tail nor in an argument");
        }

        // Argument time-complexities, joined over the call sites.
        std::vector<TcPolyPtr> Ys;
        for (std::size_t i = 0; i < k; ++i) {
            if (r.sites.empty()) {
                xi.images.push_back(vs[i]);
                continue;
            }
            std::vector<TcPolyPtr> costs, pots;
            for (auto& site : r.sites) {
                costs.push_back(p_cost(site[i]));
                pots.push_back(p_pot(site[i]));
            }
            Ys.push_back(p_pair(p_max(costs), p_max(pots)));
            xi.images.push_back(p_max(pots));
        }

        auto K = xi_power(xi, num(1), vs[0]);
        if (!poly_equal(K, vs[0]))
            throw UnsupportedBound("first argument of " + f + " may grow: " + to_string(K));
        auto n = p_monus(K, Nat(t->a->bits.size()));
        auto kvar = p_var(fresh_name("K"), TcType::tally());

        TcPolyPtr phi;
        if (ell) {
            auto parts = cons_tail_parts(X, Ys, kvar);
            phi = solve_cons_tail(parts.P0, kvar->name, parts.P1, Nat(*ell), xi, K, n);
        } else {
            auto Xs = infer(arg->outer, body_env);
            auto z = p_var(fresh_name("z"), potential_of(t->annot));
            ArgCase c = t->annot->label().oracular() ? ArgCase::Oracular : ArgCase::Computational;
            auto parts = arg_recursion_parts(c, X, Xs, Ys, kvar, z);
            if (!parts)
                throw UnsupportedBound("potential of the function applied to the recursive call of " + f +
                                       " is not of a supported shape");
            auto p1p = xi.images.empty() ? vs[0] : xi.images[0];
            phi = solve_arg_recursion(c, parts->P0, kvar->name, z->name, parts->P1, parts->q_s, p1p, xi, K, n);
        }

        CrecInfo info;
        info.scheme = ell ? Scheme::ConsTail : Scheme::ArgRecursion;
        info.ell = ell.value_or(0);
        for (auto& v : vs)
            info.params.push_back(v->name);
        info.clock_bound = K;
        crecs_[t.get()] = info;

        TcPolyPtr acc = phi;
        for (std::size_t i = k; i-- > 0;)
            acc = comb::lambda_star(vs[i]->name, vs[i]->type, acc);
        return comb::dally(num(1), acc);
    }

    const Context& oracles_;
    std::map<const Term*, CrecInfo>& crecs_;
    std::vector<Recursion*> rec_;
};

} // namespace

BoundResult infer_bound(const Typing& typing, const Context& oracles) {
    FreshNameScope names;
    BoundResult r;
    r.term = typing.term;
    r.type = typing.type;
    try {
        Inferer inf(oracles, r.crecs);
        r.bound = inf.infer(typing.term, {});
    } catch (const UnsupportedBound& e) {
        r.supported = false;
        r.reason = e.what();
        r.crecs.clear();
        return r;
    }
    r.supported = true;
    auto b = TcType::base(typing.type->tail());
    auto pot = p_pot(r.bound);
    r.cls = classify(pot, *b);
    r.safe = r.cls != PolyClass::None;
    if (!r.safe) {
        r.supported = false;
        r.reason = "inferred bound is not safe at " + b->str();
    }
    return r;
}

BoundResult infer_bound(const Program& p) {
    auto typing = check_program(p);
    return infer_bound(typing, p.oracles);
}

PolyEnv oracle_bounds(const std::map<std::string, std::string>& specs) {
    PolyEnv env;
    for (auto& [name, spec] : specs) {
        if (!builtin_oracle(spec))
            throw std::invalid_argument("unknown oracle '" + spec + "'");
        if (spec.rfind("const=", 0) == 0) {
            Nat len = spec.size() - 6;
            env["@" + name] = PolyValue::function([len](const PolyValuePtr&) { return vcomb::tc(len + 1, PolyValue::number(len)); });
        } else {
            env["@" + name] = PolyValue::function([](const PolyValuePtr& z) { return vcomb::tc(z->num() + 1, z); });
        }
    }
    return env;
}

BoundValue evaluate_bound(const BoundResult& r, const std::vector<std::size_t>& arg_lengths, const PolyEnv& env) {
    if (!r.supported)
        throw UnsupportedBound(r.reason);
    auto v = poly_eval(r.bound, env);
    for (auto len : arg_lengths)
        v = vcomb::star(v, vcomb::val(PolyValue::number(len)));
    return {v->cost()->num(), v->pot()->num()};
}

} // namespace atr
