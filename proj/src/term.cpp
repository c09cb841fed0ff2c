#include "atr/term.hpp"

#include <atomic>
#include <deque>
#include <mutex>
#include <unordered_map>

namespace atr {

namespace {

struct SymbolTable {
    std::mutex mu;
    std::unordered_map<std::string, Symbol> ids;
    std::deque<std::string> names;
};

SymbolTable& symbols() {
    static SymbolTable table;
    return table;
}

std::shared_ptr<Term> node(TermKind k, SourcePos pos) {
    auto t = std::make_shared<Term>();
    t->kind = k;
    t->pos = pos;
    return t;
}

std::atomic<unsigned> fresh_counter{0};

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
    std::string stem = base.substr(0, base.find('\''));
    for (;;) {
        std::string cand = stem + "'" + std::to_string(++fresh_counter);
        if (!avoid.count(cand))
            return cand;
    }
}

void collect_fv(const TermPtr& t, std::set<std::string>& bound, std::set<std::string>& out) {
    switch (t->kind) {
    case TermKind::Var:
        if (!bound.count(t->name))
            out.insert(t->name);
        return;
    case TermKind::Const:
    case TermKind::Oracle:
        return;
    case TermKind::Abs: {
        bool fresh = bound.insert(t->name).second;
        collect_fv(t->a, bound, out);
        if (fresh)
            bound.erase(t->name);
        return;
    }
    case TermKind::Crec: {
        collect_fv(t->a, bound, out);
        std::vector<std::string> added;
        auto bind = [&](const std::string& n) {
            if (bound.insert(n).second)
                added.push_back(n);
        };
        bind(t->name);
        for (auto& p : t->params)
            bind(p.name);
        collect_fv(t->b, bound, out);
        for (auto& n : added)
            bound.erase(n);
        return;
    }
    default:
        if (t->a)
            collect_fv(t->a, bound, out);
        if (t->b)
            collect_fv(t->b, bound, out);
        if (t->c)
            collect_fv(t->c, bound, out);
    }
}

} // namespace

Symbol intern(const std::string& name) {
    auto& tab = symbols();
    std::lock_guard lock(tab.mu);
    auto it = tab.ids.find(name);
    if (it != tab.ids.end())
        return it->second;
    Symbol id = static_cast<Symbol>(tab.names.size());
    tab.names.push_back(name);
    tab.ids.emplace(name, id);
    return id;
}

const std::string& symbol_name(Symbol s) {
    auto& tab = symbols();
    std::lock_guard lock(tab.mu);
    return tab.names.at(s);
}

std::string SourcePos::str() const {
    if (!known())
        return "?";
    return std::to_string(line) + ":" + std::to_string(column);
}

bool is_word(const std::string& s) {
    for (char c : s)
        if (c != '0' && c != '1')
            return false;
    return true;
}

TermPtr mk_var(const std::string& name, SourcePos pos) {
    auto t = node(TermKind::Var, pos);
    t->name = name;
    t->sym = intern(name);
    return t;
}

TermPtr mk_const(const std::string& bits, SourcePos pos) {
    auto t = node(TermKind::Const, pos);
    t->bits = bits;
    return t;
}

TermPtr mk_oracle(const std::string& name, SourcePos pos) {
    auto t = node(TermKind::Oracle, pos);
    t->name = name;
    t->sym = intern(name);
    return t;
}

TermPtr mk_abs(const std::string& var, AtrTypePtr annot, TermPtr body, SourcePos pos) {
    auto t = node(TermKind::Abs, pos);
    t->name = var;
    t->sym = intern(var);
    t->annot = std::move(annot);
    t->a = std::move(body);
    return t;
}

TermPtr mk_app(TermPtr fun, TermPtr arg, SourcePos pos) {
    auto t = node(TermKind::App, pos);
    t->a = std::move(fun);
    t->b = std::move(arg);
    return t;
}

TermPtr mk_apps(TermPtr fun, const std::vector<TermPtr>& args) {
    for (auto& a : args)
        fun = mk_app(fun, a);
    return fun;
}

TermPtr mk_ca(int bit, TermPtr s, SourcePos pos) {
    auto t = node(TermKind::Ca, pos);
    t->bit = bit;
    t->a = std::move(s);
    return t;
}

TermPtr mk_d(TermPtr s, SourcePos pos) {
    auto t = node(TermKind::D, pos);
    t->a = std::move(s);
    return t;
}

TermPtr mk_ta(int bit, TermPtr s, SourcePos pos) {
    auto t = node(TermKind::Ta, pos);
    t->bit = bit;
    t->a = std::move(s);
    return t;
}

TermPtr mk_cond(TermPtr test, TermPtr then_t, TermPtr else_t, SourcePos pos) {
    auto t = node(TermKind::Cond, pos);
    t->a = std::move(test);
    t->b = std::move(then_t);
    t->c = std::move(else_t);
    return t;
}

TermPtr mk_down(TermPtr s, TermPtr r, SourcePos pos) {
    auto t = node(TermKind::Down, pos);
    t->a = std::move(s);
    t->b = std::move(r);
    return t;
}

TermPtr mk_crec(TermPtr clock, const std::string& recvar, std::vector<Param> params, TermPtr body,
                AtrTypePtr result, SourcePos pos) {
    auto t = node(TermKind::Crec, pos);
    t->a = std::move(clock);
    t->name = recvar;
    t->sym = intern(recvar);
    t->params = std::move(params);
    t->b = std::move(body);
    t->annot = std::move(result);
    return t;
}

Param mk_param(const std::string& name, AtrTypePtr type) { return Param{name, intern(name), std::move(type)}; }

bool term_equal(const TermPtr& x, const TermPtr& y) {
    if (x == y)
        return true;
    if (!x || !y || x->kind != y->kind)
        return false;
    auto ann_eq = [](const AtrTypePtr& p, const AtrTypePtr& q) {
        if (!p || !q)
            return !p && !q;
        return type_equal(*p, *q);
    };
    switch (x->kind) {
    case TermKind::Var:
    case TermKind::Oracle:
        return x->name == y->name;
    case TermKind::Const:
        return x->bits == y->bits;
    case TermKind::Abs:
        return x->name == y->name && ann_eq(x->annot, y->annot) && term_equal(x->a, y->a);
    case TermKind::Ca:
    case TermKind::Ta:
        return x->bit == y->bit && term_equal(x->a, y->a);
    case TermKind::Crec:
        if (x->name != y->name || x->params.size() != y->params.size() || !ann_eq(x->annot, y->annot))
            return false;
        for (std::size_t i = 0; i < x->params.size(); ++i)
            if (x->params[i].name != y->params[i].name || !ann_eq(x->params[i].type, y->params[i].type))
                return false;
        return term_equal(x->a, y->a) && term_equal(x->b, y->b);
    default:
        return term_equal(x->a, y->a) && term_equal(x->b, y->b) && term_equal(x->c, y->c);
    }
}

std::size_t term_size(const TermPtr& t) {
    if (!t)
        return 0;
    return 1 + term_size(t->a) + term_size(t->b) + term_size(t->c);
}

std::set<std::string> free_vars(const TermPtr& t) {
    std::set<std::string> bound, out;
    collect_fv(t, bound, out);
    return out;
}

bool occurs_free(const std::string& x, const TermPtr& t) { return free_vars(t).count(x) > 0; }

namespace {

TermPtr subst_impl(const TermPtr& t, const std::string& x, const TermPtr& e, const std::set<std::string>& efv);

TermPtr with_children(const TermPtr& t, TermPtr a, TermPtr b, TermPtr c) {
    if (a == t->a && b == t->b && c == t->c)
        return t;
    auto n = std::make_shared<Term>(*t);
    n->a = std::move(a);
    n->b = std::move(b);
    n->c = std::move(c);
    return n;
}

TermPtr subst_impl(const TermPtr& t, const std::string& x, const TermPtr& e, const std::set<std::string>& efv) {
    switch (t->kind) {
    case TermKind::Var:
        return t->name == x ? e : t;
    case TermKind::Const:
    case TermKind::Oracle:
        return t;
    case TermKind::Abs: {
        if (t->name == x)
            return t;
        if (efv.count(t->name) && occurs_free(x, t->a)) {
            auto avoid = free_vars(t->a);
            avoid.insert(efv.begin(), efv.end());
            std::string y = fresh_name(t->name, avoid);
            auto body = subst(t->a, t->name, mk_var(y));
            return mk_abs(y, t->annot, subst_impl(body, x, e, efv), t->pos);
        }
        auto body = subst_impl(t->a, x, e, efv);
        return with_children(t, body, nullptr, nullptr);
    }
    case TermKind::Crec: {
        auto clock = subst_impl(t->a, x, e, efv);
        bool shadowed = t->name == x;
        for (auto& p : t->params)
            shadowed = shadowed || p.name == x;
        if (shadowed || !occurs_free(x, t->b))
            return with_children(t, clock, t->b, nullptr);
        auto n = std::make_shared<Term>(*t);
        n->a = clock;
        TermPtr body = t->b;
        auto avoid = free_vars(t->b);
        avoid.insert(efv.begin(), efv.end());
        auto rename = [&](std::string& name, Symbol& sym) {
            if (!efv.count(name))
                return;
            std::string y = fresh_name(name, avoid);
            avoid.insert(y);
            body = subst(body, name, mk_var(y));
            name = y;
            sym = intern(y);
        };
        rename(n->name, n->sym);
        for (auto& p : n->params)
            rename(p.name, p.sym);
        n->b = subst_impl(body, x, e, efv);
        return n;
    }
    default:
        return with_children(t, t->a ? subst_impl(t->a, x, e, efv) : nullptr,
                             t->b ? subst_impl(t->b, x, e, efv) : nullptr,
                             t->c ? subst_impl(t->c, x, e, efv) : nullptr);
    }
}

} // namespace

TermPtr subst(const TermPtr& t, const std::string& x, const TermPtr& e) {
    auto efv = free_vars(e);
    return subst_impl(t, x, e, efv);
}

std::pair<TermPtr, std::vector<TermPtr>> app_spine(const TermPtr& t) {
    std::vector<TermPtr> args;
    TermPtr head = t;
    while (head->kind == TermKind::App) {
        args.push_back(head->b);
        head = head->a;
    }
    return {head, std::vector<TermPtr>(args.rbegin(), args.rend())};
}

namespace {

// Result of the cons-tail walk: no call on any path, a count, or failure.
struct TailLen {
    enum { NoCall, Count, Fail } state = NoCall;
    int n = 0;
};

TailLen tl_max(TailLen x, TailLen y) {
    if (x.state == TailLen::Fail || y.state == TailLen::Fail)
        return {TailLen::Fail};
    if (x.state == TailLen::NoCall)
        return y;
    if (y.state == TailLen::NoCall)
        return x;
    return {TailLen::Count, std::max(x.n, y.n)};
}

TailLen tail_walk(const std::string& f, const TermPtr& t, bool under_down, std::optional<std::size_t> arity) {
    if (!occurs_free(f, t))
        return {};
    switch (t->kind) {
    case TermKind::Cond:
        if (occurs_free(f, t->a))
            return {TailLen::Fail};
        return tl_max(tail_walk(f, t->b, under_down, arity), tail_walk(f, t->c, under_down, arity));
    case TermKind::Ca: {
        auto r = tail_walk(f, t->a, under_down, arity);
        if (r.state == TailLen::Count && !under_down)
            ++r.n;
        return r;
    }
    case TermKind::Down:
        if (occurs_free(f, t->b))
            return {TailLen::Fail};
        return tail_walk(f, t->a, true, arity);
    case TermKind::App: {
        auto [head, args] = app_spine(t);
        if (head->kind != TermKind::Var || head->name != f)
            return {TailLen::Fail};
        if (arity && args.size() != *arity)
            return {TailLen::Fail};
        for (auto& a : args)
            if (occurs_free(f, a))
                return {TailLen::Fail};
        return {TailLen::Count, 0};
    }
    default:
        return {TailLen::Fail};
    }
}

} // namespace

std::optional<int> tail_len(const std::string& f, const TermPtr& t, std::optional<std::size_t> arity) {
    auto r = tail_walk(f, t, false, arity);
    if (r.state == TailLen::Fail)
        return std::nullopt;
    return r.state == TailLen::Count ? r.n : 0;
}

bool is_plain_affine(const std::string& f, const TermPtr& t) {
    if (!occurs_free(f, t))
        return true;
    switch (t->kind) {
    case TermKind::Cond:
        return !occurs_free(f, t->a) && is_plain_affine(f, t->b) && is_plain_affine(f, t->c);
    case TermKind::Ca:
    case TermKind::D:
    case TermKind::Ta:
        return is_plain_affine(f, t->a);
    case TermKind::Down:
        return is_plain_affine(f, t->a) && !occurs_free(f, t->b);
    case TermKind::Var:
        return t->name == f;   // f applied to zero arguments
    case TermKind::App: {
        auto [head, args] = app_spine(t);
        if (head->kind == TermKind::Var && head->name == f) {
            for (auto& a : args)
                if (occurs_free(f, a))
                    return false;
            return true;
        }
        if (!occurs_free(f, head)) {
            for (auto& a : args)
                if (!is_plain_affine(f, a))
                    return false;
            return true;
        }
        // (fn x => s) r
        if (t->a->kind == TermKind::Abs && !occurs_free(f, t->b)) {
            const auto& abs = t->a;
            if (abs->name == f)
                return true;
            return is_plain_affine(f, abs->a);
        }
        return false;
    }
    default:
        return false;
    }
}

std::optional<ArgRecursionShape> match_arg_recursion(const std::string& f, const TermPtr& t,
                                                     std::optional<std::size_t> arity) {
    if (t->kind != TermKind::Cond || occurs_free(f, t->a) || occurs_free(f, t->c))
        return std::nullopt;
    const auto& app = t->b;
    if (app->kind != TermKind::App || occurs_free(f, app->a))
        return std::nullopt;
    auto [head, args] = app_spine(app->b);
    if (head->kind != TermKind::Var || head->name != f)
        return std::nullopt;
    if (arity && args.size() != *arity)
        return std::nullopt;
    for (auto& a : args)
        if (occurs_free(f, a))
            return std::nullopt;
    return ArgRecursionShape{t->a, app->a, app->b, args, t->c};
}

namespace {

void collect_calls(const std::string& f, const TermPtr& t, std::vector<std::vector<TermPtr>>& out) {
    if (!t || !occurs_free(f, t))
        return;
    if (t->kind == TermKind::App) {
        auto [head, args] = app_spine(t);
        if (head->kind == TermKind::Var && head->name == f) {
            out.push_back(args);
            return;
        }
    }
    if (t->kind == TermKind::Abs && t->name == f)
        return;
    collect_calls(f, t->a, out);
    collect_calls(f, t->b, out);
    collect_calls(f, t->c, out);
}

} // namespace

std::vector<std::vector<TermPtr>> complete_applications(const std::string& f, const TermPtr& t) {
    std::vector<std::vector<TermPtr>> out;
    collect_calls(f, t, out);
    return out;
}

} // namespace atr
