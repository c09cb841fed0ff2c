#include "atr/tcpoly.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace atr {

// ---- types ---------------------------------------------------------------

TcTypePtr TcType::tally() {
    static const TcTypePtr t = std::make_shared<TcType>();
    return t;
}

TcTypePtr TcType::base(Label l) {
    auto t = std::make_shared<TcType>();
    t->kind_ = TcKind::Base;
    t->label_ = l;
    return t;
}

TcTypePtr TcType::product(TcTypePtr a, TcTypePtr b) {
    auto t = std::make_shared<TcType>();
    t->kind_ = TcKind::Product;
    t->a_ = std::move(a);
    t->b_ = std::move(b);
    return t;
}

TcTypePtr TcType::arrow(TcTypePtr a, TcTypePtr b) {
    auto t = std::make_shared<TcType>();
    t->kind_ = TcKind::Arrow;
    t->a_ = std::move(a);
    t->b_ = std::move(b);
    return t;
}

const TcType& TcType::tail() const {
    const TcType* t = this;
    while (t->kind_ == TcKind::Arrow || t->kind_ == TcKind::Product)
        t = t->b_.get();
    return *t;
}

std::string TcType::str() const {
    switch (kind_) {
    case TcKind::Tally: return "T";
    case TcKind::Base: return "T[" + label_.surface() + "]";
    case TcKind::Product: return "(" + a_->str() + " * " + b_->str() + ")";
    case TcKind::Arrow: {
        std::string l = a_->kind_ == TcKind::Arrow ? "(" + a_->str() + ")" : a_->str();
        return l + " -> " + b_->str();
    }
    }
    return "?";
}

bool tc_equal(const TcType& a, const TcType& b) {
    if (a.kind() != b.kind())
        return false;
    switch (a.kind()) {
    case TcKind::Tally: return true;
    case TcKind::Base: return a.label() == b.label();
    default: return tc_equal(*a.fst(), *b.fst()) && tc_equal(*a.snd(), *b.snd());
    }
}

bool tc_subtype(const TcType& a, const TcType& b) {
    if (b.kind() == TcKind::Tally)
        return a.kind() == TcKind::Tally || a.kind() == TcKind::Base;
    if (a.kind() != b.kind())
        return false;
    switch (a.kind()) {
    case TcKind::Tally: return true;
    case TcKind::Base: return a.label() <= b.label();
    case TcKind::Product: return tc_subtype(*a.fst(), *b.fst()) && tc_subtype(*a.snd(), *b.snd());
    case TcKind::Arrow: return tc_subtype(*b.fst(), *a.fst()) && tc_subtype(*a.snd(), *b.snd());
    }
    return false;
}

TcTranslation tc_translate(const AtrType& sigma) {
    if (sigma.level() > 2)
        throw TcTypeError("translation is defined up to level 2, got " + sigma.str());
    std::function<TcTypePtr(const AtrType&)> pot = [&](const AtrType& s) -> TcTypePtr {
        if (s.is_base())
            return TcType::base(s.label());
        return TcType::arrow(pot(*s.dom()), TcType::product(TcType::tally(), pot(*s.cod())));
    };
    auto p = pot(sigma);
    return {p, TcType::product(TcType::tally(), p)};
}

namespace {

TcTypePtr shift_tc(const TcTypePtr& t) {
    switch (t->kind()) {
    case TcKind::Tally: return t;
    case TcKind::Base: return TcType::base(t->label().shifted());
    case TcKind::Product: return TcType::product(shift_tc(t->fst()), shift_tc(t->snd()));
    case TcKind::Arrow: return TcType::arrow(shift_tc(t->fst()), shift_tc(t->snd()));
    }
    return t;
}

bool base_like(const TcType& t) { return t.kind() == TcKind::Base || t.kind() == TcKind::Tally; }

// ---- node construction ---------------------------------------------------

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)); }

std::vector<std::string> merge_free(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty())
        return b;
    if (b.empty())
        return a;
    std::vector<std::string> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::vector<std::string> remove_free(std::vector<std::string> v, const std::string& x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it != v.end() && *it == x)
        v.erase(it);
    return v;
}

std::shared_ptr<TcPoly> node(PolyKind k) {
    auto n = std::make_shared<TcPoly>();
    n->kind = k;
    return n;
}

TcPolyPtr finish(std::shared_ptr<TcPoly> n) {
    std::size_t h = std::hash<int>()(static_cast<int>(n->kind));
    switch (n->kind) {
    case PolyKind::Num: h = mix(h, std::hash<std::string>()(n->num.str())); break;
    case PolyKind::Monus: h = mix(h, std::hash<std::string>()(n->num.str())); break;
    case PolyKind::Var: h = mix(h, std::hash<std::string>()(n->name)); break;
    default: break;
    }
    if (n->kind == PolyKind::Var) {
        n->free = {n->name};
    } else if (n->kind == PolyKind::Lam) {
        h = mix(h, std::hash<std::string>()(n->name));
        n->free = remove_free(n->args[0]->free, n->name);
    } else if (n->kind == PolyKind::Iter) {
        std::vector<std::string> inner = n->args[1]->free;
        for (auto& v : n->iter)
            inner = merge_free(inner, v.image->free);
        for (auto& v : n->iter)
            inner = remove_free(std::move(inner), v.name);
        n->free = merge_free(inner, n->args[0]->free);
        for (auto& v : n->iter) {
            n->free = merge_free(n->free, v.init->free);
            h = mix(mix(mix(h, std::hash<std::string>()(v.name)), v.init->hash), v.image->hash);
        }
        h = mix(mix(h, n->args[0]->hash), n->args[1]->hash);
    } else {
        for (auto& a : n->args)
            n->free = merge_free(n->free, a->free);
    }
    if (n->kind != PolyKind::Lam && n->kind != PolyKind::Iter)
        for (auto& a : n->args)
            h = mix(h, a->hash);
    else if (n->kind == PolyKind::Lam)
        h = mix(h, n->args[0]->hash);
    n->hash = h;
    return n;
}

bool is_num(const TcPolyPtr& p) { return p->kind == PolyKind::Num; }

void sort_canonical(std::vector<TcPolyPtr>& xs) {
    std::stable_sort(xs.begin(), xs.end(), [](const TcPolyPtr& a, const TcPolyPtr& b) { return a->hash < b->hash; });
}

std::atomic<std::uint64_t> fresh_counter{0};

} // namespace

std::string fresh_name(const std::string& stem) { return stem + "'" + std::to_string(++fresh_counter); }

FreshNameScope::FreshNameScope() : saved_(fresh_counter.exchange(0)) {}

FreshNameScope::~FreshNameScope() { fresh_counter = std::max<std::uint64_t>(fresh_counter, saved_); }

TcPolyPtr p_num(const Nat& n) {
    auto p = node(PolyKind::Num);
    p->num = n;
    return finish(p);
}

TcPolyPtr p_var(const std::string& name, TcTypePtr type) {
    auto p = node(PolyKind::Var);
    p->name = name;
    p->type = std::move(type);
    return finish(p);
}

TcPolyPtr p_add(std::vector<TcPolyPtr> xs) {
    std::vector<TcPolyPtr> out;
    Nat c = 0;
    std::function<void(const TcPolyPtr&)> put = [&](const TcPolyPtr& x) {
        if (x->kind == PolyKind::Add)
            for (auto& y : x->args)
                put(y);
        else if (is_num(x))
            c += x->num;
        else
            out.push_back(x);
    };
    for (auto& x : xs)
        put(x);
    if (out.empty())
        return p_num(c);
    sort_canonical(out);
    if (c != 0)
        out.push_back(p_num(c));
    if (out.size() == 1)
        return out[0];
    auto p = node(PolyKind::Add);
    p->args = std::move(out);
    return finish(p);
}

TcPolyPtr p_mul(std::vector<TcPolyPtr> xs) {
    std::vector<TcPolyPtr> out;
    Nat c = 1;
    std::function<void(const TcPolyPtr&)> put = [&](const TcPolyPtr& x) {
        if (x->kind == PolyKind::Mul)
            for (auto& y : x->args)
                put(y);
        else if (is_num(x))
            c *= x->num;
        else
            out.push_back(x);
    };
    for (auto& x : xs)
        put(x);
    if (c == 0 || out.empty())
        return p_num(c);
    sort_canonical(out);
    if (c != 1)
        out.insert(out.begin(), p_num(c));
    if (out.size() == 1)
        return out[0];
    auto p = node(PolyKind::Mul);
    p->args = std::move(out);
    return finish(p);
}

TcPolyPtr p_max(std::vector<TcPolyPtr> xs) {
    if (xs.empty())
        return finish(node(PolyKind::Max));
    std::vector<TcPolyPtr> out;
    bool have_c = false;
    Nat c = 0;
    std::function<void(const TcPolyPtr&)> put = [&](const TcPolyPtr& x) {
        if (x->kind == PolyKind::Max) {
            for (auto& y : x->args)
                put(y);
        } else if (is_num(x)) {
            c = have_c ? std::max(c, x->num) : x->num;
            have_c = true;
        } else {
            for (auto& y : out)
                if (poly_equal(x, y))
                    return;
            out.push_back(x);
        }
    };
    for (auto& x : xs)
        put(x);
    if (out.empty())
        return have_c ? p_num(c) : finish(node(PolyKind::Max));
    sort_canonical(out);
    if (have_c && c != 0)
        out.push_back(p_num(c));
    if (out.size() == 1)
        return out[0];
    auto p = node(PolyKind::Max);
    p->args = std::move(out);
    return finish(p);
}

TcPolyPtr p_max2(TcPolyPtr a, TcPolyPtr b) { return p_max({std::move(a), std::move(b)}); }

TcPolyPtr p_monus(TcPolyPtr x, const Nat& c) {
    if (c == 0)
        return x;
    if (is_num(x))
        return p_num(x->num > c ? Nat(x->num - c) : Nat(0));
    if (x->kind == PolyKind::Monus)
        return p_monus(x->args[0], x->num + c);
    auto p = node(PolyKind::Monus);
    p->num = c;
    p->args = {std::move(x)};
    return finish(p);
}

TcPolyPtr p_lam(const std::string& var, TcTypePtr type, TcPolyPtr body) {
    auto p = node(PolyKind::Lam);
    p->name = var;
    p->type = std::move(type);
    p->args = {std::move(body)};
    return finish(p);
}

TcPolyPtr p_app(TcPolyPtr f, TcPolyPtr x) {
    if (f->kind == PolyKind::Lam)
        return subst(f->args[0], {{f->name, x}});
    if (f->kind == PolyKind::Iter) {
        bool clash = false;
        for (auto& v : f->iter)
            clash = clash || occurs(v.name, x);
        if (!clash)
            return p_iter(f->args[0], f->iter, p_app(f->args[1], x));
    }
    auto p = node(PolyKind::App);
    p->args = {std::move(f), std::move(x)};
    return finish(p);
}

TcPolyPtr p_pair(TcPolyPtr cost, TcPolyPtr pot) {
    auto p = node(PolyKind::Pair);
    p->args = {std::move(cost), std::move(pot)};
    return finish(p);
}

namespace {

TcPolyPtr project(TcPolyPtr x, PolyKind k) {
    int i = k == PolyKind::Cost ? 0 : 1;
    if (x->kind == PolyKind::Pair)
        return x->args[i];
    if (x->kind == PolyKind::Iter)
        return p_iter(x->args[0], x->iter, project(x->args[1], k));
    if (x->kind == PolyKind::Max && !x->args.empty()) {
        std::vector<TcPolyPtr> parts;
        for (auto& a : x->args)
            parts.push_back(project(a, k));
        return p_max(std::move(parts));
    }
    auto p = node(k);
    p->args = {std::move(x)};
    return finish(p);
}

} // namespace

TcPolyPtr p_cost(TcPolyPtr x) { return project(std::move(x), PolyKind::Cost); }
TcPolyPtr p_pot(TcPolyPtr x) { return project(std::move(x), PolyKind::Pot); }

TcPolyPtr p_iter(TcPolyPtr count, std::vector<IterVar> vars, TcPolyPtr body) {
    std::map<std::string, TcPolyPtr> at_init;
    for (auto& v : vars)
        at_init[v.name] = v.init;
    if (is_num(count) && count->num == 0)
        return subst(body, at_init);
    // One round from the initial values, then a second round; when they
    // agree every later round does too, and round 0 lies below round 1.
    std::map<std::string, TcPolyPtr> one, two;
    for (auto& v : vars)
        one[v.name] = p_max2(v.init, subst(v.image, at_init));
    bool fixed = true;
    for (auto& v : vars) {
        two[v.name] = p_max2(one[v.name], subst(v.image, one));
        fixed = fixed && poly_equal(one[v.name], two[v.name]);
    }
    if (fixed)
        return subst(body, one);
    bool used = false;
    for (auto& v : vars)
        used = used || occurs(v.name, body);
    if (!used)
        return body;
    auto p = node(PolyKind::Iter);
    p->args = {std::move(count), std::move(body)};
    p->iter = std::move(vars);
    return finish(p);
}

bool poly_equal(const TcPolyPtr& a, const TcPolyPtr& b) {
    if (a == b)
        return true;
    if (a->hash != b->hash || a->kind != b->kind || a->args.size() != b->args.size() ||
        a->iter.size() != b->iter.size())
        return false;
    switch (a->kind) {
    case PolyKind::Num: return a->num == b->num;
    case PolyKind::Var: return a->name == b->name;
    case PolyKind::Monus:
        if (a->num != b->num)
            return false;
        break;
    case PolyKind::Lam: {
        if (!tc_equal(*a->type, *b->type))
            return false;
        if (a->name == b->name)
            return poly_equal(a->args[0], b->args[0]);
        auto v = p_var(a->name, a->type);
        return poly_equal(a->args[0], subst(b->args[0], {{b->name, v}}));
    }
    case PolyKind::Iter:
        for (std::size_t i = 0; i < a->iter.size(); ++i)
            if (a->iter[i].name != b->iter[i].name || !poly_equal(a->iter[i].init, b->iter[i].init) ||
                !poly_equal(a->iter[i].image, b->iter[i].image))
                return false;
        break;
    default: break;
    }
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!poly_equal(a->args[i], b->args[i]))
            return false;
    return true;
}

bool occurs(const std::string& x, const TcPolyPtr& p) { return std::binary_search(p->free.begin(), p->free.end(), x); }

std::size_t poly_size(const TcPolyPtr& p) {
    std::size_t n = 1;
    for (auto& a : p->args)
        n += poly_size(a);
    for (auto& v : p->iter)
        n += poly_size(v.init) + poly_size(v.image);
    return n;
}

// ---- substitution --------------------------------------------------------

namespace {

using Subst = std::map<std::string, TcPolyPtr>;

bool relevant(const TcPolyPtr& p, const Subst& s) {
    for (auto& [x, e] : s)
        if (occurs(x, p))
            return true;
    return false;
}

bool captures(const std::string& y, const TcPolyPtr& p, const Subst& s) {
    for (auto& [x, e] : s)
        if (occurs(x, p) && occurs(y, e))
            return true;
    return false;
}

std::string stem_of(const std::string& n) {
    auto i = n.find('\'');
    return i == std::string::npos ? n : n.substr(0, i);
}

TcPolyPtr subst_rec(const TcPolyPtr& p, const Subst& s) {
    if (!relevant(p, s))
        return p;
    auto sub = [&](const TcPolyPtr& q) { return subst_rec(q, s); };
    switch (p->kind) {
    case PolyKind::Num: return p;
    case PolyKind::Var: return s.at(p->name);
    case PolyKind::Add: {
        std::vector<TcPolyPtr> xs;
        for (auto& a : p->args)
            xs.push_back(sub(a));
        return p_add(std::move(xs));
    }
    case PolyKind::Mul: {
        std::vector<TcPolyPtr> xs;
        for (auto& a : p->args)
            xs.push_back(sub(a));
        return p_mul(std::move(xs));
    }
    case PolyKind::Max: {
        std::vector<TcPolyPtr> xs;
        for (auto& a : p->args)
            xs.push_back(sub(a));
        return p_max(std::move(xs));
    }
    case PolyKind::Monus: return p_monus(sub(p->args[0]), p->num);
    case PolyKind::Lam: {
        Subst inner = s;
        inner.erase(p->name);
        std::string y = p->name;
        TcPolyPtr body = p->args[0];
        if (captures(y, body, inner)) {
            std::string z = fresh_name(stem_of(y));
            body = subst_rec(body, {{y, p_var(z, p->type)}});
            y = z;
        }
        return p_lam(y, p->type, subst_rec(body, inner));
    }
    case PolyKind::App: return p_app(sub(p->args[0]), sub(p->args[1]));
    case PolyKind::Pair: return p_pair(sub(p->args[0]), sub(p->args[1]));
    case PolyKind::Cost: return p_cost(sub(p->args[0]));
    case PolyKind::Pot: return p_pot(sub(p->args[0]));
    case PolyKind::Iter: {
        Subst inner = s;
        for (auto& v : p->iter)
            inner.erase(v.name);
        std::vector<IterVar> vars = p->iter;
        TcPolyPtr body = p->args[1];
        Subst rename;
        for (auto& v : vars) {
            bool cap = captures(v.name, body, inner);
            for (auto& w : vars)
                cap = cap || captures(v.name, w.image, inner);
            if (cap) {
                std::string z = fresh_name(stem_of(v.name));
                rename[v.name] = p_var(z, v.type);
                v.name = z;
            }
        }
        if (!rename.empty()) {
            body = subst_rec(body, rename);
            for (auto& v : vars)
                v.image = subst_rec(v.image, rename);
        }
        for (auto& v : vars) {
            v.init = sub(v.init);
            v.image = subst_rec(v.image, inner);
        }
        return p_iter(sub(p->args[0]), std::move(vars), subst_rec(body, inner));
    }
    }
    return p;
}

} // namespace

TcPolyPtr subst(const TcPolyPtr& p, const std::map<std::string, TcPolyPtr>& s) {
    if (s.empty())
        return p;
    return subst_rec(p, s);
}

// ---- typing --------------------------------------------------------------

TcTypePtr poly_type(const TcPolyPtr& p) {
    switch (p->kind) {
    case PolyKind::Num: return TcType::base(p->num == 0 ? Label::epsilon() : Label::diamond());
    case PolyKind::Var: return p->type;
    case PolyKind::Add:
    case PolyKind::Mul: {
        bool tally = false;
        Label l = Label::epsilon();
        for (auto& a : p->args) {
            auto t = poly_type(a);
            if (!base_like(*t))
                throw TcTypeError("arithmetic on a non-base polynomial: " + t->str());
            if (t->kind() == TcKind::Tally)
                tally = true;
            else
                l = label_join(l, t->label());
        }
        return tally ? TcType::tally() : TcType::base(l.computational_ceiling());
    }
    case PolyKind::Max: {
        if (p->args.empty())
            return TcType::base(Label::epsilon());
        TcTypePtr acc = poly_type(p->args[0]);
        for (std::size_t i = 1; i < p->args.size(); ++i) {
            auto t = poly_type(p->args[i]);
            if (base_like(*acc) && base_like(*t)) {
                if (acc->kind() == TcKind::Tally || t->kind() == TcKind::Tally)
                    acc = TcType::tally();
                else
                    acc = TcType::base(label_join(acc->label(), t->label()));
            } else if (tc_subtype(*acc, *t)) {
                acc = t;
            } else if (!tc_subtype(*t, *acc)) {
                throw TcTypeError("max of incompatible types " + acc->str() + " and " + t->str());
            }
        }
        return acc;
    }
    case PolyKind::Monus: return poly_type(p->args[0]);
    case PolyKind::Lam: return TcType::arrow(p->type, poly_type(p->args[0]));
    case PolyKind::App: {
        auto f = poly_type(p->args[0]);
        auto x = poly_type(p->args[1]);
        if (f->kind() != TcKind::Arrow)
            throw TcTypeError("applying a polynomial of type " + f->str());
        for (int k = 0; k < 8; ++k) {
            if (tc_subtype(*x, *f->fst()))
                return f->snd();
            f = shift_tc(f);
        }
        throw TcTypeError("argument of type " + x->str() + " does not fit " + poly_type(p->args[0])->str());
    }
    case PolyKind::Pair: {
        auto c = poly_type(p->args[0]);
        if (!base_like(*c))
            throw TcTypeError("cost component must be a number, got " + c->str());
        return TcType::product(TcType::tally(), poly_type(p->args[1]));
    }
    case PolyKind::Cost:
    case PolyKind::Pot: {
        auto t = poly_type(p->args[0]);
        if (t->kind() != TcKind::Product)
            throw TcTypeError("projection from a non-pair of type " + t->str());
        return p->kind == PolyKind::Cost ? TcType::tally() : t->snd();
    }
    case PolyKind::Iter: {
        if (!base_like(*poly_type(p->args[0])))
            throw TcTypeError("iteration count must be a number");
        for (auto& v : p->iter) {
            if (!tc_subtype(*poly_type(v.init), *v.type))
                throw TcTypeError("iteration start for " + v.name + " does not fit " + v.type->str());
            if (!tc_subtype(*poly_type(v.image), *v.type))
                throw TcTypeError("iteration image for " + v.name + " does not fit " + v.type->str());
        }
        return poly_type(p->args[1]);
    }
    }
    throw TcTypeError("unknown polynomial node");
}

// ---- evaluation ----------------------------------------------------------

PolyValuePtr PolyValue::number(const Nat& n) {
    auto v = std::make_shared<PolyValue>();
    v->n = n;
    return v;
}

PolyValuePtr PolyValue::pair(PolyValuePtr c, PolyValuePtr p) {
    auto v = std::make_shared<PolyValue>();
    v->kind = Kind::Pair;
    v->a = std::move(c);
    v->b = std::move(p);
    return v;
}

PolyValuePtr PolyValue::function(std::function<PolyValuePtr(const PolyValuePtr&)> f) {
    auto v = std::make_shared<PolyValue>();
    v->kind = Kind::Function;
    v->fn = std::move(f);
    return v;
}

const Nat& PolyValue::num() const {
    if (kind != Kind::Number)
        throw TcTypeError("expected a number");
    return n;
}

const PolyValuePtr& PolyValue::cost() const {
    if (kind != Kind::Pair)
        throw TcTypeError("expected a pair");
    return a;
}

const PolyValuePtr& PolyValue::pot() const {
    if (kind != Kind::Pair)
        throw TcTypeError("expected a pair");
    return b;
}

PolyValuePtr PolyValue::operator()(const PolyValuePtr& x) const {
    if (kind != Kind::Function)
        throw TcTypeError("expected a function");
    return fn(x);
}

PolyValuePtr value_max(const PolyValuePtr& a, const PolyValuePtr& b) {
    if (a->kind != b->kind)
        throw TcTypeError("max of values of different shapes");
    switch (a->kind) {
    case PolyValue::Kind::Number: return a->n >= b->n ? a : b;
    case PolyValue::Kind::Pair: return PolyValue::pair(value_max(a->a, b->a), value_max(a->b, b->b));
    case PolyValue::Kind::Function:
        return PolyValue::function([a, b](const PolyValuePtr& x) { return value_max((*a)(x), (*b)(x)); });
    }
    return a;
}

namespace {

struct EnvNode;
using EnvPtr = std::shared_ptr<const EnvNode>;
struct EnvNode {
    std::string name;
    PolyValuePtr v;
    EnvPtr up;
};

struct Evaluator {
    std::shared_ptr<const PolyEnv> top;

    const PolyValuePtr& lookup(const std::string& x, const EnvNode* e) const {
        for (; e; e = e->up.get())
            if (e->name == x)
                return e->v;
        auto it = top->find(x);
        if (it == top->end())
            throw TcTypeError("unbound polynomial variable " + x);
        return it->second;
    }

    PolyValuePtr eval(const TcPolyPtr& p, const EnvPtr& env) const {
        switch (p->kind) {
        case PolyKind::Num: return PolyValue::number(p->num);
        case PolyKind::Var: return lookup(p->name, env.get());
        case PolyKind::Add: {
            Nat s = 0;
            for (auto& a : p->args)
                s += eval(a, env)->num();
            return PolyValue::number(s);
        }
        case PolyKind::Mul: {
            Nat s = 1;
            for (auto& a : p->args)
                s *= eval(a, env)->num();
            return PolyValue::number(s);
        }
        case PolyKind::Max: {
            if (p->args.empty())
                return PolyValue::number(0);
            PolyValuePtr m = eval(p->args[0], env);
            for (std::size_t i = 1; i < p->args.size(); ++i)
                m = value_max(m, eval(p->args[i], env));
            return m;
        }
        case PolyKind::Monus: {
            Nat v = eval(p->args[0], env)->num();
            return PolyValue::number(v > p->num ? Nat(v - p->num) : Nat(0));
        }
        case PolyKind::Lam: {
            auto t = top;
            return PolyValue::function([t, p, env](const PolyValuePtr& x) {
                Evaluator ev{t};
                return ev.eval(p->args[0], std::make_shared<EnvNode>(EnvNode{p->name, x, env}));
            });
        }
        case PolyKind::App: return (*eval(p->args[0], env))(eval(p->args[1], env));
        case PolyKind::Pair: return PolyValue::pair(eval(p->args[0], env), eval(p->args[1], env));
        case PolyKind::Cost: return eval(p->args[0], env)->cost();
        case PolyKind::Pot: return eval(p->args[0], env)->pot();
        case PolyKind::Iter: {
            Nat rounds = eval(p->args[0], env)->num();
            EnvPtr cur = env;
            for (auto& v : p->iter)
                cur = std::make_shared<EnvNode>(EnvNode{v.name, eval(v.init, env), cur});
            for (Nat r = 0; r < rounds; ++r) {
                std::vector<PolyValuePtr> next;
                bool changed = false;
                for (auto& v : p->iter) {
                    auto old = lookup(v.name, cur.get());
                    auto nv = value_max(old, eval(v.image, cur));
                    changed = changed || nv != old;
                    next.push_back(nv);
                }
                // A round that changes nothing is a fixed point.
                if (!changed)
                    break;
                for (std::size_t i = 0; i < p->iter.size(); ++i)
                    cur = std::make_shared<EnvNode>(EnvNode{p->iter[i].name, next[i], cur});
            }
            return eval(p->args[1], cur);
        }
        }
        throw TcTypeError("unknown polynomial node");
    }
};

} // namespace

PolyValuePtr poly_eval(const TcPolyPtr& p, const PolyEnv& env) {
    Evaluator ev{std::make_shared<const PolyEnv>(env)};
    return ev.eval(p, nullptr);
}

Nat poly_eval_nat(const TcPolyPtr& p, const std::map<std::string, Nat>& env) {
    PolyEnv e;
    for (auto& [k, v] : env)
        e[k] = PolyValue::number(v);
    return poly_eval(p, e)->num();
}

// ---- classification ------------------------------------------------------

const char* class_name(PolyClass c) {
    switch (c) {
    case PolyClass::Strict: return "Strict";
    case PolyClass::Chary: return "Chary";
    case PolyClass::Safe: return "Safe";
    case PolyClass::None: return "None";
    }
    return "?";
}

namespace {

// Iterations are classified through one unfolding of their update.
TcPolyPtr unfold_iters(const TcPolyPtr& p) {
    bool has_iter = p->kind == PolyKind::Iter;
    std::function<bool(const TcPolyPtr&)> any = [&](const TcPolyPtr& q) {
        if (q->kind == PolyKind::Iter)
            return true;
        for (auto& a : q->args)
            if (any(a))
                return true;
        return false;
    };
    if (!has_iter && !any(p))
        return p;
    switch (p->kind) {
    case PolyKind::Iter: {
        Subst at_init, one;
        for (auto& v : p->iter)
            at_init[v.name] = unfold_iters(v.init);
        for (auto& v : p->iter)
            one[v.name] = p_max2(at_init[v.name], subst(unfold_iters(v.image), at_init));
        return subst(unfold_iters(p->args[1]), one);
    }
    case PolyKind::Lam: return p_lam(p->name, p->type, unfold_iters(p->args[0]));
    case PolyKind::Add:
    case PolyKind::Mul:
    case PolyKind::Max: {
        std::vector<TcPolyPtr> xs;
        for (auto& a : p->args)
            xs.push_back(unfold_iters(a));
        return p->kind == PolyKind::Add ? p_add(xs) : p->kind == PolyKind::Mul ? p_mul(xs) : p_max(xs);
    }
    case PolyKind::Monus: return p_monus(unfold_iters(p->args[0]), p->num);
    case PolyKind::App: return p_app(unfold_iters(p->args[0]), unfold_iters(p->args[1]));
    case PolyKind::Pair: return p_pair(unfold_iters(p->args[0]), unfold_iters(p->args[1]));
    case PolyKind::Cost: return p_cost(unfold_iters(p->args[0]));
    case PolyKind::Pot: return p_pot(unfold_iters(p->args[0]));
    default: return p;
    }
}

bool tail_at_most(const TcType& t, const TcType& b) {
    const TcType& tl = t.tail();
    return tl.kind() == TcKind::Base && tl.label() <= b.label();
}

bool tail_below(const TcType& t, const TcType& b) {
    const TcType& tl = t.tail();
    return tl.kind() == TcKind::Base && tl.label() < b.label();
}

bool vars_below(const TcPolyPtr& p, const TcType& b) {
    if (p->kind == PolyKind::Var)
        return tail_below(*p->type, b);
    if (p->kind == PolyKind::Lam) {
        // The binder is not free; check the other occurrences.
        auto q = subst(p->args[0], {{p->name, p_num(0)}});
        return vars_below(q, b);
    }
    for (auto& a : p->args)
        if (!vars_below(a, b))
            return false;
    return true;
}

bool strict_u(const TcPolyPtr& p, const TcType& b) {
    TcTypePtr t;
    try {
        t = poly_type(p);
    } catch (const TcTypeError&) {
        return false;
    }
    return tail_at_most(*t, b) && vars_below(p, b);
}

bool chary_atom(const TcPolyPtr& p, const TcType& b) {
    TcTypePtr t;
    try {
        t = poly_type(p);
    } catch (const TcTypeError&) {
        return false;
    }
    if (!tc_equal(*t, b))
        return false;
    // (v q1 ... qk), with or without the pot projections of pair-valued results
    const TcPolyPtr* q = &p;
    for (;;) {
        if ((*q)->kind == PolyKind::Pot && (*q)->args[0]->kind == PolyKind::App)
            q = &(*q)->args[0];
        if ((*q)->kind != PolyKind::App)
            break;
        if (!strict_u((*q)->args[1], b))
            return false;
        q = &(*q)->args[0];
    }
    return (*q)->kind == PolyKind::Var;
}

bool chary_u(const TcPolyPtr& p, const TcType& b) {
    if (p->kind == PolyKind::Max) {
        for (auto& a : p->args)
            if (!chary_atom(a, b))
                return false;
        return true;
    }
    return chary_atom(p, b);
}

bool safe_u(const TcPolyPtr& p, const TcType& b) {
    TcTypePtr t;
    try {
        t = poly_type(p);
    } catch (const TcTypeError&) {
        return false;
    }
    if (t->kind() == TcKind::Arrow) {
        if (t->snd()->kind() != TcKind::Product)
            return false;
        auto v = p_var(fresh_name("v"), t->fst());
        return safe_u(unfold_iters(p_pot(p_app(p, v))), b);
    }
    if (t->kind() != TcKind::Base)
        return false;
    if (strict_u(p, b) || chary_u(p, b))
        return true;
    if (b.label().oracular()) {
        if (p->kind != PolyKind::Max)
            return false;
        for (auto& a : p->args)
            if (!strict_u(a, b) && !chary_atom(a, b))
                return false;
        return true;
    }
    if (p->kind != PolyKind::Add)
        return false;
    int loose = 0;
    for (auto& a : p->args) {
        if (strict_u(a, b))
            continue;
        if (!chary_u(a, b))
            return false;
        ++loose;
    }
    return loose <= 1;
}

void require_base(const TcType& b) {
    if (b.kind() != TcKind::Base)
        throw TcTypeError("classification needs a base type, got " + b.str());
}

} // namespace

bool is_strict(const TcPolyPtr& p, const TcType& b) {
    require_base(b);
    return strict_u(unfold_iters(p), b);
}

bool is_chary(const TcPolyPtr& p, const TcType& b) {
    require_base(b);
    return chary_u(unfold_iters(p), b);
}

bool is_safe(const TcPolyPtr& p, const TcType& b) {
    require_base(b);
    return safe_u(unfold_iters(p), b);
}

bool is_safe_tc(const TcPolyPtr& q, const TcType& b) { return is_safe(p_pot(q), b); }

PolyClass classify(const TcPolyPtr& p, const TcType& b) {
    require_base(b);
    auto u = unfold_iters(p);
    // At arrow type only the safety rule is informative.
    TcTypePtr t;
    try {
        t = poly_type(u);
    } catch (const TcTypeError&) {
        return PolyClass::None;
    }
    if (t->kind() == TcKind::Arrow)
        return safe_u(u, b) ? PolyClass::Safe : PolyClass::None;
    // an explicit max of applications, including the empty one, reads as chary
    if (u->kind == PolyKind::Max && chary_u(u, b))
        return PolyClass::Chary;
    if (strict_u(u, b))
        return PolyClass::Strict;
    if (chary_u(u, b))
        return PolyClass::Chary;
    if (safe_u(u, b))
        return PolyClass::Safe;
    return PolyClass::None;
}

TcPolyPtr substitute_safe(const TcPolyPtr& p, const std::map<std::string, TcPolyPtr>& s, const TcType& b) {
    std::map<std::string, TcTypePtr> declared;
    std::function<void(const TcPolyPtr&)> collect = [&](const TcPolyPtr& q) {
        if (q->kind == PolyKind::Var)
            declared.emplace(q->name, q->type);
        for (auto& a : q->args)
            collect(a);
        for (auto& v : q->iter) {
            collect(v.init);
            collect(v.image);
        }
    };
    collect(p);
    bool pre = is_safe(p, b);
    for (auto& [x, e] : s) {
        auto it = declared.find(x);
        if (it == declared.end())
            continue;
        auto te = poly_type(e);
        if (!tc_subtype(*te, *it->second))
            throw TcTypeError("cannot substitute " + te->str() + " for " + x + " : " + it->second->str());
        const TcType& tl = it->second->tail();
        pre = pre && tl.kind() == TcKind::Base && is_safe(e, tl);
    }
    auto r = subst(p, s);
    if (pre && !is_safe(r, b))
        throw std::logic_error("substitution of safe polynomials produced an unsafe result: " + to_string(r));
    return r;
}

// ---- printing ------------------------------------------------------------

namespace {

void print(std::ostream& os, const TcPolyPtr& p) {
    auto list = [&](const char* sep, bool paren_add) {
        for (std::size_t i = 0; i < p->args.size(); ++i) {
            if (i)
                os << sep;
            bool wrap = paren_add && p->args[i]->kind == PolyKind::Add;
            if (wrap)
                os << '(';
            print(os, p->args[i]);
            if (wrap)
                os << ')';
        }
    };
    switch (p->kind) {
    case PolyKind::Num: os << p->num; break;
    case PolyKind::Var: os << p->name; break;
    case PolyKind::Add: list(" + ", false); break;
    case PolyKind::Mul: list("*", true); break;
    case PolyKind::Max:
        os << "max(";
        list(", ", false);
        os << ')';
        break;
    case PolyKind::Monus:
        os << "monus(";
        print(os, p->args[0]);
        os << ", " << p->num << ')';
        break;
    case PolyKind::Lam:
        os << "(fn " << p->name << " => ";
        print(os, p->args[0]);
        os << ')';
        break;
    case PolyKind::App:
        if (p->args[0]->kind == PolyKind::Var) {
            print(os, p->args[0]);
        } else {
            os << '(';
            print(os, p->args[0]);
            os << ')';
        }
        os << '(';
        print(os, p->args[1]);
        os << ')';
        break;
    case PolyKind::Pair:
        os << '(';
        print(os, p->args[0]);
        os << ", ";
        print(os, p->args[1]);
        os << ')';
        break;
    case PolyKind::Cost:
    case PolyKind::Pot:
        os << (p->kind == PolyKind::Cost ? "cost(" : "pot(");
        print(os, p->args[0]);
        os << ')';
        break;
    case PolyKind::Iter:
        os << "iter[";
        print(os, p->args[0]);
        for (auto& v : p->iter) {
            os << "; " << v.name << " := ";
            print(os, v.init);
            os << " | ";
            print(os, v.image);
        }
        os << "](";
        print(os, p->args[1]);
        os << ')';
        break;
    }
}

} // namespace

std::string to_string(const TcPolyPtr& p) {
    std::ostringstream os;
    print(os, p);
    return os.str();
}

std::string to_display(const TcPolyPtr& p) {
    std::string text = to_string(p);
    static const std::regex ident(R"([A-Za-z_@][A-Za-z0-9_]*(?:'[0-9]+)*)");
    std::set<std::string> taken;
    std::map<std::string, std::vector<std::string>> by_stem;
    for (std::sregex_iterator it(text.begin(), text.end(), ident), end; it != end; ++it) {
        std::string full = it->str();
        auto q = full.find('\'');
        if (q == std::string::npos) {
            taken.insert(full);
            continue;
        }
        auto& v = by_stem[full.substr(0, q)];
        if (std::find(v.begin(), v.end(), full) == v.end())
            v.push_back(full);
    }
    std::map<std::string, std::string> rename;
    for (auto& [stem, fulls] : by_stem) {
        int k = 1;
        for (auto& f : fulls) {
            std::string cand;
            do
                cand = k == 1 ? stem : stem + std::to_string(k);
            while (++k, taken.count(cand));
            taken.insert(cand);
            rename[f] = cand;
        }
    }
    std::string out;
    auto last = text.cbegin();
    for (std::sregex_iterator it(text.begin(), text.end(), ident), end; it != end; ++it) {
        out.append(last, (*it)[0].first);
        auto r = rename.find(it->str());
        out += r == rename.end() ? it->str() : r->second;
        last = (*it)[0].second;
    }
    out.append(last, text.cend());
    return out;
}

// ---- combinators ---------------------------------------------------------

namespace comb {

TcPolyPtr val(const TcPolyPtr& p, const TcType& potential_type) {
    if (potential_type.kind() == TcKind::Base)
        return p_pair(p_max2(p_num(1), p), p);
    return p_pair(p_num(1), p);
}

TcPolyPtr lambda_star(const std::string& v, TcTypePtr type, const TcPolyPtr& body) {
    return p_pair(p_num(1), p_lam(v, std::move(type), body));
}

TcPolyPtr star(const TcPolyPtr& x, const TcPolyPtr& y) {
    auto chi = p_app(p_pot(x), p_pot(y));
    return p_pair(p_add({p_cost(x), p_cost(y), p_cost(chi), p_num(1)}), p_pot(chi));
}

TcPolyPtr dally(const TcPolyPtr& l, const TcPolyPtr& x) { return p_pair(l + p_cost(x), p_pot(x)); }

TcPolyPtr pad(const TcPolyPtr& l, const TcPolyPtr& y) { return p_pair(p_cost(y), l + p_pot(y)); }

TcPolyPtr plusmax(const TcPolyPtr& z, const TcPolyPtr& y) {
    return p_pair(p_cost(z) + p_cost(y), p_max2(p_pot(z), p_pot(y)));
}

} // namespace comb

namespace vcomb {

PolyValuePtr tc(const Nat& cost, PolyValuePtr pot) { return PolyValue::pair(PolyValue::number(cost), std::move(pot)); }

PolyValuePtr val(const PolyValuePtr& p) {
    if (p->kind == PolyValue::Kind::Number)
        return tc(std::max(Nat(1), p->n), p);
    return tc(1, p);
}

PolyValuePtr star(const PolyValuePtr& x, const PolyValuePtr& y) {
    auto chi = (*x->pot())(y->pot());
    return tc(x->cost()->num() + y->cost()->num() + chi->cost()->num() + 1, chi->pot());
}

PolyValuePtr dally(const Nat& l, const PolyValuePtr& x) { return tc(l + x->cost()->num(), x->pot()); }

PolyValuePtr pad(const Nat& l, const PolyValuePtr& y) {
    return PolyValue::pair(y->cost(), PolyValue::number(l + y->pot()->num()));
}

PolyValuePtr plusmax(const PolyValuePtr& z, const PolyValuePtr& y) {
    return tc(z->cost()->num() + y->cost()->num(), value_max(z->pot(), y->pot()));
}

} // namespace vcomb

} // namespace atr
