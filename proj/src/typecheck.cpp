#include "atr/typecheck.hpp"

#include <algorithm>
#include <sstream>

namespace atr {

const char* tag_name(TypeErrorTag tag) {
    switch (tag) {
    case TypeErrorTag::AffinityViolation: return "AffinityViolation";
    case TypeErrorTag::TierMismatch: return "TierMismatch";
    case TypeErrorTag::ClockNotConstant: return "ClockNotConstant";
    case TypeErrorTag::NotConsTailOrPlainAffine: return "NotConsTailOrPlainAffine";
    case TypeErrorTag::CrecTypeConstraint: return "CrecTypeConstraint";
    case TypeErrorTag::UnknownVariable: return "UnknownVariable";
    }
    return "?";
}

TypeError::TypeError(TypeErrorTag t, const std::string& msg, SourcePos p)
    : std::runtime_error(std::string(tag_name(t)) + " at " + p.str() + ": " + msg), tag(t), pos(p) {}

namespace {

// Labels tried when a crec result type is omitted.
constexpr std::uint32_t max_inferred_label = 24;

std::set<std::string> set_union(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::set<std::string> out = a;
    out.insert(b.begin(), b.end());
    return out;
}

AtrTypePtr crec_type(const std::vector<Param>& params, const AtrTypePtr& result) {
    AtrTypePtr ty = result;
    for (auto it = params.rbegin(); it != params.rend(); ++it)
        ty = AtrType::arrow(it->type, ty);
    return ty;
}

// First label among params/result violating the tier constraint.
std::optional<Label> tier_violation(const std::vector<Param>& params, Label result) {
    Label b1 = params.front().type->label();
    auto bad = [&](Label b) { return label_leq(b, b1) && !b.oracular(); };
    if (bad(result))
        return result;
    for (auto& p : params)
        if (bad(p.type->label()))
            return p.type->label();
    return std::nullopt;
}

// Applies shift_base until the domain accepts `arg`; nullopt if it never does.
std::optional<std::pair<AtrTypePtr, int>> fit_argument(const AtrTypePtr& fun, const AtrType& arg) {
    AtrTypePtr cur = fun;
    for (int shifts = 0; shifts <= static_cast<int>(max_inferred_label); ++shifts) {
        if (subtype(arg, *cur->dom()))
            return std::make_pair(cur, shifts);
        auto next = shift_base(cur);
        if (!next)
            return std::nullopt;
        cur = *next;
    }
    return std::nullopt;
}

class Checker {
public:
    explicit Checker(const Context& oracles) : oracles_(oracles) {}

    Derivation run(const Context& gamma, const Context& delta, const TermPtr& t) {
        switch (t->kind) {
        case TermKind::Const:
            return leaf(t->bits.empty() ? "Zero-I" : "Const-I", t,
                        AtrType::base(t->bits.empty() ? Label::epsilon() : Label::diamond()), {});
        case TermKind::Var: {
            if (auto it = delta.find(t->name); it != delta.end())
                return leaf("Id-A", t, it->second, {t->name});
            if (auto it = gamma.find(t->name); it != gamma.end())
                return leaf("Id-I", t, it->second, {});
            throw TypeError(TypeErrorTag::UnknownVariable, "unbound variable '" + t->name + "'", t->pos);
        }
        case TermKind::Oracle: {
            auto it = oracles_.find(t->name);
            if (it == oracles_.end())
                throw TypeError(TypeErrorTag::UnknownVariable, "undeclared oracle '@" + t->name + "'", t->pos);
            return leaf("Oracle", t, it->second, {});
        }
        case TermKind::Ca:
        case TermKind::D:
        case TermKind::Ta: {
            auto sub = run(gamma, delta, t->a);
            require_base(sub, t, "operand");
            Label l = sub.type->label();
            if (t->kind == TermKind::Ca)
                l = l.computational_ceiling();
            const char* rule = t->kind == TermKind::Ca ? "Ca-I" : t->kind == TermKind::D ? "D-I" : "Ta-I";
            auto aff = sub.affine;
            auto term = rebuild(t, sub.term);
            return node(rule, term, AtrType::base(l), aff, {std::move(sub)});
        }
        case TermKind::Cond: {
            auto test = run(gamma, delta, t->a);
            if (!test.affine.empty())
                throw TypeError(TypeErrorTag::AffinityViolation,
                                "recursion variable '" + *test.affine.begin() + "' occurs in a conditional test",
                                t->a->pos);
            require_base(test, t, "conditional test");
            auto th = run(gamma, delta, t->b);
            auto el = run(gamma, delta, t->c);
            require_base(th, t, "then branch");
            require_base(el, t, "else branch");
            auto ty = AtrType::base(label_join(th.type->label(), el.type->label()));
            auto aff = set_union(th.affine, el.affine);
            auto term = mk_cond(test.term, th.term, el.term, t->pos);
            return node("If-I", term, ty, aff, {std::move(test), std::move(th), std::move(el)});
        }
        case TermKind::Down: {
            auto s = run(gamma, delta, t->a);
            auto r = run(gamma, delta, t->b);
            if (!s.affine.empty() && !r.affine.empty())
                throw TypeError(TypeErrorTag::AffinityViolation, "recursion variable occurs in both arguments of down",
                                t->pos);
            require_base(s, t, "left argument of down");
            require_base(r, t, "right argument of down");
            auto aff = set_union(s.affine, r.affine);
            auto ty = r.type;
            auto term = mk_down(s.term, r.term, t->pos);
            return node("Down-I", term, ty, aff, {std::move(s), std::move(r)});
        }
        case TermKind::Abs: {
            if (!t->annot)
                throw TypeError(TypeErrorTag::TierMismatch, "binder '" + t->name + "' needs a type annotation", t->pos);
            return abs(gamma, delta, t, t->annot);
        }
        case TermKind::App:
            return app(gamma, delta, t);
        case TermKind::Crec:
            return crec(gamma, delta, t);
        }
        throw std::logic_error("unreachable");
    }

private:
    static Derivation leaf(const char* rule, const TermPtr& t, AtrTypePtr ty, std::set<std::string> aff) {
        Derivation d;
        d.rule = rule;
        d.term = t;
        d.type = std::move(ty);
        d.affine = std::move(aff);
        return d;
    }

    static Derivation node(const char* rule, TermPtr t, AtrTypePtr ty, std::set<std::string> aff,
                           std::vector<Derivation> kids) {
        Derivation d = leaf(rule, t, std::move(ty), std::move(aff));
        d.children = std::move(kids);
        return d;
    }

    static TermPtr rebuild(const TermPtr& t, const TermPtr& a) {
        if (a == t->a)
            return t;
        auto n = std::make_shared<Term>(*t);
        n->a = a;
        return n;
    }

    static void require_base(const Derivation& d, const TermPtr& at, const char* what) {
        if (!d.type->is_base())
            throw TypeError(TypeErrorTag::TierMismatch,
                            std::string(what) + " has function type " + d.type->str() + ", expected a base type",
                            at->pos);
    }

    Derivation abs(const Context& gamma, const Context& delta, const TermPtr& t, const AtrTypePtr& binder) {
        Context g = gamma;
        Context dl = delta;
        g[t->name] = binder;
        dl.erase(t->name);
        auto body = run(g, dl, t->a);
        auto ty = AtrType::arrow(binder, body.type);
        TermPtr term = t;
        if (body.term != t->a || t->annot != binder)
            term = mk_abs(t->name, binder, body.term, t->pos);
        auto aff = body.affine;
        return node("Abs-I", term, ty, aff, {std::move(body)});
    }

    Derivation app(const Context& gamma, const Context& delta, const TermPtr& t) {
        Derivation fun, arg;
        if (t->a->kind == TermKind::Abs && !t->a->annot) {
            // let val x = s in body: the binder takes the argument's type
            arg = run(gamma, delta, t->b);
            require_base(arg, t->b, "let-bound value");
            fun = abs(gamma, delta, t->a, arg.type);
        } else {
            fun = run(gamma, delta, t->a);
            arg = run(gamma, delta, t->b);
        }
        if (!fun.affine.empty() && !arg.affine.empty())
            throw TypeError(TypeErrorTag::AffinityViolation,
                            "recursion variable occurs in both function and argument of an application", t->pos);
        if (!fun.type->is_arrow())
            throw TypeError(TypeErrorTag::TierMismatch, "applying a term of base type " + fun.type->str(), t->pos);
        if (!arg.affine.empty() && fun.type->dom()->level() > 0)
            throw TypeError(TypeErrorTag::AffinityViolation,
                            "recursion variable in an argument of higher type " + fun.type->dom()->str(), t->b->pos);
        auto fit = fit_argument(fun.type, *arg.type);
        if (!fit)
            throw TypeError(TypeErrorTag::TierMismatch,
                            "argument of type " + arg.type->str() + " does not fit " + fun.type->dom()->str(),
                            t->b->pos);
        auto [fty, shifts] = *fit;
        auto aff = set_union(fun.affine, arg.affine);
        TermPtr term = t;
        if (fun.term != t->a || arg.term != t->b)
            term = mk_app(fun.term, arg.term, t->pos);
        auto d = node("App-E", term, fty->cod(), aff, {});
        d.fun_type = fty;
        d.shifts = shifts;
        d.children.push_back(std::move(fun));
        d.children.push_back(std::move(arg));
        return d;
    }

    Derivation crec(const Context& gamma, const Context& delta, const TermPtr& t) {
        if (t->a->kind != TermKind::Const)
            throw TypeError(TypeErrorTag::ClockNotConstant, "crec clock must be a string constant", t->a->pos);
        auto fv = free_vars(t);
        for (auto& [x, _] : delta)
            if (fv.count(x))
                throw TypeError(TypeErrorTag::AffinityViolation,
                                "recursion variable '" + x + "' occurs inside a nested crec", t->pos);
        for (auto& p : t->params)
            if (!p.type->is_base())
                throw TypeError(TypeErrorTag::CrecTypeConstraint,
                                "crec parameter '" + p.name + "' must have a base type", t->pos);
        Context g = gamma;
        g.erase(t->name);
        for (auto& p : t->params)
            g[p.name] = p.type;

        auto attempt = [&](Label result) -> Derivation {
            if (auto bad = tier_violation(t->params, result))
                throw TypeError(TypeErrorTag::CrecTypeConstraint,
                                "label " + bad->pretty() + " is below the first parameter's label but not oracular",
                                t->pos);
            auto b0 = AtrType::base(result);
            auto fty = crec_type(t->params, b0);
            Context dl{{t->name, fty}};
            for (auto& p : t->params)
                dl.erase(p.name);
            auto body = run(g, dl, t->b);
            if (!subtype(*body.type, *b0))
                throw TypeError(TypeErrorTag::TierMismatch,
                                "crec body has type " + body.type->str() + ", expected " + b0->str(), t->b->pos);
            // After typing, so that affinity errors in the body take precedence.
            if (!tail_len(t->name, t->b, t->params.size()) && !is_plain_affine(t->name, t->b))
                throw TypeError(TypeErrorTag::NotConsTailOrPlainAffine,
                                "'" + t->name + "' is neither in cons-tail position nor plain affine", t->pos);
            TermPtr term = t;
            if (body.term != t->b || !t->annot) {
                auto n = std::make_shared<Term>(*t);
                n->b = body.term;
                n->annot = b0;
                term = n;
            }
            auto clock = leaf(t->a->bits.empty() ? "Zero-I" : "Const-I", t->a,
                              AtrType::base(t->a->bits.empty() ? Label::epsilon() : Label::diamond()), {});
            return node("Crec-I", term, fty, {}, {std::move(clock), std::move(body)});
        };

        if (t->annot) {
            if (!t->annot->is_base())
                throw TypeError(TypeErrorTag::CrecTypeConstraint, "crec result must be a base type", t->pos);
            return attempt(t->annot->label());
        }
        std::optional<TypeError> first;
        for (std::uint32_t len = 0; len <= max_inferred_label; ++len) {
            Label l = Label::of_length(len);
            if (tier_violation(t->params, l))
                continue;
            try {
                return attempt(l);
            } catch (const TypeError& e) {
                // Only a body whose type exceeds the candidate is worth retrying higher.
                if (e.tag != TypeErrorTag::TierMismatch)
                    throw;
                if (!first)
                    first = e;
            }
        }
        if (first)
            throw *first;
        throw TypeError(TypeErrorTag::CrecTypeConstraint, "no result label satisfies the crec tier constraint", t->pos);
    }

    const Context& oracles_;
};

} // namespace

Typing infer(const Context& gamma, const Context& delta, const TermPtr& t, const Context& oracles) {
    Checker c(oracles);
    auto d = c.run(gamma, delta, t);
    return Typing{d.type, d.term, std::move(d)};
}

Typing check_crec(const Context& gamma, const TermPtr& crec, const Context& oracles) {
    if (crec->kind != TermKind::Crec)
        throw std::invalid_argument("check_crec expects a crec term");
    return infer(gamma, {}, crec, oracles);
}

Typing check_program(const Program& p) {
    if (!p.main)
        throw TypeError(TypeErrorTag::UnknownVariable, "program has no 'main' declaration", {});
    return infer({}, {}, p.main, p.oracles);
}

namespace {

struct Validator {
    const Context& oracles;
    std::string why;

    bool fail(const Derivation& d, const std::string& msg) {
        why = d.rule + " at " + d.term->pos.str() + ": " + msg;
        return false;
    }

    bool kids(const Derivation& d, std::size_t n) { return d.children.size() == n; }

    bool check(const Derivation& d, const Context& gamma, const Context& delta) {
        const auto& t = d.term;
        auto base = [](const Derivation& c) { return c.type && c.type->is_base(); };
        if (d.rule == "Zero-I")
            return (t->kind == TermKind::Const && t->bits.empty() && type_equal(*d.type, *AtrType::base({})))
                       ? true
                       : fail(d, "not ε : N[e]");
        if (d.rule == "Const-I")
            return (t->kind == TermKind::Const && !t->bits.empty() &&
                    type_equal(*d.type, *AtrType::base(Label::diamond())))
                       ? true
                       : fail(d, "not K : N[d]");
        if (d.rule == "Id-I") {
            auto it = gamma.find(t->name);
            if (t->kind != TermKind::Var || it == gamma.end() || delta.count(t->name) ||
                !type_equal(*it->second, *d.type) || !d.affine.empty())
                return fail(d, "intuitionistic variable mismatch");
            return true;
        }
        if (d.rule == "Id-A") {
            auto it = delta.find(t->name);
            if (t->kind != TermKind::Var || it == delta.end() || !type_equal(*it->second, *d.type) ||
                d.affine != std::set<std::string>{t->name})
                return fail(d, "affine variable mismatch");
            return true;
        }
        if (d.rule == "Oracle") {
            auto it = oracles.find(t->name);
            return (t->kind == TermKind::Oracle && it != oracles.end() && type_equal(*it->second, *d.type))
                       ? true
                       : fail(d, "oracle mismatch");
        }
        if (d.rule == "Ca-I" || d.rule == "D-I" || d.rule == "Ta-I") {
            if (!kids(d, 1) || !check(d.children[0], gamma, delta))
                return why.empty() ? fail(d, "bad premise") : false;
            const auto& c = d.children[0];
            if (!base(c) || !d.type->is_base() || c.affine != d.affine || !term_equal(c.term, t->a))
                return fail(d, "premise shape");
            Label expect = d.rule == "Ca-I" ? c.type->label().computational_ceiling() : c.type->label();
            return d.type->label() == expect ? true : fail(d, "result label");
        }
        if (d.rule == "If-I") {
            if (!kids(d, 3))
                return fail(d, "arity");
            for (auto& c : d.children)
                if (!check(c, gamma, delta))
                    return false;
            const auto& [s, a, b] = std::tie(d.children[0], d.children[1], d.children[2]);
            if (!s.affine.empty())
                return fail(d, "affine variable in test");
            if (!base(s) || !base(a) || !base(b) || !d.type->is_base())
                return fail(d, "non-base conditional");
            if (!subtype(*a.type, *d.type) || !subtype(*b.type, *d.type))
                return fail(d, "branch not below result");
            return d.affine == set_union(a.affine, b.affine) ? true : fail(d, "affine bookkeeping");
        }
        if (d.rule == "Down-I") {
            if (!kids(d, 2) || !check(d.children[0], gamma, delta) || !check(d.children[1], gamma, delta))
                return why.empty() ? fail(d, "bad premise") : false;
            const auto& s = d.children[0];
            const auto& r = d.children[1];
            if (!s.affine.empty() && !r.affine.empty())
                return fail(d, "affine variable in both arguments");
            if (!base(s) || !base(r) || !type_equal(*r.type, *d.type))
                return fail(d, "down typing");
            return true;
        }
        if (d.rule == "Abs-I") {
            if (!kids(d, 1) || t->kind != TermKind::Abs || !t->annot || !d.type->is_arrow())
                return fail(d, "abstraction shape");
            Context g = gamma, dl = delta;
            g[t->name] = t->annot;
            dl.erase(t->name);
            if (!check(d.children[0], g, dl))
                return false;
            if (!type_equal(*d.type->dom(), *t->annot) || !subtype(*d.children[0].type, *d.type->cod()))
                return fail(d, "abstraction type");
            return true;
        }
        if (d.rule == "App-E") {
            if (!kids(d, 2) || !check(d.children[0], gamma, delta) || !check(d.children[1], gamma, delta))
                return why.empty() ? fail(d, "bad premise") : false;
            const auto& f = d.children[0];
            const auto& a = d.children[1];
            if (!f.affine.empty() && !a.affine.empty())
                return fail(d, "affine variable on both sides");
            if (!f.type->is_arrow() || !d.fun_type)
                return fail(d, "function not an arrow");
            if (!a.affine.empty() && f.type->dom()->level() > 0)
                return fail(d, "affine argument at higher type");
            AtrTypePtr cur = f.type;
            for (int i = 0; i < d.shifts; ++i) {
                auto next = shift_base(cur);
                if (!next)
                    return fail(d, "shift not applicable");
                cur = *next;
            }
            if (!type_equal(*cur, *d.fun_type) || !subtype(*a.type, *cur->dom()) ||
                !type_equal(*cur->cod(), *d.type))
                return fail(d, "application typing");
            return true;
        }
        if (d.rule == "Crec-I") {
            if (!kids(d, 2) || t->kind != TermKind::Crec || !t->annot)
                return fail(d, "crec shape");
            if (t->a->kind != TermKind::Const || !check(d.children[0], gamma, delta))
                return fail(d, "clock");
            for (auto& [x, _] : delta)
                if (occurs_free(x, t))
                    return fail(d, "affine variable inside crec");
            if (tier_violation(t->params, t->annot->label()))
                return fail(d, "tier constraint");
            if (!tail_len(t->name, t->b, t->params.size()) && !is_plain_affine(t->name, t->b))
                return fail(d, "recursion shape");
            auto fty = crec_type(t->params, t->annot);
            if (!type_equal(*fty, *d.type))
                return fail(d, "crec type");
            Context g = gamma;
            g.erase(t->name);
            for (auto& p : t->params)
                g[p.name] = p.type;
            Context dl{{t->name, fty}};
            for (auto& p : t->params)
                dl.erase(p.name);
            if (!check(d.children[1], g, dl))
                return false;
            return subtype(*d.children[1].type, *t->annot) ? true : fail(d, "body type");
        }
        return fail(d, "unknown rule");
    }
};

void render_into(const Derivation& d, int depth, std::ostringstream& out) {
    std::string text = pretty(d.term);
    if (text.size() > 60)
        text = text.substr(0, 57) + "...";
    out << std::string(2 * depth, ' ') << d.rule << "  " << text << " : " << d.type->str();
    if (d.shifts)
        out << "  [shift x" << d.shifts << "]";
    out << '\n';
    for (auto& c : d.children)
        render_into(c, depth + 1, out);
}

} // namespace

bool validate(const Derivation& d, const Context& gamma, const Context& delta, const Context& oracles,
              std::string* why) {
    Validator v{oracles, {}};
    bool ok = v.check(d, gamma, delta);
    if (!ok && why)
        *why = v.why;
    return ok;
}

std::string render(const Derivation& d) {
    std::ostringstream out;
    render_into(d, 0, out);
    return out.str();
}

} // namespace atr
