#include "atr/eval.hpp"

#include <algorithm>
#include <cstring>
#include <ostream>
#include <unordered_map>

namespace atr {

const char* eval_error_name(EvalErrorKind k) {
    switch (k) {
    case EvalErrorKind::UnboundVariable: return "UnboundVariable";
    case EvalErrorKind::BudgetExhausted: return "BudgetExhausted";
    case EvalErrorKind::OracleUnresolved: return "OracleUnresolved";
    case EvalErrorKind::IllFormed: return "IllFormed";
    case EvalErrorKind::ArityMismatch: return "ArityMismatch";
    }
    return "?";
}

EvalError::EvalError(EvalErrorKind k, const std::string& msg)
    : std::runtime_error(std::string(eval_error_name(k)) + ": " + msg), kind(k) {}

std::optional<Oracle> builtin_oracle(const std::string& spec) {
    if (spec == "id")
        return Oracle{1, [](const std::vector<std::string>& a) { return a[0]; }};
    if (spec == "reverse")
        return Oracle{1, [](const std::vector<std::string>& a) { return std::string(a[0].rbegin(), a[0].rend()); }};
    if (spec.rfind("const=", 0) == 0) {
        std::string w = spec.substr(6);
        if (!is_word(w))
            return std::nullopt;
        return Oracle{1, [w](const std::vector<std::string>&) { return w; }};
    }
    return std::nullopt;
}

namespace {

// Words are persistent cons lists, most significant (leftmost) bit first.
struct WNode {
    std::uint32_t len;
    std::uint32_t bit;
    const WNode* next;
};

inline std::uint32_t wlen(const WNode* w) { return w ? w->len : 0; }

class Arena {
public:
    ~Arena() { release(); }

    void* alloc(std::size_t n) {
        n = (n + 15) & ~std::size_t(15);
        if (cur_ + n > end_) {
            std::size_t sz = std::max<std::size_t>(block_size, n);
            if (next_block_ < blocks_.size() && sizes_[next_block_] >= sz) {
                cur_ = blocks_[next_block_];
                end_ = cur_ + sizes_[next_block_];
            } else {
                char* b = static_cast<char*>(::operator new(sz));
                blocks_.insert(blocks_.begin() + static_cast<std::ptrdiff_t>(next_block_), b);
                sizes_.insert(sizes_.begin() + static_cast<std::ptrdiff_t>(next_block_), sz);
                cur_ = b;
                end_ = b + sz;
            }
            ++next_block_;
        }
        void* p = cur_;
        cur_ += n;
        return p;
    }

    template <class T, class... A>
    T* make(A&&... a) {
        return new (alloc(sizeof(T))) T{std::forward<A>(a)...};
    }

    // Keeps the blocks for reuse.
    void reset() {
        cur_ = end_ = nullptr;
        next_block_ = 0;
    }

    void release() {
        for (char* b : blocks_)
            ::operator delete(b);
        blocks_.clear();
        sizes_.clear();
        reset();
    }

private:
    static constexpr std::size_t block_size = 1 << 20;
    std::vector<char*> blocks_;
    std::vector<std::size_t> sizes_;
    std::size_t next_block_ = 0;
    char* cur_ = nullptr;
    char* end_ = nullptr;
};

enum class VK : std::uint8_t { Word, Closure, Oracle, OracleStage, CrecStage, CrecExt };

struct Frame;

struct Val {
    VK k = VK::Word;
    std::uint8_t nargs = 0;
    std::uint32_t act = 0;
    const void* p = nullptr;    // WNode / Term / Oracle / StageArgs
    const Frame* env = nullptr;
    const WNode* w = nullptr;   // crec clock
};

struct Frame {
    Symbol sym;
    Val v;
    const Frame* up;
};

// Collected oracle arguments, newest first.
struct StageArgs {
    const WNode* arg;
    const StageArgs* prev;
};

[[noreturn, gnu::noinline, gnu::cold]] void ill_formed(const char* what, const char* detail) {
    throw EvalError(EvalErrorKind::IllFormed, std::string(what) + detail);
}

[[noreturn, gnu::noinline, gnu::cold]] void unbound(const Term* t) {
    throw EvalError(EvalErrorKind::UnboundVariable, "'" + t->name + "'");
}

std::string to_string(const WNode* w) {
    std::string s;
    s.reserve(wlen(w));
    for (; w; w = w->next)
        s += w->bit ? '1' : '0';
    return s;
}

} // namespace

// Compiled form of a term: constants and oracles resolved, children as raw
// pointers into an arena.
struct Code {
    TermKind kind;
    std::uint8_t bit;
    std::uint16_t nparams;
    Symbol sym;
    const WNode* word;
    const Code* a;
    const Code* b;
    const Code* c;
    const Symbol* params;
    const Term* src;
    const Oracle* oracle;
};

struct Evaluator::Impl {
    OracleRegistry oracles;

    Arena code_arena;   // compiled code and constant words, kept across runs
    Arena scratch;      // per run
    std::unordered_map<const Term*, const Code*> compiled;
    std::vector<TermPtr> roots;   // keeps compiled terms alive
    const WNode* zero = nullptr;  // the word "0"

    std::uint64_t total = 0;
    std::uint64_t limit = 0;
    bool limited = false;
    bool slow = false;   // budget or trace active
    std::ostream* trace = nullptr;
    bool record = false;
    std::vector<Activation> acts;

    explicit Impl(OracleRegistry o) : oracles(std::move(o)) { zero = code_arena.make<WNode>(1u, 0u, nullptr); }

    [[gnu::always_inline]] void charge(const char* rule, std::uint64_t c) {
        total += c;
        if (__builtin_expect(slow, 0))
            charge_slow(rule, c);
    }

    [[gnu::noinline]] void charge_slow(const char* rule, std::uint64_t c) {
        if (limited && total > limit)
            throw EvalError(EvalErrorKind::BudgetExhausted, "cost exceeded budget of " + std::to_string(limit));
        if (trace)
            *trace << rule << '\t' << c << '\t' << total << '\n';
    }

    static const WNode* word_of(const std::string& bits, Arena& a) {
        const WNode* w = nullptr;
        for (std::size_t i = bits.size(); i-- > 0;)
            w = a.make<WNode>(wlen(w) + 1, static_cast<std::uint32_t>(bits[i] == '1'), w);
        return w;
    }

    const Code* compile(const Term* t) {
        if (!t)
            return nullptr;
        auto it = compiled.find(t);
        if (it != compiled.end())
            return it->second;
        auto c = code_arena.make<Code>();
        c->kind = t->kind;
        c->bit = static_cast<std::uint8_t>(t->bit);
        c->sym = t->sym;
        c->src = t;
        if (t->kind == TermKind::Const)
            c->word = word_of(t->bits, code_arena);
        if (t->kind == TermKind::Oracle) {
            auto o = oracles.find(t->name);
            c->oracle = o == oracles.end() ? nullptr : &o->second;
        }
        if (t->kind == TermKind::Crec) {
            auto ps = static_cast<Symbol*>(code_arena.alloc(sizeof(Symbol) * t->params.size()));
            for (std::size_t i = 0; i < t->params.size(); ++i)
                ps[i] = t->params[i].sym;
            c->params = ps;
            c->nparams = static_cast<std::uint16_t>(t->params.size());
        }
        c->a = compile(t->a.get());
        c->b = compile(t->b.get());
        c->c = compile(t->c.get());
        compiled.emplace(t, c);
        return c;
    }

    const Code* compile_root(const TermPtr& t) {
        if (compiled.size() > (1u << 20)) {
            compiled.clear();
            roots.clear();
            code_arena.reset();
            zero = code_arena.make<WNode>(1u, 0u, nullptr);
        }
        auto it = compiled.find(t.get());
        if (it != compiled.end())
            return it->second;
        roots.push_back(t);
        return compile(t.get());
    }

    static Val word(const WNode* w) {
        Val v;
        v.p = w;
        return v;
    }

    static const WNode* as_word(const Val& v, const char* what) {
        if (__builtin_expect(v.k != VK::Word, 0))
            ill_formed(what, " is not a word");
        return static_cast<const WNode*>(v.p);
    }

    // Unrolling a crec with clock `clock` under `env`.
    Val unroll(const Code* crec, const WNode* clock, const Frame* env, std::uint32_t act) {
        Val ext;
        ext.k = VK::CrecExt;
        ext.p = crec;
        ext.env = env;
        ext.w = scratch.make<WNode>(wlen(clock) + 1, 0u, clock);
        ext.act = act;
        Val st;
        st.k = VK::CrecStage;
        st.p = crec;
        st.env = scratch.make<Frame>(crec->sym, ext, env);
        st.w = clock;
        st.act = act;
        charge("Crec", 1);
        return st;
    }

    // Binds the next crec parameter. Returns the body to evaluate in `env`
    // when the guard passes; otherwise `out` holds the result.
    const Code* crec_step(const Val& f, const Val& x, Val& out, const Frame*& env) {
        auto crec = static_cast<const Code*>(f.p);
        std::size_t i = f.nargs;
        auto fr = scratch.make<Frame>(crec->params[i], x, f.env);
        if (i + 1 < crec->nparams) {
            out = f;
            out.env = fr;
            out.nargs = static_cast<std::uint8_t>(i + 1);
            charge("Val", 1);
            charge("App", 1);
            return nullptr;
        }
        // All parameters bound: the clock guard |a| < |v1|.
        const Frame* first = fr;
        for (std::size_t j = 0; j < i; ++j)
            first = first->up;
        auto v1 = as_word(first->v, "first crec argument");
        std::uint32_t clen = wlen(f.w), vlen = wlen(v1);
        if (record)
            note_guard(f.act, fr, crec->nparams, clen);
        charge("Guard", 2ull * std::min(clen, vlen) + 1);
        charge("App", 1);
        if (clen < vlen) {
            env = fr;
            return crec->b;
        }
        out = word(nullptr);
        return nullptr;
    }

    [[gnu::noinline]] void note_guard(std::uint32_t id, const Frame* fr, std::size_t k, std::size_t clen) {
        auto& act = acts[id];
        if (act.guards++ == 0) {
            std::vector<std::size_t> lens;
            for (const Frame* q = fr; lens.size() < k; q = q->up)
                lens.push_back(q->v.k == VK::Word ? wlen(static_cast<const WNode*>(q->v.p)) : 0);
            act.arg_lengths.assign(lens.rbegin(), lens.rend());
        }
        act.max_clock = std::max(act.max_clock, clen);
    }

    // Child evaluation with the common leaves handled in place.
    [[gnu::always_inline]] Val sub(const Code* t, const Frame* env) {
        if (t->kind == TermKind::Const) {
            charge("Val", 1);
            return word(t->word);
        }
        if (t->kind == TermKind::Var) {
            const Frame* f = env;
            while (f && f->sym != t->sym)
                f = f->up;
            if (f && f->v.k == VK::Word) {
                auto w = static_cast<const WNode*>(f->v.p);
                charge("Env", w && w->len > 1 ? w->len : 1);
                return f->v;
            }
        }
        return eval(t, env);
    }

    Val eval(const Code* t, const Frame* env) {
        for (;;) {
            switch (t->kind) {
            case TermKind::Const:
                charge("Val", 1);
                return word(t->word);
            case TermKind::Var: {
                const Frame* f = env;
                while (f && f->sym != t->sym)
                    f = f->up;
                if (__builtin_expect(!f, 0))
                    unbound(t->src);
                const Val& v = f->v;
                if (v.k == VK::Word) {
                    auto w = static_cast<const WNode*>(v.p);
                    charge("Env", w && w->len > 1 ? w->len : 1);
                    return v;
                }
                if (v.k == VK::CrecExt) {
                    Val st = unroll(static_cast<const Code*>(v.p), v.w, v.env, v.act);
                    charge("Env", 1);
                    return st;
                }
                charge("Env", 1);
                return v;
            }
            case TermKind::Oracle: {
                if (!t->oracle)
                    throw EvalError(EvalErrorKind::OracleUnresolved, "no binding for oracle '@" + t->src->name + "'");
                Val v;
                v.k = VK::Oracle;
                v.p = t->oracle;
                charge("Val", 1);
                return v;
            }
            case TermKind::Abs: {
                Val v;
                v.k = VK::Closure;
                v.p = t;
                v.env = env;
                charge("Val", 1);
                return v;
            }
            case TermKind::Crec: {
                if (t->a->kind != TermKind::Const)
                    ill_formed("crec clock", " is not a constant");
                std::uint32_t act = 0;
                if (record) {
                    act = static_cast<std::uint32_t>(acts.size());
                    acts.push_back(Activation{t->src, {}, 0, 0});
                }
                return unroll(t, t->a->word, env, act);
            }
            case TermKind::Ca: {
                auto w = as_word(sub(t->a, env), "operand of c_a");
                auto r = scratch.make<WNode>(wlen(w) + 1, static_cast<std::uint32_t>(t->bit), w);
                charge("Ca", 1);
                return word(r);
            }
            case TermKind::D: {
                auto w = as_word(sub(t->a, env), "operand of d");
                charge("D", 1);
                return word(w ? w->next : nullptr);
            }
            case TermKind::Ta: {
                auto w = as_word(sub(t->a, env), "operand of t_a");
                charge("Ta", 1);
                return word(w && w->bit == t->bit ? zero : nullptr);
            }
            case TermKind::Cond: {
                auto w = as_word(sub(t->a, env), "conditional test");
                charge("If", 1);
                t = w ? t->b : t->c;
                continue;
            }
            case TermKind::Down: {
                auto s = as_word(sub(t->a, env), "left argument of down");
                auto r = as_word(sub(t->b, env), "right argument of down");
                bool keep = wlen(s) <= wlen(r);
                charge(keep ? "Down0" : "Down1", 2ull * wlen(r) + 1);
                return word(keep ? s : nullptr);
            }
            case TermKind::App: {
                Val f = sub(t->a, env);
                Val x = sub(t->b, env);
                if (f.k == VK::Closure) {
                    auto abs = static_cast<const Code*>(f.p);
                    env = scratch.make<Frame>(abs->sym, x, f.env);
                    charge("App", 1);
                    t = abs->a;
                    continue;
                }
                if (f.k == VK::CrecStage) {
                    Val out;
                    const Code* body = crec_step(f, x, out, env);
                    if (!body)
                        return out;
                    t = body;
                    continue;
                }
                return apply_oracle(f, x);
            }
            }
            ill_formed("term", " has unknown kind");
        }
    }

    Val apply(const Val& f, const Val& x) {
        if (f.k == VK::Closure) {
            auto abs = static_cast<const Code*>(f.p);
            charge("App", 1);
            return eval(abs->a, scratch.make<Frame>(abs->sym, x, f.env));
        }
        if (f.k == VK::CrecStage) {
            Val out;
            const Frame* env = nullptr;
            const Code* body = crec_step(f, x, out, env);
            return body ? eval(body, env) : out;
        }
        return apply_oracle(f, x);
    }

    Val apply_oracle(const Val& f, const Val& x) {
        if (f.k != VK::Oracle && f.k != VK::OracleStage)
            ill_formed("applying a word", "");
        auto o = static_cast<const Oracle*>(f.k == VK::Oracle ? f.p : f.env);
        auto w = as_word(x, "oracle argument");
        auto prev = f.k == VK::Oracle ? nullptr : static_cast<const StageArgs*>(f.p);
        auto args = scratch.make<StageArgs>(w, prev);
        std::size_t have = static_cast<std::size_t>(f.nargs) + 1;
        if (have < o->arity) {
            Val st;
            st.k = VK::OracleStage;
            st.p = args;
            st.env = reinterpret_cast<const Frame*>(o);
            st.nargs = static_cast<std::uint8_t>(have);
            charge("O1", 1);
            return st;
        }
        std::vector<std::string> in(have);
        for (const StageArgs* q = args; q; q = q->prev)
            in[--have] = to_string(q->arg);
        std::string out = o->fn(in);
        if (!is_word(out))
            throw EvalError(EvalErrorKind::IllFormed, "oracle returned a non-word");
        charge("O0", out.size() + 1);
        return word(word_of(out, scratch));
    }

    // Evaluates t, then applies the result to each argument word as if the
    // arguments were constant terms.
    EvalResult run(const TermPtr& t, const std::vector<std::string>& args, const EvalOptions& opts) {
        const Code* code = compile_root(t);
        scratch.reset();
        total = 0;
        limited = opts.budget.has_value();
        limit = opts.budget.value_or(0);
        trace = opts.trace;
        record = opts.record_clocks;
        slow = limited || trace;
        acts.clear();
        Val v = eval(code, nullptr);
        for (auto& a : args) {
            Val w = word(word_of(a, scratch));
            charge("Val", 1);
            v = apply(v, w);
        }
        EvalResult r;
        r.cost = total;
        r.activations = std::move(acts);
        acts.clear();
        switch (v.k) {
        case VK::Word:
            r.is_word = true;
            r.word = to_string(static_cast<const WNode*>(v.p));
            break;
        case VK::Closure: r.description = "<fn>"; break;
        case VK::CrecStage: r.description = "<crec>"; break;
        default: r.description = "<oracle>"; break;
        }
        return r;
    }
};

Evaluator::Evaluator(OracleRegistry oracles) : impl_(std::make_unique<Impl>(std::move(oracles))) {}
Evaluator::~Evaluator() = default;

EvalResult Evaluator::eval(const TermPtr& closed, const EvalOptions& opts) { return impl_->run(closed, {}, opts); }

EvalResult Evaluator::apply(const TermPtr& t, const std::vector<std::string>& args, const EvalOptions& opts) {
    for (auto& a : args)
        if (!is_word(a))
            throw EvalError(EvalErrorKind::IllFormed, "argument '" + a + "' is not a word");
    return impl_->run(t, args, opts);
}

EvalResult eval(const TermPtr& closed, const OracleRegistry& oracles, const EvalOptions& opts) {
    Evaluator ev(oracles);
    return ev.eval(closed, opts);
}

namespace {

std::size_t syntactic_arity(const TermPtr& t) {
    std::size_t n = 0;
    const Term* cur = t.get();
    while (cur->kind == TermKind::Abs) {
        ++n;
        cur = cur->a.get();
    }
    if (cur->kind == TermKind::Crec)
        n += cur->params.size();
    return n;
}

} // namespace

EvalResult run_program(const Program& p, const std::vector<std::string>& args, const OracleRegistry& oracles,
                       const EvalOptions& opts) {
    if (!p.main)
        throw EvalError(EvalErrorKind::IllFormed, "program has no main");
    std::size_t arity = syntactic_arity(p.main);
    if (arity != args.size())
        throw EvalError(EvalErrorKind::ArityMismatch,
                        "main takes " + std::to_string(arity) + " arguments, got " + std::to_string(args.size()));
    Evaluator ev(oracles);
    return ev.apply(p.main, args, opts);
}

} // namespace atr
