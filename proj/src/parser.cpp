#include "atr/parser.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace atr {

ParseError::ParseError(const std::string& msg, SourcePos p, std::string o)
    : std::runtime_error((o.empty() ? "" : o + ":") + p.str() + ": " + msg), pos(p), origin(std::move(o)) {}

TermPtr Program::lookup(const std::string& name) const {
    for (auto& [n, t] : decls)
        if (n == name)
            return t;
    return nullptr;
}

namespace {

enum class Tok { Ident, String, Oracle, Sym, End };

struct Token {
    Tok kind;
    std::string text;
    SourcePos pos;
};

const std::set<std::string> keywords = {"letrec", "in", "end", "let", "val", "fn", "if", "then", "else",
                                        "crec", "down", "rec", "c0", "c1", "d", "t0", "t1", "use", "oracle"};

class Lexer {
public:
    Lexer(std::string_view src, std::string origin) : src_(src), origin_(std::move(origin)) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            SourcePos p{line_, col_};
            if (i_ >= src_.size()) {
                out.push_back({Tok::End, "", p});
                return out;
            }
            char c = src_[i_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::string s;
                while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_' ||
                                            src_[i_] == '\''))
                    s += advance();
                out.push_back({Tok::Ident, s, p});
            } else if (c == '@') {
                advance();
                std::string s;
                while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                    s += advance();
                if (s.empty())
                    throw ParseError("expected oracle name after '@'", p, origin_);
                out.push_back({Tok::Oracle, s, p});
            } else if (c == '"') {
                advance();
                std::string s;
                while (i_ < src_.size() && src_[i_] != '"') {
                    if (src_[i_] == '\n')
                        throw ParseError("unterminated string literal", p, origin_);
                    s += advance();
                }
                if (i_ >= src_.size())
                    throw ParseError("unterminated string literal", p, origin_);
                advance();
                out.push_back({Tok::String, s, p});
            } else if (src_.substr(i_, 2) == "=>" || src_.substr(i_, 2) == "->") {
                std::string s{src_.substr(i_, 2)};
                advance();
                advance();
                out.push_back({Tok::Sym, s, p});
            } else if (std::string_view("():.;=[]").find(c) != std::string_view::npos) {
                advance();
                out.push_back({Tok::Sym, std::string(1, c), p});
            } else {
                throw ParseError(std::string("unexpected character '") + c + "'", p, origin_);
            }
        }
    }

private:
    char advance() {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (i_ < src_.size()) {
            if (std::isspace(static_cast<unsigned char>(src_[i_]))) {
                advance();
            } else if (src_.substr(i_, 2) == "--") {
                while (i_ < src_.size() && src_[i_] != '\n')
                    advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::string origin_;
    std::size_t i_ = 0;
    int line_ = 1, col_ = 1;
};

class Parser {
public:
    Parser(std::vector<Token> toks, std::string origin) : toks_(std::move(toks)), origin_(std::move(origin)) {}

    const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
    bool at_end() const { return peek().kind == Tok::End; }

    bool is_sym(const std::string& s, std::size_t k = 0) const {
        return peek(k).kind == Tok::Sym && peek(k).text == s;
    }
    bool is_kw(const std::string& s, std::size_t k = 0) const {
        return peek(k).kind == Tok::Ident && peek(k).text == s;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        const auto& t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(msg + ", got " + got, t.pos, origin_);
    }

    Token expect_sym(const std::string& s) {
        if (!is_sym(s))
            fail("expected '" + s + "'");
        return toks_[i_++];
    }
    Token expect_kw(const std::string& s) {
        if (!is_kw(s))
            fail("expected '" + s + "'");
        return toks_[i_++];
    }
    std::string expect_name() {
        const auto& t = peek();
        if (t.kind != Tok::Ident || keywords.count(t.text))
            fail("expected identifier");
        ++i_;
        return t.text;
    }

    AtrTypePtr type() {
        AtrTypePtr lhs;
        if (is_sym("(")) {
            ++i_;
            lhs = type();
            expect_sym(")");
        } else {
            const auto& t = peek();
            if (t.kind != Tok::Ident || t.text != "N")
                fail("expected type");
            ++i_;
            expect_sym("[");
            const auto& lt = peek();
            if (lt.kind != Tok::Ident)
                fail("expected label");
            ++i_;
            try {
                lhs = AtrType::base(Label::parse(lt.text));
            } catch (const LabelError& e) {
                throw ParseError(e.what(), lt.pos, origin_);
            }
            expect_sym("]");
        }
        if (is_sym("->")) {
            ++i_;
            return AtrType::arrow(lhs, type());
        }
        return lhs;
    }

    TermPtr term() {
        const auto& t = peek();
        SourcePos p = t.pos;
        if (is_kw("fn")) {
            ++i_;
            std::string x = expect_name();
            expect_sym(":");
            auto ty = type();
            expect_sym("=>");
            return mk_abs(x, ty, term(), p);
        }
        if (is_kw("if")) {
            ++i_;
            auto c = term();
            expect_kw("then");
            auto a = term();
            expect_kw("else");
            return mk_cond(c, a, term(), p);
        }
        if (is_kw("let")) {
            ++i_;
            expect_kw("val");
            SourcePos xp = peek().pos;
            std::string x = expect_name();
            AtrTypePtr ty;
            if (is_sym(":")) {
                ++i_;
                ty = type();
                if (!ty->is_base())
                    throw ParseError("let val binder must have a base type", xp, origin_);
            }
            expect_sym("=");
            auto s = term();
            expect_kw("in");
            auto body = term();
            expect_kw("end");
            return mk_app(mk_abs(x, ty, body, p), s, p);
        }
        if (is_kw("letrec")) {
            ++i_;
            std::string f = expect_name();
            AtrTypePtr ty;
            if (is_sym(":")) {
                ++i_;
                ty = type();
            }
            expect_sym("=");
            auto s = term();
            expect_kw("in");
            auto body = term();
            expect_kw("end");
            auto rec = make_crec(mk_const("", p), f, ty, s, p);
            return subst(body, f, rec);
        }
        return application();
    }

    // Splits the leading fn chain of s into crec parameters.
    TermPtr make_crec(TermPtr clock, const std::string& f, AtrTypePtr annot, TermPtr s, SourcePos p) {
        std::vector<Param> params;
        while (s->kind == TermKind::Abs && s->annot) {
            params.push_back(mk_param(s->name, s->annot));
            s = s->a;
        }
        if (params.empty())
            throw ParseError("recursive definition of '" + f + "' needs at least one fn parameter", p, origin_);
        AtrTypePtr result;
        if (annot) {
            // Either the result type or the full arrow type.
            AtrTypePtr cur = annot;
            std::size_t k = 0;
            while (cur->is_arrow() && k < params.size()) {
                cur = cur->cod();
                ++k;
            }
            if (k != 0 && k != params.size())
                throw ParseError("annotation of '" + f + "' does not match its parameters", p, origin_);
            if (!cur->is_base())
                throw ParseError("result annotation of '" + f + "' must be a base type", p, origin_);
            result = cur;
        }
        return mk_crec(std::move(clock), f, std::move(params), s, result, p);
    }

    bool starts_atom() const {
        const auto& t = peek();
        if (t.kind == Tok::String || t.kind == Tok::Oracle)
            return true;
        if (t.kind == Tok::Sym)
            return t.text == "(";
        return t.kind == Tok::Ident && !keywords.count(t.text);
    }

    TermPtr application() {
        const auto& t = peek();
        SourcePos p = t.pos;
        if (t.kind == Tok::Ident) {
            const std::string& k = t.text;
            if (k == "c0" || k == "c1") {
                ++i_;
                return mk_ca(k == "c1", atom(), p);
            }
            if (k == "t0" || k == "t1") {
                ++i_;
                return mk_ta(k == "t1", atom(), p);
            }
            if (k == "d") {
                ++i_;
                return mk_d(atom(), p);
            }
            if (k == "down") {
                ++i_;
                auto s = atom();
                return mk_down(s, atom(), p);
            }
            if (k == "crec") {
                ++i_;
                auto clock = atom();
                expect_sym("(");
                expect_kw("rec");
                std::string f = expect_name();
                AtrTypePtr annot;
                if (is_sym(":")) {
                    ++i_;
                    annot = type();
                }
                expect_sym(".");
                auto body = term();
                expect_sym(")");
                return arguments(make_crec(clock, f, annot, body, p));
            }
        }
        if (!starts_atom())
            fail("expected term");
        return arguments(atom());
    }

    TermPtr arguments(TermPtr head) {
        while (starts_atom()) {
            SourcePos ap = peek().pos;
            head = mk_app(head, atom(), ap);
        }
        return head;
    }

    TermPtr atom() {
        const auto& t = peek();
        SourcePos p = t.pos;
        switch (t.kind) {
        case Tok::String:
            if (!is_word(t.text))
                throw ParseError("word literal may contain only 0 and 1", p, origin_);
            ++i_;
            return mk_const(t.text, p);
        case Tok::Oracle:
            ++i_;
            return mk_oracle(t.text, p);
        case Tok::Sym:
            if (t.text == "(") {
                ++i_;
                auto e = term();
                expect_sym(")");
                return e;
            }
            break;
        case Tok::Ident:
            if (!keywords.count(t.text)) {
                ++i_;
                return mk_var(t.text, p);
            }
            break;
        default:
            break;
        }
        fail("expected atom");
    }

    void skip() { ++i_; }

private:
    std::vector<Token> toks_;
    std::string origin_;
    std::size_t i_ = 0;
};

TermPtr close_over(const TermPtr& t, const std::map<std::string, TermPtr>& scope) {
    TermPtr out = t;
    for (auto& x : free_vars(t)) {
        auto it = scope.find(x);
        if (it != scope.end())
            out = subst(out, x, it->second);
    }
    return out;
}

struct FileLoader {
    std::set<std::filesystem::path> active;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Program parse_impl(std::string_view text, const std::string& origin, const std::filesystem::path* base,
                   FileLoader& loader) {
    Parser ps(Lexer(text, origin).run(), origin);
    Program prog;
    prog.origin = origin;
    std::map<std::string, TermPtr> scope;
    while (!ps.at_end()) {
        if (ps.is_kw("use")) {
            SourcePos p = ps.peek().pos;
            ps.expect_kw("use");
            const auto& t = ps.peek();
            if (t.kind != Tok::String)
                ps.fail("expected file name string");
            std::string rel = t.text;
            ps.skip();
            ps.expect_sym(";");
            if (!base)
                throw ParseError("'use' requires a file context", p, origin);
            auto target = std::filesystem::weakly_canonical(base->parent_path() / rel);
            if (loader.active.count(target))
                throw ParseError("cyclic use of '" + rel + "'", p, origin);
            loader.active.insert(target);
            Program sub;
            try {
                sub = parse_impl(read_file(target), target.string(), &target, loader);
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception& e) {
                throw ParseError(e.what(), p, origin);
            }
            loader.active.erase(target);
            for (auto& [n, term] : sub.decls) {
                if (n == "main")
                    continue;
                scope[n] = term;
                prog.decls.emplace_back(n, term);
            }
            for (auto& kv : sub.oracles)
                prog.oracles.insert(kv);
            continue;
        }
        if (ps.is_kw("oracle")) {
            ps.expect_kw("oracle");
            const auto& t = ps.peek();
            if (t.kind != Tok::Oracle)
                ps.fail("expected oracle name");
            std::string name = t.text;
            ps.skip();
            ps.expect_sym(":");
            auto ty = ps.type();
            ps.expect_sym(";");
            prog.oracles[name] = ty;
            continue;
        }
        ps.expect_kw("val");
        std::string name = ps.expect_name();
        ps.expect_sym("=");
        auto body = close_over(ps.term(), scope);
        ps.expect_sym(";");
        scope[name] = body;
        prog.decls.emplace_back(name, body);
        if (name == "main")
            prog.main = body;
    }
    return prog;
}

} // namespace

Program parse(std::string_view text, const std::string& origin) {
    FileLoader loader;
    return parse_impl(text, origin, nullptr, loader);
}

Program parse_file(const std::filesystem::path& path) {
    auto canon = std::filesystem::weakly_canonical(path);
    FileLoader loader;
    loader.active.insert(canon);
    return parse_impl(read_file(canon), path.string(), &canon, loader);
}

TermPtr parse_term(std::string_view text) {
    Parser ps(Lexer(text, "<term>").run(), "<term>");
    auto t = ps.term();
    if (!ps.at_end())
        ps.fail("trailing input");
    return t;
}

AtrTypePtr parse_type(std::string_view text) {
    Parser ps(Lexer(text, "<type>").run(), "<type>");
    auto t = ps.type();
    if (!ps.at_end())
        ps.fail("trailing input");
    return t;
}

namespace {

enum class Ctx { Top, Head, Arg };

void pp(const TermPtr& t, Ctx ctx, std::string& out);

void pp_wrapped(const TermPtr& t, bool parens, std::string& out) {
    if (parens)
        out += '(';
    pp(t, Ctx::Top, out);
    if (parens)
        out += ')';
}

void pp(const TermPtr& t, Ctx ctx, std::string& out) {
    switch (t->kind) {
    case TermKind::Var:
        out += t->name;
        return;
    case TermKind::Const:
        out += '"' + t->bits + '"';
        return;
    case TermKind::Oracle:
        out += '@' + t->name;
        return;
    case TermKind::Abs:
        if (ctx != Ctx::Top)
            return pp_wrapped(t, true, out);
        out += "fn " + t->name + ":" + t->annot->str() + " => ";
        pp(t->a, Ctx::Top, out);
        return;
    case TermKind::App:
        if (t->a->kind == TermKind::Abs && !t->a->annot) {
            if (ctx != Ctx::Top)
                return pp_wrapped(t, true, out);
            out += "let val " + t->a->name + " = ";
            pp(t->b, Ctx::Top, out);
            out += " in ";
            pp(t->a->a, Ctx::Top, out);
            out += " end";
            return;
        }
        if (ctx == Ctx::Arg)
            return pp_wrapped(t, true, out);
        pp(t->a, Ctx::Head, out);
        out += ' ';
        pp(t->b, Ctx::Arg, out);
        return;
    case TermKind::Cond:
        if (ctx != Ctx::Top)
            return pp_wrapped(t, true, out);
        out += "if ";
        pp(t->a, Ctx::Top, out);
        out += " then ";
        pp(t->b, Ctx::Top, out);
        out += " else ";
        pp(t->c, Ctx::Top, out);
        return;
    default:
        break;
    }
    // Prefix operator forms.
    if (ctx != Ctx::Top)
        return pp_wrapped(t, true, out);
    switch (t->kind) {
    case TermKind::Ca:
        out += t->bit ? "c1 " : "c0 ";
        pp(t->a, Ctx::Arg, out);
        return;
    case TermKind::Ta:
        out += t->bit ? "t1 " : "t0 ";
        pp(t->a, Ctx::Arg, out);
        return;
    case TermKind::D:
        out += "d ";
        pp(t->a, Ctx::Arg, out);
        return;
    case TermKind::Down:
        out += "down ";
        pp(t->a, Ctx::Arg, out);
        out += ' ';
        pp(t->b, Ctx::Arg, out);
        return;
    case TermKind::Crec:
        out += "crec ";
        pp(t->a, Ctx::Arg, out);
        out += " (rec " + t->name;
        if (t->annot)
            out += " : " + t->annot->str();
        out += ". ";
        for (auto& prm : t->params)
            out += "fn " + prm.name + ":" + prm.type->str() + " => ";
        pp(t->b, Ctx::Top, out);
        out += ')';
        return;
    default:
        return;
    }
}

} // namespace

std::string pretty(const TermPtr& t) {
    std::string out;
    pp(t, Ctx::Top, out);
    return out;
}

} // namespace atr
