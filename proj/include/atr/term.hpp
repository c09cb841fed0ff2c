#ifndef ATR_TERM_HPP
#define ATR_TERM_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "atr/types.hpp"

namespace atr {

// Interned identifier. Ids are stable for the lifetime of the process.
using Symbol = std::uint32_t;
Symbol intern(const std::string& name);
const std::string& symbol_name(Symbol s);

struct SourcePos {
    int line = 0;
    int column = 0;
    bool known() const { return line > 0; }
    std::string str() const;
};

enum class TermKind { Var, Const, Oracle, Abs, App, Ca, D, Ta, Cond, Down, Crec };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Param {
    std::string name;
    Symbol sym = 0;
    AtrTypePtr type;
};

// Immutable ATR term. Which fields are meaningful depends on kind:
//   Var/Oracle: name          Const: bits (over '0','1')
//   Abs: name, annot (may be null for desugared `let val`), a = body
//   App: a = function, b = argument
//   Ca/Ta: bit, a             D: a
//   Cond: a = test, b = then, c = else
//   Down: a = left, b = right
//   Crec: a = clock, name = recursion variable, params, b = body,
//         annot = result base type (may be null; then inferred)
struct Term {
    TermKind kind;
    std::string name;
    Symbol sym = 0;
    std::string bits;
    int bit = 0;
    AtrTypePtr annot;
    TermPtr a, b, c;
    std::vector<Param> params;
    SourcePos pos;
};

TermPtr mk_var(const std::string& name, SourcePos pos = {});
TermPtr mk_const(const std::string& bits, SourcePos pos = {});
TermPtr mk_oracle(const std::string& name, SourcePos pos = {});
TermPtr mk_abs(const std::string& var, AtrTypePtr annot, TermPtr body, SourcePos pos = {});
TermPtr mk_app(TermPtr fun, TermPtr arg, SourcePos pos = {});
TermPtr mk_apps(TermPtr fun, const std::vector<TermPtr>& args);
TermPtr mk_ca(int bit, TermPtr t, SourcePos pos = {});
TermPtr mk_d(TermPtr t, SourcePos pos = {});
TermPtr mk_ta(int bit, TermPtr t, SourcePos pos = {});
TermPtr mk_cond(TermPtr test, TermPtr then_t, TermPtr else_t, SourcePos pos = {});
TermPtr mk_down(TermPtr s, TermPtr t, SourcePos pos = {});
TermPtr mk_crec(TermPtr clock, const std::string& recvar, std::vector<Param> params, TermPtr body,
                AtrTypePtr result, SourcePos pos = {});
Param mk_param(const std::string& name, AtrTypePtr type);

bool is_word(const std::string& s);

// Structural equality (names compared literally, annotations compared by type equality).
bool term_equal(const TermPtr& x, const TermPtr& y);
std::size_t term_size(const TermPtr& t);

std::set<std::string> free_vars(const TermPtr& t);
bool occurs_free(const std::string& x, const TermPtr& t);

// Capture-avoiding substitution t[x := e].
TermPtr subst(const TermPtr& t, const std::string& x, const TermPtr& e);

// Decomposes an application spine h a1 ... an into (h, [a1..an]).
std::pair<TermPtr, std::vector<TermPtr>> app_spine(const TermPtr& t);

// Cons-tail analysis. nullopt means f does not occur in cons-tail position.
// When arity is given only spines with exactly that many arguments count as
// complete applications. f not free in t gives 0.
std::optional<int> tail_len(const std::string& f, const TermPtr& t, std::optional<std::size_t> arity = {});
bool is_plain_affine(const std::string& f, const TermPtr& t);

// Recursion in an argument, restricted to
//   if s' then s (f t1 .. tk) else s''   with f free in none of s', s, s''.
struct ArgRecursionShape {
    TermPtr test;      // s'
    TermPtr outer;     // s
    TermPtr call;      // f t1 .. tk
    std::vector<TermPtr> args;
    TermPtr other;     // s''
};
std::optional<ArgRecursionShape> match_arg_recursion(const std::string& f, const TermPtr& t,
                                                     std::optional<std::size_t> arity = {});

// All complete applications f t1..tk of f in t (f in head position).
std::vector<std::vector<TermPtr>> complete_applications(const std::string& f, const TermPtr& t);

} // namespace atr

#endif
