#ifndef ATR_TCPOLY_HPP
#define ATR_TCPOLY_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "atr/types.hpp"

namespace atr {

using Nat = boost::multiprecision::cpp_int;

// Time-complexity types: the cost type T, tiered potential bases T_L,
// products and arrows.
enum class TcKind { Tally, Base, Product, Arrow };

class TcType;
using TcTypePtr = std::shared_ptr<const TcType>;

class TcType {
public:
    static TcTypePtr tally();
    static TcTypePtr base(Label l);
    static TcTypePtr product(TcTypePtr a, TcTypePtr b);
    static TcTypePtr arrow(TcTypePtr a, TcTypePtr b);

    TcKind kind() const { return kind_; }
    bool is_base() const { return kind_ == TcKind::Base; }
    Label label() const { return label_; }
    const TcTypePtr& fst() const { return a_; }
    const TcTypePtr& snd() const { return b_; }
    // Final base reached through arrow codomains and product second components.
    const TcType& tail() const;
    std::string str() const;

private:
    TcKind kind_ = TcKind::Tally;
    Label label_{};
    TcTypePtr a_, b_;
};

bool tc_equal(const TcType& a, const TcType& b);
bool tc_subtype(const TcType& a, const TcType& b);

struct TcTranslation {
    TcTypePtr potential;
    TcTypePtr tc;
};
TcTranslation tc_translate(const AtrType& sigma);

class TcTypeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Second-order time-complexity polynomials. Nodes are immutable and built
// through the p_* functions, which fold constants, flatten + / * / max,
// beta-reduce and project pairs.
enum class PolyKind { Num, Var, Add, Mul, Max, Monus, Lam, App, Pair, Cost, Pot, Iter };

struct TcPoly;
using TcPolyPtr = std::shared_ptr<const TcPoly>;

// One iterated variable: starts at init, each round becomes itself max image.
struct IterVar {
    std::string name;
    TcTypePtr type;
    TcPolyPtr init;
    TcPolyPtr image;
};

struct TcPoly {
    PolyKind kind;
    Nat num;                       // Num; Monus subtrahend
    std::string name;              // Var; Lam binder
    TcTypePtr type;                // Var; Lam binder type
    std::vector<TcPolyPtr> args;   // operands; Lam body; App f,x; Pair c,p; Iter count,body
    std::vector<IterVar> iter;     // Iter
    std::size_t hash = 0;
    std::vector<std::string> free; // sorted free variables
};

TcPolyPtr p_num(const Nat& n);
TcPolyPtr p_var(const std::string& name, TcTypePtr type);
TcPolyPtr p_add(std::vector<TcPolyPtr> xs);
TcPolyPtr p_mul(std::vector<TcPolyPtr> xs);
// An empty argument list is the empty max, kept as a node.
TcPolyPtr p_max(std::vector<TcPolyPtr> xs);
TcPolyPtr p_monus(TcPolyPtr p, const Nat& c);
TcPolyPtr p_lam(const std::string& var, TcTypePtr type, TcPolyPtr body);
TcPolyPtr p_app(TcPolyPtr f, TcPolyPtr x);
TcPolyPtr p_pair(TcPolyPtr cost, TcPolyPtr pot);
TcPolyPtr p_cost(TcPolyPtr x);
TcPolyPtr p_pot(TcPolyPtr x);
// count rounds of the inflationary update, then body. Collapses when the
// update is idempotent.
TcPolyPtr p_iter(TcPolyPtr count, std::vector<IterVar> vars, TcPolyPtr body);

inline TcPolyPtr operator+(TcPolyPtr a, TcPolyPtr b) { return p_add({std::move(a), std::move(b)}); }
inline TcPolyPtr operator*(TcPolyPtr a, TcPolyPtr b) { return p_mul({std::move(a), std::move(b)}); }
TcPolyPtr p_max2(TcPolyPtr a, TcPolyPtr b);

std::string fresh_name(const std::string& stem);

// Numbers fresh names from zero for its lifetime so that repeated inferences
// print identically; on exit the counter continues past every name issued.
class FreshNameScope {
public:
    FreshNameScope();
    ~FreshNameScope();
    FreshNameScope(const FreshNameScope&) = delete;
    FreshNameScope& operator=(const FreshNameScope&) = delete;

private:
    std::uint64_t saved_;
};

bool poly_equal(const TcPolyPtr& a, const TcPolyPtr& b);
bool occurs(const std::string& x, const TcPolyPtr& p);
std::size_t poly_size(const TcPolyPtr& p);   // as a tree

// Capture-avoiding simultaneous substitution.
TcPolyPtr subst(const TcPolyPtr& p, const std::map<std::string, TcPolyPtr>& s);

// Type of p; throws TcTypeError when ill-typed.
TcTypePtr poly_type(const TcPolyPtr& p);

// Evaluation over naturals. Functions are host closures.
struct PolyValue;
using PolyValuePtr = std::shared_ptr<const PolyValue>;
struct PolyValue {
    enum class Kind { Number, Pair, Function } kind = Kind::Number;
    Nat n;
    PolyValuePtr a, b;
    std::function<PolyValuePtr(const PolyValuePtr&)> fn;

    static PolyValuePtr number(const Nat& n);
    static PolyValuePtr pair(PolyValuePtr c, PolyValuePtr p);
    static PolyValuePtr function(std::function<PolyValuePtr(const PolyValuePtr&)> f);
    const Nat& num() const;    // throws on shape mismatch
    const PolyValuePtr& cost() const;
    const PolyValuePtr& pot() const;
    PolyValuePtr operator()(const PolyValuePtr& x) const;
};

using PolyEnv = std::map<std::string, PolyValuePtr>;
PolyValuePtr poly_eval(const TcPolyPtr& p, const PolyEnv& env = {});
// Shorthand for base-type results with numeric bindings.
Nat poly_eval_nat(const TcPolyPtr& p, const std::map<std::string, Nat>& env = {});
PolyValuePtr value_max(const PolyValuePtr& a, const PolyValuePtr& b);

enum class PolyClass { Strict, Chary, Safe, None };
const char* class_name(PolyClass c);

// Most specific class of potential polynomial p at base b (Strict, then
// Chary, then Safe). Strict and Chary polynomials are also safe.
PolyClass classify(const TcPolyPtr& p, const TcType& b);
bool is_strict(const TcPolyPtr& p, const TcType& b);
bool is_chary(const TcPolyPtr& p, const TcType& b);
bool is_safe(const TcPolyPtr& p, const TcType& b);
// For a time-complexity pair: safe iff the potential part is.
bool is_safe_tc(const TcPolyPtr& q, const TcType& b);

// p[subst], rejecting images whose type is not below their variable's type.
// Throws std::logic_error if a safe p and safe images give an unsafe result.
TcPolyPtr substitute_safe(const TcPolyPtr& p, const std::map<std::string, TcPolyPtr>& s, const TcType& b);

// Parenthesized text form, e.g. max(x, y + 2*z).
std::string to_string(const TcPolyPtr& p);
// Same text with fresh-name suffixes dropped where that stays unambiguous.
std::string to_display(const TcPolyPtr& p);

// Combinator algebra over symbolic time-complexities (pairs).
namespace comb {
TcPolyPtr val(const TcPolyPtr& p, const TcType& potential_type);
TcPolyPtr lambda_star(const std::string& v, TcTypePtr type, const TcPolyPtr& body);
TcPolyPtr star(const TcPolyPtr& x, const TcPolyPtr& y);
TcPolyPtr dally(const TcPolyPtr& l, const TcPolyPtr& x);
TcPolyPtr pad(const TcPolyPtr& l, const TcPolyPtr& y);
TcPolyPtr plusmax(const TcPolyPtr& z, const TcPolyPtr& y);
} // namespace comb

// The same combinators over evaluated values.
namespace vcomb {
PolyValuePtr tc(const Nat& cost, PolyValuePtr pot);
PolyValuePtr val(const PolyValuePtr& p);
PolyValuePtr star(const PolyValuePtr& x, const PolyValuePtr& y);
PolyValuePtr dally(const Nat& l, const PolyValuePtr& x);
PolyValuePtr pad(const Nat& l, const PolyValuePtr& y);
PolyValuePtr plusmax(const PolyValuePtr& z, const PolyValuePtr& y);
} // namespace vcomb

} // namespace atr

#endif
