#ifndef ATR_BOUNDS_HPP
#define ATR_BOUNDS_HPP

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "atr/parser.hpp"
#include "atr/tcpoly.hpp"
#include "atr/typecheck.hpp"

namespace atr {

class UnsupportedBound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Per-parameter potential images of a recursion: round m+1 sets each
// variable to itself max its image evaluated at round m.
struct XiIterator {
    std::vector<std::string> vars;
    std::vector<TcTypePtr> types;
    std::vector<TcPolyPtr> images;
};

// n rounds applied to numeric bindings of the iterated variables.
std::map<std::string, Nat> xi_apply(const XiIterator& xi, std::size_t n, std::map<std::string, Nat> env);
// Symbolic: body evaluated after `count` rounds.
TcPolyPtr xi_power(const XiIterator& xi, const TcPolyPtr& count, const TcPolyPtr& body);

enum class ArgCase { Oracular, Computational };

// Closed forms. P0 mentions K through the variable named k_var (and, for
// recursion in an argument, the recursive result's potential through z_var).
// K and n are substituted into the result.
TcPolyPtr solve_cons_tail(const TcPolyPtr& P0, const std::string& k_var, const TcPolyPtr& P1, const Nat& ell,
                          const XiIterator& xi, const TcPolyPtr& K, const TcPolyPtr& n);
TcPolyPtr solve_arg_recursion(ArgCase c, const TcPolyPtr& P0, const std::string& k_var, const std::string& z_var,
                              const TcPolyPtr& P1, const TcPolyPtr& q_s, const TcPolyPtr& p1p, const XiIterator& xi,
                              const TcPolyPtr& K, const TcPolyPtr& n);

// Extraction of (P0, P1) from a decomposition. X is the f-free part, Ys the
// argument time-complexities of the recursive call; all are pairs.
struct ConsTailParts {
    TcPolyPtr P0, P1;
};
ConsTailParts cons_tail_parts(const TcPolyPtr& X, const std::vector<TcPolyPtr>& Ys, const TcPolyPtr& K);

struct ArgRecursionParts {
    TcPolyPtr P0, P1, q_s;
};
// Xs is the time-complexity of the function the recursive result is passed
// to. nullopt when its potential is not of the form q max z (oracular) or
// q + (r max z) (computational).
std::optional<ArgRecursionParts> arg_recursion_parts(ArgCase c, const TcPolyPtr& X, const TcPolyPtr& Xs,
                                                     const std::vector<TcPolyPtr>& Ys, const TcPolyPtr& K,
                                                     const TcPolyPtr& z);

// Literal iteration of the recurrence for the recursion's time-complexity.
// d maps an environment and the recursive function's denotation to a pair.
using DecompositionFn = std::function<PolyValuePtr(const PolyEnv& rho, const PolyValuePtr& chi)>;
PolyValuePtr phi_oracle(const DecompositionFn& d, const std::vector<std::string>& params, const Nat& K,
                        std::size_t n, const PolyEnv& env);

// Decomposition functions of the two schemes, built from t.c. polynomials
// over the parameters' potential variables.
DecompositionFn cons_tail_decomposition(const TcPolyPtr& X, const std::vector<TcPolyPtr>& Ys, const Nat& ell);
DecompositionFn arg_recursion_decomposition(const TcPolyPtr& X, const TcPolyPtr& Xs, const std::vector<TcPolyPtr>& Ys);

enum class Scheme { ConsTail, ArgRecursion };

struct CrecInfo {
    Scheme scheme = Scheme::ConsTail;
    int ell = 0;
    std::vector<std::string> params;   // potential variables, in order
    TcPolyPtr clock_bound;              // over params
};

struct BoundResult {
    bool supported = false;
    std::string reason;        // when unsupported
    TermPtr term;              // elaborated main
    AtrTypePtr type;
    TcPolyPtr bound;           // time-complexity pair of main
    bool safe = false;         // potential is safe at the tail of the type
    PolyClass cls = PolyClass::None;
    std::map<const Term*, CrecInfo> crecs;
};

// Throws TypeError when the program does not type-check.
BoundResult infer_bound(const Program& p);
BoundResult infer_bound(const Typing& typing, const Context& oracles = {});

// Potential bindings for oracles named in a bound, from the built-in specs
// understood by builtin_oracle.
PolyEnv oracle_bounds(const std::map<std::string, std::string>& specs);

struct BoundValue {
    Nat cost, pot;
};
// Applies the bound of main to the potentials of argument words.
BoundValue evaluate_bound(const BoundResult& r, const std::vector<std::size_t>& arg_lengths, const PolyEnv& env = {});

} // namespace atr

#endif
