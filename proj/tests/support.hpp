// Test-side oracles and generators shared by the unit tests and the
// acceptance binary. Nothing here calls the code it is used to check,
// except for term construction and polynomial evaluation.
#ifndef ATR_TESTS_SUPPORT_HPP
#define ATR_TESTS_SUPPORT_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "atr/bounds.hpp"
#include "atr/term.hpp"

namespace atr::testing {

using Rng = std::mt19937_64;

// Substitution-based evaluator without cost accounting. nullopt when the
// term gets stuck or runs out of fuel.
std::optional<std::string> ref_eval(const TermPtr& t, std::size_t fuel = 100000);

// Closed terms of base type, up to the given depth, including let-bindings
// and small crec instances.
TermPtr gen_term(Rng& rng, int depth);

// Micro-terms with hand-counted costs.
struct MicroCase {
    std::string source;   // a single term, parsed with parse_term
    std::string value;
    std::uint64_t cost;
    std::string count;    // the tally, rule by rule
};
const std::vector<MicroCase>& micro_cases();

// Independent encoder, straight from the self-delimiting definition.
std::string encode_by_hand(const std::vector<std::string>& ws);
// Numeric value comparison of binary words via stripping leading zeros.
std::vector<std::string> sort_by_hand(std::vector<std::string> ws);

std::vector<std::string> random_list(Rng& rng, std::size_t max_words, std::size_t max_bits);

// Recurrence for the recursion's time-complexity, with plain integers.
// X, Ys, Xs are polynomials over the parameter variables `params`.
struct PhiInstance {
    std::vector<std::string> params;
    TcPolyPtr X;
    std::vector<TcPolyPtr> Ys;
    Nat ell = 0;
    TcPolyPtr Xs;   // null for cons-tail
};
struct CostPot {
    Nat cost, pot;
};
CostPot phi_by_hand(const PhiInstance& in, const Nat& K, std::size_t n, const std::map<std::string, Nat>& env);

// Random monotone polynomial in the given variables (all of type T_eps).
TcPolyPtr random_poly(Rng& rng, const std::vector<TcPolyPtr>& vars, int depth);

} // namespace atr::testing

#endif
