#ifndef ATR_VERIFY_HPP
#define ATR_VERIFY_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "atr/bounds.hpp"
#include "atr/eval.hpp"

namespace atr {

struct VerifyConfig {
    std::string program;            // path to an .atr file
    std::size_t samples = 100;
    std::size_t min_words = 0, max_words = 4;
    std::size_t max_bits = 4;
    std::uint64_t seed = 1;
    bool exhaustive = false;        // every tuple of words of <= max_bits bits
    std::map<std::string, std::string> oracles;   // name -> built-in spec
    std::uint64_t cost_divisor = 1; // > 1 deliberately weakens the bound
};

struct BoundRow {
    std::size_t index = 0;
    std::vector<std::string> inputs;
    std::uint64_t cost = 0;
    std::size_t length = 0;
    Nat bound_cost = 0, bound_pot = 0;
    std::size_t clock = 0;          // at the activation with least slack
    Nat clock_bound = 0;
    bool cost_ok = false, pot_ok = false, clock_ok = false;
    std::string error;

    bool ok() const { return error.empty() && cost_ok && pot_ok && clock_ok; }
};

struct BoundReport {
    std::string program;
    bool supported = false;
    std::string bound_text;         // or the reason it is unsupported
    std::vector<BoundRow> rows;

    bool all_ok() const;
    std::size_t violations() const;
    std::string to_text() const;    // header line, then one row per input
    std::string summary() const;
};

// Inputs drawn per the configuration; each argument is an encoded list.
std::vector<std::vector<std::string>> sample_inputs(const VerifyConfig& cfg, std::size_t arity);

std::size_t main_arity(const TermPtr& t);

// Runs the rows against an inferred bound. The serial version is the
// reference for the OpenMP one; both produce identical rows.
std::vector<BoundRow> verify_rows_serial(const BoundResult& b, const std::vector<std::vector<std::string>>& inputs,
                                         const OracleRegistry& oracles, const PolyEnv& oracle_env,
                                         std::uint64_t cost_divisor = 1);
std::vector<BoundRow> verify_rows_parallel(const BoundResult& b, const std::vector<std::vector<std::string>>& inputs,
                                           const OracleRegistry& oracles, const PolyEnv& oracle_env,
                                           std::uint64_t cost_divisor = 1);

OracleRegistry make_oracles(const std::map<std::string, std::string>& specs);

BoundReport verify(const VerifyConfig& cfg);
BoundReport verify(const Program& p, const VerifyConfig& cfg);

} // namespace atr

#endif
