#ifndef ATR_EVAL_HPP
#define ATR_EVAL_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "atr/parser.hpp"
#include "atr/term.hpp"

namespace atr {

enum class EvalErrorKind { UnboundVariable, BudgetExhausted, OracleUnresolved, IllFormed, ArityMismatch };

const char* eval_error_name(EvalErrorKind k);

class EvalError : public std::runtime_error {
public:
    EvalError(EvalErrorKind kind, const std::string& msg);
    EvalErrorKind kind;
};

// A type-1 oracle taking `arity` words, applied in curried form.
struct Oracle {
    std::size_t arity = 1;
    std::function<std::string(const std::vector<std::string>&)> fn;
};

using OracleRegistry = std::map<std::string, Oracle>;

// Built-in oracles by spec string: "reverse", "id", "const=<word>".
std::optional<Oracle> builtin_oracle(const std::string& spec);

// One clocked-recursion activation: a crec term evaluated from syntax.
struct Activation {
    const Term* crec = nullptr;
    std::vector<std::size_t> arg_lengths;   // at the first clock guard
    std::size_t max_clock = 0;              // longest clock compared at a guard
    std::size_t guards = 0;
};

struct EvalOptions {
    std::optional<std::uint64_t> budget;
    std::ostream* trace = nullptr;
    bool record_clocks = false;
};

struct EvalResult {
    bool is_word = false;
    std::string word;
    std::string description;   // for non-word values
    std::uint64_t cost = 0;
    std::vector<Activation> activations;
};

// Reusable evaluation engine. Not thread-safe; use one per thread.
class Evaluator {
public:
    explicit Evaluator(OracleRegistry oracles = {});
    ~Evaluator();
    Evaluator(const Evaluator&) = delete;
    Evaluator& operator=(const Evaluator&) = delete;

    EvalResult eval(const TermPtr& closed, const EvalOptions& opts = {});
    // Applies t to word constants.
    EvalResult apply(const TermPtr& t, const std::vector<std::string>& args, const EvalOptions& opts = {});

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

EvalResult eval(const TermPtr& closed, const OracleRegistry& oracles = {}, const EvalOptions& opts = {});

// Applies the program's main to the argument words. Arity is checked
// against main's leading abstractions.
EvalResult run_program(const Program& p, const std::vector<std::string>& args, const OracleRegistry& oracles = {},
                       const EvalOptions& opts = {});

} // namespace atr

#endif
