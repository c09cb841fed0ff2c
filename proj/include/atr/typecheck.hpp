#ifndef ATR_TYPECHECK_HPP
#define ATR_TYPECHECK_HPP

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "atr/parser.hpp"
#include "atr/term.hpp"

namespace atr {

enum class TypeErrorTag {
    AffinityViolation,
    TierMismatch,
    ClockNotConstant,
    NotConsTailOrPlainAffine,
    CrecTypeConstraint,
    UnknownVariable,
};

const char* tag_name(TypeErrorTag tag);

class TypeError : public std::runtime_error {
public:
    TypeError(TypeErrorTag tag, const std::string& msg, SourcePos pos);
    TypeErrorTag tag;
    SourcePos pos;
};

using Context = std::map<std::string, AtrTypePtr>;

struct Derivation {
    std::string rule;
    TermPtr term;                    // elaborated subterm
    AtrTypePtr type;
    std::set<std::string> affine;    // affine variables free in the subterm
    AtrTypePtr fun_type;             // App-E: function type after shifting
    int shifts = 0;                  // App-E: number of base-label shifts applied
    std::vector<Derivation> children;
};

// Elaboration fills in omitted let binder types and crec result types.
struct Typing {
    AtrTypePtr type;
    TermPtr term;
    Derivation derivation;
};

Typing infer(const Context& gamma, const Context& delta, const TermPtr& t, const Context& oracles = {});

// Checks a crec term under gamma with an empty affine zone.
Typing check_crec(const Context& gamma, const TermPtr& crec, const Context& oracles = {});

// Type of the program's main declaration.
Typing check_program(const Program& p);

// Independent re-check of every derivation node against its rule.
bool validate(const Derivation& d, const Context& gamma, const Context& delta, const Context& oracles,
              std::string* why = nullptr);

// One line per node, indented by depth.
std::string render(const Derivation& d);

} // namespace atr

#endif
