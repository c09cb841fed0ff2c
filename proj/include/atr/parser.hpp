#ifndef ATR_PARSER_HPP
#define ATR_PARSER_HPP

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atr/term.hpp"

namespace atr {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, SourcePos pos, std::string origin = {});
    SourcePos pos;
    std::string origin;
};

// A parsed source file. Declarations are closed: references to earlier
// declarations (local or imported) are substituted at parse time.
struct Program {
    std::string origin;
    std::vector<std::pair<std::string, TermPtr>> decls;
    std::map<std::string, AtrTypePtr> oracles;   // declared oracle signatures
    TermPtr main;                                // declaration named `main`, may be null

    TermPtr lookup(const std::string& name) const;
};

// `use` directives are only resolved by parse_file.
Program parse(std::string_view text, const std::string& origin = "<input>");
Program parse_file(const std::filesystem::path& path);

TermPtr parse_term(std::string_view text);
AtrTypePtr parse_type(std::string_view text);

// Concrete syntax accepted by parse_term.
std::string pretty(const TermPtr& t);

} // namespace atr

#endif
