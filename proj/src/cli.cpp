#include "atr/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "atr/bounds.hpp"
#include "atr/eval.hpp"
#include "atr/stdlib.hpp"
#include "atr/typecheck.hpp"
#include "atr/verify.hpp"

namespace atr {

namespace {

std::string show(const std::string& w) { return w.empty() ? "\"\"" : w; }

std::map<std::string, std::string> parse_oracle_flags(const std::vector<std::string>& flags) {
    std::map<std::string, std::string> out;
    for (auto& f : flags) {
        auto eq = f.find('=');
        if (eq == std::string::npos || eq == 0)
            throw CLI::ValidationError("--oracle", "expected name=builtin, got '" + f + "'");
        std::string name = f.substr(0, eq);
        if (name[0] == '@')
            name.erase(0, 1);
        out[name] = f.substr(eq + 1);
    }
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> ws;
    if (s.empty() || s == "-")
        return ws;
    std::size_t start = 0;
    for (;;) {
        auto c = s.find(',', start);
        ws.push_back(s.substr(start, c - start));
        if (c == std::string::npos)
            break;
        start = c + 1;
    }
    return ws;
}

// Loads and reports parse or IO failures; nullopt carries the exit code.
struct Loaded {
    std::optional<Program> program;
    int code = ExitOk;
};

Loaded load(const std::string& path, std::ostream& err) {
    Loaded l;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        err << path << ": cannot open file\n";
        l.code = ExitIo;
        return l;
    }
    try {
        l.program = parse_file(path);
    } catch (const ParseError& e) {
        err << path << ":" << e.pos.str() << ": ParseError: " << e.what() << '\n';
        l.code = ExitFailure;
    } catch (const std::exception& e) {
        err << path << ": " << e.what() << '\n';
        l.code = ExitIo;
    }
    return l;
}

void report_type_error(const std::string& path, const TypeError& e, std::ostream& err) {
    err << path << ": " << e.what() << '\n';
}

int cmd_check(const std::string& path, std::ostream& out, std::ostream& err) {
    auto l = load(path, err);
    if (!l.program)
        return l.code;
    try {
        auto t = check_program(*l.program);
        out << path << ": ok : " << t.type->str() << '\n';
        return ExitOk;
    } catch (const TypeError& e) {
        report_type_error(path, e, err);
        return ExitFailure;
    }
}

int cmd_run(const std::string& path, const std::vector<std::string>& args, bool trace, std::optional<std::uint64_t> budget,
            const std::vector<std::string>& oracle_flags, bool lists, bool decode, std::ostream& out,
            std::ostream& err) {
    auto l = load(path, err);
    if (!l.program)
        return l.code;
    std::vector<std::string> words;
    for (auto& a : args)
        words.push_back(lists ? encode_list(split_list(a)) : a);
    EvalOptions opts;
    opts.budget = budget;
    if (trace)
        opts.trace = &out;
    try {
        auto r = run_program(*l.program, words, make_oracles(parse_oracle_flags(oracle_flags)), opts);
        if (r.is_word) {
            out << show(r.word) << '\n';
            if (decode) {
                auto ws = decode_list(r.word);
                out << "list:";
                for (auto& w : ws)
                    out << ' ' << show(w);
                out << '\n';
            }
        } else {
            out << r.description << '\n';
        }
        out << "cost: " << r.cost << '\n';
        return ExitOk;
    } catch (const TypeError& e) {
        report_type_error(path, e, err);
    } catch (const EvalError& e) {
        err << path << ": " << e.what() << '\n';
    } catch (const DecodeError& e) {
        err << path << ": DecodeError: " << e.what() << '\n';
    } catch (const std::invalid_argument& e) {
        err << path << ": " << e.what() << '\n';
    }
    return ExitFailure;
}

int cmd_bound(const std::string& path, std::ostream& out, std::ostream& err) {
    auto l = load(path, err);
    if (!l.program)
        return l.code;
    try {
        auto b = infer_bound(*l.program);
        out << "type: " << b.type->str() << '\n';
        if (!b.supported) {
            out << "bound: Unsupported: " << b.reason << '\n';
            return ExitUnsupported;
        }
        out << "bound: " << to_display(b.bound) << '\n';
        out << "cost: " << to_display(p_cost(b.bound)) << '\n';
        out << "potential: " << to_display(p_pot(b.bound)) << '\n';
        out << "class: " << class_name(b.cls) << '\n';
        return ExitOk;
    } catch (const TypeError& e) {
        report_type_error(path, e, err);
        return ExitFailure;
    }
}

int cmd_verify(VerifyConfig cfg, const std::vector<std::string>& oracle_flags, const std::string& out_path,
               std::ostream& out, std::ostream& err) {
    auto l = load(cfg.program, err);
    if (!l.program)
        return l.code;
    try {
        cfg.oracles = parse_oracle_flags(oracle_flags);
        auto rep = verify(*l.program, cfg);
        if (out_path.empty()) {
            out << rep.to_text();
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) {
                err << out_path << ": cannot write report\n";
                return ExitIo;
            }
            f << rep.to_text();
            out << rep.summary() << '\n';
        }
        if (!rep.supported)
            return ExitUnsupported;
        return rep.all_ok() ? ExitOk : ExitFailure;
    } catch (const TypeError& e) {
        report_type_error(cfg.program, e, err);
        return ExitFailure;
    } catch (const std::invalid_argument& e) {
        err << e.what() << '\n';
        return ExitIo;
    }
}

} // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Type checking, evaluation and bound inference for ATR programs", "atr"};
    app.require_subcommand(1);

    std::string path;
    std::vector<std::string> oracle_flags;

    auto* check = app.add_subcommand("check", "type-check a program");
    check->add_option("program", path, "program file")->required();

    auto* run = app.add_subcommand("run", "evaluate main on argument words");
    std::vector<std::string> args;
    bool trace = false, lists = false, decode = false;
    std::optional<std::uint64_t> budget;
    run->add_option("program", path, "program file")->required();
    run->add_option("args", args, "argument words");
    run->add_flag("--trace", trace, "print each derivation node");
    run->add_option("--budget", budget, "maximum derivation cost");
    run->add_flag("--list", lists, "arguments are comma-separated word lists to encode ('-' is empty)");
    run->add_flag("--decode", decode, "also print the result decoded as a list");
    run->add_option("--oracle", oracle_flags, "bind an oracle: name=id|reverse|const=w");

    auto* bound = app.add_subcommand("bound", "print the inferred time-complexity bound");
    bound->add_option("program", path, "program file")->required();

    auto* ver = app.add_subcommand("verify", "compare measured cost against the bound on sampled inputs");
    VerifyConfig cfg;
    std::string out_path;
    ver->add_option("program", cfg.program, "program file")->required();
    ver->add_option("--seed", cfg.seed, "sampler seed")->capture_default_str();
    ver->add_option("--samples", cfg.samples, "number of sampled inputs")->capture_default_str();
    ver->add_option("--min-words", cfg.min_words, "fewest words per list argument")->capture_default_str();
    ver->add_option("--max-words", cfg.max_words, "most words per list argument")->capture_default_str();
    ver->add_option("--max-bits", cfg.max_bits, "longest word")->capture_default_str();
    ver->add_flag("--exhaustive", cfg.exhaustive, "every tuple of raw words of at most --max-bits bits");
    ver->add_option("--cost-divisor", cfg.cost_divisor, "divide the bound's cost (harness self-test)")
        ->check(CLI::PositiveNumber);
    ver->add_option("--oracle", oracle_flags, "bind an oracle: name=id|reverse|const=w");
    ver->add_option("--out", out_path, "write the report here instead of stdout");

    try {
        app.parse(argc, argv);
        if (cfg.min_words > cfg.max_words)
            throw CLI::ValidationError("--min-words", "must not exceed --max-words");
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? ExitOk : ExitIo;
    }

    try {
        if (*check)
            return cmd_check(path, out, err);
        if (*run)
            return cmd_run(path, args, trace, budget, oracle_flags, lists, decode, out, err);
        if (*bound)
            return cmd_bound(path, out, err);
        return cmd_verify(cfg, oracle_flags, out_path, out, err);
    } catch (const CLI::ValidationError& e) {
        err << e.what() << '\n';
        return ExitIo;
    }
}

} // namespace atr
