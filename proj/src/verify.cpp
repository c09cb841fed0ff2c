#include "atr/verify.hpp"

#include <random>
#include <sstream>

#include <omp.h>

#include "atr/stdlib.hpp"

namespace atr {

bool BoundReport::all_ok() const { return supported && violations() == 0; }

std::size_t BoundReport::violations() const {
    std::size_t n = 0;
    for (auto& r : rows)
        n += !r.ok();
    return n;
}

namespace {

std::string show_word(const std::string& w) { return w.empty() ? "-" : w; }

} // namespace

std::string BoundReport::to_text() const {
    std::ostringstream os;
    os << "program=" << program << "\tbound=" << (supported ? bound_text : "Unsupported: " + bound_text) << '\n';
    for (auto& r : rows) {
        os << r.index << '\t';
        for (std::size_t i = 0; i < r.inputs.size(); ++i)
            os << (i ? "," : "") << show_word(r.inputs[i]);
        os << '\t' << r.cost << '\t';
        if (supported)
            os << r.bound_cost << '\t' << r.length << '\t' << r.bound_pot << '\t' << r.clock << '\t' << r.clock_bound;
        else
            os << "-\t" << r.length << "\t-\t" << r.clock << "\t-";
        os << '\t' << (!r.error.empty() ? "error:" + r.error : !supported ? "unsupported" : r.ok() ? "ok" : "VIOLATION")
           << '\n';
    }
    return os.str();
}

std::string BoundReport::summary() const {
    std::ostringstream os;
    os << program << ": " << rows.size() << " rows, ";
    if (!supported)
        os << "bound unsupported (" << bound_text << ")";
    else
        os << violations() << " violations";
    return os.str();
}

std::size_t main_arity(const TermPtr& t) {
    std::size_t n = 0;
    const Term* cur = t.get();
    while (cur->kind == TermKind::Abs) {
        ++n;
        cur = cur->a.get();
    }
    if (cur->kind == TermKind::Crec)
        n += cur->params.size();
    return n;
}

std::vector<std::vector<std::string>> sample_inputs(const VerifyConfig& cfg, std::size_t arity) {
    std::vector<std::vector<std::string>> out;
    if (cfg.exhaustive) {
        auto words = all_words(cfg.max_bits);
        std::vector<std::size_t> idx(arity, 0);
        for (;;) {
            std::vector<std::string> row;
            for (auto i : idx)
                row.push_back(words[i]);
            out.push_back(std::move(row));
            std::size_t k = arity;
            while (k > 0 && ++idx[k - 1] == words.size())
                idx[--k] = 0;
            if (k == 0)
                break;
        }
        return out;
    }
    std::mt19937_64 rng(cfg.seed);
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, std::max(lo, hi))(rng);
    };
    for (std::size_t s = 0; s < cfg.samples; ++s) {
        std::vector<std::string> row;
        for (std::size_t a = 0; a < arity; ++a) {
            std::vector<std::string> ws(pick(cfg.min_words, cfg.max_words));
            for (auto& w : ws) {
                w.resize(pick(0, cfg.max_bits));
                for (auto& c : w)
                    c = static_cast<char>('0' + pick(0, 1));
            }
            row.push_back(encode_list(ws));
        }
        out.push_back(std::move(row));
    }
    return out;
}

OracleRegistry make_oracles(const std::map<std::string, std::string>& specs) {
    OracleRegistry reg;
    for (auto& [name, spec] : specs) {
        auto o = builtin_oracle(spec);
        if (!o)
            throw std::invalid_argument("unknown oracle '" + spec + "'");
        reg[name] = *o;
    }
    return reg;
}

namespace {

BoundRow run_row(Evaluator& ev, const BoundResult& b, std::size_t index, const std::vector<std::string>& inputs,
                 const PolyEnv& oracle_env, std::uint64_t cost_divisor) {
    BoundRow row;
    row.index = index;
    row.inputs = inputs;
    try {
        EvalOptions opts;
        opts.record_clocks = true;
        auto m = ev.apply(b.term, inputs, opts);
        row.cost = m.cost;
        row.length = m.word.size();
        if (!b.supported)
            return row;
        std::vector<std::size_t> lens;
        for (auto& w : inputs)
            lens.push_back(w.size());
        auto bv = evaluate_bound(b, lens, oracle_env);
        row.bound_cost = bv.cost / cost_divisor;
        row.bound_pot = bv.pot;
        row.cost_ok = Nat(row.cost) <= row.bound_cost;
        row.pot_ok = m.is_word && Nat(row.length) <= row.bound_pot;
        row.clock_ok = true;
        bool first = true;
        Nat best_slack = 0;
        for (auto& a : m.activations) {
            auto it = b.crecs.find(a.crec);
            if (it == b.crecs.end() || a.arg_lengths.size() != it->second.params.size()) {
                row.clock_ok = false;
                continue;
            }
            std::map<std::string, Nat> env;
            for (std::size_t i = 0; i < a.arg_lengths.size(); ++i)
                env[it->second.params[i]] = a.arg_lengths[i];
            Nat kb = poly_eval_nat(it->second.clock_bound, env);
            if (Nat(a.max_clock) > kb)
                row.clock_ok = false;
            Nat slack = kb > a.max_clock ? Nat(kb - a.max_clock) : Nat(0);
            if (first || slack < best_slack) {
                first = false;
                best_slack = slack;
                row.clock = a.max_clock;
                row.clock_bound = kb;
            }
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

} // namespace

std::vector<BoundRow> verify_rows_serial(const BoundResult& b, const std::vector<std::vector<std::string>>& inputs,
                                         const OracleRegistry& oracles, const PolyEnv& oracle_env,
                                         std::uint64_t cost_divisor) {
    std::vector<BoundRow> rows(inputs.size());
    Evaluator ev(oracles);
    for (std::size_t i = 0; i < inputs.size(); ++i)
        rows[i] = run_row(ev, b, i, inputs[i], oracle_env, cost_divisor);
    return rows;
}

std::vector<BoundRow> verify_rows_parallel(const BoundResult& b, const std::vector<std::vector<std::string>>& inputs,
                                           const OracleRegistry& oracles, const PolyEnv& oracle_env,
                                           std::uint64_t cost_divisor) {
    std::vector<BoundRow> rows(inputs.size());
    const long n = static_cast<long>(inputs.size());
#pragma omp parallel
    {
        Evaluator ev(oracles);
#pragma omp for schedule(dynamic, 8)
        for (long i = 0; i < n; ++i)
            rows[i] = run_row(ev, b, static_cast<std::size_t>(i), inputs[i], oracle_env, cost_divisor);
    }
    return rows;
}

BoundReport verify(const Program& p, const VerifyConfig& cfg) {
    BoundReport rep;
    rep.program = cfg.program.empty() ? p.origin : cfg.program;
    auto b = infer_bound(p);
    rep.supported = b.supported;
    rep.bound_text = b.supported ? to_display(b.bound) : b.reason;
    if (!b.supported) {
        // Measured columns only; the term still needs elaboration to run.
        b.term = check_program(p).term;
    }
    auto inputs = sample_inputs(cfg, main_arity(b.term));
    rep.rows = verify_rows_parallel(b, inputs, make_oracles(cfg.oracles), oracle_bounds(cfg.oracles), cfg.cost_divisor);
    return rep;
}

BoundReport verify(const VerifyConfig& cfg) { return verify(parse_file(cfg.program), cfg); }

} // namespace atr
