#include "atr/stdlib.hpp"

#include <algorithm>
#include <cstdlib>

namespace atr {

std::string encode_word(const std::string& w) {
    std::string out;
    out.reserve(2 * w.size() + 1);
    for (char c : w) {
        out += '1';
        out += c;
    }
    out += '0';
    return out;
}

std::string encode_list(const std::vector<std::string>& ws) {
    std::string out;
    for (auto& w : ws)
        out += encode_word(w);
    return out;
}

std::vector<std::string> decode_list(const std::string& w) {
    std::vector<std::string> out;
    std::string cur;
    std::size_t i = 0;
    while (i < w.size()) {
        char c = w[i];
        if (c == '0') {
            out.push_back(cur);
            cur.clear();
            ++i;
        } else if (c == '1') {
            if (i + 1 >= w.size())
                throw DecodeError("truncated block at bit " + std::to_string(i));
            char b = w[i + 1];
            if (b != '0' && b != '1')
                throw DecodeError("not a binary word");
            cur += b;
            i += 2;
        } else {
            throw DecodeError("not a binary word");
        }
    }
    if (!cur.empty())
        throw DecodeError("missing block terminator");
    return out;
}

int compare_value(const std::string& a, const std::string& b) {
    auto strip = [](const std::string& s) {
        std::size_t i = s.find('1');
        return i == std::string::npos ? std::string() : s.substr(i);
    };
    std::string x = strip(a), y = strip(b);
    if (x.size() != y.size())
        return x.size() < y.size() ? -1 : 1;
    int c = x.compare(y);
    return c < 0 ? -1 : c > 0 ? 1 : 0;
}

std::vector<std::string> reference_sort(std::vector<std::string> ws) {
    std::stable_sort(ws.begin(), ws.end(),
                     [](const std::string& a, const std::string& b) { return compare_value(a, b) < 0; });
    return ws;
}

const std::vector<std::string>& program_names() {
    static const std::vector<std::string> names = {"cons",       "head",       "tail",    "insert",
                                                   "ins_sort",   "leq",        "select_min", "sel_sort"};
    return names;
}

std::filesystem::path corpus_dir() {
    if (const char* env = std::getenv("ATR_CORPUS"))
        return env;
    return ATR_CORPUS_DIR;
}

std::filesystem::path program_path(const std::string& name) { return corpus_dir() / "stdlib" / (name + ".atr"); }

Program load_program(const std::string& name) { return parse_file(program_path(name)); }

std::vector<std::string> all_words(std::size_t max_bits) {
    std::vector<std::string> out{""};
    for (std::size_t len = 1; len <= max_bits; ++len)
        for (std::size_t v = 0; v < (std::size_t(1) << len); ++v) {
            std::string w(len, '0');
            for (std::size_t i = 0; i < len; ++i)
                if (v >> (len - 1 - i) & 1)
                    w[i] = '1';
            out.push_back(w);
        }
    return out;
}

} // namespace atr
