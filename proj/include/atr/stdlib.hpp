#ifndef ATR_STDLIB_HPP
#define ATR_STDLIB_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "atr/parser.hpp"

namespace atr {

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// s(b0..bk) = 1b0 1b1 .. 1bk 0, concatenated over the list.
std::string encode_word(const std::string& w);
std::string encode_list(const std::vector<std::string>& ws);
std::vector<std::string> decode_list(const std::string& w);

// Compares words as binary integers; "" is zero.
int compare_value(const std::string& a, const std::string& b);
// Stable sort by binary value.
std::vector<std::string> reference_sort(std::vector<std::string> ws);

// Names of the shipped programs, in a fixed order.
const std::vector<std::string>& program_names();
std::filesystem::path corpus_dir();
std::filesystem::path program_path(const std::string& name);
Program load_program(const std::string& name);

// All words of length <= max_bits, shortest first.
std::vector<std::string> all_words(std::size_t max_bits);

} // namespace atr

#endif
