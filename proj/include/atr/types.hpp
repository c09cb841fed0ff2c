#ifndef ATR_TYPES_HPP
#define ATR_TYPES_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace atr {

// A tier label. Well-formed labels alternate over {Box, Diamond} and end in
// Diamond unless empty, so a label is determined by its length:
//   even length 2k   -> (Box Diamond)^k       (oracular)
//   odd length 2k+1  -> Diamond (Box Diamond)^k (computational)
class Label {
public:
    constexpr Label() = default;

    // Parses a word over {'b','d'} ('b' = Box, 'd' = Diamond). "" and "e" are epsilon.
    static Label parse(std::string_view word);
    static constexpr Label of_length(std::uint32_t n) { return Label(n); }
    static constexpr Label epsilon() { return Label(0); }
    static constexpr Label diamond() { return Label(1); }
    // Box_d and Diamond_d.
    static constexpr Label box_d(std::uint32_t d) { return Label(2 * d); }
    static constexpr Label diamond_d(std::uint32_t d) { return Label(2 * d + 1); }

    constexpr std::uint32_t length() const { return len_; }
    constexpr bool oracular() const { return len_ % 2 == 0; }
    constexpr bool computational() const { return len_ % 2 == 1; }
    // The least computational label at or above this one.
    constexpr Label computational_ceiling() const { return computational() ? *this : Label(len_ + 1); }
    // One full tier up: appends Box Diamond.
    constexpr Label shifted() const { return Label(len_ + 2); }

    std::string word() const;          // "bd", "dbd", ...
    std::string surface() const;       // "e" for epsilon, else word()
    std::string pretty() const;        // unicode, for diagnostics

    friend constexpr bool operator==(Label a, Label b) { return a.len_ == b.len_; }
    friend constexpr auto operator<=>(Label a, Label b) { return a.len_ <=> b.len_; }

private:
    constexpr explicit Label(std::uint32_t n) : len_(n) {}
    std::uint32_t len_ = 0;
};

bool label_leq(Label a, Label b);
inline Label label_join(Label a, Label b) { return a < b ? b : a; }

class AtrType;
using AtrTypePtr = std::shared_ptr<const AtrType>;

class AtrType {
public:
    static AtrTypePtr base(Label l);
    static AtrTypePtr arrow(AtrTypePtr dom, AtrTypePtr cod);

    bool is_base() const { return !dom_; }
    bool is_arrow() const { return static_cast<bool>(dom_); }
    Label label() const { return label_; }
    const AtrTypePtr& dom() const { return dom_; }
    const AtrTypePtr& cod() const { return cod_; }

    int level() const;
    // Final base type reached by following codomains.
    Label tail() const;
    std::string str() const;   // surface syntax, e.g. "N[e] -> N[d]"

private:
    Label label_{};
    AtrTypePtr dom_, cod_;
};

bool type_equal(const AtrType& a, const AtrType& b);
bool subtype(const AtrType& a, const AtrType& b);

// Least upper bound of two base types; nullopt for arrows.
std::optional<AtrTypePtr> base_join(const AtrTypePtr& a, const AtrTypePtr& b);

// Level-1 base-label shift: N_L1 -> ... -> N_L bumped one tier, allowed only
// when every domain label is oracular. nullopt is "no shift".
std::optional<AtrTypePtr> shift_base(const AtrTypePtr& sigma);

class LabelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace atr

#endif
