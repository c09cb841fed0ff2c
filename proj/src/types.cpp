#include "atr/types.hpp"

#include <algorithm>

namespace atr {

Label Label::parse(std::string_view word) {
    if (word == "e")
        return epsilon();
    for (std::size_t i = 0; i < word.size(); ++i) {
        char c = word[i];
        if (c != 'b' && c != 'd')
            throw LabelError("label character must be 'b' or 'd': '" + std::string(word) + "'");
        // Reading right to left the word must be d, b, d, b, ...
        std::size_t from_end = word.size() - 1 - i;
        char expected = from_end % 2 == 0 ? 'd' : 'b';
        if (c != expected)
            throw LabelError("label is not alternating or does not end in d: '" + std::string(word) + "'");
    }
    return Label(static_cast<std::uint32_t>(word.size()));
}

std::string Label::word() const {
    std::string w(len_, 'b');
    for (std::uint32_t i = 0; i < len_; ++i)
        w[len_ - 1 - i] = i % 2 == 0 ? 'd' : 'b';
    return w;
}

std::string Label::surface() const { return len_ == 0 ? "e" : word(); }

std::string Label::pretty() const {
    if (len_ == 0)
        return "ε";
    std::string out;
    for (char c : word())
        out += c == 'b' ? "□" : "◊";
    return out;
}

bool label_leq(Label a, Label b) { return a.length() <= b.length(); }

AtrTypePtr AtrType::base(Label l) {
    auto t = std::make_shared<AtrType>();
    t->label_ = l;
    return t;
}

AtrTypePtr AtrType::arrow(AtrTypePtr dom, AtrTypePtr cod) {
    auto t = std::make_shared<AtrType>();
    t->dom_ = std::move(dom);
    t->cod_ = std::move(cod);
    return t;
}

int AtrType::level() const {
    if (is_base())
        return 0;
    return std::max(dom_->level() + 1, cod_->level());
}

Label AtrType::tail() const { return is_base() ? label_ : cod_->tail(); }

std::string AtrType::str() const {
    if (is_base())
        return "N[" + label_.surface() + "]";
    std::string d = dom_->str();
    if (dom_->is_arrow())
        d = "(" + d + ")";
    return d + " -> " + cod_->str();
}

bool type_equal(const AtrType& a, const AtrType& b) {
    if (a.is_base() != b.is_base())
        return false;
    if (a.is_base())
        return a.label() == b.label();
    return type_equal(*a.dom(), *b.dom()) && type_equal(*a.cod(), *b.cod());
}

bool subtype(const AtrType& a, const AtrType& b) {
    if (a.is_base() != b.is_base())
        return false;
    if (a.is_base())
        return label_leq(a.label(), b.label());
    return subtype(*b.dom(), *a.dom()) && subtype(*a.cod(), *b.cod());
}

std::optional<AtrTypePtr> base_join(const AtrTypePtr& a, const AtrTypePtr& b) {
    if (!a->is_base() || !b->is_base())
        return std::nullopt;
    return AtrType::base(label_join(a->label(), b->label()));
}

std::optional<AtrTypePtr> shift_base(const AtrTypePtr& sigma) {
    if (!sigma->is_arrow() || sigma->level() != 1)
        return std::nullopt;
    // Every domain must be an oracular base type.
    const AtrType* cur = sigma.get();
    while (cur->is_arrow()) {
        if (!cur->dom()->is_base() || !cur->dom()->label().oracular())
            return std::nullopt;
        cur = cur->cod().get();
    }
    auto rebuild = [](auto& self, const AtrTypePtr& t) -> AtrTypePtr {
        if (t->is_base())
            return AtrType::base(t->label().shifted());
        return AtrType::arrow(self(self, t->dom()), self(self, t->cod()));
    };
    return rebuild(rebuild, sigma);
}

} // namespace atr
