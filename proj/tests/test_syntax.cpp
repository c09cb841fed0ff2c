#include <doctest.h>

#include "atr/parser.hpp"
#include "atr/term.hpp"
#include "atr/types.hpp"
#include "support.hpp"

using namespace atr;

namespace {

AtrTypePtr N(const char* l) { return AtrType::base(Label::parse(l)); }
AtrTypePtr arr(AtrTypePtr a, AtrTypePtr b) { return AtrType::arrow(std::move(a), std::move(b)); }

} // namespace

TEST_CASE("label order examples") {
    CHECK(label_leq(Label::epsilon(), Label::diamond()));
    CHECK(label_leq(Label::diamond(), Label::diamond()));
    CHECK_FALSE(label_leq(Label::parse("bd"), Label::diamond()));
}

TEST_CASE("label order is total, antisymmetric and transitive up to length 9") {
    std::vector<Label> ls;
    for (std::uint32_t n = 0; n <= 9; ++n)
        ls.push_back(Label::of_length(n));
    for (auto a : ls)
        for (auto b : ls) {
            CHECK((label_leq(a, b) || label_leq(b, a)));
            if (label_leq(a, b) && label_leq(b, a))
                CHECK(a == b);
            for (auto c : ls)
                if (label_leq(a, b) && label_leq(b, c))
                    CHECK(label_leq(a, c));
        }
}

TEST_CASE("every label is exactly one of oracular and computational") {
    for (std::uint32_t n = 0; n <= 9; ++n) {
        auto l = Label::of_length(n);
        CHECK(l.oracular() != l.computational());
        CHECK(Label::parse(l.surface()) == l);
    }
    CHECK(Label::parse("e").oracular());
    CHECK(Label::parse("d").computational());
    CHECK(Label::parse("bd").oracular());
    CHECK(Label::parse("dbd").computational());
    CHECK(Label::diamond_d(1) == Label::parse("dbd"));
    CHECK(Label::box_d(1) == Label::parse("bd"));
}

TEST_CASE("malformed labels are rejected") {
    CHECK_THROWS_AS(Label::parse("db"), LabelError);
    CHECK_THROWS_AS(Label::parse("dd"), LabelError);
    CHECK_THROWS_AS(Label::parse("x"), LabelError);
}

TEST_CASE("subtype examples") {
    CHECK(subtype(*N("e"), *N("d")));
    auto s = arr(N("e"), N("d"));
    CHECK(subtype(*s, *s));
    CHECK(subtype(*arr(N("d"), N("d")), *arr(N("e"), N("d"))));
    CHECK_FALSE(subtype(*arr(N("e"), N("d")), *arr(N("d"), N("d"))));
    CHECK_FALSE(subtype(*N("d"), *arr(N("e"), N("e"))));
}

TEST_CASE("subtype is a partial order on sampled types of level at most 2") {
    std::vector<AtrTypePtr> ts;
    const char* labels[] = {"e", "d", "bd", "dbd"};
    for (auto a : labels)
        ts.push_back(N(a));
    for (auto a : labels)
        for (auto b : labels)
            ts.push_back(arr(N(a), N(b)));
    ts.push_back(arr(arr(N("e"), N("d")), N("bd")));
    ts.push_back(arr(arr(N("d"), N("d")), N("bd")));
    ts.push_back(arr(arr(N("e"), N("bd")), N("dbd")));
    for (auto& a : ts) {
        CHECK(subtype(*a, *a));
        for (auto& b : ts) {
            if (subtype(*a, *b) && subtype(*b, *a))
                CHECK(type_equal(*a, *b));
            for (auto& c : ts)
                if (subtype(*a, *b) && subtype(*b, *c))
                    CHECK(subtype(*a, *c));
        }
    }
}

TEST_CASE("type levels") {
    CHECK(N("d")->level() == 0);
    CHECK(arr(N("e"), N("d"))->level() == 1);
    CHECK(arr(arr(N("e"), N("d")), N("bd"))->level() == 2);
    CHECK(arr(N("e"), arr(N("e"), N("d")))->level() == 1);
}

TEST_CASE("tail_len examples") {
    auto fx = mk_app(mk_var("f"), mk_var("x"));
    CHECK(tail_len("f", mk_ca(0, mk_ca(1, fx))) == 2);
    CHECK(tail_len("f", fx) == 0);
    CHECK_FALSE(tail_len("f", mk_app(mk_var("g"), fx)).has_value());
    // f-free terms hold vacuously with 0
    CHECK(tail_len("f", mk_const("01")) == 0);
    // c_a below a down's left argument does not count
    CHECK(tail_len("f", mk_down(mk_ca(1, fx), mk_var("y"))) == 0);
    CHECK(tail_len("f", mk_ca(1, mk_down(mk_ca(1, fx), mk_var("y")))) == 1);
    // maximum over branches
    CHECK(tail_len("f", mk_cond(mk_var("y"), mk_ca(0, fx), mk_ca(0, mk_ca(0, fx)))) == 2);
    CHECK_FALSE(tail_len("f", mk_cond(fx, mk_const(""), mk_const(""))).has_value());
    CHECK_FALSE(tail_len("f", mk_down(mk_var("y"), fx)).has_value());
    CHECK_FALSE(tail_len("f", mk_d(fx)).has_value());
}

TEST_CASE("is_plain_affine examples") {
    auto fx = mk_app(mk_var("f"), mk_var("x"));
    auto fy = mk_app(mk_var("f"), mk_var("y"));
    CHECK(is_plain_affine("f", mk_cond(mk_var("s"), mk_app(mk_var("g"), fx), mk_const(""))));
    CHECK(is_plain_affine("f", mk_const("")));
    CHECK_FALSE(is_plain_affine("f", mk_app(fx, fy)));
    CHECK(is_plain_affine("f", mk_d(fx)));
    CHECK(is_plain_affine("f", mk_down(fx, mk_var("y"))));
    CHECK_FALSE(is_plain_affine("f", mk_down(mk_var("y"), fx)));
    auto eps = AtrType::base(Label::epsilon());
    // an f-free function applied to a plain-affine argument
    CHECK(is_plain_affine("f", mk_app(mk_abs("z", eps, mk_ca(0, mk_var("z"))), fx)));
    CHECK_FALSE(is_plain_affine("f", mk_app(mk_abs("z", eps, mk_app(mk_var("f"), mk_var("z"))), fy)));
    CHECK(is_plain_affine("f", mk_app(mk_abs("z", eps, fx), mk_var("y"))));
}

TEST_CASE("free_vars examples") {
    CHECK(free_vars(mk_var("x")) == std::set<std::string>{"x"});
    auto eps = AtrType::base(Label::epsilon());
    CHECK(free_vars(mk_abs("x", eps, mk_app(mk_var("x"), mk_var("y")))) == std::set<std::string>{"y"});
    auto rec = mk_crec(mk_const(""), "f", {mk_param("v", eps)}, mk_app(mk_var("f"), mk_var("v")), nullptr);
    CHECK(free_vars(rec).empty());
}

TEST_CASE("match_arg_recursion recognizes if s' then s (f t) else s''") {
    auto call = mk_apps(mk_var("f"), {mk_d(mk_var("v"))});
    auto t = mk_cond(mk_var("v"), mk_app(mk_var("g"), call), mk_const(""));
    auto m = match_arg_recursion("f", t, 1);
    REQUIRE(m.has_value());
    CHECK(m->args.size() == 1);
    CHECK_FALSE(match_arg_recursion("f", mk_cond(call, mk_const(""), mk_const("")), 1).has_value());
}
