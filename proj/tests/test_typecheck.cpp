#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "atr/parser.hpp"
#include "atr/stdlib.hpp"
#include "atr/typecheck.hpp"

using namespace atr;

namespace {

AtrTypePtr N(const char* l) { return AtrType::base(Label::parse(l)); }
AtrTypePtr arr(AtrTypePtr a, AtrTypePtr b) { return AtrType::arrow(std::move(a), std::move(b)); }

TypeErrorTag tag_of(const Context& g, const Context& d, const TermPtr& t) {
    try {
        infer(g, d, t);
    } catch (const TypeError& e) {
        return e.tag;
    }
    FAIL("expected a type error");
    return TypeErrorTag::UnknownVariable;
}

std::string expected_tag(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    const std::string key = "-- expect: ";
    REQUIRE(line.rfind(key, 0) == 0);
    return line.substr(key.size());
}

// Direct scan for the one-use restrictions on a recursion variable f.
bool one_use_ok(const std::string& f, const TermPtr& t) {
    if (!t)
        return true;
    switch (t->kind) {
    case TermKind::Cond:
        if (occurs_free(f, t->a))
            return false;
        break;
    case TermKind::Down:
        if (occurs_free(f, t->a) && occurs_free(f, t->b))
            return false;
        break;
    case TermKind::App:
        if (occurs_free(f, t->a) && occurs_free(f, t->b))
            return false;
        break;
    case TermKind::Crec:
        if (t->name != f && occurs_free(f, t))
            return false;
        if (!one_use_ok(t->name, t->b))
            return false;
        break;
    default:
        break;
    }
    return one_use_ok(f, t->a) && one_use_ok(f, t->b) && one_use_ok(f, t->c);
}

} // namespace

TEST_CASE("infer examples") {
    CHECK(type_equal(*infer({}, {}, mk_const("")).type, *N("e")));
    CHECK(type_equal(*infer({}, {}, mk_const("01")).type, *N("d")));
    CHECK(type_equal(*infer({{"x", N("e")}}, {}, mk_ca(0, mk_var("x"))).type, *N("d")));
    auto fx = mk_app(mk_var("f"), mk_var("x"));
    auto fy = mk_app(mk_var("f"), mk_var("y"));
    CHECK(tag_of({{"x", N("d")}, {"y", N("d")}}, {{"f", arr(N("d"), N("d"))}}, mk_app(fx, fy)) ==
          TypeErrorTag::AffinityViolation);
}

TEST_CASE("rule-specific results") {
    Context g{{"x", N("bd")}, {"y", N("e")}};
    CHECK(type_equal(*infer(g, {}, mk_d(mk_var("x"))).type, *N("bd")));
    CHECK(type_equal(*infer(g, {}, mk_ta(1, mk_var("x"))).type, *N("bd")));
    CHECK(type_equal(*infer(g, {}, mk_ca(1, mk_var("x"))).type, *N("dbd")));
    // down takes the right argument's type
    CHECK(type_equal(*infer(g, {}, mk_down(mk_var("x"), mk_var("y"))).type, *N("e")));
    // branches are joined
    CHECK(type_equal(*infer(g, {}, mk_cond(mk_var("y"), mk_var("x"), mk_var("y"))).type, *N("bd")));
    CHECK(tag_of(g, {}, mk_var("z")) == TypeErrorTag::UnknownVariable);
}

TEST_CASE("shift_base examples") {
    auto s = shift_base(arr(N("e"), N("d")));
    REQUIRE(s.has_value());
    CHECK(type_equal(**s, *arr(N("bd"), N("dbd"))));
    CHECK_FALSE(shift_base(arr(N("d"), N("d"))).has_value());
}

TEST_CASE("the shifted double application derives") {
    Context g{{"f", arr(N("e"), N("d"))}, {"x", N("e")}};
    auto t = mk_app(mk_var("f"), mk_app(mk_var("f"), mk_var("x")));
    auto r = infer(g, {}, t);
    CHECK(type_equal(*r.type, *N("dbd")));
    CHECK(r.derivation.shifts == 1);
    std::string why;
    CHECK_MESSAGE(validate(r.derivation, g, {}, {}, &why), why);
    // a plain application needs no shift
    CHECK(infer(g, {}, mk_app(mk_var("f"), mk_var("x"))).derivation.shifts == 0);
}

TEST_CASE("check_crec examples") {
    for (auto name : {"cons", "head", "tail"}) {
        auto p = load_program(name);
        CHECK_NOTHROW(check_program(p));
    }
    auto clock_var = parse_term(R"(crec x (rec f : N[d]. fn v:N[e] => if v then c0 (f (d v)) else ""))");
    try {
        check_crec({{"x", N("e")}}, clock_var);
        FAIL("accepted a variable clock");
    } catch (const TypeError& e) {
        CHECK(e.tag == TypeErrorTag::ClockNotConstant);
    }
    auto nested = parse_term(
        R"(crec "" (rec f : N[d]. fn v:N[e] => if v then (crec "" (rec g : N[d]. fn u:N[e] => f u)) v else ""))");
    try {
        check_crec({}, nested);
        FAIL("accepted a nested crec mentioning f");
    } catch (const TypeError& e) {
        CHECK(e.tag == TypeErrorTag::AffinityViolation);
    }
}

TEST_CASE("stdlib programs type-check with valid derivations") {
    for (auto& name : program_names()) {
        INFO(name);
        auto p = load_program(name);
        Typing t;
        REQUIRE_NOTHROW(t = check_program(p));
        std::string why;
        CHECK_MESSAGE(validate(t.derivation, {}, {}, {}, &why), why);
        CHECK(one_use_ok("", t.term));
    }
}

TEST_CASE("negative corpus files fail with their designated tag") {
    std::size_t n = 0;
    for (auto& e : std::filesystem::directory_iterator(corpus_dir() / "negative")) {
        if (e.path().extension() != ".atr")
            continue;
        ++n;
        INFO(e.path().filename().string());
        auto want = expected_tag(e.path());
        try {
            check_program(parse_file(e.path()));
            FAIL("accepted");
        } catch (const TypeError& err) {
            CHECK(std::string(tag_name(err.tag)) == want);
        }
    }
    CHECK(n >= 10);
}

TEST_CASE("weakening: a fresh variable does not change the result") {
    for (auto& name : program_names()) {
        auto p = load_program(name);
        auto t0 = check_program(p);
        auto t1 = infer({{"fresh_unused", N("dbd")}}, {}, p.main);
        CHECK(type_equal(*t0.type, *t1.type));
    }
}

TEST_CASE("crec result labels respect the tier constraint") {
    auto ok = parse_term(R"(crec "" (rec f. fn v:N[e] => fn w:N[bd] => if v then c1 (f (d v) w) else w))");
    auto r = check_crec({}, ok);
    // result must be oracular or above bd; the body joins to dbd
    CHECK(r.type->cod()->cod()->label() == Label::parse("dbd"));
}
