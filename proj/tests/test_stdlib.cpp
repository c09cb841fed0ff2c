#include <doctest.h>

#include "atr/eval.hpp"
#include "atr/stdlib.hpp"
#include "atr/typecheck.hpp"
#include "support.hpp"

using namespace atr;

namespace {

using Words = std::vector<std::string>;

bool contains_kind(const TermPtr& t, TermKind k) {
    if (!t)
        return false;
    return t->kind == k || contains_kind(t->a, k) || contains_kind(t->b, k) || contains_kind(t->c, k);
}

const Term* find_crec(const TermPtr& t) {
    if (!t)
        return nullptr;
    if (t->kind == TermKind::Crec)
        return t.get();
    for (auto* c : {&t->a, &t->b, &t->c})
        if (auto r = find_crec(*c))
            return r;
    return nullptr;
}

std::string run1(const char* name, const Words& args) { return run_program(load_program(name), args).word; }

} // namespace

TEST_CASE("encoding examples") {
    CHECK(encode_list({}) == "");
    CHECK(encode_list({"0"}) == "100");
    CHECK(encode_list({"01", "1"}) == "10110110");
    CHECK(encode_list({"1", "10"}) == "11011100");
}

TEST_CASE("encoding matches the hand encoder and roundtrips") {
    for (std::size_t words = 0; words <= 3; ++words) {
        auto all = all_words(3);
        std::vector<std::size_t> idx(words, 0);
        for (;;) {
            Words ws;
            for (auto i : idx)
                ws.push_back(all[i]);
            CHECK(encode_list(ws) == testing::encode_by_hand(ws));
            CHECK(decode_list(encode_list(ws)) == ws);
            std::size_t k = words;
            while (k > 0 && ++idx[k - 1] == all.size())
                idx[--k] = 0;
            if (k == 0)
                break;
        }
    }
    testing::Rng rng(8);
    for (int i = 0; i < 300; ++i) {
        auto ws = testing::random_list(rng, 8, 6);
        CHECK(decode_list(encode_list(ws)) == ws);
    }
}

TEST_CASE("malformed encodings are rejected") {
    CHECK_THROWS_AS(decode_list("1"), DecodeError);
    CHECK_THROWS_AS(decode_list("11"), DecodeError);
    CHECK_THROWS_AS(decode_list("0a"), std::exception);
}

TEST_CASE("reference_sort examples") {
    CHECK(reference_sort({}).empty());
    CHECK(reference_sort({"1"}) == Words{"1"});
    CHECK(reference_sort({"10", "1", "11"}) == Words{"1", "10", "11"});
    // equal values keep input order
    CHECK(reference_sort({"01", "1", "001"}) == Words{"01", "1", "001"});
    CHECK(reference_sort({"", "0", "1", "00"}) == Words{"", "0", "00", "1"});
}

TEST_CASE("reference_sort agrees with the hand sort") {
    testing::Rng rng(9);
    for (int i = 0; i < 500; ++i) {
        auto ws = testing::random_list(rng, 8, 5);
        CHECK(reference_sort(ws) == testing::sort_by_hand(ws));
    }
}

TEST_CASE("program examples") {
    CHECK(run1("head", {encode_list({"01", "1"})}) == "01");
    auto in = encode_list({"10", "1", "11"});
    CHECK(decode_list(run1("ins_sort", {in})) == Words{"1", "10", "11"});
    CHECK(decode_list(run1("sel_sort", {in})) == Words{"1", "10", "11"});
    CHECK(run1("head", {""}) == "");
    CHECK(run1("tail", {""}) == "");
}

TEST_CASE("leq compares binary values") {
    auto all = all_words(4);
    for (auto& a : all)
        for (auto& b : all) {
            bool want = compare_value(a, b) <= 0;
            CHECK_MESSAGE((run1("leq", {a, b}) != "") == want, a << " <= " << b);
        }
    CHECK(compare_value("011", "11") == 0);
    CHECK(compare_value("100", "11") > 0);
}

TEST_CASE("list algebra") {
    testing::Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        auto l = testing::random_list(rng, 5, 4);
        auto a = testing::random_list(rng, 1, 4);
        if (a.empty())
            a.push_back("");
        Words al = {a[0]};
        al.insert(al.end(), l.begin(), l.end());
        CHECK(decode_list(run1("tail", {encode_list(al)})) == l);
        CHECK(run1("head", {encode_list(al)}) == a[0]);
        CHECK(decode_list(run1("cons", {a[0], encode_list(l)})) == al);
        auto sorted = reference_sort(l);
        auto ins = decode_list(run1("insert", {a[0], encode_list(sorted)}));
        CHECK(ins == reference_sort(al));
    }
}

TEST_CASE("structural properties of the programs") {
    for (auto name : {"cons", "head", "tail"}) {
        auto t = check_program(load_program(name)).term;
        auto c = find_crec(t);
        REQUIRE(c);
        CHECK(tail_len(c->name, c->b, c->params.size()).has_value());
    }
    auto ins = load_program("ins_sort");
    auto ins_term = check_program(ins).term;
    auto c = find_crec(ins_term);
    REQUIRE(c);
    CHECK(match_arg_recursion(c->name, c->b, c->params.size()).has_value());
    CHECK(contains_kind(load_program("head").main, TermKind::Down));
    CHECK(contains_kind(ins.main, TermKind::Down));
    auto sel_term = check_program(load_program("sel_sort")).term;
    auto sel = find_crec(sel_term);
    REQUIRE(sel);
    CHECK(is_plain_affine(sel->name, sel->b));
}
