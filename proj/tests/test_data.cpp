#include "tebounds/data.hpp"
#include "tebounds/error.hpp"

#include <doctest.h>

#include <sstream>

using namespace tebounds;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Usage;
}

const char* kMixed =
    "id,arm,duration,event\n"
    "F1,1,2,1\n"
    "F2,0,3,0\n"
    "G1,1,1,0\n"
    "G2,0,4,1\n";

}  // namespace

TEST_CASE("compact csv parses records and sets the horizon") {
    const auto ds = parse_compact_csv("id,arm,duration,event\nA,1,1,1\nB,0,2,1");
    REQUIRE(ds.size() == 2);
    CHECK(ds.t_max() == 2);
    CHECK(ds.records()[0].id == "A");
    CHECK(ds.records()[0].arm == 1);
    CHECK(ds.records()[0].event);
    CHECK(ds.records()[1].duration == 2);
    CHECK(ds.arm_count(0) == 1);
    CHECK(ds.arm_count(1) == 1);
}

TEST_CASE("malformed rows report the offending line") {
    try {
        parse_compact_csv("id,arm,duration,event\nA,1,1,1\nD,2,1,1\n");
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MalformedRow);
        REQUIRE(e.line().has_value());
        CHECK(*e.line() == 3);
    }
    CHECK(code_of([] { parse_compact_csv("id,arm,duration,event\nA,1,0,1\n"); }) == ErrorCode::MalformedRow);
    CHECK(code_of([] { parse_compact_csv("id,arm,duration,event\nA,1,2,2\n"); }) == ErrorCode::MalformedRow);
    CHECK(code_of([] { parse_compact_csv("id,arm,duration,event\nA,1,2\n"); }) == ErrorCode::MalformedRow);
    CHECK(code_of([] { parse_compact_csv("id,arm,duration\nA,1,2\n"); }) == ErrorCode::MalformedRow);
    CHECK(code_of([] { parse_compact_csv("id,arm,duration,event\nA,1,2,1\nA,0,2,1\n"); }) == ErrorCode::DuplicateId);
    CHECK(code_of([] { parse_compact_csv("id,arm,duration,event,treat_start\nA,0,2,1,3\n"); }) ==
          ErrorCode::MalformedRow);
}

TEST_CASE("csv round trip preserves every record") {
    const std::string text =
        "id,arm,duration,event,treat_start\n"
        "a,1,3,1,2\n"
        "b,1,2,0,\n"
        "c,0,5,0,\n";
    const auto ds = parse_compact_csv(text);
    CHECK(ds.records()[0].treat_start == 2);
    CHECK_FALSE(ds.records()[1].treat_start.has_value());
    const auto again = parse_compact_csv(to_compact_csv(ds));
    REQUIRE(again.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(again.records()[i] == ds.records()[i]);

    const auto plain = parse_compact_csv(kMixed);
    CHECK(to_compact_csv(plain) == kMixed);
}

TEST_CASE("binning takes the ceiling of duration over width") {
    const auto ds = parse_compact_csv("id,arm,duration,event\nA,1,11,1\nB,0,2,0\nC,0,3,1\n");
    const auto b = bin_periods(ds, 2);
    CHECK(b.records()[0].duration == 6);
    CHECK(b.records()[1].duration == 1);
    CHECK(b.records()[2].duration == 2);
    CHECK(b.t_max() == 6);
    CHECK(b.bin_width() == 2);

    const auto same = bin_periods(ds, 1);
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(same.records()[i] == ds.records()[i]);
}

TEST_CASE("horizon censors later durations") {
    const auto ds = with_horizon(parse_compact_csv("id,arm,duration,event\nA,1,5,1\nB,0,2,1\n"), 3);
    CHECK(ds.t_max() == 3);
    CHECK(ds.records()[0].duration == 3);
    CHECK_FALSE(ds.records()[0].event);
    CHECK(ds.records()[1].event);
}

TEST_CASE("subgroup filter keeps matching ids") {
    const auto ds = parse_compact_csv(kMixed);
    const auto all = filter_subgroup(ds, [](std::string_view) { return true; });
    REQUIRE(all.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(all.records()[i] == ds.records()[i]);

    CHECK(code_of([&] { filter_subgroup(ds, [](std::string_view) { return false; }); }) == ErrorCode::EmptyArm);

    const auto f = filter_subgroup(ds, [](std::string_view id) { return id.starts_with("F"); });
    REQUIRE(f.size() == 2);
    CHECK(f.records()[0].id == "F1");
    CHECK(f.records()[1].id == "F2");
    CHECK(f.t_max() == ds.t_max());
}

TEST_CASE("id lists skip blanks and comments") {
    std::istringstream in("# header\nF1\n\n  G2  \n");
    const auto ids = read_id_list(in);
    REQUIRE(ids.size() == 2);
    CHECK(ids[0] == "F1");
    CHECK(ids[1] == "G2");
}

TEST_CASE("restricting to a later start re-indexes survivors") {
    const auto ds = parse_compact_csv(
        "id,arm,duration,event,treat_start\n"
        "t2,1,4,1,2\n"    // treated at 2, exits in raw period 4
        "t3,1,5,0,3\n"    // treated later: control at k=2, censored at raw 2
        "t1,1,3,1,\n"     // treated at 1: not in the k=2 sample
        "c1,0,1,1,\n"     // exits before k: dropped
        "c2,0,3,0,\n");
    const auto r = restrict_to_start(ds, 2);
    REQUIRE(r.size() == 3);
    CHECK(r.records()[0].id == "t2");
    CHECK(r.records()[0].arm == 1);
    CHECK(r.records()[0].duration == 3);
    CHECK(r.records()[0].event);
    CHECK(r.records()[1].id == "t3");
    CHECK(r.records()[1].arm == 0);
    CHECK(r.records()[1].duration == 1);
    CHECK_FALSE(r.records()[1].event);
    CHECK(r.records()[2].id == "c2");
    CHECK(r.records()[2].duration == 2);

    const auto one = restrict_to_start(parse_compact_csv(kMixed), 1);
    CHECK(one.size() == 4);
}
