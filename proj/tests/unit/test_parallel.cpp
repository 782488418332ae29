#include <doctest.h>

#include <atomic>
#include <vector>

#include "invlab/parallel.hpp"

using namespace invlab;

TEST_CASE("for_each_index visits every index once") {
    for (auto exec : {Execution::serial, Execution::parallel}) {
        std::vector<int> hits(1000, 0);
        for_each_index(hits.size(), exec, [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) REQUIRE(h == 1);
    }
    int calls = 0;
    for_each_index(0, Execution::parallel, [&](std::size_t) { ++calls; });
    CHECK(calls == 0);
}

TEST_CASE("serial and parallel paths agree") {
    std::vector<double> a(513), b(513);
    auto f = [](std::size_t i) { return static_cast<double>(i * i) / 7.0; };
    for_each_index(a.size(), Execution::serial, [&](std::size_t i) { a[i] = f(i); });
    for_each_index(b.size(), Execution::parallel, [&](std::size_t i) { b[i] = f(i); });
    CHECK(a == b);
    CHECK(max_threads() >= 1);
}

TEST_CASE("execution names") {
    CHECK(parse_execution("serial") == Execution::serial);
    CHECK(parse_execution("parallel") == Execution::parallel);
    CHECK_THROWS(parse_execution("gpu"));
}
