#pragma once

#include <cstddef>
#include <functional>

namespace ostd {

// Worker count: hardware concurrency, capped by the OSTD_THREADS environment
// variable when it holds a positive integer.
std::size_t thread_budget();

// Runs body(i) for i in [0, n) across up to thread_budget() threads. Each
// index is visited exactly once; the first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ostd
