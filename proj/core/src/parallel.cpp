#include "scene_analogy/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace scene_analogy {

namespace {

std::atomic<std::size_t> g_override{0};

std::size_t env_threads() {
    static const std::size_t value = [] {
        const char* raw = std::getenv("SA_THREADS");
        if (raw == nullptr || *raw == '\0') return std::size_t{0};
        try {
            const long parsed = std::stol(raw);
            return parsed > 0 ? static_cast<std::size_t>(parsed) : std::size_t{0};
        } catch (const std::exception&) {
            return std::size_t{0};
        }
    }();
    return value;
}

}  // namespace

std::size_t max_threads() {
    if (const auto o = g_override.load(); o > 0) return o;
    if (const auto e = env_threads(); e > 0) return e;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void set_max_threads(std::size_t n) { g_override.store(n); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    const std::size_t workers = std::min(max_threads(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace scene_analogy
