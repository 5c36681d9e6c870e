#include "fraceig/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace fraceig {

namespace {

double reduce_tree(std::vector<double>& partial) {
    if (partial.empty()) return 0.0;
    while (partial.size() > 1) {
        std::vector<double> next((partial.size() + 1) / 2);
        for (std::size_t i = 0; i < next.size(); ++i) {
            const std::size_t a = 2 * i;
            next[i] = a + 1 < partial.size() ? partial[a] + partial[a + 1] : partial[a];
        }
        partial.swap(next);
    }
    return partial.front();
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= kSumBlock) {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
    std::vector<double> partial;
    partial.reserve(values.size() / kSumBlock + 1);
    for (std::size_t start = 0; start < values.size(); start += kSumBlock) {
        const std::size_t stop = std::min(values.size(), start + kSumBlock);
        double acc = 0.0;
        for (std::size_t i = start; i < stop; ++i) acc += values[i];
        partial.push_back(acc);
    }
    return reduce_tree(partial);
}

double pairwise_sum(std::size_t n, const std::function<double(std::size_t)>& term) {
    std::vector<double> partial;
    partial.reserve(n / kSumBlock + 1);
    for (std::size_t start = 0; start < n; start += kSumBlock) {
        const std::size_t stop = std::min(n, start + kSumBlock);
        double acc = 0.0;
        for (std::size_t i = start; i < stop; ++i) acc += term(i);
        partial.push_back(acc);
    }
    return reduce_tree(partial);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return pairwise_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double weighted_dot(std::span<const double> m, std::span<const double> a, std::span<const double> b) {
    return pairwise_sum(a.size(), [&](std::size_t i) { return m[i] * a[i] * b[i]; });
}

double max_abs(std::span<const double> v) {
    double best = 0.0;
    for (double x : v) best = std::max(best, std::abs(x));
    return best;
}

std::size_t thread_count() {
    std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("FRACEIG_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) hw = std::min<std::size_t>(hw, static_cast<std::size_t>(cap));
        } catch (...) {
            // unparsable value: keep the hardware default
        }
    }
    return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) body(i);
            } catch (...) {
                failures[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
}

}  // namespace fraceig
