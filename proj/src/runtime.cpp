#include "flair/runtime.hpp"

#include <dlfcn.h>

#include <cstdlib>
#include <thread>

namespace flair {

namespace {

int resolve_default() {
    if (const char* env = std::getenv("FLAIR_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

int g_threads = 0;

}  // namespace

int thread_count() {
    if (g_threads == 0) g_threads = resolve_default();
    return g_threads;
}

void set_thread_count(int n) {
    g_threads = n >= 1 ? n : 1;
    apply_thread_cap();
}

void apply_thread_cap() {
    using SetThreadsFn = void (*)(int);
    if (auto* fn = reinterpret_cast<SetThreadsFn>(dlsym(RTLD_DEFAULT, "openblas_set_num_threads")))
        fn(thread_count());
}

}  // namespace flair
