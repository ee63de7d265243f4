#pragma once

namespace flair {

// Parallelism cap: FLAIR_THREADS env var, else hardware concurrency.
int thread_count();

// Applies the cap to the BLAS backend (looked up dynamically so a serial
// BLAS is fine too). Call once early; safe to call again.
void apply_thread_cap();
void set_thread_count(int n);

}  // namespace flair
