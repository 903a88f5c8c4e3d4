#pragma once

namespace distdyn {

// Worker-pool control. Thin wrapper over OpenMP thread settings; compiles to
// single-threaded no-ops when OpenMP is absent. Results are deterministic for
// any worker count: parallel loops assign work by index and reduce in index
// order.
int max_workers();
void set_workers(int n);
int current_workers();

}  // namespace distdyn
