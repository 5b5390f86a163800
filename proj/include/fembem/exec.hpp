#pragma once

#include <string>

namespace fembem {

/// Loop execution policy for the assembly kernels; Serial is the reference path.
enum class ExecPolicy { Serial, Parallel };

inline std::string to_string(ExecPolicy p) { return p == ExecPolicy::Serial ? "serial" : "parallel"; }

/// Number of OpenMP threads used by the parallel path (0 leaves the runtime default).
void set_thread_count(int n);
int thread_count();

}  // namespace fembem
