#pragma once

namespace sadm {

// Selects between the serial reference loop and the OpenMP kernel. Both paths
// return identical results; the serial one is kept for testing and benchmarks.
enum class Execution { Serial, Parallel };

}  // namespace sadm
