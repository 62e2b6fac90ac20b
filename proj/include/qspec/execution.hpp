#pragma once

namespace qspec {

// Selects between the OpenMP kernels and their serial counterparts. Results are
// identical either way; serial is kept for testing and benchmarking.
enum class Execution { serial, parallel };

}  // namespace qspec
