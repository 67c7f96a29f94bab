#pragma once

namespace distkit::parallel {

// Worker count for OpenMP regions: DISTKIT_THREADS caps the machine default
// when set to a positive integer. Re-read on every call so tests can vary it.
int worker_count();

// Fixed block length used by all deterministic blocked reductions. Partial
// sums are accumulated per block and combined in block order, so results are
// bit-identical for any thread count.
inline constexpr int kReductionBlock = 8192;

} // namespace distkit::parallel
