#pragma once

namespace sandinv {

/// Which implementation of a data-parallel kernel to run. `parallel` is the
/// OpenMP path used in production; `serial_reference` is the plain loop kept
/// for testing. Both are deterministic, and `parallel` gives bit-identical
/// results for any thread count.
enum class Exec { serial_reference, parallel };

}  // namespace sandinv
