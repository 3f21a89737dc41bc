#pragma once

namespace ocflow::tools {

/// Run the embedded synthetic verification suite (no external data needed).
/// quick skips the mesh-refinement convergence study. Returns the number of
/// failed checks.
int run_selftest(bool quick);

}  // namespace ocflow::tools
