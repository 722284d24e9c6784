#pragma once

namespace wkam {

/// Thread count used by the data-parallel kernels. Results do not depend
/// on it: every parallel loop writes disjoint outputs and reduces with max.
void set_num_threads(int n);
int num_threads();

}  // namespace wkam
