#pragma once

#include "pwclust/nngraph.hpp"
#include "pwclust/partition.hpp"

namespace pwclust {

/// Connected components over stored (positive) entries of W.
Partition extract_components(const AffinityMatrix& w);

/// Connected components of the eps-neighborhood graph. The kernel must be
/// compactly supported.
Partition cluster_cc(const PointMatrix& points, const Kernel& kernel, double eps);

/// Same with the locally scaled affinity.
Partition cluster_cc(const PointMatrix& points, const Kernel& kernel, const LocalScales& scales);

}  // namespace pwclust
