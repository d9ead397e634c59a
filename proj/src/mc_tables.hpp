#pragma once

namespace erbfit {

// 12-bit mask of crossed edges per cube configuration (bit i = corner i
// below the isovalue), and the triangle fan over crossed edges, -1 ends.
extern const int kMcEdgeTable[256];
extern const int kMcTriTable[256][16];

}  // namespace erbfit
