#pragma once

namespace sacl {

inline constexpr const char* kGeneratorVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Recorded in every emitted artifact so splits/subsets/batch plans are
// reproducible across implementations of the same document formats.
inline constexpr const char* kPrngName = "splitmix64/fisher-yates";

}  // namespace sacl
