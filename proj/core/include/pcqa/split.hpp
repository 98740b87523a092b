#ifndef PCQA_SPLIT_HPP
#define PCQA_SPLIT_HPP

#include <cstdint>
#include <vector>

#include "pcqa/manifest.hpp"

namespace pcqa {

// Disjoint, exhaustive partition of manifest entry indices. All entries of a
// reference cloud land in the same bucket so no content leaks across splits.
struct SplitPlan {
  std::vector<size_t> train;
  std::vector<size_t> val;
  std::vector<size_t> test;
  uint64_t seed = 0;
  double ratios[3] = {0.8, 0.1, 0.1};
};

// Shuffles reference ids by seed, then assigns each reference greedily to the
// bucket with the largest remaining entry-count deficit against the 80/10/10
// targets. When only as many references remain as there are still-empty
// buckets, they go to those buckets, so every split is non-empty from 3
// references up.
SplitPlan split_dataset(const DatasetManifest& manifest, uint64_t seed);

}  // namespace pcqa

#endif  // PCQA_SPLIT_HPP
