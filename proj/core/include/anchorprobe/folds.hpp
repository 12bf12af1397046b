#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "anchorprobe/types.hpp"

namespace anchorprobe {

/// Image-level fold assignment stratified by city.
struct FoldAssignment {
  int k = 5;
  std::map<std::string, int> fold_of_image;
  std::vector<std::string> warnings;

  /// Throws DomainError for an image with no assignment.
  int fold_of(const std::string& image_id) const;
};

/// Within each city (cities in sorted order) the distinct image ids are
/// sorted, shuffled with CounterRng::keyed(seed, "folds/" + city) and dealt
/// round-robin; the dealing position carries over between cities so fold
/// totals also stay within one image of each other. Depends only on the set
/// of (city, image_id) pairs, so clean and anchored manifests of the same
/// images get the same folds.
///
/// Throws DomainError for k < 2 and ValidationError when an image id appears
/// under two cities. A city with fewer than k images yields a warning.
FoldAssignment assign_folds(std::span<const SampleRecord> records, int k, std::uint64_t seed);

struct FoldSplit {
  int fold = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Train/test row indices for each fold. Throws Error if any image id lands
/// on both sides of a split.
std::vector<FoldSplit> make_splits(std::span<const SampleRecord> records,
                                   const FoldAssignment& folds);

}  // namespace anchorprobe
