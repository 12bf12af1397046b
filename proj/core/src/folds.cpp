#include "anchorprobe/folds.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "anchorprobe/error.hpp"
#include "anchorprobe/rng.hpp"

namespace anchorprobe {

int FoldAssignment::fold_of(const std::string& image_id) const {
  const auto it = fold_of_image.find(image_id);
  if (it == fold_of_image.end()) throw DomainError("no fold assigned to image " + image_id);
  return it->second;
}

FoldAssignment assign_folds(std::span<const SampleRecord> records, int k, std::uint64_t seed) {
  if (k < 2) throw DomainError("fold count k must be at least 2");
  std::map<std::string, std::set<std::string>> by_city;
  std::map<std::string, std::string> city_of;
  for (const auto& r : records) {
    const auto [it, inserted] = city_of.emplace(r.image_id, r.city);
    if (!inserted && it->second != r.city) {
      throw ValidationError("image " + r.image_id + " appears under cities '" + it->second + "' and '" +
                            r.city + "'");
    }
    by_city[r.city].insert(r.image_id);
  }

  FoldAssignment out;
  out.k = k;
  std::size_t deal = 0;
  for (const auto& [city, ids] : by_city) {
    if (ids.size() < static_cast<std::size_t>(k)) {
      out.warnings.push_back("city '" + city + "' has " + std::to_string(ids.size()) +
                             " images for k = " + std::to_string(k) + "; stratification relaxed");
    }
    std::vector<std::string> order(ids.begin(), ids.end());
    CounterRng rng = CounterRng::keyed(seed, "folds/" + city);
    rng.shuffle(std::span<std::string>(order));
    for (const auto& id : order) {
      out.fold_of_image[id] = static_cast<int>(deal % static_cast<std::size_t>(k));
      ++deal;
    }
  }
  return out;
}

std::vector<FoldSplit> make_splits(std::span<const SampleRecord> records, const FoldAssignment& folds) {
  std::vector<FoldSplit> splits(static_cast<std::size_t>(folds.k));
  for (int f = 0; f < folds.k; ++f) splits[static_cast<std::size_t>(f)].fold = f;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const int f = folds.fold_of(records[i].image_id);
    for (auto& s : splits) (s.fold == f ? s.test : s.train).push_back(i);
  }
  for (const auto& s : splits) {
    std::unordered_set<std::string> test_ids;
    for (std::size_t i : s.test) test_ids.insert(records[i].image_id);
    for (std::size_t i : s.train) {
      if (test_ids.contains(records[i].image_id)) {
        throw Error("fold leakage: image " + records[i].image_id + " on both sides of fold " +
                    std::to_string(s.fold));
      }
    }
  }
  return splits;
}

}  // namespace anchorprobe
