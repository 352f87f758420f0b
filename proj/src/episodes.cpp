#include "spx/episodes.hpp"

#include <numeric>
#include <random>
#include <sstream>

namespace spx {

namespace {

// first `take` entries of a seeded partial Fisher-Yates shuffle of [0, n)
std::vector<int> sample_without_replacement(int n, int take, std::mt19937_64& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < take; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(take);
  return idx;
}

}  // namespace

EpisodeSpec sample_episode(const FeatureDataset& dataset, int way, int queries_per_class,
                           std::uint64_t seed) {
  if (way < 1) throw InvalidInputError("way must be >= 1");
  if (queries_per_class < 1) throw InvalidInputError("queries_per_class must be >= 1");
  const auto& classes = dataset.class_labels();
  if (static_cast<int>(classes.size()) < way) {
    std::ostringstream msg;
    msg << "dataset has " << classes.size() << " classes, need " << way;
    throw InvalidInputError(msg.str());
  }

  std::mt19937_64 rng(seed);
  EpisodeSpec episode;
  episode.way = way;
  episode.queries_per_class = queries_per_class;
  episode.seed = seed;

  const auto class_picks =
      sample_without_replacement(static_cast<int>(classes.size()), way, rng);
  const int per_class = 1 + queries_per_class;
  for (int slot = 0; slot < way; ++slot) {
    const std::string& label = classes[class_picks[slot]];
    const auto& members = dataset.images_of_class(label);
    if (static_cast<int>(members.size()) < per_class) {
      std::ostringstream msg;
      msg << "class '" << label << "' has " << members.size() << " images, need " << per_class;
      throw InvalidInputError(msg.str());
    }
    const auto image_picks =
        sample_without_replacement(static_cast<int>(members.size()), per_class, rng);
    episode.class_labels.push_back(label);
    episode.support_ids.push_back(dataset.image_at(members[image_picks[0]]).image_id);
    for (int q = 1; q < per_class; ++q) {
      episode.query_ids.push_back(dataset.image_at(members[image_picks[q]]).image_id);
      episode.query_class.push_back(slot);
    }
  }
  return episode;
}

}  // namespace spx
