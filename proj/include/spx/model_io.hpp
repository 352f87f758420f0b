#pragma once

#include <filesystem>
#include <string>

#include "spx/solver.hpp"

namespace spx {

/// JSON round-trip of a fitted model, tagged with the image it belongs to.
void save_model(const SimplexModel& model, const std::string& image_id,
                const std::filesystem::path& path);

struct LoadedModel {
  std::string image_id;
  SimplexModel model;
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace spx
