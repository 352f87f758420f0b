#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "spx/common.hpp"

namespace spx {

struct ImageFeatures {
  std::string image_id;
  std::string label;
  Matrix features;  // n_crops x dim, one crop feature per row
};

/// A labeled collection of per-image crop-feature matrices. All images share
/// the feature dimension; image ids are unique. Classes are ordered by first
/// appearance so that downstream sampling does not depend on label strings.
class FeatureDataset {
 public:
  void add_image(ImageFeatures image);

  int n_images() const { return static_cast<int>(images_.size()); }
  int dim() const { return dim_; }
  bool contains(const std::string& image_id) const { return by_id_.count(image_id) > 0; }

  const ImageFeatures& image(const std::string& image_id) const;
  const ImageFeatures& image_at(int index) const { return images_.at(index); }
  int index_of(const std::string& image_id) const;

  const std::vector<std::string>& class_labels() const { return class_order_; }
  /// Image indices of one class, in insertion order.
  const std::vector<int>& images_of_class(const std::string& label) const;

 private:
  std::vector<ImageFeatures> images_;
  std::unordered_map<std::string, int> by_id_;
  std::vector<std::string> class_order_;
  std::unordered_map<std::string, std::vector<int>> by_class_;
  int dim_ = 0;
};

/// File-level failure when reading a feature file. `kind` discriminates the
/// failure; the message names the offending record where one exists.
class ParseError : public std::runtime_error {
 public:
  enum class Kind {
    bad_path,
    bad_magic,
    bad_version,
    truncated,
    dim_mismatch,
    duplicate_id,
    bad_field,
  };

  ParseError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Binary feature file, little-endian:
//   magic "SPFX" | version u32 | dim u32 | image count u32 |
//   per image: id length u32 + bytes | label length u32 + bytes |
//              n_crops u32 | n_crops*dim float32 row-major.
// A plain-text CSV variant (header image_id,label,crop_index,f0..f{D-1}) is
// accepted for interoperability; load_features sniffs the format.
FeatureDataset load_features(const std::filesystem::path& path);

/// Writes CSV when the extension is ".csv", the binary format otherwise.
/// Payloads are stored as 32-bit floats in both formats.
void save_features(const FeatureDataset& dataset, const std::filesystem::path& path);

}  // namespace spx
