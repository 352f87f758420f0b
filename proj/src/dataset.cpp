#include "spx/dataset.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "feature files are little-endian; big-endian hosts need byte swaps");

namespace spx {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'F', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

void FeatureDataset::add_image(ImageFeatures image) {
  if (image.features.rows() < 1 || image.features.cols() < 1) {
    throw InvalidInputError("image '" + image.image_id + "' must have at least one crop row");
  }
  if (!image.features.allFinite()) {
    throw InvalidInputError("image '" + image.image_id + "' has non-finite features");
  }
  if (dim_ == 0) {
    dim_ = static_cast<int>(image.features.cols());
  } else if (image.features.cols() != dim_) {
    std::ostringstream msg;
    msg << "image '" << image.image_id << "' has dim " << image.features.cols()
        << ", dataset has dim " << dim_;
    throw InvalidInputError(msg.str());
  }
  if (by_id_.count(image.image_id)) {
    throw InvalidInputError("duplicate image_id '" + image.image_id + "'");
  }

  const int index = static_cast<int>(images_.size());
  by_id_.emplace(image.image_id, index);
  auto [it, inserted] = by_class_.try_emplace(image.label);
  if (inserted) class_order_.push_back(image.label);
  it->second.push_back(index);
  images_.push_back(std::move(image));
}

const ImageFeatures& FeatureDataset::image(const std::string& image_id) const {
  auto it = by_id_.find(image_id);
  if (it == by_id_.end()) throw InvalidInputError("no image with id '" + image_id + "'");
  return images_[it->second];
}

int FeatureDataset::index_of(const std::string& image_id) const {
  auto it = by_id_.find(image_id);
  if (it == by_id_.end()) throw InvalidInputError("no image with id '" + image_id + "'");
  return it->second;
}

const std::vector<int>& FeatureDataset::images_of_class(const std::string& label) const {
  auto it = by_class_.find(label);
  if (it == by_class_.end()) throw InvalidInputError("no class with label '" + label + "'");
  return it->second;
}

namespace {

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint32_t read_u32(const std::string& what) {
    std::uint32_t value;
    take(&value, sizeof(value), what);
    return value;
  }

  std::string read_string(std::uint32_t length, const std::string& what) {
    if (remaining() < length) {
      throw ParseError(ParseError::Kind::truncated,
                       "file ends inside " + what + " (need " + std::to_string(length) +
                           " bytes, have " + std::to_string(remaining()) + ")");
    }
    std::string out(bytes_.data() + pos_, length);
    pos_ += length;
    return out;
  }

  void read_floats(float* dst, std::size_t count, const std::string& what) {
    take(dst, count * sizeof(float), what);
  }

 private:
  void take(void* dst, std::size_t n, const std::string& what) {
    if (remaining() < n) {
      throw ParseError(ParseError::Kind::truncated,
                       "file ends inside " + what + " (need " + std::to_string(n) +
                           " bytes, have " + std::to_string(remaining()) + ")");
    }
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseError::Kind::bad_path, "cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

FeatureDataset load_binary(std::vector<char> bytes) {
  ByteReader reader(std::move(bytes));
  reader.read_string(4, "magic");  // already checked by the caller
  const std::uint32_t version = reader.read_u32("format version");
  if (version != kFormatVersion) {
    throw ParseError(ParseError::Kind::bad_version,
                     "unsupported format version " + std::to_string(version));
  }
  const std::uint32_t dim = reader.read_u32("feature dimension");
  if (dim == 0) throw ParseError(ParseError::Kind::bad_field, "feature dimension is 0");
  const std::uint32_t n_images = reader.read_u32("image count");

  FeatureDataset dataset;
  for (std::uint32_t i = 0; i < n_images; ++i) {
    const std::string record = "image record " + std::to_string(i);
    const std::uint32_t id_len = reader.read_u32(record + " id length");
    const std::string image_id = reader.read_string(id_len, record + " id");
    const std::uint32_t label_len = reader.read_u32("label length of '" + image_id + "'");
    const std::string label = reader.read_string(label_len, "label of '" + image_id + "'");
    const std::uint32_t n_crops = reader.read_u32("crop count of '" + image_id + "'");
    if (n_crops == 0) {
      throw ParseError(ParseError::Kind::bad_field, "image '" + image_id + "' declares 0 crops");
    }

    std::vector<float> payload(static_cast<std::size_t>(n_crops) * dim);
    reader.read_floats(payload.data(), payload.size(), "crop payload of '" + image_id + "'");

    if (dataset.contains(image_id)) {
      throw ParseError(ParseError::Kind::duplicate_id, "duplicate image_id '" + image_id + "'");
    }
    ImageFeatures image;
    image.image_id = image_id;
    image.label = label;
    image.features =
        Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            payload.data(), n_crops, dim)
            .cast<double>();
    dataset.add_image(std::move(image));
  }
  if (reader.remaining() != 0) {
    throw ParseError(ParseError::Kind::bad_field,
                     std::to_string(reader.remaining()) + " trailing bytes after last image");
  }
  return dataset;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

FeatureDataset load_csv(const std::vector<char>& bytes) {
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(ParseError::Kind::truncated, "empty CSV file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "image_id" || header[1] != "label" ||
      header[2] != "crop_index") {
    throw ParseError(ParseError::Kind::bad_field,
                     "CSV header must be image_id,label,crop_index,f0..f{D-1}");
  }
  const int dim = static_cast<int>(header.size()) - 3;
  for (int d = 0; d < dim; ++d) {
    if (header[3 + d] != "f" + std::to_string(d)) {
      throw ParseError(ParseError::Kind::bad_field,
                       "CSV header feature column " + std::to_string(d) + " must be f" +
                           std::to_string(d));
    }
  }

  struct PendingImage {
    std::string label;
    std::vector<std::pair<int, std::vector<double>>> crops;  // (crop_index, row)
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, PendingImage> pending;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != dim + 3) {
      throw ParseError(ParseError::Kind::dim_mismatch,
                       "line " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(dim + 3));
    }
    const std::string& image_id = fields[0];
    const std::string& label = fields[1];
    int crop_index;
    std::vector<double> row(dim);
    try {
      crop_index = std::stoi(fields[2]);
      for (int d = 0; d < dim; ++d) row[d] = std::stod(fields[3 + d]);
    } catch (const std::exception&) {
      throw ParseError(ParseError::Kind::bad_field,
                       "line " + std::to_string(line_no) + ": unparseable numeric field");
    }

    auto [it, inserted] = pending.try_emplace(image_id);
    if (inserted) {
      order.push_back(image_id);
      it->second.label = label;
    } else if (it->second.label != label) {
      throw ParseError(ParseError::Kind::bad_field,
                       "image '" + image_id + "' appears with labels '" + it->second.label +
                           "' and '" + label + "'");
    }
    it->second.crops.emplace_back(crop_index, std::move(row));
  }

  FeatureDataset dataset;
  for (const std::string& image_id : order) {
    PendingImage& img = pending.at(image_id);
    const int n_crops = static_cast<int>(img.crops.size());
    Matrix features(n_crops, dim);
    std::vector<bool> seen(n_crops, false);
    for (auto& [crop_index, row] : img.crops) {
      if (crop_index < 0 || crop_index >= n_crops || seen[crop_index]) {
        throw ParseError(ParseError::Kind::bad_field,
                         "image '" + image_id + "': crop_index values must be a permutation of 0.." +
                             std::to_string(n_crops - 1));
      }
      seen[crop_index] = true;
      for (int d = 0; d < dim; ++d) features(crop_index, d) = row[d];
    }
    if (dataset.contains(image_id)) {
      throw ParseError(ParseError::Kind::duplicate_id, "duplicate image_id '" + image_id + "'");
    }
    dataset.add_image({image_id, img.label, std::move(features)});
  }
  return dataset;
}

}  // namespace

FeatureDataset load_features(const std::filesystem::path& path) {
  std::vector<char> bytes = slurp(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0) {
    return load_binary(std::move(bytes));
  }
  const std::string csv_probe = "image_id,";
  if (bytes.size() >= csv_probe.size() &&
      std::memcmp(bytes.data(), csv_probe.data(), csv_probe.size()) == 0) {
    return load_csv(bytes);
  }
  throw ParseError(ParseError::Kind::bad_magic,
                   "'" + path.string() + "' is neither an SPFX file nor a feature CSV");
}

namespace {

void write_u32(std::ofstream& out, std::uint32_t value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

void save_binary(const FeatureDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write '" + path.string() + "'");
  out.write(kMagic, 4);
  write_u32(out, kFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(dataset.dim()));
  write_u32(out, static_cast<std::uint32_t>(dataset.n_images()));
  for (int i = 0; i < dataset.n_images(); ++i) {
    const ImageFeatures& image = dataset.image_at(i);
    write_u32(out, static_cast<std::uint32_t>(image.image_id.size()));
    out.write(image.image_id.data(), static_cast<std::streamsize>(image.image_id.size()));
    write_u32(out, static_cast<std::uint32_t>(image.label.size()));
    out.write(image.label.data(), static_cast<std::streamsize>(image.label.size()));
    write_u32(out, static_cast<std::uint32_t>(image.features.rows()));
    const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> payload =
        image.features.cast<float>();
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(sizeof(float) * payload.size()));
  }
  if (!out) throw InvalidInputError("write failed for '" + path.string() + "'");
}

void save_csv(const FeatureDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write '" + path.string() + "'");
  out << "image_id,label,crop_index";
  for (int d = 0; d < dataset.dim(); ++d) out << ",f" << d;
  out << "\n";
  char buffer[32];
  for (int i = 0; i < dataset.n_images(); ++i) {
    const ImageFeatures& image = dataset.image_at(i);
    for (Eigen::Index r = 0; r < image.features.rows(); ++r) {
      out << image.image_id << ',' << image.label << ',' << r;
      for (Eigen::Index d = 0; d < image.features.cols(); ++d) {
        // 9 significant digits round-trip the float32 payload exactly
        std::snprintf(buffer, sizeof(buffer), "%.9g",
                      static_cast<double>(static_cast<float>(image.features(r, d))));
        out << ',' << buffer;
      }
      out << "\n";
    }
  }
  if (!out) throw InvalidInputError("write failed for '" + path.string() + "'");
}

}  // namespace

void save_features(const FeatureDataset& dataset, const std::filesystem::path& path) {
  if (dataset.n_images() == 0) throw InvalidInputError("refusing to save an empty dataset");
  if (path.extension() == ".csv") {
    save_csv(dataset, path);
  } else {
    save_binary(dataset, path);
  }
}

}  // namespace spx
