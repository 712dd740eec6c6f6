#include "specknet/image_io.hpp"

#include <algorithm>
#include <cctype>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "specknet/errors.hpp"

namespace specknet {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

void require_supported_extension(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext != ".png" && ext != ".tif" && ext != ".tiff") {
    throw DataError(path.string() + ": unsupported image format '" + ext +
                    "' (expected .png, .tif or .tiff)");
  }
}

}  // namespace

ImagePlane read_image(const std::filesystem::path& path) {
  require_supported_extension(path);
  if (!std::filesystem::exists(path)) throw DataError(path.string() + ": file not found");
  const cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (mat.empty()) throw DataError(path.string() + ": cannot decode image");
  if (mat.channels() != 1) {
    throw DataError(path.string() + ": expected single-channel image, found " +
                    std::to_string(mat.channels()) + " channels");
  }
  if (mat.depth() != CV_8U) {
    throw DataError(path.string() + ": unsupported bit depth (expected 8-bit)");
  }
  ImagePlane img(mat.cols, mat.rows, Domain::PixelU8Range);
  for (int r = 0; r < mat.rows; ++r) {
    const auto* row = mat.ptr<unsigned char>(r);
    for (int c = 0; c < mat.cols; ++c) img.at(r, c) = row[c];
  }
  return img;
}

void write_image(const ImagePlane& img, const std::filesystem::path& path) {
  require_supported_extension(path);
  auto bytes = export_u8(img);
  cv::Mat mat(img.height(), img.width(), CV_8UC1, bytes.data());
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat);
  } catch (const cv::Exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (!ok) throw DataError(path.string() + ": cannot write image");
}

}  // namespace specknet
