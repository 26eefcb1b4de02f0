#include "fedsim/idx.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes,
                        std::size_t offset, const std::string& name) {
  if (offset + 4 > bytes.size()) {
    throw FormatError(name + ": truncated at offset " +
                      std::to_string(offset) + " (need 4 bytes, have " +
                      std::to_string(bytes.size() - offset) + ")");
  }
  return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
         static_cast<std::uint32_t>(bytes[offset + 3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path);
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

std::vector<std::uint8_t> gunzip_if_needed(
    std::vector<std::uint8_t> bytes, const std::string& path_for_errors) {
  if (bytes.size() < 2 || bytes[0] != 0x1F || bytes[1] != 0x8B) {
    return bytes;
  }
  z_stream strm{};
  // 15+16: zlib window with gzip header handling.
  if (inflateInit2(&strm, 15 + 16) != Z_OK) {
    throw FormatError(path_for_errors + ": inflateInit failed");
  }
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> buffer(1 << 16);
  strm.next_in = bytes.data();
  strm.avail_in = static_cast<uInt>(bytes.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    strm.next_out = buffer.data();
    strm.avail_out = static_cast<uInt>(buffer.size());
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw FormatError(path_for_errors + ": gzip decompression failed (" +
                        std::to_string(rc) + ")");
    }
    out.insert(out.end(), buffer.data(),
               buffer.data() + (buffer.size() - strm.avail_out));
  }
  inflateEnd(&strm);
  return out;
}

LabeledDataset parse_idx_pair(const std::vector<std::uint8_t>& image_bytes,
                              const std::vector<std::uint8_t>& label_bytes,
                              const std::string& images_name,
                              const std::string& labels_name) {
  const std::uint32_t image_magic = read_be32(image_bytes, 0, images_name);
  if (image_magic != kImageMagic) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "0x%08X", image_magic);
    throw FormatError(images_name + ": bad magic " + buf + " at offset 0");
  }
  const std::uint32_t label_magic = read_be32(label_bytes, 0, labels_name);
  if (label_magic != kLabelMagic) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "0x%08X", label_magic);
    throw FormatError(labels_name + ": bad magic " + buf + " at offset 0");
  }

  const std::uint32_t n_images = read_be32(image_bytes, 4, images_name);
  const std::uint32_t rows = read_be32(image_bytes, 8, images_name);
  const std::uint32_t cols = read_be32(image_bytes, 12, images_name);
  const std::uint32_t n_labels = read_be32(label_bytes, 4, labels_name);
  if (n_images != n_labels) {
    throw FormatError(images_name + " has " + std::to_string(n_images) +
                      " images but " + labels_name + " has " +
                      std::to_string(n_labels) + " labels");
  }
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  const std::size_t expected_image_bytes =
      16 + static_cast<std::size_t>(n_images) * pixels;
  if (image_bytes.size() < expected_image_bytes) {
    throw FormatError(images_name + ": truncated at offset " +
                      std::to_string(image_bytes.size()) + " (expected " +
                      std::to_string(expected_image_bytes) + " bytes)");
  }
  const std::size_t expected_label_bytes = 8 + n_labels;
  if (label_bytes.size() < expected_label_bytes) {
    throw FormatError(labels_name + ": truncated at offset " +
                      std::to_string(label_bytes.size()) + " (expected " +
                      std::to_string(expected_label_bytes) + " bytes)");
  }

  LabeledDataset out;
  out.inputs = RealMatrix(n_images, pixels);
  out.labels.resize(n_images);
  for (std::size_t i = 0; i < n_images; ++i) {
    const std::uint8_t* src = image_bytes.data() + 16 + i * pixels;
    double* dst = out.inputs.row_ptr(i);
    for (std::size_t j = 0; j < pixels; ++j) {
      dst[j] = static_cast<double>(src[j]) / 255.0;
    }
    out.labels[i] = static_cast<int>(label_bytes[8 + i]);
  }
  int max_label = 0;
  for (int l : out.labels) max_label = std::max(max_label, l);
  out.class_count = max_label + 1;
  out.validate();
  return out;
}

LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path) {
  auto image_bytes =
      gunzip_if_needed(read_file_bytes(images_path), images_path);
  auto label_bytes =
      gunzip_if_needed(read_file_bytes(labels_path), labels_path);
  return parse_idx_pair(image_bytes, label_bytes, images_path, labels_path);
}

void save_idx(const LabeledDataset& dataset, const std::string& images_path,
              const std::string& labels_path) {
  dataset.validate();
  std::uint32_t rows = 1;
  std::uint32_t cols = static_cast<std::uint32_t>(dataset.dim());
  if (dataset.dim() == 784) {
    rows = 28;
    cols = 28;
  }
  std::vector<std::uint8_t> image_bytes;
  image_bytes.reserve(16 + dataset.size() * dataset.dim());
  write_be32(image_bytes, kImageMagic);
  write_be32(image_bytes, static_cast<std::uint32_t>(dataset.size()));
  write_be32(image_bytes, rows);
  write_be32(image_bytes, cols);
  for (double v : dataset.inputs.data) {
    image_bytes.push_back(
        static_cast<std::uint8_t>(std::llround(v * 255.0)));
  }
  std::vector<std::uint8_t> label_bytes;
  label_bytes.reserve(8 + dataset.size());
  write_be32(label_bytes, kLabelMagic);
  write_be32(label_bytes, static_cast<std::uint32_t>(dataset.size()));
  for (int l : dataset.labels) {
    label_bytes.push_back(static_cast<std::uint8_t>(l));
  }

  std::ofstream img_out(images_path, std::ios::binary);
  if (!img_out) throw FormatError("cannot write " + images_path);
  img_out.write(reinterpret_cast<const char*>(image_bytes.data()),
                static_cast<std::streamsize>(image_bytes.size()));
  std::ofstream lbl_out(labels_path, std::ios::binary);
  if (!lbl_out) throw FormatError("cannot write " + labels_path);
  lbl_out.write(reinterpret_cast<const char*>(label_bytes.data()),
                static_cast<std::streamsize>(label_bytes.size()));
}

}  // namespace fedsim
