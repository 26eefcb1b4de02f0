#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"

namespace fedsim {

// IDX is the classic big-endian binary layout for image/label archives:
// 32-bit magic (0x00000803 for images, 0x00000801 for labels), big-endian
// 32-bit dimension sizes, then raw unsigned bytes. Plain and gzip-compressed
// files are both accepted (gzip detected by the 0x1F 0x8B prefix).
LabeledDataset load_idx(const std::string& images_path,
                        const std::string& labels_path);

// Writes the dataset back out as an IDX pair. Pixels are recovered by
// rounding value*255; image geometry defaults to 1 x D when the flat
// dimension is not a 28x28 frame.
void save_idx(const LabeledDataset& dataset, const std::string& images_path,
              const std::string& labels_path);

// Raw-byte helpers, exposed for tests that hand-build archives.
std::vector<std::uint8_t> read_file_bytes(const std::string& path);
std::vector<std::uint8_t> gunzip_if_needed(std::vector<std::uint8_t> bytes,
                                           const std::string& path_for_errors);
LabeledDataset parse_idx_pair(const std::vector<std::uint8_t>& image_bytes,
                              const std::vector<std::uint8_t>& label_bytes,
                              const std::string& images_name,
                              const std::string& labels_name);

}  // namespace fedsim
