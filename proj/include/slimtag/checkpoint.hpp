#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "slimtag/encoder.hpp"
#include "slimtag/labels.hpp"

namespace slimtag {

// Container layout: 8-byte magic "SLIMTAG1", little-endian u64 header
// length, UTF-8 JSON header (config, label scheme, tensor table), then raw
// little-endian payloads at the recorded offsets (relative to payload
// start). Tensor payloads are written in sorted-name order so that
// load-then-save is byte identical.
inline constexpr char kCheckpointMagic[8] = {'S', 'L', 'I', 'M', 'T', 'A', 'G', '1'};

struct TensorEntry {
  std::string dtype;  // "f32", "f64" or "i8" (with scale)
  std::vector<int> shape;
  int64_t offset = 0;
  int64_t bytes = 0;
  double scale = 0.0;  // i8 only
};

struct CheckpointInfo {
  EncoderConfig config;
  LabelScheme scheme;
  bool has_crf = false;
  bool quantized = false;
  std::string precision;
  std::map<std::string, TensorEntry> tensors;
};

void save_checkpoint(EncoderModel& model, const LabelScheme& scheme, const std::string& path);

EncoderModel load_checkpoint(const std::string& path, LabelScheme* scheme_out = nullptr);

// Header only; used for size/parameter reporting.
CheckpointInfo read_checkpoint_info(const std::string& path);

}  // namespace slimtag
