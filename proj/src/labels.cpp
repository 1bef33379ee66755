#include "slimtag/labels.hpp"

#include <algorithm>

namespace slimtag {

LabelScheme::LabelScheme(std::vector<std::string> classes) : classes_(std::move(classes)) {
  if (classes_.empty()) throw ConfigError("label scheme needs at least one class");
  for (const auto& c : classes_) {
    if (c.empty()) throw ConfigError("empty class name");
    if (std::count(classes_.begin(), classes_.end(), c) != 1)
      throw ConfigError("duplicate class name: " + c);
  }
  tags_.reserve(static_cast<size_t>(num_tags()));
  tags_.push_back("O");
  for (const auto& c : classes_) {
    tags_.push_back("B-" + c);
    tags_.push_back("I-" + c);
  }
}

LabelScheme LabelScheme::default_scheme() {
  return LabelScheme({"MED", "ORG", "DIS", "HOR", "PHA", "CMT"});
}

int LabelScheme::b_tag(int class_id) const {
  if (class_id < 0 || class_id >= num_classes()) throw DataError("class id out of range");
  return 1 + 2 * class_id;
}

int LabelScheme::i_tag(int class_id) const {
  if (class_id < 0 || class_id >= num_classes()) throw DataError("class id out of range");
  return 2 + 2 * class_id;
}

int LabelScheme::tag_class(int tag) const {
  if (tag <= 0 || tag >= num_tags()) return -1;
  return (tag - 1) / 2;
}

const std::string& LabelScheme::tag_name(int tag) const {
  if (tag < 0 || tag >= num_tags()) throw DataError("tag index out of range: " + std::to_string(tag));
  return tags_[static_cast<size_t>(tag)];
}

int LabelScheme::tag_index(const std::string& name) const {
  for (size_t i = 0; i < tags_.size(); ++i)
    if (tags_[i] == name) return static_cast<int>(i);
  throw DataError("unknown tag name: " + name);
}

int LabelScheme::class_index(const std::string& name) const {
  for (size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i] == name) return static_cast<int>(i);
  throw DataError("unknown class name: " + name);
}

}  // namespace slimtag
