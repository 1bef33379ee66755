#pragma once

#include <string>
#include <vector>

#include "slimtag/error.hpp"

namespace slimtag {

// Ordered BIO tagset over entity classes. Tag order is O, then B-c/I-c per
// class, so O always has index 0 and |tags| = 2*|classes| + 1.
class LabelScheme {
 public:
  static constexpr int kIgnoreIndex = -100;

  LabelScheme() = default;
  explicit LabelScheme(std::vector<std::string> classes);

  static LabelScheme default_scheme();  // MED ORG DIS HOR PHA CMT

  int num_classes() const { return static_cast<int>(classes_.size()); }
  int num_tags() const { return 2 * num_classes() + 1; }

  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<std::string>& tags() const { return tags_; }

  int b_tag(int class_id) const;
  int i_tag(int class_id) const;
  bool is_b(int tag) const { return tag > 0 && tag % 2 == 1; }
  bool is_i(int tag) const { return tag > 0 && tag % 2 == 0; }
  bool is_o(int tag) const { return tag == 0; }
  // Class of a B-/I- tag; -1 for O.
  int tag_class(int tag) const;

  const std::string& tag_name(int tag) const;
  int tag_index(const std::string& name) const;
  int class_index(const std::string& name) const;

 private:
  std::vector<std::string> classes_;
  std::vector<std::string> tags_;
};

}  // namespace slimtag
