#pragma once

#include <string_view>

#include "imgclust/common/errors.hpp"

namespace imgclust::review {

enum class Label { untagged, responsive, not_responsive, further_review };

std::string_view label_name(Label label);
// Accepts all four names. Throws ValidationError otherwise.
Label parse_label(std::string_view name);
// Labels a reviewer may assign; untagged is only ever the initial state.
Label parse_assignable_label(std::string_view name);

// A reference to something that already exists (duplicate project name,
// round still running).
class ConflictError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace imgclust::review
