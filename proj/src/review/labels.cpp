#include "imgclust/review/labels.hpp"

#include <string>

namespace imgclust::review {

std::string_view label_name(Label label) {
  switch (label) {
    case Label::untagged: return "untagged";
    case Label::responsive: return "responsive";
    case Label::not_responsive: return "not_responsive";
    case Label::further_review: return "further_review";
  }
  return "untagged";
}

Label parse_label(std::string_view name) {
  for (Label l : {Label::untagged, Label::responsive, Label::not_responsive, Label::further_review}) {
    if (label_name(l) == name) return l;
  }
  throw ValidationError("unknown label '" + std::string(name) +
                        "' (expected responsive, not_responsive or further_review)");
}

Label parse_assignable_label(std::string_view name) {
  const Label l = parse_label(name);
  if (l == Label::untagged) throw ValidationError("untagged is the initial state and cannot be assigned");
  return l;
}

}  // namespace imgclust::review
