#pragma once

// Minimal non-validating XML reader: elements, attributes, comments,
// processing instructions, DOCTYPE and CDATA (skipped), the five predefined
// entities plus numeric character references. Text content is discarded.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "devassist/common.hpp"

namespace devassist::xml {

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;  // document order
  std::vector<Element> children;
  int line = 1;
  int column = 1;
};

class XmlError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Returns the single root element.
Element parse(std::string_view text);

}  // namespace devassist::xml
