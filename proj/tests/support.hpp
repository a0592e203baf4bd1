#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace kgsm::testing {

inline double rel_err(double actual, double expected) {
  const double scale = std::max(std::abs(expected), 1e-300);
  return std::abs(actual - expected) / scale;
}

/// Minimal XML well-formedness check: one root, balanced tags, quoted
/// attributes, known entities, closed comments. Returns "" or a message.
inline std::string xml_problem(const std::string& text) {
  std::vector<std::string> open;
  std::size_t roots = 0;
  std::size_t i = 0;
  auto check_entities = [](const std::string& s) -> bool {
    for (std::size_t p = s.find('&'); p != std::string::npos; p = s.find('&', p + 1)) {
      const std::size_t semi = s.find(';', p);
      if (semi == std::string::npos) {
        return false;
      }
      const std::string name = s.substr(p + 1, semi - p - 1);
      if (name != "amp" && name != "lt" && name != "gt" && name != "quot" && name != "apos" &&
          !(name.size() > 1 && name[0] == '#')) {
        return false;
      }
    }
    return true;
  };
  while (i < text.size()) {
    const std::size_t lt = text.find('<', i);
    const std::string chunk = text.substr(i, lt == std::string::npos ? std::string::npos : lt - i);
    if (chunk.find('>') != std::string::npos || !check_entities(chunk)) {
      return "bad character data near offset " + std::to_string(i);
    }
    if (open.empty() && chunk.find_first_not_of(" \t\r\n") != std::string::npos) {
      return "text outside the root element";
    }
    if (lt == std::string::npos) {
      break;
    }
    if (text.compare(lt, 4, "<!--") == 0) {
      const std::size_t end = text.find("-->", lt + 4);
      if (end == std::string::npos) {
        return "unterminated comment";
      }
      i = end + 3;
      continue;
    }
    if (text.compare(lt, 2, "<?") == 0) {
      const std::size_t end = text.find("?>", lt + 2);
      if (end == std::string::npos) {
        return "unterminated declaration";
      }
      i = end + 2;
      continue;
    }
    // Find the end of the tag, skipping quoted attribute values.
    std::size_t p = lt + 1;
    char quote = 0;
    for (; p < text.size(); ++p) {
      if (quote != 0) {
        if (text[p] == quote) {
          quote = 0;
        } else if (text[p] == '<') {
          return "'<' inside attribute";
        }
      } else if (text[p] == '"' || text[p] == '\'') {
        quote = text[p];
      } else if (text[p] == '>') {
        break;
      }
    }
    if (p >= text.size()) {
      return "unterminated tag";
    }
    std::string tag = text.substr(lt + 1, p - lt - 1);
    i = p + 1;
    if (!tag.empty() && tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (open.empty() || open.back() != name) {
        return "mismatched closing tag </" + name + ">";
      }
      open.pop_back();
      continue;
    }
    const bool self_closing = !tag.empty() && tag.back() == '/';
    if (self_closing) {
      tag.pop_back();
    }
    std::size_t n = 0;
    while (n < tag.size() && !std::isspace(static_cast<unsigned char>(tag[n]))) {
      ++n;
    }
    const std::string name = tag.substr(0, n);
    if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) {
      return "bad element name '" + name + "'";
    }
    // Attributes: name="value" pairs, no duplicates.
    std::vector<std::string> seen;
    std::size_t a = n;
    while (true) {
      while (a < tag.size() && std::isspace(static_cast<unsigned char>(tag[a]))) {
        ++a;
      }
      if (a >= tag.size()) {
        break;
      }
      const std::size_t eq = tag.find('=', a);
      if (eq == std::string::npos || eq + 1 >= tag.size() ||
          (tag[eq + 1] != '"' && tag[eq + 1] != '\'')) {
        return "unquoted attribute in <" + name + ">";
      }
      const std::string attr = tag.substr(a, eq - a);
      if (std::find(seen.begin(), seen.end(), attr) != seen.end()) {
        return "duplicate attribute " + attr;
      }
      seen.push_back(attr);
      const std::size_t close = tag.find(tag[eq + 1], eq + 2);
      if (close == std::string::npos) {
        return "unterminated attribute value";
      }
      if (!check_entities(tag.substr(eq + 2, close - eq - 2))) {
        return "bad entity in attribute";
      }
      a = close + 1;
    }
    if (open.empty()) {
      ++roots;
    }
    if (!self_closing) {
      open.push_back(name);
    }
  }
  if (!open.empty()) {
    return "unclosed element <" + open.back() + ">";
  }
  if (roots != 1) {
    return "expected one root element, found " + std::to_string(roots);
  }
  return "";
}

inline std::size_t count_substr(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) {
    ++count;
  }
  return count;
}

} // namespace kgsm::testing
