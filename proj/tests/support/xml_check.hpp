#pragma once

// Minimal XML well-formedness checker for the SVG outputs: balanced and
// properly nested elements, quoted attributes, a single root, known entities.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace xmlcheck {

struct Result {
  bool ok = true;
  std::string error;
  std::size_t elements = 0;
};

inline Result check(std::string_view doc) {
  Result r;
  auto fail = [&](std::string msg) {
    r.ok = false;
    r.error = std::move(msg);
    return r;
  };
  std::vector<std::string> stack;
  bool root_closed = false;
  std::size_t i = 0;
  auto entity_ok = [&](std::size_t at) {
    static const char* kNames[] = {"&amp;", "&lt;", "&gt;", "&quot;", "&apos;"};
    for (const char* n : kNames)
      if (doc.substr(at, std::string_view(n).size()) == n) return true;
    return doc.substr(at, 2) == "&#";
  };
  while (i < doc.size()) {
    if (doc[i] == '&' && !entity_ok(i)) return fail("bad entity at " + std::to_string(i));
    if (doc[i] != '<') {
      if (stack.empty() && !std::isspace(static_cast<unsigned char>(doc[i])))
        return fail("text outside root");
      ++i;
      continue;
    }
    if (doc.substr(i, 5) == "<?xml") {
      const auto e = doc.find("?>", i);
      if (e == std::string_view::npos) return fail("unterminated declaration");
      i = e + 2;
      continue;
    }
    if (doc.substr(i, 4) == "<!--") {
      const auto e = doc.find("-->", i);
      if (e == std::string_view::npos) return fail("unterminated comment");
      i = e + 3;
      continue;
    }
    const bool closing = doc.substr(i, 2) == "</";
    std::size_t j = i + (closing ? 2 : 1);
    std::size_t name_start = j;
    while (j < doc.size() && (std::isalnum(static_cast<unsigned char>(doc[j])) || doc[j] == '-' ||
                              doc[j] == ':' || doc[j] == '_'))
      ++j;
    const std::string name(doc.substr(name_start, j - name_start));
    if (name.empty()) return fail("empty tag name at " + std::to_string(i));
    if (closing) {
      while (j < doc.size() && std::isspace(static_cast<unsigned char>(doc[j]))) ++j;
      if (j >= doc.size() || doc[j] != '>') return fail("bad closing tag " + name);
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
      stack.pop_back();
      if (stack.empty()) root_closed = true;
      i = j + 1;
      continue;
    }
    if (root_closed) return fail("second root element");
    // Attributes.
    bool self_closing = false;
    for (;;) {
      while (j < doc.size() && std::isspace(static_cast<unsigned char>(doc[j]))) ++j;
      if (j >= doc.size()) return fail("unterminated tag " + name);
      if (doc[j] == '>') break;
      if (doc.substr(j, 2) == "/>") {
        self_closing = true;
        ++j;
        break;
      }
      const std::size_t a = j;
      while (j < doc.size() && doc[j] != '=' && !std::isspace(static_cast<unsigned char>(doc[j])) &&
             doc[j] != '>')
        ++j;
      if (j == a || j >= doc.size() || doc[j] != '=') return fail("bad attribute in " + name);
      ++j;
      if (j >= doc.size() || (doc[j] != '"' && doc[j] != '\'')) return fail("unquoted attribute");
      const char q = doc[j];
      const auto e = doc.find(q, j + 1);
      if (e == std::string_view::npos) return fail("unterminated attribute");
      const auto value = doc.substr(j + 1, e - j - 1);
      if (value.find('<') != std::string_view::npos) return fail("'<' in attribute");
      j = e + 1;
    }
    ++r.elements;
    if (self_closing) {
      if (stack.empty()) root_closed = true;
    } else {
      stack.push_back(name);
    }
    i = j + 1;
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
  if (!root_closed) return fail("no root element");
  return r;
}

inline std::size_t count(std::string_view doc, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = doc.find(needle); p != std::string_view::npos; p = doc.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace xmlcheck
