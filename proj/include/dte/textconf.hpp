// Line-oriented "key = value" text with optional [section] headers.
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dte {

struct ConfSection {
   std::string name;  // empty for keys before the first header
   std::map<std::string, std::string> values;

   bool has(const std::string& key) const { return values.contains(key); }

   /// Throws MalformedInput naming the section and key when absent.
   const std::string& at(const std::string& key) const;
};

/// '#' starts a comment line. Keys are case-sensitive; a repeated key
/// within one section is rejected.
std::vector<ConfSection> parse_conf(std::string_view text);

/// Stanza form used by known-answer files: a [header] names the algorithm and
/// blank lines separate records. Repeated keys are not allowed within a record.
struct Stanza {
   std::string section;
   size_t line = 0;
   std::vector<std::pair<std::string, std::string>> fields;

   const std::string* find(std::string_view key) const;
};

std::vector<Stanza> parse_stanzas(std::string_view text);

}  // namespace dte
