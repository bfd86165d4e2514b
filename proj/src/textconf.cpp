#include "dte/textconf.hpp"

#include "dte/errors.hpp"

namespace dte {

namespace {

std::string_view trim(std::string_view s) {
   const auto first = s.find_first_not_of(" \t\r");
   if(first == std::string_view::npos) {
      return {};
   }
   const auto last = s.find_last_not_of(" \t\r");
   return s.substr(first, last - first + 1);
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
   size_t lineno = 0;
   while(!text.empty()) {
      const auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text = (nl == std::string_view::npos) ? std::string_view{} : text.substr(nl + 1);
      fn(++lineno, trim(line));
   }
}

std::pair<std::string, std::string> split_kv(std::string_view line, size_t lineno) {
   const auto eq = line.find('=');
   if(eq == std::string_view::npos) {
      throw MalformedInput("line " + std::to_string(lineno) + ": expected 'key = value'");
   }
   auto key = trim(line.substr(0, eq));
   if(key.empty()) {
      throw MalformedInput("line " + std::to_string(lineno) + ": empty key");
   }
   return {std::string(key), std::string(trim(line.substr(eq + 1)))};
}

std::string parse_header(std::string_view line, size_t lineno) {
   if(line.back() != ']') {
      throw MalformedInput("line " + std::to_string(lineno) + ": unterminated section header");
   }
   return std::string(trim(line.substr(1, line.size() - 2)));
}

}  // namespace

const std::string& ConfSection::at(const std::string& key) const {
   auto it = values.find(key);
   if(it == values.end()) {
      throw MalformedInput("section [" + name + "] is missing '" + key + "'");
   }
   return it->second;
}

std::vector<ConfSection> parse_conf(std::string_view text) {
   std::vector<ConfSection> out(1);
   for_each_line(text, [&](size_t lineno, std::string_view line) {
      if(line.empty() || line.front() == '#') {
         return;
      }
      if(line.front() == '[') {
         out.push_back(ConfSection{parse_header(line, lineno), {}});
         return;
      }
      auto [k, v] = split_kv(line, lineno);
      if(!out.back().values.emplace(k, v).second) {
         throw MalformedInput("line " + std::to_string(lineno) + ": duplicate key '" + k + "'");
      }
   });
   if(out.front().values.empty()) {
      out.erase(out.begin());
   }
   return out;
}

const std::string* Stanza::find(std::string_view key) const {
   for(const auto& [k, v] : fields) {
      if(k == key) {
         return &v;
      }
   }
   return nullptr;
}

std::vector<Stanza> parse_stanzas(std::string_view text) {
   std::vector<Stanza> out;
   std::string section;
   bool in_record = false;
   for_each_line(text, [&](size_t lineno, std::string_view line) {
      if(!line.empty() && line.front() == '#') {
         return;
      }
      if(line.empty()) {
         in_record = false;
         return;
      }
      if(line.front() == '[') {
         section = parse_header(line, lineno);
         in_record = false;
         return;
      }
      auto [k, v] = split_kv(line, lineno);
      if(!in_record) {
         out.push_back(Stanza{section, lineno, {}});
         in_record = true;
      }
      if(out.back().find(k) != nullptr) {
         throw MalformedInput("line " + std::to_string(lineno) + ": duplicate field '" + k + "'");
      }
      out.back().fields.emplace_back(std::move(k), std::move(v));
   });
   return out;
}

}  // namespace dte
