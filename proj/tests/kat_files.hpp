// Loads the known-answer stanza files shipped under vectors/.
#pragma once

#include "dte/bytes.hpp"
#include "dte/textconf.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testkat {

using Record = std::map<std::string, std::string>;

inline std::vector<Record> load(const std::string& file) {
   std::ifstream in(std::string(DTE_VECTORS_DIR) + "/" + file);
   if(!in) {
      throw std::runtime_error("cannot open vector file " + file);
   }
   std::stringstream ss;
   ss << in.rdbuf();
   std::vector<Record> out;
   for(const auto& st : dte::parse_stanzas(ss.str())) {
      Record r;
      for(const auto& [k, v] : st.fields) {
         r[k] = v;
      }
      out.push_back(r);
   }
   return out;
}

inline dte::Bytes hex(const Record& r, const std::string& key) {
   return dte::from_hex(r.at(key));
}

}  // namespace testkat
