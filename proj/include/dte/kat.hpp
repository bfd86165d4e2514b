// Known-answer runner over the stanza vector files ([SECTION] header, records
// of "Key = hex" lines separated by blank lines).
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dte::kat {

struct FileResult {
   std::string file;
   size_t passed = 0;
   size_t failed = 0;
   std::vector<std::string> failures;  // "line N: [SECTION] reason"
   std::string error;                  // set when the file could not be read or parsed
};

struct Summary {
   std::vector<FileResult> files;
   size_t passed() const;
   size_t failed() const;
   size_t errors() const;
   bool ok() const { return failed() == 0 && errors() == 0; }
};

/// Sections understood by the runner.
const std::vector<std::string>& supported_sections();

FileResult run_text(const std::string& name, std::string_view text);

/// Every *.txt file in the directory, in name order. Unreadable files are
/// reported as errors and the run continues.
Summary run_directory(const std::filesystem::path& dir);

}  // namespace dte::kat
