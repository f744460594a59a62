#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace num::cli {

/// Destination of a command's report. A file target is written to a
/// temporary sibling and renamed into place by commit(); without commit the
/// temporary is removed, so a failed run never leaves a partial file behind.
class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback);
  ~OutputSink();
  OutputSink(const OutputSink&) = delete;
  OutputSink& operator=(const OutputSink&) = delete;

  std::ostream& stream() { return file_ ? static_cast<std::ostream&>(*file_) : *fallback_; }
  void commit();

 private:
  std::ostream* fallback_;
  std::unique_ptr<std::ofstream> file_;
  std::filesystem::path target_, temp_;
  bool committed_ = false;
};

/// Comma-separated rows; `#` manifest lines precede the column header.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(&os) {}

  void manifest(const std::string& key, const std::string& value);
  void header(const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  /// Leading text fields followed by numbers.
  void row(const std::vector<std::string>& text, const std::vector<double>& values);

 private:
  std::ostream* os_;
};

}  // namespace num::cli
