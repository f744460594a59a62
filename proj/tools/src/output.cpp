#include "output.hpp"

#include <unistd.h>

#include <fmt/format.h>

#include "num/cli.hpp"
#include "num/errors.hpp"

namespace num::cli {

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

OutputSink::OutputSink(const std::string& path, std::ostream& fallback) : fallback_(&fallback) {
  if (path.empty() || path == "-") return;
  target_ = path;
  temp_ = target_;
  temp_ += fmt::format(".tmp.{}", static_cast<long>(::getpid()));
  file_ = std::make_unique<std::ofstream>(temp_, std::ios::out | std::ios::trunc);
  if (!*file_) throw InputError("cannot open output file '" + path + "'");
}

OutputSink::~OutputSink() {
  if (file_ && !committed_) {
    file_->close();
    std::error_code ec;
    std::filesystem::remove(temp_, ec);
  }
}

void OutputSink::commit() {
  if (!file_) {
    fallback_->flush();
    return;
  }
  file_->close();
  if (!*file_) throw InputError("failed writing output file '" + target_.string() + "'");
  std::filesystem::rename(temp_, target_);
  committed_ = true;
}

void CsvWriter::manifest(const std::string& key, const std::string& value) {
  *os_ << "# " << key << ": " << value << '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) *os_ << (i ? "," : "") << columns[i];
  *os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) { row({}, values); }

void CsvWriter::row(const std::vector<std::string>& text, const std::vector<double>& values) {
  std::string line;
  for (const auto& t : text) {
    if (!line.empty()) line += ',';
    line += t;
  }
  for (double v : values) {
    if (!line.empty()) line += ',';
    line += format_number(v);
  }
  *os_ << line << '\n';
}

}  // namespace num::cli
