#pragma once

#include <filesystem>
#include <fstream>
#include <string>

namespace wpic {

/// Output file written under a temporary name and renamed into place on
/// commit(). An uncommitted file is removed on destruction, so readers never
/// see a truncated result.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target);
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile();

  std::ofstream& stream() { return out_; }
  const std::filesystem::path& target() const { return target_; }
  void commit();

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_text_atomic(const std::filesystem::path& target, const std::string& content);

}  // namespace wpic
