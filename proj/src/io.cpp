#include "wpic/io.hpp"

#include <system_error>

#include "wpic/error.hpp"

namespace wpic {

AtomicFile::AtomicFile(std::filesystem::path target)
    : target_(std::move(target)), temp_(target_.string() + ".partial") {
  if (target_.has_parent_path()) std::filesystem::create_directories(target_.parent_path());
  out_.open(temp_, std::ios::out | std::ios::trunc);
  if (!out_) throw Error("cannot open '" + temp_.string() + "' for writing");
  out_.precision(17);
}

AtomicFile::~AtomicFile() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(temp_, ec);
  }
}

void AtomicFile::commit() {
  out_.flush();
  if (!out_) throw Error("write failed for '" + temp_.string() + "'");
  out_.close();
  std::filesystem::rename(temp_, target_);
  committed_ = true;
}

void write_text_atomic(const std::filesystem::path& target, const std::string& content) {
  AtomicFile file(target);
  file.stream() << content;
  file.commit();
}

}  // namespace wpic
