#pragma once

#include "rustmap/text.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testsupport {

inline std::string fixture_dir() { return RUSTMAP_FIXTURE_DIR; }

inline std::string fixture_path(const std::string &rel) {
    return (std::filesystem::path(RUSTMAP_FIXTURE_DIR) / rel).string();
}

// Scratch directory removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string &tag) {
        auto base = std::filesystem::temp_directory_path();
        std::mt19937_64 rng(std::random_device{}());
        path_ = (base / ("rustmap_" + tag + "_" + std::to_string(rng()))).string();
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::string &path() const { return path_; }
    std::string sub(const std::string &rel) const {
        return (std::filesystem::path(path_) / rel).string();
    }
    void write(const std::string &rel, const std::string &content) const {
        auto p = std::filesystem::path(path_) / rel;
        std::filesystem::create_directories(p.parent_path());
        rustmap::write_file(p.string(), content);
    }

  private:
    std::string path_;
};

} // namespace testsupport
