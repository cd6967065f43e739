#pragma once

#include "vtour/bundle.hpp"
#include "vtour/sample.hpp"

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

namespace vtour::testing {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(std::string_view tag = "vtour") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (std::string(tag) + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
                 std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

// The workshop sample written to <dir>/src and compiled to <dir>/bundle.
struct WorkshopFixture {
    TempDir dir{"workshop"};
    std::filesystem::path src = dir / "src";
    std::filesystem::path out = dir / "bundle";
    TourBundle bundle;

    explicit WorkshopFixture(CompileOptions opts = {}) {
        sample::write_workshop(src);
        if (!opts.created_at) opts.created_at = "2000-01-01T00:00:00Z";
        bundle = compile(src / "manifest.json", src / "media", out, opts);
    }
};

// Independent byte count of every file below root, skipping the listed top-level names.
inline std::uint64_t sum_file_sizes(const std::filesystem::path& root, std::initializer_list<std::string> skip = {}) {
    std::uint64_t total = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const auto rel = e.path().lexically_relative(root).generic_string();
        if (std::find(skip.begin(), skip.end(), rel) != skip.end()) continue;
        total += e.file_size();
    }
    return total;
}

} // namespace vtour::testing
