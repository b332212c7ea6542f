#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace surfchaos {

inline constexpr const char* kToolVersion = "0.1.0";

// 17 significant digits.
std::string csv_number(double v);

class Csv {
public:
    explicit Csv(std::vector<std::string> header);
    void row(const std::vector<double>& values);
    std::string str() const;
    std::size_t rows() const { return rows_; }

private:
    std::size_t width_;
    std::size_t rows_ = 0;
    std::string text_;
};

struct SvgSeries {
    std::vector<double> x, y;
};
std::string svg_plot(const std::vector<SvgSeries>& series, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<double>& hlines = {});

std::uint32_t crc32(const std::string& bytes);

struct ManifestEntry {
    std::string name;
    std::uint32_t crc = 0;
    std::size_t bytes = 0;
};

struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    double wall_clock = 0;
    std::vector<ManifestEntry> outputs;

    std::string json() const;
};

// Collects artifacts in memory; nothing touches the disk before commit.
class Artifacts {
public:
    void add(const std::string& name, std::string content);
    // Writes every artifact plus manifest.json into dir through temporary files.
    void commit(const std::string& dir, RunManifest& manifest) const;
    const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

}  // namespace surfchaos
