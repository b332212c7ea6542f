#include "surfchaos/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <boost/crc.hpp>
#include <json.hpp>

#include "surfchaos/errors.hpp"

namespace surfchaos {

namespace fs = std::filesystem;

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

Csv::Csv(std::vector<std::string> header) : width_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) text_ += (i ? "," : "") + header[i];
    text_ += '\n';
}

void Csv::row(const std::vector<double>& values) {
    if (values.size() != width_) throw DomainError("csv row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) text_ += (i ? "," : "") + csv_number(values[i]);
    text_ += '\n';
    ++rows_;
}

std::string Csv::str() const { return text_; }

std::string svg_plot(const std::vector<SvgSeries>& series, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<double>& hlines) {
    const double W = 800, H = 480, L = 70, R = 20, T = 40, B = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    for (double h : hlines) {
        y0 = std::min(y0, h);
        y1 = std::max(y1, h);
    }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    char buf[256];
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"480\" viewBox=\"0 0 800 480\">\n";
    s += "<rect width=\"800\" height=\"480\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L,
                  T, W - L - R, H - T - B);
    s += buf;
    s += "<text x=\"400\" y=\"25\" text-anchor=\"middle\" font-size=\"16\">" + title + "</text>\n";
    s += "<text x=\"400\" y=\"470\" text-anchor=\"middle\" font-size=\"13\">" + xlabel + "</text>\n";
    s += "<text x=\"18\" y=\"240\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 240)\">" + ylabel +
         "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"11\">%.4g</text>\n",
                      px(xv), H - B + 16, xv);
        s += buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-size=\"11\">%.4g</text>\n",
                      L - 6, py(yv) + 4, yv);
        s += buf;
    }
    for (double h : hlines) {
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.2f\" x2=\"%.1f\" y2=\"%.2f\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n",
                      L, py(h), W - R, py(h));
        s += buf;
    }
    const char* colors[] = {"#1f4e9c", "#b03a2e", "#1e8449", "#7d3c98"};
    for (std::size_t k = 0; k < series.size(); ++k) {
        s += std::string("<polyline fill=\"none\" stroke=\"") + colors[k % 4] + "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < series[k].x.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(series[k].x[i]), py(series[k].y[i]));
            s += buf;
        }
        s += "\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

std::uint32_t crc32(const std::string& bytes) {
    boost::crc_32_type c;
    c.process_bytes(bytes.data(), bytes.size());
    return c.checksum();
}

std::string RunManifest::json() const {
    nlohmann::ordered_json j;
    j["tool_version"] = tool_version;
    j["command"] = command;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config) cfg[k] = v;
    j["config"] = cfg;
    j["wall_clock_seconds"] = wall_clock;
    nlohmann::ordered_json outs = nlohmann::ordered_json::array();
    for (const auto& o : outputs) {
        char hex[16];
        std::snprintf(hex, sizeof hex, "%08x", o.crc);
        outs.push_back({{"name", o.name}, {"crc32", hex}, {"bytes", o.bytes}});
    }
    j["outputs"] = outs;
    return j.dump(2) + "\n";
}

void Artifacts::add(const std::string& name, std::string content) {
    if (name.empty() || name.find('/') != std::string::npos || name == "manifest.json")
        throw DomainError("bad artifact name '" + name + "'");
    items_.emplace_back(name, std::move(content));
}

void Artifacts::commit(const std::string& dir, RunManifest& manifest) const {
    manifest.outputs.clear();
    for (const auto& [name, content] : items_) manifest.outputs.push_back({name, crc32(content), content.size()});
    std::vector<std::pair<std::string, std::string>> all = items_;
    all.emplace_back("manifest.json", manifest.json());

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
    std::vector<fs::path> temps;
    auto cleanup = [&] {
        for (const auto& t : temps) fs::remove(t, ec);
    };
    for (const auto& [name, content] : all) {
        const fs::path tmp = fs::path(dir) / ("." + name + ".part");
        temps.push_back(tmp);
        std::ofstream f(tmp, std::ios::binary);
        f << content;
        f.close();
        if (!f) {
            cleanup();
            throw ConfigError("cannot write " + tmp.string());
        }
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
        fs::rename(temps[i], fs::path(dir) / all[i].first, ec);
        if (ec) {
            cleanup();
            throw ConfigError("cannot place " + all[i].first + ": " + ec.message());
        }
    }
}

}  // namespace surfchaos
