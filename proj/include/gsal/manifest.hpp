#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gsal/error.hpp"
#include "gsal/grid.hpp"
#include "gsal/metrics.hpp"

namespace gsal {

/// One manifest line. Paths are resolved against the manifest's directory.
struct ManifestEntry {
    std::string id;  ///< image file stem, unique per manifest
    std::filesystem::path image;
    std::optional<std::filesystem::path> fixations;
    std::vector<Box> boxes;
    std::optional<std::string> class_id;
};

struct DatasetManifest {
    std::string dataset;
    double px_per_degree = 0.0;
    /// Image pixels per feature-grid pixel for tensors listed against this manifest.
    double spatial_scale = 1.0;
    std::vector<ManifestEntry> entries;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw FormatError(what + ": not a number: '" + text + "'");
    return v;
}

inline int parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    int v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw FormatError(what + ": not an integer: '" + text + "'");
    return v;
}

inline bool is_blank_field(const std::string& s) {
    const std::string t = trim(s);
    return t.empty() || t == "-";
}

}  // namespace detail

/// "x0,y0,x1,y1;x0,y0,x1,y1"
inline std::vector<Box> parse_boxes(const std::string& text, const std::string& where = "boxes") {
    std::vector<Box> boxes;
    if (detail::is_blank_field(text)) return boxes;
    for (const auto& part : detail::split(text, ';')) {
        const auto f = detail::split(part, ',');
        if (f.size() != 4) throw FormatError(where + ": malformed box '" + part + "' (expected x0,y0,x1,y1)");
        Box b{detail::parse_int(f[0], where), detail::parse_int(f[1], where), detail::parse_int(f[2], where),
              detail::parse_int(f[3], where)};
        if (b.empty()) throw FormatError(where + ": degenerate box '" + part + "'");
        boxes.push_back(b);
    }
    return boxes;
}

inline std::string format_boxes(const std::vector<Box>& boxes) {
    if (boxes.empty()) return "-";
    std::string s;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(boxes[i].x0) + "," + std::to_string(boxes[i].y0) + "," + std::to_string(boxes[i].x1) +
             "," + std::to_string(boxes[i].y1);
    }
    return s;
}

/// Tab-separated lines: image, fixation file, boxes, class ("-" or empty for
/// missing optional fields). Header lines "# key=value" set dataset,
/// px_per_degree and spatial_scale; other "#" lines are comments.
inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("manifest not found: " + path.string(), path.string());
    const auto base = path.parent_path();
    DatasetManifest m;
    std::set<std::string> ids;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            const auto eq = t.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = detail::trim(t.substr(1, eq - 1));
            const std::string value = detail::trim(t.substr(eq + 1));
            if (key == "dataset") m.dataset = value;
            else if (key == "px_per_degree") m.px_per_degree = detail::parse_double(value, where);
            else if (key == "spatial_scale") m.spatial_scale = detail::parse_double(value, where);
            continue;
        }
        const auto f = detail::split(line, '\t');
        ManifestEntry e;
        e.image = base / detail::trim(f[0]);
        if (!std::filesystem::exists(e.image))
            throw IoError(where + ": image file not found: " + e.image.string(), e.image.string());
        e.id = e.image.stem().string();
        if (!ids.insert(e.id).second) throw ValidationError(where + ": duplicate image id '" + e.id + "'");
        if (f.size() > 1 && !detail::is_blank_field(f[1])) {
            e.fixations = base / detail::trim(f[1]);
            if (!std::filesystem::exists(*e.fixations))
                throw IoError(where + ": fixation file not found: " + e.fixations->string(), e.fixations->string());
        }
        if (f.size() > 2) e.boxes = parse_boxes(f[2], where);
        if (f.size() > 3 && !detail::is_blank_field(f[3])) e.class_id = detail::trim(f[3]);
        if (f.size() > 4) throw FormatError(where + ": too many fields");
        m.entries.push_back(std::move(e));
    }
    if (!(m.px_per_degree >= 0) || !(m.spatial_scale > 0))
        throw ValidationError(path.string() + ": manifest geometry must be positive");
    return m;
}

/// "x y [observer]" per line, image pixels; blank and "#" lines skipped.
/// Fractional coordinates are rounded to the nearest pixel.
inline FixationSet load_fixations(const std::filesystem::path& path, int width, int height, std::string image_id = "") {
    std::ifstream in(path);
    if (!in) throw IoError("fixation file not found: " + path.string(), path.string());
    FixationSet fs;
    fs.image_id = std::move(image_id);
    fs.width = width;
    fs.height = height;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::istringstream fields(t);
        std::string xs, ys;
        fields >> xs >> ys;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        const double x = detail::parse_double(xs, where);
        const double y = detail::parse_double(ys, where);
        fs.points.push_back({static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))});
    }
    return fs;
}

}  // namespace gsal
