#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gsal/error.hpp"
#include "gsal/fixation_engine.hpp"
#include "gsal/gamma_kernel.hpp"
#include "gsal/manifest.hpp"
#include "gsal/metrics.hpp"
#include "gsal/records.hpp"

namespace gsal {

/// Every tunable of a run. Defaults reproduce the free-viewing setup.
struct RunConfig {
    std::vector<int> k = kTorontoK;
    std::vector<double> mu = kTorontoMu;
    int support = 0;  ///< 0: per-kernel default
    double alpha = 5.0;
    double center_sigma = 0.0;  ///< 0: 0.25 * min side
    double blur_sigma = 0.0;    ///< 0: 0.5 * min side / 128
    int resize_width = 171;
    int resize_height = 128;
    int stride = 1;
    double theta = 0.2;
    int max_fixations = 30;
    PathKind path_kind = PathKind::Zigzag;
    int frame_count = 5;
    int frame_size = 16;
    bool foveate = false;
    double fovea_resolution = 16.0;
    int fovea_levels = 6;
    int fovea_blur_side = 3;
    std::uint64_t seed = 0;
    int borji_splits = kDefaultBorjiSplits;

    bool operator==(const RunConfig&) const = default;

    std::vector<GammaKernelSpec> kernel_specs() const { return make_specs(k, mu, support); }

    EngineConfig engine() const {
        EngineConfig e;
        e.saliency.stack = KernelStack(kernel_specs());
        e.saliency.post = {alpha, center_sigma, blur_sigma};
        e.saliency.resize = {resize_width, resize_height};
        e.saliency.stride = stride;
        e.theta = theta;
        e.max_fixations = max_fixations;
        e.path_kind = path_kind;
        e.frame_count = frame_count;
        e.frame_size = frame_size;
        e.foveate = foveate;
        e.foveation = {fovea_levels, fovea_blur_side, fovea_resolution};
        return e;
    }

    FoveationParams foveation() const { return {fovea_levels, fovea_blur_side, fovea_resolution}; }

    void validate() const {
        const EngineConfig e = engine();
        e.validate();
        if (!(alpha >= 1)) throw ValidationError("alpha must be >= 1");
        if (center_sigma < 0 || blur_sigma < 0) throw ValidationError("sigmas must be >= 0 (0 selects the default)");
        if ((resize_width > 0) != (resize_height > 0))
            throw ValidationError("resize_width and resize_height must both be positive or both 0");
        if (stride < 1) throw ValidationError("stride must be >= 1");
        if (borji_splits < 1) throw ValidationError("borji_splits must be >= 1");
        foveation().validate();
    }
};

namespace detail {

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        if constexpr (std::is_floating_point_v<T>) s += format_double(v[i]);
        else s += std::to_string(v[i]);
    }
    return s;
}

inline bool parse_bool(const std::string& s, const std::string& where) {
    if (s == "true" || s == "1" || s == "on") return true;
    if (s == "false" || s == "0" || s == "off") return false;
    throw FormatError(where + ": expected a boolean, got '" + s + "'");
}

}  // namespace detail

inline std::string dump_config(const RunConfig& c) {
    std::ostringstream s;
    s << "k=" << detail::join(c.k) << "\n";
    s << "mu=" << detail::join(c.mu) << "\n";
    s << "support=" << c.support << "\n";
    s << "alpha=" << format_double(c.alpha) << "\n";
    s << "center_sigma=" << format_double(c.center_sigma) << "\n";
    s << "blur_sigma=" << format_double(c.blur_sigma) << "\n";
    s << "resize_width=" << c.resize_width << "\n";
    s << "resize_height=" << c.resize_height << "\n";
    s << "stride=" << c.stride << "\n";
    s << "theta=" << format_double(c.theta) << "\n";
    s << "max_fixations=" << c.max_fixations << "\n";
    s << "path_kind=" << to_string(c.path_kind) << "\n";
    s << "frame_count=" << c.frame_count << "\n";
    s << "frame_size=" << c.frame_size << "\n";
    s << "foveate=" << (c.foveate ? "true" : "false") << "\n";
    s << "fovea_resolution=" << format_double(c.fovea_resolution) << "\n";
    s << "fovea_levels=" << c.fovea_levels << "\n";
    s << "fovea_blur_side=" << c.fovea_blur_side << "\n";
    s << "seed=" << c.seed << "\n";
    s << "borji_splits=" << c.borji_splits << "\n";
    return s.str();
}

/// key=value lines over the defaults; "#" comments and blank lines ignored.
inline RunConfig parse_config(const std::string& text, const std::string& origin = "<config>") {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw FormatError(where + ": expected key=value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string v = detail::trim(t.substr(eq + 1));
        auto ints = [&] {
            std::vector<int> out;
            for (const auto& f : detail::split(v, ',')) out.push_back(detail::parse_int(f, where));
            return out;
        };
        auto doubles = [&] {
            std::vector<double> out;
            for (const auto& f : detail::split(v, ',')) out.push_back(detail::parse_double(f, where));
            return out;
        };
        if (key == "k") c.k = ints();
        else if (key == "mu") c.mu = doubles();
        else if (key == "support") c.support = detail::parse_int(v, where);
        else if (key == "alpha") c.alpha = detail::parse_double(v, where);
        else if (key == "center_sigma") c.center_sigma = detail::parse_double(v, where);
        else if (key == "blur_sigma") c.blur_sigma = detail::parse_double(v, where);
        else if (key == "resize_width") c.resize_width = detail::parse_int(v, where);
        else if (key == "resize_height") c.resize_height = detail::parse_int(v, where);
        else if (key == "stride") c.stride = detail::parse_int(v, where);
        else if (key == "theta") c.theta = detail::parse_double(v, where);
        else if (key == "max_fixations") c.max_fixations = detail::parse_int(v, where);
        else if (key == "path_kind") c.path_kind = parse_path_kind(v);
        else if (key == "frame_count") c.frame_count = detail::parse_int(v, where);
        else if (key == "frame_size") c.frame_size = detail::parse_int(v, where);
        else if (key == "foveate") c.foveate = detail::parse_bool(v, where);
        else if (key == "fovea_resolution") c.fovea_resolution = detail::parse_double(v, where);
        else if (key == "fovea_levels") c.fovea_levels = detail::parse_int(v, where);
        else if (key == "fovea_blur_side") c.fovea_blur_side = detail::parse_int(v, where);
        else if (key == "seed") {
            const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), c.seed);
            if (ec != std::errc() || p != v.data() + v.size()) throw FormatError(where + ": bad seed '" + v + "'");
        } else if (key == "borji_splits") c.borji_splits = detail::parse_int(v, where);
        else throw FormatError(where + ": unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config file not found: " + path.string(), path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

}  // namespace gsal
