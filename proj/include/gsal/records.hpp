#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gsal/error.hpp"
#include "gsal/fixation_engine.hpp"
#include "gsal/manifest.hpp"
#include "gsal/metrics.hpp"
#include "gsal/topdown.hpp"

namespace gsal {

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string(), path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string(), path.string());
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("file not found: " + path.string(), path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

/// "# key=value" header lines into a map.
inline std::map<std::string, std::string> header_fields(const std::vector<std::string>& lines) {
    std::map<std::string, std::string> h;
    for (const auto& l : lines) {
        if (l.empty() || l[0] != '#') continue;
        const auto eq = l.find('=');
        if (eq == std::string::npos) continue;
        h[trim(l.substr(1, eq - 1))] = trim(l.substr(eq + 1));
    }
    return h;
}

inline StopReason parse_stop_reason(const std::string& s) {
    if (s == "featureless") return StopReason::Featureless;
    if (s == "max_fixations") return StopReason::MaxFixations;
    throw FormatError("unknown stop reason '" + s + "'");
}

}  // namespace detail

// ---- fixation traces ----

inline std::string format_trace(const FixationTrace& trace) {
    std::ostringstream s;
    s << "# start=" << trace.start.x << "," << trace.start.y << "\n";
    s << "# stop_reason=" << to_string(trace.stop_reason) << "\n";
    s << "index\tx\ty\tsaliency\tx0\ty0\tx1\ty1\tscale\n";
    for (std::size_t i = 0; i < trace.fixations.size(); ++i) {
        const auto& f = trace.fixations[i];
        s << i + 1 << '\t' << f.point.x << '\t' << f.point.y << '\t' << format_double(f.saliency_value) << '\t'
          << f.extent.x0 << '\t' << f.extent.y0 << '\t' << f.extent.x1 << '\t' << f.extent.y1 << '\t'
          << f.scale_index << '\n';
    }
    return s.str();
}

inline void write_trace(const std::filesystem::path& path, const FixationTrace& trace) {
    detail::write_text(path, format_trace(trace));
}

/// Reads fixations, start and stop reason; the inhibition grid is not stored.
inline FixationTrace read_trace(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    const auto h = detail::header_fields(lines);
    FixationTrace t;
    if (auto it = h.find("start"); it != h.end()) {
        const auto f = detail::split(it->second, ',');
        if (f.size() != 2) throw FormatError(path.string() + ": malformed start");
        t.start = {detail::parse_int(f[0], path.string()), detail::parse_int(f[1], path.string())};
    }
    if (auto it = h.find("stop_reason"); it != h.end()) t.stop_reason = detail::parse_stop_reason(it->second);
    bool header_seen = false;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const auto& l = lines[n];
        if (l.empty() || l[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(n + 1);
        const auto f = detail::split(l, '\t');
        if (f.size() != 9) throw FormatError(where + ": expected 9 fields");
        Fixation fx;
        fx.point = {detail::parse_int(f[1], where), detail::parse_int(f[2], where)};
        fx.saliency_value = detail::parse_double(f[3], where);
        fx.extent = {detail::parse_int(f[4], where), detail::parse_int(f[5], where), detail::parse_int(f[6], where),
                     detail::parse_int(f[7], where)};
        fx.scale_index = detail::parse_int(f[8], where);
        t.fixations.push_back(fx);
    }
    return t;
}

// ---- top-down models ----

inline std::string format_model(const TopDownModel& model) {
    std::ostringstream s;
    std::string ks, mus, supports;
    for (std::size_t i = 0; i < model.kernel_specs.size(); ++i) {
        const auto& sp = model.kernel_specs[i];
        const char* sep = i ? "," : "";
        ks += sep + std::to_string(sp.k());
        mus += sep + format_double(sp.mu());
        supports += sep + std::to_string(sp.support_radius());
    }
    s << "# alpha=" << format_double(model.alpha) << "\n";
    s << "# k=" << ks << "\n# mu=" << mus << "\n# support=" << supports << "\n";
    s << "class\tmap\tweight\n";
    for (std::size_t c = 0; c < model.classes.size(); ++c)
        for (std::size_t n = 0; n < model.weights[c].size(); ++n)
            s << model.classes[c] << '\t' << n << '\t' << format_double(model.weights[c][n]) << '\n';
    return s.str();
}

inline void write_model(const std::filesystem::path& path, const TopDownModel& model) {
    detail::write_text(path, format_model(model));
}

inline TopDownModel read_model(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    const auto h = detail::header_fields(lines);
    const std::string p = path.string();
    for (const char* key : {"alpha", "k", "mu", "support"})
        if (!h.count(key)) throw FormatError(p + ": missing header '" + key + "'");
    TopDownModel m;
    m.alpha = detail::parse_double(h.at("alpha"), p);
    const auto ks = detail::split(h.at("k"), ',');
    const auto mus = detail::split(h.at("mu"), ',');
    const auto sup = detail::split(h.at("support"), ',');
    if (ks.size() != mus.size() || ks.size() != sup.size()) throw FormatError(p + ": kernel header lists differ in length");
    for (std::size_t i = 0; i < ks.size(); ++i)
        m.kernel_specs.emplace_back(detail::parse_int(ks[i], p), detail::parse_double(mus[i], p),
                                    detail::parse_int(sup[i], p));
    bool header_seen = false;
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const auto& l = lines[n];
        if (l.empty() || l[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const std::string where = p + ":" + std::to_string(n + 1);
        const auto f = detail::split(l, '\t');
        if (f.size() != 3) throw FormatError(where + ": expected class, map, weight");
        const auto it = std::find(m.classes.begin(), m.classes.end(), f[0]);
        std::size_t row = static_cast<std::size_t>(it - m.classes.begin());
        if (it == m.classes.end()) {
            m.classes.push_back(f[0]);
            m.weights.emplace_back();
        }
        const int idx = detail::parse_int(f[1], where);
        if (idx != static_cast<int>(m.weights[row].size())) throw FormatError(where + ": map indices out of order");
        m.weights[row].push_back(detail::parse_double(f[2], where));
    }
    m.validate();
    return m;
}

// ---- metric results ----

struct MetricRow {
    std::string image_id;
    std::string metric;
    double value = 0.0;
    std::string flags;  ///< "degenerate" or empty
    bool operator==(const MetricRow&) const = default;
};

struct MetricTable {
    /// Written as "# key=value" lines ahead of the column header.
    std::vector<std::pair<std::string, std::string>> settings;
    std::vector<MetricRow> rows;
};

inline std::string format_metrics_csv(const MetricTable& t) {
    std::ostringstream s;
    for (const auto& [k, v] : t.settings) s << "# " << k << "=" << v << "\n";
    s << "image_id,metric,value,flags\n";
    for (const auto& r : t.rows) s << r.image_id << ',' << r.metric << ',' << format_double(r.value) << ',' << r.flags << '\n';
    return s.str();
}

inline void write_metrics_csv(const std::filesystem::path& path, const MetricTable& t) {
    detail::write_text(path, format_metrics_csv(t));
}

inline MetricTable read_metrics_csv(const std::filesystem::path& path) {
    MetricTable t;
    bool header_seen = false;
    const auto lines = detail::read_lines(path);
    for (std::size_t n = 0; n < lines.size(); ++n) {
        const auto& l = lines[n];
        if (l.empty()) continue;
        if (l[0] == '#') {
            const auto eq = l.find('=');
            if (eq != std::string::npos) t.settings.emplace_back(detail::trim(l.substr(1, eq - 1)), l.substr(eq + 1));
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(n + 1);
        const auto f = detail::split(l, ',');
        if (f.size() != 4) throw FormatError(where + ": expected 4 columns");
        t.rows.push_back({f[0], f[1], detail::parse_double(f[2], where), f[3]});
    }
    return t;
}

inline std::string format_roc(const std::vector<RocPoint>& curve) {
    std::ostringstream s;
    s << "fpr,tpr\n";
    for (const auto& p : curve) s << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
    return s.str();
}

inline std::vector<RocPoint> read_roc(const std::filesystem::path& path) {
    std::vector<RocPoint> curve;
    const auto lines = detail::read_lines(path);
    for (std::size_t n = 1; n < lines.size(); ++n) {
        if (lines[n].empty()) continue;
        const auto f = detail::split(lines[n], ',');
        if (f.size() != 2) throw FormatError(path.string() + ": malformed ROC row");
        curve.push_back({detail::parse_double(f[0], path.string()), detail::parse_double(f[1], path.string())});
    }
    return curve;
}

}  // namespace gsal
