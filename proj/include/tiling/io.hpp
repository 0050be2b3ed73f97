#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tiling/mesh.hpp"
#include "tiling/metrics.hpp"

namespace tiling {

constexpr const char* kFormatVersion = "tiling/1";

/// 17-significant-digit decimal formatting; round-trips doubles bit-exactly.
/// Negative zero is folded onto "0" so a parse-emit cycle is stable.
inline std::string fmt_g17(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

namespace detail {

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

inline std::string vec_to_json(const Vec3& v, bool three_d) {
    std::string s = "[" + tiling::fmt_g17(v.x) + "," + tiling::fmt_g17(v.y);
    if (three_d) s += "," + tiling::fmt_g17(v.z);
    return s + "]";
}

}  // namespace detail

/// Serialize a mesh document. Outer faces of plane patches are derived data
/// and are not written.
inline std::string save_string(const TilingMesh& mesh) {
    const bool three_d = mesh.manifold.kind == ManifoldKind::Sphere;
    std::ostringstream os;
    os << "{\n";
    os << "  \"format\": \"" << kFormatVersion << "\",\n";
    os << "  \"manifold\": {\"kind\": \"" << mesh.manifold.name() << "\"";
    if (mesh.manifold.kind == ManifoldKind::FlatTorus)
        os << ", \"period_x\": " << fmt_g17(mesh.manifold.period_x)
           << ", \"period_y\": " << fmt_g17(mesh.manifold.period_y);
    if (mesh.manifold.kind == ManifoldKind::Sphere)
        os << ", \"radius\": " << fmt_g17(mesh.manifold.radius);
    os << "},\n";
    os << "  \"provenance\": \"" << detail::json_escape(mesh.provenance) << "\",\n";

    os << "  \"nodes\": [\n";
    for (std::size_t i = 0; i < mesh.nodes().size(); ++i) {
        const Node& n = mesh.nodes()[i];
        os << "    {\"id\": " << n.id << ", \"pos\": " << detail::vec_to_json(n.pos, three_d)
           << "}" << (i + 1 < mesh.nodes().size() ? "," : "") << "\n";
    }
    os << "  ],\n";

    os << "  \"arcs\": [\n";
    for (std::size_t i = 0; i < mesh.arcs().size(); ++i) {
        const Arc& a = mesh.arcs()[i];
        os << "    {\"id\": " << a.id << ", \"start\": " << a.start << ", \"end\": " << a.end
           << ", \"tan_start\": " << detail::vec_to_json(a.tan_start, three_d)
           << ", \"tan_end\": " << detail::vec_to_json(a.tan_end, three_d) << ", \"samples\": [";
        for (std::size_t k = 0; k < a.samples.size(); ++k)
            os << (k ? "," : "") << detail::vec_to_json(a.samples[k], three_d);
        os << "]}" << (i + 1 < mesh.arcs().size() ? "," : "") << "\n";
    }
    os << "  ],\n";

    os << "  \"faces\": [\n";
    bool first = true;
    std::string body;
    for (const Face& f : mesh.faces()) {
        if (f.outer) continue;
        if (!first) body += ",\n";
        first = false;
        body += "    {\"id\": " + std::to_string(f.id) + ", \"walk\": [";
        for (std::size_t k = 0; k < f.walk.size(); ++k) {
            body += (k ? "," : "");
            body += "[" + std::to_string(f.walk[k].first) + "," +
                    (f.walk[k].second ? std::string("1") : std::string("-1")) + "]";
        }
        body += "]}";
    }
    os << body << "\n  ]\n}\n";
    return os.str();
}

inline void save(const TilingMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << save_string(mesh);
    if (!out) throw IoError("write failed for " + path);
}

inline TilingMesh load_string(const std::string& text, const std::string& origin = "<string>") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    try {
        if (!j.contains("format") || !j["format"].is_string())
            throw ParseError(origin + ": missing format field");
        if (j["format"].get<std::string>() != kFormatVersion)
            throw VersionMismatch(origin + ": got \"" + j["format"].get<std::string>() +
                                  "\", expected \"" + kFormatVersion + "\"");

        const nlohmann::json& jm = j.at("manifold");
        std::string kind = jm.at("kind").get<std::string>();
        ManifoldContext manifold;
        if (kind == "plane_patch")
            manifold = ManifoldContext::plane_patch();
        else if (kind == "flat_torus")
            manifold = ManifoldContext::flat_torus(jm.at("period_x").get<double>(),
                                                   jm.at("period_y").get<double>());
        else if (kind == "sphere")
            manifold = ManifoldContext::sphere(jm.at("radius").get<double>());
        else
            throw ParseError(origin + ": unknown manifold kind \"" + kind + "\"");

        auto to_vec = [&](const nlohmann::json& v) -> Vec3 {
            return Vec3{v.at(0).get<double>(), v.at(1).get<double>(),
                        v.size() > 2 ? v.at(2).get<double>() : 0.0};
        };

        std::vector<NodeSpec> nodes;
        for (const auto& jn : j.at("nodes"))
            nodes.push_back(NodeSpec{jn.at("id").get<NodeId>(), to_vec(jn.at("pos"))});

        std::vector<ArcSpec> arcs;
        for (const auto& ja : j.at("arcs")) {
            ArcSpec as;
            as.id = ja.at("id").get<ArcId>();
            as.start = ja.at("start").get<NodeId>();
            as.end = ja.at("end").get<NodeId>();
            for (const auto& js : ja.at("samples")) as.samples.push_back(to_vec(js));
            if (ja.contains("tan_start")) as.tan_start = to_vec(ja.at("tan_start"));
            if (ja.contains("tan_end")) as.tan_end = to_vec(ja.at("tan_end"));
            arcs.push_back(std::move(as));
        }

        std::vector<FaceSpec> faces;
        for (const auto& jf : j.at("faces")) {
            FaceSpec fs;
            fs.id = jf.at("id").get<FaceId>();
            for (const auto& jw : jf.at("walk"))
                fs.walk.emplace_back(jw.at(0).get<ArcId>(), jw.at(1).get<int>() > 0);
            faces.push_back(std::move(fs));
        }

        std::string prov = j.value("provenance", std::string());
        return build_mesh(nodes, arcs, faces, manifold, prov);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
}

inline TilingMesh load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_string(ss.str(), path);
}

/// Combinatorics-only signature (ids, endpoints, walks; no geometry). Equal
/// strings mean the node/arc/face tables agree byte for byte.
inline std::string combinatorial_signature(const TilingMesh& mesh) {
    std::ostringstream os;
    os << mesh.manifold.name() << ";N:";
    for (const Node& n : mesh.nodes()) os << n.id << ",";
    os << ";A:";
    for (const Arc& a : mesh.arcs()) os << a.id << ":" << a.start << ">" << a.end << ",";
    os << ";F:";
    for (const Face& f : mesh.faces()) {
        if (f.outer) continue;
        os << f.id << ":";
        for (const auto& [aid, fwd] : f.walk) os << aid << (fwd ? "+" : "-");
        os << ",";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Symbolic-plane emission
// ---------------------------------------------------------------------------

inline const char* point_kind_name(PointKind k) {
    return k == PointKind::Combinatorial ? "combinatorial" : "corner";
}

/// CSV with header label,kind,x,y; label-sorted rows, deterministic.
inline void emit_symbolic_csv(std::vector<SymbolicPoint> points, const std::string& path) {
    std::sort(points.begin(), points.end(), [](const SymbolicPoint& a, const SymbolicPoint& b) {
        if (a.label != b.label) return a.label < b.label;
        if (a.kind != b.kind) return int(a.kind) < int(b.kind);
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    });
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "label,kind,x,y\n";
    for (const SymbolicPoint& p : points)
        out << p.label << "," << point_kind_name(p.kind) << "," << fmt_g17(p.x) << ","
            << fmt_g17(p.y) << "\n";
    if (!out) throw IoError("write failed for " + path);
}

inline std::vector<SymbolicPoint> parse_symbolic_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    if (line != "label,kind,x,y") throw ParseError(path + ": unexpected header \"" + line + "\"");
    std::vector<SymbolicPoint> points;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> parts;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) parts.push_back(cell);
        if (parts.size() != 4)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected 4 fields");
        SymbolicPoint p;
        p.label = parts[0];
        if (parts[1] == "combinatorial")
            p.kind = PointKind::Combinatorial;
        else if (parts[1] == "corner")
            p.kind = PointKind::Corner;
        else
            throw ParseError(path + ":" + std::to_string(lineno) + ": unknown kind " + parts[1]);
        try {
            p.x = std::stod(parts[2]);
            p.y = std::stod(parts[3]);
        } catch (const std::exception&) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": bad number");
        }
        points.push_back(std::move(p));
    }
    return points;
}

enum class SvgOverlay { None = 0, H2Hyperbola = 1, OriginRays = 2 };

struct SvgTransform {
    double size = 640.0, margin = 60.0, limit = 8.0;
    double px(double x) const { return margin + x / limit * (size - 2.0 * margin); }
    double py(double y) const { return size - margin - y / limit * (size - 2.0 * margin); }
};

inline SvgTransform symbolic_svg_transform(const std::vector<SymbolicPoint>& points) {
    SvgTransform t;
    double m = 0.0;
    for (const SymbolicPoint& p : points) m = std::max({m, p.x, p.y});
    t.limit = std::max(8.0, 1.2 * m);
    return t;
}

/// Standalone static SVG of the symbolic plane, optionally with the h = 2
/// hyperbola and/or origin rays through each label's point pair.
inline void emit_symbolic_svg(std::vector<SymbolicPoint> points, int overlays,
                              const std::string& path) {
    std::sort(points.begin(), points.end(), [](const SymbolicPoint& a, const SymbolicPoint& b) {
        if (a.label != b.label) return a.label < b.label;
        return int(a.kind) < int(b.kind);
    });
    SvgTransform t = symbolic_svg_transform(points);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << int(t.size) << "\" height=\""
       << int(t.size) << "\" viewBox=\"0 0 " << int(t.size) << " " << int(t.size) << "\">\n";
    os << "<rect width=\"" << int(t.size) << "\" height=\"" << int(t.size)
       << "\" fill=\"white\"/>\n";

    // axes
    os << "<line x1=\"" << fmt_fixed(t.px(0)) << "\" y1=\"" << fmt_fixed(t.py(0)) << "\" x2=\""
       << fmt_fixed(t.px(t.limit)) << "\" y2=\"" << fmt_fixed(t.py(0))
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << fmt_fixed(t.px(0)) << "\" y1=\"" << fmt_fixed(t.py(0)) << "\" x2=\""
       << fmt_fixed(t.px(0)) << "\" y2=\"" << fmt_fixed(t.py(t.limit))
       << "\" stroke=\"black\"/>\n";
    bool any_comb = false, any_corner = false;
    for (const SymbolicPoint& p : points) {
        if (p.kind == PointKind::Combinatorial) any_comb = true;
        if (p.kind == PointKind::Corner) any_corner = true;
    }
    std::string xlabel = any_comb && any_corner ? "n\xCC\x84, n\xCC\x84*"
                         : any_corner           ? "n\xCC\x84*"
                                                : "n\xCC\x84";
    std::string ylabel = any_comb && any_corner ? "v\xCC\x84, v\xCC\x84*"
                         : any_corner           ? "v\xCC\x84*"
                                                : "v\xCC\x84";
    os << "<text x=\"" << fmt_fixed(t.px(t.limit) - 20) << "\" y=\"" << fmt_fixed(t.py(0) + 30)
       << "\" font-size=\"16\">" << xlabel << "</text>\n";
    os << "<text x=\"" << fmt_fixed(t.px(0) - 40) << "\" y=\"" << fmt_fixed(t.py(t.limit) + 10)
       << "\" font-size=\"16\">" << ylabel << "</text>\n";
    int tick_step = t.limit <= 12 ? 1 : 2;
    for (int v = tick_step; v <= int(t.limit); v += tick_step) {
        os << "<line x1=\"" << fmt_fixed(t.px(v)) << "\" y1=\"" << fmt_fixed(t.py(0) - 3)
           << "\" x2=\"" << fmt_fixed(t.px(v)) << "\" y2=\"" << fmt_fixed(t.py(0) + 3)
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt_fixed(t.px(v) - 4) << "\" y=\"" << fmt_fixed(t.py(0) + 16)
           << "\" font-size=\"10\">" << v << "</text>\n";
        os << "<line x1=\"" << fmt_fixed(t.px(0) - 3) << "\" y1=\"" << fmt_fixed(t.py(v))
           << "\" x2=\"" << fmt_fixed(t.px(0) + 3) << "\" y2=\"" << fmt_fixed(t.py(v))
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << fmt_fixed(t.px(0) - 20) << "\" y=\"" << fmt_fixed(t.py(v) + 4)
           << "\" font-size=\"10\">" << v << "</text>\n";
    }

    if (overlays & int(SvgOverlay::H2Hyperbola)) {
        os << "<polyline fill=\"none\" stroke=\"#888888\" stroke-dasharray=\"4 3\" points=\"";
        bool first = true;
        for (double n = 2.2; n <= t.limit + 1e-9; n += 0.02) {
            double v = 2.0 * n / (n - 2.0);
            if (v > t.limit * 1.02) continue;
            os << (first ? "" : " ") << fmt_fixed(t.px(n)) << "," << fmt_fixed(t.py(v));
            first = false;
        }
        os << "\"/>\n";
    }
    if (overlays & int(SvgOverlay::OriginRays)) {
        // One ray per label, through its farthest point (the combinatorial
        // one); the linked corner point sits on the same ray.
        std::string prev_label;
        for (const SymbolicPoint& p : points) {
            const SymbolicPoint* anchor = nullptr;
            for (const SymbolicPoint& q : points)
                if (q.label == p.label && (!anchor || q.x * q.x + q.y * q.y >
                                                          anchor->x * anchor->x +
                                                              anchor->y * anchor->y))
                    anchor = &q;
            if (p.label == prev_label || !anchor) continue;
            prev_label = p.label;
            double scale = t.limit / std::max({anchor->x, anchor->y, 1e-12});
            os << "<line x1=\"" << fmt_fixed(t.px(0)) << "\" y1=\"" << fmt_fixed(t.py(0))
               << "\" x2=\"" << fmt_fixed(t.px(anchor->x * scale)) << "\" y2=\""
               << fmt_fixed(t.py(anchor->y * scale))
               << "\" stroke=\"#bbbbbb\" stroke-width=\"0.8\"/>\n";
        }
    }

    for (const SymbolicPoint& p : points) {
        if (p.kind == PointKind::Combinatorial) {
            os << "<circle cx=\"" << fmt_fixed(t.px(p.x)) << "\" cy=\"" << fmt_fixed(t.py(p.y))
               << "\" r=\"4\" fill=\"#1f77b4\" data-x=\"" << fmt_g17(p.x) << "\" data-y=\""
               << fmt_g17(p.y) << "\"/>\n";
        } else {
            os << "<rect x=\"" << fmt_fixed(t.px(p.x) - 3.5) << "\" y=\""
               << fmt_fixed(t.py(p.y) - 3.5)
               << "\" width=\"7\" height=\"7\" fill=\"#d62728\" data-x=\"" << fmt_g17(p.x)
               << "\" data-y=\"" << fmt_g17(p.y) << "\"/>\n";
        }
        os << "<text x=\"" << fmt_fixed(t.px(p.x) + 6) << "\" y=\"" << fmt_fixed(t.py(p.y) - 6)
           << "\" font-size=\"11\">" << p.label << (p.kind == PointKind::Corner ? "*" : "")
           << "</text>\n";
    }
    os << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << os.str();
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace tiling
