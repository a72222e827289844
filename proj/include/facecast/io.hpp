#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "facecast/common.hpp"
#include "facecast/geometry.hpp"

namespace facecast {

// ---------------------------------------------------------------------------
// Run configuration: flat key=value file plus programmatic overrides.
// ---------------------------------------------------------------------------

enum class EdgeWeighting { Uniform, Gaussian };
enum class ReconWeightMode { Position, Displacement };

struct RunConfig {
    // neighborhoods / sampling
    int k = 8;              // KNN size for encoding and the smoothness graph
    int m = 64;             // sparse points per sub-cloud per structure
    int subclouds = 5;      // number of low-resolution sub-clouds
    // network
    int heads = 4;          // attention heads H
    int feature_dim = 64;   // model width d (must be divisible by heads)
    int edge_dim = 32;      // edge-function feature width d_g
    int posenc_dim = 24;    // sinusoidal code width C (divisible by 6)
    int lstm_depth = 3;
    int lstm_steps = 3;     // T >= 2
    EdgeWeighting edge_weighting = EdgeWeighting::Uniform;
    // losses / optimization
    double lambda_cd = 1.0;
    double lambda_s = 0.1;
    double lambda_p = 0.1;
    bool smooth_squared = false;  // squared-norm variant of the smoothness term
    double learning_rate = 1e-3;
    int batch_size = 8;
    int epochs = 80;
    int checkpoint_every = 0;  // 0 = final checkpoint only
    std::uint64_t seed = 42;
    // dense reconstruction
    int k_rec = 0;  // 0 = auto: max(10, round(5e-4 * N))
    int jacobi_max_iters = 200;
    double jacobi_tol = 1e-4;  // mm, max per-node update
    ReconWeightMode recon_weight_mode = ReconWeightMode::Position;
    bool recon_symmetrize = false;
    // synthetic data
    int synth_bone = 2000;
    int synth_face = 2400;
    double tau_kernel = 15.0;  // mm, oracle blend kernel width

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0))
                throw InvalidParameter(std::string("RunConfig: ") + name + " must be positive");
        };
        positive(k, "k");
        positive(m, "m");
        positive(subclouds, "subclouds");
        positive(heads, "heads");
        positive(feature_dim, "feature_dim");
        positive(edge_dim, "edge_dim");
        positive(posenc_dim, "posenc_dim");
        positive(lstm_depth, "lstm_depth");
        positive(lambda_cd + lambda_s + lambda_p, "loss weights (not all zero)");
        positive(learning_rate, "learning_rate");
        positive(batch_size, "batch_size");
        positive(epochs, "epochs");
        positive(jacobi_max_iters, "jacobi_max_iters");
        positive(jacobi_tol, "jacobi_tol");
        positive(synth_bone, "synth_bone");
        positive(synth_face, "synth_face");
        positive(tau_kernel, "tau_kernel");
        if (lstm_steps < 2) throw InvalidParameter("RunConfig: lstm_steps must be >= 2");
        if (feature_dim % heads != 0)
            throw InvalidParameter("RunConfig: heads must divide feature_dim");
        if (posenc_dim % 6 != 0)
            throw InvalidParameter("RunConfig: posenc_dim must be divisible by 6");
        if (lambda_cd < 0 || lambda_s < 0 || lambda_p < 0)
            throw InvalidParameter("RunConfig: loss weights must be nonnegative");
        if (k_rec < 0) throw InvalidParameter("RunConfig: k_rec must be >= 0");
    }

    /// k_rec resolution: explicit value, else the density rule.
    int resolve_k_rec(std::size_t dense_count) const {
        if (k_rec > 0) return k_rec;
        return std::max<int>(10, static_cast<int>(std::lround(5e-4 * dense_count)));
    }

    void set(const std::string& key, const std::string& value);
    std::string to_text() const;

    static RunConfig from_file(const std::string& path);
    /// Applies "key=value" override strings on top of this config.
    void apply_overrides(const std::vector<std::string>& overrides);
};

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

inline bool parse_int(const std::string& s, long long& out) {
    try {
        std::size_t pos = 0;
        out = std::stoll(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& value) {
    auto as_int = [&](int& dst) {
        long long v;
        if (!detail::parse_int(value, v)) throw InvalidParameter("config: bad integer for " + key);
        dst = static_cast<int>(v);
    };
    auto as_double = [&](double& dst) {
        double v;
        if (!detail::parse_double(value, v)) throw InvalidParameter("config: bad number for " + key);
        dst = v;
    };
    auto as_bool = [&](bool& dst) {
        if (value == "true" || value == "1")
            dst = true;
        else if (value == "false" || value == "0")
            dst = false;
        else
            throw InvalidParameter("config: bad bool for " + key);
    };
    if (key == "k") as_int(k);
    else if (key == "m") as_int(m);
    else if (key == "subclouds") as_int(subclouds);
    else if (key == "heads") as_int(heads);
    else if (key == "feature_dim") as_int(feature_dim);
    else if (key == "edge_dim") as_int(edge_dim);
    else if (key == "posenc_dim") as_int(posenc_dim);
    else if (key == "lstm_depth") as_int(lstm_depth);
    else if (key == "lstm_steps") as_int(lstm_steps);
    else if (key == "edge_weighting") {
        if (value == "uniform") edge_weighting = EdgeWeighting::Uniform;
        else if (value == "gaussian") edge_weighting = EdgeWeighting::Gaussian;
        else throw InvalidParameter("config: edge_weighting must be uniform|gaussian");
    } else if (key == "lambda_cd") as_double(lambda_cd);
    else if (key == "lambda_s") as_double(lambda_s);
    else if (key == "lambda_p") as_double(lambda_p);
    else if (key == "smooth_squared") as_bool(smooth_squared);
    else if (key == "learning_rate") as_double(learning_rate);
    else if (key == "batch_size") as_int(batch_size);
    else if (key == "epochs") as_int(epochs);
    else if (key == "checkpoint_every") as_int(checkpoint_every);
    else if (key == "seed") {
        long long v;
        if (!detail::parse_int(value, v) || v < 0)
            throw InvalidParameter("config: bad seed");
        seed = static_cast<std::uint64_t>(v);
    } else if (key == "k_rec") as_int(k_rec);
    else if (key == "jacobi_max_iters") as_int(jacobi_max_iters);
    else if (key == "jacobi_tol") as_double(jacobi_tol);
    else if (key == "recon_weight_mode") {
        if (value == "position") recon_weight_mode = ReconWeightMode::Position;
        else if (value == "displacement") recon_weight_mode = ReconWeightMode::Displacement;
        else throw InvalidParameter("config: recon_weight_mode must be position|displacement");
    } else if (key == "recon_symmetrize") as_bool(recon_symmetrize);
    else if (key == "synth_bone") as_int(synth_bone);
    else if (key == "synth_face") as_int(synth_face);
    else if (key == "tau_kernel") as_double(tau_kernel);
    else throw InvalidParameter("config: unknown key '" + key + "'");
}

inline std::string RunConfig::to_text() const {
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream os;
    os << "k=" << k << "\nm=" << m << "\nsubclouds=" << subclouds << "\nheads=" << heads
       << "\nfeature_dim=" << feature_dim << "\nedge_dim=" << edge_dim
       << "\nposenc_dim=" << posenc_dim << "\nlstm_depth=" << lstm_depth
       << "\nlstm_steps=" << lstm_steps
       << "\nedge_weighting=" << (edge_weighting == EdgeWeighting::Uniform ? "uniform" : "gaussian")
       << "\nlambda_cd=" << num(lambda_cd) << "\nlambda_s=" << num(lambda_s)
       << "\nlambda_p=" << num(lambda_p) << "\nsmooth_squared=" << (smooth_squared ? 1 : 0)
       << "\nlearning_rate=" << num(learning_rate) << "\nbatch_size=" << batch_size
       << "\nepochs=" << epochs << "\ncheckpoint_every=" << checkpoint_every << "\nseed=" << seed
       << "\nk_rec=" << k_rec << "\njacobi_max_iters=" << jacobi_max_iters
       << "\njacobi_tol=" << num(jacobi_tol) << "\nrecon_weight_mode="
       << (recon_weight_mode == ReconWeightMode::Position ? "position" : "displacement")
       << "\nrecon_symmetrize=" << (recon_symmetrize ? 1 : 0) << "\nsynth_bone=" << synth_bone
       << "\nsynth_face=" << synth_face << "\ntau_kernel=" << num(tau_kernel) << "\n";
    return os.str();
}

inline RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("config: cannot open " + path);
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(path, lineno, "expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto strip = [](std::string s) {
            auto b2 = s.find_first_not_of(" \t");
            auto e2 = s.find_last_not_of(" \t");
            return b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
        };
        try {
            cfg.set(strip(key), strip(value));
        } catch (const InvalidParameter& err) {
            throw ParseError(path, lineno, err.what());
        }
    }
    cfg.validate();
    return cfg;
}

inline void RunConfig::apply_overrides(const std::vector<std::string>& overrides) {
    for (const auto& ov : overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw InvalidParameter("override must be key=value: " + ov);
        set(ov.substr(0, eq), ov.substr(eq + 1));
    }
    validate();
}

// ---------------------------------------------------------------------------
// ASCII PLY
// ---------------------------------------------------------------------------

struct PlyCloud {
    LabeledCloud cloud;
    std::optional<std::vector<int>> indices;  // present when the file has an index column
    bool had_labels = false;
};

/// Reads an ASCII point-cloud PLY. Required properties: x, y, z. Optional:
/// label (0/1/2), index (dense-cloud position for sparse predictions);
/// red/green/blue are accepted and discarded. When the label property is
/// missing, `default_label` is used; without one the file is rejected.
inline PlyCloud read_ply(const std::string& path,
                         std::optional<SourceLabel> default_label = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("read_ply: cannot open " + path);

    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw ParseError(path, lineno, std::string("unexpected EOF in ") + what);
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };

    if (next_line("header") != "ply") throw ParseError(path, lineno, "missing 'ply' magic");
    if (next_line("header") != "format ascii 1.0")
        throw ParseError(path, lineno, "only 'format ascii 1.0' is supported");

    long long declared = -1;
    std::vector<std::string> props;
    bool in_vertex_element = false;
    while (true) {
        std::istringstream ls(next_line("header"));
        std::string tok;
        ls >> tok;
        if (tok == "comment") continue;
        if (tok == "end_header") break;
        if (tok == "element") {
            std::string name;
            long long count;
            if (!(ls >> name >> count)) throw ParseError(path, lineno, "malformed element line");
            if (name != "vertex")
                throw ParseError(path, lineno, "unsupported element '" + name + "'");
            if (count < 1) throw ParseError(path, lineno, "vertex count must be >= 1");
            declared = count;
            in_vertex_element = true;
            continue;
        }
        if (tok == "property") {
            if (!in_vertex_element) throw ParseError(path, lineno, "property before element");
            std::string type, name;
            if (!(ls >> type >> name)) throw ParseError(path, lineno, "malformed property line");
            if (type == "list") throw ParseError(path, lineno, "list properties not supported");
            props.push_back(name);
            continue;
        }
        throw ParseError(path, lineno, "unexpected header token '" + tok + "'");
    }
    if (declared < 0) throw ParseError(path, lineno, "no 'element vertex' in header");

    int ix = -1, iy = -1, iz = -1, ilabel = -1, iindex = -1;
    for (std::size_t i = 0; i < props.size(); ++i) {
        if (props[i] == "x") ix = static_cast<int>(i);
        else if (props[i] == "y") iy = static_cast<int>(i);
        else if (props[i] == "z") iz = static_cast<int>(i);
        else if (props[i] == "label") ilabel = static_cast<int>(i);
        else if (props[i] == "index") iindex = static_cast<int>(i);
        else if (props[i] != "red" && props[i] != "green" && props[i] != "blue")
            throw ParseError(path, lineno, "unsupported property '" + props[i] + "'");
    }
    if (ix < 0 || iy < 0 || iz < 0)
        throw ParseError(path, lineno, "header must declare properties x, y, z");
    if (ilabel < 0 && !default_label)
        throw InvalidParameter("read_ply: " + path +
                               " has no label property and no default label was given");

    PlyCloud out;
    out.had_labels = ilabel >= 0;
    if (iindex >= 0) out.indices.emplace();
    std::vector<double> row(props.size());
    for (long long v = 0; v < declared; ++v) {
        std::string body;
        if (!std::getline(in, body))
            throw ParseError(path, lineno + 1, "expected " + std::to_string(declared) +
                                                  " vertices, file ended after " +
                                                  std::to_string(v));
        ++lineno;
        std::istringstream ls(body);
        for (std::size_t c = 0; c < props.size(); ++c) {
            std::string tok;
            if (!(ls >> tok))
                throw ParseError(path, lineno, "row has fewer than " +
                                                   std::to_string(props.size()) + " values");
            if (!detail::parse_double(tok, row[c]))
                throw ParseError(path, lineno, "non-numeric token '" + tok + "'");
        }
        std::string extra;
        if (ls >> extra) throw ParseError(path, lineno, "trailing token '" + extra + "'");

        Point3 p{row[ix], row[iy], row[iz]};
        if (!p.finite()) throw ParseError(path, lineno, "non-finite coordinate");
        out.cloud.cloud.points.push_back(p);
        if (ilabel >= 0) {
            double lv = row[ilabel];
            if (lv != 0.0 && lv != 1.0 && lv != 2.0)
                throw ParseError(path, lineno, "label out of range (expected 0, 1 or 2)");
            out.cloud.labels.push_back(static_cast<SourceLabel>(static_cast<int>(lv)));
        } else {
            out.cloud.labels.push_back(*default_label);
        }
        if (iindex >= 0) {
            double iv = row[iindex];
            if (iv < 0 || iv != std::floor(iv))
                throw ParseError(path, lineno, "index must be a nonnegative integer");
            out.indices->push_back(static_cast<int>(iv));
        }
    }
    return out;
}

/// Writes an ASCII point-cloud PLY with x/y/z, a label column, and an
/// optional dense-index column. Coordinates carry 9 significant digits.
inline void write_ply(const LabeledCloud& cloud, const std::string& path,
                      const std::vector<int>* indices = nullptr) {
    if (indices && indices->size() != cloud.size())
        throw InvalidParameter("write_ply: index count != point count");
    std::ofstream out(path);
    if (!out) throw InvalidParameter("write_ply: cannot open " + path);
    out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nproperty uchar label\n";
    if (indices) out << "property int index\n";
    out << "end_header\n";
    char buf[160];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Point3& p = cloud.cloud[i];
        int n = std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %d", p.x, p.y, p.z,
                              static_cast<int>(cloud.labels[i]));
        out.write(buf, n);
        if (indices) out << ' ' << (*indices)[i];
        out << '\n';
    }
    if (!out) throw InvalidParameter("write_ply: write failed for " + path);
}

// ---------------------------------------------------------------------------
// ASCII OBJ (v/f records, triangles only)
// ---------------------------------------------------------------------------

/// Thrown for faces with a vertex count other than 3.
class UnsupportedFace : public Error {
public:
    UnsupportedFace(const std::string& path, std::size_t line)
        : Error(path + ":" + std::to_string(line) + ": only triangle faces are supported") {}
};

inline TriMesh read_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("read_obj: cannot open " + path);
    PointCloud verts;
    std::vector<std::array<int, 3>> tris;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok) || tok == "#") continue;
        if (tok == "v") {
            std::string sx, sy, sz;
            double x, y, z;
            if (!(ls >> sx >> sy >> sz) || !detail::parse_double(sx, x) ||
                !detail::parse_double(sy, y) || !detail::parse_double(sz, z))
                throw ParseError(path, lineno, "malformed vertex record");
            verts.points.push_back({x, y, z});
        } else if (tok == "f") {
            std::vector<long long> idx;
            std::string ref;
            while (ls >> ref) {
                // accept i, i/t, i/t/n, i//n; only the vertex index is used
                auto slash = ref.find('/');
                std::string head = slash == std::string::npos ? ref : ref.substr(0, slash);
                long long v;
                if (!detail::parse_int(head, v))
                    throw ParseError(path, lineno, "malformed face index '" + ref + "'");
                idx.push_back(v);
            }
            if (idx.size() != 3) throw UnsupportedFace(path, lineno);
            std::array<int, 3> tri;
            for (int c = 0; c < 3; ++c) {
                if (idx[c] < 1 || idx[c] > static_cast<long long>(verts.size()))
                    throw ParseError(path, lineno,
                                     "face index " + std::to_string(idx[c]) + " out of range");
                tri[c] = static_cast<int>(idx[c] - 1);
            }
            tris.push_back(tri);
        } else {
            throw ParseError(path, lineno, "unsupported record '" + tok + "'");
        }
    }
    try {
        return TriMesh(std::move(verts), std::move(tris));
    } catch (const InvalidParameter& err) {
        throw ParseError(path, lineno, err.what());
    }
}

inline void write_obj(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidParameter("write_obj: cannot open " + path);
    char buf[160];
    for (const auto& p : mesh.vertices.points) {
        int n = std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", p.x, p.y, p.z);
        out.write(buf, n);
    }
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    if (!out) throw InvalidParameter("write_obj: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Metrics CSV and heatmap PLY
// ---------------------------------------------------------------------------

struct MetricsRow {
    std::string case_id;
    double hausdorff_mm = 0.0;
    double surface_dev_mm = 0.0;
    double landmark_mean_mm = 0.0;
    double pct_lt2 = 0.0;
    double pct_2to4 = 0.0;
    double pct_gt4 = 0.0;
};

inline void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidParameter("write_metrics_csv: cannot open " + path);
    out << "case_id,hausdorff_mm,surface_dev_mm,landmark_mean_mm,pct_lt2,pct_2to4,pct_gt4\n";
    char buf[256];
    for (const auto& r : rows) {
        int n = std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                              r.case_id.c_str(), r.hausdorff_mm, r.surface_dev_mm,
                              r.landmark_mean_mm, r.pct_lt2, r.pct_2to4, r.pct_gt4);
        out.write(buf, n);
    }
    if (!out) throw InvalidParameter("write_metrics_csv: write failed for " + path);
}

/// Deviation color scale: -4 mm -> blue (0,0,255), 0 -> green (0,255,0),
/// +4 mm -> red (255,0,0); linear between stops, clamped outside.
inline std::array<int, 3> heatmap_color(double deviation_mm) {
    double d = std::clamp(deviation_mm, -4.0, 4.0);
    auto channel = [](double v) { return static_cast<int>(std::lround(v)); };
    if (d <= 0.0) {
        double t = (d + 4.0) / 4.0;  // 0 at -4, 1 at 0
        return {0, channel(255.0 * t), channel(255.0 * (1.0 - t))};
    }
    double t = d / 4.0;  // 0 at 0, 1 at +4
    return {channel(255.0 * t), channel(255.0 * (1.0 - t)), 0};
}

/// Writes the mesh vertices as a colored point cloud encoding signed surface
/// deviations (mm) along the scale above.
inline void write_heatmap_ply(const TriMesh& mesh, const std::vector<double>& deviations,
                              const std::string& path) {
    if (deviations.size() != mesh.vertices.size())
        throw InvalidParameter("write_heatmap_ply: deviation count != vertex count");
    std::ofstream out(path);
    if (!out) throw InvalidParameter("write_heatmap_ply: cannot open " + path);
    out << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.size()
        << "\nproperty double x\nproperty double y\nproperty double z\n"
           "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
    char buf[200];
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Point3& p = mesh.vertices[i];
        auto c = heatmap_color(deviations[i]);
        int n = std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %d %d %d\n", p.x, p.y, p.z, c[0],
                              c[1], c[2]);
        out.write(buf, n);
    }
    if (!out) throw InvalidParameter("write_heatmap_ply: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Case manifest (JSON)
// ---------------------------------------------------------------------------

struct CaseManifest {
    std::string case_id;
    std::string bone_pre;
    std::string bone_post;
    std::string face_pre;
    std::string face_post;  // empty at predict time
    std::string face_mesh;  // empty if no mesh is available
    std::vector<int> landmarks;
    std::string plan;                // human-readable plan description
    std::string registration_drive;  // which structure drove ICP, if recorded
};

inline CaseManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("load_manifest: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
    }
    CaseManifest m;
    auto dir = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& rel) {
        std::filesystem::path p(rel);
        return (p.is_absolute() ? p : dir / p).string();
    };
    try {
        m.case_id = j.at("case_id").get<std::string>();
        m.bone_pre = resolve(j.at("bone_pre").get<std::string>());
        m.bone_post = resolve(j.at("bone_post").get<std::string>());
        m.face_pre = resolve(j.at("face_pre").get<std::string>());
        if (j.contains("face_post")) m.face_post = resolve(j.at("face_post").get<std::string>());
        if (j.contains("face_mesh")) m.face_mesh = resolve(j.at("face_mesh").get<std::string>());
        m.landmarks = j.at("landmarks").get<std::vector<int>>();
        if (j.contains("plan")) m.plan = j.at("plan").get<std::string>();
        if (j.contains("registration_drive"))
            m.registration_drive = j.at("registration_drive").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path, 0, std::string("manifest field error: ") + e.what());
    }
    for (const std::string* f : {&m.bone_pre, &m.bone_post, &m.face_pre}) {
        if (!std::filesystem::exists(*f))
            throw InvalidParameter("load_manifest: missing file " + *f);
    }
    for (const std::string* f : {&m.face_post, &m.face_mesh}) {
        if (!f->empty() && !std::filesystem::exists(*f))
            throw InvalidParameter("load_manifest: missing file " + *f);
    }
    for (int lm : m.landmarks)
        if (lm < 0) throw InvalidParameter("load_manifest: negative landmark index");
    return m;
}

inline void save_manifest(const CaseManifest& m, const std::string& path) {
    nlohmann::json j;
    auto dir = std::filesystem::path(path).parent_path();
    auto relativize = [&](const std::string& abs) {
        if (abs.empty()) return abs;
        std::error_code ec;
        auto rel = std::filesystem::relative(abs, dir, ec);
        return ec ? abs : rel.string();
    };
    j["case_id"] = m.case_id;
    j["bone_pre"] = relativize(m.bone_pre);
    j["bone_post"] = relativize(m.bone_post);
    j["face_pre"] = relativize(m.face_pre);
    if (!m.face_post.empty()) j["face_post"] = relativize(m.face_post);
    if (!m.face_mesh.empty()) j["face_mesh"] = relativize(m.face_mesh);
    j["landmarks"] = m.landmarks;
    if (!m.plan.empty()) j["plan"] = m.plan;
    if (!m.registration_drive.empty()) j["registration_drive"] = m.registration_drive;
    std::ofstream out(path);
    if (!out) throw InvalidParameter("save_manifest: cannot open " + path);
    out << j.dump(2) << '\n';
}

}  // namespace facecast
