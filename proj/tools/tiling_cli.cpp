// Command-line surface of the tiling library: pattern generation, degree
// analysis, deregularization, ball averaging, monohedral checks and
// symbolic-plane plots.
//
// Exit codes: 0 success, 1 validation failure (bound violated / normality
// violation), 2 input error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tiling/tiling.hpp"

namespace {

using namespace tiling;

double env_angle_tol() {
    const char* env = std::getenv("TILING_ANGLE_TOL");
    if (!env) return kDefaultAngleTol;
    try {
        double v = std::stod(env);
        if (v > 0) return v;
    } catch (const std::exception&) {
    }
    return kDefaultAngleTol;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        out.push_back(std::stod(cell));
    }
    return out;
}

int cmd_generate(const std::string& family, int rows, int cols, std::uint64_t seed, int n_seeds,
                 const std::string& manifold, double edge_length, int samples_per_arc,
                 const std::string& out_path) {
    PatternSpec spec;
    spec.rows = rows;
    spec.cols = cols;
    spec.rng_seed = seed;
    spec.n_seeds = n_seeds;
    spec.edge_length = edge_length;
    spec.samples_per_arc = samples_per_arc;

    if (manifold == "torus")
        spec.manifold = ManifoldKind::FlatTorus;
    else if (manifold == "plane")
        spec.manifold = ManifoldKind::PlanePatch;
    else if (manifold == "sphere")
        spec.manifold = ManifoldKind::Sphere;
    else
        throw InvalidSpec("unknown manifold \"" + manifold + "\"");

    if (family == "honeycomb") {
        spec.family = PatternFamily::Honeycomb;
    } else if (family == "brick") {
        spec.family = PatternFamily::Brick;
    } else if (family == "rooftile") {
        spec.family = PatternFamily::Rooftile;
    } else if (family == "square_grid") {
        spec.family = PatternFamily::SquareGrid;
    } else if (family == "voronoi") {
        spec.family = PatternFamily::VoronoiTorus;
    } else if (family == "tetrahedron" || family == "cube" || family == "octahedron" ||
               family == "dodecahedron" || family == "icosahedron") {
        spec.family = PatternFamily::Platonic;
        spec.manifold = ManifoldKind::Sphere;
        if (family == "tetrahedron") spec.platonic = PlatonicKind::Tetrahedron;
        if (family == "cube") spec.platonic = PlatonicKind::Cube;
        if (family == "octahedron") spec.platonic = PlatonicKind::Octahedron;
        if (family == "dodecahedron") spec.platonic = PlatonicKind::Dodecahedron;
        if (family == "icosahedron") spec.platonic = PlatonicKind::Icosahedron;
    } else if (family == "monohedral_square") {
        spec.family = PatternFamily::MonohedralDemo;
        spec.demo = MonohedralKind::Square;
    } else if (family == "monohedral_brick") {
        spec.family = PatternFamily::MonohedralDemo;
        spec.demo = MonohedralKind::BrickRect;
    } else if (family == "monohedral_rooftile") {
        spec.family = PatternFamily::MonohedralDemo;
        spec.demo = MonohedralKind::RooftileCurved;
    } else {
        throw InvalidSpec("unknown family \"" + family + "\"");
    }

    TilingMesh mesh = generate(spec);
    save(mesh, out_path);
    std::cout << "wrote " << out_path << " (V=" << mesh.num_nodes() << " E=" << mesh.num_arcs()
              << " F=" << mesh.num_faces() << ")\n";
    return 0;
}

std::string bool_json(bool b) { return b ? "true" : "false"; }

int cmd_analyze(const std::string& path, double angle_tol, const std::string& format) {
    TilingMesh mesh = load(path);
    ValidationReport rep = validate_normality(mesh);
    TilingMetrics m = compute_metrics(mesh, angle_tol);

    std::string note;
    if (mesh.manifold.kind == ManifoldKind::PlanePatch)
        note = "plane patch: outer loops excluded from F and all cell averages; "
               "V-E+F reported for the interior complex";

    if (format == "json") {
        std::ostringstream os;
        os << "{\n";
        os << "  \"manifold\": \"" << mesh.manifold.name() << "\",\n";
        os << "  \"provenance\": \"" << detail::json_escape(mesh.provenance) << "\",\n";
        os << "  \"V\": " << m.V << ", \"E\": " << m.E << ", \"F\": " << m.F << ", \"chi\": "
           << m.chi << ",\n";
        os << "  \"n_bar\": " << fmt_g17(m.n_bar) << ", \"v_bar\": " << fmt_g17(m.v_bar) << ",\n";
        os << "  \"n_star_bar\": " << fmt_g17(m.n_star_bar) << ", \"v_star_bar\": "
           << fmt_g17(m.v_star_bar) << ",\n";
        os << "  \"h_bar\": " << fmt_g17(m.h_bar) << ", \"h_bar_euler\": "
           << fmt_g17(m.h_bar_euler) << ",\n";
        os << "  \"rho\": " << fmt_g17(m.rho) << ", \"sum_r\": " << m.sum_r << ", \"sum_q\": "
           << m.sum_q << ",\n";
        os << "  \"bound_defined\": " << bool_json(m.bound_defined) << ", \"bound_rhs\": "
           << fmt_g17(m.bound_rhs) << ", \"margin\": " << fmt_g17(m.margin)
           << ", \"theorem_holds\": " << bool_json(m.theorem_holds) << ",\n";
        os << "  \"corner_balance_ok\": " << bool_json(m.corner_balance_ok)
           << ", \"convex_candidate\": " << bool_json(m.convex_candidate) << ",\n";
        os << "  \"normality_violations\": [";
        for (std::size_t i = 0; i < rep.violations.size(); ++i)
            os << (i ? ", " : "") << "\"" << detail::json_escape(rep.violations[i].message)
               << "\"";
        os << "],\n";
        os << "  \"note\": \"" << detail::json_escape(note) << "\",\n";
        os << "  \"per_node\": [\n";
        for (std::size_t i = 0; i < m.per_node.size(); ++i) {
            const NodeMetrics& nm = m.per_node[i];
            os << "    {\"id\": " << nm.id << ", \"n\": " << nm.n << ", \"r\": " << nm.r
               << ", \"n_star\": " << nm.n_star << "}" << (i + 1 < m.per_node.size() ? "," : "")
               << "\n";
        }
        os << "  ],\n  \"per_cell\": [\n";
        for (std::size_t i = 0; i < m.per_cell.size(); ++i) {
            const CellMetrics& cm = m.per_cell[i];
            os << "    {\"id\": " << cm.id << ", \"v\": " << cm.v << ", \"q\": " << cm.q
               << ", \"v_star\": " << cm.v_star << "}" << (i + 1 < m.per_cell.size() ? "," : "")
               << "\n";
        }
        os << "  ]\n}\n";
        std::cout << os.str();
    } else if (format == "csv") {
        std::cout << "V,E,F,chi,n_bar,v_bar,n_star_bar,v_star_bar,h_bar,h_bar_euler,rho,"
                     "sum_r,sum_q,bound_rhs,margin,theorem_holds,normality_clean\n";
        std::cout << m.V << "," << m.E << "," << m.F << "," << m.chi << "," << fmt_g17(m.n_bar)
                  << "," << fmt_g17(m.v_bar) << "," << fmt_g17(m.n_star_bar) << ","
                  << fmt_g17(m.v_star_bar) << "," << fmt_g17(m.h_bar) << ","
                  << fmt_g17(m.h_bar_euler) << "," << fmt_g17(m.rho) << "," << m.sum_r << ","
                  << m.sum_q << "," << fmt_g17(m.bound_rhs) << "," << fmt_g17(m.margin) << ","
                  << (m.theorem_holds ? 1 : 0) << "," << (rep.clean() ? 1 : 0) << "\n";
        std::ofstream nodes_csv(path + ".nodes.csv", std::ios::binary);
        if (!nodes_csv) throw IoError("cannot write " + path + ".nodes.csv");
        nodes_csv << "id,n,r,n_star\n";
        for (const NodeMetrics& nm : m.per_node)
            nodes_csv << nm.id << "," << nm.n << "," << nm.r << "," << nm.n_star << "\n";
        std::ofstream cells_csv(path + ".cells.csv", std::ios::binary);
        if (!cells_csv) throw IoError("cannot write " + path + ".cells.csv");
        cells_csv << "id,v,q,v_star\n";
        for (const CellMetrics& cm : m.per_cell)
            cells_csv << cm.id << "," << cm.v << "," << cm.q << "," << cm.v_star << "\n";
    } else {
        throw InvalidSpec("unknown format \"" + format + "\"");
    }

    if (!rep.clean()) {
        std::cerr << "normality violations:\n";
        for (const Violation& v : rep.violations)
            std::cerr << "  [" << violation_name(v.kind) << "] " << v.message << "\n";
        return 1;
    }
    if (m.bound_defined && !m.theorem_holds) {
        std::cerr << "two-vertex bound violated: margin " << m.margin << "\n";
        return 1;
    }
    return 0;
}

int cmd_deregularize(const std::string& path, double target_rho, std::uint64_t seed,
                     double blend_fraction, bool greedy, double angle_tol,
                     const std::string& out_path) {
    TilingMesh mesh = load(path);
    DeregPlan plan = plan_dereg(mesh, target_rho, seed, blend_fraction, greedy, angle_tol);
    TilingMesh out = apply_dereg(mesh, plan);
    TilingMetrics before = compute_metrics(mesh, angle_tol);
    TilingMetrics after = compute_metrics(out, angle_tol);
    save(out, out_path);
    std::cout << "wrote " << out_path << ": rho " << fmt_g17(before.rho) << " -> "
              << fmt_g17(after.rho) << ", (n*,v*) = (" << fmt_g17(after.n_star_bar) << ", "
              << fmt_g17(after.v_star_bar) << "), " << plan.selected.size()
              << " pairs degenerated\n";
    return 0;
}

int cmd_ball_sweep(const std::string& path, const std::string& center_str,
                   const std::string& radii_str, const std::string& policy_str,
                   const std::string& out_path) {
    TilingMesh mesh = load(path);
    std::vector<double> center = parse_double_list(center_str);
    if (center.size() != 2) throw InvalidSpec("--center needs X,Y");
    std::vector<double> radii = parse_double_list(radii_str);
    BallPolicy policy = BallPolicy::CentroidInside;
    if (policy_str == "vertices")
        policy = BallPolicy::AllVerticesInside;
    else if (policy_str != "centroid")
        throw InvalidSpec("unknown policy \"" + policy_str + "\"");
    std::vector<BallStat> stats =
        ball_sweep(mesh, Vec3{center[0], center[1], 0.0}, radii, policy);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path);
    out << "radius,n_bar,v_bar,V,E,F\n";
    for (const BallStat& st : stats)
        out << fmt_g17(st.radius) << "," << fmt_g17(st.n_bar) << "," << fmt_g17(st.v_bar) << ","
            << st.V << "," << st.E << "," << st.F << "\n";
    std::cout << "wrote " << out_path << " (" << stats.size() << " radii)\n";
    return 0;
}

int cmd_monohedral_check(const std::string& path, int samples_per_arc, double angle_tol) {
    TilingMesh mesh = load(path);
    Corollary1Report rep;
    try {
        rep = check_corollary1(mesh, angle_tol, samples_per_arc);
    } catch (const NotMonohedral& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    for (const CellCorollaryResult& c : rep.cells) {
        BoundaryTrace tr = boundary_trace(mesh, c.face, samples_per_arc, angle_tol);
        TurningCheck tc = total_turning_check(tr);
        std::cout << "cell " << c.face << ": v*=" << c.v_star << " K=" << fmt_g17(tc.K)
                  << " smooth=" << fmt_g17(smooth_part_integral(tr)) << " "
                  << (c.pass && tc.pass ? "PASS" : "FAIL") << "\n";
    }
    std::cout << (rep.all_pass ? "corollary holds: every cell has v* >= 2\n"
                               : "corollary violated\n");
    return rep.all_pass ? 0 : 1;
}

int cmd_verify_3d(int grid_n) {
    Prism3dResult r = verify_3d_construction(grid_n);
    bool pass = r.stack_residual <= 1e-12 && r.side_residual <= 1e-12 &&
                r.vertex_tangent_residual <= 1e-3;
    std::cout << "stack_residual=" << fmt_g17(r.stack_residual) << "\n";
    std::cout << "side_residual=" << fmt_g17(r.side_residual) << "\n";
    std::cout << "vertex_tangent_residual=" << fmt_g17(r.vertex_tangent_residual) << "\n";
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

int cmd_plot(const std::string& csv_path, const std::string& out_path,
             const std::vector<std::string>& overlays) {
    std::vector<SymbolicPoint> points = parse_symbolic_csv(csv_path);
    int mask = 0;
    for (const std::string& o : overlays) {
        if (o == "h2")
            mask |= int(SvgOverlay::H2Hyperbola);
        else if (o == "rays")
            mask |= int(SvgOverlay::OriginRays);
        else
            throw InvalidSpec("unknown overlay \"" + o + "\"");
    }
    emit_symbolic_svg(points, mask, out_path);
    std::cout << "wrote " << out_path << " (" << points.size() << " points)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"normal-tiling degree statistics and two-vertex bound checks"};
    app.require_subcommand(1);
    double angle_tol = env_angle_tol();

    // generate
    auto* gen = app.add_subcommand("generate", "generate a pattern family");
    std::string family, manifold = "torus", out_path;
    int rows = 4, cols = 4, n_seeds = 50, samples_per_arc = 64;
    std::uint64_t seed = 1;
    double edge_length = 1.0;
    gen->add_option("family", family,
                    "honeycomb|brick|rooftile|square_grid|voronoi|tetrahedron|cube|octahedron|"
                    "dodecahedron|icosahedron|monohedral_square|monohedral_brick|"
                    "monohedral_rooftile")
        ->required();
    gen->add_option("--rows", rows, "repetition rows");
    gen->add_option("--cols", cols, "repetition cols");
    gen->add_option("--seed", seed, "rng seed");
    gen->add_option("--seeds", n_seeds, "voronoi seed count");
    gen->add_option("--manifold", manifold, "torus|plane|sphere");
    gen->add_option("--edge-length", edge_length, "lattice edge length / sphere radius");
    gen->add_option("--samples-per-arc", samples_per_arc, "samples for curved arcs");
    gen->add_option("--out", out_path, "output mesh file")->required();

    // analyze
    auto* ana = app.add_subcommand("analyze", "full degree metrics of a mesh file");
    std::string ana_path, ana_format = "json";
    ana->add_option("file", ana_path, "mesh file")->required();
    ana->add_option("--angle-tol", angle_tol, "degeneracy tolerance (radians)");
    ana->add_option("--format", ana_format, "json|csv");

    // deregularize
    auto* der = app.add_subcommand("deregularize", "bend generic pairs into degenerate ones");
    std::string der_path, der_out;
    double target_rho = 0.0, blend_fraction = 0.25;
    bool greedy = false;
    std::uint64_t der_seed = 1;
    der->add_option("file", der_path, "mesh file")->required();
    der->add_option("--target-rho", target_rho, "target regularity in [0,1]")->required();
    der->add_option("--seed", der_seed, "rng seed");
    der->add_option("--blend-fraction", blend_fraction, "arc fraction reshaped near nodes");
    der->add_flag("--greedy", greedy, "pick pairs closest to 180 degrees first");
    der->add_option("--out", der_out, "output mesh file")->required();

    // ball-sweep
    auto* ball = app.add_subcommand("ball-sweep", "finite-ball degree averages on a plane patch");
    std::string ball_path, center_str, radii_str, policy_str = "centroid", ball_out;
    ball->add_option("file", ball_path, "mesh file")->required();
    ball->add_option("--center", center_str, "X,Y")->required();
    ball->add_option("--radii", radii_str, "R1,R2,...")->required();
    ball->add_option("--policy", policy_str, "centroid|vertices");
    ball->add_option("--out", ball_out, "output csv")->required();

    // monohedral-check
    auto* mono = app.add_subcommand("monohedral-check", "corollary-1 corner check per cell");
    std::string mono_path;
    int mono_samples = 256;
    mono->add_option("file", mono_path, "mesh file")->required();
    mono->add_option("--samples-per-arc", mono_samples, "trace sampling density");

    // verify-3d
    auto* v3d = app.add_subcommand("verify-3d", "sampled check of the 3D prism construction");
    int grid_n = 64;
    v3d->add_option("--grid", grid_n, "grid resolution");

    // plot
    auto* plot = app.add_subcommand("plot", "symbolic-plane SVG from a points CSV");
    std::string plot_csv, plot_out;
    std::vector<std::string> overlays;
    plot->add_option("csv", plot_csv, "points csv (label,kind,x,y)")->required();
    plot->add_option("--out", plot_out, "output svg")->required();
    plot->add_option("--overlay", overlays, "h2|rays (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed())
            return cmd_generate(family, rows, cols, seed, n_seeds, manifold, edge_length,
                                samples_per_arc, out_path);
        if (ana->parsed()) return cmd_analyze(ana_path, angle_tol, ana_format);
        if (der->parsed())
            return cmd_deregularize(der_path, target_rho, der_seed, blend_fraction, greedy,
                                    angle_tol, der_out);
        if (ball->parsed())
            return cmd_ball_sweep(ball_path, center_str, radii_str, policy_str, ball_out);
        if (mono->parsed()) return cmd_monohedral_check(mono_path, mono_samples, angle_tol);
        if (v3d->parsed()) return cmd_verify_3d(grid_n);
        if (plot->parsed()) return cmd_plot(plot_csv, plot_out, overlays);
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const VersionMismatch& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const InvalidSpec& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "bad argument: " << e.what() << "\n";
        return 2;
    } catch (const TilingError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
    return 2;
}
