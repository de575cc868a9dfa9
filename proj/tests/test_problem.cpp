#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "mindist/problem.hpp"

using namespace mindist;

namespace {

bool same_doubles(const Vec& a, const Vec& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

std::filesystem::path tmp_file(const std::string& name, const std::string& text) {
    auto path = std::filesystem::temp_directory_path() / ("mindist_test_" + name);
    std::ofstream f(path);
    f << text;
    return path;
}

// Concentric circles in the z = 0 plane: closest distance 2 at any pair
// of equal angles, so every start converges quickly.
std::string circles_doc(const std::string& solver_extra = "") {
    return std::string(R"({
  "surface_a": { "kind": "circle", "center": [0, 0, 0], "radius": 1, "normal": [0, 0, 1] },
  "surface_b": { "kind": "circle", "center": [0, 0, 0], "radius": 3, "normal": [0, 0, 1] },
  "potential": { "kind": "harmonic", "stiffness": 1.0 },
  "solver": { "dt": 0.001, "damping": 2.5, "starts": 2, "seed": 1)") +
           solver_extra + "}\n}\n";
}

} // namespace

TEST_CASE("surface documents parse into evaluable surfaces") {
    SUBCASE("sphere matches its factory twin bitwise") {
        Surface doc = parse_surface_spec(
            R"({ "kind": "sphere", "center": [0.5, -1.0, 2.0], "radius": 1.75 })");
        Surface twin = Surface::sphere({0.5, -1.0, 2.0}, 1.75);
        CHECK(doc.kind() == "sphere");
        CHECK(doc.param_dim() == 2);
        CHECK(doc.ambient_dim() == 3);
        const Vec p{1.1, 2.3};
        CHECK(same_doubles(doc.evaluate(p), twin.evaluate(p)));
    }

    SUBCASE("expression surface") {
        Surface s = parse_surface_spec(R"({
            "kind": "expression",
            "vars": ["u", "v"],
            "components": ["u", "v", "u*u+v*v"],
            "domain": [[-2, 2], [-2, 2]]
        })");
        CHECK(s.param_dim() == 2);
        CHECK(s.ambient_dim() == 3);
        CHECK_FALSE(s.analytic_derivatives());
        const Vec x = s.evaluate(Vec{0.5, -1.0});
        CHECK(x[0] == 0.5);
        CHECK(x[1] == -1.0);
        CHECK(x[2] == doctest::Approx(1.25).epsilon(1e-15));
    }

    SUBCASE("graph surface") {
        Surface s = parse_surface_spec(R"({
            "kind": "graph",
            "vars": ["u", "v"],
            "function": "u*v",
            "domain": [[-1, 1], [-1, 1]],
            "derivative_step": 1e-4
        })");
        CHECK(s.kind() == "graph");
        CHECK(s.derivative_step() == 1e-4);
        const Vec x = s.evaluate(Vec{0.25, 0.5});
        CHECK(x == Vec{0.25, 0.5, 0.125});
    }

    SUBCASE("torus, circle, plane patch, periodic line") {
        Surface torus = parse_surface_spec(
            R"({ "kind": "torus", "center": [0, 0, 0], "major_radius": 2, "minor_radius": 0.5 })");
        CHECK(same_doubles(torus.evaluate(Vec{0.0, 0.0}), Vec{2.5, 0.0, 0.0}));

        Surface circle = parse_surface_spec(
            R"({ "kind": "circle", "center": [0, 0, 0], "radius": 2, "normal": [0, 0, 1] })");
        CHECK(circle.param_dim() == 1);
        CHECK(circle.domains()[0].periodic);

        Surface patch = parse_surface_spec(R"({
            "kind": "plane-patch",
            "origin": [1, 1, 1],
            "axis_u": [1, 0, 0],
            "axis_v": [0, 1, 0],
            "domain": [[-2, 5], [0, 1]]
        })");
        CHECK(same_doubles(patch.evaluate(Vec{2.0, 0.5}), Vec{3.0, 1.5, 1.0}));
        CHECK_FALSE(patch.domains()[0].periodic);

        Surface line = parse_surface_spec(R"({
            "kind": "line",
            "point": [0, 0, 2],
            "direction": [1, 0, 0],
            "domain": [[0, 6.283185307179586, "periodic"]]
        })");
        CHECK(line.domains()[0].periodic);
        Vec q{7.0};
        line.wrap(q);
        CHECK(q[0] == doctest::Approx(7.0 - 6.283185307179586).epsilon(1e-12));
    }

    SUBCASE("mass field is applied") {
        Surface s = parse_surface_spec(
            R"({ "kind": "sphere", "center": [0, 0, 0], "radius": 1, "mass": 2.5 })");
        CHECK(s.mass() == 2.5);
    }
}

TEST_CASE("invalid surface documents are rejected with the offending field named") {
    auto message_of = [](const std::string& text) {
        try {
            parse_surface_spec(text);
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string();
    };

    SUBCASE("negative radius names the field") {
        const std::string msg =
            message_of(R"({ "kind": "sphere", "center": [0, 0, 0], "radius": -1 })");
        CHECK(msg.find("radius") != std::string::npos);
    }

    SUBCASE("unknown fields are named with their context") {
        const std::string msg = message_of(
            R"({ "kind": "sphere", "center": [0, 0, 0], "radius": 1, "radiu": 2 })");
        CHECK(msg.find("radiu") != std::string::npos);
        CHECK(msg.find("sphere") != std::string::npos);
    }

    SUBCASE("unknown kind lists the vocabulary") {
        const std::string msg = message_of(R"({ "kind": "blob", "center": [0, 0, 0] })");
        CHECK(msg.find("blob") != std::string::npos);
        CHECK(msg.find("torus") != std::string::npos);
    }

    SUBCASE("missing kind") {
        CHECK(message_of(R"({ "center": [0, 0, 0], "radius": 1 })").find("kind") !=
              std::string::npos);
    }

    SUBCASE("malformed domains") {
        const std::string base = R"({
            "kind": "line", "point": [0, 0, 0], "direction": [1, 0, 0], "domain": )";
        CHECK_THROWS_AS(parse_surface_spec(base + "[[0]] }"), ValidationError);
        CHECK_THROWS_AS(parse_surface_spec(base + R"([[0, 1, "weird"]] })"), ValidationError);
        CHECK_THROWS_AS(parse_surface_spec(base + "[[2, 1]] }"), ValidationError);
        CHECK_THROWS_AS(parse_surface_spec(base + "[[0, 1], [0, 1]] }"), ValidationError);
    }

    SUBCASE("type errors") {
        CHECK_THROWS_AS(
            parse_surface_spec(R"({ "kind": "sphere", "center": "origin", "radius": 1 })"),
            ValidationError);
        CHECK_THROWS_AS(
            parse_surface_spec(R"({ "kind": "sphere", "center": [0, 0, 0], "radius": "1" })"),
            ValidationError);
    }

    SUBCASE("text that is not JSON raises ParseError with a location") {
        try {
            parse_surface_spec("{ \"kind\": ");
            CHECK(false);
        } catch (const ParseError& e) {
            CHECK(e.offset > 0);
        }
    }
}

TEST_CASE("surface specs round-trip through print and parse") {
    std::vector<Surface> shapes;
    shapes.push_back(Surface::sphere({0.5, -1.0, 2.0}, 1.75));
    shapes.push_back(Surface::ellipsoid({0.1, 0.2, 0.3}, {2.0, 1.0, 0.75}));
    shapes.push_back(Surface::torus({1.0, -2.0, 0.5}, 2.25, 0.6));
    shapes.push_back(Surface::plane_patch({1, 1, 1}, {1, 2, 0}, {0, 1, 3}, {-2.0, 5.0, false},
                                          {0.0, 1.0, false}));
    shapes.push_back(Surface::line({0, 0, 2}, {1, 0.5, -0.25}, {-50.0, 50.0, false}));
    shapes.push_back(Surface::circle({0.35, 0.2, 0.0}, 1.0, {1.0, 2.0, 2.0}));
    shapes.push_back(Surface::graph({"u", "v"}, "sin(u)*cos(v)",
                                    {{-1.0, 1.0, false}, {-1.0, 1.0, false}}, 1e-4));
    shapes.push_back(Surface::expression({"u"}, {"cos(u)", "sin(u)", "0.1*u"},
                                         {{0.0, 6.0, false}}));
    shapes.push_back(Surface::sphere({0, 0, 0}, 1.0).with_mass(2.5));

    std::mt19937_64 rng(987654321);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (const Surface& s : shapes) {
        CAPTURE(s.kind());
        const std::string text = print_surface_spec(s);
        const Surface back = parse_surface_spec(text);
        CHECK(back.kind() == s.kind());
        CHECK(back.mass() == s.mass());
        CHECK(back.param_dim() == s.param_dim());
        CHECK(back.ambient_dim() == s.ambient_dim());
        REQUIRE(back.domains().size() == s.domains().size());
        for (std::size_t a = 0; a < s.domains().size(); ++a) {
            CHECK(back.domains()[a].lo == s.domains()[a].lo);
            CHECK(back.domains()[a].hi == s.domains()[a].hi);
            CHECK(back.domains()[a].periodic == s.domains()[a].periodic);
        }
        for (int trial = 0; trial < 100; ++trial) {
            Vec p(s.param_dim());
            for (std::size_t a = 0; a < p.size(); ++a) {
                const auto& d = s.domains()[a];
                p[a] = d.lo + unit(rng) * (d.hi - d.lo) * 0.999;
            }
            REQUIRE(same_doubles(back.evaluate(p), s.evaluate(p)));
        }
    }
}

TEST_CASE("problem documents parse strictly with defaults") {
    SUBCASE("full document") {
        ProblemDocument doc = parse_problem(circles_doc(", \"max_steps\": 50000"));
        CHECK(doc.surface_a.kind() == "circle");
        CHECK(doc.surface_b.kind() == "circle");
        CHECK(doc.solver.dt == 0.001);
        CHECK(doc.solver.damping == 2.5);
        CHECK(doc.solver.starts == 2);
        CHECK(doc.solver.seed == 1);
        CHECK(doc.solver.max_steps == 50000);
        CHECK(doc.potential.kind == Potential::Kind::Harmonic);
    }

    SUBCASE("defaults when optional sections are absent") {
        ProblemDocument doc = parse_problem(R"({
            "surface_a": { "kind": "sphere", "center": [0, 0, 0], "radius": 1 },
            "surface_b": { "kind": "sphere", "center": [4, 0, 0], "radius": 1 }
        })");
        CHECK(doc.solver.dt == 1e-3);
        CHECK(doc.solver.damping == 1.0);
        CHECK(doc.solver.starts == 8);
        CHECK(doc.solver.max_steps == 2'000'000);
        CHECK(doc.solver.tol_velocity == 1e-8);
        CHECK(doc.solver.tol_gradient == 1e-8);
        CHECK_FALSE(doc.solver.record_trajectory);
        CHECK(doc.solver.sample_every == 10);
        CHECK(doc.potential.kind == Potential::Kind::Harmonic);
        CHECK(doc.potential.value(2.0) == doctest::Approx(2.0).epsilon(1e-15));
    }

    SUBCASE("output section folds into the solver configuration") {
        ProblemDocument doc = parse_problem(R"({
            "surface_a": { "kind": "sphere", "center": [0, 0, 0], "radius": 1 },
            "surface_b": { "kind": "sphere", "center": [4, 0, 0], "radius": 1 },
            "output": { "trajectory": true, "sample_every": 3 }
        })");
        CHECK(doc.solver.record_trajectory);
        CHECK(doc.solver.sample_every == 3);
    }

    SUBCASE("power potential") {
        ProblemDocument doc = parse_problem(R"({
            "surface_a": { "kind": "sphere", "center": [0, 0, 0], "radius": 1 },
            "surface_b": { "kind": "sphere", "center": [4, 0, 0], "radius": 1 },
            "potential": { "kind": "power", "stiffness": 0.5, "exponent": 3 }
        })");
        CHECK(doc.potential.kind == Potential::Kind::Power);
        CHECK(doc.potential.value(2.0) == doctest::Approx(4.0).epsilon(1e-15));
    }

    SUBCASE("rejections name the problem") {
        auto message_of = [](const std::string& text) {
            try {
                parse_problem(text);
            } catch (const Error& e) {
                return std::string(e.what());
            }
            return std::string();
        };
        const std::string a = R"("surface_a": { "kind": "sphere", "center": [0,0,0], "radius": 1 })";
        const std::string b = R"("surface_b": { "kind": "sphere", "center": [4,0,0], "radius": 1 })";

        CHECK(message_of("{" + a + "}").find("surface_b") != std::string::npos);
        CHECK(message_of("{" + a + "," + b + R"(, "solvers": {}})").find("solvers") !=
              std::string::npos);
        CHECK(message_of("{" + a + "," + b + R"(, "solver": { "dtt": 1 }})").find("dtt") !=
              std::string::npos);
        CHECK(message_of("{" + a + "," + b + R"(, "solver": { "seed": -4 }})").find("seed") !=
              std::string::npos);
        CHECK(message_of("{" + a + "," + b +
                         R"(, "output": { "sample_every": 0 }})").find("sample_every") !=
              std::string::npos);
        CHECK(message_of("{" + a + "," + b +
                         R"(, "potential": { "exponent": 3 }})").find("exponent") !=
              std::string::npos);
        CHECK(message_of("{" + a + "," + b +
                         R"(, "output": { "trajectory": 1 }})").find("trajectory") !=
              std::string::npos);

        // Mismatched ambient dimensions between the two surfaces.
        const std::string planar = R"("surface_b": {
            "kind": "expression", "vars": ["u"], "components": ["u", "u*u"],
            "domain": [[-1, 1]] })";
        CHECK(message_of("{" + a + "," + planar + "}").find("ambient") != std::string::npos);
    }
}

TEST_CASE("result records are canonical and reproducible") {
    ProblemDocument doc = parse_problem(circles_doc());
    SolveResult res = solve(doc.surface_a, doc.surface_b, doc.potential, doc.solver,
                            Vec{0.3, 1.4});
    REQUIRE(res.converged);

    const std::string rec = result_record(res);
    auto parsed = nlohmann::ordered_json::parse(rec);
    std::vector<std::string> keys;
    for (auto it = parsed.begin(); it != parsed.end(); ++it) keys.push_back(it.key());
    const std::vector<std::string> expected{
        "converged",    "distance", "closest_point_a",    "closest_point_b", "minimizer",
        "steps",        "final_energy", "final_gradient_norm", "seed"};
    CHECK(keys == expected);
    CHECK(parsed["converged"].get<bool>());

    const double distance = parsed["distance"].get<double>();
    CHECK(std::memcmp(&distance, &res.distance, sizeof(double)) == 0);

    SolveResult res2 = solve(doc.surface_a, doc.surface_b, doc.potential, doc.solver,
                             Vec{0.3, 1.4});
    CHECK(result_record(res2) == rec);

    OracleResult oracle = grid_min_distance(doc.surface_a, doc.surface_b,
                                            GridSpec::uniform(doc.surface_a, doc.surface_b, 64));
    auto orec = nlohmann::ordered_json::parse(oracle_record(oracle));
    std::vector<std::string> okeys;
    for (auto it = orec.begin(); it != orec.end(); ++it) okeys.push_back(it.key());
    CHECK(okeys == std::vector<std::string>{"distance", "argmin_a", "argmin_b",
                                            "resolution_bound", "pairs"});

    const std::string comp = comparison_record(res, oracle);
    CHECK(comp.find("agreement_gap") != std::string::npos);
    CHECK(nlohmann::json::parse(comp)["within_resolution_bound"].get<bool>());
}

TEST_CASE("trajectory CSV has the pinned header and non-increasing energy") {
    ProblemDocument doc = parse_problem(circles_doc());
    doc.solver.record_trajectory = true;
    doc.solver.sample_every = 5;
    SolveResult res = solve(doc.surface_a, doc.surface_b, doc.potential, doc.solver,
                            Vec{0.3, 1.4});
    REQUIRE(res.converged);
    REQUIRE(res.trajectory.size() >= 3);

    std::ostringstream os;
    write_trajectory_csv(os, res);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "time,q1,q2,r,E");

    double last_time = -1.0, last_energy = std::numeric_limits<double>::infinity();
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        std::istringstream cells(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
        REQUIRE(row.size() == 5);
        CHECK(row[0] > last_time);
        CHECK(row[4] <= last_energy + 1e-9);
        CHECK(row[3] >= 0.0);
        last_time = row[0];
        last_energy = row[4];
        ++rows;
    }
    CHECK(rows == res.trajectory.size());
}

TEST_CASE("run_solve drives a document end to end") {
    const auto doc_path = tmp_file("circles.json", circles_doc());

    SUBCASE("converged run exits 0 with a parsable record") {
        CliOptions opts;
        opts.document_path = doc_path.string();
        std::ostringstream out, err;
        CHECK(run_solve(opts, out, err) == 0);
        auto rec = nlohmann::json::parse(out.str());
        CHECK(rec["converged"].get<bool>());
        CHECK(rec["distance"].get<double>() == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(rec["seed"].get<std::uint64_t>() == 1);

        std::ostringstream out2, err2;
        CHECK(run_solve(opts, out2, err2) == 0);
        CHECK(out2.str() == out.str());
    }

    SUBCASE("flag overrides beat document values") {
        CliOptions opts;
        opts.document_path = doc_path.string();
        opts.seed = 42;
        std::ostringstream out, err;
        CHECK(run_solve(opts, out, err) == 0);
        CHECK(nlohmann::json::parse(out.str())["seed"].get<std::uint64_t>() == 42);
    }

    SUBCASE("step cap produces a best-so-far record and exit 2") {
        CliOptions opts;
        opts.document_path = doc_path.string();
        opts.max_steps = 10;
        std::ostringstream out, err;
        CHECK(run_solve(opts, out, err) == 2);
        auto rec = nlohmann::json::parse(out.str());
        CHECK_FALSE(rec["converged"].get<bool>());
        CHECK(rec["steps"].get<std::size_t>() == 10);
        CHECK(rec["distance"].get<double>() > 0.0);
        CHECK(err.str().find("warning") != std::string::npos);
    }

    SUBCASE("--out and --trajectory write files") {
        const auto out_path = std::filesystem::temp_directory_path() / "mindist_test_rec.json";
        const auto csv_path = std::filesystem::temp_directory_path() / "mindist_test_traj.csv";
        std::filesystem::remove(out_path);
        std::filesystem::remove(csv_path);
        CliOptions opts;
        opts.document_path = doc_path.string();
        opts.out_path = out_path.string();
        opts.trajectory_path = csv_path.string();
        std::ostringstream out, err;
        CHECK(run_solve(opts, out, err) == 0);
        CHECK(out.str().empty());

        std::ifstream rec_in(out_path);
        REQUIRE(rec_in.good());
        nlohmann::json rec;
        rec_in >> rec;
        CHECK(rec["converged"].get<bool>());

        std::ifstream csv_in(csv_path);
        REQUIRE(csv_in.good());
        std::string header;
        std::getline(csv_in, header);
        CHECK(header == "time,q1,q2,r,E");
        std::string first_row;
        CHECK(std::getline(csv_in, first_row));
    }

    SUBCASE("input errors exit 1") {
        CliOptions opts;
        opts.document_path = "/no/such/mindist_document.json";
        std::ostringstream out, err;
        CHECK(run_solve(opts, out, err) == 1);
        CHECK(err.str().find("error") != std::string::npos);

        const auto bad = tmp_file("bad.json", "{ \"surface_a\": ");
        opts.document_path = bad.string();
        std::ostringstream out2, err2;
        CHECK(run_solve(opts, out2, err2) == 1);

        opts.document_path = doc_path.string();
        opts.out_path = "/no/such/dir/mindist_out.json";
        std::ostringstream out3, err3;
        CHECK(run_solve(opts, out3, err3) == 1);
    }
}

TEST_CASE("run_oracle reports grid minima, caps, and comparisons") {
    const auto doc_path = tmp_file("circles_oracle.json", circles_doc());

    SUBCASE("plain oracle run") {
        CliOptions opts;
        opts.document_path = doc_path.string();
        opts.samples = 360;
        std::ostringstream out, err;
        CHECK(run_oracle(opts, out, err) == 0);
        auto rec = nlohmann::json::parse(out.str());
        CHECK(rec["distance"].get<double>() >= 2.0 - 1e-12);
        CHECK(rec["distance"].get<double>() == doctest::Approx(2.0).epsilon(1e-4));
        CHECK(rec["pairs"].get<double>() == 360.0 * 360.0);
        CHECK(rec["resolution_bound"].get<double>() > 0.0);
        CHECK(rec["argmin_a"].size() == 1);
    }

    SUBCASE("grids beyond the evaluation cap exit 1 before evaluating") {
        CliOptions opts;
        opts.document_path = doc_path.string();
        opts.samples = 100000;
        std::ostringstream out, err;
        CHECK(run_oracle(opts, out, err) == 1);
        CHECK(err.str().find("cap") != std::string::npos);
    }

    SUBCASE("--compare nests both records and the agreement gap") {
        CliOptions opts;
        opts.document_path = doc_path.string();
        opts.samples = 360;
        opts.compare = true;
        std::ostringstream out, err;
        CHECK(run_oracle(opts, out, err) == 0);
        auto rec = nlohmann::json::parse(out.str());
        CHECK(rec["solver"]["converged"].get<bool>());
        CHECK(rec["oracle"]["distance"].get<double>() >= 2.0 - 1e-12);
        CHECK(rec["agreement_gap"].get<double>() <=
              rec["oracle"]["resolution_bound"].get<double>());
        CHECK(rec["within_resolution_bound"].get<bool>());
    }

    SUBCASE("--compare with an unconverged solver exits 2") {
        CliOptions opts;
        opts.document_path = doc_path.string();
        opts.samples = 64;
        opts.compare = true;
        opts.max_steps = 10;
        std::ostringstream out, err;
        CHECK(run_oracle(opts, out, err) == 2);
        auto rec = nlohmann::json::parse(out.str());
        CHECK_FALSE(rec["solver"]["converged"].get<bool>());
    }
}
