#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "maxlow/mesh.hpp"

using namespace maxlow;

TEST_CASE("mesh text round trip is exact") {
    Triangulation m = scaled(generate_lshape(2), 1.0 / 3.0);
    std::string text = format_mesh(m);
    CHECK(text.rfind("mesh2d v1\n", 0) == 0);
    Triangulation r = parse_mesh(text);
    REQUIRE(r.num_vertices() == m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) CHECK(r.vertices[v] == m.vertices[v]);
    CHECK(r.triangles == m.triangles);
    CHECK(format_mesh(r) == text);
}

TEST_CASE("file round trip") {
    Triangulation m = generate_square(2);
    const std::string path = "mesh_io_roundtrip.m2d";
    write_mesh(m, path);
    Triangulation r = read_mesh(path);
    CHECK(r.triangles == m.triangles);
    std::remove(path.c_str());
    CHECK_THROWS_WITH_AS(read_mesh("does/not/exist.m2d"), doctest::Contains("cannot open"), MeshError);
}

TEST_CASE("blank lines are skipped and edge count zero means derive") {
    Triangulation r = parse_mesh("mesh2d v1\n\n4 0 2\n0 0\n1 0\n\n0 1\n1 1\n0 1 3\n0 3 2\n\n");
    CHECK(r.num_edges() == 5);
    CHECK_NOTHROW(parse_mesh("mesh2d v1\n4 5 2\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 3 2\n"));
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_mesh(""), doctest::Contains("empty file"), MeshError);
    CHECK_THROWS_WITH_AS(parse_mesh("mesh3d v1\n"), doctest::Contains("line 1: expected header"), MeshError);
    CHECK_THROWS_WITH_AS(parse_mesh("mesh2d v1\n4 0\n"), doctest::Contains("line 2"), MeshError);
    CHECK_THROWS_WITH_AS(parse_mesh("mesh2d v1\n4 0 2\n0 0\n1 0\n0 x\n1 1\n0 1 3\n0 3 2\n"),
                         doctest::Contains("line 5"), MeshError);
    CHECK_THROWS_WITH_AS(parse_mesh("mesh2d v1\n4 0 2\n0 0\n1 0 9\n0 1\n1 1\n0 1 3\n0 3 2\n"),
                         doctest::Contains("line 4: trailing content"), MeshError);
    CHECK_THROWS_WITH_AS(parse_mesh("mesh2d v1\n4 0 2\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 3 9\n"),
                         doctest::Contains("line 8: triangle references missing vertex 9"), MeshError);
    CHECK_THROWS_WITH_AS(parse_mesh("mesh2d v1\n4 0 2\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 2 3\n"),
                         doctest::Contains("line 8"), MeshError);
    CHECK_THROWS_WITH_AS(parse_mesh("mesh2d v1\n4 7 2\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 3 2\n"),
                         doctest::Contains("line 2: edge count 7"), MeshError);
    CHECK_THROWS_WITH_AS(parse_mesh("mesh2d v1\n4 0 2\n0 0\n1 0\n0 1\n1 1\n0 1 3\n"), doctest::Contains("missing triangle"),
                         MeshError);
    CHECK_THROWS_WITH_AS(parse_mesh("mesh2d v1\n4 0 2\n0 0\n1 0\n0 1\n1 1\n0 1 3\n0 3 2\n5 5 5\n"),
                         doctest::Contains("line 9: unexpected content"), MeshError);
}

TEST_CASE("shipped unstructured sample mesh is valid") {
    Triangulation m = read_mesh(MAXLOW_DATA_DIR "/meshes/sample_unstructured.m2d");
    CHECK(validate(m).empty());
    CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.num_triangles() > 50);
}
