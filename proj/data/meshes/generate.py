"""Generates the benchmark meshes (.geo sources and MSH 2.2 files) with gmsh.

Coordinates are in nanometers; physical surface 1 is free space, 2 the scatterer.
Size-field parameters are tuned by bisection towards target node counts, then
frozen into the written .geo so `gmsh -2 file.geo` reproduces each mesh.
"""

import math
import pathlib
import sys

import gmsh

HERE = pathlib.Path(__file__).resolve().parent


def wire_geo(r, big_r, n_surf, n_outer, h_center, growth, plateau=False):
    hs = 2 * math.pi * r / n_surf
    ho = 2 * math.pi * big_r / n_outer
    return f"""// Single cylinder of radius {r} nm inside a circular absorbing boundary of radius {big_r} nm.
SetFactory("Built-in");
r = {r};
R = {big_r};
Point(1) = {{0, 0, 0}};
Point(2) = {{r, 0, 0}};
Point(3) = {{0, r, 0}};
Point(4) = {{-r, 0, 0}};
Point(5) = {{0, -r, 0}};
Point(6) = {{R, 0, 0}};
Point(7) = {{0, R, 0}};
Point(8) = {{-R, 0, 0}};
Point(9) = {{0, -R, 0}};
Circle(1) = {{2, 1, 3}};
Circle(2) = {{3, 1, 4}};
Circle(3) = {{4, 1, 5}};
Circle(4) = {{5, 1, 2}};
Circle(5) = {{6, 1, 7}};
Circle(6) = {{7, 1, 8}};
Circle(7) = {{8, 1, 9}};
Circle(8) = {{9, 1, 6}};
Curve Loop(1) = {{1, 2, 3, 4}};
Curve Loop(2) = {{5, 6, 7, 8}};
Plane Surface(1) = {{1}};
Plane Surface(2) = {{2, 1}};
Transfinite Curve{{1, 2, 3, 4}} = {n_surf // 4 + 1};
Transfinite Curve{{5, 6, 7, 8}} = {n_outer // 4 + 1};
Physical Surface(1) = {{2}};
Physical Surface(2) = {{1}};
Physical Curve(3) = {{1, 2, 3, 4}};
Field[1] = MathEval;
Field[1].F = "{size_formula(r, big_r, hs, ho, h_center, growth, plateau=plateau)}";
Background Field = 1;
Mesh.MeshSizeExtendFromBoundary = 0;
Mesh.MeshSizeFromPoints = 0;
Mesh.MeshSizeFromCurvature = 0;
Mesh.Algorithm = 6;
Mesh.RandomSeed = 1;
Mesh.MshFileVersion = 2.2;
"""


def fmin(a, b):
    return f"(({a})+({b})-Abs(({a})-({b})))/2"


def size_formula(r, big_r, hs, ho, h_center, growth, d="Sqrt(x^2+y^2)", plateau=False):
    # The parser has no conditionals: the inner profile is frozen at hs outside the
    # wire and the outer profile at hs inside it. The plateau profile grows from hs
    # with slope 3/2 up to a uniform interior size h_center; the linear profile
    # reaches h_center only at the center.
    m = fmin(d, r)
    e = f"(({d})-{r}+Abs(({d})-{r}))/2"
    if plateau:
        inside = fmin(h_center, f"({hs})+1.5*({r}-({m}))")
    else:
        inside = f"({h_center})+(({hs})-({h_center}))*(({m})/{r})"
    outside = f"({3 * ho}-({hs}))*(({e})/({big_r}-{r}))^{growth}"
    return f"{inside}+{outside}"


def dimer_geo(r, gap, big_r, n_surf, n_outer, h_center, growth, h_gap):
    hs = 2 * math.pi * r / n_surf
    ho = 2 * math.pi * big_r / n_outer
    cx = r + gap / 2
    # Distance to the nearer wire center; sizes grow away from the wires and are
    # capped near the gap.
    d = f"Sqrt((Abs(x)-{cx})^2+y^2)"
    formula = fmin(size_formula(r, big_r, hs, ho, h_center, growth, d), f"{h_gap}+Sqrt(x^2+y^2)/4")
    return f"""// Two cylinders of radius {r} nm separated by a {gap} nm gap along x, inside a
// circular absorbing boundary of radius {big_r} nm.
SetFactory("Built-in");
r = {r};
cx = {cx};
R = {big_r};
Point(1) = {{cx, 0, 0}};
Point(2) = {{cx + r, 0, 0}};
Point(3) = {{cx, r, 0}};
Point(4) = {{cx - r, 0, 0}};
Point(5) = {{cx, -r, 0}};
Point(11) = {{-cx, 0, 0}};
Point(12) = {{-cx + r, 0, 0}};
Point(13) = {{-cx, r, 0}};
Point(14) = {{-cx - r, 0, 0}};
Point(15) = {{-cx, -r, 0}};
Point(20) = {{0, 0, 0}};
Point(21) = {{R, 0, 0}};
Point(22) = {{0, R, 0}};
Point(23) = {{-R, 0, 0}};
Point(24) = {{0, -R, 0}};
Circle(1) = {{2, 1, 3}};
Circle(2) = {{3, 1, 4}};
Circle(3) = {{4, 1, 5}};
Circle(4) = {{5, 1, 2}};
Circle(11) = {{12, 11, 13}};
Circle(12) = {{13, 11, 14}};
Circle(13) = {{14, 11, 15}};
Circle(14) = {{15, 11, 12}};
Circle(21) = {{21, 20, 22}};
Circle(22) = {{22, 20, 23}};
Circle(23) = {{23, 20, 24}};
Circle(24) = {{24, 20, 21}};
Curve Loop(1) = {{1, 2, 3, 4}};
Curve Loop(2) = {{11, 12, 13, 14}};
Curve Loop(3) = {{21, 22, 23, 24}};
Plane Surface(1) = {{1}};
Plane Surface(2) = {{2}};
Plane Surface(3) = {{3, 1, 2}};
Transfinite Curve{{1, 2, 3, 4, 11, 12, 13, 14}} = {n_surf // 4 + 1};
Transfinite Curve{{21, 22, 23, 24}} = {n_outer // 4 + 1};
Physical Surface(1) = {{3}};
Physical Surface(2) = {{1, 2}};
Physical Curve(3) = {{1, 2, 3, 4, 11, 12, 13, 14}};
Field[1] = MathEval;
Field[1].F = "{formula}";
Background Field = 1;
Mesh.MeshSizeExtendFromBoundary = 0;
Mesh.MeshSizeFromPoints = 0;
Mesh.MeshSizeFromCurvature = 0;
Mesh.Algorithm = 6;
Mesh.RandomSeed = 1;
Mesh.MshFileVersion = 2.2;
"""


def mesh_counts(geo_text, msh_path=None):
    path = HERE / "_tmp.geo"
    path.write_text(geo_text)
    gmsh.initialize()
    gmsh.option.setNumber("General.Verbosity", 0)
    gmsh.open(str(path))
    gmsh.model.mesh.generate(2)
    counts = {}
    for dim, tag in gmsh.model.getEntities(2):
        types, elems, _ = gmsh.model.mesh.getElements(dim, tag)
        counts[tag] = sum(len(e) for e in elems)
    nodes = len(gmsh.model.mesh.getNodes()[0])
    if msh_path is not None:
        gmsh.write(str(msh_path))
    gmsh.finalize()
    path.unlink()
    return nodes, counts


def bisect(fn, lo, hi, target, steps=24):
    """Finds x in [lo, hi] with fn(x) == target, assuming fn decreasing in x."""
    best = None
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        v = fn(mid)
        if best is None or abs(v - target) < abs(best[1] - target):
            best = (mid, v)
        if v == target:
            return mid, v
        if v > target:
            lo = mid
        else:
            hi = mid
    return best


def refine(fn, x, target, tries=300, step=1e-3):
    """Perturbs x around a bisection result until fn(x) hits target exactly."""
    best = (x, fn(x))
    for k in range(1, tries):
        if best[1] == target:
            break
        y = x * (1 + step * ((k + 1) // 2) * (-1) ** k)
        v = fn(y)
        if abs(v - target) < abs(best[1] - target):
            best = (y, v)
    return best


def write(name, geo_text):
    (HERE / f"{name}.geo").write_text(geo_text)
    nodes, counts = mesh_counts(geo_text, HERE / f"{name}.msh")
    print(name, "nodes", nodes, "triangles per surface", counts)


def tune_wire(name, r, big_r, n_surf, n_outer, inner_tris, outer_tris):
    hs = 2 * math.pi * r / n_surf
    inner = lambda h: mesh_counts(wire_geo(r, big_r, n_surf, n_outer, round(h, 6), 1.0, True))[1][1]
    hc, _ = bisect(inner, hs, 15 * hs, inner_tris)
    hc, _ = refine(inner, hc, inner_tris)
    hc = round(hc, 6)
    outer = lambda g: mesh_counts(wire_geo(r, big_r, n_surf, n_outer, hc, round(g, 6), True))[1][2]
    g, _ = bisect(lambda g: -outer(g), 0.05, 3.0, -outer_tris)
    g, _ = refine(outer, g, outer_tris)
    write(name, wire_geo(r, big_r, n_surf, n_outer, hc, round(g, 6), True))


def tune_dimer(name, r, gap, big_r, n_surf, n_outer, inner_tris, outer_tris):
    hs = 2 * math.pi * r / n_surf
    h_gap = gap / 3
    inner = lambda h: mesh_counts(dimer_geo(r, gap, big_r, n_surf, n_outer, round(h, 6), 1.0, h_gap))[1][1]
    hc, _ = bisect(inner, hs, 15 * hs, inner_tris // 2)
    hc, _ = refine(inner, hc, inner_tris // 2)
    hc = round(hc, 6)
    outer = lambda g: mesh_counts(dimer_geo(r, gap, big_r, n_surf, n_outer, hc, round(g, 6), h_gap))[1][3]
    g, _ = bisect(lambda g: -outer(g), 0.05, 3.0, -outer_tris)
    g, _ = refine(outer, g, outer_tris)
    write(name, dimer_geo(r, gap, big_r, n_surf, n_outer, hc, round(g, 6), h_gap))


if __name__ == "__main__":
    which = sys.argv[1:] or ["nanowire", "nanowire_fine", "dimer", "freespace"]
    if "nanowire" in which:
        # 8768 triangles (524 inside), 128 surface and 256 outer boundary segments.
        tune_wire("nanowire", 2.0, 100.0, 128, 256, 524, 8244)
    if "nanowire_fine" in which:
        # Halved surface spacing and a four times denser wire interior.
        tune_wire("nanowire_fine", 2.0, 100.0, 256, 256, 2096, 12000)
    if "dimer" in which:
        tune_dimer("dimer", 30.0, 3.0, 400.0, 160, 136, 2 * 1184, 9152)
    if "freespace" in which:
        geo = wire_geo(2.0, 100.0, 128, 256, 0.3, 1.0)
        geo = geo.replace("Physical Surface(2) = {1};", "Physical Surface(1) += {1};")
        geo = geo.replace("Physical Curve(3) = {1, 2, 3, 4};\n", "")
        geo = geo.replace("// Single cylinder", "// Free-space disk (the inner circle is filled with vacuum); single cylinder")
        write("freespace", geo)
