#!/usr/bin/env python3
"""Regenerates the CLI golden fixtures from first principles.

Independent of the Rust code: back-projection is evaluated straight from the
pinhole model, the metric report straight from the threshold definitions.
Floating-point operations are written in the same order as the definitions
(left-to-right sums, no fused operations), so results are bit-reproducible.

Run from this directory:  python3 make_golden.py
"""

import json
import math
import random
import struct
from decimal import Decimal

# ---- number formatting -----------------------------------------------------


def plain(x):
    """Shortest round-trip decimal without exponent ("5", "0.25", "-0")."""
    if x == 0.0:
        return "-0" if math.copysign(1.0, x) < 0 else "0"
    s = format(Decimal(repr(x)), "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return s


def json_number(x):
    if x == int(x):
        return str(int(x))
    r = repr(x)
    assert "e" not in r and abs(x) >= 1e-4, r
    return r


# ---- back-projection ---------------------------------------------------------

DEPTH_K = dict(fu=2.5, fv=3.0, cu=1.5, cv=1.25)

DEPTH_4X4 = [
    [1.0, 2.5, float("nan"), 4.75],
    [0.1, 0.0, 3.3, 10.0],
    [-1.0, 7.125, 0.5, float("nan")],
    [12.0, 0.3, 2.0, 1e-3],
]


def write_depth(path, rows):
    h, w = len(rows), len(rows[0])
    with open(path, "wb") as f:
        f.write(b"PLFD1\n%d %d\n" % (w, h))
        for row in rows:
            for z in row:
                f.write(struct.pack("<f", z))


def read_depth_f32(rows):
    # Values as the tool sees them after the float32 round trip.
    return [[struct.unpack("<f", struct.pack("<f", z))[0] for z in row] for row in rows]


def backproject(rows, k):
    out = []
    for v, row in enumerate(rows):
        for u, z in enumerate(row):
            if not (math.isfinite(z) and z > 0.0):
                continue
            x = z * (u - k["cu"]) / k["fu"]
            y = z * (v - k["cv"]) / k["fv"]
            out.append((x, y, z))
    return out


# ---- scene-flow metrics ------------------------------------------------------

FLOW_K = dict(fu=721.5, fv=721.5, cu=609.5, cv=172.8)

STANDARDS = {
    # abs / rel pairs: Acc3DS, Acc3DR, Outliers3D, Acc2D
    "image-based": (0.3, 0.1, 0.4, 0.2, 0.5, 0.3, 20.0, 0.2),
    "lidar-based": (0.05, 0.05, 0.1, 0.1, 0.3, 0.1, 3.0, 0.05),
}


def project(p, k):
    return (k["fu"] * p[0] / p[2] + k["cu"], k["fv"] * p[1] / p[2] + k["cv"])


def norm3(a):
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def metrics(points, est, gt, k, t):
    n = len(points)
    epe3d_sum = 0.0
    epe2d_sum = 0.0
    acc3ds = acc3dr = outliers = acc2d = 0
    for p, e, g in zip(points, est, gt):
        epe3d = norm3((e[0] - g[0], e[1] - g[1], e[2] - g[2]))
        gn = norm3(g)
        rel3d = epe3d / gn if gn > 0.0 else None
        base = project(p, k)
        pe = project((p[0] + e[0], p[1] + e[1], p[2] + e[2]), k)
        pg = project((p[0] + g[0], p[1] + g[1], p[2] + g[2]), k)
        fe = (pe[0] - base[0], pe[1] - base[1])
        fg = (pg[0] - base[0], pg[1] - base[1])
        du, dv = fe[0] - fg[0], fe[1] - fg[1]
        epe2d = math.sqrt(du * du + dv * dv)
        fgn = math.sqrt(fg[0] * fg[0] + fg[1] * fg[1])
        rel2d = epe2d / fgn if fgn > 0.0 else None

        def lt(err, rel, a, r):
            return err < a or (rel is not None and rel < r)

        def gt_(err, rel, a, r):
            return err > a or (rel is not None and rel > r)

        epe3d_sum += epe3d
        epe2d_sum += epe2d
        acc3ds += lt(epe3d, rel3d, t[0], t[1])
        acc3dr += lt(epe3d, rel3d, t[2], t[3])
        outliers += gt_(epe3d, rel3d, t[4], t[5])
        acc2d += lt(epe2d, rel2d, t[6], t[7])
    return [
        ("epe3d_mean", epe3d_sum / n),
        ("acc3ds", acc3ds / n),
        ("acc3dr", acc3dr / n),
        ("outlier3d", outliers / n),
        ("epe2d_mean", epe2d_sum / n),
        ("acc2d", acc2d / n),
    ]


def flow_fixture():
    rng = random.Random(20240607)

    def r(lo, hi, digits=4):
        return round(rng.uniform(lo, hi), digits)

    points, gt, est = [], [], []
    for i in range(40):
        p = (r(-8, 8), r(-3, 3), r(5, 30))
        g = (0.0, 0.0, 0.0) if i % 13 == 0 else (r(-1, 1), r(-0.5, 0.5), r(-1.5, 1.5))
        scale = [0.0, 0.02, 0.1, 0.25, 0.45, 0.8][i % 6]
        e = tuple(round(gc + scale * rng.uniform(-1, 1), 4) for gc in g)
        points.append(p)
        gt.append(g)
        est.append(e)
    # Exact-threshold point: EPE 0.3 m with relative error 0.1, not in Acc3DS.
    g = 2.9999999999999996
    points.append((1.0, -0.5, 15.0))
    gt.append((0.0, 0.0, g))
    est.append((0.3, 0.0, g))
    return points, gt, est


def main():
    depth = DEPTH_4X4
    write_depth("depth_4x4.plfd", depth)
    pts = backproject(read_depth_f32(depth), DEPTH_K)
    with open("depth_4x4.cloud.golden", "w") as f:
        for p in pts:
            f.write(" ".join(plain(c) for c in p) + "\n")

    points, gt, est = flow_fixture()
    with open("flow_gt.txt", "w") as f:
        f.write("# x y z dx dy dz\n")
        for p, g in zip(points, gt):
            f.write(" ".join(repr(c) for c in p + g) + "\n")
    with open("flow_est.txt", "w") as f:
        f.write("# dx dy dz\n")
        for e in est:
            f.write(" ".join(repr(c) for c in e) + "\n")

    for name, t in STANDARDS.items():
        fields = metrics(points, est, gt, FLOW_K, t)
        body = ",".join('"%s":%s' % (key, json_number(v)) for key, v in fields)
        doc = "{%s,\"standard\":%s}\n" % (body, json.dumps(name))
        with open("eval_flow.%s.golden.json" % name, "w") as f:
            f.write(doc)


if __name__ == "__main__":
    main()
