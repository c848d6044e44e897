# SPDX-License-Identifier: Apache-2.0
# Regenerates the bundled scenario files. Edit the layouts here, not the JSON.
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))


def blank(nx, ny):
    return [["." for _ in range(nx)] for _ in range(ny)]


def ring(grid):
    ny, nx = len(grid), len(grid[0])
    for ix in range(nx):
        grid[0][ix] = "#"
        grid[ny - 1][ix] = "#"
    for iy in range(ny):
        grid[iy][0] = "#"
        grid[iy][nx - 1] = "#"


def fill(grid, x0, x1, y0, y1, res, ch="#"):
    """Occupy meters [x0,x1) x [y0,y1)."""
    for iy in range(int(y0 / res), int(y1 / res)):
        for ix in range(int(x0 / res), int(x1 / res)):
            grid[iy][ix] = ch


def rows(grid):
    return ["".join(r) for r in grid]


def warehouse():
    res = 0.2
    nx = ny = 200  # 40 x 40 m
    g = blank(nx, ny)
    ring(g)
    # Two pairs of shelf rows with a 6 m corridor gap in the middle.
    for x0 in (10.0, 24.0):
        fill(g, x0, x0 + 1.0, 2.0, 17.0, res)
        fill(g, x0, x0 + 1.0, 23.0, 38.0, res)
    return {
        "name": "warehouse_2p5d",
        "mode": "2.5d",
        "resolution": res,
        "layer_spacing": 1.0,
        "layers": [rows(g)],
        "start": {"position": [5.0, 20.0, 0.5], "yaw_deg": 0.0},
        "goal": [15.0, 20.0, 0.5],
        "goal_description": "the marked pallet between the two shelf rows, "
        "reached through the corridor gap ahead",
        "guidelines": "Stay inside the aisles; shelves are solid. Prefer "
        "anchors that keep a clear line toward the pallet.",
        "optimal_path_length": 10.0,
        "horizon": 5,
        "seed": 7,
    }


def tower():
    res = 0.2
    nx, ny = 120, 50  # 24 x 10 m loft hall, two layers
    g0 = blank(nx, ny)
    ring(g0)
    # Platform block filling the whole east end: the hall dead-ends at its
    # face, so the only route is over the top.
    fill(g0, 13.4, 23.8, 0.2, 9.8, res)
    g1 = blank(nx, ny)
    ring(g1)
    # Ceiling slab over the western hall; the strip x in (12, 13.4) before
    # the platform face is the only climb zone, the top (x >= 13.4) is open.
    fill(g1, 0.0, 12.0, 0.0, 10.0, res)
    return {
        "name": "tower_3d",
        "mode": "3d",
        "resolution": res,
        "layer_spacing": 1.0,
        "layers": [rows(g0), rows(g1)],
        "start": {"position": [3.0, 5.0, 0.5], "yaw_deg": 0.0},
        "goal": [19.0, 5.0, 1.5],
        "goal_description": "the beacon on top of the platform that blocks "
        "the east end of the hall; it is only reachable over the top",
        "guidelines": "The entrance hall has a low ceiling; climb in the "
        "open strip before the platform face, then approach over its top.",
        "optimal_path_length": 14.0,
        "horizon": 15,
        "seed": 11,
    }


for scenario in (warehouse(), tower()):
    path = os.path.join(HERE, scenario["name"] + ".json")
    with open(path, "w") as f:
        json.dump(scenario, f, indent=1)
        f.write("\n")
    print("wrote", path)
