#!/usr/bin/env python3
"""Regenerates the scenario fixtures under scenarios/.

Deterministic by construction: a small LCG drives the random instances, so
re-running the script reproduces the shipped files byte for byte.

The alcove and at-goal layouts are reconstructions: they are built to show
the qualitative behavior (ducking into a pocket, leaving a goal temporarily),
not to copy any particular published geometry.
"""
import math
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "scenarios")

TYPES = ["unicycle1", "unicycle2", "double_integrator2", "car_with_trailer"]


def state(rtype, x, y, theta):
    if rtype == "unicycle1":
        return [x, y, theta]
    if rtype == "unicycle2":
        return [x, y, theta, 0.0, 0.0]
    if rtype == "double_integrator2":
        return [x, y, 0.0, 0.0]
    if rtype == "car_with_trailer":
        return [x, y, theta, theta]
    raise ValueError(rtype)


def default_shape(rtype):
    if rtype == "double_integrator2":
        return {"disk": 0.2}
    return {"box": [0.5, 0.25]}


def fmt_list(values):
    return "[" + ", ".join(f"{v:.12g}" for v in values) + "]"


def write_scene(name, env_min, env_max, obstacles, robots):
    lines = [f"name: {name}", "environment:"]
    lines.append(f"  min: {fmt_list(env_min)}")
    lines.append(f"  max: {fmt_list(env_max)}")
    if obstacles:
        lines.append("  obstacles:")
        for (cx, cy, sx, sy) in obstacles:
            lines.append(
                f"    - {{type: box, center: {fmt_list([cx, cy])}, size: {fmt_list([sx, sy])}}}")
    else:
        lines.append("  obstacles: []")
    lines.append("robots:")
    for (rtype, sh, start, goal) in robots:
        if "disk" in sh:
            shs = f"{{disk: {sh['disk']}}}"
        else:
            shs = f"{{box: {fmt_list(sh['box'])}}}"
        lines.append(f"  - type: {rtype}")
        lines.append(f"    shape: {shs}")
        lines.append(f"    start: {fmt_list(start)}")
        lines.append(f"    goal: {fmt_list(goal)}")
    path = os.path.join(OUT, name + ".yaml")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    print("wrote", path)


def swap(rtype, n):
    # robots evenly spaced on a circle, each swapping with its antipode
    margin = 1.2 if rtype == "car_with_trailer" else 0.7
    radius = 1.3
    if n == 2:
        cx, cy = radius + margin, 1.0
        env = ([0.0, 0.0], [2 * (radius + margin), 2.0])
    else:
        cx = cy = radius + margin
        env = ([0.0, 0.0], [2 * (radius + margin), 2 * (radius + margin)])
    robots = []
    for i in range(n):
        phi = 2.0 * math.pi * i / n
        sx, sy = cx + radius * math.cos(phi), cy + radius * math.sin(phi)
        gx, gy = cx - radius * math.cos(phi), cy - radius * math.sin(phi)
        heading = math.atan2(gy - sy, gx - sx)
        robots.append((rtype, default_shape(rtype), state(rtype, sx, sy, heading),
                       state(rtype, gx, gy, heading)))
    write_scene(f"swap{n}_{rtype}", env[0], env[1], [], robots)


def alcove():
    # a corridor too narrow to pass in, with one pocket to duck into
    obstacles = [
        (2.0, 0.4, 4.0, 0.8),    # below the corridor
        (0.85, 1.65, 1.7, 0.7),  # above, left of the pocket
        (3.15, 1.65, 1.7, 0.7),  # above, right of the pocket
    ]
    disk = {"disk": 0.2}
    robots = [
        ("unicycle1", disk, [0.4, 1.05, 0.0], [3.6, 1.05, 0.0]),
        ("unicycle1", disk, [3.6, 1.05, math.pi], [0.4, 1.05, math.pi]),
    ]
    write_scene("alcove", [0.0, 0.0], [4.0, 2.0], obstacles, robots)


def at_goal():
    # single-lane corridor with a pocket; robot 2 already sits at its goal
    # right at the pocket mouth and must duck inside to let robot 1 pass
    obstacles = [
        (2.0, 0.325, 4.0, 0.65),  # below the corridor
        (0.8, 1.675, 1.6, 0.65),  # above, left of the pocket
        (3.2, 1.675, 1.6, 0.65),  # above, right of the pocket
    ]
    disk = {"disk": 0.2}
    robots = [
        ("double_integrator2", disk, state("double_integrator2", 0.4, 1.0, 0),
         state("double_integrator2", 3.6, 1.0, 0)),
        ("double_integrator2", disk, state("double_integrator2", 2.0, 1.1, 0),
         state("double_integrator2", 2.0, 1.1, 0)),
    ]
    write_scene("at_goal", [0.0, 0.0], [4.0, 2.0], obstacles, robots)


class Lcg:
    def __init__(self, seed):
        self.s = seed & 0xFFFFFFFFFFFFFFFF

    def next(self):
        self.s = (6364136223846793005 * self.s + 1442695040888963407) % 2**64
        return self.s >> 11

    def uniform(self, lo, hi):
        return lo + (hi - lo) * (self.next() / 2**53)


def random_instance(name, n, types, seed):
    rng = Lcg(seed)
    env = ([0.0, 0.0], [6.0, 6.0])
    obstacles = [(1.8, 1.8, 0.6, 0.6), (4.2, 4.2, 0.6, 0.6)]

    keepout = 1.3 if n <= 4 else 0.95
    separation = 1.6 if n <= 4 else 1.25

    def sample_points():
        pts = []
        attempts = 0
        while len(pts) < n:
            attempts += 1
            if attempts > 100000:
                raise RuntimeError("sampling failed")
            x, y = rng.uniform(0.8, 5.2), rng.uniform(0.8, 5.2)
            if any(abs(x - ox) < keepout and abs(y - oy) < keepout
                   for (ox, oy, _, _) in obstacles):
                continue
            if any((x - px) ** 2 + (y - py) ** 2 < separation ** 2 for (px, py) in pts):
                continue
            pts.append((x, y))
        return pts

    starts = sample_points()
    goals = sample_points()
    robots = []
    for i in range(n):
        rtype = types[i % len(types)]
        sx, sy = starts[i]
        gx, gy = goals[i]
        heading = math.atan2(gy - sy, gx - sx)
        robots.append((rtype, default_shape(rtype),
                       state(rtype, sx, sy, heading),
                       state(rtype, gx, gy, heading)))
    write_scene(name, env[0], env[1], obstacles, robots)


def main():
    os.makedirs(OUT, exist_ok=True)
    for rtype in TYPES:
        for n in (2, 3, 4):
            swap(rtype, n)
    alcove()
    at_goal()
    for n in (2, 4, 8):
        random_instance(f"rand_{n}", n, ["unicycle1"], seed=1000 + n)
        random_instance(f"rand_hetero_{n}", n, TYPES, seed=2000 + n)


if __name__ == "__main__":
    main()
