"""Deterministic scene-text builders for the test experiments."""

import math

import numpy as np


def wall_scene(wall_x=10.0, wall_w=200.0, wall_h=60.0, frames=5, dt=0.1,
               start=(0.0, 0.0, 0.0), end=None, yaw=0.0,
               azimuth_steps=900, sensors_extra="", with_ground=False):
    """A single wall perpendicular to +x, centered on the origin.

    After the 90-degree pitch the plane's first extent becomes vertical,
    so the wall spans y in [-wall_w/2, wall_w/2] and z in
    [-wall_h/2, wall_h/2].
    """
    end = end or start
    ground = ""
    if with_ground:
        ground = ("[object ground]\nclass ground\nmaterial tar\n"
                  "plane 400 400\nposition 0 0 0\n\n")
    return f"""
[material plaster]
reflectivity 0.6
rgb 200 200 200

[material tar]
reflectivity 0.2
rgb 70 70 70

{ground}[object wall]
class building
material plaster
plane {wall_h} {wall_w}
position {wall_x} 0 0
rotation_deg 0 90 0

[trajectory]
frames {frames}
dt {dt}
waypoint {start[0]} {start[1]} {start[2]}  0 0 {yaw}
waypoint {end[0]} {end[1]} {end[2]}  0 0 {yaw}

[sensor lidar3d]
preset vlp16
azimuth_steps {azimuth_steps}
mount 0 0 1.8  0 0 0
{sensors_extra}
"""


def side_wall_scene(wall_y=10.0, frames=20, dt=0.1, x0=-5.0, x1=4.5,
                    azimuth_steps=900):
    """Wall parallel to the direction of travel (vertical plane y = wall_y)."""
    return f"""
[material plaster]
reflectivity 0.6
rgb 200 200 200

[object wall]
class building
material plaster
plane 120 40
position 0 {wall_y} 0
rotation_deg 90 0 0

[trajectory]
frames {frames}
dt {dt}
waypoint {x0} 0 0  0 0 0
waypoint {x1} 0 0  0 0 0

[sensor lidar3d]
preset vlp16
azimuth_steps {azimuth_steps}
mount 0 0 1.8  0 0 0
"""


def defense_scene(frames=10, azimuth_steps=900, range_sigma=0.0,
                  wall_x=14.0, x0=-2.0, x1=2.0):
    """Ground + tall wide wall filling a 90-degree camera frustum."""
    return f"""
[material plaster]
reflectivity 0.6
rgb 200 200 200

[material tar]
reflectivity 0.2
rgb 70 70 70

[object ground]
class ground
material tar
plane 400 400
position 0 0 0

[object wall]
class building
material plaster
box 0.5 60 16
position {wall_x} 0 8

[trajectory]
frames {frames}
dt 0.1
waypoint {x0} 0 0  0 0 0
waypoint {x1} 0 0  0 0 0

[sensor lidar3d]
preset vlp16
azimuth_steps {azimuth_steps}
range_sigma {range_sigma}
mount 0 0 1.8  0 0 0

[sensor camera]
width 320
height 240
fx 160
fy 160
cx 160
cy 120
max_depth 60
mount 2.0 0 0.5  -1.5707963267948966 0 -1.5707963267948966
"""


def retreat_scene(frames=12, azimuth_steps=720):
    """Vehicle backing away from a wall; used for replay-attack detection."""
    return f"""
[material plaster]
reflectivity 0.6
rgb 200 200 200

[material tar]
reflectivity 0.2
rgb 70 70 70

[object ground]
class ground
material tar
plane 400 400
position 0 0 0

[object wall]
class building
material plaster
box 0.5 60 16
position 18 0 8

[trajectory]
frames {frames}
dt 0.1
waypoint 6 0 0  0 0 0
waypoint -6 0 0  0 0 0

[sensor lidar3d]
preset vlp16
azimuth_steps {azimuth_steps}
mount 0 0 1.8  0 0 0

[sensor camera]
width 320
height 240
fx 160
fy 160
cx 160
cy 120
max_depth 60
mount 2.0 0 0.5  -1.5707963267948966 0 -1.5707963267948966
"""


INJECT_RECIPE = """
[attack inject]
frames 0..{last}
point_count {count}
template car_silhouette
position 8 0 1.2
extent 4 1.8 1.5
seed 7
"""


def vo_arc_scene(frames=30, supersample=2, seed=13):
    """Textured arena around a constant-turn arc (0.5 m chords, 2 deg/frame).

    Texture is an aperiodic mosaic of grayscale patches with well-spread
    lumas: periodic grids alias under inter-frame flow and a single
    dominant plane degrades the essential-matrix conditioning, so patches
    are scattered over ground, near-field panels facing the path, and a
    backing ring of walls.
    """
    rng = np.random.default_rng(seed)
    L = []
    n_mat = 24
    levels = np.linspace(20, 235, n_mat).astype(int)
    for i, lv in enumerate(levels):
        L.append(f"[material m{i}]\nreflectivity 0.6\nrgb {lv} {lv} {lv}\n")
    L.append("[material base]\nreflectivity 0.3\nrgb 128 128 128\n")
    L.append("[object base_ground]\nclass ground\nmaterial base\n"
             "plane 300 300\nposition 10 6 0\n")

    radius = 0.5 / (2 * math.sin(math.radians(1)))
    pts = [(radius * math.sin(math.radians(2 * k)),
            radius - radius * math.cos(math.radians(2 * k)),
            math.radians(2 * k)) for k in range(frames)]
    path_xy = np.array([(x, y) for x, y, _ in pts])

    def clear_of_path(x, y, margin=3.0):
        return np.hypot(path_xy[:, 0] - x, path_xy[:, 1] - y).min() >= margin

    for i in range(110):
        x = rng.uniform(-6, 26)
        y = rng.uniform(-8, 24)
        s1, s2 = rng.uniform(0.5, 1.4, 2)
        yaw = rng.uniform(0, math.pi)
        z = 0.0005 * (1 + (i % 37))
        m = rng.integers(0, n_mat)
        L.append(f"[object gp{i}]\nclass ground\nmaterial m{m}\n"
                 f"plane {s1:.2f} {s2:.2f}\nposition {x:.3f} {y:.3f} {z:.4f}\n"
                 f"rotation 0 0 {yaw:.3f}\n")

    pid = 0

    def panel(cx, cy, facing, pw, ph, npatch, smin, smax):
        nonlocal pid
        f = math.radians(facing)
        ux, uy = -math.sin(f), math.cos(f)
        nx, ny = math.cos(f), math.sin(f)
        L.append(f"[object pb{pid}]\nclass building\nmaterial base\n"
                 f"plane {pw:.2f} {ph:.2f}\nposition {cx:.3f} {cy:.3f} {ph / 2:.3f}\n"
                 f"rotation_deg 90 0 {facing + 90:.2f}\n")
        for j in range(npatch):
            o = rng.uniform(-pw / 2 * 0.88, pw / 2 * 0.88)
            h = rng.uniform(0.15, ph - 0.15)
            s1 = rng.uniform(smin, smax)
            s2 = rng.uniform(smin, smax)
            off = 0.0006 * (1 + (j % 9))
            m = rng.integers(0, n_mat)
            x = cx + ux * o + nx * off
            y = cy + uy * o + ny * off
            L.append(f"[object pp{pid}_{j}]\nclass building\nmaterial m{m}\n"
                     f"plane {s1:.2f} {s2:.2f}\nposition {x:.3f} {y:.3f} {h:.3f}\n"
                     f"rotation_deg 90 0 {facing + 90:.2f}\n")
        pid += 1

    for k in range(0, frames, 2):
        px, py, heading = pts[k]
        placed = tries = 0
        while placed < 4 and tries < 60:
            tries += 1
            bear = heading + rng.uniform(-0.45, 0.45)
            rad = rng.uniform(4.0, 11.0)
            cx = px + rad * math.cos(bear)
            cy = py + rad * math.sin(bear)
            if not clear_of_path(cx, cy):
                continue
            facing = math.degrees(math.atan2(py - cy, px - cx)) + rng.uniform(-20, 20)
            panel(cx, cy, facing, rng.uniform(1.2, 2.2), rng.uniform(1.4, 2.6),
                  16, 0.18, 0.6)
            placed += 1

    for i in range(44):
        a = rng.uniform(-0.5, 2.4)
        rad = rng.uniform(8.0, 22.0)
        cx, cy = rad * math.cos(a), rad * math.sin(a)
        if not clear_of_path(cx, cy):
            continue
        facing = math.degrees(math.atan2(-cy, -cx)) + rng.uniform(-30, 30)
        panel(cx, cy, facing, rng.uniform(2.0, 4.0), rng.uniform(2.0, 3.5),
              18, 0.3, 1.0)

    for ang in (-25, 15, 55, 95, 135):
        f = math.radians(ang)
        cx, cy = 30 * math.cos(f), 30 * math.sin(f)
        ux, uy = -math.sin(f), math.cos(f)
        nx, ny = -math.cos(f), -math.sin(f)
        L.append(f"[object rw{ang + 25}]\nclass building\nmaterial base\n"
                 f"plane 24 10\nposition {cx:.2f} {cy:.2f} 5\n"
                 f"rotation_deg 90 0 {ang + 90:.1f}\n")
        for i in range(110):
            o = rng.uniform(-11.5, 11.5)
            h = rng.uniform(0.4, 9.5)
            s1, s2 = rng.uniform(0.5, 1.6, 2)
            off = 0.0006 * (1 + (i % 31))
            m = rng.integers(0, n_mat)
            x = cx + ux * o + nx * off
            y = cy + uy * o + ny * off
            L.append(f"[object rwp{ang + 25}_{i}]\nclass building\nmaterial m{m}\n"
                     f"plane {s1:.2f} {s2:.2f}\nposition {x:.3f} {y:.3f} {h:.3f}\n"
                     f"rotation_deg 90 0 {ang + 90:.1f}\n")

    wps = [f"waypoint {x!r} {y!r} 0  0 0 {p!r}" for x, y, p in pts]
    L.append(f"[trajectory]\nframes {frames}\ndt 0.1\n" + "\n".join(wps) + "\n")
    L.append("[sensor lidar3d]\npreset vlp16\nazimuth_steps 360\n"
             "mount 0 0 1.8  0 0 0\n")
    L.append(f"[sensor camera]\nwidth 480\nheight 360\nfx 400\nfy 400\ncx 240\n"
             f"cy 180\nmax_depth 80\nsupersample {supersample}\n"
             f"mount 2.0 0 0.5  -1.5707963267948966 0 -1.5707963267948966\n")
    return "\n".join(L)
