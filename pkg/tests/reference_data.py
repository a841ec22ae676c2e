"""Reference minimal-frequency data for the three triangular walks.

Each entry maps a mass label to ``(mass, omega_min, minimizers)``. Minimizer
coordinates are printed to 4-6 digits. ``"line"`` marks rows whose minimum is
attained along the lines ``kx = +-pi``.
"""

import math

PI = math.pi
C = 3.14159
K = 1.8138
CORNERS = [(0.0, 0.0), (C, K), (C, -K), (-C, K), (-C, -K)]

THREE_STEP = {
    "0": (0.0, 0.0, CORNERS),
    "pi/3": (PI / 3, 0.451188, [(-2.35619, -0.6046), (2.35619, 0.6046),
                                (-0.785398, -1.2092), (0.785398, 1.2092)]),
    "pi/2": (PI / 2, 0.225893, [(-2.34159, -0.383799), (2.34159, 0.383799),
                                (-0.831593, -1.4238), (0.831593, 1.4238)]),
    "2pi/3": (2 * PI / 3, 0.812756, [(-2.0944, 0.0), (2.0944, 0.0), (-1.0472, K), (-1.0472, -K),
                                     (1.0472, K), (1.0472, -K)]),
    "pi": (PI, 0.523599, [(-1.5708, 0.9069), (1.5708, -0.9069)]),
    "4pi/3": (4 * PI / 3, 0.0, CORNERS),
}

SIX_STEP = {
    "0": (0.0, 0.0, [(0.0, 0.0)]),
    "pi/3": (PI / 3, 1.10603, [(1.37445, 0.0), (-1.37445, 0.0)]),
    "pi/2": (PI / 2, 0.565516, [(1.8326, 0.0), (-1.8326, 0.0)]),
    "2pi/3": (2 * PI / 3, 0.505361, [(-1.23095, K), (-1.23095, -K), (1.23095, K), (1.23095, -K)]),
    "pi": (PI, 0.523599, "line"),
    "4pi/3": (4 * PI / 3, 0.0, [(0.0, 0.0)]),
}

ISOSCELES = {
    "0": (0.0, 0.0, CORNERS),
    "pi/3": (PI / 3, 0.523599, [(-1.5708, 0.9069), (1.5708, -0.9069)]),
    "pi/2": (PI / 2, 0.0, [(-1.5708, 0.9069), (1.5708, -0.9069)]),
    "2pi/3": (2 * PI / 3, 0.523599, [(-1.5708, 0.9069), (1.5708, -0.9069)]),
    "pi": (PI, 0.0, [(-C, 0.0), (C, 0.0), (0.0, -K), (0.0, K)]),
    "4pi/3": (4 * PI / 3, 0.523599, [(-1.5708, -0.9069), (1.5708, 0.9069)]),
}

REFERENCE = {
    "three-step-equilateral": THREE_STEP,
    "six-step-equilateral": SIX_STEP,
    "three-step-isosceles": ISOSCELES,
}
