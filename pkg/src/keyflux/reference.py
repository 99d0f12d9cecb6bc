"""Published reference values for the default scenario (Max=50 unless a
table varies it). Used by `keyflux verify` and the acceptance suite.

Keys are (kind, threshold); MB thresholds are the raw message counts.
RISK holds (max, average) probabilities, COST holds (before, after)
monthly update counts, STABILISATION_MONTH the month index (120 = capped
at ten years). STATE_COUNTS / TRANSITION_COUNTS map (kind, threshold, max)
to exact state-space sizes.
"""

from __future__ import annotations

RISK: dict[tuple[str, int], tuple[float, float]] = {
    ("LB", 1): (0.035, 0.035),
    ("LB", 2): (0.052, 0.052),
    ("LB", 3): (0.069, 0.069),
    ("LB", 4): (0.085, 0.085),
    ("LB", 5): (0.101, 0.101),
    ("JB", 1): (0.035, 0.035),
    ("JB", 2): (0.052, 0.052),
    ("JB", 3): (0.069, 0.069),
    ("JB", 4): (0.087, 0.085),
    ("JB", 5): (0.104, 0.101),
    ("JLB", 1): (0.029, 0.029),
    ("JLB", 2): (0.034, 0.034),
    ("JLB", 3): (0.044, 0.044),
    ("JLB", 4): (0.052, 0.052),
    ("JLB", 5): (0.062, 0.061),
    ("TB", 1): (0.074, 0.072),
    ("TB", 2): (0.139, 0.137),
    ("TB", 3): (0.259, 0.196),
    ("TB", 4): (0.36, 0.249),
    ("TB", 5): (0.443, 0.298),
    ("MB", 500): (0.029, 0.025),
    ("MB", 1000): (0.064, 0.048),
    ("MB", 1500): (0.098, 0.072),
    ("MB", 2000): (0.139, 0.094),
    ("MB", 2500): (0.18, 0.115),
    ("HY", 1): (0.027, 0.027),
    ("HY", 2): (0.044, 0.044),
    ("HY", 3): (0.062, 0.060),
    ("HY", 4): (0.081, 0.076),
    ("HY", 5): (0.099, 0.092),
}

COST: dict[tuple[str, int], tuple[float, float]] = {
    ("LB", 1): (4.089, 4.088),
    ("LB", 2): (1.919, 2.044),
    ("LB", 3): (1.196, 1.363),
    ("LB", 4): (0.835, 1.022),
    ("LB", 5): (0.618, 0.817),
    ("JB", 1): (3.817, 4.088),
    ("JB", 2): (1.658, 2.044),
    ("JB", 3): (0.938, 1.363),
    ("JB", 4): (0.801, 1.022),
    ("JB", 5): (0.591, 0.817),
    ("JLB", 1): (8.041, 8.175),
    ("JLB", 2): (3.847, 4.088),
    ("JLB", 3): (2.301, 2.725),
    ("JLB", 4): (1.859, 2.044),
    ("JLB", 5): (1.408, 1.635),
    ("TB", 1): (0.755, 1.000),
    ("TB", 2): (0.438, 0.500),
    ("TB", 3): (0.327, 0.333),
    ("TB", 4): (0.246, 0.250),
    ("TB", 5): (0.196, 0.200),
    ("MB", 500): (2.960, 2.985),
    ("MB", 1000): (1.482, 1.495),
    ("MB", 1500): (0.931, 0.993),
    ("MB", 2000): (0.742, 0.749),
    ("MB", 2500): (0.592, 0.591),
    ("HY", 1): (7.920, 8.232),
    ("HY", 2): (2.562, 2.959),
    ("HY", 3): (1.515, 1.736),
    ("HY", 4): (1.066, 1.221),
    ("HY", 5): (0.782, 0.940),
}

STABILISATION_MONTH: dict[tuple[str, int], int] = {
    ("LB", 1): 1,
    ("LB", 2): 2,
    ("LB", 3): 2,
    ("LB", 4): 2,
    ("LB", 5): 2,
    ("JB", 1): 1,
    ("JB", 2): 1,
    ("JB", 3): 1,
    ("JB", 4): 2,
    ("JB", 5): 2,
    ("JLB", 1): 2,
    ("JLB", 2): 1,
    ("JLB", 3): 1,
    ("JLB", 4): 2,
    ("JLB", 5): 2,
    ("TB", 1): 2,
    ("TB", 2): 8,
    ("TB", 3): 77,
    ("TB", 4): 120,
    ("TB", 5): 120,
    ("MB", 500): 22,
    ("MB", 1000): 54,
    ("MB", 1500): 11,
    ("MB", 2000): 120,
    ("MB", 2500): 120,
    ("HY", 1): 1,
    ("HY", 2): 1,
    ("HY", 3): 2,
    ("HY", 4): 3,
    ("HY", 5): 3,
}

CAPPED_STABILISATION = 120

MAX_COLUMNS = (50, 100, 500)

_LB_STATES = {50: (101, 203, 305, 407, 509), 100: (201, 403, 605, 807, 1009), 500: (1001, 2003, 3005, 4007, 5009)}
_LB_TRANS = {50: (349, 749, 1149, 1549, 1949), 100: (699, 1499, 2299, 3099, 3899), 500: (3499, 7499, 11499, 15499, 19499)}
_JB_STATES = {50: (102, 204, 306, 408, 510), 100: (202, 404, 606, 808, 1010), 500: (1002, 2004, 3006, 4008, 5010)}
_JB_TRANS = {50: (400, 800, 1200, 1600, 2000), 100: (800, 1600, 2400, 3200, 4000), 500: (4000, 8000, 12000, 16000, 20000)}
_JLB_STATES = {50: (101, 101, 305, 203, 509), 100: (201, 201, 605, 403, 1009), 500: (1001, 1001, 3005, 2003, 5009)}
_JLB_TRANS = {50: (349, 374, 1149, 774, 1949), 100: (699, 749, 2299, 1549, 3899), 500: (3499, 3749, 11499, 7749, 19499)}
_TB_STATES = {50: (10200,) * 5, 100: (20200,) * 5, 500: (100200,) * 5}
_TB_TRANS = {50: (50200,) * 5, 100: (100200,) * 5, 500: (500200,) * 5}
_MB_STATES = {50: (51000, 102000, 153000, 204000, 255000), 100: (101000, 202000, 303000, 404000, 505000), 500: (501000, 1002000, 1503000, 2004000, 2505000)}
_MB_TRANS = {50: (199950, 399950, 599950, 799950, 999950), 100: (399900, 799900, 1199900, 1599900, 1999900), 500: (1999500, 3999500, 5999500, 7999500, 9999500)}
_HY_STATES = {50: (10100, 40300, 90100, 159100, 246900), 100: (20100, 80300, 180100, 319100, 496900), 500: (100100, 400300, 900100, 1599100, 2496900)}
_HY_TRANS = {50: (45000, 189500, 431300, 768400, 1198800), 100: (90000, 379500, 866300, 1548400, 2423800), 500: (450000, 1899500, 4346300, 7788400, 12223800)}

_THRESHOLD_ROWS = {
    "LB": (1, 2, 3, 4, 5),
    "JB": (1, 2, 3, 4, 5),
    "JLB": (1, 2, 3, 4, 5),
    "TB": (1, 2, 3, 4, 5),
    "MB": (500, 1000, 1500, 2000, 2500),
    "HY": (1, 2, 3, 4, 5),
}


def _expand(per_kind: dict[str, dict[int, tuple[int, ...]]]) -> dict[tuple[str, int, int], int]:
    out: dict[tuple[str, int, int], int] = {}
    for kind, by_max in per_kind.items():
        for max_devices, row in by_max.items():
            for thr, value in zip(_THRESHOLD_ROWS[kind], row):
                out[(kind, thr, max_devices)] = value
    return out


STATE_COUNTS = _expand(
    {"LB": _LB_STATES, "JB": _JB_STATES, "JLB": _JLB_STATES, "TB": _TB_STATES, "MB": _MB_STATES, "HY": _HY_STATES}
)

TRANSITION_COUNTS = _expand(
    {"LB": _LB_TRANS, "JB": _JB_TRANS, "JLB": _JLB_TRANS, "TB": _TB_TRANS, "MB": _MB_TRANS, "HY": _HY_TRANS}
)


def table_pairs() -> list[tuple[str, int]]:
    """All 30 (kind, threshold) rows in table order."""
    return [(kind, thr) for kind in ("LB", "JB", "JLB", "TB", "MB", "HY") for thr in _THRESHOLD_ROWS[kind]]
