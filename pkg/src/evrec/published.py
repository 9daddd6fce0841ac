"""The learned scoring functions shipped as defaults.

These are the coefficient sets the training study arrived at; they seed the
model store so scoring and the UI work out of the box before any local
training run.
"""

from __future__ import annotations

from .scoring import Piece, ScoringFunction

SIGMA_INIT_0 = ScoringFunction(
    intercept=-0.2524,
    coefficients={"thi": 0.5911, "tyi": 0.3338},
)

SIGMA_FIN_0 = ScoringFunction(
    intercept=-0.8436,
    coefficients={"thi": 0.597, "tyi": 0.3235},
)

SIGMA_X = ScoringFunction(
    intercept=-3.0467,
    coefficients={"thi": 0.5698, "tyi": 0.3286, "rat": 0.0848,
                  "rch": 0.1967, "frn": 0.07965},
)

SIGMA_XU_ABS = ScoringFunction(
    intercept=-1.6102,
    coefficients={"thi": 0.5835, "tyi": 0.3199, "u_abs": 0.2799},
)

SIGMA_XU_REL = ScoringFunction(
    intercept=-2.1925,
    coefficients={"thi": 0.5782, "tyi": 0.3329, "u_rel": 0.2331},
)

SIGMA_XD_THI = ScoringFunction(
    split_attribute="thi",
    thresholds=(6.0, 8.0),
    pieces=(
        Piece(-1.9663, {"thi": 0.5681, "tyi": 0.2194, "rat": 0.1205,
                        "rch": 0.1492}),
        Piece(-3.6959, {"thi": 0.3466, "tyi": 0.4685, "rat": 0.1476,
                        "rch": 0.2657, "frn": 0.1567}),
        Piece(-4.1450, {"thi": 0.7396, "tyi": 0.3527, "rch": 0.1853,
                        "frn": 0.1017}),
    ),
)

SIGMA_XD_TYI = ScoringFunction(
    split_attribute="tyi",
    thresholds=(6.0, 8.0),
    pieces=(
        Piece(-1.5022, {"thi": 0.4410, "tyi": 0.2786, "rch": 0.1405,
                        "frn": 0.1341}),
        Piece(-2.3500, {"thi": 0.6467, "tyi": 0.2798, "rch": 0.1754,
                        "frn": 0.0425}),
        Piece(0.0823, {"thi": 0.6384, "rch": 0.2181}),
    ),
)

PUBLISHED_FUNCTIONS: dict[str, ScoringFunction] = {
    "sigma_init_0": SIGMA_INIT_0,
    "sigma_fin_0": SIGMA_FIN_0,
    "sigma_x": SIGMA_X,
    "sigma_xu_abs": SIGMA_XU_ABS,
    "sigma_xu_rel": SIGMA_XU_REL,
    "sigma_xd_thi": SIGMA_XD_THI,
    "sigma_xd_tyi": SIGMA_XD_TYI,
}

PUBLISHED_REGIMES: dict[str, str] = {
    "sigma_init_0": "ia0_init",
    "sigma_fin_0": "ia0_fin",
    "sigma_x": "ia_x",
    "sigma_xu_abs": "ia_xu_abs",
    "sigma_xu_rel": "ia_xu_rel",
    "sigma_xd_thi": "ia_xd_thi",
    "sigma_xd_tyi": "ia_xd_tyi",
}
