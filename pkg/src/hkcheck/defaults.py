"""Numeric defaults, collected in one place.

=========================  =====================  ==========================
name                       value                  used by
=========================  =====================  ==========================
COND_MAX                   1e12                   eig / oracle powers
SPECTRUM_CUT_TOL           1e-12                  oracle powers
SCAN_S_MIN, SCAN_S_MAX     1e-8, 1e8              sectoriality scans
SCAN_N_GRID                512                    sectoriality scans
GOLDEN_ITERS               80                     scan refinement
NODES_PER_PANEL            20                     all quadratures
PANEL_COUNT                20                     all quadratures
X_BOUNDS                   (-40, 40)              real-line quadratures
TAIL_TOL                   1e-12                  all quadratures
CONTOUR_TAIL_TOL           1e-10                  Dunford / Q contours
REGION_SAMPLES             100                    region-bound verification
BIP_T_GRID                 81 pts on [-10, 10]    BIP sampling
BIP_PHI_GRID               101 pts on [0, 2]      BIP fitting
A_GRID                     0.05, 0.10, ..., 0.95  Heinz-Kato harness
TRACE_T_GRID               81 pts on [-10, 10]    three-lines trace
SHIFT_MU                   1e-6                   non-invertible instances
=========================  =====================  ==========================
"""

import numpy as np

COND_MAX = 1e12
SPECTRUM_CUT_TOL = 1e-12

SCAN_S_MIN = 1e-8
SCAN_S_MAX = 1e8
SCAN_N_GRID = 512
GOLDEN_ITERS = 80

NODES_PER_PANEL = 20
PANEL_COUNT = 20
X_BOUNDS = (-40.0, 40.0)
TAIL_TOL = 1e-12
CONTOUR_TAIL_TOL = 1e-10

REGION_SAMPLES = 100

BIP_T_GRID = tuple(np.linspace(-10.0, 10.0, 81))
BIP_PHI_GRID = tuple(np.linspace(0.0, 2.0, 101))

A_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))
TRACE_T_GRID = tuple(np.linspace(-10.0, 10.0, 81))

SHIFT_MU = 1e-6
