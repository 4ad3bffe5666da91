#!/usr/bin/env python3
"""Ball-mass scaling experiments: the three absolute-continuity regimes.

Scans |div^a F|(B_r) for a smooth field (slope ~ n), a pole field anchored at
its atom (slope 0, no absolute continuity), and the level-10 Cantor measure
(slope log2/log3). Prints the log-log tables.
"""

import math
import warnings

import numpy as np

from fracfield.analytic import cantor_measure, make_delta_pair
from fracfield.fields import gaussian_vector
from fracfield.quadrature import QuadratureConfig
from fracfield.verify import decay_scan


def show(name, rep, radii):
    print(f"\n== {name}")
    print(f"   fitted slope {rep.lhs:+.4f}   floor {rep.params['floor']:+.4f}   "
          f"{'PASS' if rep.passed else 'INFO'}")


def main() -> None:
    cfg = QuadratureConfig()
    warnings.simplefilter("ignore", RuntimeWarning)

    radii = np.geomspace(0.1, 0.8, 6)
    smooth = gaussian_vector((0.2, 0.0), amplitudes=(1.0, 0.5))
    rep = decay_scan(smooth, 0.5, math.inf, (0.3, 0.2), radii, cfg, expect="floor")
    show("smooth field, p = inf (supercritical regime)", rep, radii)

    pair = make_delta_pair((0.0, 0.0), (1.0, 0.0), 0.5)
    radii2 = np.geomspace(0.02, 0.4, 6)
    rep = decay_scan(pair, 0.5, 1.2, (0.0, 0.0), radii2, cfg, expect="flat")
    show("pole field at its atom (subcritical: no absolute continuity)", rep, radii2)

    radii3 = 3.0 ** -np.arange(0, 10)
    rep = decay_scan(cantor_measure(10, 1), 0.5, 1.0, (0.0,), radii3, cfg,
                     expect="exponent", target=math.log(2) / math.log(3))
    show("level-10 Cantor measure (self-similar scaling window)", rep, radii3)


if __name__ == "__main__":
    main()
