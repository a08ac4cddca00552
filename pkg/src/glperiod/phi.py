"""The first two phi-functions of exponential integrators.

phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2, with a 6-term Taylor
fallback below |z| = 1e-3 where the direct formulas cancel.
"""

import numpy as np

_SMALL = 1e-3


def phi1(z):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < _SMALL
    zs = np.where(small, 1.0, z)
    direct = (np.exp(zs) - 1.0) / zs
    taylor = 1.0 + z * (1 / 2 + z * (1 / 6 + z * (1 / 24 + z * (1 / 120 + z / 720))))
    return np.where(small, taylor, direct)


def phi2(z):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < _SMALL
    zs = np.where(small, 1.0, z)
    direct = (np.exp(zs) - 1.0 - zs) / (zs * zs)
    taylor = 1 / 2 + z * (1 / 6 + z * (1 / 24 + z * (1 / 120 + z * (1 / 720 + z / 5040))))
    return np.where(small, taylor, direct)
