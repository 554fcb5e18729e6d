"""Local-equivalence analysis of two-qubit gates.

Weyl-chamber coordinates [c1, c2, c3] (radians) label the local-equivalence
class of a two-qubit unitary; the identity sits at [0, 0, 0] and CNOT at
[pi/2, 0, 0].  Points are canonicalized into the chamber
pi/2 >= c1 >= c2 >= c3 >= 0.  Forcing c1 <= pi/2 folds each chiral class
onto its mirror image (the sign of the second Makhlin invariant is lost);
distances to mirror-symmetric targets such as CNOT are unaffected.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .coupler import QubitPair
from .errors import NotUnitary

#: Magic (Bell) basis transformation.
MAGIC = (
    np.array(
        [
            [1, 0, 0, 1j],
            [0, 1j, 1, 0],
            [0, 1j, -1, 0],
            [1, 0, 0, -1j],
        ],
        dtype=complex,
    )
    / math.sqrt(2.0)
)

_SYSY = np.kron(
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
)

#: CNOT with qubit 1 as control, computational basis |00>,|01>,|10>,|11>.
CNOT = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ],
    dtype=complex,
)

#: CNOT with qubit 2 as control.
CNOT_SWAPPED = np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class WeylPoint:
    """Canonical Weyl-chamber coordinates in radians."""

    c1: float
    c2: float
    c3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])


CNOT_POINT = WeylPoint(math.pi / 2.0, 0.0, 0.0)
IDENTITY_POINT = WeylPoint(0.0, 0.0, 0.0)


def _check_unitary(u: np.ndarray, atol: float = 1e-8) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise NotUnitary(f"expected a 4x4 matrix, got shape {u.shape}")
    defect = np.max(np.abs(u.conj().T @ u - np.eye(4)))
    if defect > atol:
        raise NotUnitary(f"unitarity defect {defect:.3e} exceeds {atol:.1e}")
    return u


def weyl_coordinates(u: np.ndarray) -> WeylPoint:
    """Weyl-chamber coordinates of a two-qubit unitary, in radians.

    Follows the spectral method of Childs et al., PRA 68, 052311: the
    eigenphases of U (SySy U^T SySy) / sqrt(det U) determine the class up to
    Weyl-group action, which is then reduced into the canonical chamber.
    Invariant under left/right multiplication by single-qubit unitaries.
    """
    u = _check_unitary(u)
    u_flip = _SYSY @ u.T @ _SYSY
    m = (u @ u_flip) / cmath.sqrt(np.linalg.det(u))
    eigenphases = np.angle(np.linalg.eigvals(m)) / math.pi  # in (-1, 1]
    eigenphases[eigenphases <= -0.5] += 2.0
    s = np.sort(eigenphases / 2.0)[::-1]
    n = int(round(s.sum()))
    s[:n] -= 1.0
    s = np.roll(s, -n)
    combine = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
    c1, c2, c3 = combine @ s[:3]  # units of pi
    if c3 < 0:
        c1, c3 = 1.0 - c1, -c3
    if c1 > 0.5:
        c1 = 1.0 - c1  # chirality fold into c1 <= pi/2
    # Guard rounding noise at the chamber boundaries.
    c1, c2, c3 = (min(max(c, 0.0), 0.5) for c in (c1, c2, c3))
    big, mid, small = sorted((c1, c2, c3), reverse=True)
    return WeylPoint(math.pi * big, math.pi * mid, math.pi * small)


def makhlin_invariants(u: np.ndarray) -> tuple[float, float, float]:
    """Local-unitary invariant triple (g1, g2, g3).

    g1 + i g2 = tr(m)^2 / (16 det U) and g3 = (tr(m)^2 - tr(m^2)) / (4 det U)
    with m = U_B^T U_B in the magic basis.  Identity maps to (1, 0, 3) and
    CNOT to (0, 0, 1).
    """
    u = _check_unitary(u)
    ub = MAGIC.conj().T @ u @ MAGIC
    det = np.linalg.det(ub)
    m = ub.T @ ub
    tr = np.trace(m)
    g12 = tr**2 / (16.0 * det)
    g3 = (tr**2 - np.trace(m @ m)) / (4.0 * det)
    return float(g12.real), float(g12.imag), float(g3.real)


def invariants_from_weyl(point: WeylPoint) -> tuple[float, float, float]:
    """Closed-form Makhlin invariants of a Weyl-chamber point.

    Because the canonical chamber folds chirality, g2 is determined only up
    to sign; the returned value corresponds to the unfolded representative.
    """
    c1, c2, c3 = point.c1, point.c2, point.c3
    cos2 = math.cos(c1) ** 2 * math.cos(c2) ** 2 * math.cos(c3) ** 2
    sin2 = math.sin(c1) ** 2 * math.sin(c2) ** 2 * math.sin(c3) ** 2
    g1 = cos2 - sin2
    g2 = 0.25 * math.sin(2 * c1) * math.sin(2 * c2) * math.sin(2 * c3)
    g3 = 4.0 * g1 - math.cos(2 * c1) * math.cos(2 * c2) * math.cos(2 * c3)
    return g1, g2, g3


def trajectory_rates(qp: QubitPair) -> tuple[float, float]:
    """Velocity factor v and beat frequency of the coupled trajectory.

    Returns (v, f_beat_GHz) with v = eps1 eps2 / (dE1 dE2) and
    f_beat = (dE1 - dE2) / 2 in GHz (the angular frequency is 2 pi f_beat
    rad/ns).
    """
    de1 = qp.splitting1_GHz
    de2 = qp.splitting2_GHz
    v = qp.eps1_GHz * qp.eps2_GHz / (de1 * de2)
    return v, 0.5 * (de1 - de2)


def analytic_trajectory(qp: QubitPair, K_GHz: float, t_ns: float, p: float = 0.0) -> np.ndarray:
    """Weyl coordinates of the constant-coupling trajectory at time t.

    [c1, c2, c3] = [2 pi |K| v t, p |sin(2 pi f_beat t)|, p |sin(...)|] in
    radians, the periodic curve traced from the identity when the coupling
    is switched on instantaneously.  The coefficient p depends on the system
    parameters and is not needed for synthesis (the target times satisfy
    sin = 0); it defaults to 0 and may be fit numerically when the full
    curve is wanted.
    """
    if K_GHz == 0.0:
        raise ValueError("K must be nonzero for a coupling trajectory")
    v, f_beat = trajectory_rates(qp)
    c1 = 2.0 * math.pi * abs(K_GHz) * v * t_ns
    wobble = p * abs(math.sin(2.0 * math.pi * f_beat * t_ns))
    return np.array([c1, wobble, wobble])


def unwrap_trajectory(points: list[WeylPoint]) -> np.ndarray:
    """Continuous c1(t) branch for a monotone trajectory of canonical points.

    The canonical chamber reflects c1 at pi/2; this undoes the folds by
    mirroring successive branches, so a linearly growing coordinate comes
    back out linear.  Returns an (n, 3) array.
    """
    coords = np.array([p.as_array() for p in points])
    unwrapped = coords.copy()
    offset = 0.0
    sign = 1.0
    for i in range(1, len(coords)):
        prev_raw = coords[i - 1, 0]
        cur_raw = coords[i, 0]
        # A fold shows up as a reversal of the canonical coordinate.
        if sign > 0 and cur_raw < prev_raw - 1e-12:
            sign = -1.0
            offset = unwrapped[i - 1, 0] + prev_raw
        elif sign < 0 and cur_raw > prev_raw + 1e-12:
            sign = 1.0
            offset = unwrapped[i - 1, 0] - prev_raw
        unwrapped[i, 0] = offset + sign * cur_raw
    return unwrapped


def computational_deviation(u: np.ndarray, target: np.ndarray) -> float:
    """Global-phase-minimized max elementwise deviation from the target.

    min over phi of max_ij |e^{i phi} U_ij - T_ij|, with the 1-D phase
    minimization resolved to 1e-9 rad.
    """
    u = _check_unitary(u)
    target = _check_unitary(target)

    def worst(phi: float) -> float:
        return float(np.max(np.abs(np.exp(1j * phi) * u - target)))

    phis = np.linspace(0.0, 2.0 * math.pi, 2048, endpoint=False)
    values = [worst(p) for p in phis]
    best = int(np.argmin(values))
    step = phis[1] - phis[0]
    res = minimize_scalar(
        worst,
        bounds=(phis[best] - step, phis[best] + step),
        method="bounded",
        options={"xatol": 1e-9},
    )
    return float(min(res.fun, values[best]))


def _target_images(target: WeylPoint) -> list[np.ndarray]:
    """Symmetry-equivalent images of a target point within the chamber."""
    images = [target.as_array()]
    mirrored = np.array([math.pi - target.c1, target.c2, target.c3])
    if mirrored[0] <= math.pi / 2 + 1e-12 and not np.allclose(mirrored, images[0]):
        images.append(mirrored)
    return images


def weyl_distance(u: np.ndarray, target: WeylPoint) -> float:
    """Euclidean distance from U's Weyl point to the target, radians.

    Minimized over the chamber's symmetry-equivalent images of the target.
    """
    point = weyl_coordinates(u).as_array()
    return float(min(np.linalg.norm(point - img) for img in _target_images(target)))


@dataclass(frozen=True)
class GateReport:
    """Propagated gate with its local-equivalence data and target metrics."""

    matrix: np.ndarray
    weyl: WeylPoint
    invariants: tuple[float, float, float]
    deviation_from_target: float
    weyl_distance_to_target: float

    @classmethod
    def from_unitary(cls, u: np.ndarray, target: np.ndarray, target_point: WeylPoint) -> "GateReport":
        return cls(
            matrix=np.asarray(u, dtype=complex),
            weyl=weyl_coordinates(u),
            invariants=makhlin_invariants(u),
            deviation_from_target=computational_deviation(u, target),
            weyl_distance_to_target=weyl_distance(u, target_point),
        )

    def to_json_dict(self) -> dict:
        return {
            "matrix_re_im_row_major": [
                [float(z.real), float(z.imag)] for z in self.matrix.ravel()
            ],
            "weyl_coordinates_rad": [self.weyl.c1, self.weyl.c2, self.weyl.c3],
            "makhlin_invariants": list(self.invariants),
            "deviation_from_target": self.deviation_from_target,
            "weyl_distance_to_target": self.weyl_distance_to_target,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent, sort_keys=True)
