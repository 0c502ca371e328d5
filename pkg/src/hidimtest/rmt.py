"""Marchenko-Pastur law evaluation and contour-integral verification.

The limiting spectral law of an identity-covariance sample covariance
matrix with aspect ratio y has density

    g_y(x) = sqrt((b - x)(x - a)) / (2 pi y x)   on [a, b],

with edges a = (1 - sqrt(y))^2 and b = (1 + sqrt(y))^2.  The Gaussian
limits used in :mod:`hidimtest.asymptotics` rest on closed-form contour
integrals in the plane of the companion Stieltjes transform, where the
spectral variable is z(m) = -1/m + y/(1 + m).  This module re-derives each
closed form by direct numerical quadrature so the two routes can be
compared identity by identity.

Contour geometry.  Under the companion-transform map the support [a, b]
becomes the real segment [-1/(1-sqrt(y)), -1/(1+sqrt(y))].  Any admissible
contour must enclose that segment, which unavoidably places the interior
singular points m = -1 (pole of z) and m = 1/(y-1) (zero of z, hence a
logarithmic point of log z) inside the curve; the integrals' closed forms
account for them.  The curve itself must keep clear of every singularity
and must leave m = 0 outside.  A circle centred at the segment midpoint
1/(y-1) with radius slightly above the half-length satisfies all of this:
concentric circles of radius strictly greater than the half-length map to
curves in the spectral plane that never cross the negative real axis, so
the principal branch of log z stays continuous along the contour.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import ContourTooClose, DegenerateRatio, NonConvergent, QuadratureError

__all__ = [
    "MpLaw",
    "ContourSpec",
    "ContourIdentity",
    "mp_density",
    "mp_moment",
    "clrt_mp_integral",
    "d_limit",
    "contour_integral",
    "closed_form",
    "verify_identities",
    "esd",
    "EsdCurve",
]

_QUAD_TOL = 1e-9
_IMAG_TOL = 1e-8


# ---------------------------------------------------------------------------
# Marchenko-Pastur law

def _edges(y: float) -> tuple[float, float]:
    root = np.sqrt(y)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


@dataclass(frozen=True)
class MpLaw:
    """Marchenko-Pastur law with aspect ratio y > 0.

    For y > 1 the continuous part on [a, b] integrates to 1/y and a point
    mass of 1 - 1/y sits at the origin.
    """

    y: float
    a: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if self.y <= 0:
            raise ValueError(f"aspect ratio must be positive, got {self.y}")
        a, b = _edges(self.y)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def density(self, x):
        return mp_density(x, self.y)

    def support(self) -> tuple[float, float]:
        return (self.a, self.b)


def mp_density(x, y: float):
    """Continuous Marchenko-Pastur density at x for aspect ratio y.

    Zero outside the support [a, b], including at the endpoints.  Accepts
    scalars or arrays.
    """
    if y <= 0:
        raise ValueError(f"aspect ratio must be positive, got {y}")
    a, b = _edges(y)
    arr = np.asarray(x, dtype=float)
    out = np.zeros_like(arr)
    inside = (arr > a) & (arr < b) & (arr > 0)
    xi = arr[inside]
    out[inside] = np.sqrt((b - xi) * (xi - a)) / (2.0 * np.pi * y * xi)
    if np.ndim(x) == 0:
        return float(out)
    return out


def _mp_quadrature(h, y: float, tol: float = _QUAD_TOL) -> float:
    """Integrate h(x) g_y(x) dx over [a, b] after a sine substitution.

    With x = c + s sin(t), the square-root endpoint factors become
    s cos(t) and the integrand turns smooth: h(x) s^2 cos^2(t) / (2 pi y x).
    """
    a, b = _edges(y)
    c = (a + b) / 2.0
    s = (b - a) / 2.0

    def transformed(t: float) -> float:
        x = c + s * np.sin(t)
        return h(x) * (s * np.cos(t)) ** 2 / (2.0 * np.pi * y * x)

    value, abserr = quad(transformed, -np.pi / 2.0, np.pi / 2.0,
                         epsabs=tol, epsrel=0.0, limit=200)
    if abserr > 10.0 * tol:
        raise QuadratureError(
            f"quadrature error estimate {abserr:.2e} exceeds tolerance {tol:.0e}"
        )
    return value


def mp_moment(k: int, y: float) -> float:
    """k-th moment of the Marchenko-Pastur law with ratio y in (0,1).

    Computed by adaptive quadrature (absolute tolerance 1e-9).  The first
    two moments are 1 and 1 + y.
    """
    if not isinstance(k, (int, np.integer)) or k < 0:
        raise ValueError(f"moment order must be a nonnegative integer, got {k}")
    if k > 8:
        raise ValueError("moment order above 8 exceeds the quadrature budget")
    if not 0.0 < y < 1.0:
        raise DegenerateRatio(f"mp_moment needs y in (0,1), got {y:g}")
    return _mp_quadrature(lambda x: x**k, y)


def clrt_mp_integral(y: float) -> float:
    """Integral of x - log(x) - 1 against the MP density with ratio y.

    Matches the closed-form CLRT centering 1 + (1/y - 1) log(1 - y).
    """
    if not 0.0 < y < 1.0:
        raise DegenerateRatio(f"clrt_mp_integral needs y in (0,1), got {y:g}")
    return _mp_quadrature(lambda x: x - np.log(x) - 1.0, y)


def d_limit(y: float) -> float:
    """Almost-sure limit -1 - (1/y - 1) log(1 - y) of the log-det discrepancy.

    Equals the negated CLRT centering.
    """
    if not 0.0 < y < 1.0:
        raise DegenerateRatio(f"d_limit needs y in (0,1), got {y:g}")
    return -1.0 - (1.0 / y - 1.0) * np.log1p(-y)


# ---------------------------------------------------------------------------
# Contour quadrature

class ContourIdentity(enum.Enum):
    M11 = "m11"
    M12 = "m12"
    M13 = "m13"
    V11 = "v11"
    V12 = "v12"
    XG_MEAN = "xg_mean"
    XG_VAR = "xg_var"


def _segment(y: float) -> tuple[float, float]:
    """Midpoint and half-length of the support image on the real axis."""
    half = np.sqrt(y) / (1.0 - y)
    return 1.0 / (y - 1.0), half


@dataclass(frozen=True)
class ContourSpec:
    """A circular quadrature contour in the companion-transform plane."""

    center: complex
    radius: float
    nodes: int = 512

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.nodes < 64:
            raise ValueError(f"need at least 64 nodes, got {self.nodes}")

    @classmethod
    def for_ratio(cls, y: float, nodes: int = 512,
                  radius_factor: float | None = None) -> "ContourSpec":
        """Default contour for aspect ratio y in (0,1).

        Circle centred at the midpoint of the support image.  The radius is
        1.1x the segment half-length, capped so the curve keeps a margin of
        0.45x the natural gap to the origin (binding for y above ~0.83).
        ``radius_factor`` overrides the multiple of the half-length.
        """
        if not 0.0 < y < 1.0:
            raise DegenerateRatio(
                f"contour identities are defined for y in (0,1), got {y:g}"
            )
        center, half = _segment(y)
        if radius_factor is None:
            gap = 1.0 / (1.0 + np.sqrt(y))
            radius = half + min(0.1 * half, 0.45 * gap)
        else:
            radius = radius_factor * half
        spec = cls(center=complex(center), radius=float(radius), nodes=nodes)
        spec.validate_for(y)
        return spec

    def validate_for(self, y: float) -> None:
        """Check enclosure of the support image and singularity margins.

        The curve must enclose the image segment, leave the origin outside,
        and pass no closer than radius/100 to any singular point (the pole
        at -1 and the log point at 1/(y-1) lie inside by necessity).
        """
        center, half = _segment(y)
        if abs(self.center - center) > 1e-9:
            raise ContourTooClose(
                "contour must be centred at the support-image midpoint "
                f"{center:.6g} (got {self.center})"
            )
        margin = self.radius / 100.0
        if self.radius - half < margin:
            raise ContourTooClose(
                f"radius {self.radius:.6g} does not clear the support image "
                f"(half-length {half:.6g}) by {margin:.2g}"
            )
        if abs(center) - self.radius < margin:
            raise ContourTooClose(
                "contour approaches or encloses the origin "
                f"(|center|={abs(center):.6g}, radius={self.radius:.6g})"
            )
        for q in (-1.0, 1.0 / (y - 1.0)):  # interior pole and log point
            if self.radius - abs(q - center) < margin:
                raise ContourTooClose(
                    f"curve passes within {margin:.2g} of the singularity at {q:.6g}"
                )


def _nodes(spec: ContourSpec, nodes: int):
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    unit = np.exp(1j * theta)
    m = spec.center + spec.radius * unit
    dm = 1j * spec.radius * unit
    return m, dm, 2.0 * np.pi / nodes


def _z_and_log(m: np.ndarray, y: float):
    """Spectral variable z(m) and a branch-continuous log along the path."""
    z = -1.0 / m + y / (1.0 + m)
    # close the loop to measure the winding of z around the origin, which
    # must vanish for the log-bearing integrands to be single-valued
    angles = np.angle(np.concatenate([z, z[:1]]))
    closed = np.unwrap(angles)
    if abs(closed[-1] - closed[0]) > np.pi:
        raise NonConvergent(
            "log branch winds around the origin along the contour; "
            "the contour is invalid for log-bearing integrands"
        )
    logz = np.log(np.abs(z)) + 1j * closed[:-1]
    return z, logz


def _f_clrt(z, logz):
    return z - logz - 1.0


def _g_lw(z, y: float):
    return (z - 1.0) ** 2 - 2.0 * y * z + y


def _loop_sum(values: np.ndarray, dm: np.ndarray, weight: float) -> complex:
    """(1/(2 pi i)) times the trapezoid sum of values dm."""
    return weight * np.sum(values * dm) / (2j * np.pi)


def _single_integral(identity: ContourIdentity, y: float, delta: float,
                     spec: ContourSpec, nodes: int) -> complex:
    m, dm, w = _nodes(spec, nodes)
    z, logz = _z_and_log(m, y)
    f = _f_clrt(z, logz)
    one = 1.0 + m
    if identity is ContourIdentity.M11:
        vals = y * m * f / (one * (one**2 - y * m**2))
        return -_loop_sum(vals, dm, w)
    if identity is ContourIdentity.M12:
        vals = y * logz * m / one**3
        return _loop_sum(vals, dm, w)
    if identity is ContourIdentity.M13:
        vals = y * f / (one * (y * m - 1.0 - m))
        return _loop_sum(vals, dm, w)
    if identity is ContourIdentity.V12:
        vals = f / one**2
        return _loop_sum(vals, dm, w)
    if identity is ContourIdentity.XG_MEAN:
        g = _g_lw(z, y)
        t1 = -_loop_sum(y * m * g / (one * (one**2 - y * m**2)), dm, w)
        t2 = -delta * _loop_sum(y * m * g / one**3, dm, w)
        t3 = _loop_sum(y * g / (one * (y * m - 1.0 - m)), dm, w)
        return t1 + t2 + t3
    raise ValueError(f"not a single-contour identity: {identity}")


def _pair_radii(y: float, outer_radius: float) -> tuple[float, float]:
    """Two disjoint concentric radii inside the given outer radius."""
    _, half = _segment(y)
    extra = outer_radius - half
    return half + 0.35 * extra, half + 0.85 * extra


def _double_integral(y: float, func: str, spec: ContourSpec,
                     nodes: int) -> complex:
    """-(1/(2 pi^2)) double contour integral of F(z1) F(z2)/(m1-m2)^2."""
    r_inner, r_outer = _pair_radii(y, spec.radius)
    inner = ContourSpec(spec.center, r_inner, spec.nodes)
    outer = ContourSpec(spec.center, r_outer, spec.nodes)
    m1, dm1, w1 = _nodes(inner, nodes)
    m2, dm2, w2 = _nodes(outer, nodes)
    z1, logz1 = _z_and_log(m1, y)
    z2, logz2 = _z_and_log(m2, y)
    if func == "f":
        F1 = _f_clrt(z1, logz1) * dm1
        F2 = _f_clrt(z2, logz2) * dm2
    else:
        F1 = _g_lw(z1, y) * dm1
        F2 = _g_lw(z2, y) * dm2
    total = 0.0 + 0.0j
    block = 512
    for start in range(0, nodes, block):
        sl = slice(start, min(start + block, nodes))
        kernel = 1.0 / (m1[:, None] - m2[None, sl]) ** 2
        total += np.sum((F1 @ kernel) * F2[sl])
    return -(w1 * w2 * total) / (2.0 * np.pi**2)


def _evaluate(identity: ContourIdentity, y: float, delta: float,
              spec: ContourSpec, nodes: int) -> complex:
    if identity is ContourIdentity.V11:
        return _double_integral(y, "f", spec, nodes)
    if identity is ContourIdentity.XG_VAR:
        main = _double_integral(y, "g", spec, nodes)
        m, dm, w = _nodes(spec, nodes)
        z, _ = _z_and_log(m, y)
        v12g = _loop_sum(_g_lw(z, y) / (1.0 + m) ** 2, dm, w)
        # correction -(y delta / 4 pi^2) (oint g/(1+m)^2 dm)^2 with
        # oint = 2 pi i * v12g; the loop integral itself vanishes
        corr = -(y * delta / (4.0 * np.pi**2)) * (2j * np.pi * v12g) ** 2
        return main + corr
    return _single_integral(identity, y, delta, spec, nodes)


def contour_integral(identity: ContourIdentity, y: float, delta: float = 0.0,
                     spec: ContourSpec | None = None, tol: float = 1e-7,
                     max_doublings: int = 4) -> float:
    """Evaluate one contour identity by trapezoid quadrature.

    Starts from ``spec.nodes`` nodes (default 512) and doubles until two
    successive values agree within ``tol``; the trapezoid rule converges
    geometrically for these periodic analytic integrands.  The two-contour
    identities (V11, XG_VAR) place a disjoint concentric pair inside the
    given radius.

    Raises
    ------
    ContourTooClose
        If the contour cannot be placed (or a supplied one is invalid).
    NonConvergent
        If doubling exhausts the budget without stabilising, or the result
        keeps an imaginary component above 1e-8.
    """
    if spec is None:
        spec = ContourSpec.for_ratio(y)
    else:
        spec.validate_for(y)
    nodes = spec.nodes
    previous = _evaluate(identity, y, delta, spec, nodes)
    for _ in range(max_doublings):
        nodes *= 2
        current = _evaluate(identity, y, delta, spec, nodes)
        if abs(current - previous) <= tol:
            if abs(current.imag) > _IMAG_TOL:
                raise NonConvergent(
                    f"imaginary residue {current.imag:.2e} exceeds {_IMAG_TOL:g}"
                )
            return float(current.real)
        previous = current
    raise NonConvergent(
        f"value did not stabilise within {tol:g} after {max_doublings} "
        f"doublings (last change {abs(current - previous):.2e})"
    )


def closed_form(identity: ContourIdentity, y: float, delta: float = 0.0) -> float:
    """Closed-form value each contour identity must reproduce."""
    if identity is ContourIdentity.M11:
        return -0.5 * np.log1p(-y)
    if identity is ContourIdentity.M12:
        return y / 2.0
    if identity is ContourIdentity.M13:
        return -y - np.log1p(-y)
    if identity is ContourIdentity.V11:
        return -2.0 * y - 2.0 * np.log1p(-y)
    if identity is ContourIdentity.V12:
        return 0.0
    if identity is ContourIdentity.XG_MEAN:
        return y * (1.0 + delta + y)
    if identity is ContourIdentity.XG_VAR:
        return 4.0 * y * y
    raise ValueError(f"unknown identity {identity!r}")


_DELTA_FREE = (
    ContourIdentity.M11,
    ContourIdentity.M12,
    ContourIdentity.M13,
    ContourIdentity.V11,
    ContourIdentity.V12,
)
_DELTA_DEPENDENT = (ContourIdentity.XG_MEAN, ContourIdentity.XG_VAR)


def verify_identities(y_values, delta_values, tol: float = 1e-6) -> list[dict]:
    """Compare every contour identity against its closed form.

    Returns one record per (identity, y) for the delta-free identities and
    per (identity, y, delta) for the fourth-moment-bearing ones.  Records
    carry the quadrature value, the closed form, the absolute difference
    and a pass flag; contour failures are reported per cell.
    """
    records = []
    for y in y_values:
        cells = [(ident, None) for ident in _DELTA_FREE]
        cells += [(ident, d) for ident in _DELTA_DEPENDENT for d in delta_values]
        for ident, d in cells:
            record = {
                "identity": ident.value,
                "y": float(y),
                "delta": None if d is None else float(d),
            }
            try:
                value = contour_integral(ident, y, 0.0 if d is None else d)
                expected = closed_form(ident, y, 0.0 if d is None else d)
                record.update(
                    value=value,
                    expected=float(expected),
                    abs_error=abs(value - expected),
                    passed=bool(abs(value - expected) <= tol),
                    error=None,
                )
            except (ContourTooClose, NonConvergent) as exc:
                record.update(value=None, expected=None, abs_error=None,
                              passed=False, error=str(exc))
            records.append(record)
    return records


# ---------------------------------------------------------------------------
# Empirical spectral distribution

@dataclass(frozen=True)
class EsdCurve:
    """Right-continuous step CDF of a finite eigenvalue list."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        arr = np.sort(np.asarray(self.eigenvalues, dtype=float))
        if arr.size == 0:
            raise ValueError("need at least one eigenvalue")
        if not np.all(np.isfinite(arr)):
            raise ValueError("eigenvalues must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "eigenvalues", arr)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        counts = np.searchsorted(self.eigenvalues, arr, side="right")
        out = counts / self.eigenvalues.size
        if np.ndim(x) == 0:
            return float(out)
        return out

    def stieltjes(self, z: complex) -> complex:
        """Empirical Stieltjes transform (1/n) sum 1/(lambda_i - z)."""
        zc = complex(z)
        if zc.imag == 0.0 and (
            self.eigenvalues[0] <= zc.real <= self.eigenvalues[-1]
        ):
            raise ValueError("z must lie off the eigenvalue support")
        return complex(np.mean(1.0 / (self.eigenvalues - zc)))


def esd(eigenvalues) -> EsdCurve:
    """Step-function ESD evaluator for a list of eigenvalues."""
    return EsdCurve(np.asarray(eigenvalues, dtype=float))
