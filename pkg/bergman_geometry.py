"""Complex (Bergman) ball primitives: P_a/Q_a, the automorphisms p_a, d_B and the Jacobian.

Conventions: <z, w> = sum z_k conj(w_k) (linear in the first slot) and points are
complex arrays of shape (..., m). Complex points meet real arithmetic through
`to_real`/`from_real`, which interleave (Re z1, Im z1, Re z2, Im z2, ...).
"""

from dataclasses import dataclass

import numpy as np

from ball_geometry import RANDOM_CENTER_RADIUS, _vectors, check_interior, sample_ball_points
from exceptions import DimensionMismatchError, ValidationError

# Config
UNITARITY_TOL = 1e-12


def _complex(*arrays):
    return _vectors(*arrays, dtype=complex)


@dataclass(frozen=True, eq=False)
class ComplexPoint:
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=complex)
        if coords.ndim != 1 or coords.size < 1:
            raise ValidationError(f"a complex ball point needs m >= 1 coordinates, got shape {coords.shape}")
        check_interior(coords)
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self):
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)


@dataclass(frozen=True, eq=False)
class ComplexAutomorphism:
    center: np.ndarray
    unitary_part: np.ndarray = None

    def __post_init__(self):
        center = ComplexPoint(self.center).coords
        m = center.size
        if self.unitary_part is None:
            matrix = np.eye(m, dtype=complex)
        else:
            matrix = np.array(self.unitary_part, dtype=complex)
        if matrix.shape != (m, m):
            raise DimensionMismatchError(f"unitary part must be {m}x{m}, got shape {matrix.shape}")
        defect = np.max(np.abs(matrix.conj().T @ matrix - np.eye(m)))
        if defect > UNITARITY_TOL:
            raise ValidationError(f"unitary part is not unitary (defect {defect:.3e})")
        matrix.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "unitary_part", matrix)

    @property
    def dim(self):
        return self.center.size

    @classmethod
    def identity(cls, m):
        return cls(np.zeros(m, dtype=complex))


def inner(z, w):
    z, w = _complex(z, w)
    return np.sum(z * np.conj(w), axis=-1)


def project_parallel(a, z):
    """P_a(z) = (<z, a> / <a, a>) a, with P_0 = 0."""
    a, z = _complex(a, z)
    norm_sq = np.real(inner(a, a))
    safe = np.where(norm_sq > 0.0, norm_sq, 1.0)
    coefficient = np.where(norm_sq > 0.0, inner(z, a) / safe, 0.0)
    return coefficient[..., None] * a


def bergman_automorphism(a, z):
    """The involution p_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>), s_a = sqrt(1 - |a|^2).

    For m = 1 this is the disk map (a - z) / (1 - conj(a) z).
    """
    a, z = _complex(a, z)
    s = np.sqrt(1.0 - np.real(inner(a, a)))
    parallel = project_parallel(a, z)
    orthogonal = z - parallel
    return (a - parallel - s[..., None] * orthogonal) / (1.0 - inner(z, a))[..., None]


def bergman_distance(z, w):
    """d_B(z, w) = 1/2 log((1 + |p_w(z)|) / (1 - |p_w(z)|))."""
    z, w = _complex(z, w)
    radius = np.linalg.norm(bergman_automorphism(w, z), axis=-1)
    return np.arctanh(np.minimum(radius, 1.0))


def apply_automorphism(q, z):
    _, z = _complex(q.center, z)
    return bergman_automorphism(q.center, z) @ q.unitary_part.T


def apply_inverse_automorphism(q, w):
    _, w = _complex(q.center, w)
    return bergman_automorphism(q.center, w @ q.unitary_part.conj())


def bergman_jacobian(a, z):
    """Real Jacobian of w = p_a(z): ((1 - |a|^2) / |1 - <z, a>|^2)^(m+1)."""
    a, z = _complex(a, z)
    m = z.shape[-1]
    return ((1.0 - np.real(inner(a, a))) / np.abs(1.0 - inner(z, a)) ** 2) ** (m + 1)


def random_automorphism(seed, m):
    if m < 1:
        raise ValidationError(f"complex balls need m >= 1, got {m}")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    direction /= np.linalg.norm(direction)
    center = RANDOM_CENTER_RADIUS * rng.random() * direction
    q, r = np.linalg.qr((rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2.0))
    diagonal = np.diag(r)
    q = q * (diagonal / np.abs(diagonal))
    return ComplexAutomorphism(center, q)


def disk_automorphism(a, theta=0.0):
    return ComplexAutomorphism(np.array([complex(a)]), np.array([[np.exp(1j * theta)]]))


def geodesic(a, b, t):
    """Geodesic from a to b at parameters t, through p_a-conjugation of a radial segment."""
    a, b = _complex(a, b)
    t = np.asarray(t, dtype=float)
    local = bergman_automorphism(a, b)
    radius = np.linalg.norm(local)
    if radius == 0.0:
        return np.broadcast_to(a, t.shape + a.shape).copy()
    scale = np.tanh(t * np.arctanh(radius)) / radius
    return bergman_automorphism(a, scale[..., None] * local)


def to_real(z):
    z = np.asarray(z, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1).reshape(*z.shape[:-1], 2 * z.shape[-1])


def from_real(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] % 2:
        raise DimensionMismatchError(f"real coordinates of a complex point come in pairs, got {x.shape[-1]}")
    pairs = x.reshape(*x.shape[:-1], x.shape[-1] // 2, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


def sample_complex_ball_points(rng, count, m, max_norm=RANDOM_CENTER_RADIUS):
    return from_real(sample_ball_points(rng, count, 2 * m, max_norm))
