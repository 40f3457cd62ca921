"""Random and quasi-random number generation.

Provides seedable pseudo-random streams (splittable, worker-count
independent), Gray-code Sobol' sequences with digital-shift and
nested-uniform randomization, a high-accuracy inverse normal CDF, and
permutation shuffling.  Everything downstream draws its randomness from
this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

SOBOL_BITS = 32
_SCALE = 1.0 / 2.0**SOBOL_BITS

# Quasi-random uniforms are clamped one 32-bit grid step away from {0, 1}
# before inversion, so the all-zero Sobol' point cannot produce -inf.
U_CLIP_LO = 2.0**-32 + 1e-12
U_CLIP_HI = 1.0 - 2.0**-32 - 1e-12

# the inverse CDF itself only clamps far enough to stay finite; its accuracy
# contract covers (1e-15, 1 - 1e-15)
_INV_LO = 1e-300
_INV_HI = float(np.nextafter(1.0, 0.0))


class ConfigurationError(ValueError):
    """Raised for unusable generator configurations (e.g. missing directions)."""


# ---------------------------------------------------------------------------
# pseudo-random streams
# ---------------------------------------------------------------------------

@dataclass
class PseudoStream:
    """A deterministic, splittable pseudo-random stream.

    The stream identity is (seed, key); equal identities reproduce equal
    sequences, distinct keys give statistically independent streams.  Keys
    are tuples of small integers such as (repetition, purpose, step, cell),
    hashed through ``numpy.random.SeedSequence`` so parallel workers can
    derive disjoint streams without shared state.
    """

    seed: int
    key: tuple[int, ...] = ()
    _gen: np.random.Generator | None = field(default=None, repr=False)

    def derive(self, *indices: int) -> "PseudoStream":
        """Child stream with the given indices appended to the key."""
        return PseudoStream(self.seed, self.key + tuple(int(i) for i in indices))

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def uniforms(self, n: int, dim: int | None = None) -> np.ndarray:
        shape = n if dim is None else (n, dim)
        return self.generator.random(shape)

    def shift_masks(self, dim: int) -> np.ndarray:
        """Uniform 32-bit masks for a digital shift."""
        return self.generator.integers(0, 1 << SOBOL_BITS, size=dim, dtype=np.uint32)


def pseudo_normal_block(stream: PseudoStream, n: int, dim: int | None = None) -> np.ndarray:
    """i.i.d. N(0,1) samples, deterministic per stream identity."""
    shape = n if dim is None else (n, dim)
    return stream.generator.standard_normal(shape)


def shuffle(items: np.ndarray, stream: PseudoStream) -> np.ndarray:
    """Uniform random permutation (Fisher-Yates) of ``items`` along axis 0."""
    items = np.asarray(items)
    if len(items) <= 1:
        return items.copy()
    perm = stream.generator.permutation(len(items))
    return items[perm]


# ---------------------------------------------------------------------------
# Sobol' sequences
# ---------------------------------------------------------------------------

# Joe & Kuo (2008) primitive-polynomial parameters (s, a, m_1..m_s) for
# dimensions 2 and 3; dimension 1 is the van der Corput sequence in base 2.
_JOE_KUO_DEFAULT: dict[int, tuple[int, int, tuple[int, ...]]] = {
    2: (1, 0, (1,)),
    3: (2, 1, (1, 3)),
}


def parse_direction_numbers(text: str) -> dict[int, tuple[int, int, tuple[int, ...]]]:
    """Parse the standard ``d s a m_i`` direction-number table format.

    Lines starting with non-digits (headers, comments) are skipped.  Returns
    a mapping usable as the ``table`` argument of :class:`SobolGenerator`.
    """
    table: dict[int, tuple[int, int, tuple[int, ...]]] = {}
    for line in text.splitlines():
        parts = line.split()
        if not parts or not parts[0].isdigit():
            continue
        d, s, a = int(parts[0]), int(parts[1]), int(parts[2])
        m = tuple(int(v) for v in parts[3 : 3 + s])
        if len(m) != s:
            raise ConfigurationError(f"dimension {d}: expected {s} initial m values")
        table[d] = (s, a, m)
    return table


def direction_vectors(dim: int, table=None, bits: int = SOBOL_BITS) -> np.ndarray:
    """Direction vectors as ``(dim, bits)`` uint32 fixed-point fractions."""
    if dim < 1:
        raise ConfigurationError("Sobol' dimension must be >= 1")
    table = _JOE_KUO_DEFAULT if table is None else table
    missing = [d for d in range(2, dim + 1) if d not in table]
    if missing:
        raise ConfigurationError(f"no direction numbers for dimensions {missing}")
    vs = np.zeros((dim, bits), dtype=np.uint64)
    vs[0] = [1 << (bits - 1 - k) for k in range(bits)]  # van der Corput
    for d in range(2, dim + 1):
        s, a, m_init = table[d]
        m = list(m_init)
        for k in range(s, bits):
            val = ((1 << s) * m[k - s]) ^ m[k - s]
            for j in range(1, s):
                if (a >> (s - 1 - j)) & 1:
                    val ^= (1 << j) * m[k - j]
            m.append(val)
        vs[d - 1] = [m[k] << (bits - 1 - k) for k in range(bits)]
    return vs.astype(np.uint32)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (x + np.uint64(0x9E3779B97F4A7C15)).astype(np.uint64)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def nested_uniform_scramble(raw: np.ndarray, key: int) -> np.ndarray:
    """Hash-based nested uniform scramble of 32-bit fractions.

    Each bit of every value is flipped by a pseudo-random function of the
    more significant bits, which randomizes points independently within
    every dyadic refinement while preserving net structure.  Used by the
    static sampling demo; the simulator strategies use plain digital shifts.
    """
    x = raw.astype(np.uint64)
    out = np.zeros_like(x)
    kv = np.uint64(key)
    for j in range(SOBOL_BITS):
        prefix = x >> np.uint64(SOBOL_BITS - j)
        h = _splitmix64(prefix ^ _splitmix64(np.uint64(j) ^ kv))
        bit = (x >> np.uint64(SOBOL_BITS - 1 - j)) & np.uint64(1)
        out |= (bit ^ (h & np.uint64(1))) << np.uint64(SOBOL_BITS - 1 - j)
    return out.astype(np.uint32)


@dataclass
class SobolGenerator:
    """Gray-code Sobol' sequence generator with 32-bit resolution.

    Points are emitted at consecutive indices in Gray-code order, so block
    generation needs no sequential dependence.  An optional digital shift
    (bitwise XOR with per-dimension masks) or nested-uniform scramble
    randomizes the stream; with neither, output matches the published
    Joe-Kuo reference values.
    """

    dim: int
    index: int = 0
    shift: np.ndarray | None = None
    scramble_keys: np.ndarray | None = None
    table: dict | None = None
    _vectors: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self._vectors is None:
            self._vectors = direction_vectors(self.dim, self.table)

    def raw_block(self, n: int, start: int | None = None) -> np.ndarray:
        """Unrandomized points as uint32 fractions, shape ``(n, dim)``.

        Advances the generator index unless ``start`` is given.
        """
        if n < 1:
            raise ValueError("block size must be >= 1")
        advance = start is None
        start = self.index if start is None else start
        if start + n >= 1 << 63:
            raise ConfigurationError("Sobol' index overflow")
        idx = np.arange(start, start + n, dtype=np.uint64)
        gray = idx ^ (idx >> np.uint64(1))
        out = np.zeros((n, self.dim), dtype=np.uint32)
        for b in range(SOBOL_BITS):
            mask = ((gray >> np.uint64(b)) & np.uint64(1)).astype(bool)
            if mask.any():
                out[mask] ^= self._vectors[:, b]
        if advance:
            self.index = start + n
        return out

    def next_block(self, n: int) -> np.ndarray:
        """Next ``n`` randomized points in [0,1)^dim as float64."""
        raw = self.raw_block(n)
        if self.scramble_keys is not None:
            for d in range(self.dim):
                raw[:, d] = nested_uniform_scramble(raw[:, d], int(self.scramble_keys[d]))
        elif self.shift is not None:
            raw ^= self.shift
        return raw.astype(np.float64) * _SCALE

    def with_digital_shift(self, source: PseudoStream) -> "SobolGenerator":
        """Copy of this generator with a fresh digital shift drawn from ``source``."""
        return SobolGenerator(self.dim, index=self.index,
                              shift=source.shift_masks(self.dim),
                              table=self.table, _vectors=self._vectors)

    def with_nested_scramble(self, source: PseudoStream) -> "SobolGenerator":
        """Copy with hash-based nested uniform scrambling keyed from ``source``."""
        keys = source.generator.integers(0, 1 << 62, size=self.dim, dtype=np.uint64)
        return SobolGenerator(self.dim, index=self.index, scramble_keys=keys,
                              table=self.table, _vectors=self._vectors)


def sobol_next_block(gen: SobolGenerator, n: int) -> np.ndarray:
    """Functional alias for :meth:`SobolGenerator.next_block`."""
    return gen.next_block(n)


def apply_digital_shift(gen: SobolGenerator, source: PseudoStream) -> SobolGenerator:
    """Functional alias for :meth:`SobolGenerator.with_digital_shift`."""
    return gen.with_digital_shift(source)


# ---------------------------------------------------------------------------
# inverse normal CDF
# ---------------------------------------------------------------------------

# Acklam's rational approximation coefficients; accuracy ~1.15e-9 relative,
# brought to machine precision by one Halley refinement step.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_TAIL = 0.02425
_SQRT_2PI = np.sqrt(2.0 * np.pi)


def inverse_normal_cdf(u):
    """Standard normal quantile function, |error| <= 1e-9 on (1e-15, 1-1e-15).

    Inputs inside (0,1) are clamped away from the endpoints (see module
    constants); anything else is a domain error.  The upper half is mirrored
    onto the lower half (1-u is exact for u >= 0.5) so the refinement step
    keeps full relative precision in both tails.
    """
    scalar = np.isscalar(u)
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if np.any(~np.isfinite(u)) or np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("inverse_normal_cdf requires probabilities in (0, 1)")
    u = np.clip(u, _INV_LO, _INV_HI)
    flip = u > 0.5
    p = np.where(flip, 1.0 - u, u)
    x = np.empty_like(p)
    tail = p < _P_TAIL
    mid = ~tail
    if mid.any():
        q = p[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = q * num / den
    if tail.any():
        q = np.sqrt(-2.0 * np.log(p[tail]))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        x[tail] = num / den
    phi = np.exp(-0.5 * x * x) / _SQRT_2PI
    err = (ndtr(x) - p) / phi
    x -= err / (1.0 + 0.5 * x * err)
    out = np.where(flip, -x, x)
    return float(out[0]) if scalar else out
