"""The six interchangeable noise-sampling strategies.

Every strategy produces per-cell blocks of standard-normal triples aligned
to the cell's particle order, plus the uniforms used for initialization and
wall reflections.  A strategy object belongs to one repetition; all its
randomness derives from (seed, repetition, purpose, step, cell) keys, so
results never depend on worker count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .morton import grid_resolution, morton_encode, normalize_velocity, radix_sort_keys
from .rng import (SOBOL_BITS, PseudoStream, SobolGenerator, U_CLIP_HI, U_CLIP_LO,
                  inverse_normal_cdf)

STRATEGY_NAMES = ("pseudo", "pseudo-normalized", "pseudo-antithetic",
                  "control-variate", "qmc-shuffled", "array-rqmc")

# stream purposes (second key component after the repetition index)
INIT_VEL, INIT_POS, NOISE, SHIFT, SHUFFLE, WALL, CUT = range(7)

_FACE_ID = {"lower": 0, "upper": 1}
_WALL_REFILL = 4096

_SOBOL3 = SobolGenerator(3)
_SOBOL1 = SobolGenerator(1)


@dataclass
class NoiseRequest:
    """One cell's demand for a noise block at a given step."""

    repetition: int
    step: int
    cell: int
    n: int
    velocities: np.ndarray | None = None  # (n, 3) view in the cell's stable order
    mean: np.ndarray | None = None        # (3,) cell mean velocity
    stddev: np.ndarray | None = None      # (3,) per-component standard deviation


@dataclass
class ControlEnsemble:
    """Shadow process with analytically known moments, sharing the target's noise."""

    velocities: np.ndarray        # (n, 3)
    moments_scaled: np.ndarray    # (12,) equilibrium record in scaled units


def _shifted_uniforms(base: SobolGenerator, n: int, shift_stream: PseudoStream,
                      start: int = 1) -> np.ndarray:
    """Digitally shifted Sobol' block at indices start..start+n-1, clamped."""
    raw = base.raw_block(n, start=start) ^ shift_stream.shift_masks(base.dim)
    u = raw.astype(np.float64) * 2.0**-SOBOL_BITS
    return np.clip(u, U_CLIP_LO, U_CLIP_HI)


class NoiseStrategy:
    """Pseudo-random baseline; subclasses override the block construction."""

    name = "pseudo"
    uses_qmc = False

    def __init__(self, root: PseudoStream, repetition: int, homogeneous: bool):
        self.root = root
        self.repetition = repetition
        self.homogeneous = homogeneous
        self._wall_gens: dict[str, np.random.Generator] = {}

    def _stream(self, purpose: int, step: int = 0, cell: int = 0) -> PseudoStream:
        return self.root.derive(self.repetition, purpose, step, cell)

    # --- noise blocks ------------------------------------------------------
    def noise_block(self, req: NoiseRequest) -> np.ndarray:
        if req.n == 0:
            return np.empty((0, 3))
        return self._stream(NOISE, req.step, req.cell).generator.standard_normal((req.n, 3))

    # --- initialization and wall sampling ----------------------------------
    def init_velocity_uniforms(self, n: int) -> np.ndarray:
        return self._stream(INIT_VEL).uniforms(n, 3)

    def init_position_uniforms(self, n: int) -> np.ndarray:
        return self._stream(INIT_POS).uniforms(n)

    def wall_uniforms(self, face: str, n: int) -> np.ndarray:
        """Sequential per-wall uniforms, consumed across the whole repetition."""
        gen = self._wall_gens.get(face)
        if gen is None:
            gen = self._stream(WALL, 0, _FACE_ID[face]).generator
            self._wall_gens[face] = gen
        return gen.random((n, 3))

    # --- hooks used by the control-variate machinery ------------------------
    def on_velocity_update(self, alpha, beta, mean, xi) -> None:
        pass

    @property
    def control(self) -> ControlEnsemble | None:
        return None


class NormalizedStrategy(NoiseStrategy):
    """Pseudo noise affinely forced to exact zero mean and unit variance."""

    name = "pseudo-normalized"

    def noise_block(self, req: NoiseRequest) -> np.ndarray:
        block = super().noise_block(req)
        if req.n < 2:
            return block  # normalization undefined; plain pseudo fallback
        block = block - block.mean(axis=0)
        std = block.std(axis=0)
        return block / np.where(std > 0.0, std, 1.0)


class AntitheticStrategy(NoiseStrategy):
    """Noise generated in (xi, -xi) pairs.

    Homogeneous runs pair particles (i, i + n//2) persistently, so whole
    trajectories stay negatively coupled; inhomogeneous runs re-pair
    consecutive particles of each cell every step, keeping only the
    symmetric sampling distribution.
    """

    name = "pseudo-antithetic"

    def noise_block(self, req: NoiseRequest) -> np.ndarray:
        n = req.n
        if n == 0:
            return np.empty((0, 3))
        gen = self._stream(NOISE, req.step, req.cell).generator
        half = n // 2
        xi = gen.standard_normal((half, 3))
        block = np.empty((n, 3))
        if self.homogeneous:
            block[:half] = xi
            block[half : 2 * half] = -xi
        else:
            block[0 : 2 * half : 2] = xi
            block[1 : 2 * half : 2] = -xi
        if n % 2:
            block[-1] = gen.standard_normal(3)
        return block


class ControlVariateStrategy(NoiseStrategy):
    """Pseudo noise shared with a control process at frozen coefficients.

    The control starts from the equilibrium-scaled copy of the initial
    ensemble and consumes exactly the same noise, so reported moments can
    subtract the strongly correlated control estimate and add back its
    analytically known equilibrium value.  Restricted to the
    constant-coefficient homogeneous configuration.
    """

    name = "control-variate"

    def __init__(self, root, repetition, homogeneous):
        if not homogeneous:
            raise ValueError("control-variate requires the constant-coefficient "
                             "homogeneous configuration")
        super().__init__(root, repetition, homogeneous)
        self._control: ControlEnsemble | None = None

    def set_control(self, velocities: np.ndarray, moments_scaled: np.ndarray) -> None:
        self._control = ControlEnsemble(np.array(velocities), np.asarray(moments_scaled))

    def on_velocity_update(self, alpha, beta, mean, xi) -> None:
        c = self._control
        if c is None:
            raise RuntimeError("control ensemble was never initialized")
        c.velocities = mean + (c.velocities - mean) * alpha + beta * xi

    @property
    def control(self) -> ControlEnsemble | None:
        return self._control


class ShuffledQmcStrategy(NoiseStrategy):
    """Fresh digitally shifted Sobol' points each step, order randomized."""

    name = "qmc-shuffled"
    uses_qmc = True

    def __init__(self, root, repetition, homogeneous):
        super().__init__(root, repetition, homogeneous)
        self._wall_bufs: dict[str, dict] = {}

    def _block_uniforms(self, req: NoiseRequest) -> np.ndarray:
        shift = self._stream(SHIFT, req.step, req.cell)
        return _shifted_uniforms(_SOBOL3, req.n, shift)

    def noise_block(self, req: NoiseRequest) -> np.ndarray:
        if req.n == 0:
            return np.empty((0, 3))
        xi = inverse_normal_cdf(self._block_uniforms(req))
        perm = self._stream(SHUFFLE, req.step, req.cell).generator.permutation(req.n)
        return xi[perm]

    def init_velocity_uniforms(self, n: int) -> np.ndarray:
        return _shifted_uniforms(_SOBOL3, n, self._stream(INIT_VEL))

    def init_position_uniforms(self, n: int) -> np.ndarray:
        return _shifted_uniforms(_SOBOL1, n, self._stream(INIT_POS))[:, 0]

    def wall_uniforms(self, face: str, n: int) -> np.ndarray:
        state = self._wall_bufs.get(face)
        if state is None:
            masks = self._stream(WALL, 0, _FACE_ID[face]).shift_masks(3)
            state = self._wall_bufs[face] = {"masks": masks, "index": 1,
                                             "queue": np.empty((0, 3))}
        while len(state["queue"]) < n:
            raw = _SOBOL3.raw_block(_WALL_REFILL, start=state["index"]) ^ state["masks"]
            state["index"] += _WALL_REFILL
            u = np.clip(raw.astype(np.float64) * 2.0**-SOBOL_BITS, U_CLIP_LO, U_CLIP_HI)
            state["queue"] = np.concatenate([state["queue"], u])
        out = state["queue"][:n]
        state["queue"] = state["queue"][n:]
        return out


class ArrayRqmcStrategy(ShuffledQmcStrategy):
    """Array-RQMC: Sobol' points paired to particles through the Morton order.

    Per cell and step: choose the grid resolution from the particle count,
    normalize each velocity with the cell mean and per-component spread,
    Morton-encode and radix-sort to rank the particles, then hand the
    sequence-rank-r Sobol' point (fresh digital shift, inverse-CDF
    transformed) to the particle of Morton rank r.
    """

    name = "array-rqmc"

    def noise_block(self, req: NoiseRequest) -> np.ndarray:
        if req.n == 0:
            return np.empty((0, 3))
        xi = inverse_normal_cdf(self._block_uniforms(req))
        if req.n == 1:
            return xi
        p = grid_resolution(req.n)
        scaled = normalize_velocity(req.velocities, req.mean, req.stddev)
        keys = morton_encode(scaled, p)
        perm = radix_sort_keys(keys, key_bits=3 * p)
        block = np.empty_like(xi)
        block[perm] = xi
        return block


_REGISTRY = {
    "pseudo": NoiseStrategy,
    "pseudo-normalized": NormalizedStrategy,
    "pseudo-antithetic": AntitheticStrategy,
    "control-variate": ControlVariateStrategy,
    "qmc-shuffled": ShuffledQmcStrategy,
    "array-rqmc": ArrayRqmcStrategy,
}


def make_strategy(name: str, root: PseudoStream, repetition: int,
                  homogeneous: bool) -> NoiseStrategy:
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown strategy {name!r}; choose from {STRATEGY_NAMES}") from None
    return cls(root, repetition, homogeneous)


def control_variate_estimate(target_record: np.ndarray, control_record: np.ndarray,
                             control_moments: np.ndarray) -> np.ndarray:
    """Combine target and control estimates: g(M) - g(M_c) + mu_c."""
    return target_record - control_record + control_moments
