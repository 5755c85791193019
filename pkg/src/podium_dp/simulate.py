"""Seeded simulation harness behind ``podium-dp simulate``.

Seeding rule: records are grouped into blocks of :data:`BLOCK_SIZE`
consecutive indices. Block ``b`` draws from
``Generator(PCG64(SeedSequence(seed, spawn_key=(b,))))``, one row of uniforms
per record: first the input draws (3 for ``beta22``, 1 for ``uniform``,
none for ``fixed``), then the mechanism draws (2 for Podium and Laplace,
4 for Staircase). Workers process whole blocks, so any worker count yields
the same records.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .baselines import (
    laplace_variance,
    sample_laplace_batch,
    sample_staircase_batch,
    staircase_shape,
    staircase_variance,
)
from .core import Mechanism, PrivacyParams
from .errors import InvalidParameter
from .podium import SolverMode, compute_shape, sample_batch
from .verify import PodiumDensity, expected_noise_variance, variance_oracle

BLOCK_SIZE = 1 << 16

_INPUT_DRAWS = {"beta22": 3, "uniform": 1, "fixed": 0}
_MECH_DRAWS = {
    Mechanism.PODIUM_EXACT: 2,
    Mechanism.PODIUM_APPROX: 2,
    Mechanism.LAPLACE: 2,
    Mechanism.STAIRCASE: 4,
}


@dataclass(frozen=True)
class InputDist:
    kind: str
    value: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "InputDist":
        text = text.strip()
        for sep in ("=", ":"):
            if text.startswith("fixed" + sep):
                return cls("fixed", float(text[len("fixed") + 1:]))
        if text in ("beta22", "uniform"):
            return cls(text)
        raise InvalidParameter(f"unknown input distribution {text!r}")

    def __str__(self) -> str:
        return f"fixed={self.value!r}" if self.kind == "fixed" else self.kind


@dataclass(frozen=True)
class ExperimentConfig:
    mechanism: Mechanism
    epsilon: float
    n: int
    seed: int = 0
    input_dist: InputDist = InputDist("beta22")
    out_path: Path | None = None
    delta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        if self.n < 1:
            raise InvalidParameter(f"n must be >= 1, got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        PrivacyParams(self.epsilon, self.delta)
        if self.input_dist.kind == "fixed" and abs(self.input_dist.value) > self.delta / 2:
            raise InvalidParameter(
                f"fixed input {self.input_dist.value} outside [-{self.delta / 2}, {self.delta / 2}]"
            )

    @property
    def params(self) -> PrivacyParams:
        return PrivacyParams(self.epsilon, self.delta)


class ExperimentRecord(NamedTuple):
    raw_x: float
    privatized_x: float
    mechanism: Mechanism
    epsilon: float


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def beta22_from_uniforms(u: np.ndarray) -> np.ndarray:
    """Median of three uniforms, which is exactly Beta(2, 2)."""
    return np.median(u, axis=1)


def _inputs(cfg: ExperimentConfig, u: np.ndarray, n: int) -> np.ndarray:
    kind = cfg.input_dist.kind
    if kind == "beta22":
        return cfg.delta * (beta22_from_uniforms(u) - 0.5)
    if kind == "uniform":
        return cfg.delta * (u[:, 0] - 0.5)
    return np.full(n, cfg.input_dist.value)


class _Privatizer:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        mech = cfg.mechanism
        if mech in (Mechanism.PODIUM_EXACT, Mechanism.PODIUM_APPROX):
            mode = SolverMode.EXACT if mech is Mechanism.PODIUM_EXACT else SolverMode.APPROXIMATE
            self.shape = compute_shape(cfg.params, mode)
        elif mech is Mechanism.STAIRCASE:
            self.shape = staircase_shape(cfg.params)
        else:
            self.shape = None

    def __call__(self, xs: np.ndarray, u: np.ndarray) -> np.ndarray:
        mech = self.cfg.mechanism
        if mech is Mechanism.LAPLACE:
            return sample_laplace_batch(self.cfg.params, xs, u)
        if mech is Mechanism.STAIRCASE:
            return sample_staircase_batch(self.shape, xs, u)
        return sample_batch(self.shape, xs, u)

    def noise_variance(self) -> float:
        """Expected noise variance averaged over the input distribution."""
        cfg = self.cfg
        mech = cfg.mechanism
        if mech is Mechanism.LAPLACE:
            return laplace_variance(cfg.params)
        if mech is Mechanism.STAIRCASE:
            return staircase_variance(cfg.params)
        dens = PodiumDensity(self.shape)
        half = cfg.delta / 2
        kind = cfg.input_dist.kind
        if kind == "fixed":
            return variance_oracle(dens, cfg.input_dist.value).value
        if kind == "uniform":
            return expected_noise_variance(dens, lambda x: np.full_like(x, 1.0 / cfg.delta), -half, half)
        return expected_noise_variance(dens, lambda x: beta22_pdf(x, cfg.delta), -half, half)


def beta22_pdf(x, delta: float = 1.0):
    """Density of ``delta * (B - 1/2)`` with ``B ~ Beta(2, 2)``."""
    b = np.asarray(x) / delta + 0.5
    return np.where((b >= 0) & (b <= 1), 6.0 * b * (1.0 - b), 0.0) / delta


def input_variance(cfg: ExperimentConfig) -> float:
    kind = cfg.input_dist.kind
    if kind == "beta22":
        return cfg.delta**2 / 20.0
    if kind == "uniform":
        return cfg.delta**2 / 12.0
    return 0.0


def _run_block(cfg: ExperimentConfig, priv: _Privatizer, block: int) -> tuple[np.ndarray, np.ndarray]:
    start = block * BLOCK_SIZE
    nb = min(BLOCK_SIZE, cfg.n - start)
    k_in = _INPUT_DRAWS[cfg.input_dist.kind]
    u = block_rng(cfg.seed, block).random((nb, k_in + _MECH_DRAWS[cfg.mechanism]))
    xs = _inputs(cfg, u[:, :k_in], nb)
    return xs, priv(xs, np.ascontiguousarray(u[:, k_in:]))


def iter_blocks(cfg: ExperimentConfig, workers: int = 1) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(raw, privatized)`` arrays block by block, in index order."""
    priv = _Privatizer(cfg)
    n_blocks = -(-cfg.n // BLOCK_SIZE)
    if workers <= 1:
        for b in range(n_blocks):
            yield _run_block(cfg, priv, b)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(lambda b: _run_block(cfg, priv, b), range(n_blocks))


def run(cfg: ExperimentConfig, workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    raw, out = zip(*iter_blocks(cfg, workers))
    return np.concatenate(raw), np.concatenate(out)


class Summary(NamedTuple):
    n: int
    mean: float
    variance: float
    expected_variance: float
    input_variance: float
    noise_variance: float

    def line(self, cfg: ExperimentConfig) -> str:
        return (
            f"mechanism={cfg.mechanism} epsilon={cfg.epsilon!r} delta={cfg.delta!r} "
            f"n={self.n} seed={cfg.seed} dist={cfg.input_dist} mean={self.mean!r} "
            f"variance={self.variance!r} expected_variance={self.expected_variance!r} "
            f"input_variance={self.input_variance!r} noise_variance={self.noise_variance!r}"
        )


def write_records(cfg: ExperimentConfig, fh, workers: int = 1) -> Summary:
    """Stream records as CSV to ``fh`` and return summary statistics."""
    fh.write("raw_x,privatized_x,mechanism,epsilon\n")
    tail = f",{cfg.mechanism},{cfg.epsilon!r}\n"
    chunks = []
    for raw, out in iter_blocks(cfg, workers):
        fh.write("".join(f"{r!r},{o!r}{tail}" for r, o in zip(raw.tolist(), out.tolist())))
        chunks.append(out)
    out = np.concatenate(chunks)
    mean = float(out.mean())
    var = float(out.var(ddof=1)) if out.size > 1 else 0.0
    noise = _Privatizer(cfg).noise_variance()
    vx = input_variance(cfg)
    return Summary(out.size, mean, var, vx + noise, vx, noise)


def summarize(cfg: ExperimentConfig, workers: int = 1) -> Summary:
    """Like :func:`write_records` without writing anything."""
    _, out = run(cfg, workers)
    noise = _Privatizer(cfg).noise_variance()
    vx = input_variance(cfg)
    var = float(out.var(ddof=1)) if out.size > 1 else 0.0
    return Summary(out.size, float(out.mean()), var, vx + noise, vx, noise)
