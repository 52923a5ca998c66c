"""Stochastic simulation (Gillespie direct method) and ensemble estimators.

The inner loop lives in the compiled ``_ssa_kernel`` when it is available and in
``_ssa_py`` otherwise; set ``CRNKIT_PURE_PYTHON=1`` to force the fallback.  Both
consume the same Philox stream, so trajectories agree bit for bit.

Each trajectory gets its own Philox generator keyed by
``SeedSequence(master_seed, spawn_key=(index,))``, which makes ensembles
independent of how trajectories are scheduled.
"""
from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _ssa_py
from .network import ReactionNetwork

if os.environ.get("CRNKIT_PURE_PYTHON"):
    _kernel = None
else:
    try:
        from . import _ssa_kernel as _kernel
    except ImportError:  # extension not built
        _kernel = None

BACKEND = "cython" if _kernel is not None else "python"
RNG_NAME = "philox4x64-seedsequence-v1"


def available_backends() -> list[str]:
    return ["cython", "python"] if _kernel is not None else ["python"]


def _runner(backend: str | None):
    backend = backend or BACKEND
    if backend == "cython":
        if _kernel is None:
            raise RuntimeError("compiled SSA kernel is not available")
        return _kernel.run_direct
    if backend == "python":
        return _ssa_py.run_direct
    raise ValueError(f"unknown backend {backend!r}")


def trajectory_bitgen(master_seed: int, index: int) -> np.random.Philox:
    return np.random.Philox(np.random.SeedSequence(entropy=master_seed, spawn_key=(index,)))


def _arrays(net: ReactionNetwork):
    reactants = np.array([r.source for r in net.reactions], dtype=np.int64).reshape(net.n_reactions, net.n_species)
    jumps = np.array([r.gamma for r in net.reactions], dtype=np.int64).reshape(net.n_reactions, net.n_species)
    kt = np.array([float(r.kappa_tilde) for r in net.reactions], dtype=np.float64)
    return reactants, jumps, kt


def _check_state(net: ReactionNetwork, k0) -> np.ndarray:
    k0 = np.asarray(k0, dtype=np.int64)
    if k0.shape != (net.n_species,):
        raise ValueError(f"initial state must have {net.n_species} entries")
    if (k0 < 0).any():
        raise ValueError("initial state must be nonnegative")
    return k0


def default_horizon(net: ReactionNetwork) -> float:
    """Burn-in heuristic: 20 over the slowest degradation rate (any rate if none)."""
    rates = [float(r.rate) for r in net.reactions if r.is_degradation]
    if not rates:
        rates = [float(r.rate) for r in net.reactions]
    return 20.0 / min(rates) if rates else 0.0


@dataclass(frozen=True)
class Trajectory:
    """Jump chain of one run: ``states[i]`` holds on ``[times[i], times[i+1])``."""

    species: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    horizon: float
    seed: tuple[int, int]

    @property
    def n_events(self) -> int:
        return len(self.times) - 1

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def state_at(self, t: float) -> np.ndarray:
        if t < 0 or t > self.horizon:
            raise ValueError("time outside [0, horizon]")
        return self.states[np.searchsorted(self.times, t, side="right") - 1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.species])
        for t, k in zip(self.times, self.states):
            w.writerow([repr(float(t)), *map(int, k)])
        w.writerow([repr(float(self.horizon)), *map(int, self.states[-1])])
        return buf.getvalue()


def ssa_run(
    net: ReactionNetwork,
    k0: Sequence[int],
    horizon: float,
    seed: int,
    index: int = 0,
    backend: str | None = None,
) -> Trajectory:
    k0 = _check_state(net, k0)
    reactants, jumps, kt = _arrays(net)
    bg = trajectory_bitgen(seed, index)
    _, _, times, states = _runner(backend)(
        reactants, jumps, kt, k0, np.array([float(horizon)]), bg, True
    )
    return Trajectory(net.species, times, states, float(horizon), (seed, index))


@dataclass(frozen=True)
class SsaEnsemble:
    species: tuple[str, ...]
    times: np.ndarray
    samples: np.ndarray  # (trajectories, times, species)
    master_seed: int
    k0: tuple[int, ...]
    n_events: int
    backend: str

    @property
    def size(self) -> int:
        return self.samples.shape[0]

    def seeds(self) -> list[tuple[int, int]]:
        return [(self.master_seed, i) for i in range(self.size)]

    def _slice(self, t: float | None) -> np.ndarray:
        if t is None:
            return self.samples[:, -1, :]
        hits = np.flatnonzero(np.isclose(self.times, t, rtol=0, atol=1e-12))
        if not len(hits):
            raise KeyError(f"time {t} was not sampled")
        return self.samples[:, hits[0], :]

    def monomial_values(self, u: Sequence[int], t: float | None = None) -> np.ndarray:
        k = self._slice(t).astype(np.float64)
        return np.prod(k ** np.asarray(u, dtype=np.float64), axis=1)

    def estimate_moments(self, u: Sequence[int], t: float | None = None) -> tuple[float, float]:
        """Sample mean of ``S^u`` and its standard error."""
        x = self.monomial_values(u, t)
        if len(x) < 2:
            return float(x.mean()), 0.0
        return float(x.mean()), float(x.std(ddof=1) / np.sqrt(len(x)))

    def estimate_variance(self, j: int, t: float | None = None) -> tuple[float, float]:
        """Sample variance of species ``j`` with a delta-method standard error."""
        x = self._slice(t)[:, j].astype(np.float64)
        N = len(x)
        d = x - x.mean()
        var = float(d.var(ddof=1))
        m4 = float((d ** 4).mean())
        se = float(np.sqrt(max(m4 - var * var, 0.0) / N))
        return var, se

    def estimate_distribution(self, t: float | None = None) -> dict[tuple[int, ...], float]:
        states, counts = np.unique(self._slice(t), axis=0, return_counts=True)
        return {tuple(int(x) for x in s): c / self.size for s, c in zip(states, counts)}

    def estimate_marginal(self, j: int, t: float | None = None) -> dict[int, float]:
        values, counts = np.unique(self._slice(t)[:, j], return_counts=True)
        return {int(v): c / self.size for v, c in zip(values, counts)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trajectory", "t", *self.species])
        for i in range(self.size):
            for q, t in enumerate(self.times):
                w.writerow([i, repr(float(t)), *map(int, self.samples[i, q])])
        return buf.getvalue()

    def summary(self) -> dict:
        out = {
            "backend": self.backend,
            "rng": RNG_NAME,
            "master_seed": self.master_seed,
            "trajectories": self.size,
            "k0": list(self.k0),
            "events": self.n_events,
            "times": [repr(float(t)) for t in self.times],
            "mean": {},
            "variance": {},
        }
        for j, s in enumerate(self.species):
            e = np.zeros(len(self.species), dtype=int)
            e[j] = 1
            out["mean"][s] = repr(self.estimate_moments(e, None)[0])
            out["variance"][s] = repr(self.estimate_variance(j, None)[0]) if self.size > 1 else "0.0"
        return out


def simulate_ensemble(
    net: ReactionNetwork,
    k0: Sequence[int],
    trajectories: int,
    seed: int,
    times: Iterable[float] | None = None,
    horizon: float | None = None,
    backend: str | None = None,
    n_jobs: int = 1,
) -> SsaEnsemble:
    """Run ``trajectories`` independent runs and keep the states at ``times``.

    Without ``times`` only the state at ``horizon`` (default
    :func:`default_horizon`) is stored.
    """
    k0 = _check_state(net, k0)
    if times is None:
        times = [default_horizon(net) if horizon is None else float(horizon)]
    times = np.array(sorted(float(t) for t in times), dtype=np.float64)
    if len(times) == 0 or times[0] < 0:
        raise ValueError("need at least one nonnegative sample time")
    reactants, jumps, kt = _arrays(net)
    run = _runner(backend)
    samples = np.zeros((trajectories, len(times), net.n_species), dtype=np.int64)
    events = np.zeros(trajectories, dtype=np.int64)

    def work(lo: int, hi: int):
        for i in range(lo, hi):
            s, nev, _, _ = run(reactants, jumps, kt, k0, times, trajectory_bitgen(seed, i), False)
            samples[i] = s
            events[i] = nev

    if n_jobs > 1 and trajectories > 1:
        bounds = np.linspace(0, trajectories, n_jobs + 1).astype(int)
        with ThreadPoolExecutor(n_jobs) as pool:
            list(pool.map(lambda b: work(*b), zip(bounds[:-1], bounds[1:])))
    else:
        work(0, trajectories)
    return SsaEnsemble(
        net.species, times, samples, seed, tuple(int(x) for x in k0), int(events.sum()),
        backend or BACKEND,
    )
