"""Moment equations: derivative expansion, reachability closure, linear systems.

For a network with polynomial propensities ``P_j`` and jumps ``gamma_j`` the
derivative of ``E[S^u]`` is ``sum_j E[P_j(S) * (Delta_{gamma_j} k^u)(S)]``.
Expanding that product gives a polynomial whose monomials are moments, so a
set of moments closed under this map yields ``x' = A x + b``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import expm

from . import _exact
from .network import CrnError, PolyNetwork, ReactionNetwork
from .polynomial import MultiIndex, Poly, delta_poly

DEFAULT_CAP = 10000


class CapExceeded(CrnError):
    """Closure did not terminate within the cap; carries the frontier."""

    def __init__(self, cap: int, basis: list[MultiIndex], frontier: list[MultiIndex]):
        super().__init__(
            f"moment closure exceeded {cap} elements ({len(frontier)} moments pending)"
        )
        self.cap = cap
        self.basis = basis
        self.frontier = frontier


class NotClosed(CrnError):
    def __init__(self, moment: MultiIndex, row: MultiIndex):
        super().__init__(f"derivative of E[S^{row}] involves E[S^{moment}] outside the basis")
        self.moment = moment
        self.row = row


class Inconsistent(CrnError):
    pass


def _as_poly_network(net) -> PolyNetwork:
    return net.polynomial_form() if isinstance(net, ReactionNetwork) else net


def _derivative_terms(pnet: PolyNetwork, u: MultiIndex) -> tuple[Poly, dict[MultiIndex, int]]:
    n = pnet.n_species
    M = Poly.monomial(u)
    total = Poly(n)
    first_seen: dict[MultiIndex, int] = {}
    for j, (P, g) in enumerate(zip(pnet.propensities, pnet.jumps)):
        if not any(g) or P.is_zero():
            continue
        term = P * delta_poly(M, g)
        for m in term.monomials():
            first_seen.setdefault(m, j)
        total = total + term
    return total, first_seen


def moment_derivative(net, u: Sequence[int]) -> Poly:
    """``d/dt E[S^u]`` as a polynomial whose monomial ``k^v`` stands for ``E[S^v]``."""
    return _derivative_terms(_as_poly_network(net), tuple(u))[0]


@dataclass(frozen=True)
class MomentBasis:
    """Non-constant moments in closure order; the constant moment is tracked by a flag."""

    moments: tuple[MultiIndex, ...]
    has_constant: bool = False

    def __len__(self) -> int:
        return len(self.moments)

    def __iter__(self):
        return iter(self.moments)

    def index(self, u: MultiIndex) -> int:
        return self.moments.index(tuple(u))


def closure(net, targets: Iterable[Sequence[int]], cap: int = DEFAULT_CAP) -> MomentBasis:
    """Breadth-first fixed point of the derivative support, starting from ``targets``.

    Newly reached moments are appended by (first contributing reaction, monomial).
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    pnet = _as_poly_network(net)
    n = pnet.n_species
    zero = (0,) * n
    order_: list[MultiIndex] = []
    seen: set[MultiIndex] = set()
    for t in targets:
        t = tuple(int(x) for x in t)
        if len(t) != n:
            raise ValueError(f"target {t} has length {len(t)}, expected {n}")
        if t != zero and t not in seen:
            seen.add(t)
            order_.append(t)
    if len(order_) > cap:
        raise CapExceeded(cap, order_[:cap], order_[cap:])
    queue = deque(order_)
    has_constant = False
    while queue:
        u = queue.popleft()
        poly, first = _derivative_terms(pnet, u)
        new = sorted((m for m in poly.monomials() if m not in seen), key=lambda m: (first[m], m))
        for m in new:
            if m == zero:
                has_constant = True
                continue
            seen.add(m)
            order_.append(m)
            queue.append(m)
            if len(order_) > cap:
                raise CapExceeded(cap, order_[:cap], list(queue))
        if zero in poly.monomials():
            has_constant = True
    return MomentBasis(tuple(order_), has_constant)


@dataclass(frozen=True)
class LinearMomentSystem:
    basis: MomentBasis
    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    species: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return len(self.basis)

    def rhs(self, x: Sequence) -> list:
        return [sum((a * xi for a, xi in zip(row, x)), Fraction(0)) + bi for row, bi in zip(self.A, self.b)]

    def permuted(self, order: Sequence[Sequence[int]]) -> "LinearMomentSystem":
        """Reorder the basis (and A, b accordingly)."""
        idx = [self.basis.index(tuple(u)) for u in order]
        if sorted(idx) != list(range(self.size)):
            raise ValueError("order must be a permutation of the basis")
        A = tuple(tuple(self.A[i][j] for j in idx) for i in idx)
        b = tuple(self.b[i] for i in idx)
        return LinearMomentSystem(
            MomentBasis(tuple(self.basis.moments[i] for i in idx), self.basis.has_constant),
            A, b, self.species,
        )

    def label(self, u: MultiIndex) -> str:
        names = self.species or tuple(f"S{i + 1}" for i in range(len(u)))
        parts = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, u) if e]
        return "E[" + ("*".join(parts) or "1") + "]"


def assemble(net, basis: MomentBasis | Sequence[Sequence[int]]) -> LinearMomentSystem:
    pnet = _as_poly_network(net)
    if not isinstance(basis, MomentBasis):
        basis = MomentBasis(tuple(tuple(u) for u in basis))
    n = pnet.n_species
    zero = (0,) * n
    pos = {u: i for i, u in enumerate(basis.moments)}
    N = len(basis)
    A = [[Fraction(0)] * N for _ in range(N)]
    b = [Fraction(0)] * N
    for i, u in enumerate(basis.moments):
        poly = moment_derivative(pnet, u)
        for m, c in poly.items():
            if m == zero:
                b[i] += c
            elif m in pos:
                A[i][pos[m]] += c
            else:
                raise NotClosed(m, u)
    return LinearMomentSystem(basis, tuple(map(tuple, A)), tuple(b), pnet.species)


def moment_system(net, targets: Iterable[Sequence[int]], cap: int = DEFAULT_CAP) -> LinearMomentSystem:
    pnet = _as_poly_network(net)
    return assemble(pnet, closure(pnet, targets, cap))


@dataclass(frozen=True)
class MomentValues:
    basis: MomentBasis
    values: tuple
    time: float | None = None
    nullspace: tuple[tuple[Fraction, ...], ...] = field(default=())

    @property
    def unique(self) -> bool:
        return not self.nullspace

    def __getitem__(self, u) -> object:
        return self.values[self.basis.index(tuple(u))]

    def as_dict(self) -> dict[MultiIndex, object]:
        return dict(zip(self.basis.moments, self.values))


def steady_state(sys: LinearMomentSystem) -> MomentValues:
    """Exact solution of ``A x + b = 0``; non-unique solutions carry a nullspace basis."""
    if sys.size == 0:
        return MomentValues(sys.basis, ())
    result = _exact.solve(sys.A, [-x for x in sys.b])
    if result is None:
        raise Inconsistent("A x + b = 0 has no solution")
    x, null = result
    return MomentValues(sys.basis, tuple(x), None, tuple(tuple(v) for v in null))


def transient(sys: LinearMomentSystem, x0: MomentValues | Sequence, times: Iterable[float]) -> list[MomentValues]:
    """Solve ``x' = A x + b`` via the exponential of the augmented matrix ``[[A, b], [0, 0]]``."""
    if isinstance(x0, MomentValues):
        if x0.basis.moments != sys.basis.moments:
            raise ValueError("initial values are over a different basis")
        x0 = x0.values
    N = sys.size
    aug = np.zeros((N + 1, N + 1))
    aug[:N, :N] = np.array(sys.A, dtype=float).reshape(N, N)
    aug[:N, N] = np.array(sys.b, dtype=float)
    z0 = np.append(np.array(x0, dtype=float), 1.0)
    out = []
    for t in times:
        if t == 0:
            vals = tuple(float(v) for v in x0)
        else:
            vals = tuple((expm(aug * float(t)) @ z0)[:N].tolist())
        out.append(MomentValues(sys.basis, vals, float(t)))
    return out
