"""Complex-balanced networks: product-form stationary laws on conservation classes.

If ``lam`` is a complex-balanced equilibrium, the restriction of
``prod_i lam_i^{k_i} / k_i!`` to a conservation class ``{k >= 0 : A k = beta}``
solves the stationary master equation.  Its normalizer ``Z(beta)`` is computed
by the lattice recursion

    beta_m Z(beta) = sum_j lam_j A[m, j] Z(beta - A[:, j]),   Z(0) = 1,

obtained by shifting ``k_j -> k_j - 1`` inside the fiber sum.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.optimize import least_squares

from . import _exact
from .network import (
    ConservationBasis,
    CrnError,
    ReactionNetwork,
    complexes,
    linkage_classes,
    structure,
)
from .polynomial import MultiIndex


class Unbalanced(CrnError):
    def __init__(self, complex_: MultiIndex, defect, relative):
        super().__init__(f"complex {complex_} is unbalanced (relative defect {float(relative):.3g})")
        self.complex = complex_
        self.defect = defect
        self.relative = relative


class NoCertificate(CrnError):
    pass


class FiberNotFinite(CrnError):
    pass


class EmptyFiber(CrnError):
    pass


def _one(lam: Sequence):
    """Multiplicative identity that keeps rational inputs exact."""
    return Fraction(1) if all(isinstance(x, (int, Fraction)) for x in lam) else 1.0


def _power(lam: Sequence, a: Sequence[int]):
    v = 1
    for x, e in zip(lam, a):
        if e:
            v = v * x ** e
    return v


# --- complex balance ------------------------------------------------------------------


@dataclass(frozen=True)
class CbEquilibrium:
    lam: tuple
    residuals: tuple
    tolerance: object
    complexes: tuple[MultiIndex, ...] = ()

    @property
    def exact(self) -> bool:
        return all(isinstance(x, (int, Fraction)) for x in self.lam)


def complex_flows(net: ReactionNetwork, lam: Sequence) -> list[tuple[object, object]]:
    """``(inflow, outflow)`` at each complex, with fluxes ``kappa_tilde_j lam^{a_j}``."""
    cs = complexes(net)
    flows = [[0, 0] for _ in cs.complexes]
    for j, r in enumerate(net.reactions):
        flux = r.kappa_tilde * _power(lam, r.source)
        flows[cs.target[j]][0] += flux
        flows[cs.source[j]][1] += flux
    return [tuple(f) for f in flows]


def _relative(inflow, outflow):
    scale = max(abs(inflow), abs(outflow))
    return abs(inflow - outflow) / scale if scale else 0


def verify_complex_balance(net: ReactionNetwork, lam: Sequence, tol=0) -> CbEquilibrium:
    """Check the per-complex balance; ``tol=0`` with rational ``lam`` is an exact check."""
    lam = tuple(lam)
    if len(lam) != net.n_species:
        raise ValueError(f"lambda has length {len(lam)}, expected {net.n_species}")
    if any(x <= 0 for x in lam):
        raise ValueError("lambda must be positive")
    cs = complexes(net)
    flows = complex_flows(net, lam)
    residuals = tuple(i - o for i, o in flows)
    worst, worst_rel = None, 0
    for c, (i, o) in zip(cs.complexes, flows):
        rel = _relative(i, o)
        if rel > tol and (worst is None or rel > worst_rel):
            worst, worst_rel = c, rel
    if worst is not None:
        raise Unbalanced(worst, residuals[cs.complexes.index(worst)], worst_rel)
    return CbEquilibrium(lam, residuals, tol, cs.complexes)


def _laplacian_kernel(net: ReactionNetwork, members: list[int]) -> list[Fraction] | None:
    """Positive kernel vector of the weighted complex graph restricted to one linkage class."""
    cs = complexes(net)
    pos = {c: t for t, c in enumerate(members)}
    L = [[Fraction(0)] * len(members) for _ in members]
    for j, r in enumerate(net.reactions):
        s, t = cs.source[j], cs.target[j]
        if s not in pos:
            continue
        L[pos[t]][pos[s]] += r.kappa_tilde
        L[pos[s]][pos[s]] -= r.kappa_tilde
    null = _exact.nullspace(L, len(members))
    if len(null) != 1:
        return None
    v = null[0]
    if all(x <= 0 for x in v):
        v = [-x for x in v]
    return v if all(x > 0 for x in v) else None


def _exact_log_solution(rows, weights, n):
    """Rational ``lam`` with ``y_c . log(lam) - theta = log(psi_c)``, if the free-variables-zero
    solution has integer exponents."""
    exps = []
    for i in range(len(rows)):
        e = [Fraction(0)] * len(rows)
        e[i] = Fraction(1)
        sol = _exact.solve(rows, e)
        if sol is None:
            return None
        exps.append(sol[0][:n])
    lam = []
    for s in range(n):
        v = Fraction(1)
        for w, x in zip(weights, exps):
            if x[s].denominator != 1:
                return None
            v *= Fraction(w) ** int(x[s])
        lam.append(v)
    return tuple(lam)


def solve_complex_balance(net: ReactionNetwork, tol: float = 1e-12) -> CbEquilibrium:
    """Find a complex-balanced equilibrium or raise :class:`NoCertificate`.

    Weakly reversible deficiency-zero networks go through the graph kernel and a
    minimum-norm log-linear solve; anything else gets a numerical attempt.
    """
    n = net.n_species
    cs = complexes(net)
    s = structure(net)
    if s.weakly_reversible and s.deficiency == 0:
        classes = [[cs.complexes.index(c) for c in lc] for lc in linkage_classes(net)]
        rows, rhs, weights = [], [], []
        ok = True
        for ell, members in enumerate(classes):
            psi = _laplacian_kernel(net, members)
            if psi is None:
                ok = False
                break
            for c, w in zip(members, psi):
                theta = [0] * len(classes)
                theta[ell] = -1
                rows.append(list(cs.complexes[c]) + theta)
                rhs.append(math.log(w))
                weights.append(w)
        if ok:
            exact = _exact_log_solution(rows, weights, n)
            if exact is not None:
                try:
                    return verify_complex_balance(net, exact, 0)
                except Unbalanced:
                    pass
            x = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)[0]
            lam = tuple(float(v) for v in np.exp(x[:n]))
            try:
                eq = verify_complex_balance(net, lam, tol)
                return rationalize_equilibrium(net, eq) or eq
            except Unbalanced:
                pass

    def defects(y):
        lam = np.exp(y)
        return [float(i - o) / float(i + o) if (i + o) else 0.0 for i, o in complex_flows(net, lam)]

    fit = least_squares(defects, np.zeros(n), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    lam = tuple(float(v) for v in np.exp(fit.x))
    try:
        eq = verify_complex_balance(net, lam, tol)
        return rationalize_equilibrium(net, eq) or eq
    except (Unbalanced, ValueError) as exc:
        raise NoCertificate(f"no complex-balanced equilibrium found: {exc}") from None


def rationalize_equilibrium(net: ReactionNetwork, eq: CbEquilibrium, max_denominator: int = 10**6):
    """Exact version of a float equilibrium when small-denominator rounding balances exactly."""
    if eq.exact:
        return eq
    lam = tuple(Fraction(x).limit_denominator(max_denominator) for x in eq.lam)
    if any(x <= 0 for x in lam):
        return None
    try:
        return verify_complex_balance(net, lam, 0)
    except Unbalanced:
        return None


# --- partition functions --------------------------------------------------------------


class PartitionTable:
    """Memoized ``Z(beta)`` for a nonnegative conservation matrix and rates ``lam``.

    Species whose column of ``A`` is zero are independent Poisson factors; they are
    kept out of ``Z`` and listed in :attr:`free`.
    """

    def __init__(self, basis: ConservationBasis | Sequence[Sequence[int]], lam: Sequence):
        rows = basis.rows if isinstance(basis, ConservationBasis) else tuple(tuple(r) for r in basis)
        self.rows: tuple[tuple[int, ...], ...] = tuple(tuple(int(x) for x in r) for r in rows)
        self.lam = tuple(lam)
        if any(len(r) != len(self.lam) for r in self.rows):
            raise ValueError("lambda length does not match the conservation basis")
        if any(x < 0 for r in self.rows for x in r):
            raise FiberNotFinite("conservation matrix has negative entries")
        n = len(self.lam)
        self.constrained = tuple(i for i in range(n) if any(r[i] for r in self.rows))
        self.free = tuple(i for i in range(n) if i not in self.constrained)
        self._memo: dict[tuple[int, ...], object] = {(0,) * self.m: _one(self.lam)}
        self._lock = threading.RLock()

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.lam)

    @property
    def memo(self) -> dict[tuple[int, ...], object]:
        with self._lock:
            return dict(self._memo)

    @property
    def unconstrained_factor(self) -> dict[int, object]:
        """Exponents of the ``exp(lam_i)`` factors left out of ``Z``."""
        return {i: self.lam[i] for i in self.free}

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartitionTable):
            return NotImplemented
        return (self.rows, self.lam, self.memo) == (other.rows, other.lam, other.memo)

    __hash__ = None

    def Z(self, beta: Sequence[int]):
        beta = tuple(int(b) for b in beta)
        if len(beta) != self.m:
            raise ValueError(f"beta has length {len(beta)}, expected {self.m}")
        if any(b < 0 for b in beta):
            return 0
        with self._lock:
            if beta in self._memo:
                return self._memo[beta]
            cols = [(j, self.column(j)) for j in self.constrained]
            stack = [beta]
            while stack:
                b = stack[-1]
                if b in self._memo:
                    stack.pop()
                    continue
                mm = next(i for i, x in enumerate(b) if x > 0)
                deps = []
                for j, col in cols:
                    if col[mm]:
                        d = tuple(x - a for x, a in zip(b, col))
                        if all(x >= 0 for x in d):
                            deps.append((j, col[mm], d))
                missing = [d for _, _, d in deps if d not in self._memo]
                if missing:
                    stack.extend(missing)
                    continue
                total = 0 * self._memo[(0,) * self.m]
                for j, a, d in deps:
                    total = total + self.lam[j] * a * self._memo[d]
                self._memo[b] = total / b[mm]
                stack.pop()
            return self._memo[beta]

    def fiber(self, beta: Sequence[int]) -> Iterator[tuple[int, ...]]:
        """States of the constrained block with ``A k = beta`` (free species set to 0)."""
        beta = tuple(beta)
        idx = self.constrained
        k = [0] * self.n

        def rec(pos: int, rest: list[int]):
            if pos == len(idx):
                if not any(rest):
                    yield tuple(k)
                return
            j = idx[pos]
            col = self.column(j)
            bound = min(rest[i] // a for i, a in enumerate(col) if a)
            for v in range(bound + 1):
                k[j] = v
                yield from rec(pos + 1, [x - v * a for x, a in zip(rest, col)])
            k[j] = 0

        if any(b < 0 for b in beta):
            return iter(())
        return rec(0, list(beta))

    def weight(self, k: Sequence[int]):
        """``prod lam_i^{k_i} / k_i!`` over the constrained species."""
        w = _one(self.lam)
        for i in self.constrained:
            w = w * self.lam[i] ** k[i] / math.factorial(k[i])
        return w


def partition_function(table: PartitionTable, beta: Sequence[int]):
    return table.Z(beta)


def enumerate_partition_function(table: PartitionTable, beta: Sequence[int]):
    """Direct fiber sum; the independent check on :meth:`PartitionTable.Z`."""
    total = 0
    for k in table.fiber(beta):
        total = total + table.weight(k)
    return total


def verify_paper_recursion(table: PartitionTable, p: int, n: int, K=None) -> bool:
    """Three-term recursion in ``n`` for the binding network ``S1 + S2 <-> S3``.

    With ``lam = (l1, l2, l3)`` the table satisfies ``Z(p, n) = l1^p l2^n Z_K(p, n)``
    for ``K = l3 / (l1 l2)``; the recursion is checked on ``Z_K``.
    """
    l1, l2, l3 = table.lam
    if K is None:
        K = l3 / (l1 * l2)

    def zk(pp, nn):
        return table.Z((pp, nn)) / (l1 ** pp * l2 ** nn)

    lhs = zk(p, n + 2)
    rhs = Fraction(1, n + 2) * K * zk(p, n) + Fraction(1, n + 2) * (-K * n + K * p - K + 1) * zk(p, n + 1)
    return lhs == rhs


# --- conditional distributions and moments --------------------------------------------


@dataclass(frozen=True)
class ConditionalDistribution:
    """Product-form law of the constrained species on one conservation class.

    Free species (zero column in the conservation matrix) are independent
    Poisson variables with means ``free_lam``; their entries in ``support`` are 0.
    """

    species: tuple[str, ...]
    beta: tuple[int, ...]
    support: tuple[tuple[int, ...], ...]
    probabilities: tuple
    free: tuple[int, ...] = ()
    free_lam: tuple = ()

    def total(self):
        return sum(self.probabilities)

    def prob(self, k: Sequence[int]):
        """Probability of a constrained-block state (free entries ignored)."""
        key = tuple(0 if i in self.free else x for i, x in enumerate(k))
        try:
            return self.probabilities[self.support.index(key)]
        except ValueError:
            return 0

    def expectation(self, f: Callable[[tuple[int, ...]], object]):
        return sum((p * f(k) for k, p in zip(self.support, self.probabilities)), 0)

    def marginal(self, j: int) -> dict[int, object]:
        if j in self.free:
            raise FiberNotFinite(f"species {self.species[j]} is unconstrained (Poisson)")
        out: dict[int, object] = {}
        for k, p in zip(self.support, self.probabilities):
            out[k[j]] = out.get(k[j], 0) + p
        return dict(sorted(out.items()))


def stationary_distribution(
    net: ReactionNetwork, lam: Sequence, basis: ConservationBasis, beta: Sequence[int], tol=None
) -> ConditionalDistribution:
    """Normalized product-form law on ``{A k = beta}``; ``lam`` must be complex balanced."""
    lam = tuple(lam)
    if tol is None:
        tol = 0 if all(isinstance(x, (int, Fraction)) for x in lam) else 1e-9
    verify_complex_balance(net, lam, tol)
    table = PartitionTable(basis, lam)
    return _distribution(table, net.species, beta)


def _distribution(table: PartitionTable, species, beta) -> ConditionalDistribution:
    beta = tuple(int(b) for b in beta)
    Z = table.Z(beta)
    if Z == 0:
        raise EmptyFiber(f"conservation class {beta} contains no states")
    support = tuple(table.fiber(beta))
    probs = tuple(table.weight(k) / Z for k in support)
    return ConditionalDistribution(
        tuple(species), beta, support, probs, table.free, tuple(table.lam[i] for i in table.free)
    )


def conditional_distribution(table: PartitionTable, beta: Sequence[int], species=None) -> ConditionalDistribution:
    species = species or tuple(f"S{i + 1}" for i in range(table.n))
    return _distribution(table, species, beta)


def conditional_factorial_moment(table: PartitionTable, beta: Sequence[int], j: int, r: int):
    """``E[S_j (S_j - 1) ... (S_j - r + 1) | A S = beta]``."""
    beta = tuple(beta)
    Z = table.Z(beta)
    if Z == 0:
        raise EmptyFiber(f"conservation class {beta} contains no states")
    shifted = tuple(b - r * a for b, a in zip(beta, table.column(j)))
    if any(x < 0 for x in shifted):
        return 0
    return table.lam[j] ** r * table.Z(shifted) / Z


def conditional_moments(table: PartitionTable, beta: Sequence[int], j: int):
    """``(mean, second moment, variance)`` of species ``j`` given ``A S = beta``."""
    mean = conditional_factorial_moment(table, beta, j, 1)
    second = conditional_factorial_moment(table, beta, j, 2) + mean
    return mean, second, second - mean * mean


def conditional_marginal(table: PartitionTable, beta: Sequence[int], j: int) -> dict[int, object]:
    if j in table.free:
        raise FiberNotFinite(f"species {j + 1} is unconstrained; its marginal is Poisson({table.lam[j]})")
    return conditional_distribution(table, beta).marginal(j)


def sscme_residual(net: ReactionNetwork, p: Callable[[tuple[int, ...]], object], k: Sequence[int]):
    """Inflow minus outflow of the stationary master equation at state ``k``.

    Uses the falling-factorial form with explicit Heaviside guards; ``p`` may be
    unnormalized since the equation is linear.
    """
    k = tuple(k)
    inflow = 0
    outflow = 0
    for r in net.reactions:
        kt = r.kappa_tilde
        if all(x >= b for x, b in zip(k, r.target)):
            prev = tuple(x - g for x, g in zip(k, r.gamma))
            ff = 1
            for x, a in zip(prev, r.source):
                for t in range(a):
                    ff *= x - t
            inflow = inflow + kt * ff * p(prev)
        if all(x >= a for x, a in zip(k, r.source)):
            ff = 1
            for x, a in zip(k, r.source):
                for t in range(a):
                    ff *= x - t
            outflow = outflow + kt * ff * p(k)
    return inflow - outflow


def product_form_weight(table: PartitionTable, beta: Sequence[int]) -> Callable[[tuple[int, ...]], object]:
    """Unnormalized-by-Poisson-factors stationary weight over all species.

    Returns ``prod_i lam_i^{k_i}/k_i! / Z(beta)`` on the class and 0 off it; this
    differs from the true probability by the constant ``exp(-sum lam_free)``.
    """
    beta = tuple(beta)
    rows = table.rows
    Z = table.Z(beta)
    if Z == 0:
        raise EmptyFiber(f"conservation class {beta} contains no states")

    def weight(k):
        if any(x < 0 for x in k):
            return 0
        if tuple(sum(a * x for a, x in zip(row, k)) for row in rows) != beta:
            return 0
        w = _one(table.lam)
        for x, l in zip(k, table.lam):
            w = w * l ** x / math.factorial(x)
        return w / Z

    return weight


def first_fiber_state(table: PartitionTable, beta: Sequence[int]) -> tuple[int, ...]:
    for k in table.fiber(beta):
        return k
    raise EmptyFiber(f"conservation class {tuple(beta)} contains no states")
