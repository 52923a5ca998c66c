"""Reaction network representation and structural analysis."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, prod
from typing import Iterable, Sequence

import networkx as nx

from . import _exact
from .polynomial import MultiIndex, Poly, order


class CrnError(Exception):
    """Base class for all analysis errors."""


class InvalidNetwork(CrnError, ValueError):
    pass


class ZeroColumn(InvalidNetwork):
    """A reaction whose source equals its target."""

    def __init__(self, index: int):
        super().__init__(f"reaction {index + 1} does not change any species")
        self.index = index


class NotFFN(CrnError):
    """No feedforward layering exists; carries the offending cycle or reaction."""

    def __init__(self, message: str, cycle: list[str] | None = None, reaction: int | None = None):
        super().__init__(message)
        self.cycle = cycle
        self.reaction = reaction


class NotConserved(CrnError):
    pass


class BadCoefficient(CrnError):
    pass


@dataclass(frozen=True)
class Reaction:
    source: MultiIndex
    target: MultiIndex
    rate: Fraction

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(int(x) for x in self.source))
        object.__setattr__(self, "target", tuple(int(x) for x in self.target))
        object.__setattr__(self, "rate", Fraction(self.rate))
        if len(self.source) != len(self.target):
            raise InvalidNetwork("source and target have different lengths")
        if any(x < 0 for x in self.source + self.target):
            raise InvalidNetwork("stoichiometric coefficients must be nonnegative")
        if self.rate <= 0:
            raise InvalidNetwork(f"rate constant must be positive, got {self.rate}")

    @property
    def gamma(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.source, self.target))

    @property
    def order(self) -> int:
        return order(self.source)

    @property
    def is_degradation(self) -> bool:
        return order(self.source) == 1 and not any(self.target)

    @property
    def kappa_tilde(self) -> Fraction:
        """Rate constant divided by the product of reactant factorials."""
        return self.rate / prod(factorial(a) for a in self.source)


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "reactions", tuple(self.reactions))
        if len(set(self.species)) != len(self.species):
            raise InvalidNetwork("species names must be unique")
        n = len(self.species)
        for j, r in enumerate(self.reactions):
            if len(r.source) != n:
                raise InvalidNetwork(f"reaction {j + 1} has length {len(r.source)}, expected {n}")
            if r.source == r.target:
                raise ZeroColumn(j)

    @classmethod
    def from_lists(cls, species: Sequence[str], reactions: Iterable[tuple]) -> "ReactionNetwork":
        """Build from ``(source, target, rate)`` triples."""
        return cls(tuple(species), tuple(Reaction(tuple(a), tuple(b), k) for a, b, k in reactions))

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    def index(self, name: str) -> int:
        try:
            return self.species.index(name)
        except ValueError:
            raise KeyError(f"unknown species {name!r}") from None

    def with_rates(self, rates: Sequence) -> "ReactionNetwork":
        if len(rates) != self.n_reactions:
            raise ValueError("one rate per reaction required")
        return ReactionNetwork(
            self.species,
            tuple(Reaction(r.source, r.target, k) for r, k in zip(self.reactions, rates)),
        )

    def polynomial_form(self) -> "PolyNetwork":
        return PolyNetwork(
            self.species,
            tuple(mass_action_propensity(self, j) for j in range(self.n_reactions)),
            tuple(r.gamma for r in self.reactions),
        )


# --- stoichiometry and conservation --------------------------------------------------


@dataclass(frozen=True)
class StoichMatrix:
    """The n x r matrix whose column j is ``b_j - a_j``."""

    entries: tuple[tuple[int, ...], ...]

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    def rank(self) -> int:
        return _exact.rank(self.entries) if self.cols else 0

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


def stoichiometry(net: ReactionNetwork) -> StoichMatrix:
    for j, r in enumerate(net.reactions):
        if r.source == r.target:
            raise ZeroColumn(j)
    cols = [r.gamma for r in net.reactions]
    return StoichMatrix(tuple(tuple(c[i] for c in cols) for i in range(net.n_species)))


@dataclass(frozen=True)
class ConservationBasis:
    """Integer rows spanning (part of) the left nullspace of the stoichiometry matrix."""

    rows: tuple[tuple[int, ...], ...]
    rank: int
    exact: bool = True
    n_species: int = 0

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(int(x) for x in r) for r in self.rows))
        if self.rows and not self.n_species:
            object.__setattr__(self, "n_species", len(self.rows[0]))

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def nonnegative(self) -> bool:
        return all(x >= 0 for row in self.rows for x in row)

    def values(self, k: Sequence[int]) -> tuple[int, ...]:
        """Conserved quantities ``A k`` of a state."""
        return tuple(sum(a * x for a, x in zip(row, k)) for row in self.rows)

    def column(self, i: int) -> tuple[int, ...]:
        return tuple(row[i] for row in self.rows)

    def annihilates(self, gamma: StoichMatrix) -> bool:
        return all(
            sum(a * g for a, g in zip(row, gamma.column(j))) == 0
            for row in self.rows
            for j in range(gamma.cols)
        )


# enumerating minimal-support vectors is combinatorial; past this we keep the signed basis
_MAX_SUPPORT_SUBSETS = 20000


def conservation_basis(gamma: StoichMatrix | ReactionNetwork) -> ConservationBasis:
    """Integer basis of ``{y : y Gamma = 0}``, nonnegative when a nonnegative basis exists.

    Candidate rows are the minimal-support vectors of the left nullspace; sign-definite
    ones are taken greedily (smallest support first) until they span the space.
    """
    if isinstance(gamma, ReactionNetwork):
        gamma = stoichiometry(gamma)
    n = gamma.rows
    gt = [list(gamma.column(j)) for j in range(gamma.cols)]
    r = _exact.rank(gt) if gt else 0
    null = _exact.nullspace(gt, n)
    d = len(null)
    if d == 0:
        return ConservationBasis((), r, True, n)

    candidates: set[tuple[int, ...]] = set()
    if comb(n, d - 1) <= _MAX_SUPPORT_SUBSETS:
        for zeros in itertools.combinations(range(n), d - 1):
            constraints = gt + [[int(i == z) for i in range(n)] for z in zeros]
            sub = _exact.nullspace(constraints, n)
            if len(sub) != 1:
                continue
            v = _exact.primitive_integer(sub[0])
            if all(x <= 0 for x in v):
                v = [-x for x in v]
            if all(x >= 0 for x in v) and any(v):
                candidates.add(tuple(v))

    chosen: list[tuple[int, ...]] = []
    for v in sorted(candidates, key=lambda v: (sum(1 for x in v if x), tuple(-x for x in v))):
        if _exact.rank([list(c) for c in chosen] + [list(v)]) == len(chosen) + 1:
            chosen.append(v)
        if len(chosen) == d:
            break
    if len(chosen) < d:
        chosen = [tuple(_exact.primitive_integer(v)) for v in null]
    return ConservationBasis(tuple(chosen), r, True, n)


# --- complexes and deficiency ---------------------------------------------------------


@dataclass(frozen=True)
class ComplexSet:
    complexes: tuple[MultiIndex, ...]
    source: tuple[int, ...]
    target: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.complexes)


def complexes(net: ReactionNetwork) -> ComplexSet:
    """Distinct complexes in order of first appearance, with reaction -> complex maps."""
    seen: dict[MultiIndex, int] = {}
    src, tgt = [], []
    for r in net.reactions:
        for c, out in ((r.source, src), (r.target, tgt)):
            if c not in seen:
                seen[c] = len(seen)
            out.append(seen[c])
    return ComplexSet(tuple(seen), tuple(src), tuple(tgt))


def reaction_graph(net: ReactionNetwork) -> nx.DiGraph:
    cs = complexes(net)
    g = nx.DiGraph()
    g.add_nodes_from(range(len(cs)))
    for j, (s, t) in enumerate(zip(cs.source, cs.target)):
        g.add_edge(s, t)
    return g


def linkage_classes(net: ReactionNetwork) -> list[list[MultiIndex]]:
    cs = complexes(net)
    comps = sorted((sorted(c) for c in nx.weakly_connected_components(reaction_graph(net))))
    return [[cs.complexes[i] for i in comp] for comp in comps]


def weak_reversibility(net: ReactionNetwork) -> bool:
    g = reaction_graph(net)
    n_weak = nx.number_weakly_connected_components(g) if len(g) else 0
    n_strong = nx.number_strongly_connected_components(g) if len(g) else 0
    return n_weak == n_strong


def deficiency(net: ReactionNetwork) -> int:
    n_c = len(complexes(net))
    ell = len(linkage_classes(net))
    return n_c - ell - stoichiometry(net).rank()


@dataclass(frozen=True)
class StructureSummary:
    n_complexes: int
    n_linkage_classes: int
    rank: int
    deficiency: int
    weakly_reversible: bool


def structure(net: ReactionNetwork) -> StructureSummary:
    n_c = len(complexes(net))
    ell = len(linkage_classes(net))
    r = stoichiometry(net).rank()
    return StructureSummary(n_c, ell, r, n_c - ell - r, weak_reversibility(net))


# --- propensities ---------------------------------------------------------------------


def mass_action_propensity(net: ReactionNetwork, j: int) -> Poly:
    """Expanded polynomial of ``kappa_j * prod_i C(k_i, a_ij)``.

    The polynomial vanishes automatically at nonnegative integer states with
    ``k_i < a_ij``; negative states need the guard applied by the caller.
    """
    r = net.reactions[j]
    n = net.n_species
    p = Poly.constant(n, r.kappa_tilde)
    for i, a in enumerate(r.source):
        if a:
            p = p * Poly.falling_factorial(n, i, a)
    return p


def propensity_value(reaction: Reaction, k: Sequence[int]) -> Fraction:
    """Guarded binomial-product propensity at an integer state."""
    if any(x < a for x, a in zip(k, reaction.source)):
        return Fraction(0)
    return reaction.rate * prod(comb(x, a) for x, a in zip(k, reaction.source))


# --- feedforward certificate ----------------------------------------------------------


@dataclass(frozen=True)
class FfnCertificate:
    species_layer: dict[str, int]
    reaction_layer: dict[int, int]
    degradation: tuple[int, ...]

    @property
    def n_layers(self) -> int:
        return max(self.species_layer.values(), default=0)

    def layers(self) -> list[list[str]]:
        out: list[list[str]] = [[] for _ in range(self.n_layers)]
        for s, layer in self.species_layer.items():
            out[layer - 1].append(s)
        return out

    def check(self, net: ReactionNetwork) -> list[str]:
        """Violations of the layering conditions (empty when valid)."""
        problems = []
        sl = [self.species_layer[s] for s in net.species]
        for j, pi in self.reaction_layer.items():
            r = net.reactions[j]
            for i, (a, g) in enumerate(zip(r.source, r.gamma)):
                if g and sl[i] != pi:
                    problems.append(f"reaction {j + 1} changes {net.species[i]} outside layer {pi}")
                if a and r.order > 1 and sl[i] >= pi:
                    problems.append(f"reaction {j + 1} has reactant {net.species[i]} not below layer {pi}")
                if a and sl[i] > pi:
                    problems.append(f"reaction {j + 1} has reactant {net.species[i]} above layer {pi}")
            if pi == 1 and r.order > 1:
                problems.append(f"layer-1 reaction {j + 1} has order {r.order}")
        return problems


def ffn_certificate(net: ReactionNetwork) -> FfnCertificate:
    """Find the deepest feedforward layering or raise :class:`NotFFN`.

    Species changed by a common reaction share a group.  A reactant outside the
    changed group must sit in an earlier layer (strictly, for reactions of order
    above one).  Cycles through non-strict edges collapse into one layer; a cycle
    through a strict edge has no layering.
    """
    n = net.n_species
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    degradation = tuple(j for j, r in enumerate(net.reactions) if r.is_degradation)
    active = [j for j in range(net.n_reactions) if j not in degradation]
    changed: dict[int, list[int]] = {}
    for j in active:
        changed[j] = [i for i, g in enumerate(net.reactions[j].gamma) if g]
        for i in changed[j][1:]:
            parent[find(i)] = find(changed[j][0])

    g = nx.DiGraph()
    g.add_nodes_from({find(i) for i in range(n)})
    strict: dict[tuple[int, int], int] = {}
    for j in active:
        r = net.reactions[j]
        head = find(changed[j][0])
        for i, a in enumerate(r.source):
            if not a:
                continue
            tail = find(i)
            if tail == head:
                if r.order > 1:
                    raise NotFFN(
                        f"reaction {j + 1} of order {r.order} changes its own reactant "
                        f"{net.species[i]}",
                        reaction=j,
                    )
                continue
            g.add_edge(tail, head)
            if r.order > 1:
                strict.setdefault((tail, head), j)

    scc_of = {}
    for c, comp in enumerate(nx.strongly_connected_components(g)):
        for v in comp:
            scc_of[v] = c
    for (u, v), j in strict.items():
        if scc_of[u] == scc_of[v]:
            cycle = nx.shortest_path(g, v, u)
            names = [
                "{" + ",".join(net.species[i] for i in range(n) if find(i) == grp) + "}"
                for grp in cycle + [v]
            ]
            raise NotFFN(
                f"reaction {j + 1} of order {net.reactions[j].order} closes a precedence cycle",
                cycle=names,
                reaction=j,
            )

    dag = nx.condensation(g, scc=None)
    mapping = dag.graph["mapping"]
    level: dict[int, int] = {}
    for c in nx.topological_sort(dag):
        preds = list(dag.predecessors(c))
        level[c] = 1 + max((level[p] for p in preds), default=0)

    species_layer = {net.species[i]: level[mapping[find(i)]] for i in range(n)}
    reaction_layer = {j: level[mapping[find(changed[j][0])]] for j in active}
    for j, layer in reaction_layer.items():
        if layer == 1 and net.reactions[j].order > 1:
            raise NotFFN(f"layer-1 reaction {j + 1} has order above one", reaction=j)
    return FfnCertificate(species_layer, reaction_layer, degradation)


# --- polynomial-propensity networks and conservation reduction -----------------------


@dataclass(frozen=True)
class PolyNetwork:
    """Species, polynomial propensities and jump vectors; the input to moment assembly."""

    species: tuple[str, ...]
    propensities: tuple[Poly, ...]
    jumps: tuple[tuple[int, ...], ...]
    eliminated: tuple[tuple[str, tuple[int, ...], object], ...] = field(default=())

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.propensities)


def reduce_by_conservation(
    net: ReactionNetwork | PolyNetwork,
    law_row: Sequence[int],
    value,
    eliminate: int | str,
) -> PolyNetwork:
    """Eliminate one species using a conservation law ``law_row . k = value``."""
    pnet = net.polynomial_form() if isinstance(net, ReactionNetwork) else net
    n = pnet.n_species
    i = pnet.species.index(eliminate) if isinstance(eliminate, str) else eliminate
    law_row = tuple(int(x) for x in law_row)
    if len(law_row) != n:
        raise ValueError(f"law has length {len(law_row)}, expected {n}")
    for j, g in enumerate(pnet.jumps):
        if sum(a * x for a, x in zip(law_row, g)):
            raise NotConserved(f"law {law_row} is changed by reaction {j + 1}")
    if law_row[i] != 1:
        raise BadCoefficient(f"coefficient on {pnet.species[i]} is {law_row[i]}, expected 1")

    replacement = Poly.constant(n, value)
    for t, a in enumerate(law_row):
        if t != i and a:
            replacement = replacement - Poly.variable(n, t) * a
    props = tuple(p.substitute(i, replacement).drop_variable(i) for p in pnet.propensities)
    jumps = tuple(g[:i] + g[i + 1:] for g in pnet.jumps)
    species = pnet.species[:i] + pnet.species[i + 1:]
    return PolyNetwork(
        species, props, jumps, pnet.eliminated + ((pnet.species[i], law_row, value),)
    )

