"""Network builders and hypothesis strategies shared by the unit tests."""
from fractions import Fraction as F

from hypothesis import strategies as st

from crnkit.network import Reaction, ReactionNetwork


def net(species, reactions):
    return ReactionNetwork.from_lists(species, reactions)


def gene(kappa=2, delta=1, rho=5, eta=1):
    return net(["S1", "S2", "S3"], [
        ((1, 0, 0), (0, 1, 0), kappa),
        ((0, 1, 0), (1, 0, 0), delta),
        ((1, 0, 0), (1, 0, 1), rho),
        ((0, 0, 1), (0, 0, 0), eta),
    ])


def cascade(k1=1, d1=1, k2=2, d2=1, k3=1, d3=1):
    return net(["S1", "S2", "S3"], [
        ((0, 0, 0), (1, 0, 0), k1),
        ((1, 0, 0), (0, 0, 0), d1),
        ((1, 0, 0), (1, 1, 0), k2),
        ((0, 1, 0), (0, 0, 0), d2),
        ((1, 1, 0), (1, 1, 1), k3),
        ((0, 0, 1), (0, 0, 0), d3),
    ])


def binding(k1=1, k2=1):
    return net(["S1", "S2", "S3"], [((1, 1, 0), (0, 0, 1), k1), ((0, 0, 1), (1, 1, 0), k2)])


def birth_binding(k1=1, k2=1, k3=1, k4=1):
    return net(["S1", "S2", "S3"], [
        ((0, 0, 0), (1, 0, 0), k1),
        ((1, 0, 0), (0, 0, 0), k2),
        ((1, 1, 0), (0, 0, 1), k3),
        ((0, 0, 1), (1, 1, 0), k4),
    ])


def isomerization(k1=1, k2=1):
    return net(["S1", "S2"], [((1, 0), (0, 1), k1), ((0, 1), (1, 0), k2)])


rates = st.builds(F, st.integers(1, 10**6), st.integers(1, 10**4))
names = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in ("param", "species")
)


@st.composite
def networks(draw, max_species=5, max_reactions=6, max_coef=3):
    n = draw(st.integers(1, max_species))
    species = draw(st.lists(names, min_size=n, max_size=n, unique=True))
    vec = st.tuples(*[st.integers(0, max_coef)] * n)
    pairs = draw(
        st.lists(st.tuples(vec, vec).filter(lambda p: p[0] != p[1]), min_size=1, max_size=max_reactions)
    )
    ks = draw(st.lists(rates, min_size=len(pairs), max_size=len(pairs)))
    return ReactionNetwork(tuple(species), tuple(Reaction(a, b, k) for (a, b), k in zip(pairs, ks)))
