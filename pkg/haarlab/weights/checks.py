from __future__ import annotations

from typing import TYPE_CHECKING

from haarlab.functions.stepfn import (
    DyadicStepFunction,
    conjugate_exponent,
    indicator,
    lp_norm,
    weighted_measure,
)
from haarlab.grid.dyadic import DyadicInterval, dyadic_distance, lca, neighbors_within
from haarlab.operators.maximal import maximal_N
from haarlab.operators.shift import (
    bilinear,
    dyadic_hilbert,
    empirical_opnorm,
    sign_aligned_shift,
)
from haarlab.sparse.forms import form_C_N, weak_type_functional
from haarlab.weights.characteristic import (
    PairScanner,
    c_p_b,
    char_Ap,
    char_Ap_b,
    char_Ap_N,
)

if TYPE_CHECKING:
    from collections.abc import Iterable

    from haarlab.grid.measure import MeasureTree
    from haarlab.operators.shift import HaarShift
    from haarlab.sparse.family import SparseFamily


def duality_check(
    tree: MeasureTree, weight: DyadicStepFunction, p: float, depth: int
) -> tuple[float, float]:
    """([w]_{A_p^b}, [w^{1-p'}]_{A_{p'}^b}^{p-1}), equal up to rounding.

    Raises:
        ValueError: if p <= 1
    """
    if p <= 1:
        raise ValueError(f"duality needs {p=} > 1")
    dual_p = conjugate_exponent(p)
    sigma = weight ** (1 - dual_p)
    direct = char_Ap_b(tree, weight, p, depth).value
    dual = char_Ap_b(tree, sigma, dual_p, depth).value
    return direct, dual ** (p - 1)


def fair_division_check(
    tree: MeasureTree, weight: DyadicStepFunction, p: float, family: SparseFamily
) -> float:
    """min over I ∈ S of w(E_I) [w]_{A_p} / (η^p w(I)), at least 1.

    Raises:
        ValueError: if the family has no witness or η = 0
    """
    if family.witness is None or not family.eta:
        raise ValueError(
            "fair_division_check needs a family with a witness and eta > 0"
        )
    characteristic = char_Ap(tree, weight, p, tree.depth_bound - 1).value
    eta = float(family.eta)
    worst = float("inf")
    for member, pieces in family.witness.items():
        free = sum(float(weighted_measure(tree, weight, piece)) for piece in pieces)
        total = float(weighted_measure(tree, weight, member))
        worst = min(worst, free * characteristic / (eta**p * total))
    return worst


def maximal_char_probe(
    tree: MeasureTree, weight: DyadicStepFunction, p: float, N: int, depth: int
) -> tuple[float, float]:
    """Test ℳ^N on L^p(w dμ) with the probes f = w^{1-p'} 1_J.

    J runs over the cells of w and their ancestors. For each probe J the
    ratio r_J = ‖ℳ^N f‖ / ‖f‖ satisfies
    r_J^p >= c_p^b(I, J) ⟨w⟩_I ⟨w^{1-p'}⟩_J^{p-1} for every I with
    dist(I, J) <= N + 2.

    Returns:
        tuple[float, float]: (max r_J, min relative residual of the inequality)

    Raises:
        ValueError: if p <= 1
    """
    if p <= 1:
        raise ValueError(f"maximal_char_probe needs {p=} > 1")
    scanner = PairScanner(tree, weight, p, depth)
    sigma = scanner.sigma
    radius = N + 2
    best, residual = 0.0, float("inf")
    probes = [node for node in scanner.w_table.nodes() if node.level <= scanner.depth]
    for probe in sorted(probes):
        func = sigma.restrict(probe)
        image = maximal_N(tree, func, N, warn=False).value
        ratio_p = float(lp_norm(tree, image, p, weight)) ** p / float(
            lp_norm(tree, func, p, weight)
        ) ** p
        best = max(best, ratio_p ** (1 / p))
        for other, _dist in neighbors_within(probe, radius, scanner.depth):
            value = scanner.value(other, probe)
            if value:
                residual = min(residual, (ratio_p - value) / value)
    return best, residual


def pair_bound_below(
    tree: MeasureTree,
    weight: DyadicStepFunction,
    first: DyadicInterval,
    second: DyadicInterval,
) -> tuple[float, float, float]:
    """Lower bound for the shift norm on L²(w dμ) from one pair J, K.

    With L = lca(J, K), the sign-aligned shift pairing the parent of K (as
    input) with the parent of J (as output) below L gets
    ratio² >= ρ c_2^b(J, K) ⟨w⟩_J ⟨w^{-1}⟩_K on f1 = w^{-1} 1_K, f2 = 1_J,
    where ρ = m(K̂) m(Ĵ) / (m(J) m(K)) is bounded for balanced measures.

    Returns:
        tuple[float, float, float]: (ratio², c_2^b(J, K) ⟨w⟩_J ⟨w^{-1}⟩_K, ρ)

    Raises:
        ValueError: if J and K are not disjoint or dist(J, K) <= 2
    """
    if not first.disjoint(second) or dyadic_distance(first, second) <= 2:
        raise ValueError(f"{first} and {second} must be disjoint at distance > 2")
    top = lca(first, second)
    source, target = second.parent, first.parent
    s, t = source.level - top.level, target.level - top.level
    m = source.index - (top.index << s)
    n = target.index - (top.index << t)
    f1 = (weight ** -1).restrict(second)
    weighted_f2 = weight * indicator(first)
    shift = sign_aligned_shift(tree, f1, weighted_f2, s, t, m, n)
    norms = float(lp_norm(tree, f1, 2, weight)) * float(
        lp_norm(tree, indicator(first), 2, weight)
    )
    ratio = abs(bilinear(shift, tree, f1, weighted_f2)) / norms
    scanner = PairScanner(tree, weight, 2, max(first.level, second.level))
    value = c_p_b(tree, first, second, 2) * scanner.left(first) * scanner.right(second)
    rho = float(
        tree.m_value(source)
        * tree.m_value(target)
        / (tree.m_value(first) * tree.m_value(second))
    )
    return ratio**2, value, rho


def weighted_form_ratio(
    tree: MeasureTree,
    weight: DyadicStepFunction,
    family: Iterable[DyadicInterval],
    f1: DyadicStepFunction,
    f2: DyadicStepFunction,
    N: int,
) -> float:
    """𝒞_S^N(f1, w f2) / (‖f1‖_{L²(w)} ‖f2‖_{L²(w)}).

    Raises:
        ValueError: if f1 or f2 vanishes
    """
    norms = float(lp_norm(tree, f1, 2, weight)) * float(lp_norm(tree, f2, 2, weight))
    if norms == 0:
        raise ValueError("weighted_form_ratio needs nonzero functions")
    return form_C_N(tree, family, f1, weight * f2, N) / norms


def weighted_weak_ratio(
    tree: MeasureTree,
    weight: DyadicStepFunction,
    family: Iterable[DyadicInterval],
    f1: DyadicStepFunction,
    G: DyadicStepFunction | Iterable[DyadicInterval],
    N: int,
) -> float:
    """The weak-type functional under w dμ divided by ‖f1‖_{L¹(w)}."""
    norm = float(lp_norm(tree, f1, 1, weight))
    if norm == 0:
        raise ValueError("weighted_weak_ratio needs a nonzero f1")
    value, _mass_g, _mass_g_prime = weak_type_functional(tree, family, f1, G, N, weight)
    return value / norm


def shift_weight_bound(a_p: float, a_p_n: float, p: float) -> float:
    """The weighted shift bound.

    [w]_{A_p}^{max(1, 1/(p-1))} + [w]_{A_p}^{((p-1)² + 1)/(p(p-1))} [w]_{A_p^N}^{1/p}
    """
    first = a_p ** max(1, 1 / (p - 1))
    second = a_p ** (((p - 1) ** 2 + 1) / (p * (p - 1))) * a_p_n ** (1 / p)
    return first + second


def weighted_shift_ratio(
    tree: MeasureTree,
    op: HaarShift,
    weight: DyadicStepFunction,
    p: float,
    depth: int,
    *,
    trials: int = 20,
    seed: int = 0,
    probes: Iterable[DyadicStepFunction] = (),
) -> tuple[float, float]:
    """(measured ‖T‖ on L^p(w dμ), the characteristic bound with N = s + t).

    Raises:
        ValueError: if p <= 1
    """
    if p <= 1:
        raise ValueError(f"weighted_shift_ratio needs {p=} > 1")
    opnorm = empirical_opnorm(op, tree, p, weight, trials, seed, probes=probes)
    N = op.s + op.t
    a_p = char_Ap(tree, weight, p, depth).value
    a_p_n = char_Ap_N(tree, weight, p, N, depth).value
    return opnorm, shift_weight_bound(a_p, a_p_n, p)


def balanced_sandwich(
    tree: MeasureTree, weight: DyadicStepFunction, p: float, N: int, depth: int
) -> tuple[float, float]:
    """([w]_{A_p^b} / [w]_{A_p^N}, [w]_{A_p^N} / [w]_{A_p^b}^{2^{N-1}}).

    Both ratios stay bounded over all weights.
    """
    balanced = char_Ap_b(tree, weight, p, depth).value
    distance = char_Ap_N(tree, weight, p, N, depth).value
    return balanced / distance, distance / balanced ** (2 ** (N - 1))


def bad_weight_probes(
    tree: MeasureTree, weight: DyadicStepFunction, k: int
) -> tuple[DyadicStepFunction, DyadicStepFunction]:
    """f_k = w^{-1} 1_{I_{2^k}^b} and g_k = 1_{I_{2^k+1}^b}.

    Raises:
        ValueError: if the tree is too shallow for level 2^k + 1
    """
    level = 2**k
    if tree.depth_bound < level + 1:
        raise ValueError(
            f"{k=} needs depth_bound >= {level + 1}, got {tree.depth_bound}"
        )
    f_k = (weight ** -1).restrict(DyadicInterval(level, 1))
    g_k = indicator(DyadicInterval(level + 1, 1))
    return f_k, g_k


def bad_weight_ratio(tree: MeasureTree, weight: DyadicStepFunction, k: int) -> float:
    """|⟨Ш f_k, w g_k⟩| / (‖f_k‖_{L²(w)} ‖g_k‖_{L²(w)})."""
    f_k, g_k = bad_weight_probes(tree, weight, k)
    pairing = bilinear(dyadic_hilbert(), tree, f_k, weight * g_k)
    norms = float(lp_norm(tree, f_k, 2, weight)) * float(lp_norm(tree, g_k, 2, weight))
    return abs(pairing) / norms
