from __future__ import annotations

import math
from collections import defaultdict
from typing import TYPE_CHECKING

import numpy as np

from haarlab.functions.haar import HaarCoefficients, analyze, synthesize
from haarlab.functions.stepfn import lp_norm, random_step_function
from haarlab.grid.dyadic import DyadicInterval

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Mapping

    from haarlab.functions.stepfn import DyadicStepFunction
    from haarlab.grid.measure import MeasureTree

    AlphaRule = Callable[[DyadicInterval, int, int], float]


class HaarShift:
    """Haar shift T f = Σ_I Σ_{J∈𝒟_s(I)} Σ_{K∈𝒟_t(I)} α^I_{J,K} ⟨f, h_J⟩ h_K.

    J and K are addressed by their positions m in 𝒟_s(I) and n in 𝒟_t(I), so
    the coefficient rule has the signature alpha(I, m, n). A rule is either a
    callable (total, validated lazily) or an explicit sparse map keyed by
    (I, m, n), zero off its support.
    """

    def __init__(
        self,
        s: int,
        t: int,
        alpha: AlphaRule | Mapping[tuple[DyadicInterval, int, int], float],
        *,
        depth_cutoff: int | None = None,
        name: str = "shift",
    ) -> None:
        """Initialize a Haar shift.

        Args:
            s (int): depth of the input Haar functions below I
            t (int): depth of the output Haar functions below I
            alpha (AlphaRule | Mapping): the coefficient rule
            depth_cutoff (int | None): deepest level of I that contributes.
                Default = None (no cutoff)
            name (str): label used in reports. Default = "shift"

        Raises:
            ValueError: if s or t is negative, or an explicit coefficient or
                position is out of range
        """
        if s < 0 or t < 0:
            raise ValueError(f"complexity ({s=}, {t=}) must be nonnegative")
        self.s, self.t = s, t
        self.depth_cutoff = depth_cutoff
        self.name = name
        if callable(alpha):
            self._rule: AlphaRule | None = alpha
            self._explicit: dict[tuple[DyadicInterval, int, int], float] = {}
        else:
            self._rule = None
            self._explicit = {}
            for (interval, m, n), value in alpha.items():
                if not (0 <= m < 1 << s and 0 <= n < 1 << t):
                    raise ValueError(
                        f"position ({m=}, {n=}) outside complexity ({s}, {t})"
                    )
                self._explicit[interval, m, n] = float(_checked(value))

    def __repr__(self) -> str:
        """String representation of the shift."""
        name, s, t, depth_cutoff = self.name, self.s, self.t, self.depth_cutoff
        return f"HaarShift({name=}, {s=}, {t=}, {depth_cutoff=})"

    @property
    def complexity(self) -> tuple[int, int]:
        """(s, t)."""
        return self.s, self.t

    def coefficient(self, interval: DyadicInterval, m: int, n: int) -> float:
        """α^I at positions m in 𝒟_s(I) and n in 𝒟_t(I).

        Raises:
            ValueError: if a callable rule returns a value outside [-1, 1]
        """
        if self.depth_cutoff is not None and interval.level > self.depth_cutoff:
            return 0.0
        if self._rule is None:
            return self._explicit.get((interval, m, n), 0.0)
        return _checked(self._rule(interval, m, n))

    def adjoint(self) -> HaarShift:
        """T*, of complexity (t, s) with α*(I, n, m) = α(I, m, n)."""
        name = self.name.removesuffix("-adjoint")
        if name == self.name:
            name = f"{name}-adjoint"
        return HaarShift(
            self.t,
            self.s,
            lambda interval, n, m: self.coefficient(interval, m, n),
            depth_cutoff=self.depth_cutoff,
            name=name,
        )

    def _terms(
        self, coeffs: HaarCoefficients
    ) -> Iterable[tuple[DyadicInterval, float, DyadicInterval]]:
        """(J, α ⟨f, h_J⟩, K) for every nonzero term of the shift."""
        s, t = self.s, self.t
        for source in coeffs.support():
            if source.level < s:
                continue
            top = source.ancestor(s)
            m = source.index - (top.index << s)
            source_coeff = coeffs.coefficient(source)
            level, first = top.level + t, top.index << t
            for n in range(1 << t):
                alpha = self.coefficient(top, m, n)
                if alpha != 0:
                    yield source, alpha * source_coeff, DyadicInterval(level, first + n)


def _checked(value: float) -> float:
    if not abs(value) <= 1:
        raise ValueError(f"shift coefficient {value=} violates |alpha| <= 1")
    return value


def make_shift(
    s: int,
    t: int,
    alpha: AlphaRule | Mapping[tuple[DyadicInterval, int, int], float],
    **kwargs,
) -> HaarShift:
    """A Haar shift of complexity (s, t)."""
    return HaarShift(s, t, alpha, **kwargs)


def _hilbert_rule(_interval: DyadicInterval, _m: int, n: int) -> float:
    return 1.0 if n == 0 else -1.0


def _left_left_rule(_interval: DyadicInterval, _m: int, n: int) -> float:
    return 1.0 if n == 0 else 0.0


def dyadic_hilbert() -> HaarShift:
    """Ш f = Σ_I ⟨f, h_I⟩ (h_{I_-} - h_{I_+}), complexity (0, 1)."""
    return HaarShift(0, 1, _hilbert_rule, name="hilbert")


def dyadic_hilbert_adjoint() -> HaarShift:
    """Ш* f = Σ_I ⟨f, h_{I_-} - h_{I_+}⟩ h_I, complexity (1, 0)."""
    return dyadic_hilbert().adjoint()


def shift_left_left() -> HaarShift:
    """T f = Σ_I ⟨f, h_I⟩ h_{I_{--}}, complexity (0, 2)."""
    return HaarShift(0, 2, _left_left_rule, name="ll2")


def haar_multiplier(
    alpha: float | Callable[[DyadicInterval], float] = 1.0, *, name: str = "multiplier"
) -> HaarShift:
    """T f = Σ_I α_I ⟨f, h_I⟩ h_I, complexity (0, 0)."""
    if callable(alpha):
        return HaarShift(0, 0, lambda interval, _m, _n: alpha(interval), name=name)
    _checked(alpha)
    return HaarShift(0, 0, lambda _interval, _m, _n: alpha, name=name)


class RandomRule:
    """Coefficients uniform in [-1, 1], drawn once per I from a (seed, I) generator."""

    def __init__(self, seed: int, s: int, t: int) -> None:
        """Initialize the rule."""
        self.seed, self.s, self.t = seed, s, t
        self._cache: dict[DyadicInterval, np.ndarray] = {}

    def __call__(self, interval: DyadicInterval, m: int, n: int) -> float:
        """α^I at (m, n)."""
        table = self._cache.get(interval)
        if table is None:
            rng = np.random.default_rng([self.seed, interval.level, interval.index])
            table = rng.uniform(-1, 1, size=(1 << self.s, 1 << self.t))
            self._cache[interval] = table
        return float(table[m, n])


def random_shift(seed: int, s: int, t: int) -> HaarShift:
    """A random shift of complexity (s, t) with reproducible coefficients."""
    return HaarShift(s, t, RandomRule(seed, s, t), name=f"random-{s}{t}-{seed}")


def shift_from_token(token: str) -> HaarShift:
    """Resolve a command-line shift token.

    Tokens are "hilbert", "hilbert-adjoint", "ll2", "multiplier:PATTERN" with
    PATTERN a +/- string whose sign on I is PATTERN[level(I) mod len(PATTERN)],
    and "random:S,T:SEED".

    Raises:
        ValueError: for an unknown token
    """
    named = {
        "hilbert": dyadic_hilbert,
        "hilbert-adjoint": dyadic_hilbert_adjoint,
        "ll2": shift_left_left,
    }
    if token in named:
        return named[token]()
    kind, _, rest = token.partition(":")
    if kind == "multiplier":
        pattern = rest or "+"
        if set(pattern) - {"+", "-"}:
            raise ValueError(f"multiplier pattern {pattern=} may only contain + and -")
        signs = [1.0 if char == "+" else -1.0 for char in pattern]
        return haar_multiplier(
            lambda interval: signs[interval.level % len(signs)], name=token
        )
    if kind == "random":
        complexity, _, seed = rest.partition(":")
        s, t = (int(part) for part in complexity.split(","))
        return random_shift(int(seed or 0), s, t)
    raise ValueError(
        f"unknown shift {token=}, expected hilbert, hilbert-adjoint, ll2, "
        "multiplier:PATTERN or random:S,T:SEED"
    )


def apply(
    op: HaarShift, tree: MeasureTree, func: DyadicStepFunction
) -> DyadicStepFunction:
    """T f as a step function. The sum runs over the Haar support of f only.

    Raises:
        ValueError: if an output Haar function lies at or below the depth bound
    """
    out: dict[DyadicInterval, float] = defaultdict(float)
    for _source, weight, target in op._terms(analyze(tree, func)):
        tree.check_level(target, internal=True)
        out[target] += weight
    return synthesize(tree, HaarCoefficients.from_coefficients(tree, out))


def bilinear(
    op: HaarShift,
    tree: MeasureTree,
    func: DyadicStepFunction,
    other: DyadicStepFunction,
) -> float:
    """⟨T f, g⟩ by pairing the Haar coefficients of f and g directly."""
    target_coeffs = analyze(tree, other)
    total = 0.0
    for _source, weight, target in op._terms(analyze(tree, func)):
        if target in target_coeffs.differences:
            total += weight * target_coeffs.coefficient(target)
    return total


def sign_aligned_shift(
    tree: MeasureTree,
    func: DyadicStepFunction,
    other: DyadicStepFunction,
    s: int,
    t: int,
    m: int,
    n: int,
) -> HaarShift:
    """Shift with α^I_{I_s^m, I_t^n} = sign(⟨f, h_{I_s^m}⟩⟨g, h_{I_t^n}⟩), else 0.

    Every term of ⟨T f, g⟩ is then nonnegative.
    """
    source_coeffs, target_coeffs = analyze(tree, func), analyze(tree, other)
    explicit: dict[tuple[DyadicInterval, int, int], float] = {}
    for source in source_coeffs.support():
        if source.level < s:
            continue
        top = source.ancestor(s)
        if source.index - (top.index << s) != m:
            continue
        target = DyadicInterval(top.level + t, (top.index << t) + n)
        product = source_coeffs.coefficient(source) * target_coeffs.coefficient(target)
        if product != 0:
            explicit[top, m, n] = math.copysign(1.0, product)
    return HaarShift(s, t, explicit, name=f"sign-aligned-{s}{t}")


def empirical_opnorm(
    op: HaarShift,
    tree: MeasureTree,
    p: float = 2,
    weight: DyadicStepFunction | None = None,
    trials: int = 20,
    seed: int = 0,
    *,
    max_level: int | None = None,
    splits: int = 8,
    probes: Iterable[DyadicStepFunction] = (),
) -> float:
    """Lower bound for ‖T‖ on L^p(w dμ): the max ratio over test functions.

    Test functions are the given probes plus `trials` seeded random step
    functions, trial i drawn from the generator seeded by [seed, i].

    Raises:
        ValueError: if trials < 1 and no probes are given
    """
    probes = list(probes)
    if trials < 1 and not probes:
        raise ValueError(f"{trials=} must be at least 1")
    if max_level is None:
        max_level = min(tree.depth_bound - op.t - 1, 8)
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        probes.append(random_step_function(rng, max_level, splits, low=-1.0, high=1.0))
    best = 0.0
    for func in probes:
        denom = lp_norm(tree, func, p, weight)
        if denom == 0:
            continue
        best = max(best, float(lp_norm(tree, apply(op, tree, func), p, weight) / denom))
    return best
