from __future__ import annotations

import math
import os
from typing import TYPE_CHECKING, Any

import numpy as np

from haarlab.functions.stepfn import (
    DyadicStepFunction,
    Weight,
    bmo_norm,
    indicator,
    inner,
    integral,
    lp_norm,
    random_step_function,
    random_weight,
)
from haarlab.grid.dyadic import ROOT, DyadicInterval
from haarlab.grid.measure import (
    build_lmp,
    load_measure,
    measure_from_spec,
    measure_to_spec,
)
from haarlab.lab.report import ExperimentReport, log_to_wandb
from haarlab.operators.maximal import (
    level_set_collection,
    maximal,
    maximal_N,
    weak11_ratio,
)
from haarlab.operators.shift import (
    apply,
    bilinear,
    dyadic_hilbert,
    shift_from_token,
    shift_left_left,
    sign_aligned_shift,
)
from haarlab.sparse.czd import DEFAULT_MULTIPLIER, cz_decompose, stopping_children
from haarlab.sparse.family import augment_parents, build_sparse_collection
from haarlab.sparse.forms import (
    form_A,
    form_C_intro,
    form_C_N,
    form_hilbert_refined,
    weak_type_functional,
)
from haarlab.utils.common_utils import MaxMeter, fit_log2_slope
from haarlab.weights.characteristic import (
    build_badweight,
    char_Ap,
    char_Ap_b,
    char_Ap_N,
    char_one_sided_01,
)
from haarlab.weights.checks import (
    bad_weight_probes,
    bad_weight_ratio,
    duality_check,
    fair_division_check,
    maximal_char_probe,
    weighted_form_ratio,
    weighted_shift_ratio,
    weighted_weak_ratio,
)

if TYPE_CHECKING:
    from haarlab import ArithmeticMode
    from haarlab.grid.measure import MeasureTree

MEASURE_KINDS = ("lmp", "uniform", "random")
LHS_J3 = 1 / 12 + math.sqrt(1 / 8) / 12
MULTIPLIER_CEILING = 1.0
HALVES_TOLERANCE = 0.2
GOOD_PART_LP2 = 4
GOOD_PART_LP4 = 64
GOOD_PART_BMO = 32


def default_seed() -> int:
    """The seed from HAARLAB_SEED, 0 when unset."""
    return int(os.getenv("HAARLAB_SEED", "0"))


def resolve_measure(
    measure: str | dict[str, Any],
    depth: int,
    *,
    seed: int = 0,
    mode: ArithmeticMode | None = None,
) -> MeasureTree:
    """Build a measure from a kind name, a spec dict or a spec JSON file.

    Raises:
        ValueError: if measure is neither a known kind nor an existing file
    """
    if isinstance(measure, dict):
        return measure_from_spec(measure, mode=mode)
    if measure in MEASURE_KINDS:
        spec = {"kind": measure, "depth": depth, "seed": seed}
        return measure_from_spec(spec, mode=mode)
    if os.path.isfile(measure):
        return load_measure(measure, mode=mode)
    raise ValueError(
        f"unknown {measure=}, expected one of {MEASURE_KINDS} or a JSON file"
    )


def _finish(
    report: ExperimentReport, *, verbose: bool, wandb_path: str | None
) -> ExperimentReport:
    if verbose:
        status = "passed" if report.passed else "FAILED"
        print(f"{report.name}: {status} {report.summary}")
        for key, ok in report.checks.items():
            if not ok:
                print(f"  check {key} failed")
    log_to_wandb(report, wandb_path)
    return report


def halves_agree(
    first: float, second: float, tolerance: float = HALVES_TOLERANCE
) -> bool:
    """Whether two batch maxima differ by at most tolerance times the larger one."""
    if not (math.isfinite(first) and math.isfinite(second)):
        return False
    return abs(first - second) <= tolerance * max(first, second)


def _dyadic_ladder(jmax: int) -> list[int]:
    ladder = [2**i for i in range(3, jmax.bit_length()) if 2**i <= jmax]
    if jmax not in ladder:
        ladder.append(jmax)
    if len(ladder) < 2:
        ladder.insert(0, 4)
    return ladder


def run_sparse_failure(
    jmax: int = 64,
    *,
    mode: ArithmeticMode | None = None,
    verbose: bool = False,
    wandb_path: str | None = None,
) -> ExperimentReport:
    """Ш against sparse forms on the chain measure.

    With f_j = 1_{I_{j-1}^b} and g_j = 1_{I_j^b}, lhs = |⟨Ш f_j, g_j⟩| decays
    like 1/j² while ∫ ℳf_j ℳg_j dμ, which bounds every sparse form, decays
    like 1/j³, so their ratio grows linearly in j.

    Raises:
        ValueError: if jmax < 8
    """
    if jmax < 8:
        raise ValueError(f"{jmax=} must be at least 8")
    tree = build_lmp(jmax + 2, mode=mode)
    hilbert = dyadic_hilbert()
    report = ExperimentReport(
        "sparse-failure",
        {"jmax": jmax, "mode": tree.mode},
        operations=["build_lmp", "dyadic_hilbert", "bilinear", "maximal", "inner"],
    )
    f3, g3 = indicator(DyadicInterval(2, 1)), indicator(DyadicInterval(3, 1))
    lhs_j3 = abs(bilinear(hilbert, tree, f3, g3))
    for j in _dyadic_ladder(jmax):
        f_j, g_j = indicator(DyadicInterval(j - 1, 1)), indicator(DyadicInterval(j, 1))
        lhs = abs(bilinear(hilbert, tree, f_j, g_j))
        upper = float(inner(tree, maximal(tree, f_j), maximal(tree, g_j)))
        report.rows.append(
            {
                "j": j,
                "lhs": lhs,
                "ub": upper,
                "ratio": lhs / upper,
                "lhs_j2": lhs * j**2,
            }
        )
        if verbose:
            print(f"j={j}: lhs={lhs:.4e}, ub={upper:.4e}, ratio={lhs / upper:.4f}")
    js = [row["j"] for row in report.rows]
    scaled = [row["lhs_j2"] for row in report.rows]
    slope = fit_log2_slope(js, [row["ratio"] for row in report.rows])
    report.summary = {
        "slope": slope,
        "lhs_j3": lhs_j3,
        "lhs_j2_band": max(scaled) / min(scaled),
    }
    report.check("lhs_j3", abs(lhs_j3 - LHS_J3) <= 1e-6)
    report.check("lhs_j2_band", max(scaled) <= 4 * min(scaled))
    report.check("slope", slope >= 0.8)
    return _finish(report, verbose=verbose, wandb_path=wandb_path)


def run_complexity_separation(
    jmax: int = 64,
    *,
    mode: ArithmeticMode | None = None,
    verbose: bool = False,
    wandb_path: str | None = None,
) -> ExperimentReport:
    """The complexity (0, 2) shift against 𝒜_S + 𝒞_S^1 on the chain measure.

    With f_j = 1_{I_{j-1}^b} and g_j = 1_{I_{j+1}^b}, ∫ ℳ¹f_j ℳg_j dμ bounds
    both forms uniformly in S and decays like 1/j³, while the shift pairing
    decays like 1/j².

    Raises:
        ValueError: if jmax < 8
    """
    if jmax < 8:
        raise ValueError(f"{jmax=} must be at least 8")
    tree = build_lmp(jmax + 4, mode=mode)
    shift = shift_left_left()
    report = ExperimentReport(
        "complexity-separation",
        {"jmax": jmax, "mode": tree.mode},
        operations=["build_lmp", "shift_left_left", "bilinear", "maximal_N", "maximal"],
    )
    for j in _dyadic_ladder(jmax):
        f_j = indicator(DyadicInterval(j - 1, 1))
        g_j = indicator(DyadicInterval(j + 1, 1))
        lhs = abs(bilinear(shift, tree, f_j, g_j))
        maximal_f = maximal_N(tree, f_j, 1, warn=False).value
        upper = float(inner(tree, maximal_f, maximal(tree, g_j)))
        report.rows.append(
            {
                "j": j,
                "lhs": lhs,
                "ub": upper,
                "ratio": lhs / upper,
                "ub_j3": upper * j**3,
            }
        )
        if verbose:
            print(f"j={j}: lhs={lhs:.4e}, ub={upper:.4e}, ratio={lhs / upper:.4f}")
    js = [row["j"] for row in report.rows]
    slope = fit_log2_slope(js, [row["ratio"] for row in report.rows])
    report.summary = {
        "slope": slope,
        "max_ub_j3": max(row["ub_j3"] for row in report.rows),
    }
    report.check("slope", slope >= 0.8)
    return _finish(report, verbose=verbose, wandb_path=wandb_path)


def run_bad_weight(
    kmax: int = 10,
    *,
    kmin: int = 4,
    mode: ArithmeticMode | None = None,
    verbose: bool = False,
    wandb_path: str | None = None,
) -> ExperimentReport:
    """Ш on L²(w dμ) for the weight w = 2^{-k/2} on I_{2^k}^b.

    For every k the scan depth is 2^k + 2. [w]_{A_2} stays bounded while the
    uncle/nephew pair (I_{2^k+1}^b, I_{2^k}^b) drives [w]_{A_2^b} up like
    2^{k/2}, and the probe ratio of Ш grows like 2^{k/4}. The sign-aligned
    Haar multiplier on the same probes stays below MULTIPLIER_CEILING for
    every k.

    Raises:
        ValueError: unless 1 <= kmin < kmax <= 12
    """
    if not 1 <= kmin < kmax <= 12:
        raise ValueError(f"need 1 <= {kmin=} < {kmax=} <= 12")
    tree = build_lmp(2**kmax + 2, mode=mode)
    weight = build_badweight(tree, kmax)
    report = ExperimentReport(
        "bad-weight",
        {"kmax": kmax, "kmin": kmin, "mode": tree.mode},
        operations=[
            "build_lmp",
            "build_badweight",
            "char_Ap",
            "char_Ap_b",
            "bad_weight_probes",
            "bilinear",
            "sign_aligned_shift",
        ],
    )
    for k in range(kmin, kmax + 1):
        depth = 2**k + 2
        a2 = char_Ap(tree, weight, 2, depth)
        a2b = char_Ap_b(tree, weight, 2, depth)
        ratio = bad_weight_ratio(tree, weight, k)
        f_k, g_k = bad_weight_probes(tree, weight, k)
        weighted_g = weight * g_k
        multiplier = sign_aligned_shift(tree, f_k, weighted_g, 0, 0, 0, 0)
        norms = float(lp_norm(tree, f_k, 2, weight))
        norms *= float(lp_norm(tree, g_k, 2, weight))
        pairing = bilinear(multiplier, tree, f_k, weighted_g)
        report.rows.append(
            {
                "k": k,
                "depth": a2.scan_depth,
                "a2": a2.value,
                "a2b": a2b.value,
                "a2b_off_diagonal": a2b.off_diagonal,
                "ratio": ratio,
                "multiplier_ratio": abs(pairing) / norms,
            }
        )
        if verbose:
            print(f"k={k}: a2={a2.value:.4f}, a2b={a2b.value:.4f}, ratio={ratio:.4f}")
    ks = np.array([row["k"] for row in report.rows], dtype=float)
    ratios = np.array([row["ratio"] for row in report.rows])
    a2s = [row["a2"] for row in report.rows]
    off = np.log2([row["a2b_off_diagonal"] for row in report.rows])
    multipliers = [row["multiplier_ratio"] for row in report.rows]
    slope = float(np.mean(np.diff(np.log2(ratios))))
    a2b_slope = float(np.polyfit(ks, off, deg=1)[0])
    a2_change = abs(a2s[-1] - a2s[-2]) / a2s[-2]
    report.summary = {
        "slope": slope,
        "a2_plateau": a2s[-1],
        "a2_change": a2_change,
        "a2b_slope": a2b_slope,
        "max_multiplier_ratio": max(multipliers),
    }
    report.check("ratio_nondecreasing", bool(np.all(np.diff(ratios) >= 0)))
    report.check("ratio_slope", slope >= 0.2)
    report.check("a2_plateau", a2_change <= 0.01 and a2s[-1] <= 10)
    report.check("a2b_slope", abs(a2b_slope - 0.5) <= 0.1)
    report.check("multiplier_bounded", max(multipliers) <= MULTIPLIER_CEILING)
    return _finish(report, verbose=verbose, wandb_path=wandb_path)


def _random_support(rng: np.random.Generator, level: int) -> DyadicInterval:
    """A random interval at level, the chain interval I_level half of the time."""
    if rng.random() < 0.5:
        return DyadicInterval(level, 0)
    return DyadicInterval(level, int(rng.integers(1 << level)))


def _random_pair(
    rng: np.random.Generator, tree: MeasureTree, support: DyadicInterval, spare: int
) -> tuple[DyadicStepFunction, DyadicStepFunction]:
    """Two nonnegative functions supported in support, leaving spare levels below."""
    max_level = min(support.level + 6, tree.depth_bound - spare)
    exact = tree.mode == "rational"
    f1 = random_step_function(rng, max_level, 8, support=support, rational=exact)
    f2 = random_step_function(rng, max_level, 8, support=support, rational=exact)
    return f1, f2


def run_sparse_domination(
    measure: str | dict[str, Any] = "lmp",
    shift: str = "hilbert",
    trials: int = 100,
    seed: int = 0,
    *,
    depth: int = 16,
    stable_trials: int = 40,
    mode: ArithmeticMode | None = None,
    verbose: bool = False,
    wandb_path: str | None = None,
) -> ExperimentReport:
    """Domination of ⟨T f1, f2⟩ by 𝒜_S + 𝒞_S^{s+t} over random nonnegative pairs.

    S is the stopping collection below I_0 = Ĩ_0^{(max(s, t) + 1)}, augmented
    with the parents of sibling pairs. The token "maximal:N" dominates
    ⟨ℳ^N f1, f2⟩ instead, with both the stopping and the level-set collections.
    Runs of at least stable_trials trials also require the worst ratios of the
    first and the second half of the trials to agree within HALVES_TOLERANCE.

    Raises:
        ValueError: for an unknown shift token, a shift with s + t > 3 or
            stable_trials < 2
    """
    if stable_trials < 2:
        raise ValueError(f"{stable_trials=} must be at least 2")
    tree = resolve_measure(measure, depth, seed=seed, mode=mode)
    kind, _, rest = shift.partition(":")
    maximal_levels = int(rest or 1) if kind == "maximal" else None
    if maximal_levels is None:
        op = shift_from_token(shift)
        if op.s + op.t > 3:
            raise ValueError(
                f"shift complexity {op.complexity} must satisfy s + t <= 3"
            )
        N, root_pad, spare = op.s + op.t, max(op.s, op.t) + 1, op.t + 1
    else:
        op = None
        N, root_pad, spare = maximal_levels, 1, 1
    report = ExperimentReport(
        "sparse-domination",
        {
            "measure": measure_to_spec(tree),
            "shift": shift,
            "trials": trials,
            "seed": seed,
            "N": N,
        },
        operations=["build_sparse_collection", "augment_parents", "form_A", "form_C_N"],
    )
    if op is None:
        report.operations.extend(["maximal_N", "level_set_collection"])
    else:
        report.operations.append("bilinear")
    ratio_meter, packing_meter = MaxMeter(), MaxMeter()
    halves = [MaxMeter(), MaxMeter()]
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        level = root_pad + 1 + int(rng.integers(3))
        support = _random_support(rng, level)
        f1, f2 = _random_pair(rng, tree, support, spare)
        constructed = build_sparse_collection(tree, f1, f2, root_pad)
        family = augment_parents(tree, constructed)
        dominator = float(form_A(tree, family, f1, f2))
        dominator += form_C_N(tree, family, f1, f2, N)
        row: dict[str, Any] = {
            "trial": trial,
            "packing": float(constructed.packing_constant),
            "packing_augmented": float(family.packing_constant),
            "eta": float(constructed.eta),
            "n_members": len(family),
        }
        if op is None:
            lhs = float(inner(tree, maximal_N(tree, f1, N, warn=False).value, f2))
            level_family = level_set_collection(tree, f1, N)
            level_dominator = float(form_A(tree, level_family, f1, f2))
            level_dominator += form_C_N(tree, level_family, f1, f2, N)
            row["ratio_level_set"] = (
                lhs / level_dominator if level_dominator else math.inf
            )
        else:
            lhs = abs(bilinear(op, tree, f1, f2))
            if N == 1:
                intro = float(form_C_intro(tree, family, f1, f2))
                row["ratio_intro"] = lhs / intro if intro else math.inf
            if op.name == "hilbert":
                refined = float(form_hilbert_refined(tree, family, f1, f2))
                row["ratio_refined"] = lhs / refined if refined else math.inf
            row["C_term"] = form_C_N(tree, family, f1, f2, N)
        ratio = lhs / dominator if dominator else (0.0 if lhs == 0 else math.inf)
        row |= {"lhs": lhs, "dominator": dominator, "ratio": ratio}
        report.rows.append(row)
        ratio_meter.update(ratio, trial)
        packing_meter.update(row["packing"], trial)
        halves[int(2 * trial >= trials)].update(ratio, trial)
        if verbose and trial % 10 == 0:
            packing = row["packing"]
            print(f"trial {trial}/{trials}: ratio={ratio:.4f}, {packing=:.4f}")
    report.summary = {
        "max_ratio": ratio_meter.max,
        "mean_ratio": ratio_meter.mean,
        "worst_trial": ratio_meter.argmax,
        "max_packing": packing_meter.max,
        "max_ratio_first_half": halves[0].max,
        "max_ratio_second_half": halves[1].max,
        "min_eta": min(row["eta"] for row in report.rows),
    }
    if op is None:
        report.summary["max_ratio_level_set"] = max(
            row["ratio_level_set"] for row in report.rows
        )
    report.check("packing", packing_meter.max <= 2)
    report.check("ratio_finite", math.isfinite(ratio_meter.max))
    if trials >= stable_trials:
        report.check("stable_halves", halves_agree(halves[0].max, halves[1].max))
    if N == 0:
        report.check("C_term_zero", all(row["C_term"] == 0 for row in report.rows))
    return _finish(report, verbose=verbose, wandb_path=wandb_path)


def run_weight_suite(
    measure: str | dict[str, Any] = "random",
    p: float = 2.0,
    N: int = 1,
    trials: int = 50,
    seed: int = 0,
    *,
    depth: int = 6,
    mode: ArithmeticMode | None = None,
    verbose: bool = False,
    wandb_path: str | None = None,
) -> ExperimentReport:
    """Weight characteristics, their inclusions and the weighted bounds.

    The rows are w ≡ 1, `trials` random weights and, on the chain measure,
    the bad weight at the largest kmax the depth allows. Measured constants
    (the sandwich constants C1, C2, the shift, form and weak-type constants)
    go to the summary.

    Raises:
        ValueError: if p <= 1 or N < 1
    """
    if p <= 1:
        raise ValueError(f"weight suite needs {p=} > 1")
    if N < 1:
        raise ValueError(f"{N=} must be at least 1")
    tree = resolve_measure(measure, depth, seed=seed, mode=mode)
    scan_depth = tree.depth_bound - 1
    weights: list[tuple[str, Weight]] = [("unit", Weight({ROOT: 1}))]
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        weight = random_weight(rng, min(scan_depth, 5), 8, spread=2.0)
        weights.append((f"random-{trial}", weight))
    if tree.kind == "lmp" and (kmax := scan_depth.bit_length() - 1) >= 1:
        weights.append((f"bad-{kmax}", build_badweight(tree, kmax)))
    report = ExperimentReport(
        "weight-suite",
        {
            "measure": measure_to_spec(tree),
            "p": p,
            "N": N,
            "trials": trials,
            "seed": seed,
        },
        operations=[
            "char_Ap",
            "char_Ap_b",
            "char_Ap_N",
            "char_one_sided_01",
            "duality_check",
            "maximal_char_probe",
            "fair_division_check",
            "weighted_shift_ratio",
            "weighted_form_ratio",
            "weighted_weak_ratio",
        ],
    )
    hilbert = dyadic_hilbert()
    for idx, (label, weight) in enumerate(weights):
        rng = np.random.default_rng([seed, trials + idx])
        a_p = char_Ap(tree, weight, p, scan_depth).value
        a_b = char_Ap_b(tree, weight, p, scan_depth).value
        a_n = {n: char_Ap_N(tree, weight, p, n, scan_depth).value for n in (1, 2, 3)}
        if N not in a_n:
            a_n[N] = char_Ap_N(tree, weight, p, N, scan_depth).value
        direct, dual = duality_check(tree, weight, p, scan_depth)
        probe_norm, necessity = maximal_char_probe(tree, weight, p, 1, scan_depth)
        f1, f2 = _random_pair(rng, tree, ROOT, 1)
        family = build_sparse_collection(tree, f1, f2, 0)
        opnorm, bound = weighted_shift_ratio(
            tree, hilbert, weight, p, scan_depth, trials=5, seed=seed
        )
        a2 = a_p if p == 2 else char_Ap(tree, weight, 2, scan_depth).value
        a2_n = a_n[N] if p == 2 else char_Ap_N(tree, weight, 2, N, scan_depth).value
        a1_n = char_Ap_N(tree, weight, 1, N, scan_depth).value
        form_ratio = weighted_form_ratio(tree, weight, family, f1, f2, N)
        weak_ratio = weighted_weak_ratio(tree, weight, family, f1, f2.support(), N)
        row = {
            "weight": label,
            "a_p": a_p,
            "a_p_b": a_b,
            **{f"a_p_n{n}": value for n, value in sorted(a_n.items())},
            "one_sided": char_one_sided_01(tree, weight, scan_depth).value,
            "duality_residual": abs(direct - dual) / direct,
            "necessity_norm": probe_norm,
            "necessity_residual": necessity,
            "fair_division": fair_division_check(tree, weight, p, family),
            "shift_opnorm": opnorm,
            "shift_bound": bound,
            "form_constant": form_ratio / (a2 * math.sqrt(a2_n)),
            "weak_constant": weak_ratio / a1_n**2,
        }
        for n in (1, 2, 3):
            row[f"sandwich_c1_n{n}"] = a_b / a_n[n]
            row[f"sandwich_c2_n{n}"] = a_n[n] / a_b ** (2 ** (n - 1))
        report.rows.append(row)
        if verbose:
            print(f"{label}: a_p={a_p:.4f}, a_p_b={a_b:.4f}, a_p_n{N}={a_n[N]:.4f}")
    rows = report.rows
    report.summary = {
        "max_duality_residual": max(row["duality_residual"] for row in rows),
        "min_necessity_residual": min(row["necessity_residual"] for row in rows),
        "min_fair_division": min(row["fair_division"] for row in rows),
        "shift_constant": max(row["shift_opnorm"] / row["shift_bound"] for row in rows),
        "form_constant": max(row["form_constant"] for row in rows),
        "weak_constant": max(row["weak_constant"] for row in rows),
        **{
            f"C{side}_n{n}": max(row[f"sandwich_c{side}_n{n}"] for row in rows)
            for side in (1, 2)
            for n in (1, 2, 3)
        },
    }
    tol = 1e-12
    report.check(
        "inclusion_chain",
        all(
            row["a_p"] <= row["a_p_b"] * (1 + tol)
            and row["a_p_b"] <= row["a_p_n1"] * (1 + tol)
            and row["a_p_n1"] <= row["a_p_n2"] * (1 + tol)
            and row["a_p_n2"] <= row["a_p_n3"] * (1 + tol)
            for row in rows
        ),
    )
    report.check("duality", report.summary["max_duality_residual"] <= 1e-10)
    report.check("necessity", report.summary["min_necessity_residual"] >= -1e-10)
    report.check("fair_division", report.summary["min_fair_division"] >= 1 - 1e-10)
    report.check("unit_weight", abs(rows[0]["a_p"] - 1) <= tol)
    return _finish(report, verbose=verbose, wandb_path=wandb_path)


def run_czd_demo(
    measure: str | dict[str, Any] = "lmp",
    trials: int = 200,
    seed: int = 0,
    *,
    depth: int = 10,
    multiplier: float = DEFAULT_MULTIPLIER,
    mode: ArithmeticMode | None = None,
    verbose: bool = False,
    wandb_path: str | None = None,
) -> ExperimentReport:
    """The two-function Calderón-Zygmund decomposition on random data.

    The heights are multiplier ⟨f_j⟩ on the root, 1 where that average is 0.
    The good parts are measured by ‖g‖₂² / (λ ‖f‖₁), ‖g‖₄⁴ / (λ³ ‖f‖₁) and
    bmo(g) / λ, each checked against its own constant. Since g >= 0 and
    ∫ g = ∫ f, Hölder gives the L² ratio at most the cube root of the L⁴ one.
    """
    tree = resolve_measure(measure, depth, seed=seed, mode=mode)
    report = ExperimentReport(
        "czd-demo",
        {
            "measure": measure_to_spec(tree),
            "trials": trials,
            "seed": seed,
            "multiplier": multiplier,
        },
        operations=["cz_decompose", "stopping_children", "bmo_norm", "lp_norm"],
    )
    exact = tree.mode == "rational"
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        f1, f2 = _random_pair(rng, tree, ROOT, 0)
        heights = [
            multiplier * func.integrals(tree).average(ROOT) or tree.number(1)
            for func in (f1, f2)
        ]
        decomposition = cz_decompose(tree, f1, f2, heights[0], heights[1], ROOT)
        row: dict[str, Any] = {
            "trial": trial,
            "n_selected": len(decomposition.selected),
            "reconstruction": float(decomposition.reconstruction_error()),
            "mean_zero": 0.0,
            "l1_ratio": 0.0,
            "lp2_ratio": 0.0,
            "lp4_ratio": 0.0,
            "bmo_ratio": 0.0,
        }
        for j, (func, good) in enumerate(zip((f1, f2), decomposition.good)):
            norm = float(lp_norm(tree, func, 1))
            if norm == 0:
                continue
            height = float(heights[j])
            table = func.integrals(tree)
            for interval, pair in decomposition.bad.items():
                mean = abs(float(integral(tree, pair[j]))) / norm
                row["mean_zero"] = max(row["mean_zero"], mean)
                local = float(table.integral(interval))
                if local > 0:
                    l1_ratio = float(lp_norm(tree, pair[j], 1)) / local
                    row["l1_ratio"] = max(row["l1_ratio"], l1_ratio)
            lp2 = float(lp_norm(tree, good, 2)) ** 2 / (height * norm)
            row["lp2_ratio"] = max(row["lp2_ratio"], lp2)
            lp4 = float(lp_norm(tree, good, 4)) ** 4 / (height**3 * norm)
            row["lp4_ratio"] = max(row["lp4_ratio"], lp4)
            bmo = float(bmo_norm(tree, good)) / height
            row["bmo_ratio"] = max(row["bmo_ratio"], bmo)
        stopped = stopping_children(tree, f1, f2, ROOT, multiplier)
        stopped_mass = sum((tree.mass(child) for child in stopped), tree.number(0))
        row["packing_step"] = float(stopped_mass / tree.mass(ROOT))
        report.rows.append(row)
        if verbose and trial % 20 == 0:
            selected, bmo = row["n_selected"], row["bmo_ratio"]
            print(f"trial {trial}/{trials}: {selected=}, {bmo=:.4f}")
    rows = report.rows
    keys = (
        "reconstruction",
        "mean_zero",
        "l1_ratio",
        "lp2_ratio",
        "lp4_ratio",
        "bmo_ratio",
        "packing_step",
    )
    report.summary = {f"max_{key}": max(row[key] for row in rows) for key in keys}
    summary = report.summary
    error = summary["max_reconstruction"]
    report.check("reconstruction", error == 0 if exact else error <= 1e-12)
    report.check("mean_zero", summary["max_mean_zero"] <= 1e-14)
    report.check("l1", summary["max_l1_ratio"] <= 2 * (1 + 1e-12))
    report.check("good_part_lp2", summary["max_lp2_ratio"] <= GOOD_PART_LP2)
    report.check("good_part_lp4", summary["max_lp4_ratio"] <= GOOD_PART_LP4)
    report.check("good_part_bmo", summary["max_bmo_ratio"] <= GOOD_PART_BMO)
    packing_bound = 2 / multiplier * (1 + 1e-12)
    report.check("packing_step", summary["max_packing_step"] <= packing_bound)
    return _finish(report, verbose=verbose, wandb_path=wandb_path)


def run_weak_type(
    measure: str | dict[str, Any] = "lmp",
    trials: int = 200,
    seed: int = 0,
    *,
    depth: int = 10,
    N: int = 1,
    mode: ArithmeticMode | None = None,
    verbose: bool = False,
    wandb_path: str | None = None,
) -> ExperimentReport:
    """Weak (1, 1) ratios of ℳ, ℳ¹, ℳ², Ш and the weak-type functional of 𝒞_S^N.

    The functional uses one height C_0 for the whole suite, twice the largest
    weak-type constant of ℳ^N over the trials, so that μ(G) <= 2 μ(G') holds
    on every trial with the same C_0.
    """
    tree = resolve_measure(measure, depth, seed=seed, mode=mode)
    report = ExperimentReport(
        "weak-type",
        {"measure": measure_to_spec(tree), "trials": trials, "seed": seed, "N": N},
        operations=[
            "weak11_ratio",
            "maximal",
            "maximal_N",
            "apply",
            "weak_type_functional",
        ],
    )
    hilbert = dyadic_hilbert()
    operators = {
        "maximal": "maximal",
        "maximal_1": lambda tree, func: maximal_N(tree, func, 1, warn=False).value,
        "maximal_2": lambda tree, func: maximal_N(tree, func, 2, warn=False).value,
        "hilbert": lambda tree, func: apply(hilbert, tree, func),
    }
    key = f"maximal_{N}"
    if key not in operators:
        operators[key] = lambda tree, func: maximal_N(tree, func, N, warn=False).value
    max_level = min(tree.depth_bound - 2, 8)
    samples = []
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        raw = random_step_function(rng, max_level, 10, low=-1.0, high=1.0)
        func = raw / float(lp_norm(tree, raw, 1))
        marker = random_step_function(rng, max_level, 6).map(
            lambda val: 1 if val > 0.5 else 0
        )
        if not marker.support():
            marker = indicator(ROOT)
        row: dict[str, Any] = {"trial": trial, "l1_norm": float(lp_norm(tree, func, 1))}
        for name, op in operators.items():
            row[name] = weak11_ratio(tree, op, func)
        samples.append((func, marker))
        report.rows.append(row)
        if verbose and trial % 20 == 0:
            ratios = ", ".join(f"{name}={row[name]:.3f}" for name in operators)
            print(f"trial {trial}/{trials}: {ratios}")
    c0 = 2 * max(row[key] * row["l1_norm"] for row in report.rows)
    for row, (func, marker) in zip(report.rows, samples):
        family = build_sparse_collection(tree, abs(func), marker, 0)
        value, mass_g, mass_g_prime = weak_type_functional(
            tree, family, func, marker, N, c0=c0
        )
        row["functional"] = value / row["l1_norm"]
        row["g_ratio"] = (
            float(mass_g) / float(mass_g_prime) if mass_g_prime else math.inf
        )
    keys = (*operators, "functional", "g_ratio")
    rows = report.rows
    report.summary = {f"max_{name}": max(row[name] for row in rows) for name in keys}
    report.summary["c0"] = c0
    finite = all(math.isfinite(report.summary[f"max_{name}"]) for name in keys)
    report.check("finite", finite)
    report.check("g_prime", report.summary["max_g_ratio"] <= 2 * (1 + 1e-12))
    return _finish(report, verbose=verbose, wandb_path=wandb_path)
