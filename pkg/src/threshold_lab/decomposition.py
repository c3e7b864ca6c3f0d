"""Orthogonal decomposition, coordinate differences, influences, norms, noise.

A real function on a product space splits uniquely into components indexed by
coordinate subsets: each component depends only on its subset and integrates
to zero against any conditioning that does not contain the subset.  All the
inequality verifiers in this module (hypercontractivity, level bounds, the
variance/influence report) run on that decomposition, computed exactly over
dense tables.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .core import (
    MAX_TABLE_SIZE,
    DegenerateMeasureError,
    DimensionMismatchError,
    InvalidFunctionError,
    ProductMeasure,
    QaryFunction,
    TableSizeError,
    average_over_axis,
    conditional_expectation,
    expectation,
    product_weights,
)


def _as_real_table(f: QaryFunction) -> QaryFunction:
    if f.codomain != "real":
        raise InvalidFunctionError("decomposition operations need a real codomain")
    return f.tabulate()


def subset_bits(mask: int, n: int) -> list[int]:
    return [i for i in range(n) if mask >> i & 1]


@dataclasses.dataclass(frozen=True, eq=False)
class EfronSteinDecomposition:
    """All ``2**n`` orthogonal components of ``f`` under a product measure.

    ``components[mask]`` is the dense table of the component for the subset
    whose bitmask is ``mask`` (bit i <-> coordinate i).  Components sum to
    ``f`` pointwise and are pairwise orthogonal in L2 of the measure.
    """

    q: int
    n: int
    measure: ProductMeasure
    components: np.ndarray  # shape (2**n, q**n)

    def component(self, subset) -> np.ndarray:
        """The component table for ``subset`` (bitmask or coordinate iterable)."""
        if isinstance(subset, (int, np.integer)):
            mask = int(subset)
        else:
            mask = 0
            for i in subset:
                mask |= 1 << int(i)
        if not 0 <= mask < self.components.shape[0]:
            raise DimensionMismatchError(f"subset mask {mask} out of range")
        return self.components[mask]

    def reconstruction(self) -> np.ndarray:
        return self.components.sum(axis=0)

    def delta(self, i: int) -> np.ndarray:
        """Sum of the components whose subset contains coordinate ``i``."""
        masks = np.arange(self.components.shape[0])
        keep = (masks >> i & 1).astype(bool)
        return self.components[keep].sum(axis=0)

    def squared_norms(self) -> np.ndarray:
        """Per-subset squared L2 norms under the measure."""
        w = product_weights(self.measure, self.n)
        return self.components**2 @ w

    def level_mass(self, k: int) -> float:
        """Total squared norm at subsets of size exactly ``k``."""
        sizes = np.array([m.bit_count() for m in range(self.components.shape[0])])
        return float(self.squared_norms()[sizes == k].sum())


def efron_stein(f: QaryFunction, measure: ProductMeasure) -> EfronSteinDecomposition:
    """Compute the full orthogonal decomposition of a tabulated real function."""
    f = _as_real_table(f)
    if f.q != measure.q:
        raise DimensionMismatchError("function/measure alphabet mismatch")
    measure.require_positive("orthogonal decomposition")
    size = f.table.shape[0]
    n_masks = 1 << f.n
    if n_masks * size > MAX_TABLE_SIZE:
        raise TableSizeError(
            f"decomposition storage 2**{f.n} * {f.q}**{f.n} exceeds the cap"
        )
    full = n_masks - 1
    # conditional means E[f | X_S] for every subset, filled top-down: drop the
    # lowest coordinate missing from the mask and integrate it out
    tables = np.empty((n_masks, size))
    tables[full] = f.table
    for mask in range(full - 1, -1, -1):
        free = full & ~mask
        i = (free & -free).bit_length() - 1
        tables[mask] = average_over_axis(
            tables[mask | (1 << i)], measure.atoms, i, f.q, f.n
        )
    # signed subset (Moebius) transform turns conditionals into components
    for i in range(f.n):
        bit = 1 << i
        for mask in range(n_masks):
            if mask & bit:
                tables[mask] -= tables[mask ^ bit]
    return EfronSteinDecomposition(q=f.q, n=f.n, measure=measure, components=tables)


def delta_i(f: QaryFunction, measure: ProductMeasure, i: int) -> QaryFunction:
    """``f`` minus its conditional mean given every coordinate except ``i``."""
    f = _as_real_table(f)
    if not 0 <= i < f.n:
        raise DimensionMismatchError(f"coordinate {i} outside [0, {f.n})")
    rest = [j for j in range(f.n) if j != i]
    centered = f.table - conditional_expectation(f, measure, rest).table
    return QaryFunction(q=f.q, n=f.n, codomain="real", out_q=None, table=centered)


def influence(f: QaryFunction, measure: ProductMeasure, i: int) -> float:
    """Expected conditional variance of ``f`` given all coordinates but ``i``."""
    f = _as_real_table(f)
    if not 0 <= i < f.n:
        raise DimensionMismatchError(f"coordinate {i} outside [0, {f.n})")
    mean = average_over_axis(f.table, measure.atoms, i, f.q, f.n)
    second = average_over_axis(f.table**2, measure.atoms, i, f.q, f.n)
    value = float(product_weights(measure, f.n) @ (second - mean**2))
    return max(0.0, value)


def lp_norm(g: QaryFunction, measure: ProductMeasure, p: float) -> float:
    """The L_p norm of ``g`` under the product measure."""
    if p < 1:
        raise DimensionMismatchError(f"L_p norms need p >= 1, got {p}")
    g = _as_real_table(g)
    w = product_weights(measure, g.n)
    return float((w @ np.abs(g.table) ** p) ** (1.0 / p))


@dataclasses.dataclass(frozen=True)
class InfluenceReport:
    """Per-coordinate influences and the L1, L_{3/2}, L2 norms of the differences."""

    influences: tuple
    total: float
    delta_l1: tuple
    delta_l32: tuple
    delta_l2: tuple

    def as_dict(self) -> dict:
        return {
            "influences": list(self.influences),
            "total": self.total,
            "delta_l1": list(self.delta_l1),
            "delta_l32": list(self.delta_l32),
            "delta_l2": list(self.delta_l2),
        }


def influence_report(f: QaryFunction, measure: ProductMeasure) -> InfluenceReport:
    f = _as_real_table(f)
    influences, l1s, l32s, l2s = [], [], [], []
    for i in range(f.n):
        influences.append(influence(f, measure, i))
        d = delta_i(f, measure, i)
        l1s.append(lp_norm(d, measure, 1.0))
        l32s.append(lp_norm(d, measure, 1.5))
        l2s.append(lp_norm(d, measure, 2.0))
    return InfluenceReport(
        influences=tuple(influences),
        total=float(sum(influences)),
        delta_l1=tuple(l1s),
        delta_l32=tuple(l32s),
        delta_l2=tuple(l2s),
    )


def noise_operator(d: EfronSteinDecomposition, theta: float) -> QaryFunction:
    """Attenuate each component by ``theta`` to the power of its subset size."""
    if not 0.0 <= theta <= 1.0:
        raise DimensionMismatchError(f"noise parameter {theta} outside [0, 1]")
    sizes = np.array([m.bit_count() for m in range(d.components.shape[0])])
    table = (theta**sizes) @ d.components
    return QaryFunction(q=d.q, n=d.n, codomain="real", out_q=None, table=table)


def hypercontractive_sigma(alpha: float, exact: bool = False) -> float:
    """A noise rate at which L2 contracts below L_{3/2}, from the smallest atom.

    The default is the always-safe ``alpha**2 / 6``.  ``exact=True`` evaluates
    the sharper two-point expression

        sigma^2 = ((1-a)^(2/3) - a^(2/3)) / ((1-a) a^(-1/3) - a (1-a)^(-1/3))

    through a stable ``expm1`` form; the expression is 0/0 at ``alpha = 1/2``,
    where the safe fallback is returned instead.  The exact value is always
    at least the fallback.
    """
    if not 0.0 < alpha <= 0.5:
        raise DegenerateMeasureError(f"smallest atom must lie in (0, 1/2], got {alpha}")
    fallback = alpha * alpha / 6.0
    if not exact or alpha > 0.5 - 1e-9:
        return fallback
    r = math.log1p(-alpha) - math.log(alpha)  # log((1-alpha)/alpha) > 0
    sigma_sq = (alpha / (1.0 - alpha)) * math.expm1(2.0 * r / 3.0) / -math.expm1(-4.0 * r / 3.0)
    return max(fallback, math.sqrt(sigma_sq))


@dataclasses.dataclass(frozen=True)
class NormInequalityReport:
    sigma: float
    lhs: float
    rhs: float
    ok: bool

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def verify_hypercontractivity(
    g: QaryFunction, measure: ProductMeasure, tol: float = 1e-9
) -> NormInequalityReport:
    """Check ``||T_sigma g||_2 <= ||g||_{3/2}`` at the safe noise rate."""
    measure.require_positive("hypercontractivity check")
    sigma = hypercontractive_sigma(measure.min_atom())
    d = efron_stein(g, measure)
    lhs = lp_norm(noise_operator(d, sigma), measure, 2.0)
    rhs = lp_norm(g, measure, 1.5)
    return NormInequalityReport(sigma=sigma, lhs=lhs, rhs=rhs, ok=lhs <= rhs + tol)


@dataclasses.dataclass(frozen=True)
class LevelBoundReport:
    k: int
    lhs: float
    rhs: float
    ok: bool

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def verify_level_bound(
    g: QaryFunction, measure: ProductMeasure, k: int, tol: float = 1e-9
) -> LevelBoundReport:
    """Check that level-k mass is at most ``(6/alpha^2)**k * ||g||_{3/2}^2``.

    Requires a mean-zero ``g``; the bound follows from hypercontractivity at
    squared noise rate ``alpha^2/6``.
    """
    g = _as_real_table(g)
    measure.require_positive("level bound check")
    if abs(expectation(g, measure)) > 1e-9:
        raise InvalidFunctionError("level bound needs a mean-zero function")
    if not 1 <= k <= g.n:
        raise DimensionMismatchError(f"level {k} outside [1, {g.n}]")
    alpha = measure.min_atom()
    lhs = efron_stein(g, measure).level_mass(k)
    rhs = (6.0 / alpha**2) ** k * lp_norm(g, measure, 1.5) ** 2
    return LevelBoundReport(k=k, lhs=lhs, rhs=rhs, ok=lhs <= rhs + tol)


@dataclasses.dataclass(frozen=True)
class CoordinateTerm:
    coord: int
    influence_sq: float  # ||delta_i f||_2^2
    l1: float
    l2: float
    log_ratio: float
    term: float | None
    degenerate: bool

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class TalagrandReport:
    """Variance against the influence-sum bound, with the constant left free.

    ``empirical_c`` is variance divided by ``log(1/min_atom)`` times the sum
    of the per-coordinate terms; the universal constant is never asserted.
    Coordinates with a vanishing difference are skipped, and coordinates
    where the L2 and L1 norms coincide (log ratio zero, so the term would
    divide by zero) are flagged degenerate and excluded from the sum.
    """

    variance: float
    terms: tuple
    sum_terms: float
    log_inv_min_atom: float
    rhs_no_constant: float | None
    empirical_c: float | None
    m2_sum: float
    constant_function: bool

    def as_dict(self) -> dict:
        return {
            "variance": self.variance,
            "terms": [t.as_dict() for t in self.terms],
            "sum_terms": self.sum_terms,
            "log_inv_min_atom": self.log_inv_min_atom,
            "rhs_no_constant": self.rhs_no_constant,
            "empirical_c": self.empirical_c,
            "m2_sum": self.m2_sum,
            "constant_function": self.constant_function,
        }


def talagrand_report(f: QaryFunction, measure: ProductMeasure) -> TalagrandReport:
    """Report the variance bound ingredients for a tabulated real function."""
    f = _as_real_table(f)
    measure.require_positive("influence-sum report")
    d = efron_stein(f, measure)
    mean = expectation(f, measure)
    centered = QaryFunction(
        q=f.q, n=f.n, codomain="real", out_q=None, table=f.table - mean
    )
    variance = lp_norm(centered, measure, 2.0) ** 2
    alpha = measure.min_atom()
    log_inv = math.log(1.0 / alpha)
    norms = d.squared_norms()
    sizes = np.array([m.bit_count() for m in range(norms.shape[0])])
    terms = []
    m2_sum = 0.0
    for i in range(f.n):
        keep = (np.arange(norms.shape[0]) >> i & 1).astype(bool)
        m2_sum += float((norms[keep] / sizes[keep]).sum())
        delta_table = d.delta(i)
        g = QaryFunction(q=f.q, n=f.n, codomain="real", out_q=None, table=delta_table)
        l2 = lp_norm(g, measure, 2.0)
        if l2 <= 1e-15:
            continue  # coordinate does not appear in f
        l1 = lp_norm(g, measure, 1.0)
        log_ratio = math.log(l2 / l1)
        degenerate = log_ratio <= 1e-12
        term = None if degenerate else l2 * l2 / log_ratio
        terms.append(
            CoordinateTerm(
                coord=i,
                influence_sq=l2 * l2,
                l1=l1,
                l2=l2,
                log_ratio=log_ratio,
                term=term,
                degenerate=degenerate,
            )
        )
    if variance <= 1e-15:
        return TalagrandReport(
            variance=variance,
            terms=tuple(terms),
            sum_terms=0.0,
            log_inv_min_atom=log_inv,
            rhs_no_constant=None,
            empirical_c=None,
            m2_sum=m2_sum,
            constant_function=True,
        )
    usable = [t.term for t in terms if t.term is not None]
    sum_terms = float(sum(usable))
    rhs = log_inv * sum_terms if usable else None
    empirical_c = (variance / rhs) if rhs else None
    return TalagrandReport(
        variance=variance,
        terms=tuple(terms),
        sum_terms=sum_terms,
        log_inv_min_atom=log_inv,
        rhs_no_constant=rhs,
        empirical_c=empirical_c,
        m2_sum=m2_sum,
        constant_function=False,
    )


