"""Frame-covariance checking, reduction to Bell-local form, and the finite no-go scan.

A model is covariant when each party's outcome is the same function of
(state, settings, lambda) in both time orderings:

    F_AB(a, lam) = S_BA(a, b, lam)   (Alice)
    F_BA(b, lam) = S_AB(a, b, lam)   (Bob)

for every probe. Covariance forces the second-party functions to ignore the
other setting, so a covariant model reduces to a Bell-local one. The finite
scan verifies the consequence exhaustively at two settings per side: all 4096
deterministic strategies, exact integer CHSH, local bound 2 vs unconstrained 4.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import HiddenPoint, Outcome, QuantumState, TimeOrdering
from .models import OrderedModel, eval_pairs
from .stats import exact_joint


class Side(enum.Enum):
    ALICE = "alice"
    BOB = "bob"


@dataclass(frozen=True)
class Witness:
    """One pointwise covariance failure: first-frame vs second-frame outcome."""

    lam: HiddenPoint
    a: object
    b: object
    side: Side
    first_value: Outcome
    second_value: Outcome

    def to_dict(self) -> dict:
        return {
            "lambda": list(self.lam.coords),
            "a": [self.a.x, self.a.y, self.a.z],
            "b": [self.b.x, self.b.y, self.b.z],
            "side": self.side.value,
            "first_value": int(self.first_value),
            "second_value": int(self.second_value),
        }


@dataclass(frozen=True)
class CovarianceReport:
    """Probe counts, violation fraction, and capped witness list."""

    checked: int
    violations: int
    witnesses: tuple
    violation_fraction: float

    def to_dict(self) -> dict:
        return {
            "checked": self.checked,
            "violations": self.violations,
            "violation_fraction": self.violation_fraction,
            "witnesses": [w.to_dict() for w in self.witnesses],
        }


class NotCovariantError(ValueError):
    """Raised when reduction is attempted on a non-covariant model."""

    def __init__(self, witness: Witness, report: CovarianceReport):
        self.witness = witness
        self.report = report
        super().__init__(
            "model is not covariant on probe set: "
            f"{witness.side.value} side, lambda={witness.lam.coords}, "
            f"first={int(witness.first_value)}, second={int(witness.second_value)}"
        )


def _as_lam_array(lams, dim: int) -> np.ndarray:
    if isinstance(lams, np.ndarray):
        arr = lams
    else:
        arr = np.array([lam.as_array() if isinstance(lam, HiddenPoint) else lam
                        for lam in lams], dtype=float)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"lambda dimension: expected (n, {dim}), got {arr.shape}")
    return arr


def check_covariance(m: OrderedModel, state, setting_pairs, lams,
                     witness_cap: int = 32) -> CovarianceReport:
    """Count pointwise covariance failures over all (lambda, a, b) probes.

    A probe violates if either party's first-frame outcome differs from its
    second-frame outcome; witnesses record each failing side, lowest probe
    index first, up to the cap.
    """
    arr = _as_lam_array(lams, m.lambda_dim)
    checked = 0
    violations = 0
    witnesses = []
    for a, b in setting_pairs:
        f_ab = m.first_values(TimeOrdering.AB, state, a, arr)
        s_ba = m.second_values(TimeOrdering.BA, state, a, b, arr)
        f_ba = m.first_values(TimeOrdering.BA, state, b, arr)
        s_ab = m.second_values(TimeOrdering.AB, state, a, b, arr)
        alice_bad = f_ab != s_ba
        bob_bad = f_ba != s_ab
        checked += arr.shape[0]
        violations += int(np.count_nonzero(alice_bad | bob_bad))
        if len(witnesses) < witness_cap:
            for i in np.nonzero(alice_bad | bob_bad)[0]:
                lam = HiddenPoint(tuple(arr[i]))
                if alice_bad[i] and len(witnesses) < witness_cap:
                    witnesses.append(Witness(lam, a, b, Side.ALICE,
                                             Outcome(int(f_ab[i])), Outcome(int(s_ba[i]))))
                if bob_bad[i] and len(witnesses) < witness_cap:
                    witnesses.append(Witness(lam, a, b, Side.BOB,
                                             Outcome(int(f_ba[i])), Outcome(int(s_ab[i]))))
                if len(witnesses) >= witness_cap:
                    break
    fraction = violations / checked if checked else 0.0
    return CovarianceReport(checked=checked, violations=violations,
                            witnesses=tuple(witnesses), violation_fraction=fraction)


class LocalModelView:
    """Bell-local view of a covariant model: each party answers from its own
    setting and lambda alone (Alice via the AB-first function, Bob via BA-first)."""

    def __init__(self, m: OrderedModel, state):
        self._m = m
        self._state = state
        self.lambda_dim = m.lambda_dim

    def responds_alice_values(self, a, lams) -> np.ndarray:
        return self._m.first_values(TimeOrdering.AB, self._state, a, lams)

    def responds_bob_values(self, b, lams) -> np.ndarray:
        return self._m.first_values(TimeOrdering.BA, self._state, b, lams)

    def responds_alice(self, a, lam: HiddenPoint) -> Outcome:
        return self._m.first(TimeOrdering.AB, self._state, a, lam)

    def responds_bob(self, b, lam: HiddenPoint) -> Outcome:
        return self._m.first(TimeOrdering.BA, self._state, b, lam)

    def as_ordered_model(self) -> OrderedModel:
        return _LocalViewModel(self)


class _LocalViewModel(OrderedModel):
    """OrderedModel adapter for a local view; both orderings answer identically."""

    name = "local-view"

    def __init__(self, view: LocalModelView):
        self._view = view
        self.lambda_dim = view.lambda_dim

    def first_values(self, ordering, state, setting_first, lams):
        if ordering is TimeOrdering.AB:
            return self._view.responds_alice_values(setting_first, lams)
        return self._view.responds_bob_values(setting_first, lams)

    def second_values(self, ordering, state, a, b, lams):
        if ordering is TimeOrdering.AB:
            return self._view.responds_bob_values(b, lams)
        return self._view.responds_alice_values(a, lams)


def reduce_to_local(m: OrderedModel, state, setting_pairs, lams,
                    witness_cap: int = 32) -> LocalModelView:
    """Reduce a covariant model to its Bell-local view, or fail with a witness.

    On success the view's joint statistics equal the original model's on the
    probe set by construction.
    """
    report = check_covariance(m, state, setting_pairs, lams, witness_cap=witness_cap)
    if report.violations:
        raise NotCovariantError(report.witnesses[0], report)
    return LocalModelView(m, state)


# ---------------------------------------------------------------------------
# Finite scenario: two settings per side, one deterministic lambda atom.

@dataclass(frozen=True)
class FiniteStrategy:
    """Deterministic strategy over indexed settings x, y in {0,1}.

    f_ab[x] / s_ab[2x+y] answer the AB frame, f_ba[y] / s_ba[2x+y] the BA
    frame; all entries are +/-1.
    """

    f_ab: tuple
    s_ab: tuple
    f_ba: tuple
    s_ba: tuple

    def __post_init__(self):
        for name in ("f_ab", "s_ab", "f_ba", "s_ba"):
            vals = getattr(self, name)
            if any(v not in (-1, 1) for v in vals):
                raise ValueError(f"{name} entries must be +/-1")

    @classmethod
    def from_index(cls, index: int) -> "FiniteStrategy":
        if not (0 <= index < 4096):
            raise ValueError("strategy index must be in [0, 4096)")
        bits = [(index >> i) & 1 for i in range(12)]
        vals = [1 - 2 * bit for bit in bits]  # bit 0 -> +1, bit 1 -> -1
        return cls(f_ab=tuple(vals[0:2]), s_ab=tuple(vals[2:6]),
                   f_ba=tuple(vals[6:8]), s_ba=tuple(vals[8:12]))

    @property
    def index(self) -> int:
        vals = list(self.f_ab) + list(self.s_ab) + list(self.f_ba) + list(self.s_ba)
        return sum(((1 - v) // 2) << i for i, v in enumerate(vals))

    def correlation_table(self, ordering: TimeOrdering):
        """E(x,y) per setting pair, exact integers in {-1, +1}."""
        table = [[0, 0], [0, 0]]
        for x in (0, 1):
            for y in (0, 1):
                if ordering is TimeOrdering.AB:
                    table[x][y] = self.f_ab[x] * self.s_ab[2 * x + y]
                else:
                    table[x][y] = self.s_ba[2 * x + y] * self.f_ba[y]
        return table

    def chsh(self, ordering: TimeOrdering) -> int:
        t = self.correlation_table(ordering)
        return t[0][0] + t[0][1] + t[1][0] - t[1][1]

    @property
    def covariant(self) -> bool:
        return all(self.s_ba[2 * x + y] == self.f_ab[x] and
                   self.s_ab[2 * x + y] == self.f_ba[y]
                   for x in (0, 1) for y in (0, 1))


def forced_covariant_extension(f_ab, f_ba) -> FiniteStrategy:
    """The unique covariant strategy extending single-setting responses."""
    s_ab = tuple(f_ba[y] for x in (0, 1) for y in (0, 1))
    s_ba = tuple(f_ab[x] for x in (0, 1) for y in (0, 1))
    return FiniteStrategy(f_ab=tuple(f_ab), s_ab=s_ab, f_ba=tuple(f_ba), s_ba=s_ba)


@dataclass(frozen=True)
class StrategyRow:
    index: int
    covariant: bool
    s_ab: int
    s_ba: int


CONVEXITY_NOTE = (
    "mixtures over lambda atoms are convex combinations of deterministic "
    "strategies, so no mixture exceeds the deterministic maxima reported here"
)


@dataclass(frozen=True)
class EnumerationSummary:
    total: int
    covariant: int
    max_abs_s: int
    max_abs_s_covariant: int
    rows: tuple = field(repr=False)
    convexity_note: str = CONVEXITY_NOTE

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "covariant": self.covariant,
            "max_abs_s": self.max_abs_s,
            "max_abs_s_covariant": self.max_abs_s_covariant,
            "convexity_note": self.convexity_note,
        }


def enumerate_finite(lambda_atoms: int = 1) -> EnumerationSummary:
    """Exhaustive scan of all 4096 two-setting deterministic strategies.

    CHSH is evaluated in the AB frame (frames disagree for non-covariant
    strategies); the per-strategy rows also carry the BA-frame value.
    """
    if lambda_atoms != 1:
        raise ValueError(
            "only one lambda atom is enumerated; mixtures are covered by convexity"
        )
    rows = []
    covariant_count = 0
    max_s = 0
    max_s_cov = 0
    for index in range(4096):
        strat = FiniteStrategy.from_index(index)
        s_ab = strat.chsh(TimeOrdering.AB)
        s_ba = strat.chsh(TimeOrdering.BA)
        cov = strat.covariant
        rows.append(StrategyRow(index=index, covariant=cov, s_ab=s_ab, s_ba=s_ba))
        max_s = max(max_s, abs(s_ab))
        if cov:
            covariant_count += 1
            max_s_cov = max(max_s_cov, abs(s_ab))
    return EnumerationSummary(total=4096, covariant=covariant_count,
                              max_abs_s=max_s, max_abs_s_covariant=max_s_cov,
                              rows=tuple(rows))


def strategies_to_csv(summary: EnumerationSummary) -> str:
    lines = ["id,covariant,S_AB,S_BA"]
    for row in summary.rows:
        lines.append(f"{row.index},{int(row.covariant)},{row.s_ab},{row.s_ba}")
    return "\n".join(lines) + "\n"


def frame_consistency(m: OrderedModel, state, a, b, grid: int,
                      workers: int = 1) -> float:
    """Max cell-wise |P_AB - P_BA| between the two orderings' exact tables.

    Quantifies statistical frame independence, which can hold even when
    pointwise covariance fails.
    """
    t_ab = exact_joint(m, TimeOrdering.AB, state, a, b, grid, workers=workers)
    t_ba = exact_joint(m, TimeOrdering.BA, state, a, b, grid, workers=workers)
    return float(np.max(np.abs(t_ab.probs - t_ba.probs)))
