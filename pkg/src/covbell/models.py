"""Ordered response models: four functions (F_AB, S_AB, F_BA, S_BA) of (state, settings, lambda).

"First" takes only the first party's setting; "second" may depend on both,
which is what makes a model nonlocal. Built-ins:

  - GisinSingletModel: explicit nonlocal threshold model on the unit square
    reproducing singlet statistics in both orderings (BA by role swap).
  - LocalSphereModel: a Bell-local reference model on the sphere.
  - determinize(): wraps a stochastic response rule into a deterministic
    model by appending two uniform coordinates and thresholding.

All evaluation is pure; models are immutable after construction. Batch
methods take an (n, d) array of hidden points and return (n,) arrays of +/-1.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import HiddenPoint, MeasurementSetting, Outcome, QuantumState, TimeOrdering, dot


class OrderedModel(abc.ABC):
    """Deterministic response model with per-ordering first/second functions.

    In ordering AB, ``setting_first`` is Alice's a and ``first`` returns alpha;
    in ordering BA it is Bob's b and ``first`` returns beta. ``second`` always
    receives (a, b) in (Alice, Bob) role order and returns the other party's
    outcome.
    """

    lambda_dim: int = 0
    name: str = "ordered-model"

    @abc.abstractmethod
    def first_values(self, ordering, state, setting_first, lams) -> np.ndarray:
        """Vectorized first-party outcomes (+/-1 ints) over rows of lams."""

    @abc.abstractmethod
    def second_values(self, ordering, state, a, b, lams) -> np.ndarray:
        """Vectorized second-party outcomes (+/-1 ints) over rows of lams."""

    def first(self, ordering, state, setting_first, lam: HiddenPoint) -> Outcome:
        vals = self.first_values(ordering, state, setting_first, self._one(lam))
        return Outcome(int(vals[0]))

    def second(self, ordering, state, a, b, lam: HiddenPoint) -> Outcome:
        vals = self.second_values(ordering, state, a, b, self._one(lam))
        return Outcome(int(vals[0]))

    def _one(self, lam: HiddenPoint) -> np.ndarray:
        if len(lam) != self.lambda_dim:
            raise ValueError(
                f"lambda dimension: model expects {self.lambda_dim}, got {len(lam)}"
            )
        return lam.as_array().reshape(1, self.lambda_dim)


@dataclass(frozen=True)
class OutcomePair:
    """Alice's and Bob's outcomes for one run."""

    alpha: Outcome
    beta: Outcome


def eval_pairs(m: OrderedModel, ordering, state, a, b, lams):
    """Vectorized (alpha, beta) outcome arrays for each hidden point row."""
    lams = np.asarray(lams, dtype=float)
    if lams.ndim != 2 or lams.shape[1] != m.lambda_dim:
        raise ValueError(
            f"lambda dimension: model expects (n, {m.lambda_dim}), got {lams.shape}"
        )
    if ordering is TimeOrdering.AB:
        alphas = m.first_values(ordering, state, a, lams)
        betas = m.second_values(ordering, state, a, b, lams)
    else:
        betas = m.first_values(ordering, state, b, lams)
        alphas = m.second_values(ordering, state, a, b, lams)
    return alphas, betas


def eval_pair(m: OrderedModel, ordering, state, a, b, lam: HiddenPoint) -> OutcomePair:
    """Outcome pair for a single hidden point, respecting the frame's ordering."""
    if len(lam) != m.lambda_dim:
        raise ValueError(f"lambda dimension: model expects {m.lambda_dim}, got {len(lam)}")
    alphas, betas = eval_pairs(m, ordering, state, a, b, lam.as_array().reshape(1, -1))
    return OutcomePair(Outcome(int(alphas[0])), Outcome(int(betas[0])))


def _require_singlet(state):
    if state is not QuantumState.SINGLET:
        raise ValueError("only the singlet state is supported")


def _pm(cond) -> np.ndarray:
    return np.where(cond, 1, -1).astype(np.int8)


class GisinSingletModel(OrderedModel):
    """Nonlocal threshold model on the unit square reproducing singlet statistics.

    lambda = (r_A, r_B) uniform on [0,1]^2. In the AB ordering:
        F_AB = +1  iff  r_A <= 1/2
        S_AB = +1  iff  (r_A <= 1/2 and r_B <= (1 - a.b)/2)
                     or (r_A >  1/2 and r_B <= (1 + a.b)/2)
    The BA ordering is the role-swap mirror (A <-> B, r_A <-> r_B), which
    yields identical statistics in both frames but is not pointwise covariant.
    """

    lambda_dim = 2
    name = "gisin-singlet"

    def first_values(self, ordering, state, setting_first, lams):
        _require_singlet(state)
        r_first = lams[:, 0] if ordering is TimeOrdering.AB else lams[:, 1]
        return _pm(r_first <= 0.5)

    def second_values(self, ordering, state, a, b, lams):
        _require_singlet(state)
        c = dot(a, b)
        if ordering is TimeOrdering.AB:
            r_first, r_second = lams[:, 0], lams[:, 1]
        else:
            r_first, r_second = lams[:, 1], lams[:, 0]
        lo, hi = (1.0 - c) / 2.0, (1.0 + c) / 2.0
        plus = np.where(r_first <= 0.5, r_second <= lo, r_second <= hi)
        return _pm(plus)


class LocalSphereModel(OrderedModel):
    """Bell-local reference model: shared random direction on the sphere.

    lambda = (u, v) maps to a uniform unit vector via cos(theta) = 2u - 1,
    phi = 2*pi*v. Alice outputs sign(a.lam_hat), Bob outputs -sign(b.lam_hat),
    in every ordering; the second party ignores the first party's setting.
    sign(0) counts as +1.
    """

    lambda_dim = 2
    name = "local-sphere"

    @staticmethod
    def _directions(lams):
        cos_t = 2.0 * lams[:, 0] - 1.0
        sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t * cos_t))
        phi = 2.0 * np.pi * lams[:, 1]
        return np.column_stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t])

    def _alice(self, a, lams):
        return _pm(self._directions(lams) @ a.as_array() >= 0.0)

    def _bob(self, b, lams):
        return -self._alice(b, lams)

    def first_values(self, ordering, state, setting_first, lams):
        _require_singlet(state)
        if ordering is TimeOrdering.AB:
            return self._alice(setting_first, lams)
        return self._bob(setting_first, lams)

    def second_values(self, ordering, state, a, b, lams):
        _require_singlet(state)
        if ordering is TimeOrdering.AB:
            return self._bob(b, lams)
        return self._alice(a, lams)


@dataclass(frozen=True)
class StochasticResponse:
    """Stochastic response rule: probabilities that each outcome is +1.

    Callables are vectorized over hidden points:
      p_first(ordering, state, setting_first, lams) -> (n,) in [0,1]
      p_second(ordering, state, a, b, first_vals, lams) -> (n,) in [0,1]
    where first_vals is the (n,) array of +/-1 first outcomes.
    """

    lambda_dim: int
    p_first: Callable
    p_second: Callable
    name: str = "stochastic"


def _check_probs(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise ValueError("response probability outside [0,1]")
    return p


class DeterminizedModel(OrderedModel):
    """Deterministic wrapper around a stochastic rule via threshold sampling.

    Appends two uniform coordinates (u1, u2) to lambda, wired per party:
    Alice thresholds u1, Bob thresholds u2, in both orderings. In ordering AB
    the first outcome is therefore +1 iff u1 <= p_first and the second is +1
    iff u2 <= p_second given the first; in BA the coordinates swap roles.
    Party-symmetric wiring keeps setting-independent rules pointwise covariant.
    """

    def __init__(self, sr: StochasticResponse):
        self._sr = sr
        self.lambda_dim = sr.lambda_dim + 2
        self.name = f"determinized-{sr.name}"

    def _split(self, lams):
        d = self._sr.lambda_dim
        return lams[:, :d], lams[:, d], lams[:, d + 1]

    def first_values(self, ordering, state, setting_first, lams):
        base, u_alice, u_bob = self._split(lams)
        u = u_alice if ordering is TimeOrdering.AB else u_bob
        p = _check_probs(self._sr.p_first(ordering, state, setting_first, base))
        return _pm(u <= p)

    def second_values(self, ordering, state, a, b, lams):
        base, u_alice, u_bob = self._split(lams)
        if ordering is TimeOrdering.AB:
            setting_first, u_first, u_second = a, u_alice, u_bob
        else:
            setting_first, u_first, u_second = b, u_bob, u_alice
        p1 = _check_probs(self._sr.p_first(ordering, state, setting_first, base))
        first_vals = _pm(u_first <= p1)
        p2 = _check_probs(self._sr.p_second(ordering, state, a, b, first_vals, base))
        return _pm(u_second <= p2)


def determinize(sr: StochasticResponse) -> OrderedModel:
    """Deterministic model equivalent in distribution to the stochastic rule."""
    return DeterminizedModel(sr)


def stochastic_singlet() -> StochasticResponse:
    """Order-symmetric stochastic singlet rule: P(first=+1) = 1/2,
    P(second=+1 | first) = (1 - first * a.b) / 2."""

    def p_first(ordering, state, setting_first, lams):
        _require_singlet(state)
        return np.full(lams.shape[0], 0.5)

    def p_second(ordering, state, a, b, first_vals, lams):
        _require_singlet(state)
        return (1.0 - first_vals * dot(a, b)) / 2.0

    return StochasticResponse(lambda_dim=0, p_first=p_first, p_second=p_second, name="singlet")


def make_gisin_singlet() -> OrderedModel:
    return GisinSingletModel()


def make_local_sphere() -> OrderedModel:
    return LocalSphereModel()


MODEL_REGISTRY = {
    "gisin-singlet": make_gisin_singlet,
    "local-sphere": make_local_sphere,
    "determinized-singlet": lambda: determinize(stochastic_singlet()),
}


def make_model(name: str) -> OrderedModel:
    try:
        factory = MODEL_REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown model {name!r}; available: {', '.join(sorted(MODEL_REGISTRY))}"
        ) from None
    return factory()
