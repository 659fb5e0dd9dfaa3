"""Inequality checkers and threshold calculators for the hardness pipeline.

Each checker evaluates one standalone bound numerically: the postselection
conditional-stability lemma, the total-variation budget, the Gibbs
perturbation bound, the cosh lower bound, the logical-failure chain, and
the degree-temperature frontier.  Checkers emit verdict records shaped
{"check", "inputs", "values", "ok"} for the CLI verify command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .caps import check_dense
from .errors import InputError
from .pauli import PauliSum
from .simulate import Distribution, q_of_beta

Q_STAR = 0.134


def verdict(check: str, inputs: dict, values: dict, ok: bool) -> dict:
    return {"check": check, "inputs": inputs, "values": values, "ok": bool(ok)}


@dataclass(frozen=True)
class ThresholdReport:
    """The hardness-rate constant and its inverse-temperature form."""

    q_star: float
    beta_star: float
    round_trip_q: float
    in_range_ok: bool

    def to_json_dict(self) -> dict:
        return {
            "q_star": self.q_star,
            "beta_star": self.beta_star,
            "round_trip_q": self.round_trip_q,
            "in_range_ok": self.in_range_ok,
        }


def threshold_report() -> ThresholdReport:
    beta_star = math.log((1.0 - Q_STAR) / Q_STAR)
    round_trip = q_of_beta(beta_star)
    return ThresholdReport(
        q_star=Q_STAR,
        beta_star=beta_star,
        round_trip_q=round_trip,
        in_range_ok=1.86 <= beta_star <= 1.87 and abs(round_trip - Q_STAR) <= 1e-12,
    )


# --- postselection stability ------------------------------------------------


def postselect_gap(
    p: Distribution,
    p_prime: Distribution,
    delta: float,
    decision_bit: int = 0,
    postselect_mask: int | None = None,
) -> tuple[float, bool]:
    """Gap between the two conditionals of the decision bit given y = 0.

    y is the postselected register (all bits but the decision bit unless a
    mask narrows it); the event is y identically zero.  Returns the
    conditional gap |P'(x=1 | y=0) - P(x=1 | y=0)| and whether the premise
    sum|P' - P| < (delta / (2 + delta)) P(y=0) holds.  The conditional
    stability guarantee needs 0 < delta < 1/2; when the premise fails the
    gap is still reported but nothing is guaranteed about it.
    """
    if not 0.0 < delta < 0.5:
        raise InputError(f"delta must lie in (0, 1/2), got {delta}")
    if p.n != p_prime.n:
        raise InputError(f"bit lengths differ: {p.n} vs {p_prime.n}")
    n = p.n
    if not 0 <= decision_bit < n:
        raise InputError(f"decision bit {decision_bit} out of range for n = {n}")
    if postselect_mask is None:
        postselect_mask = ((1 << n) - 1) ^ (1 << decision_bit)
    if postselect_mask >> n or postselect_mask < 0:
        raise InputError(f"postselect mask {postselect_mask:#x} out of range for n = {n}")
    if postselect_mask & (1 << decision_bit):
        raise InputError("postselect mask must not cover the decision bit")

    pv = p.as_probs()
    qv = p_prime.as_probs()
    idx = np.arange(1 << n)
    event = (idx & postselect_mask) == 0
    decided = (idx & (1 << decision_bit)) != 0

    l1 = float(np.abs(pv - qv).sum())
    p_event = float(pv[event].sum())
    if p_event <= 0.0:
        raise InputError("postselection event has zero probability under P")
    premise_ok = l1 < (delta / (2.0 + delta)) * p_event

    q_event = float(qv[event].sum())
    if q_event <= 0.0:
        return math.inf, premise_ok
    p_cond = float(pv[event & decided].sum()) / p_event
    q_cond = float(qv[event & decided].sum()) / q_event
    return abs(q_cond - p_cond), premise_ok


# --- budget formulas --------------------------------------------------------


def tvd_budget(n: int, q: float) -> float:
    """(1-q)^n 2^{-6n-4} / 5, the closeness target for the sampled family."""
    if n < 0:
        raise InputError(f"qubit count must be >= 0, got {n}")
    if not (math.isfinite(q) and 0.0 <= q <= 1.0):
        raise InputError(f"rate must lie in [0, 1], got {q}")
    return (1.0 - q) ** n * 2.0 ** (-6 * n - 4) / 5.0


def prep_epsilon(n: int, beta: float) -> float:
    """(1/9) (1 + e^{-beta})^{-n} 2^{-6n-4}, the state-preparation target."""
    if n < 0:
        raise InputError(f"qubit count must be >= 0, got {n}")
    if math.isnan(beta):
        raise InputError("beta must not be NaN")
    return (1.0 + math.exp(-beta)) ** (-n) * 2.0 ** (-6 * n - 4) / 9.0


def prep_runtime(n: int, d: int, ell: int, beta: float, eps: float) -> float:
    """2^{4 ell} 2^d e^beta n poly(log(n/eps), ell, beta), unit constants.

    poly is instantiated as the product of max(arg, 1); an order-of-magnitude
    indicator of the formula's scaling, not a timing claim.
    """
    if n < 1 or d < 0 or ell < 0:
        raise InputError("need n >= 1, d >= 0, ell >= 0")
    if not (eps > 0.0 and math.isfinite(eps)):
        raise InputError(f"eps must be positive and finite, got {eps}")
    if math.isnan(beta) or beta < 0:
        raise InputError(f"beta must be >= 0, got {beta}")
    poly = max(math.log(n / eps), 1.0) * max(float(ell), 1.0) * max(beta, 1.0)
    return 2.0 ** (4 * ell) * 2.0**d * math.exp(beta) * n * poly


# --- Gibbs perturbation -----------------------------------------------------


def _as_hermitian_matrix(h: "PauliSum | np.ndarray") -> np.ndarray:
    if isinstance(h, PauliSum):
        check_dense(h.n, 8, "Gibbs perturbation check")
        return h.to_dense(cap=8)
    m = np.asarray(h, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > 256:
        raise InputError(f"matrix dimension {m.shape[0]} exceeds the dense limit 256")
    if np.abs(m - m.conj().T).max() > 1e-10:
        raise InputError("matrix is not Hermitian")
    return m


def _gibbs_density(m: np.ndarray) -> np.ndarray:
    evals, vecs = np.linalg.eigh(m)
    factors = np.exp(-(evals - evals.min()))
    factors /= factors.sum()
    return (vecs * factors) @ vecs.conj().T


def gibbs_perturbation_check(
    h1: "PauliSum | np.ndarray", h2: "PauliSum | np.ndarray"
) -> tuple[float, float, bool]:
    """Trace-norm distance of normalized e^{-H} states vs 2(e^{||H1-H2||} - 1)."""
    m1 = _as_hermitian_matrix(h1)
    m2 = _as_hermitian_matrix(h2)
    if m1.shape != m2.shape:
        raise InputError(f"dimension mismatch: {m1.shape} vs {m2.shape}")
    lhs = float(np.abs(np.linalg.eigvalsh(_gibbs_density(m1) - _gibbs_density(m2))).sum())
    op_norm = float(np.abs(np.linalg.eigvalsh(m1 - m2)).max())
    rhs = 2.0 * (math.exp(op_norm) - 1.0)
    return lhs, rhs, lhs <= rhs + 1e-12


# --- cosh bound and failure chain -------------------------------------------


def cosh_bound_check(grid_step: float, x_max: float = 2.6) -> dict:
    """Scan cosh(x) >= e^{x^2/20} and the chain's cosh(x/2) margin.

    The stated inequality carries a |x| <= 2.6 domain; points beyond it
    (when x_max is raised) are evaluated and reported but excluded from the
    verdict.  The chain margin cosh(x/2) - e^{x^2/20} is exactly zero at
    x = 0, so its in-domain minimum is 0 up to float error.
    """
    if not (grid_step > 0.0 and math.isfinite(grid_step)):
        raise InputError(f"grid step must be positive, got {grid_step}")
    xs = np.arange(-x_max, x_max + grid_step / 2.0, grid_step)
    rhs = np.exp(xs**2 / 20.0)
    stated = np.cosh(xs) - rhs
    chain = np.cosh(xs / 2.0) - rhs
    in_domain = np.abs(xs) <= 2.6 + 1e-12
    stated_min = float(stated[in_domain].min())
    chain_min = float(chain[in_domain].min())
    values = {
        "stated_min_margin": stated_min,
        "stated_argmin": float(xs[in_domain][stated[in_domain].argmin()]),
        "chain_min_margin": chain_min,
        "chain_argmin": float(xs[in_domain][chain[in_domain].argmin()]),
        "grid_points": int(xs.size),
    }
    if not in_domain.all():
        outside = ~in_domain
        values["outside_domain_points"] = int(outside.sum())
        values["outside_stated_min_margin"] = float(stated[outside].min())
        values["outside_chain_min_margin"] = float(chain[outside].min())
    ok = stated_min >= 0.0 and chain_min >= -1e-12
    return verdict(
        "cosh_bound", {"grid_step": grid_step, "x_max": x_max, "domain": 2.6}, values, ok
    )


def p_fail_chain(beta: float, delta: float) -> dict:
    """Every line of the logical-failure bound chain at r = delta/5.

    Lines one to three are algebraically equal (4q(1-q) with
    q = e^{-beta}/(1+e^{-beta}) collapses to cosh(beta/2)^{-2}), so the
    ordering check allows relative error 1e-9; the final exponential line
    is a strict relaxation away from beta = 0.  Both circulating exponent
    forms (beta^2 delta / 100 and / 40) are reported against the 0.134
    threshold without adjudication.
    """
    if not (math.isfinite(beta) and beta > 0.0):
        raise InputError(f"beta must be positive and finite, got {beta}")
    if not (math.isfinite(delta) and delta >= 5.0):
        raise InputError(f"degree must be >= 5, got {delta}")
    r = delta / 5.0
    q = q_of_beta(beta)
    line1 = (4.0 * q * (1.0 - q)) ** (r / 2.0)
    line2 = (4.0 * math.exp(-beta) / (1.0 + math.exp(-beta)) ** 2) ** (delta / 10.0)
    line3 = math.cosh(beta / 2.0) ** (-delta / 5.0)
    line4 = math.exp(-(beta**2) * delta / 100.0)
    line4_alt = math.exp(-(beta**2) * delta / 40.0)
    rel = 1e-9
    ordered = (
        line1 <= line2 * (1.0 + rel)
        and line2 <= line3 * (1.0 + rel)
        and line3 <= line4 * (1.0 + rel)
    )
    values = {
        "r": r,
        "q": q,
        "product_form": line1,
        "rate_form": line2,
        "cosh_form": line3,
        "exp_form_100": line4,
        "exp_form_40": line4_alt,
        "below_q_star_100": line4 < Q_STAR,
        "below_q_star_40": line4_alt < Q_STAR,
    }
    return verdict("p_fail_chain", {"beta": beta, "delta": delta}, values, ordered)


def degree_frontier(delta: float, tol: float = 1e-6) -> float:
    """Smallest beta with the exact failure bound below 0.134 at r = delta/5.

    The bound cosh(beta/2)^{-r} is strictly decreasing in beta, so bisection
    converges; closed form 2 arccosh((1/0.134)^{5/delta}) is the test oracle.
    """
    if not (math.isfinite(delta) and delta >= 5.0):
        raise InputError(f"degree must be >= 5, got {delta}")
    r = delta / 5.0

    def bound(beta: float) -> float:
        q = q_of_beta(beta)
        return (4.0 * q * (1.0 - q)) ** (r / 2.0)

    lo, hi = 1e-9, 64.0
    if bound(hi) >= Q_STAR:
        raise InputError(f"failure bound never crosses {Q_STAR} below beta = {hi}")
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if bound(mid) < Q_STAR:
            hi = mid
        else:
            lo = mid
    return hi
