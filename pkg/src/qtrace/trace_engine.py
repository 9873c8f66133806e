"""Candidate traces from theta quotients, their moments, and the oracles.

A twisted trace is identified with its moment sequence c_i = T(Z**i),
packaged as the weight series w = sum c_i z**-i.  For the twist exponent
``l`` carried by the algebra parameters, the defining relations force

    sum_m p_m q**-m c_{m+j}  =  q**(2j-l) sum_m p_m q**m c_{m+j-l}

for every integer j, equivalently w(q**2 z) = q**-l z**-l w(z) away from
the kernel of multiplication by P.  Everything in this module is built
from that recurrence or checked against it through the normal-ordering
engine; the published sign conventions enter only through the orientation
flag resolved in ``solve_constraints``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .laurent import BilateralSeries, LaurentPoly
from .qweyl_algebra import (
    AlgebraElement,
    AlgebraParams,
    apply_g,
    degree_zero_part,
    multiply,
    random_element,
)
from .theta import (
    EvaluationSingularityError,
    ThetaParams,
    multiplier,
    pole_proximity_mask,
    theta_quotient,
)


class WindowTooSmallError(ValueError):
    pass


class InfeasibleConfigurationError(ValueError):
    pass


# ----------------------------------------------------------------------
# moment tables


@dataclass
class MomentTable:
    """Window of moments c_i, |i| <= W, optionally normalized to c_0 = 1."""

    W: int
    values: np.ndarray  # index i + W
    normalized: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (2 * self.W + 1,):
            raise ValueError("moment array does not match window")

    def get(self, i: int) -> complex:
        if abs(i) > self.W:
            raise WindowTooSmallError(f"moment index {i} outside window ±{self.W}")
        return complex(self.values[i + self.W])

    def normalize(self) -> "MomentTable":
        c0 = self.get(0)
        if c0 == 0:
            raise ValueError("cannot normalize: c_0 = 0")
        return MomentTable(self.W, self.values / c0, normalized=True)

    def conj_symmetry_defect(self) -> float:
        d = np.abs(self.values - np.conj(self.values[::-1]))
        return float(np.max(d))

    def strict_bound(self) -> tuple[float, float]:
        """(max |c_i| over i != 0, margin 1 - max)."""
        mags = np.abs(self.values).copy()
        mags[self.W] = 0.0
        mx = float(np.max(mags))
        return mx, 1.0 - mx

    def perturbed(self, i: int, delta: complex) -> "MomentTable":
        vals = self.values.copy()
        vals[i + self.W] += delta
        return MomentTable(self.W, vals, normalized=False)

    def to_json_dict(self) -> dict:
        return {
            "W": self.W,
            "normalized": self.normalized,
            "c": {
                str(i): [self.get(i).real, self.get(i).imag]
                for i in range(-self.W, self.W + 1)
            },
        }


# ----------------------------------------------------------------------
# ansatz and constraints


def required_quasiperiod_multiplier(params: AlgebraParams) -> tuple[int, complex]:
    """(zpow, const) that w(q**2 z) = const * z**zpow * w(z) must satisfy.

    Derived from the trace recurrence above: zpow = -l and const = q**-l
    for the twist exponent l carried by params.  The test-suite re-derives
    this through the normal-ordering oracle.
    """
    l = params.l
    return (-l, complex(params.q ** (-l)))


@dataclass(frozen=True)
class ConstraintSolution:
    M: int
    N: int
    N_anti: int
    orientation: int
    feasible: bool
    g_exponent: int
    product_target: complex
    notes: tuple[str, ...] = ()


def poles_from_P(params: AlgebraParams) -> list[complex]:
    """r/q for every root r of P with q < |r| < 1/q, with multiplicity."""
    q = params.q
    out: list[complex] = []
    for r, mult in params.root_data.roots:
        if q < abs(r) < 1.0 / q:
            out.extend([r / q] * mult)
    return out


def solve_constraints(params: AlgebraParams, poles) -> ConstraintSolution:
    """Zero count and zero-product target for the quotient ansatz.

    The supplied twist (k, l) is read in the published orientation: the
    engine's quasi-periodicity multiplier forces the count N = M + lam for
    the oracle exponent lam, and the published count N = M - l corresponds
    to lam = -l.  That orientation is marked primary (orientation -1, the
    "k -> -k reading"); the opposite count is retained for cross-checks.
    Negative N means no trace of this shape exists.
    """
    M = len(poles)
    l = params.l
    lam = -l
    orientation = -1 if l != 0 else 1
    N = M + lam
    N_anti = M + l
    prod_beta = complex(np.prod([complex(b) for b in poles])) if poles else 1.0 + 0j
    # const matching: (-1)**(N-M) * prod(alpha)/prod(beta) * q**(2L) = q**-lam
    product_target = (-1.0) ** (lam % 2) * params.q ** (-lam) * prod_beta
    notes = []
    if l != 0:
        notes.append(
            "orientation -1 selected: oracle twist exponent is -l; the"
            f" anti-orientation count would be N={N_anti}"
        )
    if N < 0:
        notes.append("N < 0: no decaying trace of quotient shape exists")
    return ConstraintSolution(
        M=M,
        N=N,
        N_anti=N_anti,
        orientation=orientation,
        feasible=N >= 0,
        g_exponent=lam,
        product_target=complex(product_target),
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class TraceAnsatz:
    """Theta-quotient weight data: w = c * z**l_power * prod/prod."""

    c: complex
    l_power: int
    zeros: tuple[complex, ...]
    poles: tuple[complex, ...]
    params: AlgebraParams
    theta: ThetaParams
    gauge_phase: float = 0.0
    notes: tuple[str, ...] = ()

    def evaluate(self, z):
        return theta_quotient(
            z, self.zeros, self.poles, self.l_power, self.c, self.theta
        )

    def quotient_multiplier(self) -> tuple[int, complex]:
        return multiplier(self.zeros, self.poles, self.l_power, self.theta)

    def scaled(self, factor: complex) -> "TraceAnsatz":
        return replace(self, c=self.c * factor)

    def validate(self, const_tol: float = 1e-10) -> None:
        q = self.params.q
        for b in self.poles:
            if not 1.0 < abs(b) < q ** -2:
                raise ValueError(
                    f"pole {b:.6g} outside the annulus (1, q**-2)"
                )
            near = min(
                abs(q * b - r) / max(abs(r), 1.0)
                for r, _ in self.params.root_data.roots
            )
            if near > 1e-8:
                raise ValueError(f"q*pole {q * b:.6g} is not near a root of P")
        zpow, const = self.quotient_multiplier()
        zreq, creq = required_quasiperiod_multiplier(self.params)
        if zpow != zreq:
            raise ValueError(
                f"multiplier z-power {zpow} does not match required {zreq}"
            )
        if abs(const - creq) > const_tol * max(abs(creq), 1.0):
            raise ValueError(
                f"multiplier constant {const:.6g} does not match required {creq:.6g}"
            )


class GaugeError(ValueError):
    pass


def gauge_normalize(ansatz: TraceAnsatz) -> TraceAnsatz:
    """Rotate the configuration so the pole product is the real q**-M.

    The common unimodular rotation z -> e^{i phi} z acts on P by argument
    scaling (which preserves self-conjugacy) and on all zeros/poles by
    e^{-i phi}; phi = arg(prod beta)/M.  Rejects if |prod beta| is not
    q**-M, which signals a non-self-conjugate P or wrong poles.
    """
    M = len(ansatz.poles)
    if M == 0:
        return ansatz
    q = ansatz.params.q
    prod_beta = complex(np.prod([complex(b) for b in ansatz.poles]))
    expected = q ** (-M)
    if abs(abs(prod_beta) - expected) > 1e-8 * expected:
        raise GaugeError(
            f"|prod beta| = {abs(prod_beta):.12g} differs from q**-M ="
            f" {expected:.12g}; P is not self-conjugate or poles are wrong"
        )
    phi = cmath.phase(prod_beta) / M
    if phi == 0.0:
        return ansatz
    rot = cmath.exp(-1j * phi)
    new_params = ansatz.params.with_P(ansatz.params.P.scale_arg(cmath.exp(1j * phi)))
    return replace(
        ansatz,
        zeros=tuple(a * rot for a in ansatz.zeros),
        poles=tuple(b * rot for b in ansatz.poles),
        params=new_params,
        gauge_phase=ansatz.gauge_phase + phi,
    )


# ----------------------------------------------------------------------
# moments: contour sampling and the linear-system oracle


def _sample_count(W: int, samples: int | None) -> int:
    s = max(4096, 8 * W) if samples is None else samples
    return 1 << max(3, math.ceil(math.log2(s)))


def moments(
    ansatz: TraceAnsatz, W: int, samples: int | None = None
) -> MomentTable:
    """Moment window from uniform unit-circle samples of w and one FFT.

    c_i is the coefficient pairing with z**-i in w, so c_i equals the
    discrete Fourier sum (1/S) sum_t w(e^{i phi_t}) e^{+i i phi_t}.
    """
    S = _sample_count(W, samples)
    if S < 8 * W:
        raise ValueError("sample count must be at least 8W")
    grid = np.exp(2j * np.pi * np.arange(S) / S)
    if np.any(pole_proximity_mask(grid, ansatz.poles, ansatz.theta, 1e-6)):
        raise EvaluationSingularityError("a pole orbit comes within 1e-6 of |z|=1")
    vals = ansatz.evaluate(grid)
    spectrum = np.fft.fft(vals) / S
    table = np.array(
        [spectrum[(-i) % S] for i in range(-W, W + 1)], dtype=complex
    )
    return MomentTable(W, table)


@dataclass
class LinearSystemResult:
    table: MomentTable | None
    nullspace_dim: int
    lstsq_residual: float
    rows: int
    threshold: float

    def feasible(self, tol: float = 1e-6) -> bool:
        return self.table is not None and self.lstsq_residual <= tol


def _recurrence_rows(params: AlgebraParams, W: int):
    """Row dictionaries of the truncated trace recurrence on |i| <= W.

    Moments outside the window are dropped (they are exponentially small
    for decaying traces), which pins the tails and removes the growing
    recurrence solutions from the numerical nullspace.
    """
    q, l = params.q, params.l
    P = params.P
    spread = P.spread
    jmax = W + spread + abs(l) + 1
    rows = []
    for j in range(-jmax, jmax + 1):
        row: dict[int, complex] = {}
        for m, pm in P.coeffs.items():
            i1 = m + j
            if abs(i1) <= W:
                row[i1] = row.get(i1, 0.0) + pm * q ** (-m)
            i2 = m + j - l
            if abs(i2) <= W:
                row[i2] = row.get(i2, 0.0) - pm * q ** (m + 2 * j - l)
        if row:
            cap = max(abs(c) for c in row.values())
            if cap > 0:
                rows.append({i: c / cap for i, c in row.items()})
    return rows


def moments_by_linear_system(
    params: AlgebraParams, W: int, threshold: float = 1e-8
) -> LinearSystemResult:
    """Independent moment oracle: least squares on the trace recurrence.

    Builds the homogeneous truncated system, reports the nullspace
    dimension at the singular-value threshold (relative to the largest
    singular value), then solves with c_0 = 1 pinned.  A large least-squares
    residual means no decaying trace with c_0 = 1 exists.
    """
    rows = _recurrence_rows(params, W)
    ncols = 2 * W + 1
    A = np.zeros((len(rows), ncols), dtype=complex)
    for r, row in enumerate(rows):
        for i, cval in row.items():
            A[r, i + W] = cval
    sv = np.linalg.svd(A, compute_uv=False)
    smax = sv[0] if len(sv) else 0.0
    nullspace_dim = int(np.sum(sv < threshold * max(smax, 1.0)))
    # pin c_0 = 1 and least-squares the rest
    col0 = A[:, W].copy()
    Ared = np.delete(A, W, axis=1)
    sol, *_ = np.linalg.lstsq(Ared, -col0, rcond=None)
    resid = float(np.linalg.norm(Ared @ sol + col0) / max(1.0, np.linalg.norm(col0)))
    vals = np.concatenate([sol[:W], [1.0 + 0j], sol[W:]])
    table = MomentTable(W, vals, normalized=True)
    if nullspace_dim == 0:
        return LinearSystemResult(None, 0, resid, len(rows), threshold)
    return LinearSystemResult(table, nullspace_dim, resid, len(rows), threshold)


def expected_nullspace_dim(N: int) -> int:
    """Complex dimension of the decaying solution space for zero count N."""
    if N > 0:
        return N
    return 1 if N == 0 else 0


def recurrence_residual(mt: MomentTable, params: AlgebraParams) -> float:
    """Max violation of the trace recurrence by a moment table.

    Only rows fully supported inside the moment window are used, so the
    value is free of truncation effects.  Rows are normalized by their
    largest coefficient.
    """
    q, l = params.q, params.l
    P = params.P
    emin, emax = P.min_exp, P.max_exp
    worst = 0.0
    scale = max(1.0, float(np.max(np.abs(mt.values))))
    for j in range(-mt.W, mt.W + 1):
        idx = [m + j for m in range(emin, emax + 1)]
        idx += [m + j - l for m in range(emin, emax + 1)]
        if min(idx) < -mt.W or max(idx) > mt.W:
            continue
        acc = 0.0 + 0.0j
        cap = 0.0
        for m, pm in P.coeffs.items():
            t1 = pm * q ** (-m)
            t2 = -pm * q ** (m + 2 * j - l)
            acc += t1 * mt.get(m + j) + t2 * mt.get(m + j - l)
            cap = max(cap, abs(t1), abs(t2))
        if cap > 0.0:
            worst = max(worst, abs(acc) / (cap * scale))
    return worst


def oracle_agreement(
    mt: MomentTable, params: AlgebraParams, ls: "LinearSystemResult"
) -> tuple[float, str]:
    """Cross-validate contour moments against the linear-system oracle.

    When the decaying solution is unique the two tables must agree
    entrywise; otherwise the least-squares representative is not
    comparable and the contour moments are instead checked directly
    against the recurrence.
    """
    if ls.nullspace_dim == 1 and ls.table is not None:
        hi = min(8, mt.W, ls.table.W)
        val = max(abs(mt.get(i) - ls.table.get(i)) for i in range(-hi, hi + 1))
        return float(val), "table"
    return recurrence_residual(mt, params), "recurrence"


# ----------------------------------------------------------------------
# pairing with the algebra engine


def trace_of(a: AlgebraElement, mt: MomentTable) -> complex:
    """Pair the ladder-degree-zero part of a with the moment table."""
    p = degree_zero_part(a)
    out = 0.0 + 0.0j
    for e, c in p.coeffs.items():
        out += c * mt.get(e)
    return out


@dataclass(frozen=True)
class ResidualReport:
    max_residual: float
    mean_residual: float
    samples: int
    seed: int | None = None
    label: str = ""

    def to_json_dict(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "samples": self.samples,
            "seed": self.seed,
            "label": self.label,
        }


def verify_twisted_trace(
    mt: MomentTable,
    params: AlgebraParams,
    trials: int = 100,
    seed: int = 42,
) -> ResidualReport:
    """Brute-force check of T(ab) = T(b g(a)) on seeded random pairs.

    All products and twists run through the normal-ordering engine; the
    moment table only enters through the degree-zero pairing.  Residuals
    are relative to max(|T(ab)|, 1).
    """
    rng = np.random.default_rng(seed)
    residuals = np.empty(trials)
    for t in range(trials):
        a = random_element(rng, max_ladder=2, max_z_degree=3)
        b = random_element(rng, max_ladder=2, max_z_degree=3)
        t1 = trace_of(multiply(a, b, params), mt)
        t2 = trace_of(multiply(b, apply_g(a, params), params), mt)
        residuals[t] = abs(t1 - t2) / max(1.0, abs(t1))
    return ResidualReport(
        max_residual=float(np.max(residuals)),
        mean_residual=float(np.mean(residuals)),
        samples=trials,
        seed=seed,
        label=f"twisted-trace(l={params.l})",
    )


def verify_quasiperiodicity(
    ansatz: TraceAnsatz, samples: int = 64
) -> ResidualReport:
    """Residual of the weight functional equation on three circles.

    Checks w(z/q) = z**l w(qz) with l the twist exponent of the ansatz
    parameters, on |z| = 1, sqrt(q), 1/sqrt(q); multiplying through by
    P(z) gives the polynomial-weighted variant as a by-product (same
    relative residual up to the P factor, reported jointly).
    """
    q = ansatz.params.q
    lam = ansatz.params.l
    phis = 2.0 * np.pi * (np.arange(samples) + 0.31830988618) / samples
    worst = 0.0
    total = 0.0
    count = 0
    for radius in (1.0, math.sqrt(q), 1.0 / math.sqrt(q)):
        z = radius * np.exp(1j * phis)
        lhs = ansatz.evaluate(z / q)
        rhs = z ** lam * ansatz.evaluate(q * z)
        scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
        res = np.abs(lhs - rhs) / scale
        worst = max(worst, float(np.max(res)))
        total += float(np.sum(res))
        count += samples
    return ResidualReport(
        max_residual=worst,
        mean_residual=total / count,
        samples=count,
        label="quasiperiodicity",
    )


# ----------------------------------------------------------------------
# decay


@dataclass(frozen=True)
class DecayReport:
    kappa_plus: float
    kappa_minus: float
    poly_exp_a: int
    poly_exp_b: int
    fit_residual: float

    @property
    def decays(self) -> bool:
        return 0.0 <= self.kappa_plus < 1.0 and 0.0 <= self.kappa_minus < 1.0

    def to_json_dict(self) -> dict:
        return {
            "kappa_plus": self.kappa_plus,
            "kappa_minus": self.kappa_minus,
            "poly_exp_a": self.poly_exp_a,
            "poly_exp_b": self.poly_exp_b,
            "fit_residual": self.fit_residual,
            "decays": self.decays,
        }


def _fit_tail(ns: np.ndarray, mags: np.ndarray, floor: float) -> tuple[float, int, float]:
    # entries at the numerical noise floor carry no decay information
    mask = mags > floor
    ns, mags = ns[mask], mags[mask]
    if len(ns) < 3:
        return 0.0, 0, 0.0
    A = np.column_stack([ns, np.log(ns), np.ones_like(ns)])
    y = np.log(mags)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    kappa = float(np.exp(coef[0]))
    return kappa, max(0, int(round(coef[1]))), resid


def decay_fit(mt: MomentTable) -> DecayReport:
    """Fit |c_N| ~ kappa**N * N**a over N in [W/2, W], separately per side."""
    if mt.W < 16:
        raise WindowTooSmallError("decay fit needs a window of at least 16")
    ns = np.arange(mt.W // 2, mt.W + 1, dtype=float)
    plus = np.array([abs(mt.get(int(n))) for n in ns])
    minus = np.array([abs(mt.get(-int(n))) for n in ns])
    floor = 1e-13 * float(np.max(np.abs(mt.values)))
    kp, a, rp = _fit_tail(ns, plus, floor)
    km, b, rm = _fit_tail(ns, minus, floor)
    return DecayReport(
        kappa_plus=kp,
        kappa_minus=km,
        poly_exp_a=a,
        poly_exp_b=b,
        fit_residual=max(rp, rm),
    )


# ----------------------------------------------------------------------
# weight series helper (CT-duality with the moment pairing)


def weight_series(mt: MomentTable) -> BilateralSeries:
    """The series sum_i c_i z**-i on the moment window."""
    vals = mt.values[::-1].copy()  # coefficient of z**m is c_{-m}
    return BilateralSeries(-mt.W, mt.W, vals, "weight-from-moments")
