"""Positivity certificates and the end-to-end classification pipeline.

A candidate trace is certified positive through two finite Gram matrices
(on the Laurent sector and on the u-sector, the latter assembled entirely
through the normal-ordering engine) and through sign reports of the two
circle functions w(z) and z**k P(z) w(qz) on |z| = 1.  ``classify`` wires
the whole pipeline together and emits a self-describing report.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .laurent import LaurentPoly
from .qweyl_algebra import (
    AlgebraElement,
    AlgebraParams,
    apply_rho,
    multiply,
)
from .theta import EvaluationSingularityError, ThetaParams, pole_proximity_mask
from .trace_engine import (
    InfeasibleConfigurationError,
    MomentTable,
    TraceAnsatz,
    WindowTooSmallError,
    decay_fit,
    expected_nullspace_dim,
    gauge_normalize,
    moments,
    moments_by_linear_system,
    oracle_agreement,
    poles_from_P,
    solve_constraints,
    trace_of,
    verify_quasiperiodicity,
    verify_twisted_trace,
)

VERDICT_POSITIVE = "positive"
VERDICT_NOT_POSITIVE = "not_positive"
VERDICT_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class GramReport:
    basis: str
    size: int
    min_eigenvalue: float
    tolerance: float
    positive_definite: bool
    verdict: str
    hermitian_defect: float

    def to_json_dict(self) -> dict:
        return {
            "basis": self.basis,
            "size": self.size,
            "min_eigenvalue": self.min_eigenvalue,
            "tolerance": self.tolerance,
            "positive_definite": self.positive_definite,
            "verdict": self.verdict,
            "hermitian_defect": self.hermitian_defect,
        }


def _gram_verdict(G: np.ndarray, basis: str) -> GramReport:
    defect = float(np.max(np.abs(G - G.conj().T)))
    H = 0.5 * (G + G.conj().T)
    eigs = np.linalg.eigvalsh(H)
    mn = float(eigs[0])
    tol = 1e-10 * float(np.trace(H).real) / H.shape[0]
    if mn > tol:
        verdict = VERDICT_POSITIVE
    elif abs(mn) <= tol:
        verdict = VERDICT_INCONCLUSIVE
    else:
        verdict = VERDICT_NOT_POSITIVE
    return GramReport(
        basis=basis,
        size=H.shape[0],
        min_eigenvalue=mn,
        tolerance=tol,
        positive_definite=mn > tol,
        verdict=verdict,
        hermitian_defect=defect,
    )


def gram_laurent(mt: MomentTable, m: int) -> GramReport:
    """Toeplitz Gram matrix G_ij = c_{i-j} on the basis Z**i, |i| <= m."""
    if mt.W < 2 * m:
        raise WindowTooSmallError("gram_laurent needs W >= 2m")
    idx = range(-m, m + 1)
    G = np.array([[mt.get(i - j) for j in idx] for i in idx], dtype=complex)
    return _gram_verdict(G, "laurent")


def gram_u_sector(mt: MomentTable, params: AlgebraParams, m: int) -> GramReport:
    """Gram matrix on u Z**i, |i| <= m, assembled through the algebra engine.

    Every entry is T(e_i rho(e_j)) computed by normal ordering and the
    degree-zero pairing; no closed form enters.
    """
    need = 2 * m + params.P.spread + abs(params.k)
    if mt.W < need:
        raise WindowTooSmallError(f"gram_u_sector needs W >= {need}")
    basis = [
        AlgebraElement.ladder(1, LaurentPoly.monomial(i))
        for i in range(-m, m + 1)
    ]
    rho_basis = [apply_rho(e, params) for e in basis]
    size = len(basis)
    G = np.empty((size, size), dtype=complex)
    for i in range(size):
        for j in range(size):
            G[i, j] = trace_of(multiply(basis[i], rho_basis[j], params), mt)
    return _gram_verdict(G, "u-sector")


@dataclass(frozen=True)
class CirclePositivityReport:
    which: str
    min_value: float
    max_value: float
    max_imag: float
    samples: int
    tolerance: float
    positive: bool
    verdict: str

    def to_json_dict(self) -> dict:
        return {
            "which": self.which,
            "min_value": self.min_value,
            "max_value": self.max_value,
            "max_imag": self.max_imag,
            "samples": self.samples,
            "tolerance": self.tolerance,
            "positive": self.positive,
            "verdict": self.verdict,
        }


def _circle_report(vals: np.ndarray, which: str, tol: float) -> CirclePositivityReport:
    scale = max(float(np.max(np.abs(vals))), 1.0)
    min_re = float(np.min(vals.real))
    max_re = float(np.max(vals.real))
    max_im = float(np.max(np.abs(vals.imag)))
    ok = min_re > tol * scale and max_im < tol * scale
    if ok:
        verdict = VERDICT_POSITIVE
    elif min_re < -tol * scale:
        verdict = VERDICT_NOT_POSITIVE
    else:
        verdict = VERDICT_INCONCLUSIVE
    return CirclePositivityReport(
        which=which,
        min_value=min_re,
        max_value=max_re,
        max_imag=max_im,
        samples=len(vals),
        tolerance=tol,
        positive=ok,
        verdict=verdict,
    )


def circle_positivity(
    ansatz: TraceAnsatz,
    params: AlgebraParams,
    samples: int = 4096,
    tol: float = 1e-8,
) -> tuple[CirclePositivityReport, CirclePositivityReport]:
    """Sign reports of w and z**k P(z) w(qz) on the unit circle."""
    q = params.q
    z = np.exp(2j * np.pi * np.arange(samples) / samples)
    for circle in (z, q * z):
        if np.any(pole_proximity_mask(circle, ansatz.poles, ansatz.theta, 1e-6)):
            raise EvaluationSingularityError(
                "pole orbit within 1e-6 of the sampling circles"
            )
    w_vals = ansatz.evaluate(z)
    f2 = z ** params.k * params.P.evaluate(z) * ansatz.evaluate(q * z)
    return (
        _circle_report(np.asarray(w_vals), "w on S1", tol),
        _circle_report(np.asarray(f2), "z^k P w(qz) on S1", tol),
    )


# ----------------------------------------------------------------------
# construction


def pair_partner(alpha: complex, q: float) -> complex:
    """Partner zero: reflection of alpha across the circle |z| = 1/q."""
    return q ** -2 / np.conj(alpha)


def default_pair_parameters(q: float, npairs: int, sign: float = -1.0):
    """Deterministic free zeros, off the self-pairing circle |z| = 1/q.

    Negative-real placements keep the zero orbits away from the positive
    axis, which is where the certified-positive members tend to live.
    """
    return [sign * (1.0 / q) * (1.15 + 0.1 * t) for t in range(npairs)]


def build_paired_ansatz(
    params: AlgebraParams,
    poles,
    free_params=None,
    theta: ThetaParams | None = None,
) -> TraceAnsatz:
    """Assemble the quotient ansatz with paired zeros and unit scale.

    Zeros come in pairs (a, q**-2 / conj(a)); the common phase of the free
    parameters is then adjusted so the zero product hits the constraint
    target exactly.  Odd N places one self-paired zero on |z| = 1/q and is
    flagged experimental.
    """
    theta = theta or ThetaParams(params.q)
    sol = solve_constraints(params, poles)
    oriented = params.with_twist(
        sol.orientation * params.k, sol.g_exponent
    )
    if not sol.feasible:
        raise InfeasibleConfigurationError(
            f"N = {sol.N} < 0: no trace of quotient shape"
        )
    N = sol.N
    notes: list[str] = []
    zeros: list[complex] = []
    if N % 2 == 1:
        zeros.append(complex(1.0 / params.q))
        notes.append("odd N: one self-paired zero on |z| = 1/q (experimental)")
    npairs = N // 2
    if free_params is None:
        free_params = default_pair_parameters(params.q, npairs)
    if len(free_params) != npairs:
        raise ValueError(f"expected {npairs} free pair parameters")
    for a in free_params:
        a = complex(a)
        zeros.extend([a, pair_partner(a, params.q)])

    if N > 0:
        current = complex(np.prod(zeros))
        ratio = sol.product_target / current
        if abs(abs(ratio) - 1.0) > 1e-6:
            raise InfeasibleConfigurationError(
                "pairing cannot reach the zero-product target modulus"
                f" (|ratio| = {abs(ratio):.6g})"
            )
        delta = cmath.phase(ratio) / N
        zeros = [a * cmath.exp(1j * delta) for a in zeros]
        replay = complex(np.prod(zeros))
        if abs(replay - sol.product_target) > 1e-10 * abs(sol.product_target):
            raise InfeasibleConfigurationError("zero-product replay failed")
    else:
        if abs(sol.product_target - 1.0) > 1e-8:
            raise InfeasibleConfigurationError(
                "N = 0 but the constraint constant is not 1; gauge the poles first"
            )

    ansatz = TraceAnsatz(
        c=1.0 + 0j,
        l_power=0,
        zeros=tuple(zeros),
        poles=tuple(complex(b) for b in poles),
        params=oriented,
        theta=theta,
        notes=tuple(notes),
    )
    ansatz.validate()
    return ansatz


# ----------------------------------------------------------------------
# classification


def prepare_configuration(params: AlgebraParams):
    """Gauge-fix the frame and resolve the constraint orientation.

    Returns (gauged, poles, solution, oriented, gauge_phase):
    ``gauged`` carries the published twist with the rotated P, ``oriented``
    the oracle twist exponents actually verified against.
    """
    poles = poles_from_P(params)
    M = len(poles)
    gauge_phase = 0.0
    gauged = params
    if M > 0:
        prod_beta = complex(np.prod(poles))
        expected = params.q ** (-M)
        if abs(abs(prod_beta) - expected) > 1e-8 * expected:
            raise ValueError("pole product modulus is not q**-M; P inconsistent")
        gauge_phase = cmath.phase(prod_beta) / M
        if gauge_phase != 0.0:
            rot = cmath.exp(-1j * gauge_phase)
            gauged = params.with_P(params.P.scale_arg(cmath.exp(1j * gauge_phase)))
            poles = [b * rot for b in poles]
    sol = solve_constraints(gauged, poles)
    oriented = gauged.with_twist(sol.orientation * params.k, sol.g_exponent)
    return gauged, poles, sol, oriented, gauge_phase


@dataclass
class ClassificationReport:
    feasible: bool
    N: int
    M: int
    cone_dim: int | None
    orientation: int
    residuals: dict
    gram: list
    circle: list
    scope_notes: list
    certificates: dict
    settings: dict
    gauge_phase: float
    status: str
    exit_code: int

    def to_json_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "N": self.N,
            "M": self.M,
            "cone_dim": self.cone_dim,
            "orientation": self.orientation,
            "residuals": self.residuals,
            "gram": self.gram,
            "circle": self.circle,
            "scope_notes": self.scope_notes,
            "certificates": self.certificates,
            "settings": self.settings,
            "gauge_phase": self.gauge_phase,
            "status": self.status,
            "exit_code": self.exit_code,
        }


DEFAULT_TOLERANCES = {
    "twisted_trace": 1e-8,
    "quasiperiodicity": 1e-9,
    "oracle_agreement": 1e-7,
    "circle": 1e-8,
    "nullspace_threshold": 1e-8,
    "conj_symmetry": 1e-8,
}


def classify(
    params: AlgebraParams,
    window: int = 32,
    samples: int = 4096,
    gram_m: int = 8,
    gram_m_u: int = 6,
    trials: int = 100,
    seed: int = 42,
    tolerances: dict | None = None,
    free_params=None,
) -> ClassificationReport:
    """Run the whole pipeline and assemble a certificate report.

    Never raises on a merely negative outcome: infeasibility and failed
    certificates are structured results.  Input errors (bad q, P not
    self-conjugate, ...) do raise.
    """
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    if params.self_conjugacy_defect() > 1e-12:
        raise ValueError(
            "classification requires a self-conjugate P (conjugation not defined)"
        )

    scope_notes: list[str] = []
    k_user, l_user = params.k, params.l
    n = params.n
    if k_user == 0:
        scope_notes.append(
            "k = 0: untwisted-conjugation family, outside the classification"
            " implemented here; report is a cross-check only"
        )
    if 2 * abs(k_user) == n:
        scope_notes.append(
            "k = n/2: Schur-index normalization; existence is equivalent to"
            " all roots of P lying in the annulus (q, 1/q)"
        )

    # published twist (k, l) corresponds to the oracle exponents (-k, -l)
    gauged, poles, sol, oriented, gauge_phase = prepare_configuration(params)
    M = len(poles)
    orientation = sol.orientation
    N = sol.N
    settings = {
        "q": oriented.q,
        "k": k_user,
        "l": l_user,
        "window": window,
        "window_linear_system": max(48, 2 * window),
        "samples": samples,
        "gram_m": gram_m,
        "gram_m_u": gram_m_u,
        "trials": trials,
        "seed": seed,
        "tolerances": tol,
    }

    W_ls = settings["window_linear_system"]
    ls = moments_by_linear_system(oriented, W_ls, tol["nullspace_threshold"])

    if not sol.feasible:
        certified = ls.nullspace_dim == 0
        certificates = {
            "nullspace_dim": ls.nullspace_dim,
            "expected_nullspace_dim": expected_nullspace_dim(N),
            "lstsq_residual": ls.lstsq_residual,
            "nonexistence_certified": certified,
        }
        return ClassificationReport(
            feasible=False,
            N=N,
            M=M,
            cone_dim=None,
            orientation=orientation,
            residuals={},
            gram=[],
            circle=[],
            scope_notes=scope_notes + list(sol.notes),
            certificates=certificates,
            settings=settings,
            gauge_phase=gauge_phase,
            status="certified_infeasible" if certified else "inconclusive",
            exit_code=3 if certified else 2,
        )

    def construct(fp):
        a = build_paired_ansatz(gauged, poles, free_params=fp)
        a = gauge_normalize(a)  # no-op here; poles already gauged
        raw = moments(a, window, samples)
        table = raw.normalize()
        a = a.scaled(1.0 / raw.get(0))
        circles = list(circle_positivity(a, oriented, samples, tol["circle"]))
        return a, table, circles

    # the free zeros are construction parameters; scan the deterministic
    # default placements for a certifiably positive member
    if free_params is not None:
        candidates = [free_params]
    elif sol.N > 0:
        npairs = sol.N // 2
        candidates = [
            default_pair_parameters(oriented.q, npairs, sign)
            for sign in (-1.0, 1.0)
        ]
    else:
        candidates = [None]
    ansatz = mt = circle_reports = None
    for fp in candidates:
        ansatz, mt, circle_reports = construct(fp)
        if all(c.positive for c in circle_reports):
            break

    rep_primary = verify_twisted_trace(mt, oriented, trials, seed)
    rep_anti = verify_twisted_trace(
        mt, gauged.with_twist(k_user, l_user), trials, seed
    )
    rep_quasi = verify_quasiperiodicity(ansatz)

    agreement, agreement_kind = oracle_agreement(mt, oriented, ls)
    decay = decay_fit(mt)
    strict_max, strict_margin = mt.strict_bound()

    gram_reports = [gram_laurent(mt, gram_m), gram_u_sector(mt, oriented, gram_m_u)]

    residuals = {
        "twisted_trace_primary": rep_primary.to_json_dict(),
        "twisted_trace_anti_orientation": rep_anti.to_json_dict(),
        "quasiperiodicity": rep_quasi.to_json_dict(),
        "oracle_agreement_max": float(agreement),
        "oracle_agreement_kind": agreement_kind,
        "moment_conj_symmetry_defect": mt.conj_symmetry_defect(),
        "linear_system_lstsq_residual": ls.lstsq_residual,
    }
    certificates = {
        "nullspace_dim": ls.nullspace_dim,
        "expected_nullspace_dim": expected_nullspace_dim(N),
        "moment_strict_bound_max": strict_max,
        "moment_strict_bound_margin": strict_margin,
        "decay": decay.to_json_dict(),
        "zero_product_target": [sol.product_target.real, sol.product_target.imag],
        "zeros": [[z.real, z.imag] for z in ansatz.zeros],
        "poles": [[b.real, b.imag] for b in ansatz.poles],
    }

    checks_pass = (
        rep_primary.max_residual <= tol["twisted_trace"]
        and rep_quasi.max_residual <= tol["quasiperiodicity"]
        and agreement <= tol["oracle_agreement"]
        and all(g.positive_definite for g in gram_reports)
        and all(c.positive for c in circle_reports)
        and strict_max < 1.0
        and decay.decays
        and ls.nullspace_dim == expected_nullspace_dim(N)
    )
    inconclusive = any(
        g.verdict == VERDICT_INCONCLUSIVE for g in gram_reports
    ) or any(c.verdict == VERDICT_INCONCLUSIVE for c in circle_reports)

    if checks_pass:
        status, exit_code = "feasible_certified", 0
    elif inconclusive:
        status, exit_code = "inconclusive", 2
    else:
        status, exit_code = "feasible_uncertified", 2
        f2 = circle_reports[1]
        if f2.max_value < -f2.tolerance and circle_reports[0].positive:
            scope_notes.append(
                "the u-sector circle function is single-signed negative:"
                " replacing P by -P yields the positivity-compatible pairing"
            )

    return ClassificationReport(
        feasible=True,
        N=N,
        M=M,
        cone_dim=N if N > 0 else 1,
        orientation=orientation,
        residuals=residuals,
        gram=[g.to_json_dict() for g in gram_reports],
        circle=[c.to_json_dict() for c in circle_reports],
        scope_notes=scope_notes + list(sol.notes) + list(ansatz.notes),
        certificates=certificates,
        settings=settings,
        gauge_phase=gauge_phase,
        status=status,
        exit_code=exit_code,
    )
