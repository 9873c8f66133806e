"""Laurent polynomials and truncated two-sided series over complex doubles.

Everything here is structural: finite-support polynomials, windowed bilateral
series, the one-sided series inverses of a Laurent polynomial, and the kernel
of multiplication by it acting on bilateral series.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

# Coefficients smaller than PRUNE_REL times the largest one are dropped so
# that support queries are stable.
PRUNE_REL = 1e-14

Window = tuple[int, int]


def _int_powers(base: complex, lo: int, hi: int) -> np.ndarray:
    """base**l for l = lo..hi as exact repeated products (no log branch)."""
    out = np.empty(hi - lo + 1, dtype=complex)
    anchor = min(max(0, lo), hi)
    acc = 1.0 + 0.0j
    if anchor > 0:
        for _ in range(anchor):
            acc *= base
    elif anchor < 0:
        inv = 1.0 / base
        for _ in range(-anchor):
            acc *= inv
    out[anchor - lo] = acc
    up = acc
    for l in range(anchor + 1, hi + 1):
        up *= base
        out[l - lo] = up
    down = acc
    if anchor > lo:
        inv = 1.0 / base
        for l in range(anchor - 1, lo - 1, -1):
            down *= inv
            out[l - lo] = down
    return out


class LaurentPoly:
    """Finite-support Laurent polynomial with complex coefficients.

    Stored canonically: coefficients below ``PRUNE_REL`` times the largest
    absolute coefficient are removed on construction.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: dict[int, complex] | None = None):
        coeffs = coeffs or {}
        cap = max((abs(c) for c in coeffs.values()), default=0.0)
        if cap == 0.0:
            self._coeffs: dict[int, complex] = {}
        else:
            floor = PRUNE_REL * cap
            self._coeffs = {
                int(e): complex(c) for e, c in coeffs.items() if abs(c) > floor
            }

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls({})

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls({0: 1.0})

    @classmethod
    def monomial(cls, exponent: int, coeff: complex = 1.0) -> "LaurentPoly":
        return cls({exponent: coeff})

    @classmethod
    def from_roots(
        cls,
        roots,
        leading: complex = 1.0,
        min_exp: int = 0,
    ) -> "LaurentPoly":
        """leading * z**min_exp * prod_i (z - r_i)."""
        p = cls({0: leading})
        for r in roots:
            p = p * cls({1: 1.0, 0: -complex(r)})
        return p.shift(min_exp)

    # -- queries ------------------------------------------------------

    @property
    def coeffs(self) -> dict[int, complex]:
        return dict(self._coeffs)

    def get(self, exponent: int) -> complex:
        return self._coeffs.get(exponent, 0.0 + 0.0j)

    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def min_exp(self) -> int:
        if not self._coeffs:
            raise ValueError("zero polynomial has no support")
        return min(self._coeffs)

    @property
    def max_exp(self) -> int:
        if not self._coeffs:
            raise ValueError("zero polynomial has no support")
        return max(self._coeffs)

    @property
    def spread(self) -> int:
        """Width of the support, max_exp - min_exp (0 for monomials)."""
        return 0 if self.is_zero() else self.max_exp - self.min_exp

    def max_abs(self) -> float:
        return max((abs(c) for c in self._coeffs.values()), default=0.0)

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        out = dict(self._coeffs)
        for e, c in other._coeffs.items():
            out[e] = out.get(e, 0.0) + c
        return LaurentPoly(out)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self._coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            out: dict[int, complex] = {}
            for e1, c1 in self._coeffs.items():
                for e2, c2 in other._coeffs.items():
                    out[e1 + e2] = out.get(e1 + e2, 0.0) + c1 * c2
            return LaurentPoly(out)
        return self.scaled(other)

    __rmul__ = __mul__

    def scaled(self, factor: complex) -> "LaurentPoly":
        return LaurentPoly({e: factor * c for e, c in self._coeffs.items()})

    def shift(self, exponent: int) -> "LaurentPoly":
        """Multiply by z**exponent."""
        return LaurentPoly({e + exponent: c for e, c in self._coeffs.items()})

    def scale_arg(self, c: complex) -> "LaurentPoly":
        """p(c*z): coefficient of z**i picks up c**i.  Requires c != 0."""
        if c == 0:
            raise ValueError("argument scaling requires a nonzero factor")
        return LaurentPoly({e: coef * c**e for e, coef in self._coeffs.items()})

    def conj_invol(self) -> "LaurentPoly":
        """Coefficient-conjugated p evaluated at 1/z; an involution."""
        return LaurentPoly({-e: c.conjugate() for e, c in self._coeffs.items()})

    def evaluate(self, z):
        """Evaluate at a complex point or ndarray of points."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for e, c in self._coeffs.items():
            out = out + c * z ** e
        return out if out.shape else complex(out)

    # -- misc ---------------------------------------------------------

    def ct(self) -> complex:
        return self.get(0)

    def allclose(self, other: "LaurentPoly", tol: float = 1e-12) -> bool:
        scale = max(self.max_abs(), other.max_abs(), 1.0)
        exps = set(self._coeffs) | set(other._coeffs)
        return all(abs(self.get(e) - other.get(e)) <= tol * scale for e in exps)

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentPoly) and self._coeffs == other._coeffs

    def __hash__(self):
        return hash(tuple(sorted(self._coeffs.items(), key=lambda kv: kv[0])))

    def __repr__(self) -> str:
        if self.is_zero():
            return "LaurentPoly(0)"
        terms = ", ".join(
            f"{e}: {c:.6g}" for e, c in sorted(self._coeffs.items())
        )
        return f"LaurentPoly({{{terms}}})"

    def to_json_dict(self) -> dict:
        return {
            str(e): [c.real, c.imag] for e, c in sorted(self._coeffs.items())
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "LaurentPoly":
        return cls({int(e): complex(v[0], v[1]) for e, v in d.items()})


class BilateralSeries:
    """Two-sided power series truncated to a window lo..hi (lo <= 0 <= hi).

    The dense coefficient array covers exactly the window.  Operations that
    combine two series work on the intersection window and record it in
    ``truncation_note``.
    """

    __slots__ = ("lo", "hi", "coeffs", "truncation_note")

    def __init__(self, lo: int, hi: int, coeffs, truncation_note: str = ""):
        if lo > 0 or hi < 0:
            raise ValueError("window must contain 0")
        arr = np.asarray(coeffs, dtype=complex)
        if arr.shape != (hi - lo + 1,):
            raise ValueError("coefficient array does not match window")
        self.lo = int(lo)
        self.hi = int(hi)
        self.coeffs = arr
        self.truncation_note = truncation_note

    @classmethod
    def zeros(cls, window: Window, note: str = "zeros") -> "BilateralSeries":
        lo, hi = window
        return cls(lo, hi, np.zeros(hi - lo + 1, dtype=complex), note)

    @classmethod
    def from_poly(cls, p: LaurentPoly, window: Window) -> "BilateralSeries":
        s = cls.zeros(window, note="poly")
        for e, c in p.coeffs.items():
            if s.lo <= e <= s.hi:
                s.coeffs[e - s.lo] = c
        return s

    @property
    def window(self) -> Window:
        return (self.lo, self.hi)

    def get(self, exponent: int) -> complex:
        if self.lo <= exponent <= self.hi:
            return complex(self.coeffs[exponent - self.lo])
        return 0.0 + 0.0j

    def ct(self) -> complex:
        return self.get(0)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 0.0

    def scale_arg(self, c: complex) -> "BilateralSeries":
        """Coefficientwise z -> c*z; the constant term is untouched."""
        if c == 0:
            raise ValueError("argument scaling requires a nonzero factor")
        powers = _int_powers(c, self.lo, self.hi)
        return BilateralSeries(
            self.lo, self.hi, self.coeffs * powers, self.truncation_note
        )

    def __add__(self, other: "BilateralSeries") -> "BilateralSeries":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > 0 or hi < 0:
            raise ValueError("windows do not overlap around 0")
        a = self.coeffs[lo - self.lo : hi - self.lo + 1]
        b = other.coeffs[lo - other.lo : hi - other.lo + 1]
        return BilateralSeries(lo, hi, a + b, f"sum[{lo},{hi}]")

    def __neg__(self) -> "BilateralSeries":
        return BilateralSeries(
            self.lo, self.hi, -self.coeffs, self.truncation_note
        )

    def __sub__(self, other: "BilateralSeries") -> "BilateralSeries":
        return self + (-other)

    def scaled(self, factor: complex) -> "BilateralSeries":
        return BilateralSeries(
            self.lo, self.hi, factor * self.coeffs, self.truncation_note
        )

    def mul_poly(self, p: LaurentPoly) -> "BilateralSeries":
        """Multiply by a Laurent polynomial, re-windowed to this window.

        Coefficients within ``p.spread`` of the window boundary depend on
        truncated data and are boundary artifacts; use :meth:`interior`.
        """
        if p.is_zero():
            return BilateralSeries.zeros(self.window, "zero-product")
        out = np.zeros(self.hi - self.lo + 1, dtype=complex)
        for e, c in p.coeffs.items():
            # contribution of c*z**e shifts indices by e
            src_lo = max(self.lo, self.lo - e)
            src_hi = min(self.hi, self.hi - e)
            if src_lo > src_hi:
                continue
            out[src_lo + e - self.lo : src_hi + e - self.lo + 1] += (
                c * self.coeffs[src_lo - self.lo : src_hi - self.lo + 1]
            )
        return BilateralSeries(
            self.lo, self.hi, out, f"{self.truncation_note}*poly"
        )

    def interior(self, margin: int) -> np.ndarray:
        """Coefficients at distance >= margin from both window ends."""
        if margin < 0:
            raise ValueError("margin must be nonnegative")
        if 2 * margin >= len(self.coeffs):
            return np.zeros(0, dtype=complex)
        return self.coeffs[margin : len(self.coeffs) - margin]

    def windowed(self, window: Window) -> "BilateralSeries":
        lo, hi = window
        out = BilateralSeries.zeros(window, self.truncation_note)
        src_lo, src_hi = max(lo, self.lo), min(hi, self.hi)
        if src_lo <= src_hi:
            out.coeffs[src_lo - lo : src_hi - lo + 1] = self.coeffs[
                src_lo - self.lo : src_hi - self.lo + 1
            ]
        return out

    def __repr__(self) -> str:
        return (
            f"BilateralSeries(window=[{self.lo},{self.hi}], "
            f"note={self.truncation_note!r})"
        )


def ct(s) -> complex:
    """Constant term of a LaurentPoly or BilateralSeries."""
    return s.ct()


def scale_arg(s, c: complex):
    """z -> c*z on either representation; ct is invariant."""
    return s.scale_arg(c)


def conj_invol(p: LaurentPoly) -> LaurentPoly:
    return p.conj_invol()


@dataclass(frozen=True)
class RootData:
    """Nonzero roots of a Laurent polynomial with multiplicities.

    The reconstruction is leading_coeff * z**leading_exponent *
    prod (z - root)**mult.
    """

    roots: tuple[tuple[complex, int], ...]
    leading_exponent: int
    leading_coeff: complex

    @property
    def n(self) -> int:
        return sum(m for _, m in self.roots)

    def reconstruct(self) -> LaurentPoly:
        flat = []
        for r, m in self.roots:
            flat.extend([r] * m)
        return LaurentPoly.from_roots(
            flat, leading=self.leading_coeff, min_exp=self.leading_exponent
        )

    def max_residual_on_circle(
        self, p: LaurentPoly, points: int = 16, seed: int = 7
    ) -> float:
        """Relative mismatch of the product form against p on |z| = 1."""
        rng = np.random.default_rng(seed)
        z = np.exp(2j * np.pi * rng.random(points))
        ref = p.evaluate(z)
        got = self.reconstruct().evaluate(z)
        scale = max(float(np.max(np.abs(ref))), 1e-300)
        return float(np.max(np.abs(ref - got))) / scale


def roots(p: LaurentPoly, cluster_tol: float | None = None) -> RootData:
    """Nonzero roots of p with multiplicities via the companion matrix.

    Roots within ``cluster_tol`` of each other (default 1e-7 times the
    largest root modulus) are merged with summed multiplicity.
    """
    if p.is_zero():
        raise ValueError("zero polynomial has no root data")
    emin, emax = p.min_exp, p.max_exp
    n = emax - emin
    lead = p.get(emax)
    if n == 0:
        return RootData(roots=(), leading_exponent=emin, leading_coeff=lead)
    # ordinary polynomial z**(-emin) * p, highest coefficient first
    arr = np.array([p.get(e) for e in range(emax, emin - 1, -1)], dtype=complex)
    raw = np.roots(arr)
    if cluster_tol is None:
        cluster_tol = 1e-7 * float(np.max(np.abs(raw)))
    clusters: list[list[complex]] = []
    for r in sorted(raw, key=lambda w: (abs(w), cmath.phase(w))):
        for members in clusters:
            centroid = sum(members) / len(members)
            if abs(r - centroid) <= cluster_tol:
                members.append(r)
                break
        else:
            clusters.append([r])
    merged = tuple(
        (sum(ms) / len(ms), len(ms))
        for ms in sorted(clusters, key=lambda ms: (abs(ms[0]), cmath.phase(ms[0])))
    )
    return RootData(roots=merged, leading_exponent=emin, leading_coeff=lead)


def right_inverse(p: LaurentPoly, window: Window) -> BilateralSeries:
    """Inverse of p in the ring of Laurent series bounded below.

    The support starts at -p.min_exp; p * result - 1 vanishes on the window
    interior (the top boundary band of width p.spread is corrupted).
    """
    if p.is_zero():
        raise ValueError("zero polynomial is not invertible")
    lo, hi = window
    emin = p.min_exp
    start = -emin
    s = BilateralSeries.zeros(window, note=f"right-inverse[{lo},{hi}]")
    if start > hi:
        return s
    lead = p.get(emin)
    # solve sum_e p_e s_{m-e} = delta_{m,0} upward in m; s_t = 0 for t < start
    vals: dict[int, complex] = {}
    for m in range(0, hi + emin + 1):
        acc = 1.0 + 0.0j if m == 0 else 0.0 + 0.0j
        for e, c in p.coeffs.items():
            if e == emin:
                continue
            acc -= c * vals.get(m - e, 0.0)
        vals[m - emin] = acc / lead
    for t, v in vals.items():
        if lo <= t <= hi:
            s.coeffs[t - lo] = v
    return s


def left_inverse(p: LaurentPoly, window: Window) -> BilateralSeries:
    """Inverse of p in Laurent series bounded above (mirror of right_inverse)."""
    if p.is_zero():
        raise ValueError("zero polynomial is not invertible")
    lo, hi = window
    rev = LaurentPoly({-e: c for e, c in p.coeffs.items()})
    mirror = right_inverse(rev, (-hi, -lo))
    return BilateralSeries(
        lo, hi, mirror.coeffs[::-1].copy(), f"left-inverse[{lo},{hi}]"
    )


def kernel_basis(rd: RootData, window: Window) -> list[BilateralSeries]:
    """Basis of the kernel of multiplication by p on bilateral series.

    For each root alpha of multiplicity m there are m elements, the i-th
    having coefficients (falling factorial of degree i in l) * alpha**(-l)
    at z**l, for i = 0..m-1.  Truncated to the window; multiplication by p
    annihilates them away from the window boundary.
    """
    lo, hi = window
    basis: list[BilateralSeries] = []
    ls = np.arange(lo, hi + 1)
    for alpha, mult in rd.roots:
        if alpha == 0:
            raise ValueError("kernel basis requires nonzero roots")
        powers = _int_powers(1.0 / alpha, lo, hi)  # alpha**(-l)
        for i in range(mult):
            coeff = np.ones_like(ls, dtype=complex)
            for t in range(i):
                coeff = coeff * (ls - t)
            basis.append(
                BilateralSeries(
                    lo,
                    hi,
                    coeff * powers,
                    truncation_note=f"kernel(alpha={alpha:.6g}, i={i})",
                )
            )
    return basis


def solve_division(target: BilateralSeries, p: LaurentPoly) -> BilateralSeries:
    """Find s with s*p = target on the window interior.

    Splits the target into the parts supported on nonnegative and negative
    exponents and applies the two one-sided inverses of p.  The answer is
    only determined up to the kernel of multiplication by p.
    """
    if p.is_zero():
        raise ValueError("cannot divide by the zero polynomial")
    lo, hi = target.window
    pad = p.spread + 4
    ext = (lo - pad, hi + pad)

    pr = right_inverse(p, ext)
    pl = left_inverse(p, ext)

    out = np.zeros(hi + pad - (lo - pad) + 1, dtype=complex)
    # full convolutions of the finite target chunks with the truncated inverses
    tvals = target.coeffs
    plus_idx = np.nonzero(np.arange(lo, hi + 1) >= 0)[0]
    minus_idx = np.nonzero(np.arange(lo, hi + 1) < 0)[0]
    for idx_set, inv in ((plus_idx, pr), (minus_idx, pl)):
        if len(idx_set) == 0:
            continue
        conv = np.convolve(tvals[idx_set], inv.coeffs)
        base = (lo + int(idx_set[0])) + inv.lo  # exponent of conv[0]
        for ofs, v in enumerate(conv):
            e = base + ofs
            if ext[0] <= e <= ext[1]:
                out[e - ext[0]] += v
    full = BilateralSeries(ext[0], ext[1], out, "division")
    return full.windowed(target.window)
