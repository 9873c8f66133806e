"""Normal-ordered arithmetic in the generalized q-Weyl algebra A(P, q).

Generators u, v, Z, Z**-1 subject to

    Z u Z**-1 = q**2 u,   Z v Z**-1 = q**-2 v,
    u v = P(q**-1 Z),     v u = P(q Z).

Elements are kept in the normal form  sum_m  (ladder)**|m| * R_m(Z)  with
the ladder generator (u for m > 0, v for m < 0) on the left.  This module
is the brute-force oracle for every trace identity elsewhere: nothing here
knows about theta functions or moments.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .laurent import LaurentPoly, roots


@dataclass(frozen=True)
class AlgebraParams:
    """Numeric q, the defining Laurent polynomial P, and the twist data.

    ``k`` parametrizes the conjugation, ``l`` the trace twist exponent;
    ``l`` defaults to 2k, the value induced by the conjugation.
    """

    q: float
    P: LaurentPoly
    k: int = 0
    l: int | None = None

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        if self.P.is_zero():
            raise ValueError("P must be a nonzero Laurent polynomial")
        if self.l is None:
            object.__setattr__(self, "l", 2 * self.k)
        for r, _ in self.root_data.roots:
            for bad in (self.q, 1.0 / self.q):
                if abs(abs(r) - bad) <= 1e-8 * bad:
                    raise ValueError(
                        f"P has a root of modulus ~ q**±1 (|r|={abs(r):.12g});"
                        " this configuration is rejected"
                    )

    @property
    def root_data(self):
        return roots(self.P)

    @property
    def n(self) -> int:
        """Number of nonzero roots of P counted with multiplicity."""
        return self.P.max_exp - self.P.min_exp

    def self_conjugacy_defect(self) -> float:
        d = self.P.conj_invol() - self.P
        return d.max_abs() / max(self.P.max_abs(), 1e-300)

    @property
    def is_self_conjugate(self) -> bool:
        return self.self_conjugacy_defect() <= 1e-12

    def with_twist(self, k: int, l: int) -> "AlgebraParams":
        return replace(self, k=k, l=l)

    def with_P(self, P: LaurentPoly) -> "AlgebraParams":
        return replace(self, P=P)


class AlgebraElement:
    """Normal-ordered element: map from ladder degree m to a Z-polynomial."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[int, LaurentPoly] | None = None):
        self.terms: dict[int, LaurentPoly] = {}
        for m, p in (terms or {}).items():
            if not p.is_zero():
                self.terms[int(m)] = p

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "AlgebraElement":
        return cls({})

    @classmethod
    def scalar(cls, c: complex) -> "AlgebraElement":
        return cls({0: LaurentPoly({0: c})})

    @classmethod
    def from_poly(cls, p: LaurentPoly) -> "AlgebraElement":
        return cls({0: p})

    @classmethod
    def ladder(cls, m: int, poly: LaurentPoly | None = None) -> "AlgebraElement":
        """u**m * poly(Z) for m > 0, v**(-m) * poly(Z) for m < 0."""
        return cls({m: poly if poly is not None else LaurentPoly.one()})

    @classmethod
    def u(cls) -> "AlgebraElement":
        return cls.ladder(1)

    @classmethod
    def v(cls) -> "AlgebraElement":
        return cls.ladder(-1)

    @classmethod
    def z_pow(cls, j: int, coeff: complex = 1.0) -> "AlgebraElement":
        return cls({0: LaurentPoly({j: coeff})})

    # -- linear structure ----------------------------------------------

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        out = dict(self.terms)
        for m, p in other.terms.items():
            out[m] = out[m] + p if m in out else p
        return AlgebraElement(out)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement({m: -p for m, p in self.terms.items()})

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def scaled(self, c: complex) -> "AlgebraElement":
        return AlgebraElement({m: p.scaled(c) for m, p in self.terms.items()})

    def max_abs(self) -> float:
        return max((p.max_abs() for p in self.terms.values()), default=0.0)

    def allclose(self, other: "AlgebraElement", tol: float = 1e-10) -> bool:
        scale = max(self.max_abs(), other.max_abs(), 1.0)
        for m in set(self.terms) | set(other.terms):
            a = self.terms.get(m, LaurentPoly.zero())
            b = other.terms.get(m, LaurentPoly.zero())
            d = a - b
            if d.max_abs() > tol * scale:
                return False
        return True

    def diff_norm(self, other: "AlgebraElement") -> float:
        out = 0.0
        for m in set(self.terms) | set(other.terms):
            a = self.terms.get(m, LaurentPoly.zero())
            b = other.terms.get(m, LaurentPoly.zero())
            out = max(out, (a - b).max_abs())
        return out

    def __repr__(self) -> str:
        if not self.terms:
            return "AlgebraElement(0)"
        bits = []
        for m in sorted(self.terms):
            head = "" if m == 0 else (f"u^{m}·" if m > 0 else f"v^{-m}·")
            bits.append(f"{head}{self.terms[m]!r}")
        return "AlgebraElement(" + " + ".join(bits) + ")"

    def to_json_dict(self) -> dict:
        return {
            "terms": {str(m): p.to_json_dict() for m, p in sorted(self.terms.items())}
        }


def _mono_mul(
    m1: int, R1: LaurentPoly, m2: int, R2: LaurentPoly, params: AlgebraParams
) -> tuple[int, LaurentPoly]:
    """Product of two normal monomials; a single normal monomial."""
    q = params.q
    poly = R1.scale_arg(q ** (2 * m2)) * R2
    if m1 > 0 and m2 < 0:
        # u^a v^c with a = m1, c = -m2: each contraction gives u v = P(q^-1 Z)
        c = -m2
        for i in range(1, min(m1, c) + 1):
            poly = poly * params.P.scale_arg(q ** (-(2 * c - 2 * i + 1)))
    elif m1 < 0 and m2 > 0:
        # v^b u^c with b = -m1: each contraction gives v u = P(q Z)
        c = m2
        for i in range(1, min(-m1, c) + 1):
            poly = poly * params.P.scale_arg(q ** (2 * c - 2 * i + 1))
    return m1 + m2, poly


def multiply(
    a: AlgebraElement, b: AlgebraElement, params: AlgebraParams
) -> AlgebraElement:
    """Normal-ordered product in A(P, q)."""
    out: dict[int, LaurentPoly] = {}
    for m1, R1 in a.terms.items():
        for m2, R2 in b.terms.items():
            m, poly = _mono_mul(m1, R1, m2, R2, params)
            out[m] = out[m] + poly if m in out else poly
    return AlgebraElement(out)


def _power(base: AlgebraElement, exp: int, params: AlgebraParams) -> AlgebraElement:
    out = AlgebraElement.scalar(1.0)
    for _ in range(exp):
        out = multiply(out, base, params)
    return out


def _g_images(params: AlgebraParams) -> tuple[AlgebraElement, AlgebraElement]:
    """Normal forms of g(u) = q^l Z^-l u and g(v) = q^l Z^l v."""
    q, l = params.q, params.l
    gu = AlgebraElement({1: LaurentPoly({-l: q ** (-l)})})
    gv = AlgebraElement({-1: LaurentPoly({l: q ** (-l)})})
    return gu, gv


def apply_g(a: AlgebraElement, params: AlgebraParams) -> AlgebraElement:
    """Twist automorphism fixing Z, determined by the exponent params.l."""
    gu, gv = _g_images(params)
    out = AlgebraElement.zero()
    for m, R in a.terms.items():
        img = _power(gu if m > 0 else gv, abs(m), params)
        out = out + multiply(img, AlgebraElement.from_poly(R), params)
    return out


def _rho_images(params: AlgebraParams) -> tuple[AlgebraElement, AlgebraElement]:
    """Normal forms of rho(u) = q^k Z^k v and rho(v) = q^k Z^-k u."""
    q, k = params.q, params.k
    ru = AlgebraElement({-1: LaurentPoly({k: q ** (-k)})})
    rv = AlgebraElement({1: LaurentPoly({-k: q ** (-k)})})
    return ru, rv


def _apply_rho_unchecked(a: AlgebraElement, params: AlgebraParams) -> AlgebraElement:
    ru, rv = _rho_images(params)
    out = AlgebraElement.zero()
    for m, R in a.terms.items():
        img = _power(ru if m > 0 else rv, abs(m), params)
        out = out + multiply(img, AlgebraElement.from_poly(R.conj_invol()), params)
    return out


def apply_rho(a: AlgebraElement, params: AlgebraParams) -> AlgebraElement:
    """Antilinear multiplicative conjugation; needs P self-conjugate."""
    if not params.is_self_conjugate:
        raise ValueError(
            "rho is only well-defined when P equals its conjugate-inverted form"
        )
    return _apply_rho_unchecked(a, params)


def degree_zero_part(a: AlgebraElement) -> LaurentPoly:
    """The ladder-degree-0 term, as a polynomial in Z."""
    return a.terms.get(0, LaurentPoly.zero())


@dataclass(frozen=True)
class RelationReport:
    residuals: dict[str, float]
    max_residual: float


def check_relations_preserved(which: str, params: AlgebraParams) -> RelationReport:
    """Apply g or rho to both sides of each defining relation.

    The map is applied generator-by-generator (rho without the
    self-conjugacy guard, so a failing P shows up as a residual instead of
    an exception).
    """
    q = params.q
    u, v = AlgebraElement.u(), AlgebraElement.v()
    Z = AlgebraElement.z_pow(1)
    Zi = AlgebraElement.z_pow(-1)

    if which == "g":
        gu, gv = _g_images(params)
        images = {"u": gu, "v": gv, "Z": Z, "Zi": Zi}
        conj = False
    elif which == "rho":
        ru, rv = _rho_images(params)
        images = {"u": ru, "v": rv, "Z": Zi, "Zi": Z}
        conj = True
    else:
        raise ValueError("which must be 'g' or 'rho'")

    def image_of_poly(p: LaurentPoly) -> AlgebraElement:
        if conj:
            return AlgebraElement.from_poly(p.conj_invol())
        return AlgebraElement.from_poly(p)

    def mul(*els: AlgebraElement) -> AlgebraElement:
        out = AlgebraElement.scalar(1.0)
        for e in els:
            out = multiply(out, e, params)
        return out

    Pm = params.P.scale_arg(1.0 / q)
    Pp = params.P.scale_arg(q)
    relations = {
        "ZuZi=q2u": (
            mul(images["Z"], images["u"], images["Zi"]),
            images["u"].scaled(q ** 2),
        ),
        "ZvZi=q-2v": (
            mul(images["Z"], images["v"], images["Zi"]),
            images["v"].scaled(q ** -2),
        ),
        "uv=P(q-1Z)": (mul(images["u"], images["v"]), image_of_poly(Pm)),
        "vu=P(qZ)": (mul(images["v"], images["u"]), image_of_poly(Pp)),
    }
    residuals = {}
    for name, (lhs, rhs) in relations.items():
        scale = max(lhs.max_abs(), rhs.max_abs(), 1.0)
        residuals[name] = lhs.diff_norm(rhs) / scale
    return RelationReport(residuals=residuals, max_residual=max(residuals.values()))


def random_element(
    rng: np.random.Generator, max_ladder: int = 2, max_z_degree: int = 3
) -> AlgebraElement:
    """Dense random element, coefficients uniform on the complex unit disk."""
    terms = {}
    for m in range(-max_ladder, max_ladder + 1):
        coeffs = {}
        for e in range(-max_z_degree, max_z_degree + 1):
            radius = np.sqrt(rng.uniform())
            angle = rng.uniform(0.0, 2.0 * np.pi)
            coeffs[e] = radius * np.exp(1j * angle)
        terms[m] = LaurentPoly(coeffs)
    return AlgebraElement(terms)
