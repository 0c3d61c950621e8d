"""Chevalley-basis arithmetic over Z and its reductions to prime fields.

The structure constants N_{a,b} are produced from a total root order that
respects addition: for each non-simple positive root the pair (a1, b1) with
a1 + b1 = gamma and a1 minimal is the extraspecial pair and gets
N_{a1,b1} = +(r+1); every other sign follows from the Jacobi identity and
the standard triangle relation N_{a,b}/(c,c) = N_{b,c}/(a,a) for
a + b + c = 0.  All derived constants are checked to be integers of absolute
value r+1, and the test suite verifies the Jacobi identity over Z.

Group elements act through integer divided-power exponentials: the matrices
ad(x_a)^k / k! are formed over Z first and only then reduced mod p.  The mod-p
exponential of the reduced matrix is *not* the same thing when p is smaller
than a root-string length, and nothing here ever computes it.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .gf import GF
from .orders import RootOrder, default_order
from .rootsys import Root, RootSystem, WeylWord


class ChevalleyBasis:
    """Structure constants and the Z-form bracket for one root system.

    Basis layout: x_a for positive roots a (storage order of the system),
    then x_{-a}, then h_1..h_rank.
    """

    def __init__(self, system: RootSystem, order: RootOrder | None = None):
        self.system = system
        self.order = order if order is not None else default_order(system)
        if not self.order.respects_addition(system):
            raise ValueError("root order does not respect addition of positive roots")
        self.pos_sorted = self.order.sorted_roots(system)
        self.rank_of = {r: i for i, r in enumerate(self.pos_sorted)}
        self.n_pos = system.num_positive
        self.dim = 2 * self.n_pos + system.rank
        self._nrm = {r: system.norm2(r) for r in system.positive_roots}
        self._n_table: dict[tuple[Root, Root], int] = {}
        self._n_memo: dict[tuple[Root, Root], Fraction] = {}
        self._build_positive_table()
        self._ad_cache: dict[int, np.ndarray] = {}
        self._exp_cache: dict[int, list[np.ndarray]] = {}
        self._field_cache: dict[tuple[int, int], dict] = {}

    # -- indices -------------------------------------------------------------

    def basis_index(self, root: Root) -> int:
        """Index of x_root in the g-basis (root may be negative)."""
        if root.is_positive:
            return self.system.index(root)
        return self.n_pos + self.system.index(-root)

    def basis_root(self, idx: int) -> Root:
        if idx < self.n_pos:
            return self.system.root(idx)
        return -self.system.root(idx - self.n_pos)

    # -- structure constants ---------------------------------------------------

    def _build_positive_table(self):
        sys = self.system
        by_sum: dict[Root, list] = defaultdict(list)
        for a in sys.positive_roots:
            for b in sys.positive_roots:
                if self.rank_of[a] < self.rank_of[b]:
                    s = a + b
                    if sys.is_root(s):
                        by_sum[s].append((a, b))
        self.extraspecial: dict[Root, tuple[Root, Root]] = {}
        for gamma in sorted(sys.positive_roots, key=lambda r: (r.height, r.coeffs)):
            pairs = by_sum.get(gamma)
            if not pairs:
                continue
            a1, b1 = min(pairs, key=lambda p: self.rank_of[p[0]])
            self.extraspecial[gamma] = (a1, b1)
            r, _ = sys.root_string(a1, b1)
            self._n_table[(a1, b1)] = r + 1
            n1 = r + 1
            for a, b in pairs:
                if (a, b) == (a1, b1):
                    continue
                t2 = t3 = Fraction(0)
                if sys.is_root(b1 - a):
                    t2 = self._n_signed(b1, -a) * self._n_signed(b1 - a, a1)
                if sys.is_root(a1 - a):
                    t3 = self._n_signed(-a, a1) * self._n_signed(a1 - a, b1)
                val = Fraction(self._nrm[gamma], self._nrm[b]) * (t2 + t3) / n1
                if val.denominator != 1:
                    raise ArithmeticError(f"non-integral constant for {a}+{b}")
                rr, _ = sys.root_string(a, b)
                if abs(int(val)) != rr + 1:
                    raise ArithmeticError(f"constant magnitude check failed at {a},{b}")
                self._n_table[(a, b)] = int(val)

    def _n_pos(self, a: Root, b: Root) -> int:
        if (a, b) in self._n_table:
            return self._n_table[(a, b)]
        return -self._n_table[(b, a)]

    def _n_signed(self, a: Root, b: Root) -> Fraction:
        if not (
            self.system.is_root(a)
            and self.system.is_root(b)
            and self.system.is_root(a + b)
        ):
            return Fraction(0)
        key = (a, b)
        if key in self._n_memo:
            return self._n_memo[key]
        apos, bpos = a.is_positive, b.is_positive
        if apos and bpos:
            val = Fraction(self._n_pos(a, b))
        elif not apos and not bpos:
            val = -self._n_signed(-a, -b)
        elif not apos:
            val = -self._n_signed(b, a)
        else:
            B = -b
            pi = a - B
            if pi.is_positive:
                val = -Fraction(self._norm(pi), self._norm(a)) * self._n_signed(B, pi)
            else:
                pi2 = B - a
                val = -Fraction(self._norm(pi2), self._norm(B)) * self._n_signed(a, pi2)
        self._n_memo[key] = val
        return val

    def _norm(self, r: Root) -> int:
        v = self._nrm.get(r)
        if v is None:
            v = self.system.norm2(r)
            self._nrm[r] = v
        return v

    def N(self, a: Root, b: Root) -> int:
        """Structure constant N_{a,b}; zero when a+b is not a root."""
        val = self._n_signed(a, b)
        assert val.denominator == 1
        return int(val)

    def sparse_bracket(self, x: dict, y: dict) -> dict:
        """Bracket of formal Z-combinations {("x", root) | ("h", i): coeff}."""
        out: dict = {}

        def add(key, c):
            if c:
                out[key] = out.get(key, 0) + c
                if not out[key]:
                    del out[key]

        sys = self.system
        for ka, ca in x.items():
            for kb, cb in y.items():
                if ka[0] == "h" and kb[0] == "h":
                    continue
                if ka[0] == "h":
                    add(kb, ca * cb * sys.pairing(kb[1], ka[1]))
                elif kb[0] == "h":
                    add(ka, -ca * cb * sys.pairing(ka[1], kb[1]))
                else:
                    s = ka[1] + kb[1]
                    if all(v == 0 for v in s.coeffs):
                        for j, cj in enumerate(sys.coroot_coeffs(ka[1])):
                            add(("h", j), ca * cb * cj)
                    elif sys.is_root(s):
                        add(("x", s), ca * cb * self.N(ka[1], kb[1]))
        return out

    def csv_lines(self):
        """Deterministic (alpha, beta, N) dump over positive pairs."""
        yield "alpha,beta,N"
        for a in self.system.positive_roots:
            for b in self.system.positive_roots:
                if a != b and self.system.is_root(a + b) and (a + b).is_positive:
                    av = " ".join(map(str, a.coeffs))
                    bv = " ".join(map(str, b.coeffs))
                    yield f"{av},{bv},{self.N(a, b)}"

    # -- Z-form adjoint matrices ------------------------------------------------

    def ad_matrix(self, idx: int) -> np.ndarray:
        """ad of the idx-th basis element on the g-basis, over Z (columns act)."""
        if idx in self._ad_cache:
            return self._ad_cache[idx]
        sys = self.system
        d = self.dim
        M = np.zeros((d, d), dtype=np.int64)
        if idx >= 2 * self.n_pos:  # h_j
            j = idx - 2 * self.n_pos
            for k in range(2 * self.n_pos):
                M[k, k] = sys.pairing(self.basis_root(k), j)
        else:
            a = self.basis_root(idx)
            for k in range(2 * self.n_pos):
                b = self.basis_root(k)
                s = a + b
                if all(c == 0 for c in s.coeffs):  # b == -a: h_a
                    for j, cj in enumerate(sys.coroot_coeffs(a)):
                        M[2 * self.n_pos + j, k] = cj
                elif sys.is_root(s):
                    M[self.basis_index(s), k] = self.N(a, b)
            for j in range(sys.rank):  # [x_a, h_j] = -<a, aj^vee> x_a
                M[idx, 2 * self.n_pos + j] = -sys.pairing(a, j)
        self._ad_cache[idx] = M
        return M

    def ad_stack(self) -> np.ndarray:
        """All ad matrices, shape (dim, dim, dim), over Z."""
        if not hasattr(self, "_ad_stack"):
            self._ad_stack = np.stack([self.ad_matrix(i) for i in range(self.dim)])
        return self._ad_stack

    def embed_u(self, coeffs_u: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim, dtype=coeffs_u.dtype)
        out[: self.n_pos] = coeffs_u
        return out

    # -- per-field data ----------------------------------------------------------

    def field_data(self, field: GF) -> dict:
        key = (field.p, field.degree)
        if key not in self._field_cache:
            stack = (self.ad_stack() % field.p).astype(np.int16)
            self._field_cache[key] = {
                "ad_g": stack,
                "ad_u": stack[: self.n_pos, : self.n_pos, : self.n_pos],
            }
        return self._field_cache[key]

    def ad_of(self, field: GF, vec: np.ndarray, scope: str = "g") -> np.ndarray:
        """Adjoint matrix of a vector over the field (vec in scope coords)."""
        stack = self.field_data(field)["ad_g" if scope == "g" else "ad_u"]
        if field.degree == 1:
            return (
                np.tensordot(vec.astype(np.int64), stack.astype(np.int64), axes=(0, 0))
                % field.p
            ).astype(np.int16)
        acc = field.zeros(stack.shape[1:])
        for i in np.nonzero(vec)[0]:
            acc = field.add(acc, field.mul(int(vec[i]), stack[i]))
        return acc

    # -- divided-power exponentials ------------------------------------------------

    def exp_terms(self, root: Root) -> list[np.ndarray]:
        """Integer matrices ad(x_root)^k / k!, k = 0, 1, ... until zero."""
        idx = self.basis_index(root)
        if idx in self._exp_cache:
            return self._exp_cache[idx]
        M = self.ad_matrix(idx)
        terms = [np.eye(self.dim, dtype=np.int64)]
        Mk = np.eye(self.dim, dtype=np.int64)
        k = 1
        while True:
            Mk = Mk @ M
            if not Mk.any():
                break
            f = math.factorial(k)
            if (Mk % f).any():
                raise ArithmeticError("non-integral divided power in the Z-form")
            terms.append(Mk // f)
            k += 1
            if k > 2 * self.dim:
                raise ArithmeticError("ad(x_root) is not nilpotent")
        self._exp_cache[idx] = terms
        return terms


@lru_cache(maxsize=None)
def build_constants(system: RootSystem, order: RootOrder | None = None) -> ChevalleyBasis:
    return ChevalleyBasis(system, order)


# -- Lie vectors over a field ------------------------------------------------


@dataclass
class LieVector:
    basis: ChevalleyBasis
    field: GF
    scope: str  # "u" or "g"
    coeffs: np.ndarray

    def __post_init__(self):
        want = self.basis.n_pos if self.scope == "u" else self.basis.dim
        assert len(self.coeffs) == want, "coefficient length does not match scope"

    def _check(self, other: "LieVector"):
        if self.field is not other.field or self.scope != other.scope:
            raise ValueError("field or basis scope mismatch")

    def bracket(self, other: "LieVector") -> "LieVector":
        self._check(other)
        ad = self.basis.ad_of(self.field, self.coeffs, self.scope)
        out = self.field.matmul(ad, other.coeffs[:, None])[:, 0]
        return LieVector(self.basis, self.field, self.scope, out)

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def as_g(self) -> "LieVector":
        if self.scope == "g":
            return self
        return LieVector(
            self.basis, self.field, "g", self.basis.embed_u(self.coeffs)
        )


def p_power(x: LieVector) -> LieVector:
    """The unique y with ad(y) = ad(x)^p, solved in the scope of x.

    Rejects (ArithmeticError) when the solution fails to exist or to be
    unique, which signals a characteristic outside the supported range.
    """
    basis, gf = x.basis, x.field
    xg = x.as_g()
    A = basis.ad_of(gf, xg.coeffs, "g")
    P = A
    for _ in range(gf.p - 1):
        P = gf.matmul(P, A)
    idxs = (
        range(basis.n_pos) if x.scope == "u" else range(basis.dim)
    )
    stack = basis.field_data(gf)["ad_g"]
    M = np.stack([stack[i].reshape(-1) for i in idxs], axis=1)
    rhs = P.reshape(-1)
    y = gf.solve_affine(M, rhs)
    if y is None:
        raise ArithmeticError("ad(y) = ad(x)^p has no solution in this scope")
    if len(gf.nullspace(M)):
        raise ArithmeticError("adjoint representation is not faithful on this scope")
    return LieVector(basis, gf, x.scope, y)


def is_p_nilpotent(basis: ChevalleyBasis, field: GF, vec_u: np.ndarray) -> bool:
    """Whether the u-vector has vanishing p-power (ad(x)^p = 0 suffices)."""
    A = basis.ad_of(field, basis.embed_u(vec_u), "g")
    P = A
    for _ in range(field.p - 1):
        P = field.matmul(P, A)
    return not P.any()


# -- group generators -----------------------------------------------------------


@dataclass
class GroupGenerator:
    """A root-group element, cocharacter value, or Weyl representative.

    `matrix` is the action on the g-basis (columns transform); apply to row
    matrices with gen.apply_rows.
    """

    kind: str
    label: tuple
    field: GF
    matrix: np.ndarray

    def apply_vec(self, v: np.ndarray) -> np.ndarray:
        return self.field.matmul(self.matrix, v[:, None])[:, 0]

    def apply_rows(self, rows: np.ndarray) -> np.ndarray:
        return self.field.matmul(rows, self.matrix.T.copy())

    def then(self, other: "GroupGenerator") -> "GroupGenerator":
        """Composite acting as `other` after `self`."""
        return GroupGenerator(
            "product",
            (other.label, self.label),
            self.field,
            self.field.matmul(other.matrix, self.matrix),
        )


def root_group_element(
    basis: ChevalleyBasis, field: GF, alpha: Root, t: int
) -> GroupGenerator:
    """x_alpha(t): the mod-p image of the Z-form exponential of t ad(x_alpha)."""
    terms = basis.exp_terms(alpha)
    M = field.zeros((basis.dim, basis.dim))
    tk = 1  # t^k
    for k, term in enumerate(terms):
        if k:
            tk = field.mul(tk, t)
        M = field.add(M, field.mul(int(tk), (term % field.p).astype(np.int16)))
    return GroupGenerator("root_group", (alpha.coeffs, t), field, M)


def cocharacter_element(
    basis: ChevalleyBasis, field: GF, i: int, lam: int
) -> GroupGenerator:
    """alpha_i^vee(lam) acting diagonally; i is a 1-based simple index."""
    if lam == 0:
        raise ValueError("cocharacter values must be nonzero")
    d = basis.dim
    M = field.zeros((d, d))
    for k in range(2 * basis.n_pos):
        e = basis.system.pairing(basis.basis_root(k), i - 1)
        M[k, k] = field.power(lam, e % (field.q - 1))
    for j in range(basis.system.rank):
        M[2 * basis.n_pos + j, 2 * basis.n_pos + j] = 1
    return GroupGenerator("cocharacter", (i, lam), field, M)


def weyl_rep_element(basis: ChevalleyBasis, field: GF, i: int) -> GroupGenerator:
    """The representative x_i(1) x_{-i}(-1) x_i(1) of the simple reflection."""
    a = basis.system.simple_roots[i - 1]
    one = root_group_element(basis, field, a, 1)
    minus = root_group_element(basis, field, -a, field.NEG[1])
    g = one.then(minus).then(one)
    return GroupGenerator("weyl_rep", (i,), field, g.matrix)


def weyl_word_element(basis: ChevalleyBasis, field: GF, word: WeylWord) -> GroupGenerator:
    """Representative of a Weyl word (first letter applied last)."""
    M = field.eye(basis.dim)
    g = GroupGenerator("weyl_word", (word.letters,), field, M)
    for i in reversed(word.letters):
        g = g.then(weyl_rep_element(basis, field, i))
    return GroupGenerator("weyl_word", (word.letters,), field, g.matrix)
