"""
Online (lazy, memoized) evaluation of a polynomial at power series.

Each node of the expression DAG caches its ``x^k`` coefficients, so asking for
one more order costs a single convolution step per product node.  Used by the
solver and the majorant recursion, whose inputs become known order by order.
"""

from __future__ import annotations

from .field import LogPoly

_ZERO = LogPoly()


class Node:
    """Series with memoized coefficients and valuation ``>= v``."""

    __slots__ = ("v", "memo")

    def __init__(self, v):
        self.v = v
        self.memo = {}

    def coeff(self, k) -> LogPoly:
        if k < self.v:
            return _ZERO
        c = self.memo.get(k)
        if c is None:
            c = self.memo[k] = self.compute(k)
        return c

    def compute(self, k):
        raise NotImplementedError


class Leaf(Node):
    """Coefficients supplied by ``fn(k)``; valuation ``>= 1``."""

    __slots__ = ("fn",)

    def __init__(self, fn, v=1):
        super().__init__(v)
        self.fn = fn

    def compute(self, k):
        return self.fn(k)


class Product(Node):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__(a.v + b.v)
        self.a = a
        self.b = b

    def compute(self, k):
        acc = _ZERO
        a, b = self.a, self.b
        for i in range(a.v, k - b.v + 1):
            ai = a.coeff(i)
            if not ai:
                continue
            bj = b.coeff(k - i)
            if bj:
                acc = acc + ai * bj
        return acc


class OnlinePoly:
    """``G(x, t, w_0, ..., w_n)`` evaluated at leaf series ``w_j``.

    ``G`` is a :class:`~dulac.poly.Poly`; its ``y`` slots are bound to ``leaves``.
    """

    def __init__(self, G, leaves):
        if len(leaves) != G.n + 1:
            raise ValueError(f"expected {G.n + 1} leaves, got {len(leaves)}")
        self.base = list(leaves)
        self.powers = [{1: b} for b in self.base]
        self.products = {}
        self.free = {}
        self.monos = []
        for (mu, nu, *qs), c in G.terms.items():
            if not any(qs):
                self.free[mu] = self.free.get(mu, _ZERO) + LogPoly.monomial(nu, c)
                continue
            self.monos.append((mu, nu, c, self._product(tuple(qs))))

    def _power(self, j, q):
        cache = self.powers[j]
        if q not in cache:
            cache[q] = Product(self._power(j, q - 1), self.base[j])
        return cache[q]

    def _product(self, key):
        node = self.products.get(key)
        if node is not None:
            return node
        last = max(j for j, q in enumerate(key) if q)
        head = key[:last] + (0,) * (len(key) - last)
        pw = self._power(last, key[last])
        node = pw if not any(head) else Product(self._product(head), pw)
        self.products[key] = node
        return node

    def coeff(self, j) -> LogPoly:
        """Coefficient of ``x^j``."""
        acc = self.free.get(j, _ZERO)
        for mu, nu, c, node in self.monos:
            if j - mu >= node.v:
                piece = node.coeff(j - mu)
                if piece:
                    acc = acc + (piece * c).shift(nu)
        return acc
