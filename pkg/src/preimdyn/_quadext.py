"""Arithmetic in iterated quadratic extensions on nested pair representations.

An element of ``F_l = F_{l-1}(sqrt(r_l))`` is stored as ``(lo, hi)`` meaning
``lo + hi * sqrt(r_l)`` with ``lo, hi`` elements of ``F_{l-1}``; level-0
elements are whatever the base field uses.  The same engine backs constant
towers over Q and function-field towers over K(t).
"""


class QuadArith:
    """Field operations for a quadratic tower over ``base``.

    ``base`` must provide ``zero``, ``one``, ``add``, ``sub``, ``neg``,
    ``mul``, ``inv``, ``is_zero`` and ``sqrt`` (root or ``None``).
    ``radicands[i]`` is the radicand of level ``i + 1`` as a raw element of
    level ``i``.
    """

    def __init__(self, base, radicands=()):
        self.base = base
        self.radicands = list(radicands)

    @property
    def depth(self):
        return len(self.radicands)

    def zero(self, level):
        z = self.base.zero
        for _ in range(level):
            z = (z, z)
        return z

    def one(self, level):
        x = self.base.one
        for i in range(level):
            x = (x, self.zero(i))
        return x

    def lift(self, x, frm, to):
        for i in range(frm, to):
            x = (x, self.zero(i))
        return x

    def from_base(self, c, level):
        return self.lift(c, 0, level)

    def add(self, x, y, level):
        if level == 0:
            return self.base.add(x, y)
        return (self.add(x[0], y[0], level - 1), self.add(x[1], y[1], level - 1))

    def sub(self, x, y, level):
        if level == 0:
            return self.base.sub(x, y)
        return (self.sub(x[0], y[0], level - 1), self.sub(x[1], y[1], level - 1))

    def neg(self, x, level):
        if level == 0:
            return self.base.neg(x)
        return (self.neg(x[0], level - 1), self.neg(x[1], level - 1))

    def is_zero(self, x, level):
        if level == 0:
            return self.base.is_zero(x)
        return self.is_zero(x[0], level - 1) and self.is_zero(x[1], level - 1)

    def mul_base(self, x, c, level):
        """Multiply by a level-0 element."""
        if level == 0:
            return self.base.mul(x, c)
        return (self.mul_base(x[0], c, level - 1), self.mul_base(x[1], c, level - 1))

    def mul(self, x, y, level):
        if level == 0:
            return self.base.mul(x, y)
        l = level - 1
        a, b = x
        c, d = y
        bz = self.is_zero(b, l)
        dz = self.is_zero(d, l)
        if bz and dz:
            return (self.mul(a, c, l), self.zero(l))
        if bz:
            return (self.mul(a, c, l), self.mul(a, d, l))
        if dz:
            return (self.mul(a, c, l), self.mul(b, c, l))
        r = self.radicands[l]
        lo = self.add(self.mul(a, c, l), self.mul(self.mul(b, d, l), r, l), l)
        hi = self.add(self.mul(a, d, l), self.mul(b, c, l), l)
        return (lo, hi)

    def square(self, x, level):
        return self.mul(x, x, level)

    def norm(self, x, level):
        """Norm to level ``level - 1``: ``lo^2 - hi^2 r``."""
        l = level - 1
        a, b = x
        return self.sub(self.square(a, l), self.mul(self.square(b, l), self.radicands[l], l), l)

    def conj(self, x, level):
        a, b = x
        return (a, self.neg(b, level - 1))

    def inv(self, x, level):
        if level == 0:
            return self.base.inv(x)
        l = level - 1
        a, b = x
        if self.is_zero(b, l):
            return (self.inv(a, l), self.zero(l))
        n_inv = self.inv(self.norm(x, level), l)
        return (self.mul(a, n_inv, l), self.neg(self.mul(b, n_inv, l), l))

    def div(self, x, y, level):
        return self.mul(x, self.inv(y, level), level)

    def half(self, x, level):
        return self.mul_base(x, self.base.inv(self.base.add(self.base.one, self.base.one)), level)

    def sqrt(self, x, level):
        """A square root of ``x`` in the same field, or ``None``.

        Writing ``x = A + B y``: if ``B = 0`` the root is ``sqrt(A)`` or
        ``sqrt(A / r) * y``; otherwise a root ``a + b y`` exists iff
        ``D^2 = A^2 - B^2 r`` has a root ``D`` below and ``(A +- D)/2`` is a
        nonzero square ``a^2``, with ``b = B / (2a)``.
        """
        if level == 0:
            return self.base.sqrt(x)
        l = level - 1
        A, B = x
        if self.is_zero(B, l):
            s = self.sqrt(A, l)
            if s is not None:
                return (s, self.zero(l))
            if self.is_zero(A, l):
                return self.zero(level)
            s = self.sqrt(self.div(A, self.radicands[l], l), l)
            if s is not None:
                return (self.zero(l), s)
            return None
        D = self.sqrt(self.norm(x, level), l)
        if D is None:
            return None
        for h in (self.add(A, D, l), self.sub(A, D, l)):
            a = self.sqrt(self.half(h, l), l)
            if a is not None and not self.is_zero(a, l):
                b = self.div(self.half(B, l), a, l)
                return (a, b)
        return None
