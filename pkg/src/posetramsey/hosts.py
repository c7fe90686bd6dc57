"""Finite host posets: chains, Boolean lattices, grids, and butterflies.

Every host indexes its elements 0..size-1 so that the index order is a
linear extension of the partial order (elements are sorted by rank, ties
broken by their numeric encoding).  All higher layers rely on that
property: a set of pairwise-comparable elements sorted by index is
automatically sorted by the poset order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import DomainError, SizeLimitError, UnboundedHeightError

CHAIN = "chain"
BOOLEAN = "boolean"
GRID_FIXED_LENGTH = "grid-fixed-length"
GRID_FIXED_DIM = "grid-fixed-dim"
BUTTERFLY = "butterfly"
EXPLICIT = "explicit"

DEFAULT_MAX_ELEMENTS = 1 << 20
# Dense comparability bitsets are quadratic in host size; refuse beyond this.
MAX_DENSE_ELEMENTS = 4096


@dataclass(frozen=True)
class HostFamily:
    """A nested family of posets, selected by a kind and optional shape parameter.

    kind            parameter        n-th member
    chain           -                chain of n elements
    boolean         -                subsets of {1..n}
    grid-fixed-length  length l      n-dimensional grid [l]^n
    grid-fixed-dim     dimension m   m-dimensional grid [n]^m
    butterfly       -                n bottoms below n tops
    """

    kind: str
    param: int | None = None

    def __post_init__(self):
        if self.kind == GRID_FIXED_LENGTH:
            if self.param is None or self.param < 2:
                raise DomainError("grid-fixed-length needs a length parameter >= 2")
        elif self.kind == GRID_FIXED_DIM:
            if self.param is None or self.param < 1:
                raise DomainError("grid-fixed-dim needs a dimension parameter >= 1")
        elif self.kind in (CHAIN, BOOLEAN, BUTTERFLY, EXPLICIT):
            if self.param is not None:
                raise DomainError(f"{self.kind} takes no parameter")
        else:
            raise DomainError(f"unknown host family kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == GRID_FIXED_LENGTH:
            return f"gridl{self.param}"
        if self.kind == GRID_FIXED_DIM:
            return f"gridm{self.param}"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "HostFamily":
        text = text.strip().lower()
        if text in (CHAIN, BOOLEAN, BUTTERFLY, EXPLICIT):
            return cls(text)
        for prefix, kind in (("gridl", GRID_FIXED_LENGTH), ("gridm", GRID_FIXED_DIM)):
            if text.startswith(prefix) and text[len(prefix):].isdigit():
                return cls(kind, int(text[len(prefix):]))
        raise DomainError(f"unknown host family {text!r}")


def parse_host_spec(text: str) -> tuple[HostFamily, int]:
    """Parse "family:n" strings such as "boolean:3" or "gridl3:2"."""
    head, sep, tail = text.partition(":")
    if not sep or not tail.lstrip("-").isdigit():
        raise DomainError(f"host spec {text!r} is not of the form family:n")
    return HostFamily.parse(head), int(tail)


class HostPoset:
    """A concrete finite poset with canonical element indexing.

    Immutable after construction; derived structures (comparability
    bitsets, k-chain tables) are cached on first use and shared freely.
    """

    def __init__(self, family: HostFamily, n: int, encodings, leq_masks=None):
        self.family = family
        self.n = n
        self.encodings = tuple(encodings)
        self.size = len(self.encodings)
        self._index_of = {enc: i for i, enc in enumerate(self.encodings)}
        self._digits = None
        if family.kind in (GRID_FIXED_LENGTH, GRID_FIXED_DIM):
            radix = family.param if family.kind == GRID_FIXED_LENGTH else n
            dims = n if family.kind == GRID_FIXED_LENGTH else family.param
            self._radix, self._dims = radix, dims
            self._digits = tuple(_mixed_radix(e, radix, dims) for e in self.encodings)
        # strict comparability bitsets, built lazily (explicit hosts carry theirs)
        self._down = None
        self._up = None
        if leq_masks is not None:
            self._down, self._up = leq_masks
        self._chains = {}
        self._chain_index = {}

    # -- order queries ---------------------------------------------------

    def leq(self, a: int, b: int) -> bool:
        """Whether element a is below-or-equal element b."""
        if a == b:
            return True
        kind = self.family.kind
        ea, eb = self.encodings[a], self.encodings[b]
        if kind == CHAIN:
            return ea <= eb
        if kind == BOOLEAN:
            return ea | eb == eb
        if kind == BUTTERFLY:
            return ea < self.n <= eb
        if kind == EXPLICIT:
            return bool(self._down[b] >> a & 1)
        da, db = self._digits[a], self._digits[b]
        return all(x <= y for x, y in zip(da, db))

    def rank(self, e: int) -> int:
        kind = self.family.kind
        enc = self.encodings[e]
        if kind == CHAIN:
            return enc
        if kind == BOOLEAN:
            return enc.bit_count()
        if kind == BUTTERFLY:
            return 0 if enc < self.n else 1
        if kind == EXPLICIT:
            return self._explicit_ranks[e]
        return sum(self._digits[e])

    def height(self) -> int:
        """Size of a longest chain."""
        kind = self.family.kind
        if kind == CHAIN:
            return self.n
        if kind == BOOLEAN:
            return self.n + 1
        if kind == BUTTERFLY:
            return 2
        if kind == GRID_FIXED_LENGTH:
            return self.n * (self.family.param - 1) + 1
        if kind == GRID_FIXED_DIM:
            return self.family.param * (self.n - 1) + 1
        # explicit: longest path over the index order (a linear extension)
        best = [1] * self.size
        for e in range(self.size):
            m = self._down[e] & ~(1 << e)
            while m:
                d = (m & -m).bit_length() - 1
                m &= m - 1
                if best[d] + 1 > best[e]:
                    best[e] = best[d] + 1
        return max(best, default=0)

    # -- dense comparability bitsets --------------------------------------

    def _build_masks(self):
        if self.size > MAX_DENSE_ELEMENTS:
            raise SizeLimitError(
                f"host with {self.size} elements exceeds the dense-bitset "
                f"limit of {MAX_DENSE_ELEMENTS}")
        down = [0] * self.size
        up = [0] * self.size
        for a in range(self.size):
            for b in range(a + 1, self.size):
                # index order is a linear extension, so only a <= b possible
                if self.leq(a, b):
                    down[b] |= 1 << a
                    up[a] |= 1 << b
        self._down_strict, self._up_strict = down, up

    @property
    def down_masks(self) -> list[int]:
        """Strict down-set of each element, as an index bitset."""
        if getattr(self, "_down_strict", None) is None:
            if self._down is not None:  # explicit host: strip reflexivity
                self._down_strict = [m & ~(1 << e) for e, m in enumerate(self._down)]
                self._up_strict = [m & ~(1 << e) for e, m in enumerate(self._up)]
            else:
                self._build_masks()
        return self._down_strict

    @property
    def up_masks(self) -> list[int]:
        """Strict up-set of each element, as an index bitset."""
        self.down_masks
        return self._up_strict

    def down_set(self, x: int) -> list[int]:
        """Elements y with y <= x, including x itself."""
        return _bits(self.down_masks[x] | (1 << x))

    def up_set(self, x: int) -> list[int]:
        """Elements y with x <= y, including x itself."""
        return _bits(self.up_masks[x] | (1 << x))

    def linear_extension(self) -> list[int]:
        """A total order extending the partial order (canonical indices)."""
        return list(range(self.size))

    # -- k-chains ---------------------------------------------------------

    def k_chains(self, k: int) -> list[tuple[int, ...]]:
        """All k-chains, lexicographically ordered by element indices.

        The position of a chain in this list is its canonical index.
        """
        if k < 1:
            raise DomainError("k must be >= 1")
        if k in self._chains:
            return self._chains[k]
        if k == 1:
            chains = [(e,) for e in range(self.size)]
        else:
            up = self.up_masks
            chains = []
            out = chains.append

            def extend(prefix: tuple, last: int, depth: int):
                cand = up[last]
                if depth == k - 1:
                    while cand:
                        b = cand & -cand
                        cand &= cand - 1
                        out(prefix + (b.bit_length() - 1,))
                    return
                while cand:
                    b = cand & -cand
                    cand &= cand - 1
                    e = b.bit_length() - 1
                    extend(prefix + (e,), e, depth + 1)

            for e in range(self.size):
                if k == 1:
                    out((e,))
                else:
                    extend((e,), e, 1)
        self._chains[k] = chains
        self._chain_index[k] = {c: i for i, c in enumerate(chains)}
        return chains

    def chain_index(self, chain: tuple[int, ...]) -> int:
        """Canonical index of a k-chain (elements in ascending index order)."""
        k = len(chain)
        self.k_chains(k)
        return self._chain_index[k][chain]

    # -- presentation ------------------------------------------------------

    def describe(self, e: int) -> str:
        kind = self.family.kind
        enc = self.encodings[e]
        if kind == BOOLEAN:
            members = [str(i + 1) for i in range(self.n) if enc >> i & 1]
            return "{" + ",".join(members) + "}"
        if kind == BUTTERFLY:
            return f"b{enc}" if enc < self.n else f"t{enc - self.n}"
        if self._digits is not None:
            return "(" + ",".join(str(d + 1) for d in self._digits[e]) + ")"
        return str(enc)

    def to_json(self) -> str:
        doc = {"family": str(self.family), "n": self.n,
               "elements": list(self.encodings)}
        if self.family.kind == EXPLICIT:
            doc["leq_pairs"] = [[a, b] for b in range(self.size)
                                for a in _bits(self._down[b]) if a != b]
        return json.dumps(doc)

    def __repr__(self):
        return f"HostPoset({self.family}:{self.n}, {self.size} elements)"


def _mixed_radix(value: int, radix: int, dims: int) -> tuple[int, ...]:
    digits = []
    for _ in range(dims):
        digits.append(value % radix)
        value //= radix
    return tuple(digits)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        b = mask & -mask
        mask &= mask - 1
        out.append(b.bit_length() - 1)
    return out


def build_host(family: HostFamily, n: int, *,
               max_elements: int = DEFAULT_MAX_ELEMENTS) -> HostPoset:
    """Construct the n-th host of a family with canonical element indexing."""
    kind = family.kind
    if kind == BOOLEAN:
        if n < 0:
            raise DomainError("boolean hosts need n >= 0")
    elif n < 1:
        raise DomainError("hosts need n >= 1")

    if kind == CHAIN:
        count = n
    elif kind == BOOLEAN:
        count = 1 << n
    elif kind == BUTTERFLY:
        count = 2 * n
    elif kind == GRID_FIXED_LENGTH:
        count = family.param ** n
    elif kind == GRID_FIXED_DIM:
        count = n ** family.param
    else:
        raise DomainError("explicit hosts are built with build_explicit_host")
    if count > max_elements:
        raise SizeLimitError(
            f"{family}:{n} would have {count} elements (cap {max_elements})")

    if kind in (CHAIN, BUTTERFLY):
        encodings = range(count)
    elif kind == BOOLEAN:
        encodings = sorted(range(count), key=lambda m: (m.bit_count(), m))
    else:
        radix = family.param if kind == GRID_FIXED_LENGTH else n
        dims = n if kind == GRID_FIXED_LENGTH else family.param
        encodings = sorted(range(count),
                           key=lambda v: (sum(_mixed_radix(v, radix, dims)), v))
    return HostPoset(family, n, encodings)


def build_explicit_host(num_elements: int, leq_pairs, *,
                        max_elements: int = DEFAULT_MAX_ELEMENTS) -> HostPoset:
    """Escape hatch: a host from an explicit strict-relation list.

    The reflexive/transitive closure of the given pairs is computed and
    elements are relabelled so indices form a linear extension.
    """
    if num_elements < 1:
        raise DomainError("explicit hosts need at least one element")
    if num_elements > max_elements or num_elements > MAX_DENSE_ELEMENTS:
        raise SizeLimitError(f"explicit host with {num_elements} elements is too large")
    down = [1 << e for e in range(num_elements)]
    for a, b in leq_pairs:
        if not (0 <= a < num_elements and 0 <= b < num_elements):
            raise DomainError(f"relation ({a},{b}) references unknown elements")
        down[b] |= 1 << a
    # transitive closure (iterate to fixpoint; sizes here are small)
    changed = True
    while changed:
        changed = False
        for b in range(num_elements):
            m = down[b]
            acc = m
            while m:
                bit = m & -m
                m &= m - 1
                acc |= down[bit.bit_length() - 1]
            if acc != down[b]:
                down[b] = acc
                changed = True
    for a in range(num_elements):
        for b in range(a + 1, num_elements):
            if down[b] >> a & 1 and down[a] >> b & 1:
                raise DomainError(f"elements {a} and {b} violate antisymmetry")
    # rank by longest chain below, then relabel to a linear extension
    rank = [0] * num_elements
    order = sorted(range(num_elements), key=lambda e: down[e].bit_count())
    for e in order:
        m = down[e] & ~(1 << e)
        r = 0
        while m:
            bit = m & -m
            m &= m - 1
            r = max(r, rank[bit.bit_length() - 1] + 1)
        rank[e] = r
    perm = sorted(range(num_elements), key=lambda e: (rank[e], e))
    newpos = {old: new for new, old in enumerate(perm)}
    ndown = [0] * num_elements
    nup = [0] * num_elements
    for old_b in range(num_elements):
        b = newpos[old_b]
        m = down[old_b]
        while m:
            bit = m & -m
            m &= m - 1
            a = newpos[bit.bit_length() - 1]
            ndown[b] |= 1 << a
            if a != b:
                nup[a] |= 1 << b
    for e in range(num_elements):
        nup[e] |= 1 << e
    host = HostPoset(HostFamily(EXPLICIT), num_elements, range(num_elements),
                     leq_masks=(ndown, nup))
    host._explicit_ranks = [rank[perm[e]] for e in range(num_elements)]
    return host


def host_from_json(text: str) -> HostPoset:
    doc = json.loads(text)
    family = HostFamily.parse(doc["family"])
    if family.kind == EXPLICIT:
        return build_explicit_host(doc["n"], doc.get("leq_pairs", []))
    host = build_host(family, doc["n"])
    if list(host.encodings) != list(doc["elements"]):
        raise DomainError("element list does not match the canonical host")
    return host


# -- family-level functions -----------------------------------------------

def family_size(family: HostFamily, n: int) -> int:
    """Number of elements of the family's n-th member."""
    kind = family.kind
    if kind == CHAIN:
        return n
    if kind == BOOLEAN:
        return 1 << n
    if kind == BUTTERFLY:
        return 2 * n
    if kind == GRID_FIXED_LENGTH:
        return family.param ** n
    if kind == GRID_FIXED_DIM:
        return n ** family.param
    raise DomainError("explicit families have a single member")


def family_height(family: HostFamily, n: int) -> int:
    kind = family.kind
    if kind == CHAIN:
        return n
    if kind == BOOLEAN:
        return n + 1
    if kind == BUTTERFLY:
        return 2
    if kind == GRID_FIXED_LENGTH:
        return n * (family.param - 1) + 1
    if kind == GRID_FIXED_DIM:
        return family.param * (n - 1) + 1
    raise DomainError("explicit families have a single member")


def min_n_for_size(family: HostFamily, size: int) -> int:
    """Least N >= 1 whose family member has at least `size` elements."""
    if size < 1:
        raise DomainError("size must be >= 1")
    n = 1
    while family_size(family, n) < size:
        n += 1
    return n


def min_n_for_height(family: HostFamily, height: int) -> int:
    """Least N >= 1 whose family member has height at least `height`."""
    if height < 1:
        raise DomainError("height must be >= 1")
    if family.kind == BUTTERFLY and height > 2:
        raise UnboundedHeightError(
            "butterfly hosts have height 2 for every N")
    n = 1
    while family_height(family, n) < height:
        n += 1
    return n


def embed_into_next(small: HostPoset, big: HostPoset) -> list[int]:
    """The canonical order-embedding of P_n into P_{n+1}, as an id map."""
    if small.family != big.family or big.n < small.n:
        raise DomainError("hosts are not nested members of one family")
    kind = small.family.kind
    out = []
    for e in range(small.size):
        enc = small.encodings[e]
        if kind in (CHAIN, BOOLEAN):
            out.append(big._index_of[enc])
        elif kind == BUTTERFLY:
            out.append(enc if enc < small.n else big.n + (enc - small.n))
        elif kind == GRID_FIXED_LENGTH:
            digits = small._digits[e] + (0,) * (big.n - small.n)
            value = 0
            for d in reversed(digits):
                value = value * big._radix + d
            out.append(big._index_of[value])
        else:  # grid-fixed-dim: same digit tuple, larger radix
            digits = small._digits[e]
            value = 0
            for d in reversed(digits):
                value = value * big._radix + d
            out.append(big._index_of[value])
    return out
