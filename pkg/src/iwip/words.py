"""Free-group words and automorphisms given by image tuples.

A word is a tuple of nonzero ints: ``i`` is the generator ``a_i`` and ``-i``
its inverse.  The same encoding is reused for edge paths in graphs, where
the ints are signed edge ids.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence

Word = tuple[int, ...]

LETTERS = string.ascii_lowercase


class WordError(ValueError):
    pass


class NotAnAutomorphism(ValueError):
    """Raised when an image tuple does not form a free basis."""

    def __init__(self, message: str, trace: list[str] | None = None):
        super().__init__(message)
        self.trace = trace or []


def free_reduce(letters: Iterable[int], rank: int | None = None) -> Word:
    out: list[int] = []
    for x in letters:
        if x == 0 or (rank is not None and abs(x) > rank):
            raise WordError(f"generator index {x} out of range for rank {rank}")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def multiply(*words: Sequence[int]) -> Word:
    out: list[int] = []
    for w in words:
        for x in w:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return tuple(out)


def cyclic_reduce(w: Sequence[int]) -> Word:
    w = free_reduce(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return tuple(w[i:j])


def cyclic_conjugator(w: Sequence[int]) -> tuple[Word, Word]:
    """Return ``(p, c)`` with ``w == p c p^-1`` and ``c`` cyclically reduced."""
    w = free_reduce(w)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return tuple(w[:i]), tuple(w[i:j])


def rotations(w: Sequence[int]) -> list[Word]:
    w = tuple(w)
    return [w[i:] + w[:i] for i in range(len(w))] or [()]


def canonical_cyclic(w: Sequence[int]) -> Word:
    """Least rotation of the cyclic reduction; equal iff conjugate."""
    return min(rotations(cyclic_reduce(w)))


def are_conjugate(u: Sequence[int], v: Sequence[int]) -> bool:
    return canonical_cyclic(u) == canonical_cyclic(v)


def power(w: Sequence[int], k: int) -> Word:
    if k < 0:
        return power(inverse(w), -k)
    return multiply(*([tuple(w)] * k))


def exponent_sums(w: Sequence[int], rank: int) -> tuple[int, ...]:
    sums = [0] * rank
    for x in w:
        sums[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(sums)


def mod2_class(w: Sequence[int], rank: int) -> tuple[int, ...]:
    return tuple(s % 2 for s in exponent_sums(w, rank))


def parse_word(text: str, rank: int | None = None) -> Word:
    letters = []
    for ch in text:
        if ch.isspace() or ch in "1ε":
            continue
        if ch in LETTERS:
            letters.append(LETTERS.index(ch) + 1)
        elif ch.lower() in LETTERS and ch.isupper():
            letters.append(-(LETTERS.index(ch.lower()) + 1))
        else:
            raise WordError(f"unexpected character {ch!r} in word {text!r}")
    return free_reduce(letters, rank)


def format_word(w: Sequence[int]) -> str:
    if not w:
        return "1"
    return "".join(LETTERS[x - 1] if x > 0 else LETTERS[-x - 1].upper() for x in w)


def nielsen_reduce(words: Sequence[Word]) -> tuple[list[Word], list[str]]:
    """Greedy length-reducing Nielsen moves; returns the final tuple and a trace."""
    ws = [free_reduce(w) for w in words]
    trace: list[str] = []
    improved = True
    while improved:
        improved = False
        for i in range(len(ws)):
            for j in range(len(ws)):
                if i == j or not ws[j]:
                    continue
                for cand, desc in (
                    (multiply(ws[i], ws[j]), f"w{i+1} <- w{i+1} w{j+1}"),
                    (multiply(ws[i], inverse(ws[j])), f"w{i+1} <- w{i+1} w{j+1}^-1"),
                    (multiply(ws[j], ws[i]), f"w{i+1} <- w{j+1} w{i+1}"),
                    (multiply(inverse(ws[j]), ws[i]), f"w{i+1} <- w{j+1}^-1 w{i+1}"),
                ):
                    if len(cand) < len(ws[i]):
                        ws[i] = cand
                        trace.append(f"{desc} = {format_word(cand)}")
                        improved = True
                        break
    return ws, trace


@dataclass(frozen=True)
class Automorphism:
    """An automorphism of F_N as the tuple of images of the basis letters."""

    rank: int
    images: tuple[Word, ...]
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.rank < 1 or len(self.images) != self.rank:
            raise NotAnAutomorphism(f"expected {self.rank} images, got {len(self.images)}")
        imgs = tuple(free_reduce(w, self.rank) for w in self.images)
        object.__setattr__(self, "images", imgs)
        if self.validate:
            check_basis(imgs, self.rank)

    @classmethod
    def identity(cls, rank: int) -> "Automorphism":
        return cls(rank, tuple((i,) for i in range(1, rank + 1)), validate=False)

    @classmethod
    def parse(cls, text: str, rank: int | None = None) -> "Automorphism":
        return parse_automorphism(text, rank)

    def __call__(self, w: Sequence[int]) -> Word:
        return self.apply(w)

    def apply(self, w: Sequence[int]) -> Word:
        out: list[int] = []
        for x in w:
            if abs(x) > self.rank:
                raise WordError(f"letter {x} outside rank {self.rank}")
            img = self.images[x - 1] if x > 0 else inverse(self.images[-x - 1])
            for y in img:
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
        return tuple(out)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """``self ∘ other``: first ``other``, then ``self``."""
        if other.rank != self.rank:
            raise WordError("rank mismatch")
        return Automorphism(self.rank, tuple(self.apply(w) for w in other.images), validate=False)

    def __matmul__(self, other: "Automorphism") -> "Automorphism":
        return self.compose(other)

    def norm(self) -> int:
        return max(len(w) for w in self.images)

    def inverse(self) -> "Automorphism":
        from .stallings import basis_inverse

        return Automorphism(self.rank, basis_inverse(self.images, self.rank), validate=False)

    def power(self, k: int) -> "Automorphism":
        base = self if k >= 0 else self.inverse()
        out = Automorphism.identity(self.rank)
        for _ in range(abs(k)):
            out = base.compose(out)
        return out

    def abelianization(self) -> tuple[tuple[int, ...], ...]:
        """Integer matrix whose column j is the exponent-sum vector of phi(a_j)."""
        cols = [exponent_sums(w, self.rank) for w in self.images]
        return tuple(tuple(cols[j][i] for j in range(self.rank)) for i in range(self.rank))

    def is_inner(self) -> bool:
        return inner_conjugator(self) is not None

    def outer_equal(self, other: "Automorphism") -> bool:
        return self.compose(other.inverse()).is_inner()

    def format(self) -> str:
        return "; ".join(f"{LETTERS[i]}->{format_word(w)}" for i, w in enumerate(self.images))

    def __str__(self) -> str:
        return self.format()


def aut_norm(phi: Automorphism) -> int:
    return phi.norm()


def apply(phi: Automorphism, w: Sequence[int]) -> Word:
    return phi.apply(w)


def compose(phi: Automorphism, psi: Automorphism) -> Automorphism:
    return phi.compose(psi)


def inner_automorphism(g: Sequence[int], rank: int) -> Automorphism:
    """x -> g x g^-1."""
    g = free_reduce(g, rank)
    return Automorphism(rank, tuple(multiply(g, (i,), inverse(g)) for i in range(1, rank + 1)), validate=False)


def inner_conjugator(chi: Automorphism) -> Word | None:
    """Return ``g`` with ``chi(x) = g x g^-1`` for every letter, or None."""
    n = chi.rank
    w = chi.images[0]
    if len(w) % 2 == 0:
        return None
    h = len(w) // 2
    p = w[:h]
    if w[h] != 1 or multiply(p, (1,), inverse(p)) != w:
        return None
    if n == 1:
        return p
    # g = p a^k for some k; pin k using the second letter
    core = multiply(inverse(p), chi.images[1], p)
    k = 0
    while core and core[0] == 1 and core[-1] == -1:
        core = core[1:-1]
        k += 1
    while core and core[0] == -1 and core[-1] == 1:
        core = core[1:-1]
        k -= 1
    if core != (2,):
        return None
    g = multiply(p, power((1,), k))
    for i in range(n):
        if chi.images[i] != multiply(g, (i + 1,), inverse(g)):
            return None
    return g


def check_basis(images: Sequence[Word], rank: int) -> None:
    reduced, trace = nielsen_reduce(images)
    if sorted(abs(w[0]) for w in reduced if len(w) == 1) == list(range(1, rank + 1)) and all(
        len(w) == 1 for w in reduced
    ):
        return
    # greedy moves can stall on genuine bases; folding is the exact test
    from .stallings import generates_free_group

    if not generates_free_group(images, rank):
        raise NotAnAutomorphism(
            "images do not form a basis: Nielsen reduction stalls at "
            + ", ".join(format_word(w) for w in reduced),
            trace,
        )


def parse_automorphism(text: str, rank: int | None = None) -> Automorphism:
    """Parse ``"a->ab; b->a"``; the rank is inferred from the letters used."""
    rules = {}
    for part in text.replace(",", ";").split(";"):
        part = part.strip()
        if not part:
            continue
        if "->" not in part:
            raise WordError(f"expected 'x->word' in {part!r}")
        lhs, rhs = part.split("->", 1)
        lhs = lhs.strip()
        if len(lhs) != 1 or lhs not in LETTERS:
            raise WordError(f"bad generator {lhs!r}")
        if lhs in rules:
            raise WordError(f"generator {lhs!r} given twice")
        rules[lhs] = parse_word(rhs)
    if not rules:
        raise WordError("empty automorphism")
    used = max(LETTERS.index(c) + 1 for c in rules)
    for w in rules.values():
        if w:
            used = max(used, max(abs(x) for x in w))
    n = rank or used
    if used > n:
        raise WordError(f"letters exceed rank {n}")
    images = tuple(rules.get(LETTERS[i], (i + 1,)) for i in range(n))
    return Automorphism(n, images)
