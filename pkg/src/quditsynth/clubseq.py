"""The club-sequence scheduler and its zero-pattern index sets.

The club sequence for (d, n) is the ordered list of (d**n - 1)/(d - 1)
words over {0..d-1, club} that drives state synthesis: term j says which
fiber of the partially collapsed state the j-th reflection zeroes.  Club
letters always form a suffix.  The index sets R1/R2/R3 attached to a step
partition the possibly-nonzero amplitudes and serve as a purely
combinatorial correctness oracle for the synthesis circuit:

  R1(j)  earlier fiber heads that may still be nonzero,
  R2(j)  the d indices of the fiber zeroed at step j,
  R3(j)  indices in fibers the traversal has not reached yet, i.e. whose
         length-(l-1) prefix is lexicographically above the term's prefix.

Here l is the position of the term's leftmost club (1-based in the math,
0-based in code).  Machine-readable output spells the club letter 'c'.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .circuits import ControlWord, single_target_word

CLUB = "c"
CLUB_PRETTY = "♣"

#: Guard against accidentally materializing astronomically long sequences.
MAX_TERMS = 10**6


class ClubError(ValueError):
    pass


@dataclass(frozen=True)
class ClubTerm:
    """Word over {0..d-1} plus a club suffix; at least one club."""

    letters: tuple

    def __post_init__(self):
        clubs = [i for i, let in enumerate(self.letters) if let == CLUB]
        if not clubs:
            raise ClubError("club term needs at least one club letter")
        if clubs != list(range(clubs[0], len(self.letters))):
            raise ClubError("club letters must form a suffix")

    def __len__(self) -> int:
        return len(self.letters)

    @property
    def club_start(self) -> int:
        """Index of the leftmost club letter."""
        return self.letters.index(CLUB)

    @property
    def prefix(self) -> tuple[int, ...]:
        return tuple(self.letters[: self.club_start])

    def to_string(self, pretty: bool = False) -> str:
        mark = CLUB_PRETTY if pretty else CLUB
        return "".join(mark if let == CLUB else str(let) for let in self.letters)


@dataclass(frozen=True)
class ClubSequence:
    d: int
    n: int
    terms: tuple[ClubTerm, ...]

    def __len__(self) -> int:
        return len(self.terms)


def sequence_length(d: int, n: int) -> int:
    return (d**n - 1) // (d - 1)


def iter_club_terms(d: int, n: int):
    """Stream the sequence without materializing it (CLI count mode)."""
    if n == 1:
        yield ClubTerm((CLUB,))
        return
    for q in range(d):
        for sub in iter_club_terms(d, n - 1):
            yield ClubTerm((q,) + sub.letters)
    yield ClubTerm((CLUB,) * n)


def make_club_sequence(d: int, n: int, max_terms: int = MAX_TERMS) -> ClubSequence:
    if d < 2 or n < 1:
        raise ClubError("need d >= 2 and n >= 1")
    if sequence_length(d, n) > max_terms:
        raise ClubError(f"sequence would exceed the {max_terms}-term cap")
    return ClubSequence(d, n, tuple(iter_club_terms(d, n)))


def control_word_for_term(term: ClubTerm, n: int) -> ControlWord:
    """Control word of a term: target at the leftmost club, one control at the
    rightmost strictly positive letter (if any)."""
    controls: dict[int, int] = {}
    positives = [i for i, let in enumerate(term.letters) if isinstance(let, int) and let > 0]
    if positives:
        q = positives[-1]
        controls[q] = term.letters[q]
    return single_target_word(n, term.club_start, controls)


@dataclass(frozen=True)
class ZeroPatternSets:
    j: int
    r1: frozenset
    r2: frozenset
    r3: frozenset

    @property
    def union(self) -> frozenset:
        return self.r1 | self.r2 | self.r3


def _fiber(prefix: tuple[int, ...], k: int, d: int, n: int) -> tuple[int, ...]:
    return prefix + (k,) + (0,) * (n - len(prefix) - 1)


def zero_pattern_sets(seq: ClubSequence, j: int) -> ZeroPatternSets:
    """R1/R2/R3 for step j (1-based), as sets of dit tuples."""
    if not 1 <= j <= len(seq):
        raise ClubError("step index out of range")
    d, n = seq.d, seq.n
    term = seq.terms[j - 1]
    ell = term.club_start  # 0-based; the math's l is ell + 1
    c = term.prefix
    r1 = set()
    for q in range(ell):  # all proper prefixes of the numeric head
        for k in range(c[q]):
            r1.add(_fiber(c[:q], k, d, n))
    r2 = {_fiber(c, k, d, n) for k in range(d)}
    r3 = set()
    if ell > 0:
        for head in product(range(d), repeat=ell):
            if head <= c:
                continue
            for tail in product(range(d), repeat=n - ell):
                r3.add(head + tail)
    return ZeroPatternSets(j, frozenset(r1), frozenset(r2), frozenset(r3))


def zeroed_set(seq: ClubSequence, j: int) -> frozenset:
    """The d-1 indices step j is guaranteed to zero."""
    term = seq.terms[j - 1]
    return frozenset(_fiber(term.prefix, k, seq.d, seq.n) for k in range(1, seq.d))


def transition_check(seq: ClubSequence, j: int) -> dict:
    """Verify the step-j to step-j+1 bookkeeping as pure set computation.

    Checks the partition `survivors(j) = survivors(j+1) + zeroed(j)`, the
    per-case set equalities (the case split is on whether the letter before
    the leftmost club is d-1), and that exactly d-1 indices are zeroed.
    """
    if not 1 <= j < len(seq):
        raise ClubError("transition needs 1 <= j < sequence length")
    d, n = seq.d, seq.n
    cur = zero_pattern_sets(seq, j)
    nxt = zero_pattern_sets(seq, j + 1)
    z = zeroed_set(seq, j)
    disjoint = (
        not (cur.r1 & cur.r2) and not (cur.r1 & cur.r3) and not (cur.r2 & cur.r3)
        and not (nxt.union & z)
    )
    partition = cur.union == (nxt.union | z) and disjoint

    term = seq.terms[j - 1]
    ell = term.club_start
    last = term.prefix[-1]
    if last < d - 1:
        case = "increment"
        case_ok = (
            nxt.r1 == (cur.r1 | cur.r2) - z
            and (nxt.r2 | nxt.r3) == cur.r3
        )
    else:
        case = "club-extend"
        survivor = _fiber(term.prefix[:-1], d - 1, d, n)
        case_ok = (
            cur.r1 == (nxt.r1 | nxt.r2) - {survivor}
            and cur.r2 == z | {survivor}
            and cur.r3 == nxt.r3
        )
    ok_size = len(z) == d - 1
    return {
        "j": j,
        "case": case,
        "partition_holds": partition,
        "case_equalities_hold": case_ok,
        "zeroed": len(z),
        "zeroed_expected": d - 1,
        "ok": partition and case_ok and ok_size,
        "ell": ell,
    }


def orbit_closure_check(seq: ClubSequence, j: int) -> bool:
    """Closure of survivors-intersect-match under adding to the target dit.

    The gate at step j only mixes amplitudes along the target-dit orbit of
    indices matching its control word; closure of the possibly-nonzero set
    under that action is what protects previously planted zeros.
    """
    d, n = seq.d, seq.n
    term = seq.terms[j - 1]
    cw = control_word_for_term(term, n)
    ell = cw.target
    matched = {s for s in zero_pattern_sets(seq, j).union if cw.matches(s)}
    for s in matched:
        for c in range(1, d):
            shifted = s[:ell] + ((s[ell] + c) % d,) + s[ell + 1:]
            if shifted not in matched:
                return False
    return True
