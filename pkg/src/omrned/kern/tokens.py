"""Parsing and canonical formatting of individual **kern note/rest subtokens.

Humdrum readers accept the signifiers of a note token in any order
(``8a#``, ``a#8`` and ``8#a`` are the same note). The parser here collects
signifiers into groups; :meth:`NoteToken.canonical` re-emits them in one
fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

EKERN_SYMBOL_SEP = "@"
EKERN_PIECE_SEP = "·"  # middle dot

ARTICULATION_MARKS = {
    "'": "staccato",
    "`": "staccatissimo",
    "~": "tenuto",
    "^": "accent",
    "^^": "marcato",
    "o": "harmonic",
    "u": "down-bow",
    "v": "up-bow",
}
ORNAMENT_MARKS = {
    "t": "trill",
    "T": "trill",
    "m": "mordent",
    "M": "mordent",
    "w": "inverted-mordent",
    "W": "inverted-mordent",
    "S": "turn",
    "$": "inverted-turn",
    "O": "ornament",
    ";": "fermata",
}
BEAM_MARKS = "LJKk"
TIE_MARKS = "[_]"
# recognised signifiers that carry no counted symbol (stems, phrases, editorial marks)
IGNORED_MARKS = set("/\\{}xX?PpzNZ")

# problem callback: (char position within token, rule id, message)
Reporter = Callable[[int, str, str], None]


class TokenProblem(Exception):
    """Raised by the default reporter; carries the position inside the token."""

    def __init__(self, position: int, rule: str, message: str):
        super().__init__(message)
        self.position = position
        self.rule = rule
        self.message = message


def _raise(position: int, rule: str, message: str) -> None:
    raise TokenProblem(position, rule, message)


@dataclass
class NoteToken:
    duration: str = ""
    dots: int = 0
    pitch: str = ""
    accidental: str = ""
    acc_flags: str = ""
    ties: str = ""
    slurs: list[str] = field(default_factory=list)
    beams: str = ""
    articulations: list[str] = field(default_factory=list)
    ornaments: list[str] = field(default_factory=list)
    arpeggio: str = ""
    grace: str = ""
    other: list[str] = field(default_factory=list)

    # -- classification ----------------------------------------------------
    @property
    def is_rest(self) -> bool:
        return self.pitch.startswith("r")

    @property
    def is_grace(self) -> bool:
        return bool(self.grace)

    @property
    def invisible(self) -> bool:
        return "yy" in self.other

    @property
    def step(self) -> str:
        return self.pitch[0].upper()

    @property
    def octave(self) -> int:
        if self.pitch[0].islower():
            return 3 + len(self.pitch)
        return 4 - len(self.pitch)

    @property
    def alter(self) -> int:
        if not self.accidental or self.accidental == "n":
            return 0
        sign = 1 if self.accidental[0] == "#" else -1
        return sign * len(self.accidental)

    @property
    def recip(self) -> Optional[int]:
        return int(self.duration) if self.duration else None

    def quarter_length(self) -> Fraction:
        """Sounding duration in quarter notes; zero for grace notes."""
        if self.is_grace or not self.duration:
            return Fraction(0)
        base = Fraction(4, int(self.duration))
        return base * (2 - Fraction(1, 2 ** self.dots))

    # -- emission ------------------------------------------------------------
    def groups(self) -> list[list[str]]:
        """Symbol groups in canonical order; each inner list is one ekern symbol."""
        out: list[list[str]] = []
        if self.duration or self.dots:
            out.append(([self.duration] if self.duration else []) + ["."] * self.dots)
        if self.pitch:
            head = [self.pitch]
            if self.accidental:
                head.append(self.accidental)
            head.extend(self.acc_flags)
            out.append(head)
        elif self.accidental:
            out.append([self.accidental, *self.acc_flags])
        out.extend([c] for c in self.ties)
        out.extend([s] for s in self.slurs)
        out.extend([c] for c in self.beams)
        out.extend([a] for a in sorted(self.articulations))
        out.extend([o] for o in sorted(self.ornaments))
        if self.arpeggio:
            out.append([self.arpeggio])
        if self.grace:
            out.append([self.grace])
        out.extend([o] for o in self.other)
        return out

    def canonical(self) -> str:
        return "".join("".join(g) for g in self.groups())

    def ekern(self) -> str:
        return EKERN_SYMBOL_SEP.join(EKERN_PIECE_SEP.join(g) for g in self.groups())

    def filtered(self, keep_durations=True, keep_pitches=True, keep_accidentals=True,
                 keep_articulations=True, keep_ornaments=True) -> "NoteToken":
        t = NoteToken(**{k: (list(v) if isinstance(v, list) else v) for k, v in self.__dict__.items()})
        if not keep_durations:
            t.duration, t.dots = "", 0
        if not keep_pitches and not self.is_rest:
            t.pitch = ""
        if not keep_accidentals:
            t.accidental, t.acc_flags = "", ""
        if not keep_articulations:
            t.articulations = []
        if not keep_ornaments:
            t.ornaments = []
        return t


def _run(s: str, i: int, ch: str) -> int:
    j = i
    while j < len(s) and s[j] == ch:
        j += 1
    return j


def parse_note_token(s: str, report: Reporter = _raise) -> NoteToken:
    """Parse one space-free kern subtoken.

    Problems are passed to ``report``; if it returns instead of raising, the
    offending characters are dropped and parsing continues.
    """
    tok = NoteToken()
    i = 0
    n = len(s)
    duration_done = False
    while i < n:
        c = s[i]
        if c.isdigit():
            j = i
            while j < n and s[j].isdigit():
                j += 1
            if duration_done:
                report(i, "bad-character", f"second duration {s[i:j]!r} in {s!r}")
            else:
                tok.duration = s[i:j]
                duration_done = True
            i = j
        elif c == ".":
            tok.dots += 1
            i += 1
        elif c == "%":
            j = i + 1
            while j < n and s[j].isdigit():
                j += 1
            report(i, "unsupported-duration", f"rational duration in {s!r}")
            i = j
        elif c in "abcdefgABCDEFG" or c == "r":
            j = _run(s, i, c)
            if tok.pitch:
                report(i, "bad-character", f"second pitch {s[i:j]!r} in {s!r}")
            elif c == "r" and j - i > 2:
                report(i, "bad-character", f"bad rest marker {s[i:j]!r}")
            else:
                tok.pitch = s[i:j]
            i = j
        elif c in "#-n":
            j = _run(s, i, c)
            if c == "n" and j - i > 1 or c != "n" and j - i > 2:
                report(i, "bad-character", f"bad accidental {s[i:j]!r}")
                i = j
                continue
            if tok.accidental:
                report(i, "bad-character", f"second accidental {s[i:j]!r} in {s!r}")
                i = j
                continue
            tok.accidental = s[i:j]
            i = j
            # display qualifiers bind to the accidental they follow
            while i < n and s[i] in "Xx":
                tok.acc_flags += s[i]
                i += 1
            if i < n and s[i] == "y" and not (i + 1 < n and s[i + 1] == "y"):
                tok.acc_flags += "y"
                i += 1
        elif c in TIE_MARKS:
            tok.ties += c
            i += 1
        elif c in "()":
            tok.slurs.append(c)
            i += 1
        elif c == "&" and i + 1 < n and s[i + 1] in "(){}":
            if s[i + 1] in "()":
                tok.slurs.append(s[i:i + 2])
            else:
                tok.other.append(s[i:i + 2])
            i += 2
        elif c in BEAM_MARKS:
            tok.beams += c
            i += 1
        elif c == "^":
            if i + 1 < n and s[i + 1] == "^":
                tok.articulations.append("^^")
                i += 2
            else:
                tok.articulations.append("^")
                i += 1
        elif c in ARTICULATION_MARKS:
            tok.articulations.append(c)
            i += 1
        elif c in ORNAMENT_MARKS:
            tok.ornaments.append(c)
            i += 1
        elif c == ":":
            j = _run(s, i, ":")
            if tok.arpeggio or j - i > 2:
                report(i, "bad-character", f"bad arpeggio marker in {s!r}")
            else:
                tok.arpeggio = s[i:j]
            i = j
        elif c in "qQ":
            j = _run(s, i, c)
            unit = s[i:j]
            if tok.grace or unit not in ("q", "qq", "Q"):
                report(i, "bad-character", f"bad grace marker {unit!r} in {s!r}")
            else:
                tok.grace = unit
            i = j
        elif c == "y":
            if i + 1 < n and s[i + 1] == "y":
                tok.other.append("yy")
                i += 2
            else:
                tok.other.append("y")
                i += 1
        elif c in IGNORED_MARKS:
            tok.other.append(c)
            i += 1
        else:
            report(i, "bad-character", f"unrecognized character {c!r} in {s!r}")
            i += 1
    return tok


def validate_duration(tok: NoteToken) -> Optional[str]:
    """Return a reason string if the token's duration is outside the supported subset."""
    if not tok.duration:
        return None
    value = int(tok.duration)
    if value == 0:
        return f"breve/long duration {tok.duration!r} is not supported"
    if value > 256:
        return f"duration {tok.duration!r} is shorter than a 256th"
    return None


def visual_value(recip: int) -> int:
    """Largest power of two not above the kern reciprocal (tuplets keep the plain glyph)."""
    v = 1
    while v * 2 <= recip:
        v *= 2
    return v
