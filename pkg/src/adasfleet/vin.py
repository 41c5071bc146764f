"""17-character VIN parsing: structure, check digit, and model year.

The check digit (position 9) is a weighted mod-11 sum over transliterated
characters; the model year (position 10) cycles through a 30-code alphabet
every 30 years and is disambiguated by whether position 7 is alphabetic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CheckDigitMismatch, ForbiddenCharacter, IllegalYearCode, WrongLength

VIN_LENGTH = 17

# I, O and Q are never legal anywhere in a VIN.
LEGAL_CHARS = frozenset("0123456789ABCDEFGHJKLMNPRSTUVWXYZ")

# Character values for the check-digit sum. Digits map to themselves;
# letters restart at 1 after each excluded letter, except P=7 and R=9.
_TRANSLITERATION = {c: int(c) for c in "0123456789"}
_TRANSLITERATION.update(zip("ABCDEFGH", range(1, 9)))
_TRANSLITERATION.update(zip("JKLMN", range(1, 6)))
_TRANSLITERATION.update({"P": 7, "R": 9})
_TRANSLITERATION.update(zip("STUVWXYZ", range(2, 10)))

# Positional weights; position 9 (the check digit itself) has weight 0.
_WEIGHTS = (8, 7, 6, 5, 4, 3, 2, 10, 0, 9, 8, 7, 6, 5, 4, 3, 2)

# Position-10 code alphabet, in year order. U, Z and 0 are excluded,
# leaving a 30-code cycle: A=1980 or 2010 ... 9=2009 or 2039.
YEAR_CODES = "ABCDEFGHJKLMNPRSTVWXY123456789"
_FIRST_CYCLE_BASE = 1980
_CYCLE = len(YEAR_CODES)

MIN_MODEL_YEAR = _FIRST_CYCLE_BASE
MAX_MODEL_YEAR = _FIRST_CYCLE_BASE + 2 * _CYCLE - 1


@dataclass(frozen=True)
class Vin:
    """A structurally valid VIN, sliced into its positional fields."""

    raw: str
    wmi: str          # positions 1-3, world manufacturer identifier
    vds: str          # positions 4-8, vehicle descriptor
    check_digit: str  # position 9
    year_code: str    # position 10
    plant_code: str   # position 11
    serial: str       # positions 12-17

    @property
    def model_year(self) -> int:
        """Decode the model year; raises IllegalYearCode for U/Z/0 codes."""
        return decode_model_year(self.year_code, self.raw[6])


def _validate_chars(text: str) -> None:
    if len(text) != VIN_LENGTH:
        raise WrongLength(text)
    for i, c in enumerate(text, start=1):
        if c not in LEGAL_CHARS:
            raise ForbiddenCharacter(c, i)


def compute_check_digit(text: str) -> str:
    """Check digit implied by the 16 non-check characters of a 17-char VIN.

    Position 9 carries weight 0, so its input value never affects the result.
    """
    text = text.strip().upper()
    _validate_chars(text)
    total = sum(_TRANSLITERATION[c] * w for c, w in zip(text, _WEIGHTS))
    remainder = total % 11
    return "X" if remainder == 10 else str(remainder)


def parse_vin(text: str, strict: bool = True) -> Vin:
    """Parse and validate a VIN, normalizing to uppercase.

    Structural problems (length, character set) always raise. A check-digit
    mismatch raises only when strict; lenient callers that also want the
    warning text should use parse_vin_lenient.
    """
    text = text.strip().upper()
    _validate_chars(text)
    expected = compute_check_digit(text)
    if strict and text[8] != expected:
        raise CheckDigitMismatch(expected, text[8], text)
    return Vin(
        raw=text,
        wmi=text[0:3],
        vds=text[3:8],
        check_digit=text[8],
        year_code=text[9],
        plant_code=text[10],
        serial=text[11:17],
    )


def parse_vin_lenient(text: str) -> tuple[Vin | None, str | None]:
    """Parse with check-digit failures downgraded to a warning.

    Returns (vin, warning). Structural failures give (None, message);
    a check-digit mismatch gives (vin, message); clean parses give (vin, None).
    """
    try:
        return parse_vin(text, strict=True), None
    except CheckDigitMismatch as exc:
        return parse_vin(text, strict=False), str(exc)
    except (WrongLength, ForbiddenCharacter) as exc:
        return None, str(exc)


def decode_model_year(year_code: str, position7: str) -> int:
    """Model year for a position-10 code.

    An alphabetic position 7 selects the 2010-2039 cycle, otherwise 1980-2009.
    """
    index = YEAR_CODES.find(year_code)
    if index < 0:
        raise IllegalYearCode(year_code)
    base = _FIRST_CYCLE_BASE + (_CYCLE if position7.isalpha() else 0)
    return base + index


def encode_model_year(year: int) -> str:
    """Position-10 code for a model year in [1980, 2039]."""
    if not MIN_MODEL_YEAR <= year <= MAX_MODEL_YEAR:
        raise IllegalYearCode(str(year))
    return YEAR_CODES[(year - _FIRST_CYCLE_BASE) % _CYCLE]
