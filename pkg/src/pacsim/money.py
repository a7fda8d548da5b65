"""Exact-decimal money values with per-currency minor units.

All monetary arithmetic in the simulator goes through ``Decimal``; binary
floats are never accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

from .errors import CurrencyMismatch, PacsimError

# ISO 4217 minor units for currencies that deviate from the 2-decimal default.
_MINOR_UNITS = {
    "BHD": 3, "IQD": 3, "JOD": 3, "KWD": 3, "LYD": 3, "OMR": 3, "TND": 3,
    "BIF": 0, "CLP": 0, "DJF": 0, "GNF": 0, "ISK": 0, "JPY": 0, "KMF": 0,
    "KRW": 0, "PYG": 0, "RWF": 0, "UGX": 0, "VND": 0, "VUV": 0, "XAF": 0,
    "XOF": 0, "XPF": 0,
}


class InvalidAmount(PacsimError):
    """Amount text or value violates the currency's scale or sign rules."""


def minor_units(currency: str) -> int:
    """Decimal places allowed for a currency (ISO 4217 minor units)."""
    return _MINOR_UNITS.get(currency, 2)


def is_currency_code(code: str) -> bool:
    return len(code) == 3 and code.isalpha() and code.isupper()


def scale_of(value: Decimal) -> int:
    """Number of fractional digits in a decimal (0 for integral values)."""
    exponent = value.as_tuple().exponent
    if not isinstance(exponent, int):  # NaN / infinity
        raise InvalidAmount(f"non-finite amount: {value}")
    return max(0, -exponent)


def quantum(currency: str) -> Decimal:
    """The smallest representable unit of a currency, e.g. 0.01 for USD."""
    return Decimal(1).scaleb(-minor_units(currency))


def parse_decimal(text: str) -> Decimal:
    try:
        value = Decimal(text)
    except InvalidOperation as exc:
        raise InvalidAmount(f"not a decimal number: {text!r}") from exc
    if not value.is_finite():
        raise InvalidAmount(f"non-finite amount: {text!r}")
    return value


def format_decimal(value: Decimal, scale: int) -> str:
    """Fixed-point text with exactly ``scale`` fractional digits."""
    return str(value.quantize(Decimal(1).scaleb(-scale)))


@dataclass(frozen=True)
class MoneyAmount:
    """A non-negative amount of one currency, exact to its minor units."""

    currency: str
    value: Decimal

    def __post_init__(self) -> None:
        if not is_currency_code(self.currency):
            raise InvalidAmount(f"bad ISO 4217 currency code: {self.currency!r}")
        if not isinstance(self.value, Decimal):
            raise InvalidAmount(f"amount must be Decimal, got {type(self.value).__name__}")
        if not self.value.is_finite():
            raise InvalidAmount(f"non-finite amount: {self.value}")
        if self.value < 0:
            raise InvalidAmount(f"negative amount: {self.value}")
        units = minor_units(self.currency)
        if scale_of(self.value) > units:
            raise InvalidAmount(
                f"{self.value} has more than {units} fractional digits for {self.currency}"
            )
        # Normalize so 100 and 100.00 share one representation.
        object.__setattr__(self, "value", self.value.quantize(quantum(self.currency)))

    def text(self) -> str:
        """Canonical amount text, e.g. '250.00' for USD, '250' for JPY."""
        return format_decimal(self.value, minor_units(self.currency))

    def _check_currency(self, other: "MoneyAmount") -> None:
        if self.currency != other.currency:
            raise CurrencyMismatch(f"{self.currency} vs {other.currency}")

    def __add__(self, other: "MoneyAmount") -> "MoneyAmount":
        self._check_currency(other)
        return MoneyAmount(self.currency, self.value + other.value)

    def __sub__(self, other: "MoneyAmount") -> "MoneyAmount":
        self._check_currency(other)
        return MoneyAmount(self.currency, self.value - other.value)

    def __str__(self) -> str:
        return f"{self.text()} {self.currency}"
