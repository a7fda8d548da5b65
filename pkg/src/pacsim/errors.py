"""Shared exception root for the package."""


class PacsimError(Exception):
    """Base class for every error raised by pacsim."""


class CurrencyMismatch(PacsimError):
    """Operands or accounts denominated in different currencies."""
