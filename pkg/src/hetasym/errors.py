"""Exception types shared by all hetasym modules.

Two failure families are distinguished so the CLI can map them onto
distinct exit codes: bad input/configuration (exit 2) versus numerical
failures such as unphysical parameters or non-convergence (exit 3).
"""


class ValidationError(ValueError):
    """Invalid input data, parameters, or configuration."""


class NumericalDomainError(ArithmeticError):
    """A computation left its numerical domain (unphysical parameters,
    discriminant violations beyond tolerance, impossible inversions)."""
