"""Exception types shared across the package.

Every error raised by the library is a subclass of :class:`FtqecError`,
so callers (notably the CLI) can map failures to exit codes uniformly.
"""

from __future__ import annotations


class FtqecError(Exception):
    """Base class for all library errors."""


class InvalidParameters(FtqecError):
    """Constructor arguments are outside the supported domain."""


class DimensionTooLarge(FtqecError):
    """An exact enumeration was requested beyond the configured budget."""


class NotDualContaining(FtqecError):
    """A quantum-code construction requires a dual-containing classical code."""


class SingularDDT(FtqecError):
    """The logical pairing matrix D·Dᵀ is singular over GF(2).

    For codes built from a dual-containing classical code this cannot
    happen (the pairing is the nondegenerate symplectic form between
    X-type and Z-type logical operators); it is reachable only for
    hand-built coset structures.
    """


class EnumerationInfeasible(FtqecError):
    """A minimum-distance enumeration is infeasible; value downgraded to a bound."""


class UnsupportedOnState(FtqecError):
    """A whole-block Hadamard was applied to a state without coset structure."""


class WeightCongruenceViolated(FtqecError):
    """Coset weights are not constant modulo the requested w."""


class LemmaUnsupported(FtqecError):
    """The code does not satisfy the eligibility conditions a gadget needs."""


class Infeasible(FtqecError):
    """No noise rate in the search bracket satisfies the failure-rate target."""
