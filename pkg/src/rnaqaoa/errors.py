"""Exception types shared across the package.

The CLI maps these onto exit codes: InputError -> 1, ResourceLimitError -> 2,
anything else -> 3.
"""


class InputError(ValueError):
    """Malformed user input: bad sequence symbols, broken FASTA, unbalanced brackets."""


class ResourceLimitError(RuntimeError):
    """A resource guard was hit (e.g. more qubits than the dense simulator allows)."""
