"""CFI instances, width-bounded XOR resolution and explicit Lasserre vector solutions."""

__version__ = "0.1.0"
