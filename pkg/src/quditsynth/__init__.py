"""quditsynth: ancilla-free qudit circuit synthesis and verification."""

__version__ = "0.1.0"
