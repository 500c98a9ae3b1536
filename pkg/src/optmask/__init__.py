"""Digital model of an optical mask computer for Hamiltonian cycles and binary permanents."""

__version__ = "0.1.0"
