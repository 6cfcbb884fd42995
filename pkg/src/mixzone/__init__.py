"""Numerical simulator and verifier for mixing-zone subsolutions of the
incompressible porous media system with partially unstable interface data."""

__version__ = "0.1.0"
