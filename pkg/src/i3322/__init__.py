"""Classical, no-signalling and quantum values of a family of I3322-like
Bell functionals."""
__version__ = "0.1.0"
