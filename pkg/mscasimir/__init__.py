"""Casimir radial parts for so(p+1,q+1) symmetric pairs."""
