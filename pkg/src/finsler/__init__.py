"""Jet-based numerical Finsler and Lorentz-Finsler geometry."""
