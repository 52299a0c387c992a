"""Builtin vorticity profiles sampled at cell centers."""
from __future__ import annotations

import numpy as np

from .grid import Domain, Field

CENTER = (0.0, 0.75)
RADIUS = 0.5


def patch(domain: Domain, center=CENTER, radius: float = RADIUS, value: float = 1.0) -> Field:
    """Uniform ``value`` on the disc of ``radius`` about ``center``."""
    X1, X2 = domain.mesh()
    r2 = (X1 - center[0]) ** 2 + (X2 - center[1]) ** 2
    return Field(domain, np.where(r2 < radius**2, value, 0.0))


def annulus(domain: Domain, center=CENTER, inner: float = 0.25, outer: float = RADIUS,
            value: float = 1.0) -> Field:
    X1, X2 = domain.mesh()
    r2 = (X1 - center[0]) ** 2 + (X2 - center[1]) ** 2
    return Field(domain, np.where((r2 >= inner**2) & (r2 < outer**2), value, 0.0))


def bump(domain: Domain, center=CENTER, radius: float = RADIUS, amplitude: float = 1.0) -> Field:
    """Compactly supported ``C^2`` bump ``amplitude * (1 - r^2/radius^2)_+^3``."""
    X1, X2 = domain.mesh()
    r2 = (X1 - center[0]) ** 2 + (X2 - center[1]) ** 2
    return Field(domain, amplitude * np.clip(1.0 - r2 / radius**2, 0.0, None) ** 3)


BUILTINS = {"patch": patch, "annulus": annulus, "bump": bump}


def builtin(name: str, domain: Domain) -> Field:
    try:
        return BUILTINS[name](domain)
    except KeyError:
        raise ValueError(f"unknown builtin profile {name!r}; choose from {sorted(BUILTINS)}") from None
