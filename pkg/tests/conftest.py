"""Shared test helpers."""

import numpy as np


def window_samples(sys, n, seed=0):
    """Uniform random states in the system's default analysis window."""
    rng = np.random.default_rng(seed)
    lo, hi = sys.window
    return rng.uniform(lo, hi, size=(n, 2))


def catalog_instances():
    """One representative instance per catalog family (fresh objects)."""
    from hyperlaw.systems import make_system

    return [
        make_system("p_system", {"family": "exp", "a": 1.0, "b": 1.0}),
        make_system("p_system", {"family": "power", "a": 1.0, "b": 3.0}),
        make_system("p_system", {"family": "shifted_power", "a": 0.5,
                                 "b": 0.75, "v0": 1.0}),
        make_system("gradient_flux", {"form": "exp", "a": 1.0, "alpha": 1.0,
                                      "b": 1.0, "beta": 1.0, "c": 0.4,
                                      "gamma": 0.7}),
        make_system("gradient_flux", {"form": "quadratic", "A": 2.0,
                                      "B": 0.5, "C": 1.0}),
        make_system("isentropic_euler", {"kappa1": 1.0, "gamma1": 2.0,
                                         "kappa2": 0.3, "gamma2": 1.0}),
        make_system("gamma_law", {"kappa": 1.0, "gamma": 2.0}),
        make_system("gamma_law", {"kappa": 1.0, "gamma": 3.0}),
        make_system("shallow_water", {}),
        make_system("two_burgers", {}),
    ]
