"""Two-dimensional oriented percolation laboratory.

Thin wrapper over the compiled core: exact small-instance oracles, single
trajectories, the experiment drivers, and the invariant self-test.  Option
dictionaries mirror the command-line flags with snake_case keys; unknown keys
raise ``ValueError``.
"""

from ._core import (
    exact_duality,
    exact_intersection_pmf,
    exact_survival,
    run_experiment,
    run_selftest,
    run_trial,
    version,
)

__version__ = version()


def _experiment(name):
    def call(**options):
        return run_experiment(name, options)

    call.__name__ = name
    call.__qualname__ = name
    call.__doc__ = (
        f"Run the '{name}' experiment; keyword options mirror the CLI flags. "
        "Returns {'rows': [...], 'summary': {...}}."
    )
    return call


simulate = _experiment("simulate")
survival = _experiment("survival")
theta = _experiment("theta")
eq2 = _experiment("eq2")
eqstr = _experiment("eqstr")
corollary2 = _experiment("corollary2")
prop3 = _experiment("prop3")
edgespeed = _experiment("edgespeed")
prop4f = _experiment("prop4f")
duality = _experiment("duality")

__all__ = [
    "version",
    "__version__",
    "exact_survival",
    "exact_intersection_pmf",
    "exact_duality",
    "run_trial",
    "run_experiment",
    "run_selftest",
    "simulate",
    "survival",
    "theta",
    "eq2",
    "eqstr",
    "corollary2",
    "prop3",
    "edgespeed",
    "prop4f",
    "duality",
]
