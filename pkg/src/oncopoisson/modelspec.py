"""Compact ``kind:key=value,...`` strings for rate and success models.

Used by the command line and echoed into result-file headers, e.g.::

    constant:mu=0.02
    powerlaw:mu0=6e-06,gamma=3
    piecewise:breakpoints=10;25,rates=0.5;2;1
    tabulated:path=rates.csv
    constant:sigma=0.01
    moran:r=2,n=10
    branching:p=0.75
"""

from __future__ import annotations

from .errors import DomainError
from .rates import (
    BranchingSuccess,
    ConstantRate,
    ConstantSuccess,
    MoranSuccess,
    PiecewiseConstantRate,
    PowerLawRate,
    RateModel,
    SuccessModel,
    TabulatedRate,
    load_rate_table,
)

__all__ = ["parse_rate_model", "parse_success_model", "render_model"]


def _split_spec(text: str, what: str) -> tuple[str, dict[str, str]]:
    text = text.strip()
    if ":" not in text:
        raise DomainError(f"malformed {what} spec {text!r}: missing ':'")
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    params: dict[str, str] = {}
    if body.strip():
        for token in body.split(","):
            if "=" not in token:
                raise DomainError(f"malformed {what} spec token {token.strip()!r}")
            key, _, value = token.partition("=")
            params[key.strip()] = value.strip()
    return kind, params


def _take_float(params: dict[str, str], key: str, spec: str) -> float:
    if key not in params:
        raise DomainError(f"spec {spec!r} is missing '{key}='")
    raw = params.pop(key)
    try:
        return float(raw)
    except ValueError:
        raise DomainError(f"spec token {key}={raw!r} is not a number") from None


def _take_float_list(params: dict[str, str], key: str, spec: str) -> list[float]:
    if key not in params:
        raise DomainError(f"spec {spec!r} is missing '{key}='")
    raw = params.pop(key)
    try:
        return [float(tok) for tok in raw.split(";") if tok.strip() != ""]
    except ValueError:
        raise DomainError(f"spec token {key}={raw!r} is not a ';'-separated number list") from None


def _reject_leftovers(params: dict[str, str], spec: str) -> None:
    if params:
        key = sorted(params)[0]
        raise DomainError(f"unknown token {key}={params[key]!r} in spec {spec!r}")


def parse_rate_model(text: str) -> RateModel:
    kind, params = _split_spec(text, "rate-model")
    if kind == "constant":
        mu = _take_float(params, "mu", text)
        _reject_leftovers(params, text)
        return ConstantRate(mu)
    if kind == "powerlaw":
        mu0 = _take_float(params, "mu0", text)
        gamma = _take_float(params, "gamma", text)
        _reject_leftovers(params, text)
        return PowerLawRate(scale=mu0, exponent=gamma)
    if kind == "piecewise":
        breaks = _take_float_list(params, "breakpoints", text)
        rates = _take_float_list(params, "rates", text)
        _reject_leftovers(params, text)
        return PiecewiseConstantRate(breaks, rates)
    if kind == "tabulated":
        if "path" not in params:
            raise DomainError(f"spec {text!r} is missing 'path='")
        path = params.pop("path")
        _reject_leftovers(params, text)
        return load_rate_table(path)
    raise DomainError(f"unknown rate-model kind {kind!r} in spec {text!r}")


def parse_success_model(text: str) -> SuccessModel:
    kind, params = _split_spec(text, "sigma-model")
    if kind == "constant":
        sigma = _take_float(params, "sigma", text)
        _reject_leftovers(params, text)
        return ConstantSuccess(sigma)
    if kind == "moran":
        r = _take_float(params, "r", text)
        n = _take_float(params, "n", text)
        if n != int(n):
            raise DomainError(f"moran cell count must be an integer, got {n}")
        _reject_leftovers(params, text)
        return MoranSuccess(fitness=r, cells=int(n))
    if kind == "branching":
        p = _take_float(params, "p", text)
        _reject_leftovers(params, text)
        return BranchingSuccess(p)
    raise DomainError(f"unknown sigma-model kind {kind!r} in spec {text!r}")


def render_model(model: RateModel | SuccessModel) -> str:
    """Inverse of the parsers where possible (arrays render as summaries)."""
    if isinstance(model, ConstantRate):
        return f"constant:mu={model.rate!r}"
    if isinstance(model, PowerLawRate):
        return f"powerlaw:mu0={model.scale!r},gamma={model.exponent!r}"
    if isinstance(model, PiecewiseConstantRate):
        breaks = ";".join(repr(float(b)) for b in model.breakpoints)
        rates = ";".join(repr(float(r)) for r in model.rates)
        return f"piecewise:breakpoints={breaks},rates={rates}"
    if isinstance(model, TabulatedRate):
        return f"tabulated:points={len(model.ages)}"
    if isinstance(model, ConstantSuccess):
        return f"constant:sigma={model.sigma!r}"
    if isinstance(model, MoranSuccess):
        return f"moran:r={model.fitness!r},n={model.cells}"
    if isinstance(model, BranchingSuccess):
        return f"branching:p={model.division_prob!r}"
    raise DomainError(f"cannot render model of type {type(model).__name__}")
