"""Request models and input resolution shared by the HTTP service and the
command-line client.

All user-facing validation lives here: list shapes, tolerance positivity,
matrix determinants and hyperbolicity, cusp coprimality, and discriminant
admissibility.  The CLI converts a ValidationError into a usage-error
exit; the service converts it into a 422 response.  Everything past this
layer works with exact domain objects.
"""
from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, field_validator, \
    model_validator

from ..qforms import (FormClass, GroupElement, class_representatives,
                      form_from_matrix, is_discriminant)


def _check_discriminant(D: int) -> int:
    if not is_discriminant(D):
        raise ValueError(f"{D} is not a positive non-square discriminant")
    return D


def _check_matrix(m: list[int], *, hyperbolic: bool) -> list[int]:
    a, b, c, d = m
    if a * d - b * c != 1:
        raise ValueError(f"matrix {m} has determinant != 1")
    if hyperbolic and abs(a + d) <= 2:
        raise ValueError(f"matrix {m} is not hyperbolic (|trace| <= 2)")
    return m


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PolicyFields(_Strict):
    """Truncation policy and dispatch knobs common to every suite."""

    tol: float = Field(default=1e-4, gt=0)
    height: int = Field(default=64, ge=1)
    max_doublings: int = Field(default=12, ge=1)
    jobs: int = Field(default=1, ge=1)

    def settings(self, command: str) -> dict:
        from ..experiments import default_settings
        s = default_settings(command)
        s.update(tol=self.tol, height=self.height,
                 max_doublings=self.max_doublings, jobs=self.jobs)
        return s


class GammaFields(PolicyFields):
    gamma_disc: int | None = None
    gamma_matrix: list[int] | None = Field(default=None, min_length=4,
                                           max_length=4)

    @field_validator("gamma_disc")
    @classmethod
    def _disc_ok(cls, v):
        return None if v is None else _check_discriminant(v)

    @field_validator("gamma_matrix")
    @classmethod
    def _matrix_ok(cls, v):
        return None if v is None else _check_matrix(v, hyperbolic=True)

    def gamma_class(self) -> FormClass:
        if self.gamma_matrix is not None:
            return FormClass.from_form(
                form_from_matrix(GroupElement(*self.gamma_matrix)))
        if self.gamma_disc is not None:
            prim = [c for c in class_representatives(self.gamma_disc)
                    if c.content == 1]
            return prim[0]
        raise ValueError("provide gamma_disc or gamma_matrix")


class PairVerifyRequest(GammaFields):
    """Instances (k, gamma class, sigma) for the two cycle identities."""

    k: list[int] = Field(min_length=1)
    sigma_matrices: list[list[int]] = []
    sigma_traces: list[int] = []

    @field_validator("k")
    @classmethod
    def _k_ok(cls, v):
        for k in v:
            if k < 2:
                raise ValueError(f"need k >= 2, got {k}")
        return v

    @field_validator("sigma_matrices")
    @classmethod
    def _sigmas_ok(cls, v):
        for m in v:
            if len(m) != 4:
                raise ValueError(f"sigma matrix needs 4 entries, got {m}")
            _check_matrix(m, hyperbolic=True)
        return v

    @field_validator("sigma_traces")
    @classmethod
    def _traces_ok(cls, v):
        for t in v:
            if t < 3:
                raise ValueError(f"need sigma trace >= 3, got {t}")
        return v

    @model_validator(mode="after")
    def _has_inputs(self):
        if not self.sigma_matrices and not self.sigma_traces:
            raise ValueError("provide sigma_matrices or sigma_traces")
        if self.gamma_disc is None and self.gamma_matrix is None:
            raise ValueError("provide gamma_disc or gamma_matrix")
        return self

    def sigmas(self) -> list[GroupElement]:
        from ..experiments import sigma_from_trace
        out = [GroupElement(*m) for m in self.sigma_matrices]
        out.extend(sigma_from_trace(t) for t in self.sigma_traces)
        return out


class CuspVerifyRequest(PolicyFields):
    """Instances (k, class of disc, cusp -d/c) for the central-value
    identity."""

    k: list[int] = Field(min_length=1)
    discs: list[int] = Field(min_length=1)
    dc: list[list[int]] = Field(min_length=1)

    @field_validator("k")
    @classmethod
    def _k_ok(cls, v):
        for k in v:
            if k < 3 or k % 2 == 0:
                raise ValueError(f"identity needs odd k >= 3, got {k}")
        return v

    @field_validator("discs")
    @classmethod
    def _discs_ok(cls, v):
        return [_check_discriminant(D) for D in v]

    @field_validator("dc")
    @classmethod
    def _dc_ok(cls, v):
        for pair in v:
            if len(pair) != 2:
                raise ValueError(f"cusp needs two entries d, c: {pair}")
            d, c = pair
            if c <= 0 or math.gcd(d, c) != 1:
                raise ValueError(
                    f"cusp {d}/{c} malformed: need c > 0 and gcd(d, c) = 1")
        return v


class PeriodsVerifyRequest(PolicyFields):
    """Instances (k, D) for the period-polynomial ratio report."""

    k: list[int] = Field(min_length=1)
    discs: list[int] = Field(min_length=1)
    radius: int = Field(default=600, ge=8)

    @field_validator("k")
    @classmethod
    def _k_ok(cls, v):
        for k in v:
            if k < 2:
                raise ValueError(f"need k >= 2, got {k}")
        return v

    @field_validator("discs")
    @classmethod
    def _discs_ok(cls, v):
        return [_check_discriminant(D) for D in v]

    def settings(self, command: str) -> dict:
        s = super().settings(command)
        s["radius"] = self.radius
        return s


class CoeffsRequest(GammaFields):
    """Fourier coefficient table of one signed series."""

    k: int = Field(ge=2)
    n_max: int = Field(default=10, ge=1)
    y: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _has_gamma(self):
        if self.gamma_disc is None and self.gamma_matrix is None:
            raise ValueError("provide gamma_disc or gamma_matrix")
        return self


class HistogramRequest(_Strict):
    """Crossing-angle demo: fixed class against a discriminant ladder."""

    gamma_disc: int = 5
    discs: list[int] = Field(min_length=1)
    bins: int = Field(default=20, ge=1)

    @field_validator("gamma_disc")
    @classmethod
    def _disc_ok(cls, v):
        return _check_discriminant(v)

    @field_validator("discs")
    @classmethod
    def _discs_ok(cls, v):
        return [_check_discriminant(D) for D in v]

    def gamma_class(self) -> FormClass:
        prim = [c for c in class_representatives(self.gamma_disc)
                if c.content == 1]
        return prim[0]


REQUEST_MODELS = {
    "thm1": PairVerifyRequest,
    "katok": PairVerifyRequest,
    "thm2": CuspVerifyRequest,
    "periods": PeriodsVerifyRequest,
    "coeffs": CoeffsRequest,
    "histogram": HistogramRequest,
}
