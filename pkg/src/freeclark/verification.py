"""
Named verification suites over free and commutative instances.

Each check returns (max_error, tolerance, safe_degree); run_suite times the
checks, applies an optional global tolerance override and assembles a Report.
"""

from __future__ import annotations

import time
from collections.abc import Callable
from functools import cached_property

import numpy as np
from loguru import logger

from freeclark import __version__
from freeclark.clark import ClarkReport, clark_family, verify_clark
from freeclark.commutative import (
    build_herglotz_space,
    build_Vb,
    cauchy_factorization_error,
    check_free_lift,
    comm_cayley,
    comm_dbr_gram,
    comm_moments,
    comm_schur_from_moments,
    dilation_error,
    fiber_gram_error,
    lift_from_extension,
    random_extension,
    verify_comm_clark,
)
from freeclark.config import Settings, load_settings
from freeclark.errors import FreeClarkError
from freeclark.freecore import Side, TruncatedFock
from freeclark.generators import random_nilpotent_point, random_unitary
from freeclark.gns import build_gns, row_isometry_defect, stinespring_check
from freeclark.herglotz_ac import (
    cayley_to_herglotz,
    cayley_to_schur,
    herglotz_from_moments,
    imaginary_constant,
    moments_from_herglotz,
)
from freeclark.kernels import (
    dbr_kernel,
    herglotz_kernel_from_H,
    herglotz_kernel_from_moments,
    psd_check,
)
from freeclark.realization import (
    Colligation,
    comm_colligation_from_D,
    comm_transfer_coeffs,
    free_colligation,
    nilpotent_exactness_error,
    observability_rank,
    route_agreement_error,
    transfer_coeffs,
)
from freeclark.schemas import CheckResult, CheckStatus, InstanceModel, Report, SeriesMode, Suite
from freeclark.series import CommSeries, FreeSeries, mult_matrix, transpose_series

CheckFn = Callable[["SuiteContext"], tuple[float, float, int | None]]

NILPOTENT_POINTS = 20


class SuiteContext:
    """Lazily built objects shared by the checks of one run."""

    def __init__(self, instance: InstanceModel, settings: Settings, N: int | None = None) -> None:
        self.instance = instance
        self.settings = settings
        self.seed = instance.metadata.seed or 0
        self.N = N
        self._clark: dict[Side, ClarkReport] = {}

    @cached_property
    def free(self) -> FreeSeries:
        assert self.instance.free is not None
        B = self.instance.free.to_series()
        return B.with_truncation(self.N) if self.N is not None else B

    @cached_property
    def right(self) -> FreeSeries:
        return transpose_series(self.free)

    @cached_property
    def comm(self) -> CommSeries:
        assert self.instance.comm is not None
        b = self.instance.comm.to_series()
        if self.N is not None:
            b = CommSeries(b.d, b.m, self.N, b.coeffs)
        return b

    @cached_property
    def phi(self):  # type: ignore[no-untyped-def]
        H = cayley_to_herglotz(self.free, Side.LEFT, self.settings.nonunital_margin)
        return moments_from_herglotz(H, Side.LEFT, self.settings.psd_tol)

    @cached_property
    def herglotz_space(self):  # type: ignore[no-untyped-def]
        b = self.comm
        return build_herglotz_space(
            comm_moments(b, self.settings.nonunital_margin),
            b,
            self.settings.rank_tol,
            self.settings.psd_tol,
        )

    @cached_property
    def tight(self):  # type: ignore[no-untyped-def]
        return build_Vb(self.herglotz_space, self.settings.rank_tol)

    @cached_property
    def random(self):  # type: ignore[no-untyped-def]
        return random_extension(self.tight, self.seed, self.settings.default_rho)

    @cached_property
    def gns(self):  # type: ignore[no-untyped-def]
        return build_gns(self.phi, self.settings.rank_tol, self.settings.psd_tol)

    @cached_property
    def colligation(self) -> Colligation:
        return free_colligation(self.right, Side.RIGHT)

    def clark(self, side: Side) -> ClarkReport:
        if side not in self._clark:
            B = self.right if side == Side.RIGHT else self.free
            self._clark[side] = verify_clark(B, side, self.phi if side == Side.LEFT else None)
        return self._clark[side]


def _psd_error(G: np.ndarray, tol: float) -> float:
    report = psd_check(G, tol)
    return max(-report.min_eig, 0.0) / max(1.0, report.norm)


# ============================================================================
# Free checks
# ============================================================================


def _herglotz_round_trip(ctx: SuiteContext) -> tuple[float, float, int | None]:
    B = ctx.free
    H = cayley_to_herglotz(B, Side.LEFT, ctx.settings.nonunital_margin)
    recovered = herglotz_from_moments(ctx.phi, Side.LEFT, imaginary_constant(H))
    back = cayley_to_schur(recovered, Side.LEFT, ctx.settings.cond_guard)
    err = max(recovered.max_difference(H), back.max_difference(B))
    return err, 1e-10, B.N


def _herglotz_kernel_cross(ctx: SuiteContext) -> tuple[float, float, int | None]:
    H = cayley_to_herglotz(ctx.free, Side.LEFT, ctx.settings.nonunital_margin)
    a = herglotz_kernel_from_H(H, Side.LEFT).matrix
    b = herglotz_kernel_from_moments(ctx.phi, Side.LEFT).matrix
    return float(np.max(np.abs(a - b))), 1e-12, ctx.free.N


def _herglotz_gram_psd(ctx: SuiteContext) -> tuple[float, float, int | None]:
    G = herglotz_kernel_from_moments(ctx.phi, Side.RIGHT).matrix
    return _psd_error(G, ctx.settings.psd_tol), ctx.settings.psd_tol, ctx.free.N


def _dbr_gram_psd(ctx: SuiteContext) -> tuple[float, float, int | None]:
    G = dbr_kernel(ctx.right, Side.RIGHT).matrix
    return _psd_error(G, ctx.settings.psd_tol), ctx.settings.psd_tol, ctx.free.N


def _dbr_gram_identity(ctx: SuiteContext) -> tuple[float, float, int | None]:
    B = ctx.right
    fock = TruncatedFock(B.d, B.m, B.N)
    M = mult_matrix(B, Side.RIGHT, fock)
    expected = np.eye(fock.dim) - M @ M.conj().T
    return float(np.max(np.abs(dbr_kernel(B, Side.RIGHT).matrix - expected))), 1e-12, B.N


def _gns_stinespring(ctx: SuiteContext) -> tuple[float, float, int | None]:
    return stinespring_check(ctx.gns), 1e-8, ctx.free.N - 1


def _gns_row_isometry(ctx: SuiteContext) -> tuple[float, float, int | None]:
    defect = row_isometry_defect(ctx.gns).isometry_defect
    return defect, 1e-8, ctx.free.N - 1


def _clark_checks(side: Side) -> dict[str, CheckFn]:
    def lhs_rhs(ctx: SuiteContext) -> tuple[float, float, int | None]:
        r = ctx.clark(side)
        return r.lhs_rhs_error, 1e-7, r.safe_degree

    def kernel_identity(ctx: SuiteContext) -> tuple[float, float, int | None]:
        r = ctx.clark(side)
        return max(r.kernel_identity_error, r.kernel_action_error), 1e-7, r.safe_degree

    def gleason(ctx: SuiteContext) -> tuple[float, float, int | None]:
        r = ctx.clark(side)
        return max(r.gleason_error, r.gleason_excess), 1e-7, r.safe_degree

    def weighted(ctx: SuiteContext) -> tuple[float, float, int | None]:
        r = ctx.clark(side)
        return max(r.weighted_isometry_defect, r.transposition_error), 1e-8, r.safe_degree

    def cauchy(ctx: SuiteContext) -> tuple[float, float, int | None]:
        r = ctx.clark(side)
        return r.cauchy_isometry_defect, 1e-8, r.safe_degree

    def coisometry(ctx: SuiteContext) -> tuple[float, float, int | None]:
        r = ctx.clark(side)
        return r.coisometry_defect, 1e-8, r.safe_degree

    return {
        f"clark.{side}.intertwining": lhs_rhs,
        f"clark.{side}.kernel_identities": kernel_identity,
        f"clark.{side}.gleason": gleason,
        f"clark.{side}.weighted_unitary": weighted,
        f"clark.{side}.cauchy_isometry": cauchy,
        f"clark.{side}.coisometry": coisometry,
    }


def _clark_family_invariance(ctx: SuiteContext) -> tuple[float, float, int | None]:
    U = random_unitary(ctx.free.m, ctx.seed)
    return clark_family(ctx.right, U, Side.RIGHT).dbr_difference, 1e-12, ctx.free.N


def _lift_checks(ctx: SuiteContext) -> dict[str, tuple[float, float, int | None]]:
    if ctx.instance.lift_of is None:
        return {}
    b = ctx.instance.lift_of.to_series()
    check = check_free_lift(ctx.free, b, Side.LEFT)
    return {
        "lift.symmetrization": (check.symmetrization_error, check.tolerance, b.N),
        "lift.moment_restriction": (check.moment_error, check.tolerance, b.N),
    }


def _realize_coeffs(ctx: SuiteContext) -> tuple[float, float, int | None]:
    c = ctx.colligation
    top = max(ctx.free.N - 1, 0)
    return transfer_coeffs(c, top).max_difference(ctx.free, top), 1e-10, top


def _realize_nilpotent(ctx: SuiteContext) -> tuple[float, float, int | None]:
    B = ctx.free
    c = ctx.colligation
    order = max(min(B.N, 4), 1)
    err = 0.0
    for k in range(NILPOTENT_POINTS):
        p = random_nilpotent_point(B.d, order + 1, order, ctx.seed + k)
        err = max(err, nilpotent_exactness_error(c, B, p))
    return err, 1e-10, order


def _realize_coisometry(ctx: SuiteContext) -> tuple[float, float, int | None]:
    c = ctx.colligation
    return c.coisometry_defect(), 1e-7, ctx.free.N - 1


def _realize_observability(ctx: SuiteContext) -> tuple[float, float, int | None]:
    c = ctx.colligation
    deficiency = c.state_dim - observability_rank(c, ctx.free.N)
    return float(deficiency), 0.0, ctx.free.N


# ============================================================================
# Commutative checks
# ============================================================================


def _comm_round_trip(ctx: SuiteContext) -> tuple[float, float, int | None]:
    b = ctx.comm
    h0 = comm_cayley(b, ctx.settings.cond_guard).coeff(b.origin)
    mu = comm_moments(b, ctx.settings.nonunital_margin)
    back = comm_schur_from_moments(mu, 0.5 * (h0 - h0.conj().T))
    return back.max_difference(b), 1e-10, b.N


def _comm_dbr_psd(ctx: SuiteContext) -> tuple[float, float, int | None]:
    G = comm_dbr_gram(ctx.comm)
    return _psd_error(G, ctx.settings.psd_tol), ctx.settings.psd_tol, ctx.comm.N


def _comm_herglotz_psd(ctx: SuiteContext) -> tuple[float, float, int | None]:
    G = ctx.herglotz_space.gram
    return _psd_error(G, ctx.settings.psd_tol), ctx.settings.psd_tol, ctx.comm.N


def _comm_dilation(ctx: SuiteContext) -> tuple[float, float, int | None]:
    return dilation_error(ctx.tight), 1e-8, ctx.comm.N - 1


def _comm_clark(ext_name: str) -> CheckFn:
    def check(ctx: SuiteContext) -> tuple[float, float, int | None]:
        report = verify_comm_clark(getattr(ctx, ext_name))
        return max(report.max_error, report.gleason_excess), 1e-7, ctx.comm.N

    return check


def _comm_lift(ext_name: str) -> CheckFn:
    def check(ctx: SuiteContext) -> tuple[float, float, int | None]:
        left, _ = lift_from_extension(getattr(ctx, ext_name))
        result = check_free_lift(left, ctx.comm, Side.LEFT)
        return max(result.symmetrization_error, result.moment_error), result.tolerance, ctx.comm.N

    return check


def _comm_fiber_gram(ctx: SuiteContext) -> tuple[float, float, int | None]:
    err = 0.0
    for ext in (ctx.tight, ctx.random):
        left, _ = lift_from_extension(ext)
        err = max(err, fiber_gram_error(left, ctx.comm, Side.LEFT))
    return err, 1e-10, ctx.comm.N


def _comm_cauchy_factorization(ctx: SuiteContext) -> tuple[float, float, int | None]:
    _, right = lift_from_extension(ctx.tight)
    return cauchy_factorization_error(right, ctx.comm), 1e-8, ctx.comm.N


def _comm_transfer(ctx: SuiteContext) -> tuple[float, float, int | None]:
    b = ctx.comm
    c = comm_colligation_from_D(ctx.random)
    top = max(b.N - 1, 0)
    return comm_transfer_coeffs(c, top).max_difference(b, top), 1e-9, top


def _comm_route_agreement(ctx: SuiteContext) -> tuple[float, float, int | None]:
    b = ctx.comm
    safe = b.N - b.degree - 1
    return route_agreement_error(ctx.random), 1e-8, safe if safe >= 0 else None


# ============================================================================
# Registry
# ============================================================================

FREE_CHECKS: dict[Suite, dict[str, CheckFn]] = {
    Suite.HERGLOTZ: {
        "herglotz.round_trip": _herglotz_round_trip,
        "herglotz.kernel_cross_check": _herglotz_kernel_cross,
        "herglotz.herglotz_gram_psd": _herglotz_gram_psd,
        "herglotz.dbr_gram_psd": _dbr_gram_psd,
        "herglotz.dbr_gram_identity": _dbr_gram_identity,
    },
    Suite.GNS: {
        "gns.stinespring": _gns_stinespring,
        "gns.row_isometry": _gns_row_isometry,
    },
    Suite.CLARK: {
        **_clark_checks(Side.RIGHT),
        **_clark_checks(Side.LEFT),
        "clark.family_invariance": _clark_family_invariance,
    },
    Suite.LIFT: {},
    Suite.REALIZE: {
        "realize.transfer_coeffs": _realize_coeffs,
        "realize.nilpotent_exactness": _realize_nilpotent,
        "realize.coisometry": _realize_coisometry,
        "realize.observability": _realize_observability,
    },
}

COMM_CHECKS: dict[Suite, dict[str, CheckFn]] = {
    Suite.HERGLOTZ: {
        "herglotz.comm_round_trip": _comm_round_trip,
        "herglotz.comm_dbr_gram_psd": _comm_dbr_psd,
        "herglotz.symmetric_gram_psd": _comm_herglotz_psd,
    },
    Suite.GNS: {"gns.dilation": _comm_dilation},
    Suite.CLARK: {
        "clark.comm.tight": _comm_clark("tight"),
        "clark.comm.random": _comm_clark("random"),
    },
    Suite.LIFT: {
        "lift.tight": _comm_lift("tight"),
        "lift.random": _comm_lift("random"),
        "lift.fiber_gram": _comm_fiber_gram,
        "lift.cauchy_factorization": _comm_cauchy_factorization,
    },
    Suite.REALIZE: {
        "realize.comm_transfer_coeffs": _comm_transfer,
        "realize.route_agreement": _comm_route_agreement,
    },
}


def _selected(suite: Suite) -> list[Suite]:
    return [s for s in Suite if s != Suite.ALL] if suite == Suite.ALL else [suite]


def _result(
    name: str, outcome: tuple[float, float, int | None], tol: float | None, elapsed: float
) -> CheckResult:
    max_error, tolerance, safe = outcome
    tolerance = tol if tol is not None else tolerance
    ok = bool(np.isfinite(max_error)) and max_error <= tolerance
    return CheckResult(
        name=name,
        status=CheckStatus.PASS if ok else CheckStatus.FAIL,
        max_error=float(max_error),
        tolerance=float(tolerance),
        safe_degree=safe,
        runtime_ms=elapsed * 1000.0,
    )


def run_suite(
    instance: InstanceModel,
    suite: Suite = Suite.ALL,
    settings: Settings | None = None,
    N: int | None = None,
    tol: float | None = None,
) -> Report:
    """Run the named checks of a suite; a check that raises is recorded as failed."""
    settings = settings or load_settings()
    ctx = SuiteContext(instance, settings, N)
    registry = FREE_CHECKS if instance.mode == SeriesMode.FREE else COMM_CHECKS
    results: list[CheckResult] = []
    for s in _selected(suite):
        if instance.mode == SeriesMode.FREE and s == Suite.LIFT:
            start = time.perf_counter()
            for name, outcome in _lift_checks(ctx).items():
                results.append(_result(name, outcome, tol, time.perf_counter() - start))
            continue
        for name, check in registry[s].items():
            start = time.perf_counter()
            try:
                outcome = check(ctx)
            except FreeClarkError as exc:
                logger.warning(f"Check {name} raised: {exc}")
                result = _result(name, (float("inf"), 0.0, None), tol, time.perf_counter() - start)
                results.append(result.model_copy(update={"detail": str(exc)}))
                continue
            results.append(_result(name, outcome, tol, time.perf_counter() - start))
    passed = all(r.status == CheckStatus.PASS for r in results)
    logger.debug(f"Suite {suite}: {len(results)} checks, passed={passed}")
    return Report(
        suite=suite,
        checks=results,
        passed=passed,
        version=__version__,
        config=settings.model_dump(),
        seed=instance.metadata.seed,
    )
