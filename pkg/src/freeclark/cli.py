from __future__ import annotations

from pathlib import Path
from typing import TypeVar

import numpy as np
import typer
from loguru import logger
from pydantic import BaseModel, ValidationError
from rich.console import Console

from freeclark import __version__, texts
from freeclark.commutative import (
    build_herglotz_space,
    build_Vb,
    check_free_lift,
    comm_moments,
    lift_from_extension,
    phi_from_extension,
    random_extension,
)
from freeclark.config import Settings, load_settings
from freeclark.display import create_info_panel, create_moment_table, print_error, print_report
from freeclark.errors import FreeClarkError, ResolventError
from freeclark.freecore import Side
from freeclark.generators import random_comm_schur, random_free_schur
from freeclark.gns import quasi_extreme_indicator
from freeclark.herglotz_ac import check_nonunital, moments_from_schur
from freeclark.logging_config import setup_logging
from freeclark.realization import (
    Colligation,
    comm_colligation_from_D,
    comm_transfer_coeffs,
    comm_transfer_eval,
    free_colligation,
    nilpotent_exactness_error,
    transfer_coeffs,
    transfer_eval,
)
from freeclark.schemas import (
    Certification,
    CheckResult,
    CheckStatus,
    ColligationModel,
    CommMomentModel,
    CommSeriesModel,
    EvaluationModel,
    FreeSeriesModel,
    InstanceMetadata,
    InstanceModel,
    MomentModel,
    NCPointModel,
    Report,
    SeriesMode,
    Suite,
    encode_matrix,
)
from freeclark.series import CommSeries, FreeSeries, transpose_series
from freeclark.verification import run_suite

app = typer.Typer(
    help=texts.APP_HELP,
    pretty_exceptions_enable=False,
)
console = Console()

EXIT_FAIL = 1
EXIT_USAGE = 2

ModelT = TypeVar("ModelT", bound=BaseModel)


def version_callback(value: bool) -> None:
    if value:
        console.print(texts.VERSION_LINE.format(version=__version__))
        raise typer.Exit()


@app.callback()
def main(
    version: bool | None = typer.Option(
        None, "--version", callback=version_callback, is_eager=True, help="Show version and exit"
    ),
) -> None:
    """freeclark - free Aleksandrov-Clark computations on truncated Fock space."""
    # Setup logging according to .env / settings
    try:
        setup_logging(load_settings())
    except Exception:
        # Don't break CLI if logging setup fails
        pass


# ============================================================================
# Helpers
# ============================================================================


def _settings(tol: float | None = None) -> Settings:
    settings = load_settings()
    if tol is not None:
        settings = settings.model_copy(update={"psd_tol": tol})
    return settings


def _check_truncation(N: int | None, settings: Settings) -> None:
    if N is not None and N > settings.max_word_length:
        raise _usage_error(texts.ERROR_TRUNCATION.format(N=N, limit=settings.max_word_length))


def _load_model(path: Path, model: type[ModelT]) -> ModelT:
    if not path.exists():
        console.print(texts.ERROR_FILE_NOT_FOUND.format(path=path))
        raise typer.Exit(code=EXIT_USAGE)
    try:
        return model.model_validate_json(path.read_text())
    except ValidationError as exc:
        console.print(texts.ERROR_INVALID_JSON.format(path=path, message=exc.errors()[0]["msg"]))
        raise typer.Exit(code=EXIT_USAGE) from None


def _emit(payload: BaseModel, output: Path | None) -> None:
    data = payload.model_dump_json(indent=2)
    if output is None:
        typer.echo(data)
        return
    output.write_text(data + "\n")
    console.print(texts.MSG_WRITTEN.format(path=output))


def _usage_error(message: str) -> typer.Exit:
    print_error(message)
    return typer.Exit(code=EXIT_USAGE)


def _free_series(instance: InstanceModel) -> FreeSeries:
    if instance.mode != SeriesMode.FREE or instance.free is None:
        raise _usage_error(texts.ERROR_MODE_FREE)
    return instance.free.to_series()


def _comm_series(instance: InstanceModel) -> CommSeries:
    if instance.mode != SeriesMode.COMM or instance.comm is None:
        raise _usage_error(texts.ERROR_MODE_COMM)
    return instance.comm.to_series()


def _parse_extension(value: str) -> int | None:
    """None for the tight extension, the seed for 'random:<seed>'."""
    if value == "tight":
        return None
    kind, _, seed = value.partition(":")
    if kind != "random" or not seed.lstrip("-").isdigit():
        raise _usage_error(texts.ERROR_EXTENSION.format(value=value))
    return int(seed)


# ============================================================================
# Commands
# ============================================================================


@app.command()
def gen(
    d: int = typer.Option(1, "--d", min=1, max=9, help=texts.HELP_D),
    m: int = typer.Option(1, "--m", min=1, help=texts.HELP_M),
    deg: int = typer.Option(1, "--deg", min=0, help=texts.HELP_DEG),
    rho: float | None = typer.Option(None, "--rho", help=texts.HELP_RHO),
    seed: int = typer.Option(0, "--seed", help=texts.HELP_SEED),
    mode: SeriesMode = typer.Option(SeriesMode.FREE, "--mode", help=texts.HELP_MODE),
    N: int | None = typer.Option(None, "--N", min=0, help=texts.HELP_N),
    output: Path | None = typer.Option(None, "--output", "-o", help=texts.HELP_OUTPUT),
) -> None:
    """Generate a seeded random Schur instance with ℓ¹ coefficient norm rho."""
    settings = load_settings()
    rho = settings.default_rho if rho is None else rho
    N = settings.truncation if N is None else N
    _check_truncation(N, settings)
    try:
        if mode == SeriesMode.FREE:
            F = random_free_schur(d, m, deg, rho, seed, N)
            payload = {"free": FreeSeriesModel.from_series(F)}
        else:
            b = random_comm_schur(d, m, deg, rho, seed, N)
            payload = {"comm": CommSeriesModel.from_series(b)}
    except FreeClarkError as exc:
        raise _usage_error(str(exc)) from None
    instance = InstanceModel(
        mode=mode,
        metadata=InstanceMetadata(
            seed=seed,
            d=d,
            m=m,
            deg=deg,
            rho=rho,
            certification=Certification.L1,
            generator=f"random_{mode}_schur",
        ),
        **payload,
    )
    logger.debug(f"Generated {mode} instance d={d} m={m} deg={deg} seed={seed}")
    _emit(instance, output)


@app.command()
def verify(
    instance_path: Path = typer.Argument(..., help="Instance JSON file"),
    N: int | None = typer.Option(None, "--N", min=0, help=texts.HELP_N),
    suite: Suite = typer.Option(Suite.ALL, "--suite", help=texts.HELP_SUITE),
    tol: float | None = typer.Option(None, "--tol", help=texts.HELP_TOL),
    output: Path | None = typer.Option(None, "--output", "-o", help=texts.HELP_OUTPUT),
    quiet: bool = typer.Option(False, "--quiet", "-q", help=texts.HELP_QUIET),
) -> None:
    """Run a verification suite; exit 0 iff every check passes."""
    instance = _load_model(instance_path, InstanceModel)
    try:
        if instance.mode == SeriesMode.FREE:
            check_nonunital(_free_series(instance))
        else:
            _comm_series(instance)
    except FreeClarkError as exc:
        raise _usage_error(str(exc)) from None
    settings = _settings(tol)
    _check_truncation(N, settings)
    report = run_suite(instance, suite, settings, N=N, tol=tol)
    if not quiet:
        print_report(report)
    if output is not None or quiet:
        _emit(report, output)
    if not report.passed:
        raise typer.Exit(code=EXIT_FAIL)


@app.command()
def moments(
    instance_path: Path = typer.Argument(..., help="Instance JSON file"),
    max_len: int | None = typer.Option(None, "--max-len", min=0, help=texts.HELP_MAX_LEN),
    output: Path | None = typer.Option(None, "--output", "-o", help=texts.HELP_OUTPUT),
) -> None:
    """Aleksandrov-Clark moments of a free or commutative instance."""
    instance = _load_model(instance_path, InstanceModel)
    settings = load_settings()
    try:
        if instance.mode == SeriesMode.FREE:
            B = _free_series(instance)
            top = B.N if max_len is None else min(max_len, B.N)
            phi = moments_from_schur(B, Side.LEFT, settings.nonunital_margin).truncated(top)
            if output is not None:
                console.print(create_moment_table(phi, top))
            _emit(MomentModel.from_functional(phi), output)
        else:
            b = _comm_series(instance)
            mu = comm_moments(b, settings.nonunital_margin)
            if max_len is not None:
                kept = {n: v for n, v in mu.moments.items() if sum(n) <= max_len}
                mu = type(mu)(mu.d, mu.m, min(max_len, mu.N), mu.mu_I, kept)
            _emit(CommMomentModel.from_functional(mu), output)
    except FreeClarkError as exc:
        raise _usage_error(str(exc)) from None


@app.command()
def lift(
    comm_path: Path = typer.Option(..., "--comm", help="Commutative instance JSON file"),
    extension: str = typer.Option("tight", "--extension", help=texts.HELP_EXTENSION),
    output: Path | None = typer.Option(None, "--output", "-o", help=texts.HELP_OUTPUT),
    report_path: Path | None = typer.Option(None, "--report", help="Write the lift report here"),
) -> None:
    """Free lift of a commutative Schur series through an extension of V^b."""
    source = _load_model(comm_path, InstanceModel)
    b = _comm_series(source)
    seed = _parse_extension(extension)
    settings = load_settings()
    try:
        space = build_herglotz_space(
            comm_moments(b, settings.nonunital_margin), b, settings.rank_tol, settings.psd_tol
        )
        ext = build_Vb(space, settings.rank_tol)
        if seed is not None:
            ext = random_extension(ext, seed, settings.default_rho)
        left, _ = lift_from_extension(ext)
        indicator = quasi_extreme_indicator(phi_from_extension(ext))
        check = check_free_lift(left, b, Side.LEFT)
    except FreeClarkError as exc:
        raise _usage_error(str(exc)) from None

    results = [
        CheckResult(
            name=name,
            status=CheckStatus.PASS if err <= check.tolerance else CheckStatus.FAIL,
            max_error=err,
            tolerance=check.tolerance,
            safe_degree=b.N,
        )
        for name, err in (
            ("lift.symmetrization", check.symmetrization_error),
            ("lift.moment_restriction", check.moment_error),
        )
    ]
    report = Report(
        suite=Suite.LIFT,
        checks=results,
        passed=check.passed,
        version=__version__,
        config=settings.model_dump(),
        seed=source.metadata.seed,
    )
    console.print(
        create_info_panel(
            [
                f"extension: [cyan]{extension}[/cyan]",
                f"quasi-extreme indicator: [cyan]{indicator:.6e}[/cyan]",
                f"lift check: {texts.STATUS_PASS if check.passed else texts.STATUS_FAIL}",
            ],
            texts.LIFT_TITLE,
        )
    )
    instance = InstanceModel(
        mode=SeriesMode.FREE,
        free=FreeSeriesModel.from_series(left),
        lift_of=CommSeriesModel.from_series(b),
        metadata=source.metadata.model_copy(
            update={"generator": "lift", "extension": extension, "deg": left.degree}
        ),
    )
    _emit(instance, output)
    if report_path is not None:
        _emit(report, report_path)
    if not check.passed:
        raise typer.Exit(code=EXIT_FAIL)


@app.command()
def realize(
    instance_path: Path = typer.Argument(..., help="Instance JSON file"),
    point: Path | None = typer.Option(None, "--point", help=texts.HELP_POINT),
    coeffs: int | None = typer.Option(None, "--coeffs", min=0, help=texts.HELP_COEFFS),
    colligation: Path | None = typer.Option(None, "--colligation", help=texts.HELP_COLLIGATION),
    output: Path | None = typer.Option(None, "--output", "-o", help=texts.HELP_OUTPUT),
) -> None:
    """Evaluate the canonical colligation's transfer function or list its coefficients."""
    if (point is None) == (coeffs is None):
        raise _usage_error(texts.ERROR_REALIZE_ARGS)
    instance = _load_model(instance_path, InstanceModel)
    p = _load_model(point, NCPointModel).to_point() if point is not None else None
    settings = load_settings()
    try:
        if instance.mode == SeriesMode.FREE:
            B = _free_series(instance)
            c: Colligation = free_colligation(transpose_series(B), Side.RIGHT)
        else:
            b = _comm_series(instance)
            space = build_herglotz_space(
                comm_moments(b, settings.nonunital_margin), b, settings.rank_tol, settings.psd_tol
            )
            c = comm_colligation_from_D(build_Vb(space, settings.rank_tol))
    except FreeClarkError as exc:
        raise _usage_error(str(exc)) from None
    if colligation is not None:
        _emit(ColligationModel.from_colligation(c), colligation)

    if coeffs is not None:
        if instance.mode == SeriesMode.FREE:
            _emit(FreeSeriesModel.from_series(transfer_coeffs(c, coeffs)), output)
        else:
            _emit(CommSeriesModel.from_series(comm_transfer_coeffs(c, coeffs)), output)
        return

    if p is None:
        raise _usage_error(texts.ERROR_REALIZE_ARGS)
    nilpotent_error = None
    try:
        if instance.mode == SeriesMode.FREE:
            value = transfer_eval(c, p)
            order = p.nilpotency_order(B.N)
            if order is not None and order <= B.N:
                nilpotent_error = nilpotent_exactness_error(c, B, p)
                console.print(texts.MSG_NILPOTENT_CHECK.format(error=nilpotent_error))
        else:
            if p.n != 1:
                raise _usage_error("Commutative evaluation needs a scalar point (n = 1)")
            value = comm_transfer_eval(c, np.array([z[0, 0] for z in p.Z]))
    except ResolventError as exc:
        console.print(texts.ERROR_RESOLVENT.format(message=exc))
        raise typer.Exit(code=EXIT_FAIL) from None
    except FreeClarkError as exc:
        raise _usage_error(str(exc)) from None
    _emit(
        EvaluationModel(
            mode=instance.mode,
            state_dim=c.state_dim,
            value=encode_matrix(value),
            nilpotent_error=nilpotent_error,
        ),
        output,
    )
